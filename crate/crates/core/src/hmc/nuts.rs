//! No-U-Turn trajectories with multinomial selection.
//!
//! The trajectory doubles in a random direction until the span between its
//! outermost points starts turning back on itself. Within a subtree the
//! candidate is drawn uniformly in proportion to `exp(−H)`; when a new subtree
//! is merged into the full trajectory the switch is biased towards the new
//! half. A tree depth limit of one reduces to a single leapfrog step followed
//! by the usual Metropolis correction.

use rand::Rng;

use super::leapfrog::{leapfrog, PhasePoint};
use super::{LogDensity, Transition, DIVERGENCE_THRESHOLD};
use crate::math::log_add_exp;

struct Subtree {
    minus: PhasePoint,
    plus: PhasePoint,
    proposal: PhasePoint,
    log_weight: f64,
    sum_accept: f64,
    leaves: usize,
    divergent: bool,
    turning: bool,
}

impl Subtree {
    fn is_valid(&self) -> bool {
        !self.divergent && !self.turning
    }
}

struct Context<'a, D: ?Sized> {
    density: &'a D,
    step_size: f64,
    inv_mass: &'a [f64],
    initial_energy: f64,
}

fn is_turning(minus: &PhasePoint, plus: &PhasePoint, inv_mass: &[f64]) -> bool {
    let mut forward = 0.0;
    let mut backward = 0.0;
    for i in 0..minus.position.len() {
        let span = plus.position[i] - minus.position[i];
        forward += span * inv_mass[i] * plus.momentum[i];
        backward += span * inv_mass[i] * minus.momentum[i];
    }
    forward < 0.0 || backward < 0.0
}

fn build_tree<D, R>(ctx: &Context<'_, D>, edge: &PhasePoint, direction: f64, depth: usize, rng: &mut R) -> Subtree
where
    D: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    if depth == 0 {
        let mut point = edge.clone();
        let integrated = leapfrog(ctx.density, &mut point, direction * ctx.step_size, 1, ctx.inv_mass);
        let energy = point.hamiltonian(ctx.inv_mass);
        let delta = energy - ctx.initial_energy;
        let divergent = integrated.is_err() || !delta.is_finite() || delta.abs() > DIVERGENCE_THRESHOLD;
        let (log_weight, accept) = if divergent {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (-delta, (-delta).exp().min(1.0))
        };
        return Subtree {
            minus: point.clone(),
            plus: point.clone(),
            proposal: point,
            log_weight,
            sum_accept: accept,
            leaves: 1,
            divergent,
            turning: false,
        };
    }

    let first = build_tree(ctx, edge, direction, depth - 1, rng);
    if !first.is_valid() {
        return first;
    }
    let outer = if direction > 0.0 { &first.plus } else { &first.minus };
    let second = build_tree(ctx, outer, direction, depth - 1, rng);

    let log_weight = log_add_exp(first.log_weight, second.log_weight);
    let sum_accept = first.sum_accept + second.sum_accept;
    let leaves = first.leaves + second.leaves;
    if !second.is_valid() {
        return Subtree { log_weight, sum_accept, leaves, ..second };
    }

    let take_second = rng.random::<f64>().ln() < second.log_weight - log_weight;
    let (minus, plus) = if direction > 0.0 {
        (first.minus, second.plus)
    } else {
        (second.minus, first.plus)
    };
    let proposal = if take_second { second.proposal } else { first.proposal };
    let turning = is_turning(&minus, &plus, ctx.inv_mass);
    Subtree { minus, plus, proposal, log_weight, sum_accept, leaves, divergent: false, turning }
}

/// One NUTS transition from `current`, whose momentum is resampled here.
pub fn nuts_step<D, R>(
    density: &D,
    current: &PhasePoint,
    step_size: f64,
    inv_mass: &[f64],
    max_tree_depth: usize,
    rng: &mut R,
) -> (PhasePoint, Transition)
where
    D: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let mut start = current.clone();
    super::refresh_momentum(&mut start.momentum, inv_mass, rng);
    let ctx = Context { density, step_size, inv_mass, initial_energy: start.hamiltonian(inv_mass) };

    let mut minus = start.clone();
    let mut plus = start;
    let mut proposal_changed = false;
    let mut proposal = current.clone();
    let mut log_weight = 0.0;
    let mut sum_accept = 0.0;
    let mut leaves = 0usize;
    let mut divergent = false;
    let mut depth = 0;
    let mut terminated = false;

    while depth < max_tree_depth {
        let direction = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let edge = if direction > 0.0 { &plus } else { &minus };
        let subtree = build_tree(&ctx, edge, direction, depth, rng);
        depth += 1;
        sum_accept += subtree.sum_accept;
        leaves += subtree.leaves;
        if !subtree.is_valid() {
            divergent = subtree.divergent;
            terminated = true;
            break;
        }
        if rng.random::<f64>().ln() < subtree.log_weight - log_weight {
            proposal = subtree.proposal;
            proposal_changed = true;
        }
        log_weight = log_add_exp(log_weight, subtree.log_weight);
        if direction > 0.0 {
            plus = subtree.plus;
        } else {
            minus = subtree.minus;
        }
        if is_turning(&minus, &plus, inv_mass) {
            terminated = true;
            break;
        }
    }

    let delta_h = if proposal_changed {
        proposal.hamiltonian(inv_mass) - ctx.initial_energy
    } else {
        0.0
    };
    proposal.momentum.iter_mut().for_each(|p| *p = 0.0);
    let transition = Transition {
        accepted: proposal_changed,
        accept_stat: if leaves == 0 { 0.0 } else { sum_accept / leaves as f64 },
        delta_h,
        divergent,
        saturated: !terminated,
        tree_depth: depth,
        num_steps: leaves,
    };
    (proposal, transition)
}
