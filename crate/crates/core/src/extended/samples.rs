use super::self_normalize;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// `T` rows of `N` weighted pseudo-samples.
///
/// Log-weights are stored unnormalized; estimators self-normalize each row and
/// then average rows, so every row is one instance of the post-hoc weighting
/// estimator. Single-chain baselines use `N = 1` with zero log-weights;
/// importance samplers store all particles in a single row.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampleSet {
    pub method: String,
    pub dim: usize,
    pub num_pseudo: usize,
    /// Row-major `T × N × dim`.
    pub draws: Vec<f64>,
    /// Row-major `T × N`.
    pub log_weights: Vec<f64>,
    pub betas: Option<Vec<f64>>,
    pub acceptance_rate: f64,
    pub seed: u64,
}

/// JSON summary written next to the CSV draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSummary {
    pub method: String,
    pub rows: usize,
    pub num_pseudo: usize,
    pub dim: usize,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub acceptance_rate: f64,
    pub seed: u64,
}

impl WeightedSampleSet {
    pub fn new(method: impl Into<String>, dim: usize, num_pseudo: usize, seed: u64) -> Self {
        Self {
            method: method.into(),
            dim,
            num_pseudo,
            draws: Vec::new(),
            log_weights: Vec::new(),
            betas: None,
            acceptance_rate: f64::NAN,
            seed,
        }
    }

    pub fn push_row(&mut self, draws: &[f64], log_weights: &[f64], betas: Option<&[f64]>) {
        debug_assert_eq!(draws.len(), self.num_pseudo * self.dim);
        debug_assert_eq!(log_weights.len(), self.num_pseudo);
        self.draws.extend_from_slice(draws);
        self.log_weights.extend_from_slice(log_weights);
        if let Some(b) = betas {
            self.betas.get_or_insert_with(Vec::new).extend_from_slice(b);
        }
    }

    pub fn rows(&self) -> usize {
        self.log_weights.len() / self.num_pseudo.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn draw(&self, row: usize, index: usize) -> &[f64] {
        let start = (row * self.num_pseudo + index) * self.dim;
        &self.draws[start..start + self.dim]
    }

    pub fn row_log_weights(&self, row: usize) -> &[f64] {
        &self.log_weights[row * self.num_pseudo..(row + 1) * self.num_pseudo]
    }

    /// Per-draw weights: self-normalized within each row and divided by the row count.
    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        let rows = self.rows();
        if rows == 0 {
            return Err(Error::EmptyOutput("weighted sample set has no draws".into()));
        }
        let mut out = Vec::with_capacity(self.log_weights.len());
        for row in 0..rows {
            let w = self_normalize(self.row_log_weights(row)).ok_or(Error::DegenerateWeights { row })?;
            out.extend(w.into_iter().map(|v| v / rows as f64));
        }
        Ok(out)
    }

    /// Self-normalized estimate of `E_π[f]`.
    pub fn weighted_expectation<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<f64> {
        let weights = self.normalized_weights()?;
        Ok(weights
            .iter()
            .enumerate()
            .map(|(k, w)| if *w == 0.0 { 0.0 } else { w * f(&self.draws[k * self.dim..(k + 1) * self.dim]) })
            .sum())
    }

    /// Coordinate-wise weighted `(E[X], E[X²])`.
    pub fn weighted_moments(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let weights = self.normalized_weights()?;
        let mut mean = vec![0.0; self.dim];
        let mut second = vec![0.0; self.dim];
        for (k, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let x = &self.draws[k * self.dim..(k + 1) * self.dim];
            for i in 0..self.dim {
                mean[i] += w * x[i];
                second[i] += w * x[i] * x[i];
            }
        }
        Ok((mean, second))
    }

    pub fn summary(&self) -> Result<SampleSummary> {
        let (mean, second_moment) = self.weighted_moments()?;
        Ok(SampleSummary {
            method: self.method.clone(),
            rows: self.rows(),
            num_pseudo: self.num_pseudo,
            dim: self.dim,
            mean,
            second_moment,
            acceptance_rate: self.acceptance_rate,
            seed: self.seed,
        })
    }

    /// Writes `iter, pseudo_index, x_1..x_d, beta, log_weight`; `beta` is left
    /// empty when the sampler has no temperatures.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header = vec!["iter".to_string(), "pseudo_index".to_string()];
        header.extend((1..=self.dim).map(|i| format!("x_{i}")));
        header.push("beta".into());
        header.push("log_weight".into());
        writer.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for row in 0..self.rows() {
            for i in 0..self.num_pseudo {
                record.clear();
                record.push(row.to_string());
                record.push(i.to_string());
                record.extend(self.draw(row, i).iter().map(|v| v.to_string()));
                let k = row * self.num_pseudo + i;
                record.push(self.betas.as_ref().map_or(String::new(), |b| b[k].to_string()));
                record.push(self.log_weights[k].to_string());
                writer.write_record(&record)?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    /// Reads a file written by [`write_csv`](Self::write_csv). Method, seed and
    /// acceptance rate live in the JSON summary and are not restored.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let dim = headers.iter().filter(|h| h.starts_with("x_")).count();
        let mut set = WeightedSampleSet::new("csv", dim, 0, 0);
        let mut betas = Vec::new();
        let mut has_beta = true;
        let mut max_index = 0usize;
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::InvalidSpec(format!("bad number {s:?}: {e}")))
        };
        for record in reader.records() {
            let record = record?;
            let index: usize = record[1].parse().map_err(|e| Error::InvalidSpec(format!("bad index: {e}")))?;
            max_index = max_index.max(index);
            for j in 0..dim {
                set.draws.push(parse(&record[2 + j])?);
            }
            let beta = &record[2 + dim];
            if beta.is_empty() {
                has_beta = false;
            } else {
                betas.push(parse(beta)?);
            }
            set.log_weights.push(parse(&record[3 + dim])?);
        }
        set.num_pseudo = max_index + 1;
        if has_beta && !betas.is_empty() {
            set.betas = Some(betas);
        }
        Ok(set)
    }
}
