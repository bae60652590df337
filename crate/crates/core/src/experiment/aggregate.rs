use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean and standard error of one metric across runs, per time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve {
    pub agent: String,
    pub metric: String,
    pub t: Vec<usize>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Sample mean and standard deviation (`n − 1` denominator, zero for a
/// single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl AggregateCurve {
    /// Aggregates per-run series, each aligned with `t`.
    pub fn from_runs(agent: &str, metric: &str, t: Vec<usize>, runs: &[Vec<f64>]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InsufficientSamples("no runs to aggregate".into()));
        }
        if runs.iter().any(|r| r.len() != t.len()) {
            return Err(Error::Misaligned("run series and time index differ in length"));
        }
        let mut mean = Vec::with_capacity(t.len());
        let mut stderr = Vec::with_capacity(t.len());
        let mut column = vec![0.0; runs.len()];
        for i in 0..t.len() {
            for (c, r) in column.iter_mut().zip(runs) {
                *c = r[i];
            }
            let (m, s) = mean_std(&column);
            mean.push(m);
            stderr.push(s / (runs.len() as f64).sqrt());
        }
        Ok(Self {
            agent: agent.to_string(),
            metric: metric.to_string(),
            t,
            mean,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Mean at time index `t`.
    pub fn at(&self, t: usize) -> Option<f64> {
        self.t.iter().position(|&x| x == t).map(|i| self.mean[i])
    }

    /// Average of the means over `lo ≤ t ≤ hi`.
    pub fn window_mean(&self, lo: usize, hi: usize) -> Option<f64> {
        let picked: Vec<f64> = self
            .t
            .iter()
            .zip(&self.mean)
            .filter(|(t, _)| (lo..=hi).contains(*t))
            .map(|(_, m)| *m)
            .collect();
        (!picked.is_empty()).then(|| picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

/// Finds the curve for `agent` and `metric`.
pub fn find_curve<'a>(curves: &'a [AggregateCurve], agent: &str, metric: &str) -> Option<&'a AggregateCurve> {
    curves.iter().find(|c| c.agent == agent && c.metric == metric)
}
