//! Gittins indices for Bernoulli levers with a uniform prior.
//!
//! The index of state `(s, f)` is the retirement reward `λ` at which a
//! decision maker is indifferent between retiring forever (earning `λ` per
//! step) and pulling the lever once more, with geometric discount `α`.
//!
//! For a fixed `λ` one backward induction over the Beta lattice decides
//! pull-vs-retire for *every* state at once, and that decision is monotone in
//! `λ`. The table is therefore calibrated by sweeping `λ` over a uniform grid
//! of spacing `tol`: each state's index lies between the last grid value at
//! which pulling still wins and the next one.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GITTINS1";

/// Indices for all states with `successes + failures < horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct GittinsTable {
    horizon: usize,
    discount: f64,
    tolerance: f64,
    values: Vec<f64>,
}

fn slot(successes: usize, failures: usize) -> usize {
    let n = successes + failures;
    n * (n + 1) / 2 + successes
}

impl GittinsTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of lattice states, `H (H + 1) / 2`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, successes: u64, failures: u64) -> Result<f64> {
        let (s, f) = (successes as usize, failures as usize);
        if s + f >= self.horizon {
            return Err(Error::BeyondHorizon {
                successes,
                failures,
                horizon: self.horizon,
            });
        }
        Ok(self.values[slot(s, f)])
    }

    /// Cache file name for a given key.
    pub fn cache_file_name(horizon: usize, discount: f64, tolerance: f64) -> String {
        format!("gittins_h{horizon}_a{discount}_tol{tolerance}.bin")
    }

    /// Writes the table in a small little-endian binary format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(40 + 8 * self.values.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.horizon as u64).to_le_bytes());
        buf.extend_from_slice(&self.discount.to_le_bytes());
        buf.extend_from_slice(&self.tolerance.to_le_bytes());
        buf.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let tmp = path.with_extension("tmp");
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(&buf).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let corrupt = |reason: &str| Error::Cache {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < 40 || &bytes[..8] != MAGIC {
            return Err(corrupt("bad header"));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
        let horizon = u64::from_le_bytes(word(0)) as usize;
        let discount = f64::from_le_bytes(word(1));
        let tolerance = f64::from_le_bytes(word(2));
        let count = u64::from_le_bytes(word(3)) as usize;
        if count != horizon * (horizon + 1) / 2 || bytes.len() != 40 + 8 * count {
            return Err(corrupt("length does not match horizon"));
        }
        let values = bytes[40..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            horizon,
            discount,
            tolerance,
            values,
        })
    }

    /// Loads the table for this key from `dir`, computing and caching it on a
    /// miss. Returns the table and the cache path.
    pub fn load_or_compute(dir: &Path, horizon: usize, discount: f64, tolerance: f64) -> Result<(Self, PathBuf)> {
        let path = dir.join(Self::cache_file_name(horizon, discount, tolerance));
        if path.exists() {
            if let Ok(t) = Self::load(&path) {
                if t.horizon == horizon && t.discount == discount && t.tolerance == tolerance {
                    return Ok((t, path));
                }
            }
        }
        let table = compute_gittins_table(horizon, discount, tolerance)?;
        table.save(&path)?;
        Ok((table, path))
    }
}

/// Builds the index table for horizon `horizon`, discount `discount` and
/// calibration tolerance `tol`.
///
/// States with `s + f = horizon` are terminal: there the lever's mean is taken
/// as known, so the value is `max(λ, mean) / (1 − α)`.
pub fn compute_gittins_table(horizon: usize, discount: f64, tol: f64) -> Result<GittinsTable> {
    if horizon < 2 {
        return Err(Error::InvalidParameter(format!("Gittins horizon {horizon} < 2")));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::InvalidParameter(format!("discount {discount} outside (0, 1)")));
    }
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} outside (0, 0.5)")));
    }
    let h = horizon;
    let states = h * (h + 1) / 2;
    let steps = (1.0 / tol).ceil() as usize;
    let spacing = 1.0 / steps as f64;
    let scale = 1.0 / (1.0 - discount);

    // Largest grid value of λ at which pulling beats retiring.
    let mut last_pull = vec![f64::NEG_INFINITY; states];
    let mut next = vec![0.0; h + 2];
    let mut cur = vec![0.0; h + 2];
    for k in 0..=steps {
        let lambda = k as f64 * spacing;
        let retire = lambda * scale;
        for s in 0..=h {
            let mean = (s as f64 + 1.0) / (h as f64 + 2.0);
            next[s] = lambda.max(mean) * scale;
        }
        for n in (0..h).rev() {
            let base = n * (n + 1) / 2;
            let inv = 1.0 / (n as f64 + 2.0);
            let row = &mut last_pull[base..base + n + 1];
            for s in 0..=n {
                let p = (s as f64 + 1.0) * inv;
                let pull = p * (1.0 + discount * next[s + 1]) + (1.0 - p) * discount * next[s];
                let wins = pull > retire;
                row[s] = if wins { lambda } else { row[s] };
                cur[s] = if wins { pull } else { retire };
            }
            std::mem::swap(&mut next, &mut cur);
        }
    }

    let mut values = Vec::with_capacity(states);
    for n in 0..h {
        for s in 0..=n {
            let lo = last_pull[slot(s, n - s)];
            if !lo.is_finite() || lo >= 1.0 {
                return Err(Error::Calibration {
                    successes: s as u64,
                    failures: (n - s) as u64,
                    residual: lo,
                });
            }
            values.push((lo + 0.5 * spacing).min(1.0));
        }
    }
    Ok(GittinsTable {
        horizon,
        discount,
        tolerance: tol,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_are_dense() {
        let mut seen = Vec::new();
        for n in 0..10 {
            for s in 0..=n {
                seen.push(slot(s, n - s));
            }
        }
        assert_eq!(seen, (0..55).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(compute_gittins_table(1, 0.9, 1e-3).is_err());
        assert!(compute_gittins_table(10, 1.0, 1e-3).is_err());
        assert!(compute_gittins_table(10, 0.9, 0.0).is_err());
    }

    #[test]
    fn myopic_limit_is_posterior_mean() {
        let t = compute_gittins_table(30, 1e-6, 1e-4).unwrap();
        for n in 0..30u64 {
            for s in 0..=n {
                let mean = (s as f64 + 1.0) / (n as f64 + 2.0);
                assert!((t.index(s, n - s).unwrap() - mean).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn beyond_horizon_is_an_error() {
        let t = compute_gittins_table(5, 0.9, 1e-3).unwrap();
        assert_eq!(t.len(), 15);
        assert!(t.index(2, 2).is_ok());
        assert!(matches!(t.index(3, 2), Err(Error::BeyondHorizon { .. })));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (a, path) = GittinsTable::load_or_compute(dir.path(), 20, 0.95, 1e-3).unwrap();
        assert!(path.exists());
        let b = GittinsTable::load(&path).unwrap();
        assert_eq!(a, b);
        std::fs::write(&path, b"garbage").unwrap();
        assert!(matches!(GittinsTable::load(&path), Err(Error::Cache { .. })));
        // A corrupt cache is rebuilt.
        let (c, _) = GittinsTable::load_or_compute(dir.path(), 20, 0.95, 1e-3).unwrap();
        assert_eq!(a, c);
    }
}
