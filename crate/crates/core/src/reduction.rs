//! Weighted and unweighted PCA over skeleton vectors.
//!
//! Each dimension is mean-centered and then rescaled so that its standard
//! deviation is 1 (unweighted) or the absolute Pearson correlation between
//! that dimension and normalized thrust (weighted). Principal axes come from
//! the covariance of the rescaled data.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_COMPONENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PcaMode {
    Weighted,
    Unweighted,
}

impl fmt::Display for PcaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PcaMode::Weighted => "weighted",
            PcaMode::Unweighted => "unweighted",
        })
    }
}

impl FromStr for PcaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(PcaMode::Weighted),
            "unweighted" => Ok(PcaMode::Unweighted),
            _ => Err(Error::Config(format!("unknown PCA mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaReducer {
    pub mode: PcaMode,
    pub k: usize,
    pub means: Vec<f64>,
    /// Multiplier applied after centering; zero for dimensions without
    /// spread or without correlation to thrust.
    pub scales: Vec<f64>,
    /// `k` orthonormal axes, each of the input dimension.
    pub axes: Vec<Vec<f64>>,
    /// Standard deviation along each kept axis, non-increasing.
    pub component_stds: Vec<f64>,
    /// Every eigenvalue of the scaled covariance, descending.
    pub eigenvalues: Vec<f64>,
}

/// Pearson correlation; `None` when either column has no spread.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let denom = (sxx * syy).sqrt();
    if denom > 0.0 && sxx > 1e-24 * n * mx.abs().max(1.0).powi(2) {
        Some((sxy / denom).clamp(-1.0, 1.0))
    } else {
        None
    }
}

pub fn fit_pca<S: AsRef<[f64]>>(
    data: &[S],
    thrusts: Option<&[f64]>,
    mode: PcaMode,
    k: usize,
) -> Result<PcaReducer> {
    let n = data.len();
    let Some(dim) = data.first().map(|r| r.as_ref().len()) else {
        return Err(Error::Dataset("PCA needs data".into()));
    };
    if k == 0 || k > dim {
        return Err(Error::Config(format!(
            "component count must be in 1..={dim}, got {k}"
        )));
    }
    if n < k + 1 {
        return Err(Error::Dataset(format!(
            "PCA with {k} components needs at least {} samples, got {n}",
            k + 1
        )));
    }
    if let Some(r) = data.iter().find(|r| r.as_ref().len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            actual: r.as_ref().len(),
        });
    }
    let thrusts = match (mode, thrusts) {
        (PcaMode::Weighted, None) => {
            return Err(Error::Config("weighted PCA needs thrust values".into()))
        }
        (_, Some(t)) if t.len() != n => {
            return Err(Error::Dimension {
                expected: n,
                actual: t.len(),
            })
        }
        (_, t) => t,
    };

    let nf = n as f64;
    let mut means = vec![0.0; dim];
    for r in data {
        for (m, x) in means.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= nf);

    let column = |j: usize| -> Vec<f64> { data.iter().map(|r| r.as_ref()[j]).collect() };
    let mut scales = Vec::with_capacity(dim);
    for (j, &mean) in means.iter().enumerate() {
        let col = column(j);
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nf;
        let sd = var.sqrt();
        let spread = sd > 1e-12 * mean.abs().max(1.0);
        let target = match mode {
            PcaMode::Unweighted => 1.0,
            PcaMode::Weighted => thrusts
                .and_then(|t| pearson(&col, t))
                .map(f64::abs)
                .unwrap_or(0.0),
        };
        scales.push(if spread { target / sd } else { 0.0 });
    }

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut row = vec![0.0; dim];
    for r in data {
        for ((out, x), (m, s)) in row
            .iter_mut()
            .zip(r.as_ref())
            .zip(means.iter().zip(&scales))
        {
            *out = (x - m) * s;
        }
        for a in 0..dim {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in a..dim {
                cov[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..dim {
        for b in a..dim {
            let v = cov[(a, b)] / nf;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let axes: Vec<Vec<f64>> = order[..k]
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let lead = v
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(1.0);
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    let component_stds = eigenvalues[..k].iter().map(|l| l.sqrt()).collect();

    Ok(PcaReducer {
        mode,
        k,
        means,
        scales,
        axes,
        component_stds,
        eigenvalues,
    })
}

impl PcaReducer {
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// `((x - means) * scales) . axes`
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let scaled: Vec<f64> = x
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(x, (m, s))| (x - m) * s)
            .collect();
        Ok(self
            .axes
            .iter()
            .map(|axis| axis.iter().zip(&scaled).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Maps reduced coordinates back to the input space. Dimensions with a
    /// zero scale come back as their mean.
    pub fn reconstruct(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k {
            return Err(Error::Dimension {
                expected: self.k,
                actual: z.len(),
            });
        }
        Ok((0..self.dim())
            .map(|j| {
                let scaled: f64 = self.axes.iter().zip(z).map(|(axis, c)| axis[j] * c).sum();
                if self.scales[j] == 0.0 {
                    self.means[j]
                } else {
                    self.means[j] + scaled / self.scales[j]
                }
            })
            .collect())
    }

    /// Fraction of scaled variance captured by the kept axes.
    pub fn explained_fraction(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        self.eigenvalues[..self.k].iter().sum::<f64>() / total
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..d)
                    .map(|j| rng.gen_range(-1.0..1.0) * (j + 1) as f64)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn rank_one_data() {
        let dir: Vec<f64> = (0..30).map(|j| (j as f64 * 0.37).sin() + 1.1).collect();
        let data: Vec<Vec<f64>> = (0..50)
            .map(|i| dir.iter().map(|d| d * (i as f64 - 20.0) + 3.0).collect())
            .collect();
        let r = fit_pca(&data, None, PcaMode::Unweighted, 4).unwrap();
        assert!(r.component_stds[0] > 1.0);
        for s in &r.component_stds[1..] {
            assert!(*s < 1e-6, "{s}");
        }
    }

    #[test]
    fn axes_orthonormal_and_sign_convention() {
        let data = random_data(200, 6, 3);
        let r = fit_pca(&data, None, PcaMode::Unweighted, 6).unwrap();
        for (i, a) in r.axes.iter().enumerate() {
            for (j, b) in r.axes.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
            let lead = a
                .iter()
                .copied()
                .max_by(|x, y| x.abs().total_cmp(&y.abs()))
                .unwrap();
            assert!(lead > 0.0);
        }
        assert!(r.component_stds.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn projection_of_mean_is_zero_and_full_rank_inverts() {
        let data = random_data(100, 5, 9);
        let r = fit_pca(&data, None, PcaMode::Unweighted, 5).unwrap();
        assert!(r.project(&r.means).unwrap().iter().all(|v| v.abs() < 1e-12));
        for x in &data[..10] {
            let back = r.reconstruct(&r.project(x).unwrap()).unwrap();
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(r.project(&[1.0]).is_err());
    }

    #[test]
    fn weighted_scales_are_absolute_correlations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 7.0])
            .collect();
        let thrust: Vec<f64> = data.iter().map(|r| -2.0 * r[0] + 0.1 * r[1]).collect();
        let r = fit_pca(&data, Some(&thrust), PcaMode::Weighted, 2).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = data.iter().map(|row| row[j]).collect();
            let sd = crate::preprocess::population_std(&col);
            let rho = pearson(&col, &thrust).unwrap().abs();
            assert!((r.scales[j] * sd - rho).abs() < 1e-12);
        }
        assert_eq!(r.scales[2], 0.0);
        // Strongly correlated dimension dominates the first axis.
        assert!(r.axes[0][0].abs() > 0.9);
    }

    #[test]
    fn argument_errors() {
        let data = random_data(5, 3, 1);
        assert!(fit_pca(&data, None, PcaMode::Unweighted, 4).is_err());
        assert!(fit_pca(&data, None, PcaMode::Unweighted, 5).is_err());
        assert!(fit_pca(&data[..3], None, PcaMode::Unweighted, 3).is_err());
        assert!(fit_pca(&data, None, PcaMode::Weighted, 2).is_err());
        assert!(fit_pca(&data, None, PcaMode::Unweighted, 0).is_err());
    }
}
