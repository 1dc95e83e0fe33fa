//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use finsurr::geometry::{segment_fin, AxisFrame, FinShape};
use finsurr::reduction::{fit_pca, PcaMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type P = [f64; 2];

pub fn shoelace(poly: &[P]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

pub fn centroid(poly: &[P]) -> P {
    let n = poly.len();
    let a = shoelace(poly);
    let (mut cx, mut cz) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cz += (p[1] + q[1]) * cross;
    }
    [cx / (6.0 * a), cz / (6.0 * a)]
}

/// Keeps the part of `poly` with `sign * (z - level) >= 0`.
pub fn clip(poly: &[P], level: f64, sign: f64) -> Vec<P> {
    let inside = |p: &P| sign * (p[1] - level) >= 0.0;
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        if inside(&a) {
            out.push(a);
        }
        if inside(&a) != inside(&b) {
            let t = (level - a[1]) / (b[1] - a[1]);
            out.push([a[0] + t * (b[0] - a[0]), level]);
        }
    }
    out
}

pub fn band_area(poly: &[P], lo: f64, hi: f64) -> f64 {
    shoelace(&clip(&clip(poly, lo, 1.0), hi, -1.0)).abs()
}

pub fn random_convex(rng: &mut ChaCha8Rng) -> Vec<P> {
    let n = rng.gen_range(3..12);
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    let (rx, rz) = (rng.gen_range(2.0..15.0), rng.gen_range(5.0..25.0));
    let (cx, cz) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
    angles
        .iter()
        .map(|t| [cx + rx * t.cos(), cz + rz * t.sin()])
        .collect()
}

/// Worst errors of equal-area segmentation over random convex polygons.
#[derive(Debug, Default)]
pub struct ConvexErrors {
    /// Relative deviation of clipped strip areas (and reported areas) from A/10.
    pub area_rel: f64,
    /// Distance between the area-weighted COM mean and the polygon centroid.
    pub com_abs: f64,
}

pub fn convex_polygon_errors(seed: u64, trials: usize) -> ConvexErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = ConvexErrors::default();
    for trial in 0..trials {
        let shape = FinShape::new(format!("convex{trial}"), random_convex(&mut rng)).unwrap();
        let frame = AxisFrame::origin();
        let poly = shape.registered(&frame);
        let target = shoelace(&poly).abs() / 10.0;
        let sk = segment_fin(&shape, &frame, 10).unwrap();
        for k in 0..10 {
            let oracle = band_area(&poly, sk.cuts[k], sk.cuts[k + 1]);
            worst.area_rel = worst.area_rel.max(((oracle - target) / target).abs());
            worst.area_rel = worst
                .area_rel
                .max(((sk.strip_areas[k] - target) / target).abs());
        }
        let c = centroid(&poly);
        let total: f64 = sk.strip_areas.iter().sum();
        for axis in 0..2 {
            let m = sk
                .coms
                .iter()
                .zip(&sk.strip_areas)
                .map(|(p, a)| p[axis] * a)
                .sum::<f64>()
                / total;
            worst.com_abs = worst.com_abs.max((m - c[axis]).abs());
        }
    }
    worst
}

/// Eigenvalues (descending) and matching unit eigenvectors of a symmetric
/// matrix by cyclic Jacobi rotations.
pub fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

/// Gaussian data mixed through a random matrix, with per-column offsets and
/// growing column scales.
pub fn correlated_data(seed: u64, n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let offsets: Vec<f64> = (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            (0..d)
                .map(|i| {
                    offsets[i]
                        + (i as f64 + 1.0) * mix[i].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect()
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Worst relative disagreement between `fit_pca` and a from-scratch
/// scaling, covariance and Jacobi decomposition: column scales, every
/// eigenvalue, the explained fraction, top-k reconstruction error (model,
/// oracle projection and trailing-eigenvalue sum) and axis alignment.
pub fn pca_oracle_error(data: &[Vec<f64>], thrust: Option<&[f64]>, mode: PcaMode, k: usize) -> f64 {
    let n = data.len() as f64;
    let d = data[0].len();
    let means: Vec<f64> = (0..d)
        .map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let sds: Vec<f64> = (0..d)
        .map(|j| (data.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let target: Vec<f64> = match mode {
        PcaMode::Unweighted => vec![1.0; d],
        PcaMode::Weighted => {
            let t = thrust.expect("weighted mode needs thrust");
            let tm = t.iter().sum::<f64>() / n;
            let ts = (t.iter().map(|x| (x - tm).powi(2)).sum::<f64>() / n).sqrt();
            (0..d)
                .map(|j| {
                    let cov = data
                        .iter()
                        .zip(t)
                        .map(|(r, y)| (r[j] - means[j]) * (y - tm))
                        .sum::<f64>()
                        / n;
                    (cov / (sds[j] * ts)).abs()
                })
                .collect()
        }
    };
    let scales: Vec<f64> = target.iter().zip(&sds).map(|(t, s)| t / s).collect();
    let scaled: Vec<Vec<f64>> = data
        .iter()
        .map(|r| {
            r.iter()
                .zip(means.iter().zip(&scales))
                .map(|(x, (m, s))| (x - m) * s)
                .collect()
        })
        .collect();
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| scaled.iter().map(|r| r[a] * r[b]).sum::<f64>() / n)
                .collect()
        })
        .collect();
    let (values, vectors) = jacobi(cov);
    let total: f64 = values.iter().sum();

    let pca = fit_pca(data, thrust, mode, k).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in pca.scales.iter().zip(&scales) {
        worst = worst.max(rel(*a, *b));
    }
    for (a, b) in pca.eigenvalues.iter().zip(&values) {
        // Eigenvalues near zero are compared against the trace instead.
        worst = worst.max((a - b).abs() / b.abs().max(1e-12 * total));
    }
    worst = worst.max(rel(
        pca.explained_fraction(),
        values[..k].iter().sum::<f64>() / total,
    ));

    let mut err_model = 0.0;
    let mut err_oracle = 0.0;
    for (x, s) in data.iter().zip(&scaled) {
        let rec = pca.reconstruct(&pca.project(x).unwrap()).unwrap();
        err_model += x
            .iter()
            .zip(&rec)
            .zip(&scales)
            .map(|((a, b), c)| ((a - b) * c).powi(2))
            .sum::<f64>();
        let mut back = vec![0.0; d];
        for v in &vectors[..k] {
            let c: f64 = v.iter().zip(s).map(|(a, b)| a * b).sum();
            back.iter_mut().zip(v).for_each(|(o, a)| *o += c * a);
        }
        err_oracle += s
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
    }
    let err_trailing = n * values[k..].iter().sum::<f64>();
    worst = worst
        .max(rel(err_model, err_oracle))
        .max(rel(err_oracle, err_trailing));

    for (a, v) in pca.axes.iter().zip(&vectors) {
        let dot: f64 = a.iter().zip(v).map(|(x, y)| x * y).sum();
        worst = worst.max((dot.abs() - 1.0).abs());
    }
    worst
}

/// Thrust-like target correlated with a few columns of `data`.
pub fn synthetic_thrust(data: &[Vec<f64>], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.iter()
        .map(|r| 0.3 * r[0] - 0.05 * r[7] + 0.01 * r[20] + rng.gen_range(-1.0..1.0))
        .collect()
}
