//! Thrust normalization and the thrust-deviation metric.

use finsurr::kinematics::KinematicSetting;
use finsurr::preprocess::{
    mean_tip_speed, point_speed, thrust_coefficient, thrust_deviation, DevSample, NormStats,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A cycle with `per_cell` samples in every one of the `2 * n_bins` cells.
fn dense_cycle(n_bins: usize, per_cell: usize, thrust: impl Fn(f64, u8) -> f64) -> Vec<DevSample> {
    let mut out = Vec::new();
    for state in [0u8, 1] {
        for b in 0..n_bins {
            for j in 0..per_cell {
                let angle =
                    -60.0 + 120.0 * (b as f64 + (j as f64 + 0.5) / per_cell as f64) / n_bins as f64;
                out.push(DevSample {
                    stroke_angle: angle,
                    stroke_state: state,
                    thrust: thrust(angle, state),
                });
            }
        }
    }
    out
}

fn profile(angle: f64, state: u8) -> f64 {
    (angle.to_radians() * 2.0).sin() + if state == 1 { 0.3 } else { -0.1 }
}

#[test]
fn identical_cycles_have_zero_deviation() {
    let c = dense_cycle(100, 1, profile);
    assert_eq!(thrust_deviation(&[c.clone(), c.clone()], 100).unwrap(), 0.0);
    assert_eq!(
        thrust_deviation(&[c.clone(), c.clone(), c], 100).unwrap(),
        0.0
    );
}

#[test]
fn constant_offset_pair_gives_half_the_offset() {
    for c in [0.5, 0.2588, 3.0] {
        let a = dense_cycle(100, 1, profile);
        let b = dense_cycle(100, 1, |s, st| profile(s, st) + c);
        let dev = thrust_deviation(&[a, b], 100).unwrap();
        assert!((dev - c / 2.0).abs() < 1e-12, "offset {c}: {dev}");
    }
}

#[test]
fn sparse_cells_count_as_zero() {
    // Only half of the cells receive a pair; the others are empty.
    let a = dense_cycle(50, 1, |_, _| 0.0);
    let b = dense_cycle(50, 1, |_, _| 1.0);
    let mut a2 = a.clone();
    let mut b2 = b.clone();
    // Stretch the stroke range so the samples fill only the lower 50 of 100 bins.
    a2.push(DevSample {
        stroke_angle: 180.0,
        stroke_state: 0,
        thrust: 0.0,
    });
    b2.push(DevSample {
        stroke_angle: 180.0,
        stroke_state: 0,
        thrust: 0.0,
    });
    let dev = thrust_deviation(&[a2, b2], 100).unwrap();
    assert!((dev - 0.25).abs() < 1e-12, "{dev}");
}

#[test]
fn deviation_scales_linearly_and_ignores_order_and_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n_cycles = rng.gen_range(2..6);
        let cycles: Vec<Vec<DevSample>> = (0..n_cycles)
            .map(|_| {
                (0..rng.gen_range(20..80))
                    .map(|_| DevSample {
                        stroke_angle: rng.gen_range(-40.0..40.0),
                        stroke_state: rng.gen_range(0..2),
                        thrust: rng.gen_range(-2.0..2.0),
                    })
                    .collect()
            })
            .collect();
        let base = thrust_deviation(&cycles, 100).unwrap();
        let alpha = rng.gen_range(0.1..10.0);
        let scaled: Vec<Vec<DevSample>> = cycles
            .iter()
            .map(|c| {
                c.iter()
                    .map(|s| DevSample {
                        thrust: alpha * s.thrust,
                        ..*s
                    })
                    .collect()
            })
            .collect();
        let dev = thrust_deviation(&scaled, 100).unwrap();
        assert!(
            (dev - alpha * base).abs() <= 1e-12 * (1.0 + alpha * base),
            "{dev} vs {}",
            alpha * base
        );

        let shift = rng.gen_range(-5.0..5.0);
        let shifted: Vec<Vec<DevSample>> = cycles
            .iter()
            .map(|c| {
                c.iter()
                    .map(|s| DevSample {
                        thrust: s.thrust + shift,
                        ..*s
                    })
                    .collect()
            })
            .collect();
        assert!((thrust_deviation(&shifted, 100).unwrap() - base).abs() < 1e-12);

        let mut reordered = cycles.clone();
        reordered.reverse();
        assert!((thrust_deviation(&reordered, 100).unwrap() - base).abs() < 1e-12);
    }
}

#[test]
fn single_cycle_is_rejected() {
    let c = dense_cycle(10, 1, profile);
    assert!(thrust_deviation(&[c], 100).is_err());
}

#[test]
fn tip_speed_without_pitch_is_four_r_theta_f() {
    for (amp, freq, r_cm) in [(60.0, 1.0, 23.175), (25.0, 2.0, 20.0), (40.0, 0.5, 7.5)] {
        let s = KinematicSetting::new(amp, 0.0, freq, 24).unwrap();
        let v = mean_tip_speed([3.0, r_cm], &s, 90.0);
        let expected = 4.0 * (r_cm / 100.0) * f64::to_radians(amp) * freq;
        assert!(
            ((v - expected) / expected).abs() < 1e-6,
            "{v} vs {expected}"
        );
    }
}

#[test]
fn point_speed_matches_finite_difference() {
    let s = KinematicSetting::new(60.0, 40.0, 1.0, 24).unwrap();
    let p = [-1.0, 15.0];
    let pos = |t: f64| {
        let st = s.stroke_angle(t);
        let pi = s.pitch_angle(t, 90.0);
        finsurr::geometry::rotate_point(finsurr::geometry::embed(p), st, pi)
    };
    for k in 0..16 {
        let t = k as f64 / 16.0 + 0.013;
        let h = 1e-6;
        let (a, b) = (pos(t - h), pos(t + h));
        let fd = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt()
            / (2.0 * h);
        let v = point_speed(p, &s, 90.0, t);
        assert!((v - fd).abs() < 1e-5 * fd.max(1.0), "t {t}: {v} vs {fd}");
    }
}

#[test]
fn coefficient_definition() {
    let c = thrust_coefficient(2.0, 1000.0, 0.5, 0.02).unwrap();
    assert!((c - 2.0 / (0.5 * 1000.0 * 0.25 * 0.02)).abs() < 1e-12);
}

#[test]
fn normalization_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| vec![rng.gen_range(-3.0..9.0), 4.0, rng.gen_range(0.0..1.0)])
        .collect();
    let coeffs: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let norm = NormStats::fit(rows.iter().map(Vec::as_slice), &coeffs).unwrap();
    assert_eq!(norm.constant, vec![1]);
    let z: Vec<Vec<f64>> = rows.iter().map(|r| norm.apply(r)).collect();
    for j in [0, 2] {
        let col: Vec<f64> = z.iter().map(|r| r[j]).collect();
        let m = col.iter().sum::<f64>() / 200.0;
        let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 200.0;
        assert!(m.abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
    }
    assert!(z.iter().all(|r| r[1] == 0.0));
    for (r, zr) in rows.iter().zip(&z) {
        for (a, b) in r.iter().zip(norm.invert(zr)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    let scaled: Vec<f64> = coeffs.iter().map(|&c| norm.normalize_thrust(c)).collect();
    let m = scaled.iter().sum::<f64>() / 200.0;
    let sd = (scaled.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 200.0).sqrt();
    assert!((sd - 1.0).abs() < 1e-12);
    assert!((norm.denormalize_thrust(norm.normalize_thrust(0.7)) - 0.7).abs() < 1e-15);
}
