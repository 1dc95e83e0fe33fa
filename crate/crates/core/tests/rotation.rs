use finsurr::geometry::{
    builtin_shapes, embed, rotate_point, rotate_skeleton, segment_fin, skeleton_to_vector,
    stroke_axis_distance, AxisFrame, Point3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(a: Point3, b: Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn zero_angles_give_the_flat_embedding_exactly() {
    for shape in builtin_shapes() {
        let flat = segment_fin(&shape, &AxisFrame::rig(), 10).unwrap();
        let frame = rotate_skeleton(&flat, 0.0, 0.0);
        for (p, c) in frame.points.iter().zip(&flat.coms) {
            assert_eq!(*p, embed(*c));
        }
        let v = skeleton_to_vector(&frame);
        assert_eq!(v.len(), 30);
        assert!(v.iter().skip(1).step_by(3).all(|&y| y == 0.0));
    }
}

#[test]
fn pairwise_distances_are_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let pts: Vec<Point3> = (0..10)
            .map(|_| embed([rng.gen_range(-5.0..15.0), rng.gen_range(0.0..25.0)]))
            .collect();
        let (s, p) = (rng.gen_range(-90.0..90.0), rng.gen_range(-90.0..90.0));
        let rot: Vec<Point3> = pts.iter().map(|&q| rotate_point(q, s, p)).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d0 = dist(pts[i], pts[j]);
                let d1 = dist(rot[i], rot[j]);
                worst = worst.max((d1 - d0).abs() / d0);
            }
            // Norm about the origin as well.
            let n0 = dist(pts[i], [0.0; 3]);
            worst = worst.max((dist(rot[i], [0.0; 3]) - n0).abs() / n0);
        }
    }
    assert!(worst < 1e-10, "worst relative distortion {worst:e}");
}

#[test]
fn pitch_then_stroke_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let q = embed([rng.gen_range(-5.0..10.0), rng.gen_range(0.0..20.0)]);
        let (s, p) = (rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
        let pitched = rotate_point(q, 0.0, p);
        let both = rotate_point(pitched, s, 0.0);
        let direct = rotate_point(q, s, p);
        assert!(dist(both, direct) < 1e-12);
        // Pitch keeps the spanwise coordinate; stroke keeps the chordwise one
        // and the distance to the stroke axis.
        assert!((pitched[2] - q[2]).abs() < 1e-12);
        assert!((both[0] - pitched[0]).abs() < 1e-12);
        assert!((stroke_axis_distance(both) - stroke_axis_distance(pitched)).abs() < 1e-12);
    }
}

#[test]
fn opposite_strokes_mirror_the_skeleton() {
    let shape = &builtin_shapes()[0];
    let flat = segment_fin(shape, &AxisFrame::rig(), 10).unwrap();
    let up = rotate_skeleton(&flat, 30.0, 0.0);
    let down = rotate_skeleton(&flat, -30.0, 0.0);
    for (a, b) in up.points.iter().zip(&down.points) {
        assert!((a[0] - b[0]).abs() < 1e-12);
        assert!((a[1] + b[1]).abs() < 1e-12);
        assert!((a[2] - b[2]).abs() < 1e-12);
        assert!(a[1] > 0.0);
    }
}
