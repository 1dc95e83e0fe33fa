//! Shipped fin outlines.
//!
//! `rect` is exact. `bio` and `pt4` are synthetic stand-ins drawn to match the
//! character of the physical fins (a root-heavy rounded pectoral fin and a
//! tip-heavy insect-like wing); they are not digitized from real hardware.

use super::shape::FinShape;

/// Categorical codes used by the baseline models.
pub const SHAPE_CODES: [(&str, f64); 3] = [("pt4", -1.0), ("rect", 0.0), ("bio", 1.0)];

pub fn shape_code(name: &str) -> Option<f64> {
    SHAPE_CODES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|&(_, c)| c)
}

const RECT: [[f64; 2]; 4] = [[0.0, 0.0], [10.0, 0.0], [10.0, 20.0], [0.0, 20.0]];

const BIO: [[f64; 2]; 11] = [
    [0.0, 0.0],
    [24.0, 0.0],
    [16.0, 2.5],
    [10.0, 5.5],
    [6.5, 9.0],
    [4.0, 12.5],
    [2.4, 15.5],
    [1.2, 18.2],
    [0.5, 20.0],
    [0.0, 19.6],
    [0.0, 10.0],
];

const PT4: [[f64; 2]; 12] = [
    [0.0, 0.0],
    [1.2, 0.0],
    [3.0, 3.0],
    [6.0, 7.0],
    [10.0, 11.0],
    [13.5, 14.5],
    [15.0, 16.5],
    [13.0, 18.5],
    [8.0, 19.6],
    [2.0, 20.0],
    [0.3, 19.5],
    [0.0, 10.0],
];

/// `rect`, `bio`, `pt4`, in that order.
pub fn builtin_shapes() -> Vec<FinShape> {
    vec![
        FinShape::new("rect", RECT.to_vec()).expect("rect outline is valid"),
        FinShape::new("bio", BIO.to_vec()).expect("bio outline is valid"),
        FinShape::new("pt4", PT4.to_vec()).expect("pt4 outline is valid"),
    ]
}

pub fn builtin_shape(name: &str) -> Option<FinShape> {
    builtin_shapes().into_iter().find(|s| s.name() == name)
}
