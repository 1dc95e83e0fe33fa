use serde::{Deserialize, Serialize};

use super::polygon::{self, Point2};
use super::shape::{AxisFrame, FinShape};
use crate::error::{Error, Result};

pub const DEFAULT_STRIPS: usize = 10;

/// Absolute area tolerance for cut placement, relative to the fin area.
const CUT_AREA_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

/// Equal-area spanwise strips of a flat fin and their centers of mass,
/// expressed in the axis frame and ordered root to tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSkeleton {
    pub coms: Vec<Point2>,
    pub strip_areas: Vec<f64>,
    /// Strip boundaries in `z`, root to tip (`n_strips + 1` values).
    pub cuts: Vec<f64>,
    pub total_area: f64,
    /// Fin tip in the axis frame.
    pub tip: Point2,
}

impl FlatSkeleton {
    pub fn len(&self) -> usize {
        self.coms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coms.is_empty()
    }

    /// Returns a copy with every strip area multiplied by `factor`.
    pub fn with_scaled_areas(&self, factor: f64) -> FlatSkeleton {
        let mut out = self.clone();
        out.strip_areas.iter_mut().for_each(|a| *a *= factor);
        out.total_area *= factor;
        out
    }
}

/// Splits the fin into `n_strips` equal-area strips with cut lines parallel
/// to the stroke axis (constant `z`), and returns each strip's centroid.
pub fn segment_fin(shape: &FinShape, frame: &AxisFrame, n_strips: usize) -> Result<FlatSkeleton> {
    if n_strips == 0 {
        return Err(Error::Domain("n_strips must be at least 1".into()));
    }
    let poly = shape.registered(frame);
    let total_area = polygon::area(&poly);
    let (z_lo, z_hi) = polygon::z_bounds(&poly);
    if total_area <= CUT_AREA_TOL * (z_hi - z_lo).powi(2) {
        return Err(Error::InvalidShape {
            name: shape.name().into(),
            reason: "area is not positive".into(),
        });
    }

    let mut cuts = Vec::with_capacity(n_strips + 1);
    cuts.push(z_lo);
    for k in 1..n_strips {
        let target = total_area * k as f64 / n_strips as f64;
        let lo = *cuts.last().expect("non-empty");
        cuts.push(find_cut(&poly, target, total_area, lo, z_hi)?);
    }
    cuts.push(z_hi);

    let mut coms = Vec::with_capacity(n_strips);
    let mut strip_areas = Vec::with_capacity(n_strips);
    for (k, w) in cuts.windows(2).enumerate() {
        let strip = if n_strips == 1 {
            poly.clone()
        } else {
            polygon::band(&poly, w[0], w[1])
        };
        let a = polygon::area(&strip);
        let com = match polygon::centroid(&strip) {
            Some(c) if w[1] > w[0] && a > 0.0 => c,
            _ => {
                return Err(Error::Internal(format!(
                    "strip {k} of `{}` is degenerate (z in [{}, {}])",
                    shape.name(),
                    w[0],
                    w[1]
                )))
            }
        };
        coms.push(com);
        strip_areas.push(a);
    }

    Ok(FlatSkeleton {
        coms,
        strip_areas,
        cuts,
        total_area,
        tip: shape.tip(frame),
    })
}

/// Bisection on the monotone cumulative-area function `A(z)`.
fn find_cut(poly: &[Point2], target: f64, total: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let tol = CUT_AREA_TOL * total;
    let f_lo = polygon::area_below(poly, lo) - target;
    let f_hi = polygon::area_below(poly, hi) - target;
    if f_lo > tol || f_hi < -tol {
        return Err(Error::Internal(format!(
            "cut search failed to bracket cumulative area {target}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let f = polygon::area_below(poly, mid) - target;
        if f.abs() <= tol || mid <= lo || mid >= hi {
            break;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> FinShape {
        FinShape::new(
            "rect",
            vec![[0.0, 0.0], [10.0, 0.0], [10.0, 20.0], [0.0, 20.0]],
        )
        .unwrap()
    }

    #[test]
    fn rectangle_strip_coms_are_band_centers() {
        let sk = segment_fin(&rect(), &AxisFrame::origin(), 10).unwrap();
        assert_eq!(sk.len(), 10);
        for (k, c) in sk.coms.iter().enumerate() {
            let z = (k as f64 + 0.5) * 2.0;
            assert!((c[0] - 5.0).abs() < 1e-9, "{c:?}");
            assert!((c[1] - z).abs() < 1e-9, "{c:?}");
            assert!((sk.strip_areas[k] - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_strip_is_whole_polygon() {
        let tri = FinShape::new("tri", vec![[0.0, 0.0], [10.0, 0.0], [0.0, 20.0]]).unwrap();
        let frame = AxisFrame::new(2.0, 1.0).unwrap();
        let sk = segment_fin(&tri, &frame, 1).unwrap();
        let c = polygon::centroid(&tri.registered(&frame)).unwrap();
        assert_eq!(sk.coms, vec![c]);
        assert_eq!(sk.strip_areas, vec![100.0]);
    }

    #[test]
    fn zero_strips_rejected() {
        assert!(segment_fin(&rect(), &AxisFrame::rig(), 0).is_err());
    }

    #[test]
    fn offsets_shift_coms() {
        let sk = segment_fin(&rect(), &AxisFrame::rig(), 10).unwrap();
        assert!((sk.coms[0][0] - 3.75).abs() < 1e-9);
        assert!((sk.coms[0][1] - 4.175).abs() < 1e-9);
        assert_eq!(sk.tip, [8.75, 23.175]);
    }
}
