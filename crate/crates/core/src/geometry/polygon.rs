//! Planar polygon primitives in the fin plane.
//!
//! Points are `[x, z]`: `x` is chordwise (flow direction), `z` is spanwise.

pub type Point2 = [f64; 2];

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let [x0, z0] = poly[i];
        let [x1, z1] = poly[(i + 1) % n];
        acc += x0 * z1 - x1 * z0;
    }
    0.5 * acc
}

pub fn area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid. `None` for polygons with (numerically) zero area.
pub fn centroid(poly: &[Point2]) -> Option<Point2> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    // Shift to the first vertex to limit cancellation for offset polygons.
    let [ox, oz] = poly[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cz = 0.0;
    for i in 0..n {
        let [x0, z0] = poly[i];
        let [x1, z1] = poly[(i + 1) % n];
        let (x0, z0, x1, z1) = (x0 - ox, z0 - oz, x1 - ox, z1 - oz);
        let cross = x0 * z1 - x1 * z0;
        a2 += cross;
        cx += (x0 + x1) * cross;
        cz += (z0 + z1) * cross;
    }
    if a2 == 0.0 || !a2.is_finite() {
        return None;
    }
    Some([cx / (3.0 * a2) + ox, cz / (3.0 * a2) + oz])
}

pub fn z_bounds(poly: &[Point2]) -> (f64, f64) {
    poly.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        })
}

pub fn x_bounds(poly: &[Point2]) -> (f64, f64) {
    poly.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[0]), hi.max(p[0]))
        })
}

/// Which side of a constant-z line to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Below,
    Above,
}

/// Sutherland–Hodgman clip of `poly` against the half-plane `z <= level`
/// (`Keep::Below`) or `z >= level` (`Keep::Above`).
///
/// Non-convex input may produce zero-width bridge edges along the cut line;
/// those contribute nothing to area or centroid.
pub fn clip_z(poly: &[Point2], level: f64, keep: Keep) -> Vec<Point2> {
    let inside = |p: &Point2| match keep {
        Keep::Below => p[1] <= level,
        Keep::Above => p[1] >= level,
    };
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 4);
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let (cur_in, prev_in) = (inside(&cur), inside(&prev));
        if cur_in != prev_in {
            out.push(crossing(prev, cur, level));
        }
        if cur_in {
            out.push(cur);
        }
    }
    out
}

fn crossing(a: Point2, b: Point2, level: f64) -> Point2 {
    let t = (level - a[1]) / (b[1] - a[1]);
    [a[0] + t * (b[0] - a[0]), level]
}

/// Portion of the polygon between two constant-z lines.
pub fn band(poly: &[Point2], lo: f64, hi: f64) -> Vec<Point2> {
    clip_z(&clip_z(poly, lo, Keep::Above), hi, Keep::Below)
}

/// Polygon area with `z <= level`.
pub fn area_below(poly: &[Point2], level: f64) -> f64 {
    area(&clip_z(poly, level, Keep::Below))
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// First pair of non-adjacent edges that touch or cross, if any. O(n²).
pub fn first_self_intersection(poly: &[Point2]) -> Option<(usize, usize)> {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            // Adjacent edges share a vertex by construction.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}
