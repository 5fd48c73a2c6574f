//! Static stability of the support polygon.

use nalgebra::Vector2;
use thiserror::Error;

use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("support polygon needs at least 3 stance feet, got {0}")]
    TooFewFeet(usize),
    #[error("degenerate support polygon (area {area:.3e} m^2)")]
    DegenerateSupport { area: f64 },
}

/// Smallest support area accepted, m^2.
pub const MIN_SUPPORT_AREA: f64 = 1e-6;

fn cross<T: Real>(o: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counterclockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull<T: Real>(points: &[Vector2<T>]) -> Vec<Vector2<T>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vector2<T>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<T>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

pub fn polygon_area<T: Real>(poly: &[Vector2<T>]) -> T {
    let n = poly.len();
    let mut twice = T::zero();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        twice += a.x * b.y - b.x * a.y;
    }
    twice * lit(0.5)
}

fn segment_distance<T: Real>(p: &Vector2<T>, a: &Vector2<T>, b: &Vector2<T>) -> T {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).max(T::zero()).min(T::one());
    (p - (a + ab * t)).norm()
}

/// Signed distance from the ground projection of the centre of mass to the
/// boundary of the support polygon: positive inside, negative outside.
pub fn stability_margin<T: Real>(stance_feet: &[Vector2<T>], com_xy: &Vector2<T>) -> Result<T, StabilityError> {
    if stance_feet.len() < 3 {
        return Err(StabilityError::TooFewFeet(stance_feet.len()));
    }
    let hull = convex_hull(stance_feet);
    let area = if hull.len() >= 3 { polygon_area(&hull) } else { T::zero() };
    if to_f64(area) < MIN_SUPPORT_AREA {
        return Err(StabilityError::DegenerateSupport { area: to_f64(area) });
    }
    let n = hull.len();
    // Half-plane distances; for a ccw hull each is positive on the inner side.
    let mut inside = T::max_value().unwrap();
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let d = cross(&a, &b, com_xy) / (b - a).norm();
        inside = inside.min(d);
    }
    if inside >= T::zero() {
        return Ok(inside);
    }
    let outside = (0..n).map(|i| segment_distance(com_xy, &hull[i], &hull[(i + 1) % n])).fold(T::max_value().unwrap(), |m, d| m.min(d));
    Ok(-outside)
}
