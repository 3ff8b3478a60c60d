//! Regions, distances and disk-difference areas.
//!
//! Every region is an origin-centred square `[-side/2, side/2]²`. A torus is
//! the same square with opposite edges identified, so its distance is the
//! minimum over lattice translates by `side`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Point::new(self.x * factor, self.y * factor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Square,
    Torus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    kind: RegionKind,
    side: f64,
}

impl Region {
    pub fn new(kind: RegionKind, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "region side must be positive and finite, got {side}"
            )));
        }
        Ok(Region { kind, side })
    }

    /// Square of the given side. Panics if `side` is not positive.
    #[track_caller]
    pub fn square(side: f64) -> Self {
        Region::new(RegionKind::Square, side).expect("invalid square side")
    }

    /// Torus of the given side. Panics if `side` is not positive.
    #[track_caller]
    pub fn torus(side: f64) -> Self {
        Region::new(RegionKind::Torus, side).expect("invalid torus side")
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, p: Point) -> bool {
        let h = self.half();
        p.x.abs() <= h && p.y.abs() <= h
    }

    /// Distance under the region's own metric.
    pub fn distance(&self, p: Point, q: Point) -> f64 {
        match self.kind {
            RegionKind::Square => euclidean_distance(p, q),
            RegionKind::Torus => toroidal_distance(p, q, self.side),
        }
    }
}

pub fn euclidean_distance(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Minimum Euclidean distance between `p` and the lattice translates of `q`
/// by multiples of `side`. Both points must lie in the fundamental square, so
/// the nine offsets in `{-side, 0, side}²` cover the minimum.
pub fn toroidal_distance(p: Point, q: Point, side: f64) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let mut best = f64::INFINITY;
    for ox in [-side, 0.0, side] {
        for oy in [-side, 0.0, side] {
            best = best.min((dx + ox).hypot(dy + oy));
        }
    }
    best
}

/// Area of `D(x₂, r) \ D(x₁, r)` for two disks of radius `r` whose centres
/// are `z` apart.
pub fn lens_difference_area(z: f64, r: f64) -> f64 {
    debug_assert!(z >= 0.0 && r > 0.0);
    if z >= 2.0 * r {
        return PI * r * r;
    }
    let s = (1.0 - z * z / (4.0 * r * r)).max(0.0).sqrt();
    (PI * r * r - 2.0 * r * r * s.asin() + z * r * s).max(0.0)
}

/// Derivative of [`lens_difference_area`] with respect to `z`.
pub fn lens_difference_area_slope(z: f64, r: f64) -> f64 {
    if z >= 2.0 * r {
        return 0.0;
    }
    2.0 * r * (1.0 - z * z / (4.0 * r * r)).max(0.0).sqrt()
}

/// Area of `S ∩ D(x₁, r) \ D(x₂, r)` where `S` is the region's square.
///
/// The inner (vertical) measure is exact interval arithmetic; the outer
/// integral over `x` is adaptive Gauss–Kronrod, split at every abscissa where
/// two of the boundary curves cross. Absolute tolerance is 1e-6 or better.
pub fn clipped_lens_difference_area(x1: Point, x2: Point, r: f64, region: &Region) -> f64 {
    let h = region.half();
    let lo = (x1.x - r).max(-h);
    let hi = (x1.x + r).min(h);
    if hi <= lo {
        return 0.0;
    }

    let chord = |c: Point, x: f64| -> Option<(f64, f64)> {
        let dx = x - c.x;
        let q = r * r - dx * dx;
        if q < 0.0 {
            None
        } else {
            let w = q.sqrt();
            Some((c.y - w, c.y + w))
        }
    };
    let measure = |x: f64| -> f64 {
        let Some((a, b)) = chord(x1, x) else {
            return 0.0;
        };
        let a = a.max(-h);
        let b = b.min(h);
        if b <= a {
            return 0.0;
        }
        let overlap = match chord(x2, x) {
            Some((c, d)) => (b.min(d) - a.max(c)).max(0.0),
            None => 0.0,
        };
        (b - a - overlap).max(0.0)
    };

    let mut breaks = vec![lo, hi, x2.x - r, x2.x + r, x1.x, x2.x];
    // Circle/circle crossings.
    let dx = x2.x - x1.x;
    let dy = x2.y - x1.y;
    let d = dx.hypot(dy);
    if d > 0.0 && d < 2.0 * r {
        let mx = 0.5 * (x1.x + x2.x);
        let off = (r * r - 0.25 * d * d).max(0.0).sqrt();
        breaks.push(mx - off * dy / d);
        breaks.push(mx + off * dy / d);
    }
    // Circles against the horizontal edges of the square.
    for c in [x1, x2] {
        for edge in [-h, h] {
            let q = r * r - (edge - c.y).powi(2);
            if q >= 0.0 {
                breaks.push(c.x - q.sqrt());
                breaks.push(c.x + q.sqrt());
            }
        }
    }
    breaks.retain(|&b| b >= lo && b <= hi);

    quad::integrate(measure, &breaks, Tolerance::new(1e-9, 1e-12)).value
}

/// Angular measure (radians) of the circle of radius `r` about `y` that lies
/// inside the square `[-half, half]²`.
///
/// Each side cuts off an arc centred on its outward normal with half-angle
/// `acos(d/r)`; arcs of opposite sides never meet and adjacent ones overlap by
/// `max(0, αᵢ + αⱼ − π/2)`.
pub fn angle_inside_square(y: Point, r: f64, half: f64) -> f64 {
    if r <= 0.0 {
        return 2.0 * PI;
    }
    let d = [half - y.x, half - y.y, half + y.x, half + y.y];
    let alpha = d.map(|di| if r <= di { 0.0 } else { (di.max(0.0) / r).acos() });
    let mut cut = 2.0 * alpha.iter().sum::<f64>();
    for k in 0..4 {
        cut -= (alpha[k] + alpha[(k + 1) % 4] - 0.5 * PI).max(0.0);
    }
    (2.0 * PI - cut).clamp(0.0, 2.0 * PI)
}

/// Angular intervals `[θa, θb]` (θ measured from the +x axis, possibly
/// extending beyond `[0, 2π)`) of the circle of radius `r` about `y` that lie
/// inside the square `[-half, half]²`.
pub fn arcs_inside_square(y: Point, r: f64, half: f64) -> Vec<(f64, f64)> {
    // Excluded arcs, one per side, as (centre angle, half-width).
    let d = [half - y.x, half - y.y, half + y.x, half + y.y];
    let mut excluded: Vec<(f64, f64)> = Vec::with_capacity(4);
    for (k, &di) in d.iter().enumerate() {
        if r > di {
            let a = (di.max(0.0) / r).acos();
            let c = 0.5 * PI * k as f64;
            excluded.push((c - a, c + a));
        }
    }
    if excluded.is_empty() {
        return vec![(0.0, 2.0 * PI)];
    }
    // Normalise excluded intervals into [0, 2π) pieces and merge.
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for (a, b) in excluded {
        if a < 0.0 {
            pieces.push((a + 2.0 * PI, 2.0 * PI));
            pieces.push((0.0, b));
        } else {
            pieces.push((a, b.min(2.0 * PI)));
            if b > 2.0 * PI {
                pieces.push((0.0, b - 2.0 * PI));
            }
        }
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in pieces {
        match merged.last_mut() {
            Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
            _ => merged.push(p),
        }
    }
    let mut inside = Vec::new();
    let mut cursor = 0.0;
    for (a, b) in merged {
        if a > cursor {
            inside.push((cursor, a));
        }
        cursor = cursor.max(b);
    }
    if cursor < 2.0 * PI {
        inside.push((cursor, 2.0 * PI));
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(euclidean_distance(Point::new(0.7, -0.2), Point::new(0.7, -0.2)), 0.0);
        let p = Point::new(-0.45, 0.0);
        let q = Point::new(0.45, 0.0);
        assert!((euclidean_distance(p, q) - 0.9).abs() < 1e-15);
        assert!((toroidal_distance(p, q, 1.0) - 0.1).abs() < 1e-12);
        let a = toroidal_distance(Point::new(0.0, 0.0), Point::new(0.2, 0.0), 1.0);
        assert!((a - 0.2).abs() < 1e-15);
        let c = toroidal_distance(Point::new(-0.45, -0.45), Point::new(0.45, 0.45), 1.0);
        assert!((c - 0.1 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lens_examples() {
        assert_eq!(lens_difference_area(0.0, 1.0), 0.0);
        assert!((lens_difference_area(2.0, 1.0) - PI).abs() < 1e-15);
        let expected = PI - 2.0 * (3f64.sqrt() / 2.0).asin() + 3f64.sqrt() / 2.0;
        assert!((lens_difference_area(1.0, 1.0) - expected).abs() < 1e-14);
        assert!((expected - 1.913_222_954_981_036).abs() < 1e-12);
    }

    #[test]
    fn region_rejects_nonpositive_side() {
        assert!(Region::new(RegionKind::Square, 0.0).is_err());
        assert!(Region::new(RegionKind::Torus, -1.0).is_err());
        assert!(Region::new(RegionKind::Square, f64::NAN).is_err());
    }

    #[test]
    fn clipped_lens_without_clipping_matches_closed_form() {
        let region = Region::square(20.0);
        let x1 = Point::new(0.3, -0.2);
        let x2 = Point::new(0.9, 0.4);
        let z = euclidean_distance(x1, x2);
        let got = clipped_lens_difference_area(x1, x2, 1.0, &region);
        assert!((got - lens_difference_area(z, 1.0)).abs() < 1e-8);
        assert_eq!(clipped_lens_difference_area(x1, x1, 1.0, &region), 0.0);
    }

    #[test]
    fn angle_inside_corner_and_edge() {
        let half = 5.0;
        let corner = Point::new(half, half);
        assert!((angle_inside_square(corner, 1.0, half) - 0.5 * PI).abs() < 1e-12);
        let edge = Point::new(half, 0.0);
        assert!((angle_inside_square(edge, 1.0, half) - PI).abs() < 1e-12);
        assert!((angle_inside_square(Point::ORIGIN, 1.0, half) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(angle_inside_square(Point::ORIGIN, 8.0, half), 0.0);
    }

    proptest! {
        #[test]
        fn torus_never_exceeds_euclid(
            px in -0.5f64..0.5, py in -0.5f64..0.5,
            qx in -0.5f64..0.5, qy in -0.5f64..0.5,
            side in 0.1f64..50.0,
        ) {
            let p = Point::new(px * side, py * side);
            let q = Point::new(qx * side, qy * side);
            let t = toroidal_distance(p, q, side);
            prop_assert!(t <= euclidean_distance(p, q) + 1e-12);
            prop_assert!(t <= side * 2f64.sqrt() / 2.0 + 1e-12);
            // Anchored at the origin, the torus norm is the Euclidean norm.
            let o = toroidal_distance(p, Point::ORIGIN, side);
            prop_assert!((o - euclidean_distance(p, Point::ORIGIN)).abs() < 1e-12);
        }

        #[test]
        fn arcs_agree_with_angle(
            yx in -0.5f64..0.5, yy in -0.5f64..0.5,
            r in 0.01f64..8.0,
        ) {
            let half = 2.5;
            let y = Point::new(yx * 5.0, yy * 5.0);
            let total: f64 = arcs_inside_square(y, r, half).iter().map(|(a, b)| b - a).sum();
            prop_assert!((total - angle_inside_square(y, r, half)).abs() < 1e-9);
        }
    }
}
