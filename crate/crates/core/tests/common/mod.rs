//! Brute-force references shared by the integration tests. Nothing here calls
//! into the quadrature code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `∫_{-r}^{t} √(r² − s²) ds` for `t ∈ [-r, r]`.
fn half_disk_strip(t: f64, r: f64) -> f64 {
    let t = t.clamp(-r, r);
    0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).asin()) + PI * r * r / 4.0
}

fn chord_mass(a: f64, b: f64, r: f64) -> f64 {
    if b <= a {
        0.0
    } else {
        half_disk_strip(b, r) - half_disk_strip(a, r)
    }
}

/// Area of `D(0, r) ∩ {X ≤ x, Y ≤ y}`.
fn quadrant_area(x: f64, y: f64, r: f64) -> f64 {
    if y <= -r || x <= -r {
        return 0.0;
    }
    let x = x.min(r);
    if y >= r {
        return 2.0 * chord_mass(-r, x, r);
    }
    let c = (r * r - y * y).sqrt();
    // Over |t| < c the column is cut at y; elsewhere it is the full chord (y ≥ 0) or empty (y < 0).
    let mid_hi = x.min(c);
    let mid = if mid_hi > -c {
        chord_mass(-c, mid_hi, r) + y * (mid_hi + c)
    } else {
        0.0
    };
    if y < 0.0 {
        return mid;
    }
    let left = 2.0 * chord_mass(-r, x.min(-c), r);
    let right = if x > c { 2.0 * chord_mass(c, x, r) } else { 0.0 };
    left + mid + right
}

/// Area of `D((cx, cy), r) ∩ [x0, x1] × [y0, y1]`.
pub fn disk_rect_area(cx: f64, cy: f64, r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let f = |x: f64, y: f64| quadrant_area(x - cx, y - cy, r);
    f(x1, y1) - f(x0, y1) - f(x1, y0) + f(x0, y0)
}

/// `E(W)` on the square for the unit disk, by a midpoint rule on a
/// `cells × cells` grid with the exact clipped disk area at each midpoint.
pub fn riemann_isolated_square(rho: f64, b: f64, cells: usize) -> f64 {
    assert!(cells.is_multiple_of(2));
    let log_term = rho.ln() + b;
    let lambda = log_term / PI;
    let side = (PI * rho / log_term).sqrt();
    let h = side / 2.0;
    let dx = side / cells as f64;
    let m = cells / 2;
    let mut total = 0.0;
    for i in 0..m {
        let x = (i as f64 + 0.5) * dx;
        let mut row = 0.0;
        for j in 0..m {
            let y = (j as f64 + 0.5) * dx;
            row += (-lambda * disk_rect_area(x, y, 1.0, -h, h, -h, h)).exp();
        }
        total += row;
    }
    4.0 * lambda * total * dx * dx
}
