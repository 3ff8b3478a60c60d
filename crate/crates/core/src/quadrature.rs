//! Deterministic evaluation of the isolation integrals.
//!
//! Everything here works in the unit frame: the square `[-h, h]²` with
//! `h = 1/(2r_ρ)`, node density `λ = (log ρ + b)/C` and connection function
//! `g` itself. A node at `y` is isolated with probability `e^{-λ·I(y)}` where
//! `I(y) = ∫_A g(‖x − y‖) dx`, so
//!
//! * `E(W) = λ∫_A e^{-λ I(y)} dy` on the square,
//! * `E(W^T) = ρ·e^{-λ I(0)}` on the torus (every point looks like the centre),
//! * `E(W^∞) = e^{-b}` on the plane.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connfn::{ConnectionFunction, Support, TailKind};
use crate::error::Result;
use crate::geometry::{self, Point};
use crate::models::ModelSpec;
use crate::quad::{self, Tolerance};
use crate::rng::{self, tag};

/// Default relative tolerance of radial integrals.
pub const RADIAL_TOL: f64 = 1e-10;
/// Default relative tolerance of outer integrals over `y`.
pub const OUTER_TOL: f64 = 1e-6;
/// Default shrink exponent of the boundary decomposition.
pub const DEFAULT_EPSILON: f64 = 0.2;

/// Unit-frame geometry of a spec.
#[derive(Clone, Copy, Debug)]
struct Frame {
    lambda: f64,
    half: f64,
    rho: f64,
    r_rho: f64,
}

fn frame(spec: &ModelSpec) -> Result<Frame> {
    let p = spec.in_frame(crate::models::ModelKind::FiniteSquare).derive()?;
    Ok(Frame {
        lambda: p.lambda,
        half: 0.5 * p.side,
        rho: spec.rho,
        r_rho: p.r_rho,
    })
}

/// Radii worth splitting a radial integral at: the function's own
/// breakpoints plus octaves of its length scale.
fn radial_grid(g: &ConnectionFunction, lo: f64, hi: f64) -> Vec<f64> {
    let mut v = vec![lo, hi];
    v.extend(g.breakpoints().into_iter().filter(|&r| r > lo && r < hi));
    let ls = g.length_scale();
    for k in -20..=80 {
        let r = ls * 2f64.powi(k);
        if r > lo && r < hi {
            v.push(r);
        }
    }
    v
}

fn outer_radius(g: &ConnectionFunction, far: f64) -> f64 {
    match g.support() {
        Support::Compact(r) => r.min(far),
        Support::Infinite => far,
    }
}

/// `∫_{[-h,h]²} g(‖x − y‖) dx` by integrating `g(r)·r` against the angle of
/// the circle about `y` that stays inside the square.
pub fn exposure(g: &ConnectionFunction, y: Point, half: f64, rel_tol: f64) -> f64 {
    let d = [half - y.x, half - y.y, half + y.x, half + y.y];
    let near = d.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let corners = [
        Point::new(half, half),
        Point::new(-half, half),
        Point::new(-half, -half),
        Point::new(half, -half),
    ]
    .map(|c| geometry::euclidean_distance(y, c));
    let far = corners.iter().copied().fold(0.0, f64::max);
    let r_max = outer_radius(g, far);
    let tol = Tolerance::relative(rel_tol);

    // Full circles up to the nearest side.
    let inner = g.radial_mass(0.0, near.min(r_max), tol).value;
    if r_max <= near {
        return inner;
    }
    let mut breaks = radial_grid(g, near, r_max);
    breaks.extend(d.iter().chain(&corners).copied().filter(|&r| r > near && r < r_max));
    let clipped = quad::integrate(
        |r| {
            let gv = g.value(r);
            if gv == 0.0 {
                0.0
            } else {
                gv * r * geometry::angle_inside_square(y, r, half)
            }
        },
        &breaks,
        tol,
    );
    inner + clipped.value
}

/// `λ·∫_A g(‖x − y‖) dx` for `y` in the unit-frame square of `spec`.
pub fn inner_exposure(y: Point, spec: &ModelSpec, rel_tol: f64) -> Result<f64> {
    let f = frame(spec)?;
    Ok(f.lambda * exposure(&spec.g, y, f.half, rel_tol))
}

/// Expected isolated nodes on the torus: `ρ·e^{-λ I(0)}`.
pub fn expected_isolated_torus(spec: &ModelSpec, rel_tol: f64) -> Result<f64> {
    let f = frame(spec)?;
    Ok(f.rho * (-f.lambda * exposure(&spec.g, Point::ORIGIN, f.half, rel_tol)).exp())
}

/// Expected isolated nodes of the infinite model observed on a window: `e^{-b}`.
pub fn expected_isolated_infinite(b: f64) -> f64 {
    (-b).exp()
}

/// Breakpoints along `y₂ ∈ [lo, hi]` at fixed `y₁` where the square-clipped
/// disks of the characteristic radii change topology.
fn inner_breaks(y1: f64, lo: f64, hi: f64, half: f64, radii: &[f64]) -> Vec<f64> {
    let mut v = vec![lo, hi];
    for &r in radii {
        for c in [half - r, r - half] {
            v.push(c);
        }
        for cx in [half, -half] {
            let dx = y1 - cx;
            let s = r * r - dx * dx;
            if s > 0.0 {
                let s = s.sqrt();
                for cy in [half, -half] {
                    v.push(cy - s);
                    v.push(cy + s);
                }
            }
        }
    }
    v.retain(|&t| t >= lo && t <= hi);
    v
}

fn characteristic_radii(g: &ConnectionFunction, half: f64) -> Vec<f64> {
    let mut radii = g.breakpoints();
    if g.support() == Support::Infinite {
        let ls = g.length_scale();
        radii.extend((-4..=40).map(|k| ls * 2f64.powi(k)));
    }
    radii.retain(|&r| r > 0.0 && r < 2.0 * half * std::f64::consts::SQRT_2);
    radii
}

/// `8·∫∫ λ e^{-λ I(y)}` over a piece of the fundamental triangle
/// `0 ≤ y₂ ≤ y₁ ≤ h`, with `y₁ ∈ [a1, b1]` and `y₂ ∈ [0, min(y₁, cap2)]`,
/// `y₂ ≥ floor2`.
#[allow(clippy::too_many_arguments)]
fn octant_integral(
    g: &ConnectionFunction,
    f: Frame,
    a1: f64,
    b1: f64,
    floor2: f64,
    cap2: f64,
    radial_tol: f64,
    outer_tol: f64,
) -> quad::Estimate {
    let h = f.half;
    let radii = characteristic_radii(g, h);
    let mut outer = vec![a1, b1];
    for &r in &radii {
        outer.push(h - r);
        outer.push(r - h);
    }
    if floor2 > a1 && floor2 < b1 {
        outer.push(floor2);
    }
    if cap2 > a1 && cap2 < b1 {
        outer.push(cap2);
    }
    outer.retain(|&t| t >= a1 && t <= b1);
    let lambda = f.lambda;
    let est = quad::integrate_2d(
        |y1, y2| lambda * (-lambda * exposure(g, Point::new(y1, y2), h, radial_tol)).exp(),
        &outer,
        |y1| {
            let hi = y1.min(cap2);
            if hi <= floor2 {
                return vec![];
            }
            inner_breaks(y1, floor2, hi, h, &radii)
        },
        Tolerance::relative(outer_tol),
    );
    quad::Estimate {
        value: 8.0 * est.value,
        error: 8.0 * est.error,
        ..est
    }
}

/// Expected isolated nodes on the square, `λ∫_A e^{-λ I(y)} dy`, integrated
/// over one eighth of the square.
pub fn expected_isolated_square(spec: &ModelSpec, rel_tol: f64) -> Result<f64> {
    let f = frame(spec)?;
    Ok(octant_integral(&spec.g, f, 0.0, f.half, 0.0, f.half, RADIAL_TOL, rel_tol).value)
}

/// Split of `E(W)` by where the isolated node sits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Inside the square shrunk by `δ = r_ρ^{-ε}` on every side.
    pub central: f64,
    /// In the four `δ`-wide strips along the sides, corners excluded.
    pub side: f64,
    /// In the four `δ × δ` corner squares.
    pub corner: f64,
    pub delta: f64,
}

/// Isolation integrals of one spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsolationIntegrals {
    pub rho: f64,
    pub b: f64,
    pub g: String,
    #[serde(rename = "EW")]
    pub ew: f64,
    #[serde(rename = "EW_torus")]
    pub ew_torus: f64,
    #[serde(rename = "EW_infinite")]
    pub ew_infinite: f64,
    pub ratio: f64,
    pub central: f64,
    pub side: f64,
    pub corner: f64,
    /// Largest relative error estimate among the quadratures.
    pub tol_achieved: f64,
}

/// Central/side/corner split of `E(W)` with shrink margin `min(r_ρ^{-ε}, h)`.
pub fn decomposition(spec: &ModelSpec, rel_tol: f64, epsilon: f64) -> Result<(Decomposition, f64)> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(crate::error::Error::InvalidParams(format!(
            "epsilon must lie in (0, 1/4), got {epsilon}"
        )));
    }
    let f = frame(spec)?;
    let h = f.half;
    let delta = f.r_rho.powf(-epsilon).min(h);
    let cut = h - delta;
    let g = &spec.g;
    let central = octant_integral(g, f, 0.0, cut, 0.0, cut, RADIAL_TOL, rel_tol);
    let side = octant_integral(g, f, cut, h, 0.0, cut, RADIAL_TOL, rel_tol);
    let corner = octant_integral(g, f, cut, h, cut, h, RADIAL_TOL, rel_tol);
    let err = central.error + side.error + corner.error;
    Ok((
        Decomposition {
            central: central.value,
            side: side.value,
            corner: corner.value,
            delta,
        },
        err,
    ))
}

/// `E(W)`, `E(W^T)`, `E(W^∞)`, their ratio and the boundary split.
pub fn isolation_report(spec: &ModelSpec, rel_tol: f64, epsilon: f64) -> Result<IsolationIntegrals> {
    let f = frame(spec)?;
    let ew = octant_integral(&spec.g, f, 0.0, f.half, 0.0, f.half, RADIAL_TOL, rel_tol);
    let ew_torus = expected_isolated_torus(spec, RADIAL_TOL)?;
    let ew_inf = expected_isolated_infinite(spec.b);
    let (dec, dec_err) = decomposition(spec, rel_tol, epsilon)?;
    let tol = (ew.error / ew.value).max(dec_err / ew.value);
    Ok(IsolationIntegrals {
        rho: spec.rho,
        b: spec.b,
        g: spec.g.name().to_string(),
        ew: ew.value,
        ew_torus,
        ew_infinite: ew_inf,
        ratio: ew.value / ew_inf,
        central: dec.central,
        side: dec.side,
        corner: dec.corner,
        tol_achieved: tol,
    })
}

/// Large-`ρ` limit of the expected isolated count on the torus (and square),
/// `e^{-b + (4π/C)·lim f}`; infinite when `f` diverges.
pub fn truncation_limit(g: &ConnectionFunction, b: f64) -> Result<f64> {
    let class = g.classify_tail()?;
    Ok(match class.class {
        TailKind::LittleO => (-b).exp(),
        TailKind::Theta(a) => {
            let c = g.integral_constant(crate::connfn::DEFAULT_REL_TOL)?;
            (-b + 4.0 * PI * a / c).exp()
        }
        TailKind::Omega => f64::INFINITY,
    })
}

/// How the second node of a pair is drawn in [`components_order2`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSampling {
    /// Displacement drawn with density roughly proportional to `g`.
    Importance,
    /// Both nodes uniform on the square.
    Uniform,
}

/// Radial proposal: annuli with mass proportional to `2π∫ r g(r) dr`,
/// area-uniform inside each annulus.
struct RadialProposal {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl RadialProposal {
    fn new(g: &ConnectionFunction, r_max: f64) -> Self {
        let mut edges = radial_grid(g, 0.0, r_max);
        let ls = g.length_scale().min(r_max);
        edges.extend((1..32).map(|k| ls * k as f64 / 8.0).filter(|&r| r < r_max));
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut cumulative = vec![0.0];
        for w in edges.windows(2) {
            let m = g.radial_mass(w[0], w[1], Tolerance::relative(1e-8)).value;
            cumulative.push(cumulative.last().unwrap() + m);
        }
        let total = *cumulative.last().unwrap();
        RadialProposal {
            edges,
            cumulative,
            total,
        }
    }

    /// Draw a radius; returns it with the proposal's planar density there.
    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let t = rng.random::<f64>() * self.total;
        let k = (self.cumulative.partition_point(|&c| c <= t)).clamp(1, self.edges.len() - 1) - 1;
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let r = (a * a + rng.random::<f64>() * (b * b - a * a)).sqrt();
        let mass = self.cumulative[k + 1] - self.cumulative[k];
        let density = mass / (self.total * PI * (b * b - a * a));
        (r, density)
    }
}

/// `∫_A g(‖y − x₁‖)·g(‖y − x₂‖) dy`, radially about `x₁`.
fn cross_exposure(g: &ConnectionFunction, x1: Point, x2: Point, half: f64, rel_tol: f64) -> f64 {
    let z = geometry::euclidean_distance(x1, x2);
    let phi = (x2.y - x1.y).atan2(x2.x - x1.x);
    let radii: Vec<f64> = g.breakpoints();
    let far = [
        Point::new(half, half),
        Point::new(-half, half),
        Point::new(-half, -half),
        Point::new(half, -half),
    ]
    .map(|c| geometry::euclidean_distance(x1, c));
    let mut r_max = far.iter().copied().fold(0.0, f64::max);
    if let Support::Compact(s) = g.support() {
        r_max = r_max.min(s).min(z + s);
    }
    let lo = match g.support() {
        Support::Compact(s) => (z - s).max(0.0),
        Support::Infinite => 0.0,
    };
    if lo >= r_max {
        return 0.0;
    }
    let mut breaks = radial_grid(g, lo, r_max);
    for &s in &radii {
        breaks.push(z + s);
        breaks.push((z - s).abs());
    }
    breaks.extend([half - x1.x, half - x1.y, half + x1.x, half + x1.y]);
    breaks.extend(far);
    breaks.retain(|&r| r >= lo && r <= r_max);
    let tol = Tolerance::new(1e-12, rel_tol);
    quad::integrate(
        |r| {
            let gr = g.value(r);
            if gr == 0.0 || r == 0.0 {
                return 0.0;
            }
            let mut cuts = Vec::new();
            if z > 0.0 {
                for &s in &radii {
                    let c = (r * r + z * z - s * s) / (2.0 * r * z);
                    if c.abs() < 1.0 {
                        let a = c.acos();
                        cuts.push((phi + a).rem_euclid(2.0 * PI));
                        cuts.push((phi - a).rem_euclid(2.0 * PI));
                    }
                }
            }
            let mut total = 0.0;
            for (ta, tb) in geometry::arcs_inside_square(x1, r, half) {
                let mut br = vec![ta, tb];
                br.extend(cuts.iter().copied().filter(|&t| t > ta && t < tb));
                total += quad::integrate(
                    |t| {
                        let p = Point::new(x1.x + r * t.cos(), x1.y + r * t.sin());
                        g.value(geometry::euclidean_distance(p, x2))
                    },
                    &br,
                    Tolerance::new(1e-13, rel_tol),
                )
                .value;
            }
            gr * r * total
        },
        &breaks,
        tol,
    )
    .value
}

/// Monte Carlo estimate of `E(ξ₂)`, the expected number of two-node
/// components, on the square `[-h, h]²` with node density `λ`:
///
/// `E(ξ₂) = (λ²/2)∫_A∫_A g(‖x₁ − x₂‖)·e^{-λ∫_A 1 − (1 − g(‖y − x₁‖))(1 − g(‖y − x₂‖)) dy} dx₁ dx₂`.
///
/// Returns the estimate and its standard error. Samples are evaluated in
/// parallel and summed in index order, so the result depends only on
/// `(samples, seed)`.
pub fn components_order2(
    g: &ConnectionFunction,
    lambda: f64,
    half: f64,
    samples: usize,
    seed: u64,
    sampling: PairSampling,
) -> (f64, f64) {
    let side = 2.0 * half;
    let r_max = side * std::f64::consts::SQRT_2;
    let proposal = RadialProposal::new(g, r_max);
    if proposal.total == 0.0 || samples == 0 {
        return (0.0, 0.0);
    }
    let mut stream = rng::stream(seed, tag::COMPONENTS, 0);
    let area = side * side;
    let draws: Vec<(Point, Point, f64)> = (0..samples)
        .map(|_| {
            let x1 = Point::new(
                (stream.random::<f64>() - 0.5) * side,
                (stream.random::<f64>() - 0.5) * side,
            );
            match sampling {
                PairSampling::Importance => {
                    let (r, q) = proposal.draw(&mut stream);
                    let t = stream.random::<f64>() * 2.0 * PI;
                    let x2 = Point::new(x1.x + r * t.cos(), x1.y + r * t.sin());
                    (x1, x2, g.value(r) / q)
                }
                PairSampling::Uniform => {
                    let x2 = Point::new(
                        (stream.random::<f64>() - 0.5) * side,
                        (stream.random::<f64>() - 0.5) * side,
                    );
                    (x1, x2, g.value(geometry::euclidean_distance(x1, x2)) * area)
                }
            }
        })
        .collect();
    let values: Vec<f64> = draws
        .par_iter()
        .map(|&(x1, x2, w)| {
            if w == 0.0 || x2.x.abs() > half || x2.y.abs() > half {
                return 0.0;
            }
            let i1 = exposure(g, x1, half, 1e-9);
            let i2 = exposure(g, x2, half, 1e-9);
            let cross = cross_exposure(g, x1, x2, half, 1e-8);
            w * (-lambda * (i1 + i2 - cross)).exp()
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let scale = 0.5 * lambda * lambda * area;
    (scale * mean, scale * (var / n).sqrt())
}

/// [`components_order2`] in the unit frame of `spec` with importance sampling.
pub fn expected_components_order2(spec: &ModelSpec, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let f = frame(spec)?;
    Ok(components_order2(
        &spec.g,
        f.lambda,
        f.half,
        samples,
        seed,
        PairSampling::Importance,
    ))
}
