//! Connection functions and their integral diagnostics.
//!
//! A connection function `g` maps the distance between two nodes to the
//! probability that they share a link. Everything downstream needs three
//! facts about it: its value, the points where it is not smooth (so
//! quadrature can split there), and how its tail behaves. The tail decides
//! both the planar integral `C = 2π∫ x g(x) dx` and the limit of
//! `f(x) = g(x)·x²·log²x`, which in turn governs whether the truncation effect
//! on isolated-node counts vanishes.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Default relative tolerance for `C`.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const DOUBLING_LIMIT: usize = 60;

/// Rule applied beyond the last abscissa of a tabulated `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    Zero,
    PowerLog { a: f64, p: f64 },
}

/// Serializable description of a connection function, as written in
/// configuration files: `{"family": "...", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum GSpec {
    UnitDisk {
        r0: f64,
    },
    Lognormal {
        sigma: f64,
        eta: f64,
        r0: f64,
    },
    ThetaTail {
        a: f64,
        x0: f64,
        g0: f64,
    },
    OmegaTail {
        p: f64,
        #[serde(default = "one")]
        a: f64,
        x0: f64,
        g0: f64,
    },
    Tabulated {
        csv: PathBuf,
        tail: TailRule,
    },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl GSpec {
    pub fn build(&self) -> Result<ConnectionFunction> {
        match *self {
            GSpec::UnitDisk { r0 } => ConnectionFunction::unit_disk(r0),
            GSpec::Lognormal { sigma, eta, r0 } => ConnectionFunction::lognormal(sigma, eta, r0),
            GSpec::ThetaTail { a, x0, g0 } => ConnectionFunction::theta_tail(a, x0, g0),
            GSpec::OmegaTail { p, a, x0, g0 } => ConnectionFunction::omega_tail_scaled(p, a, x0, g0),
            GSpec::Tabulated { ref csv, ref tail } => ConnectionFunction::from_csv(csv, tail.clone()),
            GSpec::Zero => Ok(ConnectionFunction::zero()),
        }
    }

    /// Parse the command-line shorthand `family[:key=value,...]`, or a JSON
    /// object when the text starts with `{`.
    pub fn parse(text: &str) -> Result<GSpec> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Config(format!("bad g spec: {e}")));
        }
        let (family, rest) = match text.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (text, ""),
        };
        let mut params = serde_json::Map::new();
        let mut csv_path = None;
        for kv in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value in g spec, got {kv:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "csv" {
                csv_path = Some(v.to_string());
                continue;
            }
            let num: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("g spec parameter {k} is not a number: {v:?}")))?;
            params.insert(k.to_string(), serde_json::json!(num));
        }
        if family == "tabulated" {
            let csv = csv_path.ok_or_else(|| Error::Config("tabulated g needs csv=<path>".into()))?;
            let tail = match (params.get("a"), params.get("p")) {
                (Some(a), Some(p)) => TailRule::PowerLog {
                    a: a.as_f64().unwrap_or(0.0),
                    p: p.as_f64().unwrap_or(2.0),
                },
                _ => TailRule::Zero,
            };
            return Ok(GSpec::Tabulated { csv: csv.into(), tail });
        }
        let value = if family == "zero" {
            serde_json::json!({ "family": "zero" })
        } else {
            serde_json::json!({ "family": family, "params": params })
        };
        serde_json::from_value(value).map_err(|e| Error::Config(format!("bad g spec {text:?}: {e}")))
    }
}

/// Declared support of `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Support {
    Compact(f64),
    Infinite,
}

#[derive(Clone)]
enum Kind {
    Zero,
    UnitDisk {
        r0: f64,
    },
    Lognormal {
        /// `10η / (σ√2)`, the erfc argument per decade.
        per_decade: f64,
        r0: f64,
    },
    /// `min(cap, a / (x² logᵖ x))` evaluated at `max(x, x0)`.
    PowerLog {
        a: f64,
        p: f64,
        x0: f64,
        cap: f64,
        /// Where the closed-form tail starts to hold exactly.
        tail_start: f64,
    },
    Tabulated {
        xs: Vec<f64>,
        gs: Vec<f64>,
        tail: TailRule,
        tail_start: Option<f64>,
    },
    Scaled {
        inner: Arc<ConnectionFunction>,
        scale: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A rotationally invariant connection function `g: [0, ∞) → [0, 1]`.
///
/// Values are immutable after construction. Built-in families are
/// non-increasing by construction; [`ConnectionFunction::custom`] trusts the
/// caller.
#[derive(Clone)]
pub struct ConnectionFunction {
    name: String,
    kind: Kind,
    discontinuities: Vec<f64>,
    kinks: Vec<f64>,
    support: Support,
    length_scale: f64,
}

impl fmt::Debug for ConnectionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConnectionFunction")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("discontinuities", &self.discontinuities)
            .finish()
    }
}

impl fmt::Display for ConnectionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParams(msg()))
    }
}

fn power_log(a: f64, p: f64, x: f64) -> f64 {
    a / (x * x * x.ln().powf(p))
}

/// Smallest `x ≥ lo` (with `lo > 1`) where `a/(x² logᵖ x) ≤ cap`.
fn power_log_crossing(a: f64, p: f64, cap: f64, lo: f64) -> f64 {
    if power_log(a, p, lo) <= cap {
        return lo;
    }
    let mut hi = lo * 2.0;
    while power_log(a, p, hi) > cap {
        hi *= 2.0;
    }
    let mut lo = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power_log(a, p, mid) > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl ConnectionFunction {
    /// `g ≡ 0`. Not integrable in the strict sense (`C = 0`); useful as a
    /// degenerate case for graph construction.
    pub fn zero() -> Self {
        ConnectionFunction {
            name: "zero".into(),
            kind: Kind::Zero,
            discontinuities: vec![],
            kinks: vec![],
            support: Support::Compact(0.0),
            length_scale: 1.0,
        }
    }

    /// `g(x) = 1` for `x ≤ r0`, else 0.
    pub fn unit_disk(r0: f64) -> Result<Self> {
        check(r0 > 0.0 && r0.is_finite(), || {
            format!("unit_disk radius must be positive, got {r0}")
        })?;
        Ok(ConnectionFunction {
            name: format!("unit_disk(r0={r0})"),
            kind: Kind::UnitDisk { r0 },
            discontinuities: vec![r0],
            kinks: vec![],
            support: Support::Compact(r0),
            length_scale: r0,
        })
    }

    /// Log-normal shadowing: `g(x) = ½·erfc((10η/(σ√2))·log₁₀(x/r0))` with
    /// path-loss exponent `η` and shadowing deviation `σ` in dB.
    pub fn lognormal(sigma: f64, eta: f64, r0: f64) -> Result<Self> {
        check(sigma > 0.0 && eta > 0.0 && r0 > 0.0, || {
            format!("lognormal needs sigma, eta, r0 > 0, got ({sigma}, {eta}, {r0})")
        })?;
        Ok(ConnectionFunction {
            name: format!("lognormal(sigma={sigma},eta={eta},r0={r0})"),
            kind: Kind::Lognormal {
                per_decade: 10.0 * eta / (sigma * 2f64.sqrt()),
                r0,
            },
            discontinuities: vec![],
            kinks: vec![],
            support: Support::Infinite,
            length_scale: r0,
        })
    }

    /// `g(x) = min(g0, a/(x²·log²x))` for `x ≥ x0`, held at its value at `x0`
    /// below that. `f(x) = g(x)·x²·log²x` tends to `a`.
    pub fn theta_tail(a: f64, x0: f64, g0: f64) -> Result<Self> {
        Self::power_log_family("theta_tail", a, 2.0, x0, g0)
    }

    /// `g(x) = min(g0, 1/(x²·logᵖx))` for `x ≥ x0` with `1 < p < 2`:
    /// integrable, yet `f(x) → ∞`.
    pub fn omega_tail(p: f64, x0: f64, g0: f64) -> Result<Self> {
        Self::omega_tail_scaled(p, 1.0, x0, g0)
    }

    /// [`ConnectionFunction::omega_tail`] with tail amplitude `a`.
    pub fn omega_tail_scaled(p: f64, a: f64, x0: f64, g0: f64) -> Result<Self> {
        check(p > 1.0 && p < 2.0, || {
            format!("omega_tail exponent must lie in (1, 2), got {p}")
        })?;
        Self::power_log_family("omega_tail", a, p, x0, g0)
    }

    fn power_log_family(family: &str, a: f64, p: f64, x0: f64, g0: f64) -> Result<Self> {
        check(a > 0.0 && a.is_finite(), || {
            format!("{family}: a must be positive, got {a}")
        })?;
        check(x0 > 1.0 && x0.is_finite(), || {
            format!("{family}: x0 must exceed 1, got {x0}")
        })?;
        check(g0 > 0.0 && g0 <= 1.0, || {
            format!("{family}: g0 must lie in (0, 1], got {g0}")
        })?;
        let tail_start = power_log_crossing(a, p, g0, x0);
        let mut kinks = vec![x0];
        if tail_start > x0 {
            kinks.push(tail_start);
        }
        let name = if family == "theta_tail" {
            format!("theta_tail(a={a},x0={x0},g0={g0})")
        } else {
            format!("omega_tail(p={p},a={a},x0={x0},g0={g0})")
        };
        Ok(ConnectionFunction {
            name,
            kind: Kind::PowerLog {
                a,
                p,
                x0,
                cap: g0,
                tail_start,
            },
            discontinuities: vec![],
            kinks,
            support: Support::Infinite,
            length_scale: tail_start,
        })
    }

    /// Piecewise-linear interpolation through `(x, g(x))` samples, constant
    /// before the first abscissa, followed by `tail`.
    pub fn tabulated(points: Vec<(f64, f64)>, tail: TailRule) -> Result<Self> {
        check(!points.is_empty(), || "tabulated g needs at least one sample".into())?;
        let (xs, gs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        check(xs.windows(2).all(|w| w[1] > w[0]) && xs[0] >= 0.0, || {
            "tabulated abscissae must be non-negative and strictly increasing".into()
        })?;
        check(gs.iter().all(|g| (0.0..=1.0).contains(g)), || {
            "tabulated values must lie in [0, 1]".into()
        })?;
        check(gs.windows(2).all(|w| w[1] <= w[0]), || {
            "tabulated values must be non-increasing".into()
        })?;
        let last_x = *xs.last().unwrap();
        let last_g = *gs.last().unwrap();
        let mut discontinuities = vec![];
        let (support, tail_start) = match tail {
            TailRule::Zero => {
                if last_g > 0.0 {
                    discontinuities.push(last_x);
                }
                let edge = xs.iter().zip(&gs).find(|(_, g)| **g == 0.0).map(|(x, _)| *x);
                (Support::Compact(edge.unwrap_or(last_x)), Some(last_x))
            }
            TailRule::PowerLog { a, p } => {
                check(last_x > 1.0 && a > 0.0 && p > 1.0, || {
                    "power_log tail needs last abscissa > 1, a > 0 and p > 1".into()
                })?;
                let start = if last_g > 0.0 {
                    power_log_crossing(a, p, last_g, last_x)
                } else {
                    last_x
                };
                (Support::Infinite, Some(start))
            }
        };
        let length_scale = last_x.max(1e-9);
        let mut kinks = xs.clone();
        kinks.extend(tail_start);
        Ok(ConnectionFunction {
            name: format!("tabulated({} points, {:?})", xs.len(), tail),
            kind: Kind::Tabulated {
                xs,
                gs,
                tail,
                tail_start,
            },
            discontinuities,
            kinks,
            support,
            length_scale,
        })
    }

    /// Load a tabulated `g` from a two-column CSV of `x,g(x)` (an optional
    /// non-numeric header row is skipped).
    pub fn from_csv(path: &Path, tail: TailRule) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut points = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(x), Some(g)) => points.push((x, g)),
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "{}: row {} is not an (x, g) pair",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        Self::tabulated(points, tail)
    }

    /// Wrap an arbitrary function. The caller vouches for `0 ≤ g ≤ 1`; the
    /// optional `support` radius marks `g = 0` beyond it.
    pub fn custom<F>(name: impl Into<String>, f: F, support: Support, discontinuities: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let length_scale = match support {
            Support::Compact(r) if r > 0.0 => r,
            _ => 1.0,
        };
        ConnectionFunction {
            name: name.into(),
            kind: Kind::Custom(Arc::new(f)),
            discontinuities,
            kinks: vec![],
            support,
            length_scale,
        }
    }

    /// `x ↦ g(x / scale)`: the same function in a frame where lengths are
    /// multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        if scale == 1.0 {
            return self.clone();
        }
        let (inner, total) = match &self.kind {
            Kind::Scaled { inner, scale: s } => (inner.clone(), s * scale),
            _ => (Arc::new(self.clone()), scale),
        };
        let support = match inner.support {
            Support::Compact(r) => Support::Compact(r * total),
            Support::Infinite => Support::Infinite,
        };
        ConnectionFunction {
            name: format!("{}/{}", inner.name, total),
            discontinuities: inner.discontinuities.iter().map(|d| d * total).collect(),
            kinks: inner.kinks.iter().map(|d| d * total).collect(),
            support,
            length_scale: inner.length_scale * total,
            kind: Kind::Scaled { inner, scale: total },
        }
    }

    /// The function with any frame scaling stripped.
    pub fn base(&self) -> &ConnectionFunction {
        match &self.kind {
            Kind::Scaled { inner, .. } => inner,
            _ => self,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Sorted radii where `g` jumps.
    pub fn discontinuities(&self) -> &[f64] {
        &self.discontinuities
    }

    /// Radii where `g` is continuous but not smooth.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// All radii a quadrature should split at.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.discontinuities.iter().chain(&self.kinks).copied().collect();
        if let Support::Compact(r) = self.support {
            v.push(r);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Characteristic length used to seed searches and tail summation.
    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Connection probability at distance `x`.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::UnitDisk { r0 } => {
                if x <= *r0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Lognormal { per_decade, r0 } => {
                if x <= 0.0 {
                    1.0
                } else {
                    0.5 * libm::erfc(per_decade * (x / r0).log10())
                }
            }
            Kind::PowerLog { a, p, x0, cap, .. } => cap.min(power_log(*a, *p, x.max(*x0))),
            Kind::Tabulated { xs, gs, tail, .. } => {
                let last = xs.len() - 1;
                if x <= xs[0] {
                    gs[0]
                } else if x <= xs[last] {
                    let k = xs.partition_point(|&xi| xi < x);
                    let (x0, x1) = (xs[k - 1], xs[k]);
                    let t = (x - x0) / (x1 - x0);
                    gs[k - 1] + t * (gs[k] - gs[k - 1])
                } else {
                    match tail {
                        TailRule::Zero => 0.0,
                        TailRule::PowerLog { a, p } => gs[last].min(power_log(*a, *p, x)),
                    }
                }
            }
            Kind::Scaled { inner, scale } => inner.value(x / scale),
            Kind::Custom(f) => f(x),
        }
    }

    /// Radius beyond which `2π∫_r^∞ x g(x) dx` has a closed form.
    pub fn analytic_tail_start(&self) -> Option<f64> {
        match &self.kind {
            Kind::Zero => Some(0.0),
            Kind::UnitDisk { r0 } => Some(*r0),
            Kind::Lognormal { .. } | Kind::Custom(_) => match self.support {
                Support::Compact(r) => Some(r),
                Support::Infinite => None,
            },
            Kind::PowerLog { tail_start, .. } => Some(*tail_start),
            Kind::Tabulated { tail_start, .. } => *tail_start,
            Kind::Scaled { inner, scale } => inner.analytic_tail_start().map(|t| t * scale),
        }
    }

    /// `2π∫_r^∞ x g(x) dx` in closed form, when `r` is past
    /// [`analytic_tail_start`](Self::analytic_tail_start).
    pub fn closed_tail(&self, r: f64) -> Option<f64> {
        let start = self.analytic_tail_start()?;
        if r < start {
            return None;
        }
        match &self.kind {
            Kind::Scaled { inner, scale } => {
                // r / scale may round just below the inner start.
                let x = (r / scale).max(inner.analytic_tail_start()?);
                inner.closed_tail(x).map(|t| t * scale * scale)
            }
            Kind::PowerLog { a, p, .. } => Some(2.0 * PI * a * r.ln().powf(1.0 - p) / (p - 1.0)),
            Kind::Tabulated {
                tail: TailRule::PowerLog { a, p },
                ..
            } => Some(2.0 * PI * a * r.ln().powf(1.0 - p) / (p - 1.0)),
            _ => Some(0.0),
        }
    }

    /// A closed-form upper bound on `2π∫_r^∞ x g(x) dx`: the exact tail where
    /// one is known, the Gaussian bound `erfc(u) ≤ e^{-u²}` for log-normal.
    pub fn tail_bound(&self, r: f64) -> Option<f64> {
        if let Some(t) = self.closed_tail(r) {
            return Some(t);
        }
        match &self.kind {
            Kind::Lognormal { per_decade, r0 } if r >= *r0 => {
                let c = (per_decade / std::f64::consts::LN_10).powi(2);
                let t = (r / r0).ln();
                let u = c.sqrt() * (t - 1.0 / c);
                let ec = if u >= 0.0 { libm::erfc(u) } else { 2.0 };
                Some(PI * r0 * r0 * (1.0 / c).exp() * 0.5 * (PI / c).sqrt() * ec)
            }
            Kind::Scaled { inner, scale } => inner.tail_bound(r / scale).map(|t| t * scale * scale),
            _ => None,
        }
    }

    fn radial_breaks(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = vec![lo, hi];
        b.extend(self.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
        b
    }

    /// `2π∫_lo^hi x g(x) dx` by adaptive quadrature.
    pub fn radial_mass(&self, lo: f64, hi: f64, tol: Tolerance) -> quad::Estimate {
        let mut breaks = self.radial_breaks(lo, hi);
        // Octave splits keep slowly decaying tails well resolved.
        if lo > 0.0 {
            let mut x = lo * 2.0;
            while x < hi && breaks.len() < 4096 {
                breaks.push(x);
                x *= 2.0;
            }
        }
        quad::integrate(|x| 2.0 * PI * x * self.value(x), &breaks, tol)
    }

    /// `2π∫_r^∞ x g(x) dx`, closed form where available, otherwise by
    /// octave-panel summation. Returns `None` when the summation fails to
    /// settle.
    pub fn tail_mass(&self, r: f64, rel_tol: f64) -> Option<f64> {
        if let Some(t) = self.closed_tail(r) {
            return Some(t);
        }
        let tol = Tolerance::relative(rel_tol * 0.1);
        if let Some(start) = self.analytic_tail_start() {
            let head = self.radial_mass(r, start, tol).value;
            return Some(head + self.closed_tail(start).unwrap_or(0.0));
        }
        let mut lo = r.max(self.length_scale * 1e-3);
        let mut sum = if lo > r {
            self.radial_mass(r, lo, tol).value
        } else {
            0.0
        };
        for _ in 0..DOUBLING_LIMIT {
            let piece = self.radial_mass(lo, 2.0 * lo, tol).value;
            sum += piece;
            if piece <= rel_tol * sum || (piece == 0.0 && sum == 0.0) {
                return Some(sum);
            }
            lo *= 2.0;
        }
        None
    }

    /// `C = ∫_{ℝ²} g(‖x‖) dx = 2π∫₀^∞ x g(x) dx`.
    ///
    /// Panels split at every declared discontinuity. A closed-form tail is
    /// used when the family has one; otherwise octave panels are summed until
    /// a panel contributes less than `rel_tol` of the running total.
    pub fn integral_constant(&self, rel_tol: f64) -> Result<f64> {
        if !(rel_tol > 1e-14 && rel_tol < 1e-2) {
            return Err(Error::InvalidParams(format!(
                "rel_tol must lie in (1e-14, 1e-2), got {rel_tol}"
            )));
        }
        let tol = Tolerance::relative(rel_tol * 0.1);
        let c = match self.analytic_tail_start() {
            Some(start) => self.radial_mass(0.0, start, tol).value + self.closed_tail(start).unwrap_or(0.0),
            None => {
                let mut lo = self.breakpoints().last().copied().unwrap_or(0.0).max(self.length_scale);
                let mut sum = self.radial_mass(0.0, lo, tol).value;
                let mut settled = false;
                for _ in 0..DOUBLING_LIMIT {
                    let piece = self.radial_mass(lo, 2.0 * lo, tol).value;
                    sum += piece;
                    if piece <= rel_tol * sum {
                        settled = true;
                        break;
                    }
                    lo *= 2.0;
                }
                if !settled {
                    return Err(Error::NonConvergent(format!(
                        "tail of {} still contributes after {DOUBLING_LIMIT} doublings",
                        self.name
                    )));
                }
                sum
            }
        };
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonConvergent(format!("{} integrates to {c}", self.name)));
        }
        Ok(c)
    }

    /// Sampled monotonicity lint: non-increasing on a geometric grid of
    /// `grid` points over `[1e-6, 1e6]`. Necessary, not sufficient.
    pub fn check_monotonicity(&self, grid: usize) -> bool {
        let grid = grid.max(2);
        let step = (1e12f64).powf(1.0 / (grid - 1) as f64);
        let mut x = 1e-6;
        let mut prev = self.value(x);
        for _ in 1..grid {
            x *= step;
            let v = self.value(x);
            if v > prev {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Smallest radius `R` with `g(x) ≤ p` for every `x > R` (assuming `g`
    /// non-increasing). Infinite when `g` never drops to `p`.
    pub fn threshold_radius(&self, p: f64) -> f64 {
        if self.value(0.0) <= p {
            return 0.0;
        }
        let mut hi = match self.support {
            Support::Compact(r) => r,
            Support::Infinite => {
                let mut hi = self.length_scale.max(f64::MIN_POSITIVE);
                let mut steps = 0;
                while self.value(hi) > p {
                    hi *= 2.0;
                    steps += 1;
                    if steps > 1100 || !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                hi
            }
        };
        let mut lo = 0.0f64;
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid.next_up()) <= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Smallest radius `R` on a 1/16-octave grid with
    /// `2π∫_R^∞ x g dx ≤ tail_mass · C`. Compact support returns the support
    /// radius. Returns `f64::INFINITY` if no representable radius suffices
    /// (tails decaying like `1/log R` reach tiny masses only at astronomic
    /// radii).
    pub fn effective_cutoff(&self, tail_mass: f64) -> f64 {
        assert!(tail_mass > 0.0 && tail_mass < 1.0, "tail_mass must lie in (0, 1)");
        if let Support::Compact(r) = self.support {
            return r;
        }
        let Ok(c) = self.integral_constant(DEFAULT_REL_TOL) else {
            return f64::INFINITY;
        };
        let target = tail_mass * c;
        let grid = |k: i32| self.length_scale * 2f64.powf(k as f64 / 16.0);
        let fits = |k: i32| match self.tail_mass(grid(k), 1e-8) {
            Some(t) => t <= target,
            None => false,
        };
        let (mut lo, mut hi) = (-16 * 40, 16 * 1000);
        if !fits(hi) {
            return f64::INFINITY;
        }
        if fits(lo) {
            return grid(lo);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if fits(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        grid(hi)
    }

    /// Classify the tail of `f(x) = g(x)·x²·log²x` from its values at
    /// `x = 2^k`, `k = 10..=60`.
    ///
    /// * all of the last ten values vanish → `LittleO`;
    /// * the last ten stay within 1% of their mean → `Theta(mean)`;
    /// * otherwise a non-increasing run over `k = 31..=60` → `LittleO`, a
    ///   non-decreasing run that actually grows → `Omega`;
    /// * anything else is `Inconclusive`.
    pub fn classify_tail(&self) -> Result<TailClass> {
        let samples: Vec<f64> = (10..=60)
            .map(|k| {
                let x = 2f64.powi(k);
                let l = x.ln();
                self.value(x) * x * x * l * l
            })
            .collect();
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Inconclusive(format!("f(x) is not finite for {}", self.name)));
        }
        let last10 = &samples[samples.len() - 10..];
        if last10.iter().all(|&v| v == 0.0) {
            return Ok(TailClass {
                class: TailKind::LittleO,
                limit_estimate: 0.0,
                confidence: Confidence::High,
            });
        }
        let mean = last10.iter().sum::<f64>() / 10.0;
        let (mn, mx) = last10
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let spread = (mx - mn) / mean;
        if spread <= 0.01 {
            return Ok(TailClass {
                class: TailKind::Theta(mean),
                limit_estimate: mean,
                confidence: if spread <= 1e-3 {
                    Confidence::High
                } else {
                    Confidence::Low
                },
            });
        }
        let run = &samples[samples.len() - 30..];
        let slack = 1e-12;
        let non_increasing = run.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack));
        let non_decreasing = run.windows(2).all(|w| w[1] >= w[0] * (1.0 - slack));
        let last = *samples.last().unwrap();
        if non_increasing {
            let confidence = if last < 0.1 * run[0] {
                Confidence::High
            } else {
                Confidence::Low
            };
            return Ok(TailClass {
                class: TailKind::LittleO,
                limit_estimate: 0.0,
                confidence,
            });
        }
        if non_decreasing && last > run[0] * 1.01 {
            return Ok(TailClass {
                class: TailKind::Omega,
                limit_estimate: f64::INFINITY,
                confidence: if last > 1.1 * run[0] {
                    Confidence::High
                } else {
                    Confidence::Low
                },
            });
        }
        Err(Error::Inconclusive(format!(
            "f(x) = g(x)x²log²x for {} neither settles nor trends over the sampled octaves",
            self.name
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `f(x) → 0`.
    LittleO,
    /// `f(x) → a` with `0 < a < ∞`.
    Theta(f64),
    /// `f(x) → ∞`.
    Omega,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    High,
    Low,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailClass {
    pub class: TailKind,
    pub limit_estimate: f64,
    pub confidence: Confidence,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn unit_disk_constant() {
        for r0 in [0.5, 1.0, 2.0, 7.0] {
            let c = ConnectionFunction::unit_disk(r0)
                .unwrap()
                .integral_constant(1e-12)
                .unwrap();
            assert!(rel(c, PI * r0 * r0) < 1e-12, "r0={r0} c={c}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ConnectionFunction::unit_disk(0.0).is_err());
        assert!(ConnectionFunction::lognormal(0.0, 3.0, 1.0).is_err());
        assert!(ConnectionFunction::theta_tail(0.5, 1.0, 1.0).is_err());
        assert!(ConnectionFunction::omega_tail(2.0, 2.0, 1.0).is_err());
        assert!(ConnectionFunction::tabulated(vec![(0.0, 0.5), (1.0, 0.7)], TailRule::Zero).is_err());
        let g = ConnectionFunction::unit_disk(1.0).unwrap();
        assert!(g.integral_constant(0.5).is_err());
    }

    #[test]
    fn non_integrable_custom_function_is_reported() {
        let g = ConnectionFunction::custom(
            "slow",
            |x: f64| if x < 2.0 { 0.5 } else { 0.5 * 2.0 / x },
            Support::Infinite,
            vec![],
        );
        assert!(matches!(g.integral_constant(1e-8), Err(Error::NonConvergent(_))));
    }

    #[test]
    fn monotonicity_lint() {
        assert!(ConnectionFunction::unit_disk(1.0).unwrap().check_monotonicity(10_000));
        assert!(ConnectionFunction::theta_tail(1.0, 3.0, 0.9)
            .unwrap()
            .check_monotonicity(10_000));
        let wobble = ConnectionFunction::custom("abs_sin", |x: f64| x.sin().abs().min(1.0), Support::Infinite, vec![]);
        assert!(!wobble.check_monotonicity(10_000));
    }

    #[test]
    fn theta_tail_join_is_continuous() {
        let g = ConnectionFunction::theta_tail(1.0, 3.0, 0.9).unwrap();
        let h3 = 1.0 / (9.0 * 3f64.ln().powi(2));
        assert!((g.value(0.0) - h3).abs() < 1e-15);
        assert!((g.value(3.0) - h3).abs() < 1e-15);
        assert!((g.value(3.0 + 1e-9) - h3).abs() < 1e-9);
    }

    #[test]
    fn tail_classes() {
        let disk = ConnectionFunction::unit_disk(1.0).unwrap();
        assert_eq!(disk.classify_tail().unwrap().class, TailKind::LittleO);
        let ln = ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap();
        assert_eq!(ln.classify_tail().unwrap().class, TailKind::LittleO);
        for a in [0.1, 0.5, 2.0] {
            let t = ConnectionFunction::theta_tail(a, 1.5, 1.0)
                .unwrap()
                .classify_tail()
                .unwrap();
            assert!(matches!(t.class, TailKind::Theta(_)));
            assert!(t.limit_estimate >= 0.99 * a && t.limit_estimate <= 1.01 * a);
        }
        let om = ConnectionFunction::omega_tail(1.5, 1.5, 1.0).unwrap();
        assert_eq!(om.classify_tail().unwrap().class, TailKind::Omega);
        let faster = ConnectionFunction::custom(
            "x^-2 log^-3",
            |x: f64| {
                if x < 3.0 {
                    0.5
                } else {
                    0.5f64.min(1.0 / (x * x * x.ln().powi(3)))
                }
            },
            Support::Infinite,
            vec![],
        );
        assert_eq!(faster.classify_tail().unwrap().class, TailKind::LittleO);
    }

    #[test]
    fn omega_f_sequence_strictly_increases() {
        let g = ConnectionFunction::omega_tail(1.5, 1.5, 1.0).unwrap();
        let f: Vec<f64> = (30..=60)
            .map(|k| {
                let x = 2f64.powi(k);
                g.value(x) * x * x * x.ln().powi(2)
            })
            .collect();
        assert!(f.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn oscillating_tail_is_inconclusive() {
        let g = ConnectionFunction::custom(
            "wobbly",
            |x: f64| {
                if x < 4.0 {
                    return 0.05;
                }
                let l = x.ln();
                (0.05f64).min((1.5 + (x.log2()).sin()) / (x * x * l * l))
            },
            Support::Infinite,
            vec![],
        );
        assert!(matches!(g.classify_tail(), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn little_o_consequence_for_integrable_builtins() {
        let fam = [
            ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap(),
            ConnectionFunction::theta_tail(0.5, 1.5, 1.0).unwrap(),
            ConnectionFunction::omega_tail(1.5, 1.5, 1.0).unwrap(),
        ];
        for g in &fam {
            let at = |k: i32| {
                let x = 2f64.powi(k);
                x * x * g.value(x)
            };
            assert!(at(500) < 1e-2 * at(20) || at(20) == 0.0, "{g}");
        }
        let disk = ConnectionFunction::unit_disk(1.0).unwrap();
        assert_eq!(disk.value(2f64.powi(20)), 0.0);
    }

    #[test]
    fn effective_cutoff_compact_and_reachable() {
        let disk = ConnectionFunction::unit_disk(1.0).unwrap();
        assert_eq!(disk.effective_cutoff(0.3), 1.0);
        // Tails like 2πa/log R cannot reach 1e-6 of C in double precision.
        let th = ConnectionFunction::theta_tail(0.5, 1.5, 1.0).unwrap();
        assert!(th.effective_cutoff(1e-6).is_infinite());
        let r = th.effective_cutoff(0.05);
        assert!(r.is_finite());
    }

    #[test]
    fn scaled_function_rescales_c() {
        let g = ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap();
        let c = g.integral_constant(1e-10).unwrap();
        let cs = g.scaled(0.25).integral_constant(1e-10).unwrap();
        assert!(rel(cs, c * 0.0625) < 1e-9);
        let t = ConnectionFunction::theta_tail(0.5, 1.5, 1.0).unwrap();
        let ct = t.integral_constant(1e-10).unwrap();
        let cts = t.scaled(3.0).integral_constant(1e-10).unwrap();
        assert!(rel(cts, 9.0 * ct) < 1e-9);
        // Tail start rounds below the inner one when divided back.
        let s = 2.955302408633554;
        assert!(rel(t.scaled(s).integral_constant(1e-10).unwrap(), s * s * ct) < 1e-9);
    }

    #[test]
    fn threshold_radius_of_unit_disk() {
        let disk = ConnectionFunction::unit_disk(1.0).unwrap();
        let r = disk.threshold_radius(1e-3);
        assert!((1.0..1.0 + 1e-12).contains(&r));
        assert_eq!(disk.value(r.next_up()), 0.0);
        let ln = ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap();
        let r = ln.threshold_radius(1e-3);
        assert!(ln.value(r.next_up()) <= 1e-3 && ln.value(0.999 * r) > 1e-3);
    }

    #[test]
    fn tabulated_interpolates_and_tails() {
        let g = ConnectionFunction::tabulated(
            vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)],
            TailRule::PowerLog { a: 0.5, p: 2.0 },
        )
        .unwrap();
        assert_eq!(g.value(0.5), 0.75);
        assert_eq!(g.value(1.5), 0.375);
        assert!(g.value(2.5) <= 0.25);
        let h = ConnectionFunction::tabulated(vec![(0.0, 1.0), (1.0, 0.5)], TailRule::Zero).unwrap();
        assert_eq!(h.value(1.0001), 0.0);
        let c = h.integral_constant(1e-10).unwrap();
        // 2π∫₀¹ x(1 - x/2) dx = 2π(1/2 - 1/6)
        assert!(rel(c, 2.0 * PI / 3.0) < 1e-10);
    }

    #[test]
    fn gspec_parsing() {
        assert_eq!(GSpec::parse("unit_disk:r0=1").unwrap(), GSpec::UnitDisk { r0: 1.0 });
        assert_eq!(
            GSpec::parse("theta_tail:a=0.5,x0=1.5,g0=1").unwrap(),
            GSpec::ThetaTail {
                a: 0.5,
                x0: 1.5,
                g0: 1.0
            }
        );
        assert_eq!(
            GSpec::parse(r#"{"family":"lognormal","params":{"sigma":4,"eta":3,"r0":1}}"#).unwrap(),
            GSpec::Lognormal {
                sigma: 4.0,
                eta: 3.0,
                r0: 1.0
            }
        );
        assert_eq!(
            GSpec::parse("omega_tail:p=1.5,x0=1.5,g0=1").unwrap(),
            GSpec::OmegaTail {
                p: 1.5,
                a: 1.0,
                x0: 1.5,
                g0: 1.0
            }
        );
        assert_eq!(GSpec::parse("zero").unwrap(), GSpec::Zero);
        assert!(GSpec::parse("unit_disk:r0=abc").is_err());
        assert!(GSpec::parse("sinr:beta=1").is_err());
    }
}
