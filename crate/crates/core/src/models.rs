//! The four network models and the parameter algebra tying them together.
//!
//! All models share `r_ρ = √((log ρ + b)/(Cρ))`. They differ only in which
//! length unit is held fixed:
//!
//! | model          | density            | side             | connection        |
//! |----------------|--------------------|------------------|-------------------|
//! | dense          | ρ                  | 1                | `g(x / r_ρ)`      |
//! | extended       | 1                  | √ρ               | `g(x / (r_ρ√ρ))`  |
//! | square, torus  | λ = (log ρ + b)/C  | 1/r_ρ            | `g(x)`            |
//! | window         | λ                  | 1/r_ρ + 2·margin | `g(x)`            |
//!
//! so the first three are the same random graph drawn at different scales.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::connfn::{ConnectionFunction, DEFAULT_REL_TOL};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::simulate::{self, Metric, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dense,
    Extended,
    #[serde(rename = "square")]
    FiniteSquare,
    Torus,
    #[serde(rename = "window")]
    InfiniteWindow,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Dense,
        ModelKind::Extended,
        ModelKind::FiniteSquare,
        ModelKind::Torus,
        ModelKind::InfiniteWindow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dense => "dense",
            ModelKind::Extended => "extended",
            ModelKind::FiniteSquare => "square",
            ModelKind::Torus => "torus",
            ModelKind::InfiniteWindow => "window",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown model {s:?}; expected dense, extended, square, torus or window"
            ))
        })
    }
}

/// A model instance: which frame, the driving parameters and `g`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub model: ModelKind,
    pub rho: f64,
    pub b: f64,
    /// Connection function in the unit frame (the square model's frame).
    pub g: ConnectionFunction,
    /// `C = ∫ g`, cached.
    pub c: f64,
    /// Pad width for the window model; `None` picks the default.
    pub margin: Option<f64>,
}

/// Derived scales of a [`ModelSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub r_rho: f64,
    /// `(log ρ + b)/C`, the node density of the unit frame.
    pub lambda: f64,
    /// Node density of this model's frame.
    pub density: f64,
    /// Side of the sampled square (including the pad for the window model).
    pub side: f64,
    /// Side of the observed square (excludes the pad).
    pub core_side: f64,
    pub margin: f64,
    pub expected_nodes: f64,
    /// Factor `s` such that this frame links with probability `g(x/s)`.
    pub connection_scale: f64,
}

impl ModelSpec {
    pub fn new(model: ModelKind, rho: f64, b: f64, g: ConnectionFunction) -> Result<Self> {
        let c = g.integral_constant(DEFAULT_REL_TOL)?;
        Self::with_constant(model, rho, b, g, c)
    }

    /// Build with a known `C` (skips the quadrature).
    pub fn with_constant(model: ModelKind, rho: f64, b: f64, g: ConnectionFunction, c: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "rho must be positive and finite, got {rho}"
            )));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParams(format!("b must be finite, got {b}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("C must be positive and finite, got {c}")));
        }
        let spec = ModelSpec {
            model,
            rho,
            b,
            g,
            c,
            margin: None,
        };
        spec.in_frame(ModelKind::FiniteSquare).derive()?;
        Ok(spec)
    }

    pub fn with_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "margin must be finite and non-negative, got {margin}"
            )));
        }
        self.margin = Some(margin);
        Ok(self)
    }

    /// The same `(ρ, b, g)` in another frame.
    pub fn in_frame(&self, model: ModelKind) -> ModelSpec {
        ModelSpec { model, ..self.clone() }
    }

    /// `log ρ + b`.
    pub fn log_term(&self) -> f64 {
        self.rho.ln() + self.b
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        let l = self.log_term();
        if l.is_nan() || l <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "log(rho) + b must be positive, got log({}) + {} = {l}",
                self.rho, self.b
            )));
        }
        let lambda = l / self.c;
        let r_rho = (lambda / self.rho).sqrt();
        let unit_side = 1.0 / r_rho;
        let rho = self.rho;
        let p = match self.model {
            ModelKind::Dense => DerivedParams {
                r_rho,
                lambda,
                density: rho,
                side: 1.0,
                core_side: 1.0,
                margin: 0.0,
                expected_nodes: rho,
                connection_scale: r_rho,
            },
            ModelKind::Extended => DerivedParams {
                r_rho,
                lambda,
                density: 1.0,
                side: rho.sqrt(),
                core_side: rho.sqrt(),
                margin: 0.0,
                expected_nodes: rho,
                connection_scale: lambda.sqrt(),
            },
            ModelKind::FiniteSquare | ModelKind::Torus => DerivedParams {
                r_rho,
                lambda,
                density: lambda,
                side: unit_side,
                core_side: unit_side,
                margin: 0.0,
                expected_nodes: rho,
                connection_scale: 1.0,
            },
            ModelKind::InfiniteWindow => {
                let margin = match self.margin {
                    Some(m) => m,
                    None => default_margin(&self.g, lambda)?,
                };
                let side = unit_side + 2.0 * margin;
                DerivedParams {
                    r_rho,
                    lambda,
                    density: lambda,
                    side,
                    core_side: unit_side,
                    margin,
                    expected_nodes: lambda * side * side,
                    connection_scale: 1.0,
                }
            }
        };
        Ok(p)
    }

    /// The connection function as seen in this model's frame.
    pub fn connection(&self) -> Result<ConnectionFunction> {
        Ok(self.g.scaled(self.derive()?.connection_scale))
    }

    pub fn region(&self) -> Result<Region> {
        let side = self.derive()?.side;
        Ok(match self.model {
            ModelKind::Torus => Region::torus(side),
            _ => Region::square(side),
        })
    }

    pub fn metric(&self) -> Metric {
        match self.model {
            ModelKind::Torus => Metric::Toroidal,
            _ => Metric::Euclidean,
        }
    }

    /// Draw the nodes for a trial. Frames of the same `(ρ, b, g)` sampled with
    /// the same seed hold the same configuration up to scale.
    pub fn sample(&self, seed: u64) -> Result<PointSet> {
        let p = self.derive()?;
        Ok(simulate::sample_with_mean(
            self.region()?,
            p.density,
            p.expected_nodes,
            seed,
        ))
    }

    fn same_parameters(&self, other: &ModelSpec) -> bool {
        self.rho == other.rho && self.b == other.b && self.g.name() == other.g.name()
    }
}

/// Pad wide enough that links across it carry at most `1e-6` of `C`, and at
/// least five mean nearest-neighbour distances.
fn default_margin(g: &ConnectionFunction, lambda: f64) -> Result<f64> {
    let cut = g.effective_cutoff(1e-6);
    if !cut.is_finite() {
        return Err(Error::InvalidParams(format!(
            "{} has no finite radius holding all but 1e-6 of its mass; set the margin explicitly",
            g.name()
        )));
    }
    Ok(cut.max(5.0 / (2.0 * lambda.sqrt())))
}

/// Carry a graph instance from one frame into another: coordinates are
/// multiplied by the ratio of sides, edges are kept as they are.
pub fn rescale_instance(
    points: &PointSet,
    edges: &[(u32, u32)],
    from: &ModelSpec,
    to: &ModelSpec,
) -> Result<(PointSet, Vec<(u32, u32)>)> {
    if !from.same_parameters(to) {
        return Err(Error::FrameMismatch(format!(
            "({}, {}, {}) vs ({}, {}, {})",
            from.rho,
            from.b,
            from.g.name(),
            to.rho,
            to.b,
            to.g.name()
        )));
    }
    let scalable = |m: ModelKind| matches!(m, ModelKind::Dense | ModelKind::Extended | ModelKind::FiniteSquare);
    if !scalable(from.model) || !scalable(to.model) {
        return Err(Error::InvalidParams(format!(
            "rescaling is defined between dense, extended and square frames, not {} -> {}",
            from.model, to.model
        )));
    }
    let (a, b) = (from.derive()?, to.derive()?);
    let ratio = b.side / a.side;
    let positions = points
        .positions
        .iter()
        .map(|p| {
            if ratio == 1.0 {
                *p
            } else {
                Point::new(p.x * ratio, p.y * ratio)
            }
        })
        .collect();
    Ok((
        PointSet {
            positions,
            region: to.region()?,
            density: b.density,
            seed: points.seed,
        },
        edges.to_vec(),
    ))
}
