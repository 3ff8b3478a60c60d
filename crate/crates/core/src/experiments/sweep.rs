use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connfn::ConnectionFunction;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::quadrature::{self, OUTER_TOL, RADIAL_TOL};
use crate::simulate::{self, BuildMode, RcmGraph};

use super::config::SweepConfig;
use super::output;

/// One simulated network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub model: ModelKind,
    pub rho: f64,
    pub b: f64,
    /// Nodes observed (core nodes for the window model).
    pub n: usize,
    /// Isolated nodes: on the square for the coupled torus, against the whole
    /// window for the window model.
    #[serde(rename = "W")]
    pub w: usize,
    #[serde(rename = "W_T", default, skip_serializing_if = "Option::is_none")]
    pub w_t: Option<usize>,
    #[serde(rename = "W_E", default, skip_serializing_if = "Option::is_none")]
    pub w_e: Option<usize>,
    /// Window model: core nodes with no neighbour inside the core.
    #[serde(rename = "W_trunc", default, skip_serializing_if = "Option::is_none")]
    pub w_trunc: Option<usize>,
    /// Components by order, for orders up to the configured maximum.
    pub xi: BTreeMap<usize, usize>,
}

impl TrialRecord {
    pub fn xi(&self, k: usize) -> usize {
        self.xi.get(&k).copied().unwrap_or(0)
    }
}

fn truncate_xi(census: &simulate::Census, max_order: usize) -> BTreeMap<usize, usize> {
    census.xi.range(1..=max_order).map(|(k, v)| (*k, *v)).collect()
}

/// Induced subgraph on the nodes inside the centred square of side `core`.
fn core_subgraph(graph: &RcmGraph, core: f64) -> RcmGraph {
    let h = 0.5 * core;
    let mut index = vec![u32::MAX; graph.node_count()];
    let mut positions = Vec::new();
    for (i, p) in graph.points.positions.iter().enumerate() {
        if p.x.abs() <= h && p.y.abs() <= h {
            index[i] = positions.len() as u32;
            positions.push(*p);
        }
    }
    let edges = graph
        .edges
        .iter()
        .filter_map(|&(i, j)| {
            let (a, b) = (index[i as usize], index[j as usize]);
            (a != u32::MAX && b != u32::MAX).then_some((a, b))
        })
        .collect();
    RcmGraph {
        points: simulate::PointSet {
            positions,
            region: crate::geometry::Region::square(core),
            ..graph.points.clone()
        },
        edges,
        metric: graph.metric,
        g: graph.g.clone(),
    }
}

/// Simulate one network of `spec` with `seed`.
pub fn run_trial(
    spec: &ModelSpec,
    seed: u64,
    mode: BuildMode,
    coupling: bool,
    max_order: usize,
) -> Result<TrialRecord> {
    let params = spec.derive()?;
    let points = spec.sample(seed)?;
    let g = spec.connection()?;
    let graph = simulate::build_graph(&points, &g, spec.metric(), mode);
    let mut rec = TrialRecord {
        seed,
        model: spec.model,
        rho: spec.rho,
        b: spec.b,
        n: points.len(),
        w: 0,
        w_t: None,
        w_e: None,
        w_trunc: None,
        xi: BTreeMap::new(),
    };
    match spec.model {
        ModelKind::Torus if coupling => {
            let out = simulate::boundary_coupling(&graph)?;
            if out.w != out.w_t + out.w_e {
                return Err(Error::InvalidParams(format!(
                    "coupling identity broken: W = {}, W_T = {}, W_E = {}",
                    out.w, out.w_t, out.w_e
                )));
            }
            rec.w = out.w;
            rec.w_t = Some(out.w_t);
            rec.w_e = Some(out.w_e);
            rec.xi = truncate_xi(&simulate::census(&out.square), max_order);
        }
        ModelKind::Torus => {
            let c = simulate::census(&graph);
            rec.w = c.w;
            rec.w_t = Some(c.w);
            rec.xi = truncate_xi(&c, max_order);
        }
        ModelKind::InfiniteWindow => {
            let counts = simulate::window_truncation_census(&graph, params.core_side);
            rec.n = counts.core_nodes;
            rec.w = counts.core_with_pad;
            rec.w_trunc = Some(counts.core_truncated);
            rec.xi = truncate_xi(&simulate::census(&core_subgraph(&graph, params.core_side)), max_order);
        }
        _ => {
            let c = simulate::census(&graph);
            rec.w = c.w;
            rec.xi = truncate_xi(&c, max_order);
        }
    }
    Ok(rec)
}

/// Mean and standard error of a sample.
pub fn mean_se(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Aggregates of all trials at one `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoStats {
    pub model: ModelKind,
    pub rho: f64,
    pub b: f64,
    pub trials: usize,
    pub mean_w: f64,
    pub se_w: f64,
    pub mean_w_t: Option<f64>,
    pub se_w_t: Option<f64>,
    pub mean_w_e: Option<f64>,
    pub se_w_e: Option<f64>,
    pub mean_w_trunc: Option<f64>,
    /// `mean_xi[k - 1]` is the mean of `ξ_k`, `k = 1..=max_order`.
    pub mean_xi: Vec<f64>,
    pub se_xi: Vec<f64>,
    /// Mean of `Σ_{k=2}^{M} ξ_k`.
    pub mean_finite: f64,
    pub se_finite: f64,
    /// Fraction of trials with `Σ_{k=2}^{M} ξ_k = 0`.
    pub frac_no_finite: f64,
    /// Fraction of trials with at least one isolated node.
    pub frac_w_pos: f64,
    pub quad_ew: Option<f64>,
    pub quad_ew_torus: Option<f64>,
    pub quad_xi2: Option<f64>,
    pub quad_xi2_se: Option<f64>,
    /// `(mean_w − reference)/se_w`, the reference being the quadrature value
    /// that matches `mean_w`: torus, square, or `e^{-b}` for the window.
    pub zscore_w: Option<f64>,
}

impl RhoStats {
    pub fn mean_xi(&self, k: usize) -> f64 {
        self.mean_xi.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn se_xi(&self, k: usize) -> f64 {
        self.se_xi.get(k - 1).copied().unwrap_or(0.0)
    }
}

/// Per-`ρ` statistics of a sweep, in `rho_list` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub max_order: usize,
    pub rows: Vec<RhoStats>,
}

/// Group trial records by `ρ` (in first-seen order) and aggregate. Works
/// equally on fresh records and on a trial log read back from disk.
pub fn aggregate(records: &[TrialRecord], max_order: usize) -> AggregateStats {
    let mut order: Vec<u64> = Vec::new();
    let mut groups: BTreeMap<u64, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        let key = r.rho.to_bits();
        if !groups.contains_key(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(r);
    }
    let rows = order
        .iter()
        .map(|key| {
            let g = &groups[key];
            let first = g[0];
            let (mean_w, se_w) = mean_se(g.iter().map(|r| r.w as f64));
            let opt = |f: &dyn Fn(&TrialRecord) -> Option<usize>| {
                if g.iter().all(|r| f(r).is_some()) {
                    let (m, s) = mean_se(g.iter().map(|r| f(r).unwrap() as f64));
                    (Some(m), Some(s))
                } else {
                    (None, None)
                }
            };
            let (mean_w_t, se_w_t) = opt(&|r| r.w_t);
            let (mean_w_e, se_w_e) = opt(&|r| r.w_e);
            let (mean_w_trunc, _) = opt(&|r| r.w_trunc);
            let (mean_xi, se_xi): (Vec<f64>, Vec<f64>) = (1..=max_order)
                .map(|k| mean_se(g.iter().map(|r| r.xi(k) as f64)))
                .unzip();
            let finite = |r: &TrialRecord| (2..=max_order).map(|k| r.xi(k)).sum::<usize>();
            let (mean_finite, se_finite) = mean_se(g.iter().map(|r| finite(r) as f64));
            let n = g.len() as f64;
            RhoStats {
                model: first.model,
                rho: first.rho,
                b: first.b,
                trials: g.len(),
                mean_w,
                se_w,
                mean_w_t,
                se_w_t,
                mean_w_e,
                se_w_e,
                mean_w_trunc,
                mean_xi,
                se_xi,
                mean_finite,
                se_finite,
                frac_no_finite: g.iter().filter(|r| finite(r) == 0).count() as f64 / n,
                frac_w_pos: g.iter().filter(|r| r.w > 0).count() as f64 / n,
                quad_ew: None,
                quad_ew_torus: None,
                quad_xi2: None,
                quad_xi2_se: None,
                zscore_w: None,
            }
        })
        .collect();
    AggregateStats { max_order, rows }
}

fn attach_quadrature(row: &mut RhoStats, spec: &ModelSpec, coupling: bool) -> Result<()> {
    let ew = quadrature::expected_isolated_square(spec, OUTER_TOL)?;
    let ew_t = quadrature::expected_isolated_torus(spec, RADIAL_TOL)?;
    row.quad_ew = Some(ew);
    row.quad_ew_torus = Some(ew_t);
    let reference = match spec.model {
        ModelKind::Torus if !coupling => ew_t,
        ModelKind::InfiniteWindow => quadrature::expected_isolated_infinite(spec.b),
        _ => ew,
    };
    if row.se_w > 0.0 {
        row.zscore_w = Some((row.mean_w - reference) / row.se_w);
    }
    Ok(())
}

/// Build the model spec of a sweep at one `ρ`.
pub fn spec_for(cfg: &SweepConfig, g: &ConnectionFunction, c: f64, rho: f64) -> Result<ModelSpec> {
    let spec = ModelSpec::with_constant(cfg.model, rho, cfg.b, g.clone(), c)?;
    match cfg.margin {
        Some(m) => spec.with_margin(m),
        None => Ok(spec),
    }
}

/// Run `trials` independent trials per `ρ` with seeds `base_seed + index`,
/// aggregate them, attach quadrature companions and write the configured
/// outputs. The first failing trial (lowest index) aborts the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<(AggregateStats, Vec<TrialRecord>)> {
    cfg.validate()?;
    let g = cfg.g.build()?;
    let c = g.integral_constant(crate::connfn::DEFAULT_REL_TOL)?;
    let mut records = Vec::with_capacity(cfg.rho_list.len() * cfg.trials);
    let mut specs = Vec::new();
    for &rho in &cfg.rho_list {
        let spec = spec_for(cfg, &g, c, rho)?;
        spec.derive()?;
        let results: Vec<Result<TrialRecord>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|t| {
                let seed = cfg.base_seed.wrapping_add(t);
                run_trial(&spec, seed, cfg.mode, cfg.coupling, cfg.max_order).map_err(|e| Error::TrialFailed {
                    seed,
                    source: Box::new(e),
                })
            })
            .collect();
        for r in results {
            records.push(r?);
        }
        specs.push(spec);
    }
    let mut stats = aggregate(&records, cfg.max_order);
    for (row, spec) in stats.rows.iter_mut().zip(&specs) {
        if cfg.quadrature {
            attach_quadrature(row, spec, cfg.coupling)?;
        }
        if let Some(samples) = cfg.components_samples {
            let (e, se) = quadrature::expected_components_order2(spec, samples, cfg.base_seed)?;
            row.quad_xi2 = Some(e);
            row.quad_xi2_se = Some(se);
        }
    }
    if let Some(path) = &cfg.outputs.trials {
        output::write_trials(path, &records)?;
    }
    if let Some(path) = &cfg.outputs.summary {
        output::write_summary(path, &stats)?;
    }
    Ok((stats, records))
}
