//! Sweeps, statistics and result files.

mod config;
pub mod output;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::connfn::{ConnectionFunction, DEFAULT_REL_TOL};
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};
use crate::quadrature;
use crate::simulate::BuildMode;

pub use config::{Outputs, SweepConfig};
pub use sweep::{aggregate, mean_se, run_sweep, run_trial, spec_for, AggregateStats, RhoStats, TrialRecord};

/// Width of reported confidence bands, in standard errors.
pub const CONFIDENCE_SE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub monotone_toward_target: bool,
    pub final_gap: f64,
}

/// Does `|value − target|` shrink (or stay put) along the series?
///
/// With standard errors, each step may grow by up to three combined standard
/// errors before it counts as a reversal.
pub fn convergence_check(series: &[(f64, f64)], target: f64, ses: Option<&[f64]>) -> Result<ConvergenceReport> {
    if series.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "convergence_check needs at least 3 points, got {}",
            series.len()
        )));
    }
    if let Some(s) = ses {
        if s.len() != series.len() {
            return Err(Error::InvalidParams("one standard error per point is required".into()));
        }
    }
    let gap = |k: usize| (series[k].1 - target).abs();
    let monotone = (1..series.len()).all(|k| {
        let slack = ses.map_or(0.0, |s| CONFIDENCE_SE * (s[k - 1].powi(2) + s[k].powi(2)).sqrt());
        gap(k) <= gap(k - 1) + slack
    });
    Ok(ConvergenceReport {
        monotone_toward_target: monotone,
        final_gap: gap(series.len() - 1),
    })
}

/// One row of [`necessary_condition_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessaryRow {
    pub b: f64,
    #[serde(rename = "EW_infinite")]
    pub ew_infinite: f64,
    #[serde(rename = "EW")]
    pub ew: f64,
    pub mean_w: f64,
    /// Fraction of trials with at least one isolated node.
    pub frac_w_pos: f64,
}

/// For each `b`, the expected isolated count (plane and square) next to the
/// simulated chance of having any isolated node at all on the square.
pub fn necessary_condition_report(
    g: &ConnectionFunction,
    b_list: &[f64],
    rho: f64,
    trials: usize,
    base_seed: u64,
    mode: BuildMode,
) -> Result<Vec<NecessaryRow>> {
    if b_list.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParams("b values must be finite".into()));
    }
    let c = g.integral_constant(DEFAULT_REL_TOL)?;
    b_list
        .iter()
        .map(|&b| {
            let spec = ModelSpec::with_constant(ModelKind::FiniteSquare, rho, b, g.clone(), c)?;
            let ew = quadrature::expected_isolated_square(&spec, quadrature::OUTER_TOL)?;
            let mut cfg = SweepConfig::new(
                crate::connfn::GSpec::Zero,
                ModelKind::FiniteSquare,
                vec![rho],
                b,
                trials,
            );
            cfg.base_seed = base_seed;
            cfg.mode = mode;
            let records = run_records(&spec, &cfg)?;
            let stats = aggregate(&records, cfg.max_order);
            let row = &stats.rows[0];
            Ok(NecessaryRow {
                b,
                ew_infinite: quadrature::expected_isolated_infinite(b),
                ew,
                mean_w: row.mean_w,
                frac_w_pos: row.frac_w_pos,
            })
        })
        .collect()
}

fn run_records(spec: &ModelSpec, cfg: &SweepConfig) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    let results: Vec<Result<TrialRecord>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = cfg.base_seed.wrapping_add(t);
            run_trial(spec, seed, cfg.mode, false, cfg.max_order).map_err(|e| Error::TrialFailed {
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connfn::GSpec;

    #[test]
    fn convergence_examples() {
        let r = convergence_check(&[(1e2, 1.9), (1e3, 1.3), (1e4, 1.05)], 1.0, None).unwrap();
        assert!(r.monotone_toward_target);
        assert!((r.final_gap - 0.05).abs() < 1e-12);
        let r = convergence_check(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)], 1.0, None).unwrap();
        assert!(r.monotone_toward_target && r.final_gap == 0.0);
        let r = convergence_check(&[(1.0, 1.5), (2.0, 1.2), (3.0, 1.3)], 1.0, None).unwrap();
        assert!(!r.monotone_toward_target);
        let r = convergence_check(&[(1.0, 1.5), (2.0, 1.2), (3.0, 1.3)], 1.0, Some(&[0.05, 0.05, 0.05])).unwrap();
        assert!(r.monotone_toward_target);
        assert!(convergence_check(&[(1.0, 1.0), (2.0, 1.0)], 1.0, None).is_err());
    }

    #[test]
    fn mean_and_se() {
        let (m, s) = mean_se([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_se([7.0]), (7.0, 0.0));
    }

    #[test]
    fn sweep_outputs_are_reproducible_and_reaggregate() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SweepConfig::new(
            GSpec::UnitDisk { r0: 1.0 },
            ModelKind::Torus,
            vec![50.0, 100.0],
            0.0,
            40,
        );
        cfg.coupling = true;
        cfg.base_seed = 11;
        let run = |tag: &str| {
            let mut c = cfg.clone();
            c.outputs.trials = Some(dir.path().join(format!("{tag}.jsonl")));
            c.outputs.summary = Some(dir.path().join(format!("{tag}.csv")));
            run_sweep(&c).unwrap()
        };
        let (stats, records) = run("a");
        run("b");
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        assert_eq!(read("a.jsonl"), read("b.jsonl"));
        assert_eq!(read("a.csv"), read("b.csv"));
        assert_eq!(records.len(), 80);
        for r in &records {
            assert_eq!(r.w, r.w_t.unwrap() + r.w_e.unwrap());
        }
        let back = output::read_trials(&dir.path().join("a.jsonl")).unwrap();
        assert_eq!(back, records);
        let again = aggregate(&back, cfg.max_order);
        for (x, y) in again.rows.iter().zip(&stats.rows) {
            assert_eq!(
                (x.mean_w, x.se_w, x.mean_w_e, &x.mean_xi),
                (y.mean_w, y.se_w, y.mean_w_e, &y.mean_xi)
            );
        }
        let csv = String::from_utf8(read("a.csv")).unwrap();
        let header = csv.lines().next().unwrap();
        assert!(header.starts_with("model,rho,b,trials,mean_W,se_W,quad_EW,quad_EW_torus,mean_W_T,mean_W_E,mean_xi2,"));
        assert!(header.ends_with(",zscore_W"));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let cfg = SweepConfig::new(
            GSpec::UnitDisk { r0: 1.0 },
            ModelKind::FiniteSquare,
            vec![80.0],
            0.5,
            24,
        );
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let (_, a) = one.install(|| run_sweep(&cfg)).unwrap();
        let (_, b) = four.install(|| run_sweep(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn necessary_condition_rows() {
        let g = ConnectionFunction::unit_disk(1.0).unwrap();
        let rows = necessary_condition_report(&g, &[0.0, 1.0, 2.0], 200.0, 60, 0, BuildMode::default()).unwrap();
        assert_eq!(rows[0].ew_infinite, 1.0);
        assert!(rows.windows(2).all(|w| w[1].ew_infinite < w[0].ew_infinite));
        assert!(rows.windows(2).all(|w| w[1].ew < w[0].ew));
    }
}
