use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Region};
use crate::rng::{self, tag};

use super::census::census_of;
use super::{Metric, PointSet, RcmGraph};

/// Result of thinning a torus graph into a square graph.
#[derive(Clone, Debug)]
pub struct CouplingOutcome {
    pub square: RcmGraph,
    /// Isolated nodes on the torus.
    pub w_t: usize,
    /// Extra isolated nodes created by cutting the wrap-around links.
    pub w_e: usize,
    /// Isolated nodes on the square.
    pub w: usize,
}

/// Turn a torus graph into a graph on the square with the same nodes.
///
/// A torus link whose Euclidean length `x` exceeds its toroidal length `x^T`
/// survives with probability `g(x)/g(x^T)`, decided by a pair-keyed draw;
/// links with `x = x^T` always survive. The survivors have exactly the
/// square-model law, and since removing links can only isolate more nodes,
/// `w = w_t + w_e` with `w_e ≥ 0`.
pub fn boundary_coupling(torus_graph: &RcmGraph) -> Result<CouplingOutcome> {
    if torus_graph.metric != Metric::Toroidal {
        return Err(Error::MetricMismatch {
            expected: Metric::Toroidal.name(),
            found: torus_graph.metric.name(),
        });
    }
    let pts = &torus_graph.points;
    let side = pts.region.side();
    let g = &torus_graph.g;
    let seed = pts.seed;
    let edges: Vec<(u32, u32)> = torus_graph
        .edges
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let (p, q) = (pts.positions[i as usize], pts.positions[j as usize]);
            let x = geometry::euclidean_distance(p, q);
            let xt = geometry::toroidal_distance(p, q, side);
            if x <= xt {
                return true;
            }
            let keep = g.value(x) / g.value(xt);
            rng::pair_uniform(seed, tag::COUPLING, i as usize, j as usize) < keep
        })
        .collect();
    let n = pts.len();
    let w_t = census_of(n, &torus_graph.edges).w;
    let w = census_of(n, &edges).w;
    assert!(w >= w_t, "removing links cannot reduce isolation");
    let square = RcmGraph {
        points: PointSet {
            region: Region::square(side),
            ..pts.clone()
        },
        edges,
        metric: Metric::Euclidean,
        g: g.clone(),
    };
    Ok(CouplingOutcome {
        square,
        w_t,
        w_e: w - w_t,
        w,
    })
}

/// Isolation counts for the nodes of a centred core window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub core_nodes: usize,
    /// Core nodes with no neighbour inside the core.
    pub core_truncated: usize,
    /// Core nodes with no neighbour anywhere in the window.
    pub core_with_pad: usize,
}

/// Count isolated core nodes of a padded window graph, once ignoring and
/// once honouring links into the pad.
pub fn window_truncation_census(window_graph: &RcmGraph, core_side: f64) -> WindowCounts {
    let h = 0.5 * core_side;
    let in_core: Vec<bool> = window_graph
        .points
        .positions
        .iter()
        .map(|p| p.x.abs() <= h && p.y.abs() <= h)
        .collect();
    let n = in_core.len();
    let mut any = vec![false; n];
    let mut core_nbr = vec![false; n];
    for &(i, j) in &window_graph.edges {
        let (i, j) = (i as usize, j as usize);
        any[i] = true;
        any[j] = true;
        if in_core[i] && in_core[j] {
            core_nbr[i] = true;
            core_nbr[j] = true;
        }
    }
    let mut out = WindowCounts {
        core_nodes: 0,
        core_truncated: 0,
        core_with_pad: 0,
    };
    for v in 0..n {
        if in_core[v] {
            out.core_nodes += 1;
            out.core_truncated += !core_nbr[v] as usize;
            out.core_with_pad += !any[v] as usize;
        }
    }
    out
}
