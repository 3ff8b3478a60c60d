//! Poisson sampling, random-connection graphs and their component statistics.

mod build;
mod census;
mod coupling;
pub mod ladder;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::connfn::ConnectionFunction;
use crate::geometry::{self, Point, Region, RegionKind};
use crate::rng::{self, tag};

pub use build::build_graph;
pub use census::{census, is_connected_via_ordering, Census};
pub use coupling::{boundary_coupling, window_truncation_census, CouplingOutcome, WindowCounts};

/// Node positions drawn from a homogeneous Poisson process.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub positions: Vec<Point>,
    pub region: Region,
    pub density: f64,
    pub seed: u64,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Poisson process of the given density on `region`, deterministic in `seed`.
pub fn sample_poisson(region: Region, density: f64, seed: u64) -> PointSet {
    assert!(density > 0.0, "density must be positive");
    sample_with_mean(region, density, density * region.area(), seed)
}

/// Like [`sample_poisson`] but with the expected count given explicitly.
///
/// Positions are drawn on the unit square and scaled by the side, so two
/// regions sampled with the same seed and mean hold the same configuration up
/// to scale.
pub fn sample_with_mean(region: Region, density: f64, mean: f64, seed: u64) -> PointSet {
    let mut rng = rng::stream(seed, tag::POINTS, 0);
    let n = if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(&mut rng) as usize
    } else {
        0
    };
    let side = region.side();
    let positions = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() - 0.5;
            let y = rng.random::<f64>() - 0.5;
            Point::new(x * side, y * side)
        })
        .collect();
    PointSet {
        positions,
        region,
        density,
        seed,
    }
}

/// How distances are measured when deciding edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Toroidal,
}

impl Metric {
    pub fn for_region(region: &Region) -> Metric {
        match region.kind() {
            RegionKind::Square => Metric::Euclidean,
            RegionKind::Torus => Metric::Toroidal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Toroidal => "toroidal",
        }
    }

    #[inline]
    pub fn distance(self, p: Point, q: Point, side: f64) -> f64 {
        match self {
            Metric::Euclidean => geometry::euclidean_distance(p, q),
            Metric::Toroidal => geometry::toroidal_distance(p, q, side),
        }
    }
}

/// Pair enumeration strategy. Both produce the same edge set for a given
/// seed; `CellList` only avoids looking at far pairs that cannot connect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    Exact,
    CellList { tail_mass: f64 },
}

impl Default for BuildMode {
    fn default() -> Self {
        BuildMode::CellList { tail_mass: 1e-6 }
    }
}

/// An undirected random-connection graph.
#[derive(Clone, Debug)]
pub struct RcmGraph {
    pub points: PointSet,
    /// Sorted pairs `(i, j)` with `i < j`.
    pub edges: Vec<(u32, u32)>,
    pub metric: Metric,
    pub g: ConnectionFunction,
}

impl RcmGraph {
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &(i, j) in &self.edges {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(i, j) in &self.edges {
            adj[i as usize].push(j as usize);
            adj[j as usize].push(i as usize);
        }
        adj
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let p = &self.points;
        self.metric.distance(p.positions[i], p.positions[j], p.region.side())
    }
}
