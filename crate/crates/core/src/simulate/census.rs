use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RcmGraph;

/// Component sizes of one graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub n: usize,
    /// Isolated nodes; equal to `xi[1]`.
    #[serde(rename = "W")]
    pub w: usize,
    /// Number of components of each order.
    pub xi: BTreeMap<usize, usize>,
    pub largest_order: usize,
}

impl Census {
    pub fn xi(&self, k: usize) -> usize {
        self.xi.get(&k).copied().unwrap_or(0)
    }

    /// Components with order in `lo..=hi`.
    pub fn xi_range(&self, lo: usize, hi: usize) -> usize {
        self.xi.range(lo..=hi).map(|(_, c)| c).sum()
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Count components by order with union-find.
pub fn census(graph: &RcmGraph) -> Census {
    census_of(graph.node_count(), &graph.edges)
}

pub(crate) fn census_of(n: usize, edges: &[(u32, u32)]) -> Census {
    let mut uf = UnionFind::new(n);
    for &(i, j) in edges {
        uf.union(i, j);
    }
    let mut xi = BTreeMap::new();
    let mut largest = 0;
    for v in 0..n as u32 {
        if uf.find(v) == v {
            let s = uf.size[v as usize] as usize;
            *xi.entry(s).or_insert(0) += 1;
            largest = largest.max(s);
        }
    }
    Census {
        n,
        w: xi.get(&1).copied().unwrap_or(0),
        xi,
        largest_order: largest,
    }
}

/// Greedy connectivity test: grow an ordering by repeatedly appending any
/// unplaced node adjacent to a placed one. A full ordering exists iff the
/// graph is connected.
pub fn is_connected_via_ordering<P, A>(points: &[P], adjacent: A) -> bool
where
    A: Fn(usize, usize) -> bool,
{
    let n = points.len();
    if n == 0 {
        return true;
    }
    let mut placed = vec![false; n];
    placed[0] = true;
    let mut order = vec![0usize];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for (w, seen) in placed.iter_mut().enumerate() {
            if !*seen && adjacent(v, w) {
                *seen = true;
                order.push(w);
            }
        }
    }
    order.len() == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connfn::ConnectionFunction;
    use crate::geometry::{Point, Region};
    use crate::simulate::{build_graph, sample_poisson, BuildMode, Metric, PointSet};

    fn bfs_sizes(n: usize, edges: &[(u32, u32)]) -> BTreeMap<usize, usize> {
        let mut adj = vec![vec![]; n];
        for &(i, j) in edges {
            adj[i as usize].push(j as usize);
            adj[j as usize].push(i as usize);
        }
        let mut seen = vec![false; n];
        let mut out = BTreeMap::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut size = 0;
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            *out.entry(size).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn small_cases() {
        let c = census_of(5, &[]);
        assert_eq!((c.w, c.xi(1), c.largest_order), (5, 5, 1));
        let c = census_of(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!((c.w, c.xi(3)), (0, 1));
        let c = census_of(0, &[]);
        assert_eq!((c.w, c.largest_order), (0, 0));
    }

    #[test]
    fn agrees_with_bfs() {
        let g = ConnectionFunction::unit_disk(1.0).unwrap();
        for seed in 0..30 {
            let pts = sample_poisson(Region::square(6.0), 50.0 / 36.0, seed);
            let gr = build_graph(&pts, &g, Metric::Euclidean, BuildMode::Exact);
            let c = census(&gr);
            assert_eq!(c.xi, bfs_sizes(gr.node_count(), &gr.edges));
            assert_eq!(c.xi.iter().map(|(k, v)| k * v).sum::<usize>(), gr.node_count());
            assert_eq!(c.w, c.xi(1));
        }
    }

    #[test]
    fn ordering_test_agrees_with_bfs() {
        assert!(is_connected_via_ordering(&[Point::ORIGIN], |_, _| false));
        assert!(!is_connected_via_ordering(
            &[Point::ORIGIN, Point::new(5.0, 0.0)],
            |_, _| false
        ));
        let g = ConnectionFunction::unit_disk(1.0).unwrap();
        let mut seen = [0usize; 2];
        for seed in 0..200 {
            let pts: PointSet = sample_poisson(Region::square(3.0), 20.0 / 9.0, seed);
            if pts.is_empty() {
                continue;
            }
            let gr = build_graph(&pts, &g, Metric::Euclidean, BuildMode::Exact);
            let adj: std::collections::HashSet<(usize, usize)> =
                gr.edges.iter().map(|&(i, j)| (i as usize, j as usize)).collect();
            let connected = is_connected_via_ordering(&pts.positions, |a, b| adj.contains(&(a.min(b), a.max(b))));
            let bfs = bfs_sizes(gr.node_count(), &gr.edges).len() == 1 && census(&gr).largest_order == gr.node_count();
            assert_eq!(connected, bfs, "seed {seed}");
            seen[connected as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
    }
}
