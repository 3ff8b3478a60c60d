use crate::connfn::ConnectionFunction;

use super::ladder::{pair_index, PairLadder, BASE_LEVEL, BASE_P, TOP_LEVEL};
use super::{BuildMode, Metric, PointSet, RcmGraph};

const STENCIL: [(isize, isize); 5] = [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1)];
const MAX_CELLS_PER_AXIS: usize = 4096;

/// Draw the random-connection graph on `points`: each pair at distance `d`
/// is linked independently with probability `g(d)`.
///
/// Edge decisions come from the pair-keyed uniforms of [`PairLadder`] under
/// `points.seed`, so `Exact` and `CellList` return identical edge lists.
/// `CellList` visits pairs within a near radius through a cell grid and
/// reaches the rare longer links by listing the pairs whose uniform is small
/// enough to possibly connect; that shortcut assumes `g` is non-increasing.
pub fn build_graph(points: &PointSet, g: &ConnectionFunction, metric: Metric, mode: BuildMode) -> RcmGraph {
    let ladder = PairLadder::generate(points.seed, points.len());
    let edges = match mode {
        BuildMode::Exact => exact_edges(points, g, metric, &ladder),
        BuildMode::CellList { tail_mass } => cell_list_edges(points, g, metric, &ladder, tail_mass)
            .unwrap_or_else(|| exact_edges(points, g, metric, &ladder)),
    };
    RcmGraph {
        points: points.clone(),
        edges,
        metric,
        g: g.clone(),
    }
}

fn exact_edges(points: &PointSet, g: &ConnectionFunction, metric: Metric, ladder: &PairLadder) -> Vec<(u32, u32)> {
    let n = points.len();
    let side = points.region.side();
    let pos = &points.positions;
    let sparse = ladder.entries();
    let mut cursor = 0;
    let mut idx = 0u64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let level = if cursor < sparse.len() && sparse[cursor].0 == idx {
                cursor += 1;
                Some(sparse[cursor - 1].1)
            } else {
                None
            };
            idx += 1;
            let u = ladder.uniform_with_level(i, j, level);
            let d = metric.distance(pos[i], pos[j], side);
            if u < g.value(d) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges
}

/// Radius beyond which every pair is handled through the ladder.
fn near_radius(g: &ConnectionFunction, tail_mass: f64) -> f64 {
    let r_p = g.threshold_radius(BASE_P);
    let r_cut = g.effective_cutoff(tail_mass);
    if r_cut.is_finite() {
        r_cut.max(r_p)
    } else {
        r_p
    }
}

fn cell_list_edges(
    points: &PointSet,
    g: &ConnectionFunction,
    metric: Metric,
    ladder: &PairLadder,
    tail_mass: f64,
) -> Option<Vec<(u32, u32)>> {
    let n = points.len();
    let side = points.region.side();
    let pos = &points.positions;
    let r_near = near_radius(g, tail_mass);
    if !r_near.is_finite() {
        return None;
    }
    let per_axis = if r_near > 0.0 {
        (side / (r_near * (1.0 + 1e-9))).floor()
    } else {
        f64::INFINITY
    };
    let per_axis = per_axis
        .min(MAX_CELLS_PER_AXIS as f64)
        .min(((n as f64).sqrt().ceil()).max(3.0));
    if per_axis < 3.0 {
        return None;
    }
    let k = per_axis as usize;
    let cell = side / k as f64;
    let half = 0.5 * side;
    let coord = |v: f64| (((v + half) / cell).floor() as isize).clamp(0, k as isize - 1) as usize;

    let mut heads = vec![Vec::<u32>::new(); k * k];
    for (i, p) in pos.iter().enumerate() {
        heads[coord(p.y) * k + coord(p.x)].push(i as u32);
    }

    let wrap = metric == Metric::Toroidal;
    let mut edges = Vec::new();
    let consider = |i: usize, j: usize, edges: &mut Vec<(u32, u32)>| {
        let d = metric.distance(pos[i], pos[j], side);
        if d <= r_near {
            let level = ladder.level_of(pair_index(n, i, j));
            if ladder.uniform_with_level(i, j, level) < g.value(d) {
                edges.push((i.min(j) as u32, i.max(j) as u32));
            }
        }
    };
    for cy in 0..k {
        for cx in 0..k {
            let here = &heads[cy * k + cx];
            for &(dx, dy) in &STENCIL {
                let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                let (nx, ny) = if wrap {
                    (nx.rem_euclid(k as isize) as usize, ny.rem_euclid(k as isize) as usize)
                } else if nx < 0 || ny < 0 || nx >= k as isize || ny >= k as isize {
                    continue;
                } else {
                    (nx as usize, ny as usize)
                };
                if (dx, dy) == (0, 0) {
                    for (a, &i) in here.iter().enumerate() {
                        for &j in &here[a + 1..] {
                            consider(i as usize, j as usize, &mut edges);
                        }
                    }
                } else {
                    for &i in here {
                        for &j in &heads[ny * k + nx] {
                            consider(i as usize, j as usize, &mut edges);
                        }
                    }
                }
            }
        }
    }

    let p_max = g.value(r_near.next_up());
    if p_max > 0.0 {
        let level = ((-p_max.log2()).floor() as u32).clamp(BASE_LEVEL, TOP_LEVEL);
        for (i, j, m) in ladder.pairs_below(level) {
            let d = metric.distance(pos[i], pos[j], side);
            if d > r_near && ladder.uniform_with_level(i, j, Some(m)) < g.value(d) {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges.sort_unstable();
    Some(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connfn::Support;
    use crate::geometry::{Point, Region};
    use crate::simulate::sample_poisson;

    fn collinear() -> PointSet {
        PointSet {
            positions: vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)],
            region: Region::square(10.0),
            density: 1.0,
            seed: 3,
        }
    }

    #[test]
    fn zero_function_gives_no_edges() {
        let pts = sample_poisson(Region::square(10.0), 1.0, 1);
        for mode in [BuildMode::Exact, BuildMode::CellList { tail_mass: 1e-6 }] {
            let gr = build_graph(&pts, &ConnectionFunction::zero(), Metric::Euclidean, mode);
            assert!(gr.edges.is_empty());
        }
    }

    #[test]
    fn unit_disk_path() {
        let g = ConnectionFunction::unit_disk(1.0).unwrap();
        let gr = build_graph(&collinear(), &g, Metric::Euclidean, BuildMode::Exact);
        assert_eq!(gr.edges, vec![(0, 1), (0, 2), (1, 2)]);
        let g = ConnectionFunction::unit_disk(0.6).unwrap();
        let gr = build_graph(&collinear(), &g, Metric::Euclidean, BuildMode::Exact);
        assert_eq!(gr.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn edge_frequency_matches_g() {
        // Two points at a fixed distance; across seeds the link frequency is g(d).
        let g = ConnectionFunction::theta_tail(0.5, 1.5, 1.0).unwrap();
        for d in [0.5, 3.0, 9.0, 40.0] {
            let p = g.value(d);
            let trials = 200_000u64;
            let hits = (0..trials)
                .filter(|&s| {
                    let pts = PointSet {
                        positions: vec![Point::new(0.0, 0.0), Point::new(d, 0.0)],
                        region: Region::square(100.0),
                        density: 1.0,
                        seed: s,
                    };
                    !build_graph(&pts, &g, Metric::Euclidean, BuildMode::Exact)
                        .edges
                        .is_empty()
                })
                .count();
            let f = hits as f64 / trials as f64;
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((f - p).abs() <= 4.0 * sd + 1e-9, "d={d}: {f} vs {p}");
        }
    }

    #[test]
    fn cell_list_matches_exact() {
        let cases = [
            (ConnectionFunction::unit_disk(1.0).unwrap(), Metric::Euclidean, 20.0),
            (ConnectionFunction::unit_disk(1.0).unwrap(), Metric::Toroidal, 20.0),
            (
                ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap(),
                Metric::Euclidean,
                20.0,
            ),
            (
                ConnectionFunction::lognormal(4.0, 3.0, 1.0).unwrap(),
                Metric::Toroidal,
                15.0,
            ),
            (
                ConnectionFunction::theta_tail(0.5, 1.5, 1.0).unwrap(),
                Metric::Toroidal,
                40.0,
            ),
            (
                ConnectionFunction::omega_tail(1.5, 1.5, 1.0).unwrap(),
                Metric::Euclidean,
                40.0,
            ),
        ];
        for (g, metric, side) in cases {
            for seed in 0..5 {
                let pts = sample_poisson(Region::square(side), 400.0 / (side * side), seed);
                let a = build_graph(&pts, &g, metric, BuildMode::Exact);
                let b = build_graph(&pts, &g, metric, BuildMode::CellList { tail_mass: 1e-6 });
                assert_eq!(a.edges, b.edges, "{g} {metric:?} seed {seed}");
            }
        }
    }

    #[test]
    fn tiny_side_falls_back_to_exact() {
        let g = ConnectionFunction::custom(
            "half",
            |x| if x < 1.0 { 0.5 } else { 0.0 },
            Support::Compact(1.0),
            vec![1.0],
        );
        let pts = sample_poisson(Region::square(2.0), 10.0, 4);
        let a = build_graph(&pts, &g, Metric::Euclidean, BuildMode::Exact);
        let b = build_graph(&pts, &g, Metric::Euclidean, BuildMode::CellList { tail_mass: 1e-6 });
        assert_eq!(a.edges, b.edges);
    }
}
