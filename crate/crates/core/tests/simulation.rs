use rcm_lab::connfn::{ConnectionFunction, GSpec};
use rcm_lab::error::Error;
use rcm_lab::experiments::{run_sweep, SweepConfig};
use rcm_lab::models::{ModelKind, ModelSpec};
use rcm_lab::simulate::{boundary_coupling, build_graph, census, is_connected_via_ordering, BuildMode};

fn disk() -> ConnectionFunction {
    ConnectionFunction::unit_disk(1.0).unwrap()
}

#[test]
fn coupled_square_matches_independent_square() {
    let mut coupled = SweepConfig::new(GSpec::UnitDisk { r0: 1.0 }, ModelKind::Torus, vec![1e2], 0.0, 1500);
    coupled.coupling = true;
    coupled.base_seed = 1;
    let mut square = SweepConfig::new(
        GSpec::UnitDisk { r0: 1.0 },
        ModelKind::FiniteSquare,
        vec![1e2],
        0.0,
        1500,
    );
    square.base_seed = 100_000;
    let (a, _) = run_sweep(&coupled).unwrap();
    let (b, _) = run_sweep(&square).unwrap();
    let (a, b) = (&a.rows[0], &b.rows[0]);
    let se = (a.se_w.powi(2) + b.se_w.powi(2)).sqrt();
    assert!((a.mean_w - b.mean_w).abs() <= 3.0 * se, "{} vs {}", a.mean_w, b.mean_w);
    let torus_mean = a.mean_w_t.unwrap();
    assert!((torus_mean - a.quad_ew_torus.unwrap()).abs() <= 3.0 * a.se_w_t.unwrap());
    assert!((a.mean_w_e.unwrap() - (a.quad_ew.unwrap() - a.quad_ew_torus.unwrap())).abs() <= 3.0 * a.se_w_e.unwrap());
}

#[test]
fn coupled_square_is_a_subgraph_on_the_same_points() {
    let spec = ModelSpec::new(ModelKind::Torus, 300.0, 0.0, disk()).unwrap();
    let pts = spec.sample(4).unwrap();
    let torus = build_graph(&pts, &spec.connection().unwrap(), spec.metric(), BuildMode::default());
    let out = boundary_coupling(&torus).unwrap();
    assert_eq!(out.square.points.positions, torus.points.positions);
    assert!(out.square.edges.iter().all(|e| torus.edges.binary_search(e).is_ok()));
    assert_eq!(out.w, census(&out.square).w);
    assert_eq!(out.w_t, census(&torus).w);
    let square = build_graph(
        &pts,
        &spec.connection().unwrap(),
        rcm_lab::simulate::Metric::Euclidean,
        BuildMode::default(),
    );
    assert!(matches!(boundary_coupling(&square), Err(Error::MetricMismatch { .. })));
}

#[test]
fn window_mean_matches_infinite_model() {
    for b in [0.0, 1.0] {
        let mut cfg = SweepConfig::new(
            GSpec::UnitDisk { r0: 1.0 },
            ModelKind::InfiniteWindow,
            vec![1e3],
            b,
            1500,
        );
        cfg.base_seed = 7;
        let (stats, records) = run_sweep(&cfg).unwrap();
        let row = &stats.rows[0];
        assert!(
            ((row.mean_w - (-b).exp()) / row.se_w).abs() <= 3.0,
            "b = {b}: {} ± {}",
            row.mean_w,
            row.se_w
        );
        assert!(row.zscore_w.unwrap().abs() <= 3.0);
        // Cutting the pad can only add isolated nodes.
        assert!(records.iter().all(|r| r.w_trunc.unwrap() >= r.w));
        assert!(row.mean_w_trunc.unwrap() > row.mean_w);
    }
}

#[test]
fn unit_disk_edges_are_exactly_the_close_pairs() {
    let spec = ModelSpec::new(ModelKind::FiniteSquare, 400.0, 0.0, disk()).unwrap();
    for seed in 0..5 {
        let pts = spec.sample(seed).unwrap();
        let graph = build_graph(&pts, &spec.connection().unwrap(), spec.metric(), BuildMode::default());
        let n = pts.len();
        let mut close = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if graph.distance(i, j) < 1.0 {
                    close.push((i as u32, j as u32));
                }
            }
        }
        assert_eq!(graph.edges, close);
    }
}

#[test]
fn isolation_depends_only_on_the_neighbourhood() {
    // Removing every node farther than r0 from v leaves v's isolation unchanged.
    let spec = ModelSpec::new(ModelKind::FiniteSquare, 400.0, 0.0, disk()).unwrap();
    let pts = spec.sample(11).unwrap();
    let g = spec.connection().unwrap();
    let graph = build_graph(&pts, &g, spec.metric(), BuildMode::Exact);
    let degrees = graph.degrees();
    for v in (0..pts.len()).step_by(17) {
        let near: Vec<usize> = (0..pts.len())
            .filter(|&u| u != v && graph.distance(u, v) < 1.0)
            .collect();
        assert_eq!(degrees[v] == 0, near.is_empty());
    }
}

#[test]
fn ordering_connectivity_agrees_with_census() {
    let spec = ModelSpec::new(ModelKind::Torus, 60.0, 1.0, disk()).unwrap();
    for seed in 0..20 {
        let pts = spec.sample(seed).unwrap();
        let graph = build_graph(&pts, &spec.connection().unwrap(), spec.metric(), BuildMode::default());
        let adj = graph.adjacency();
        let ids: Vec<usize> = (0..pts.len()).collect();
        let connected = is_connected_via_ordering(&ids, |a, b| adj[ids[a]].contains(&ids[b]));
        assert_eq!(connected, census(&graph).largest_order == pts.len());
    }
}

#[test]
fn trial_failures_report_the_seed() {
    let mut cfg = SweepConfig::new(
        GSpec::ThetaTail {
            a: 0.5,
            x0: 1.5,
            g0: 1.0,
        },
        ModelKind::InfiniteWindow,
        vec![1e3],
        0.0,
        3,
    );
    cfg.quadrature = false;
    assert!(matches!(run_sweep(&cfg), Err(Error::InvalidParams(_))));
    cfg.margin = Some(8.0);
    let (stats, _) = run_sweep(&cfg).unwrap();
    assert_eq!(stats.rows[0].trials, 3);
}
