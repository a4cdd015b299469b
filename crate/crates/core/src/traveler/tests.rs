use super::*;
use crate::blockage::{BlockageModel, EdgeState, Overrides, Realization};
use crate::error::Error;
use crate::fixtures;
use crate::network::{Edge, RoadNetwork};
use crate::oracle;

const F: f64 = 100.0;

fn model(net: &RoadNetwork) -> BlockageModel {
    BlockageModel::from_network(net)
}

fn probs(net: &RoadNetwork) -> Vec<f64> {
    model(net).probabilities().to_vec()
}

fn exact(net: &RoadNetwork, failure_cost: f64) -> ExpectedTime {
    let sink = net.nodes().last().unwrap().clone();
    exact_expected_time(net, &model(net), net.node_id(0), &sink, failure_cost).unwrap()
}

fn policy<'a>(net: &'a RoadNetwork, kind: PolicyKind, failure_cost: f64) -> Policy<'a> {
    let sink = net.nodes().last().unwrap().clone();
    make_policy(kind, net, &model(net), &sink, failure_cost).unwrap()
}

fn evaluate(net: &RoadNetwork, p: &Policy<'_>) -> ExpectedTime {
    evaluate_policy(net, &model(net), p, net.node_id(0), &Overrides::new()).unwrap()
}

fn world(net: &RoadNetwork, blocked: &[&str]) -> Realization {
    Realization::new(
        net.edges()
            .iter()
            .map(|e| {
                if blocked.contains(&e.id.as_str()) {
                    EdgeState::Blocked
                } else {
                    EdgeState::Open
                }
            })
            .collect(),
    )
}

#[test]
fn fixture_values() {
    let tri = exact(&fixtures::tri(), F);
    assert!((tri.value - 10.6).abs() < 1e-12);
    assert_eq!(tri.failure_probability, 0.0);
    for (q, want) in [(0.25, 3.0), (0.75, 4.0), (0.5, 4.0)] {
        let got = exact(&fixtures::tb(q), F).value;
        assert!((got - want).abs() < 1e-12, "q={q}: {got}");
    }
}

#[test]
fn tie_goes_to_the_smaller_node_id() {
    // at q = 0.5 trying A and driving straight both cost 4
    let net = fixtures::tb(0.5);
    let k = KnowledgeState::start(&net, "S", &world(&net, &[])).unwrap();
    match optimal_action(&net, &model(&net), &k, "T", F).unwrap() {
        PlannedMove::Travel { target, path } => {
            assert_eq!(target, "A");
            assert_eq!(path.edges, ["sa"]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn optimal_action_examples() {
    let net = fixtures::tri();
    let m = model(&net);
    let open = KnowledgeState::start(&net, "S", &world(&net, &[])).unwrap();
    match optimal_action(&net, &m, &open, "T", F).unwrap() {
        PlannedMove::Travel { target, path } => {
            assert_eq!(target, "T");
            assert_eq!(path.nodes, ["S", "T"]);
            assert_eq!(path.cost, 10.0);
        }
        other => panic!("unexpected {other:?}"),
    }
    let closed = KnowledgeState::start(&net, "S", &world(&net, &["d"])).unwrap();
    match optimal_action(&net, &m, &closed, "T", F).unwrap() {
        PlannedMove::Travel { path, .. } => assert_eq!(path.nodes, ["S", "M", "T"]),
        other => panic!("unexpected {other:?}"),
    }
    let at_sink = KnowledgeState::start(&net, "T", &world(&net, &[])).unwrap();
    assert_eq!(optimal_action(&net, &m, &at_sink, "T", F).unwrap(), PlannedMove::Arrived);

    let cut = fixtures::tb(0.25);
    let k = KnowledgeState::from_parts(
        &cut,
        "A",
        &["S", "A"],
        &[("sa", EdgeState::Open), ("at", EdgeState::Blocked), ("st", EdgeState::Blocked)],
    )
    .unwrap();
    assert_eq!(optimal_action(&cut, &model(&cut), &k, "T", F).unwrap(), PlannedMove::Abort);
}

#[test]
fn turn_back_trip() {
    let net = fixtures::tb(0.25);
    let p = policy(&net, PolicyKind::Optimal, F);
    let mut visited = Vec::new();
    let trip = p
        .walk(0, &world(&net, &["at"]), |k| visited.push(net.node_id(k.current()).to_string()))
        .unwrap();
    assert_eq!(trip.travel_time, 6.0);
    assert!(!trip.failed);
    assert_eq!(visited, ["S", "A", "S", "T"]);
}

#[test]
fn knowledge_only_grows_along_a_trip() {
    for seed in 0..20 {
        let net = oracle::random_instance(seed);
        let p = policy(&net, PolicyKind::Optimal, F);
        for (w, _) in oracle::worlds(&probs(&net), &vec![None; net.edge_count()]).into_iter().take(16) {
            let mut previous: Option<KnowledgeState> = None;
            p.walk(0, &w, |k| {
                if let Some(before) = &previous {
                    for e in 0..net.edge_count() {
                        if before.edge(e) != EdgeKnowledge::Unknown {
                            assert_eq!(before.edge(e), k.edge(e));
                        }
                    }
                    assert!(k.decided_count() >= before.decided_count());
                }
                previous = Some(k.clone());
            })
            .unwrap();
        }
    }
}

#[test]
fn heuristic_policies_on_the_turn_back_fixture() {
    let net = fixtures::tb(0.75);
    let greedy = evaluate(&net, &policy(&net, PolicyKind::ReplanGreedy, F));
    assert!((greedy.value - 5.0).abs() < 1e-12);
    let direct = evaluate(&net, &policy(&net, PolicyKind::FixedRoute(vec!["S".into(), "T".into()]), F));
    assert!((direct.value - 4.0).abs() < 1e-12);
    let via_a = PolicyKind::FixedRoute(vec!["S".into(), "A".into(), "T".into()]);
    assert!((evaluate(&net, &policy(&net, via_a, F)).value - 5.0).abs() < 1e-12);
    let optimal = evaluate(&net, &policy(&net, PolicyKind::Optimal, F));
    assert!((optimal.value - 4.0).abs() < 1e-12);
}

#[test]
fn bad_routes() {
    let net = fixtures::tb(0.25);
    let m = model(&net);
    let route = |nodes: &[&str]| PolicyKind::FixedRoute(nodes.iter().map(|s| s.to_string()).collect());
    for bad in [&["S", "A"][..], &["S", "A", "S", "T"], &["S", "X", "T"], &[]] {
        let err = make_policy(route(bad), &net, &m, "T", F).err().unwrap();
        assert!(matches!(err, Error::BadRoute(_)), "{bad:?}");
    }
    let p = make_policy(route(&["A", "T"]), &net, &m, "T", F).unwrap();
    let err = evaluate_policy(&net, &m, &p, "S", &Overrides::new()).unwrap_err();
    assert!(matches!(err, Error::BadRoute(_)));
}

#[test]
fn exact_matches_single_step_oracle() {
    for seed in 0..40 {
        let net = oracle::random_instance(seed);
        let t = net.node_count() - 1;
        let got = exact(&net, F);
        let want = oracle::naive_expected_time(&net, &probs(&net), 0, t, F);
        assert!((got.value - want).abs() < 1e-9, "seed {seed}: {} vs {want}", got.value);
        let cut = oracle::unreachable_probability(&net, &probs(&net), 0, t);
        assert!((got.failure_probability - cut).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn policy_evaluation_matches_enumeration() {
    for seed in 0..40 {
        let net = oracle::random_instance(seed);
        let t = net.node_count() - 1;
        let mut kinds = vec![PolicyKind::Optimal, PolicyKind::ReplanGreedy];
        let plan = net.lex_shortest_path(0, t, &|_| true).unwrap();
        kinds.push(PolicyKind::FixedRoute(
            plan.nodes.iter().map(|&n| net.node_id(n).to_string()).collect(),
        ));
        for kind in kinds {
            let p = policy(&net, kind.clone(), F);
            let got = evaluate(&net, &p);
            let (value, failure) =
                oracle::policy_value_by_enumeration(&net, &probs(&net), &p, 0, &Overrides::new()).unwrap();
            assert!((got.value - value).abs() < 1e-9, "seed {seed} {kind:?}");
            assert!((got.failure_probability - failure).abs() < 1e-9, "seed {seed} {kind:?}");
        }
    }
}

#[test]
fn optimal_value_equals_its_own_evaluation() {
    for seed in 0..40 {
        let net = oracle::random_instance(seed);
        let value = exact(&net, F).value;
        let walked = evaluate(&net, &policy(&net, PolicyKind::Optimal, F)).value;
        assert!((value - walked).abs() < 1e-9, "seed {seed}");
    }
}

#[test]
fn dominance_and_clairvoyant_bound() {
    for seed in 0..40 {
        let net = oracle::random_instance(seed);
        let t = net.node_count() - 1;
        let optimal = exact(&net, F).value;
        let greedy = evaluate(&net, &policy(&net, PolicyKind::ReplanGreedy, F)).value;
        assert!(optimal <= greedy + 1e-9, "seed {seed}");
        let bound = oracle::clairvoyant_bound(&net, &probs(&net), 0, t, F);
        assert!(optimal >= bound - 1e-9, "seed {seed}");
    }
}

#[test]
fn deterministic_networks_reduce_to_shortest_paths() {
    let net = fixtures::tb(0.0);
    assert_eq!(exact(&net, F).value, 2.0);
    let net = fixtures::tb(1.0);
    assert_eq!(exact(&net, F).value, 4.0);
    let tri = fixtures::tri();
    let m = model(&tri).with_probability("d", 1.0).unwrap();
    let v = exact_expected_time(&tri, &m, "S", "T", F).unwrap();
    assert_eq!(v.value, 12.0);
}

#[test]
fn unreachable_sink_pays_the_failure_cost() {
    let net = RoadNetwork::new(
        false,
        vec!["S".into(), "T".into()],
        vec![Edge {
            id: "only".into(),
            u: "S".into(),
            v: "T".into(),
            cost: 3.0,
            p: Some(0.4),
        }],
    )
    .unwrap();
    let v = exact(&net, 50.0);
    assert!((v.value - (0.6 * 3.0 + 0.4 * 50.0)).abs() < 1e-12);
    assert!((v.failure_probability - 0.4).abs() < 1e-12);
    assert!(matches!(
        exact_expected_time(&net, &model(&net), "S", "T", 0.0),
        Err(Error::Validation(_))
    ));
}

#[test]
fn directed_roads_reveal_at_either_end() {
    // S->A->T with a costly S->T; A->T is also seen from T's side but that
    // never matters here; the one-way back edge T->S must not be driven
    let edge = |id: &str, u: &str, v: &str, cost: f64, p: f64| Edge {
        id: id.into(),
        u: u.into(),
        v: v.into(),
        cost,
        p: Some(p),
    };
    let net = RoadNetwork::new(
        true,
        vec!["S".into(), "A".into(), "T".into()],
        vec![
            edge("sa", "S", "A", 1.0, 0.0),
            edge("at", "A", "T", 1.0, 0.5),
            edge("st", "S", "T", 5.0, 0.0),
            edge("as", "A", "S", 1.0, 0.0),
        ],
    )
    .unwrap();
    let t = 2;
    let got = exact(&net, F).value;
    let want = oracle::naive_expected_time(&net, &probs(&net), 0, t, F);
    assert!((got - want).abs() < 1e-12);
    // try A (1), then half the time finish (1), else back (1) and direct (5)
    assert!((got - (1.0 + 0.5 * 1.0 + 0.5 * 6.0)).abs() < 1e-12);
}

#[test]
fn monte_carlo_agrees_with_exact() {
    for net in [fixtures::tri(), fixtures::tb(0.25), fixtures::tb(0.75)] {
        let p = policy(&net, PolicyKind::Optimal, F);
        let d = simulate_policy(&net, &model(&net), &p, "S", 20_000, 42, &Overrides::new()).unwrap();
        let want = exact(&net, F).value;
        let s = d.summary();
        assert!((s.mean - want).abs() <= 3.0 * s.std_error + 1e-12, "{} vs {want}", s.mean);
    }
}

#[test]
fn monte_carlo_ignores_worker_count() {
    let net = oracle::random_instance(7);
    let p = policy(&net, PolicyKind::Optimal, F);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_policy(&net, &model(&net), &p, "n0", 2_000, 9, &Overrides::new()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn overrides_force_the_world() {
    let net = fixtures::tri();
    let p = policy(&net, PolicyKind::Optimal, F);
    let blocked = Overrides::from([("d".to_string(), EdgeState::Blocked)]);
    let d = simulate_policy(&net, &model(&net), &p, "S", 500, 1, &blocked).unwrap();
    assert!(d.times().iter().all(|&t| t == 12.0));
    let e = evaluate_policy(&net, &model(&net), &p, "S", &blocked).unwrap();
    assert_eq!(e.value, 12.0);
    let unknown = Overrides::from([("zz".to_string(), EdgeState::Open)]);
    assert!(matches!(
        evaluate_policy(&net, &model(&net), &p, "S", &unknown),
        Err(Error::UnknownEdge(_))
    ));
}

#[test]
fn cap_is_enforced() {
    let nodes: Vec<String> = (0..23).map(|i| format!("v{i:02}")).collect();
    let edges = (0..22)
        .map(|i| Edge {
            id: format!("e{i:02}"),
            u: nodes[i].clone(),
            v: nodes[i + 1].clone(),
            cost: 1.0,
            p: Some(0.1),
        })
        .collect();
    let net = RoadNetwork::new(false, nodes, edges).unwrap();
    let m = model(&net);
    let err = exact_expected_time(&net, &m, "v00", "v22", F).unwrap_err();
    assert!(matches!(err, Error::TooManyUncertainEdges { count: 22, cap: 20 }));
    let err = make_policy(PolicyKind::Optimal, &net, &m, "v22", F).err().unwrap();
    assert!(matches!(err, Error::TooManyUncertainEdges { .. }));
    // a line has nothing to choose: the heuristic still runs
    let p = make_policy(PolicyKind::ReplanGreedy, &net, &m, "v22", F).unwrap();
    assert!(simulate_policy(&net, &m, &p, "v00", 10, 0, &Overrides::new()).is_ok());
}

