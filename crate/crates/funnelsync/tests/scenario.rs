use funnelsync::graphs::random_connected;
use funnelsync::scenario::{CouplingDoc, FunnelDoc};
use funnelsync::{LoadError, ScenarioFile};
use funnelsync_core::{CouplingSpec, FunnelSpec};

#[test]
fn documented_encodings_parse() {
    let f: FunnelDoc = serde_json::from_str(r#"{"family": "exp_to_eta", "psi0": 40, "eta": 2, "lambda": 1}"#).unwrap();
    assert_eq!(f.to_spec().unwrap(), FunnelSpec::exp_to_eta(40.0, 2.0, 1.0, 0.0).unwrap());
    let c: CouplingDoc = serde_json::from_str(r#"{"family": "classical", "kappa": 1}"#).unwrap();
    assert_eq!(CouplingSpec::from(c), CouplingSpec::Classical { kappa: 1.0 });
    let c: CouplingDoc = serde_json::from_str(r#"{"family": "near_signum", "eps": 0.2, "eta": 0.05}"#).unwrap();
    assert_eq!(CouplingSpec::from(c), CouplingSpec::NearSignum { eps: 0.2, eta: 0.05 });
    let f: FunnelDoc =
        serde_json::from_str(r#"{"family": "scaled", "inner": {"family": "constant", "psi0": 2}, "factor": 0.5}"#)
            .unwrap();
    assert_eq!(f.to_spec().unwrap().value(3.0).unwrap(), 1.0);
}

#[test]
fn bundled_scenarios_load() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let file = ScenarioFile::load(&path).unwrap();
        let s = file.build().unwrap();
        assert_eq!(s.n(), file.agents.len(), "{}", path.display());
        let again = ScenarioFile::from_json(&file.to_json()).unwrap();
        assert_eq!(again, file);
    }
}

#[test]
fn unknown_keys_rejected() {
    let text = r#"{"t_end": 1, "dt": 0.1, "graph": {"family": "path", "n": 2}, "agents": [], "extra": 1}"#;
    assert!(matches!(ScenarioFile::from_json(text), Err(LoadError::Json(_))));
    let text = r#"{"t_end": 1, "dt": 0.1, "graph": {"family": "path", "n": 2, "colour": 3}, "agents": []}"#;
    assert!(matches!(ScenarioFile::from_json(text), Err(LoadError::Json(_))));
}

#[test]
fn random_graphs_are_connected_and_seeded() {
    for seed in 0..50 {
        for n in [2, 3, 7, 12] {
            let g = random_connected(n, 0.2, 1.5, seed).unwrap();
            assert!(g.is_connected());
            assert_eq!(g, random_connected(n, 0.2, 1.5, seed).unwrap());
        }
    }
    assert_ne!(random_connected(8, 0.3, 1.0, 1).unwrap(), random_connected(8, 0.3, 1.0, 2).unwrap());
    assert_eq!(random_connected(6, 1.0, 1.0, 9).unwrap().edges().len(), 15);
    assert_eq!(random_connected(6, 0.0, 1.0, 9).unwrap().edges().len(), 5);
}
