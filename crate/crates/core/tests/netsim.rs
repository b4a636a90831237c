use funnelsync_core::emergent::{simulate_emergent, EmergentMode, EmergentSpec};
use funnelsync_core::netsim::{diagnostics, integrate, network_rhs, Outcome};
use funnelsync_core::{Agent, CouplingSpec, FunnelSpec, Graph, Scenario, ScenarioError, SimError, VectorField};

fn agents(fields: &[&str], funnel: &FunnelSpec, coupling: CouplingSpec, x0: &[f64]) -> Vec<Agent> {
    fields
        .iter()
        .zip(x0)
        .map(|(f, &x0)| Agent { f: VectorField::parse(f).unwrap(), funnel: funnel.clone(), coupling, x0 })
        .collect()
}

fn classical() -> CouplingSpec {
    CouplingSpec::Classical { kappa: 1.0 }
}

fn k2_scenario(t_end: f64, dt: f64) -> Scenario {
    let psi = FunnelSpec::constant(1.0).unwrap();
    let g = Graph::complete(2, 1.0).unwrap();
    Scenario::builder(g, agents(&["1", "-1"], &psi, classical(), &[0.0, 0.0]))
        .horizon(0.0, t_end)
        .step(dt)
        .build()
        .unwrap()
}

/// Three distinct agents on a path with a wide funnel: mild enough for plain
/// RK4 steps at the grid spacing.
fn mild_scenario(dt: f64) -> Scenario {
    let psi = FunnelSpec::exp_to_eta(4.0, 1.0, 0.5, 0.0).unwrap();
    let g = Graph::path(3, 1.0).unwrap();
    Scenario::builder(g, agents(&["1 - x", "sin(t) - x", "-0.5 - 0.5*x"], &psi, classical(), &[0.2, 0.0, -0.2]))
        .horizon(0.0, 2.0)
        .step(dt)
        .build()
        .unwrap()
}

#[test]
fn k2_steady_gap() {
    let rec = integrate(&k2_scenario(20.0, 1e-2)).unwrap();
    let x = rec.final_state().unwrap();
    assert!((x[1] - x[0] + 0.5).abs() < 1e-3, "gap {}", x[1] - x[0]);
    assert_eq!(rec.summary.outcome, Outcome::Completed);
    assert!(!rec.summary.breach);
}

#[test]
fn k2_rhs_hand_values() {
    let s = k2_scenario(1.0, 1e-2);
    assert_eq!(network_rhs(0.0, &[0.0, 0.0], &s).unwrap(), vec![1.0, -1.0]);
    let d = network_rhs(0.0, &[0.25, -0.25], &s).unwrap();
    assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15);
}

#[test]
fn homogeneous_decay() {
    let psi = FunnelSpec::exp_to_eta(1.0, 0.1, 1.0, 0.0).unwrap();
    for g in [Graph::ring(5, 1.0).unwrap(), Graph::star(4, 2.0).unwrap()] {
        let n = g.n();
        let s = Scenario::builder(g, agents(&vec!["-x"; n], &psi, classical(), &vec![3.0; n]))
            .horizon(0.0, 3.0)
            .step(1e-2)
            .build()
            .unwrap();
        let rec = integrate(&s).unwrap();
        for (k, t) in rec.times.iter().enumerate() {
            for i in 0..n {
                assert!((rec.x[k][i] - 3.0 * (-t).exp()).abs() < 1e-9);
                assert_eq!(rec.u[k][i], 0.0);
            }
        }
    }
}

#[test]
fn diffusive_terms_conserved_along_run() {
    let rec = integrate(&mild_scenario(1e-2)).unwrap();
    for (k, nu) in rec.nu.iter().enumerate() {
        let xmax = rec.x[k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(nu.iter().sum::<f64>().abs() <= 1e-12 * 3.0 * xmax.max(1.0));
    }
}

#[test]
fn rk4_order_under_step_halving() {
    let end = |dt: f64| integrate(&mild_scenario(dt)).unwrap().final_state().unwrap().to_vec();
    let (a, b, c) = (end(0.1), end(0.05), end(0.025));
    let diff = |p: &[f64], q: &[f64]| p.iter().zip(q).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
    let order = (diff(&a, &b) / diff(&b, &c)).log2();
    assert!(order >= 3.5, "observed order {order}");
}

#[test]
fn omega_identity_and_nonnegative_w() {
    let s = mild_scenario(1e-2);
    let rec = integrate(&s).unwrap();
    let spec = EmergentSpec::from_scenario(&s);
    let em = simulate_emergent(0.0, s.t0(), s.t_end(), s.dt(), EmergentMode::Direct, &spec).unwrap();
    let d = diagnostics(&rec, &s, &em).unwrap();
    let couplings = s.couplings();
    for k in 0..rec.len() {
        assert!(d.w[k] >= 0.0);
        let x_s = d.x_s[k];
        let psi = &rec.psi[k];
        let psi_min = psi.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..s.n() {
            let f_i = s.agents()[i].f.eval(rec.times[k], x_s).unwrap();
            let lhs = rec.nu[k][i] / psi[i] - couplings[i].mu_inv(d.f_em[k] - f_i);
            let r = s.spectrum().basis_row(i);
            let rhs = psi_min / psi[i] * r.iter().zip(&d.y[k]).map(|(a, b)| a * b).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-8, "t={} i={i}: {lhs} vs {rhs}", rec.times[k]);
        }
    }
}

#[test]
fn synchronized_diagnostics_vanish() {
    let psi = FunnelSpec::exp_to_eta(1.0, 0.1, 1.0, 0.0).unwrap();
    let g = Graph::ring(4, 1.0).unwrap();
    let s = Scenario::builder(g, agents(&["-x"; 4], &psi, classical(), &[2.0; 4]))
        .horizon(0.0, 1.0)
        .step(1e-2)
        .build()
        .unwrap();
    let rec = integrate(&s).unwrap();
    let em = simulate_emergent(2.0, 0.0, 1.0, 1e-2, EmergentMode::Direct, &EmergentSpec::from_scenario(&s)).unwrap();
    let d = diagnostics(&rec, &s, &em).unwrap();
    for k in 0..rec.len() {
        assert!(d.w[k].abs() < 1e-20);
        assert!(d.v[k] < 1e-9);
    }
}

#[test]
fn initial_outside_funnel() {
    let psi = FunnelSpec::constant(1.0).unwrap();
    let g = Graph::complete(2, 1.0).unwrap();
    let err = Scenario::builder(g, agents(&["0", "0"], &psi, classical(), &[0.0, 1.5])).build().unwrap_err();
    assert!(matches!(err, ScenarioError::InitialOutsideFunnel { index: 0, .. }), "{err:?}");
}

#[test]
fn stiff_tail_stays_inside_funnel() {
    // ψ decays to 1e-6 of its start value; steps must adapt to the gain
    let psi = FunnelSpec::exp_to_eta(1.0, 0.0, 1.0, 0.0).unwrap();
    let g = Graph::ring(4, 1.0).unwrap();
    let s = Scenario::builder(g, agents(&["1 - x", "2 - x", "-3 - x", "5*sin(t) - x"], &psi, classical(), &[0.0; 4]))
        .horizon(0.0, 14.0)
        .step(1e-2)
        .build()
        .unwrap();
    let rec = integrate(&s).unwrap();
    assert!(rec.summary.max_ratio < 1.0);
    for r in &rec.ratio {
        assert!(r.iter().all(|v| v.abs() < 1.0));
    }
}

#[test]
fn breach_reports_last_safe_state() {
    // no step refinement allowed and a drive gap far beyond what one step can follow
    let psi = FunnelSpec::constant(1.0).unwrap();
    let g = Graph::complete(2, 1.0).unwrap();
    let s = Scenario::builder(g, agents(&["1000", "-1000"], &psi, classical(), &[0.0, 0.0]))
        .horizon(0.0, 1.0)
        .step(0.5)
        .dt_min(0.5)
        .build()
        .unwrap();
    match integrate(&s) {
        Err(SimError::FunnelBreach(b)) => {
            assert_eq!(b.last_safe_t, 0.0);
            assert_eq!(b.last_safe_state, vec![0.0, 0.0]);
            assert!(b.ratio.abs() >= 1.0 - s.guard_margin() || !b.ratio.is_finite());
            assert_eq!(b.partial.len(), 1);
        }
        other => panic!("expected breach, got {other:?}"),
    }
}
