//! End-to-end checks on the bundled scenarios: equilibrium quality, window
//! continuity, series identities, parallel determinism, and convergence
//! orders.

use std::path::Path;

use dtsim_core::sas::{build_window, parallel_build_window, simulate_with_windows, SimConfig};
use dtsim_core::series::Series;
use dtsim_core::smib::{self, SmibParams};
use dtsim_core::system::equilibrium_residual;
use dtsim_core::{Case, Scenario, Stage, StagedNetwork};

fn load_ieee39() -> Case {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ieee39.json");
    let scenario = Scenario::from_path(&path).expect("bundled scenario loads");
    match scenario {
        Scenario::MultiMachine(s) => s.build().expect("case builds"),
        _ => panic!("ieee39.json is a multi-machine scenario"),
    }
}

#[test]
fn ieee39_loads_and_initializes_at_equilibrium() {
    let case = load_ieee39();
    assert_eq!(case.model.n(), 10);
    let residual = equilibrium_residual(&case.initial, &case.model, Stage::PreFault);
    assert!(
        residual < 1e-9,
        "pre-fault equilibrium residual {residual:e}"
    );
    for (i, st) in case.initial.iter().enumerate() {
        assert!(st.omega.abs() < 1e-12, "machine {i} starts off speed");
        assert!(st.ep_q > 0.0, "machine {i} has nonpositive e'_q");
    }
}

#[test]
fn ieee39_flat_run_stays_flat() {
    let mut case = load_ieee39();
    // no event: every stage uses the pre-fault matrix
    case.model.network = StagedNetwork::eventless(case.model.network.y_pre.clone());
    let cfg = SimConfig::new(8, 0.2, 1.0, 1.0 / 60.0);
    let (traj, _) = simulate_with_windows(&case.model, &case.initial, &cfg).unwrap();
    let max_omega = traj
        .machines
        .iter()
        .flat_map(|ch| ch.omega.iter())
        .fold(0.0f64, |m, &w| m.max(w.abs()));
    assert!(max_omega < 1e-8, "flat run drifted, max |omega| {max_omega:e}");
}

#[test]
fn windows_are_exactly_continuous() {
    let case = load_ieee39();
    let cfg = SimConfig::new(10, 0.2, 3.0, 1.0 / 60.0);
    let (_, windows) = simulate_with_windows(&case.model, &case.initial, &cfg).unwrap();
    assert!(windows.len() >= 10);
    for pair in windows.windows(2) {
        let (end_states, _) = pair[0].evaluate(pair[0].len);
        for (m, st) in end_states.iter().enumerate() {
            let next = &pair[1].machines[m];
            assert_eq!(next.delta.coeff(0), st.delta, "delta jump at machine {m}");
            assert_eq!(next.omega.coeff(0), st.omega, "omega jump at machine {m}");
            assert_eq!(next.ep_q.coeff(0), st.ep_q, "ep_q jump at machine {m}");
            assert_eq!(next.ep_d.coeff(0), st.ep_d, "ep_d jump at machine {m}");
        }
    }
}

#[test]
fn window_series_satisfy_model_identities() {
    let case = load_ieee39();
    let cfg = SimConfig::new(10, 0.2, 3.0, 1.0 / 60.0);
    let (_, windows) = simulate_with_windows(&case.model, &case.initial, &cfg).unwrap();
    for (wi, w) in windows.iter().enumerate() {
        for (mi, m) in w.machines.iter().enumerate() {
            for k in 0..w.order {
                // angle series integrates the speed series
                let lhs = (k + 1) as f64 * m.delta.coeff(k + 1);
                let rhs = case.model.omega_s * m.omega.coeff(k);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
                    "window {wi} machine {mi} order {k}: {lhs} vs {rhs}"
                );
            }
            for k in 0..=w.order {
                // sin^2 + cos^2 transforms to the unit impulse at order 0;
                // the check is relative to the magnitude of the summands,
                // which grow with the angle-series coefficients
                let p = Series::conv(&m.trig.sin, &m.trig.sin, k)
                    + Series::conv(&m.trig.cos, &m.trig.cos, k);
                let scale: f64 = (0..=k)
                    .map(|j| {
                        (m.trig.sin.coeff(j) * m.trig.sin.coeff(k - j)).abs()
                            + (m.trig.cos.coeff(j) * m.trig.cos.coeff(k - j)).abs()
                    })
                    .sum();
                let expect = if k == 0 { 1.0 } else { 0.0 };
                assert!(
                    (p - expect).abs() < 1e-12 * scale.max(1.0),
                    "window {wi} machine {mi} order {k}: sin^2+cos^2 -> {p}"
                );
            }
        }
    }
}

#[test]
fn parallel_build_is_bit_identical() {
    let case = load_ieee39();
    let state = &case.initial;
    for order in [4, 12] {
        let seq = build_window(state, &case.model, Stage::FaultOn, order).unwrap();
        for workers in [1, 4, 40] {
            let par =
                parallel_build_window(state, &case.model, Stage::FaultOn, order, workers).unwrap();
            for (ms, mp) in seq.machines.iter().zip(&par.machines) {
                assert_eq!(ms.delta.coeffs(), mp.delta.coeffs());
                assert_eq!(ms.omega.coeffs(), mp.omega.coeffs());
                assert_eq!(ms.ep_q.coeffs(), mp.ep_q.coeffs());
                assert_eq!(ms.ep_d.coeffs(), mp.ep_d.coeffs());
                assert_eq!(ms.p_e.coeffs(), mp.p_e.coeffs());
            }
        }
    }
}

#[test]
fn low_order_coefficients_are_final() {
    let case = load_ieee39();
    let w8 = build_window(&case.initial, &case.model, Stage::FaultOn, 8).unwrap();
    let w16 = build_window(&case.initial, &case.model, Stage::FaultOn, 16).unwrap();
    for (a, b) in w8.machines.iter().zip(&w16.machines) {
        for k in 0..=8 {
            assert_eq!(a.delta.coeff(k), b.delta.coeff(k));
            assert_eq!(a.omega.coeff(k), b.omega.coeff(k));
            assert_eq!(a.ep_q.coeff(k), b.ep_q.coeff(k));
            assert_eq!(a.ep_d.coeff(k), b.ep_d.coeff(k));
        }
    }
}

/// Least-squares slope of ln(err) against ln(h).
fn fit_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn truncation_error_has_local_order_k_plus_one() {
    let p = SmibParams::study_case();
    // a K = 30 series is exact to machine precision on these horizons
    let reference = smib::build_window(&p, p.delta0, p.omega0, 30).unwrap();
    for order in [3usize, 4] {
        let w = smib::build_window(&p, p.delta0, p.omega0, order).unwrap();
        let hs = [0.02, 0.04, 0.08, 0.16];
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let (dr, wr) = reference.evaluate(h);
                let (ds, ws) = w.evaluate(h);
                (dr - ds).abs().max((wr - ws).abs())
            })
            .collect();
        let slope = fit_slope(&hs, &errs);
        let expect = (order + 1) as f64;
        assert!(
            (slope - expect).abs() < 0.7,
            "order {order}: observed slope {slope:.2}, expected {expect}"
        );
    }
}

#[test]
fn reference_integrator_has_global_order_four() {
    let p = SmibParams::study_case();
    let duration = 1.0;
    let exact = smib::rk4_simulate(&p, 1.0 / 25600.0, duration);
    let last = exact.times.len() - 1;
    let (d_ref, w_ref) = (exact.machines[0].delta[last], exact.machines[0].omega[last]);
    let hs = [1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let t = smib::rk4_simulate(&p, h, duration);
            let l = t.times.len() - 1;
            (t.machines[0].delta[l] - d_ref)
                .abs()
                .max((t.machines[0].omega[l] - w_ref).abs())
        })
        .collect();
    let slope = fit_slope(&hs, &errs);
    assert!(
        (slope - 4.0).abs() < 0.3,
        "observed RK4 global order {slope:.2}"
    );
}

#[test]
fn undamped_energy_is_conserved() {
    let mut p = SmibParams::study_case();
    p.d = 0.0;
    let energy = |d: f64, w: f64| p.h * p.omega_s * w * w - p.p_m * d - p.p_max * d.cos();
    let e0 = energy(p.delta0, p.omega0);
    let traj = smib::sas_simulate(&p, 15, 0.1, 3.0, 0.01).unwrap();
    let drift = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, _)| (energy(traj.machines[0].delta[i], traj.machines[0].omega[i]) - e0).abs())
        .fold(0.0f64, f64::max);
    assert!(drift < 1e-6, "energy drift {drift:e}");
}

#[test]
fn accuracy_improves_with_order() {
    let p = SmibParams::study_case();
    let h = 1.0 / 3200.0;
    let reference = smib::rk4_simulate(&p, h, 0.2);
    let last = reference.times.len() - 1;
    let errs: Vec<f64> = [3usize, 7, 15]
        .iter()
        .map(|&k| {
            let w = smib::build_window(&p, p.delta0, p.omega0, k).unwrap();
            let (d, om) = w.evaluate(0.2);
            (d - reference.machines[0].delta[last])
                .abs()
                .max((om - reference.machines[0].omega[last]).abs())
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1], "errors {errs:?}");
}

#[test]
fn series_and_pointwise_algebraic_outputs_agree() {
    let case = load_ieee39();
    let mut cfg = SimConfig::new(12, 0.2, 3.0, 1.0 / 60.0);
    cfg.algebraic_from_series = true;
    let (a, _) = simulate_with_windows(&case.model, &case.initial, &cfg).unwrap();
    cfg.algebraic_from_series = false;
    let (b, _) = simulate_with_windows(&case.model, &case.initial, &cfg).unwrap();
    assert_eq!(a.times, b.times);
    // the series path truncates the algebraic product chain at the same
    // order as the states, so the two paths differ only by truncation:
    // negligible on the pre-fault plateau, bounded during the transient
    let mut max_flat = 0.0f64;
    let mut max_all = 0.0f64;
    for (ca, cb) in a.machines.iter().zip(&b.machines) {
        assert_eq!(ca.delta, cb.delta);
        for ((pa, pb), t) in ca.p_e.iter().zip(&cb.p_e).zip(&a.times) {
            let dp = (pa - pb).abs();
            max_all = max_all.max(dp);
            if *t < 1.0 {
                max_flat = max_flat.max(dp);
            }
        }
    }
    assert!(max_flat < 1e-9, "paths disagree pre-fault by {max_flat:e}");
    assert!(max_all < 0.1, "electrical power paths disagree by {max_all:e}");
}
