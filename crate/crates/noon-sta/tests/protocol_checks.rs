//! End-to-end protocol behavior: pinned fidelities, exact reversibility
//! through the coefficient-negated mirror stages, arm balance with an ideal
//! splitter, boundary leakage and the uncorrected baselines.

use noon_sta::dynamics::{evolve, EvolveOptions};
use noon_sta::hilbert::{StateVector, Topology};
use noon_sta::protocol::{
    baseline_mode, plan_noon, run_protocol, ProtocolParams, RunOptions, StageKind,
};
use noon_sta::pulse::{ae_area, PulsePair, PulseShape};
use noon_sta::sta::StagePulses;
use noon_sta::stage::{stage_qutrit_qutrit, StageMode};
use noon_sta::sweep::ro_transfer_fidelity;
use noon_sta::TWO_PI;

#[test]
fn end_to_end_fidelities_hold_their_pinned_values() {
    let params = ProtocolParams::default();
    let opts = RunOptions::default();
    // frozen against an independent composite-space integration at the same
    // stage parameters
    for (topology, n, expected, duration) in [
        (Topology::Vtype, 1usize, 0.998258, 70.0),
        (Topology::Vtype, 2, 0.998256, 110.0),
        (Topology::Ladder, 1, 0.998259, 50.0),
        (Topology::Ladder, 2, 0.998258, 80.0),
    ] {
        let plan = plan_noon(topology, n, &params).unwrap();
        let result = run_protocol(&plan, &opts).unwrap();
        assert!(
            (result.fidelity - expected).abs() < 1e-5,
            "{topology} N={n}: fidelity {:.6} drifted from {expected}",
            result.fidelity
        );
        assert!((result.total_duration - duration).abs() < 1e-9);
        assert!(result.norm_drift < 1e-9);
    }
}

#[test]
fn inverse_stages_rewind_the_whole_protocol() {
    let params = ProtocolParams::default();
    let plan = plan_noon(Topology::Vtype, 2, &params).unwrap();
    let forward = run_protocol(&plan, &RunOptions::default()).unwrap();

    let opts = EvolveOptions {
        tol: 1e-10,
        ..EvolveOptions::default()
    };
    let mut psi = forward.final_state.clone();
    for stage in plan.stages.iter().rev() {
        psi = evolve(&stage.hamiltonian.inverse(), &psi, &opts)
            .unwrap()
            .final_state;
    }
    let mut overlap = noon_sta::C64::new(0.0, 0.0);
    for (a, b) in plan.initial.amplitudes.iter().zip(psi.amplitudes.iter()) {
        overlap += a.conj() * b;
    }
    let fid = overlap.norm_sqr();
    assert!(fid >= 1.0 - 1e-6, "round trip fidelity {fid:.12}");
}

#[test]
fn half_area_splitter_balances_the_arms() {
    // swap the detuned splitter for an ideal flat pi/2-area beam splitter;
    // the two arms must then load symmetrically
    let params = ProtocolParams::default();
    for (n, asym_tol) in [(1usize, 1e-5), (2, 1e-6)] {
        let mut plan = plan_noon(Topology::Vtype, n, &params).unwrap();
        let bell_window = plan.stages[1].hamiltonian.window();
        assert!(matches!(plan.stages[1].kind, StageKind::Exchange { .. }));
        let level = std::f64::consts::FRAC_PI_2 / bell_window.length();
        let flat = PulsePair::new(
            PulseShape::constant(level, bell_window),
            PulseShape::zero(bell_window),
        )
        .unwrap();
        let pulses = StagePulses::synthesize(flat).unwrap();
        plan.stages[1].hamiltonian = stage_qutrit_qutrit(
            &plan.basis,
            (noon_sta::hilbert::Level::G, noon_sta::hilbert::Level::A),
            &pulses,
            StageMode::Sta,
        )
        .unwrap();

        let result = run_protocol(&plan, &RunOptions::default()).unwrap();
        let pops = [
            result.final_state.amplitudes[plan.basis.index_of(0, 0, n, 0)].norm_sqr(),
            result.final_state.amplitudes[plan.basis.index_of(0, 0, 0, n)].norm_sqr(),
        ];
        let asym = (pops[0] - pops[1]).abs();
        assert!(asym < asym_tol, "N={n}: arm asymmetry {asym:.2e}");
        assert!(result.fidelity > 0.9999, "N={n}: fidelity {:.6}", result.fidelity);
    }
}

#[test]
fn stage_boundaries_stay_on_the_ideal_support() {
    let params = ProtocolParams::default();
    let plan = plan_noon(Topology::Vtype, 2, &params).unwrap();
    let result = run_protocol(&plan, &RunOptions::default()).unwrap();
    for record in &result.stage_records {
        let leak = 1.0 - record.support_population;
        assert!(
            leak < 1e-4,
            "stage '{}' leaks {leak:.2e} off its ideal support",
            record.label
        );
    }
}

#[test]
fn resonant_baseline_follows_the_area_formula() {
    let params = ProtocolParams::default();
    let plan = plan_noon(Topology::Vtype, 1, &params).unwrap();
    // final swap on qutrit 1: |a,g,0,0> -> |g,g,1,0> when run alone
    let swap_idx = plan
        .stages
        .iter()
        .position(|s| matches!(s.kind, StageKind::Swap { .. }))
        .unwrap();
    let stage = &plan.stages[swap_idx];
    let ro = baseline_mode(stage, &plan.basis, StageMode::Ro).unwrap();

    let psi0 = StateVector::basis_state(plan.basis, 2, 0, 0, 0);
    let opts = EvolveOptions {
        tol: 1e-10,
        ..EvolveOptions::default()
    };
    let run = evolve(&ro, &psi0, &opts).unwrap();
    let transferred = run.final_state.amplitudes[plan.basis.index_of(0, 0, 1, 0)].norm_sqr();

    let area = ae_area(
        params.swap.peak,
        params.swap.t_scale,
        params.swap.half_width(),
    );
    let predicted = ro_transfer_fidelity(area);
    assert!(
        (transferred - predicted).abs() < 1e-7,
        "simulated {transferred:.9} vs area formula {predicted:.9}"
    );
}

#[test]
fn uncorrected_baseline_needs_the_long_window() {
    // same chirped pulses without the correction: good when slow and
    // strongly coupled, poor when fast
    let mut slow = ProtocolParams::default();
    slow.swap.peak = TWO_PI * 0.160;
    slow.swap.t_scale = 4.0;
    slow.swap.window_factor = 4.0;
    let plan = plan_noon(Topology::Vtype, 1, &slow).unwrap();
    let swap_idx = plan
        .stages
        .iter()
        .position(|s| matches!(s.kind, StageKind::Swap { .. }))
        .unwrap();
    let app = baseline_mode(&plan.stages[swap_idx], &plan.basis, StageMode::App).unwrap();
    let psi0 = StateVector::basis_state(plan.basis, 2, 0, 0, 0);
    let opts = EvolveOptions {
        tol: 1e-10,
        ..EvolveOptions::default()
    };
    let pop_slow = evolve(&app, &psi0, &opts)
        .unwrap()
        .final_state
        .amplitudes[plan.basis.index_of(0, 0, 1, 0)]
    .norm_sqr();
    assert!(pop_slow >= 0.99, "slow passage only reached {pop_slow:.6}");

    let mut fast = ProtocolParams::default();
    fast.swap.t_scale = 0.5;
    fast.swap.window_factor = 4.0;
    let plan = plan_noon(Topology::Vtype, 1, &fast).unwrap();
    let app = baseline_mode(&plan.stages[swap_idx], &plan.basis, StageMode::App).unwrap();
    let pop_fast = evolve(&app, &psi0, &opts)
        .unwrap()
        .final_state
        .amplitudes[plan.basis.index_of(0, 0, 1, 0)]
    .norm_sqr();
    assert!(pop_fast < 0.9, "fast passage unexpectedly adiabatic: {pop_fast:.6}");
}

#[test]
fn plan_durations_scale_with_the_stage_table() {
    let params = ProtocolParams::default();
    for (topology, n, stages, duration) in [
        (Topology::Vtype, 1usize, 6usize, 70.0),
        (Topology::Vtype, 2, 10, 110.0),
        (Topology::Vtype, 3, 14, 150.0),
        (Topology::Ladder, 1, 4, 50.0),
        (Topology::Ladder, 2, 7, 80.0),
        (Topology::Ladder, 3, 10, 110.0),
    ] {
        let plan = plan_noon(topology, n, &params).unwrap();
        assert_eq!(plan.stages.len(), stages, "{topology} N={n} stage count");
        assert!((plan.total_duration - duration).abs() < 1e-9);
        assert_eq!(plan.basis.cutoff, n + 1);
    }
}
