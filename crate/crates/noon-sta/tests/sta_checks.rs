//! Cross checks between the synthesis layer and the dynamics: the rotated
//! single-pair stage must be indistinguishable from the explicitly corrected
//! one in populations, and every plausible sign variant must not be.

use std::sync::Arc;

use noon_sta::dynamics::{evolve, EvolveOptions};
use noon_sta::hilbert::{embed, qutrit_op, BasisSpec, Level, StateVector, Subsystem, Topology};
use noon_sta::pulse::{PulsePair, Schedule, Window};
use noon_sta::sta::{RealizableFrame, StagePulses};
use noon_sta::stage::{stage_qutrit_drive, QutritId, StageHamiltonian, StageMode};
use noon_sta::{C64, TWO_PI};

fn opts() -> EvolveOptions {
    EvolveOptions {
        tol: 1e-10,
        ..EvolveOptions::default()
    }
}

fn excite_pair() -> PulsePair {
    PulsePair::ae(TWO_PI * 0.060, TWO_PI * 0.080, 1.0, 4.0, 0.0)
}

fn lab_stage(basis: &BasisSpec, pair: &PulsePair) -> StageHamiltonian {
    let pulses = StagePulses::synthesize(pair.clone()).unwrap();
    stage_qutrit_drive(
        basis,
        QutritId::Q1,
        (Level::G, Level::A),
        &pulses,
        StageMode::StaLab,
    )
    .unwrap()
}

fn final_populations(stage: &StageHamiltonian, basis: &BasisSpec) -> Vec<f64> {
    let psi0 = StateVector::basis_state(*basis, 0, 0, 0, 0);
    let run = evolve(stage, &psi0, &opts()).unwrap();
    run.final_state
        .amplitudes
        .iter()
        .map(|a| a.norm_sqr())
        .collect()
}

/// Build a drive stage out of an arbitrary coupling/detuning schedule pair so
/// the test can plug in deliberately wrong frame combinations.
fn manual_stage(
    basis: &BasisSpec,
    window: Window,
    coupling: Arc<dyn Schedule>,
    detuning: Arc<dyn Schedule>,
) -> StageHamiltonian {
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let x = qutrit_op(
        &[(Level::A, Level::G, half), (Level::G, Level::A, half)],
        basis.topology,
    )
    .unwrap();
    let p = qutrit_op(&[(Level::A, Level::A, one)], basis.topology).unwrap();
    let terms: Vec<(Arc<dyn Schedule>, _)> = vec![
        (coupling, embed(&x, Subsystem::Qutrit1, basis).unwrap()),
        (detuning, embed(&p, Subsystem::Qutrit1, basis).unwrap()),
    ];
    StageHamiltonian::from_terms(*basis, window, "manual drive", terms).unwrap()
}

struct ShiftedDetuning {
    pair: PulsePair,
    frame: RealizableFrame,
    rate_factor: f64,
}

impl Schedule for ShiftedDetuning {
    fn value(&self, t: f64) -> f64 {
        self.pair.detuning.value(t) + self.rate_factor * self.frame.frame_angle_rate(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        let h = self.window().length() * 1e-6;
        (self.value(t + h) - self.value(t - h)) / (2.0 * h)
    }
    fn window(&self) -> Window {
        self.pair.window()
    }
}

#[test]
fn rotated_detuning_needs_the_full_angle_rate() {
    let basis = BasisSpec::new(Topology::Vtype, 1);
    let pair = excite_pair();
    let reference = final_populations(&lab_stage(&basis, &pair), &basis);

    // candidate detunings: detuning + factor * angle rate
    for (factor, should_match) in [
        (1.0, true),
        (-1.0, false),
        (0.5, false),
        (-0.5, false),
        (0.0, false),
    ] {
        let frame = RealizableFrame::synthesize(pair.clone()).unwrap();
        let coupling = Arc::new(frame.rotated_coupling());
        let detuning = Arc::new(ShiftedDetuning {
            pair: pair.clone(),
            frame: frame.clone(),
            rate_factor: factor,
        });
        let stage = manual_stage(&basis, pair.window(), coupling, detuning);
        let pops = final_populations(&stage, &basis);
        let worst: f64 = reference
            .iter()
            .zip(pops.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if should_match {
            assert!(worst < 1e-8, "factor {factor}: mismatch {worst:.2e}");
        } else {
            assert!(worst > 1e-4, "factor {factor}: unexpectedly matched ({worst:.2e})");
        }
    }
}

#[test]
fn correction_sign_flip_spoils_the_transfer() {
    let basis = BasisSpec::new(Topology::Vtype, 1);
    let pair = excite_pair();
    let pulses = StagePulses::synthesize(pair.clone()).unwrap();
    let target = basis.index_of(2, 0, 0, 0);
    let psi0 = StateVector::basis_state(basis, 0, 0, 0, 0);

    let good = stage_qutrit_drive(
        &basis,
        QutritId::Q1,
        (Level::G, Level::A),
        &pulses,
        StageMode::StaLab,
    )
    .unwrap();
    let pop_good = evolve(&good, &psi0, &opts()).unwrap().final_state.amplitudes[target].norm_sqr();

    // negated correction: same magnitude on the Y quadrature, wrong sign
    let one = C64::new(1.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    let x = qutrit_op(
        &[(Level::A, Level::G, half), (Level::G, Level::A, half)],
        basis.topology,
    )
    .unwrap();
    let y = qutrit_op(
        &[(Level::A, Level::G, i * half), (Level::G, Level::A, -i * half)],
        basis.topology,
    )
    .unwrap();
    let p = qutrit_op(&[(Level::A, Level::A, one)], basis.topology).unwrap();
    let cd = pulses.cd.to_tabulated(4097);
    let terms: Vec<(Arc<dyn Schedule>, _)> = vec![
        (
            Arc::new(pair.coupling.clone()),
            embed(&x, Subsystem::Qutrit1, &basis).unwrap(),
        ),
        (
            Arc::new(cd.scaled(-1.0)),
            embed(&y, Subsystem::Qutrit1, &basis).unwrap(),
        ),
        (
            Arc::new(pair.detuning.clone()),
            embed(&p, Subsystem::Qutrit1, &basis).unwrap(),
        ),
    ];
    let flipped =
        StageHamiltonian::from_terms(basis, pair.window(), "flipped correction", terms).unwrap();
    let pop_flipped =
        evolve(&flipped, &psi0, &opts()).unwrap().final_state.amplitudes[target].norm_sqr();

    assert!(pop_good > 0.9999, "corrected transfer {pop_good:.6}");
    assert!(
        pop_good - pop_flipped > 1e-3,
        "sign flip went unnoticed: {pop_good:.6} vs {pop_flipped:.6}"
    );
}

#[test]
fn rotated_magnitude_never_undershoots_the_coupling() {
    let pair = excite_pair();
    let frame = RealizableFrame::synthesize(pair.clone()).unwrap();
    let rc = frame.rotated_coupling();
    for t in pair.window().grid(801) {
        let r = rc.value(t);
        let c = pair.coupling.value(t).abs();
        assert!(r >= c - 1e-12, "R {r} below coupling {c} at t = {t}");
    }
}

#[test]
fn frame_angle_rate_is_odd_and_quiets_at_the_edges() {
    // even coupling and even correction make the angle even in time, so its
    // rate is odd and nearly gone where the pulses have decayed
    let pair = excite_pair();
    let frame = RealizableFrame::synthesize(pair).unwrap();
    let window = frame.window();
    let mut peak = 0.0f64;
    for t in window.grid(801) {
        let fwd = frame.frame_angle_rate(t);
        let bwd = frame.frame_angle_rate(window.start + window.end - t);
        assert!((fwd + bwd).abs() < 1e-9 * fwd.abs().max(1.0), "not odd at t = {t}");
        peak = peak.max(fwd.abs());
    }
    let edge_rate = frame
        .frame_angle_rate(window.start)
        .abs()
        .max(frame.frame_angle_rate(window.end).abs());
    assert!(edge_rate < 0.05 * peak, "edge {edge_rate}, peak {peak}");
}
