//! Full NOON(N) generation plans.
//!
//! Both registers follow the same skeleton: put one excitation on qutrit 1,
//! split it across the pair with a partial exchange sweep, then repeatedly
//! park the moving excitation in the matching cavity, one photon per round
//! and one rung at a time. The branch that is not being pumped sits in a
//! state the active drive cannot touch, which is what makes the two arms
//! grow independently.
//!
//! V register, flag level a:
//!   excite g-a on q1; split on the a-exchange; each round drives g-e on both
//!   qutrits and swaps e down into the cavity; a final g-a flip moves the
//!   branch flag out of the way before the flag excitation itself is swapped
//!   in as the top photon. 4N + 2 stages.
//!
//! Ladder register:
//!   excite g-e on q1; split on the e-exchange; each round lifts e-f on both
//!   qutrits simultaneously and swaps f back down to e against a photon; the
//!   last photon comes from swapping e-g directly. 3N + 1 stages.

use crate::dynamics::{evolve, EvolveOptions};
use crate::hilbert::{build_basis, fidelity_up_to_phase, BasisSpec, Level, StateVector, Topology};
use crate::pulse::PulsePair;
use crate::stage::{
    stage_qutrit_drive, stage_qutrit_qutrit, stage_swap, CavityId, QutritId, StageHamiltonian,
    StageMode,
};
use crate::sta::StagePulses;
use crate::{Error, Result, C64, TWO_PI};

/// sech/tanh sweep parameters for one stage family. The window spans
/// `window_factor * t_scale` on each side of the sweep center.
#[derive(Clone, Copy, Debug)]
pub struct AeStageParams {
    pub peak: f64,
    pub beta: f64,
    pub t_scale: f64,
    pub window_factor: f64,
}

impl AeStageParams {
    pub fn half_width(&self) -> f64 {
        self.window_factor * self.t_scale
    }
    pub fn duration(&self) -> f64 {
        2.0 * self.half_width()
    }
    fn pair_at(&self, start: f64) -> PulsePair {
        PulsePair::ae(
            self.peak,
            self.beta,
            self.t_scale,
            self.half_width(),
            start + self.half_width(),
        )
    }
}

/// Offset-Gaussian splitter parameters.
#[derive(Clone, Copy, Debug)]
pub struct BellParams {
    pub g0: f64,
    pub t0: f64,
    pub tau: f64,
    pub d0: f64,
    pub m: f64,
    pub half_width: f64,
}

impl BellParams {
    pub fn duration(&self) -> f64 {
        2.0 * self.half_width
    }
    fn pair_at(&self, start: f64) -> PulsePair {
        PulsePair::bell(
            self.g0,
            self.t0,
            self.tau,
            self.d0,
            self.m,
            self.half_width,
            start + self.half_width,
        )
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolParams {
    pub excite: AeStageParams,
    pub swap: AeStageParams,
    pub bell: BellParams,
    /// Rescale each swap correction by the sqrt(rung+1) ladder factor.
    pub rung_rescale: bool,
    /// Realization used for every sweep stage.
    pub mode: StageMode,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            excite: AeStageParams {
                peak: TWO_PI * 0.060,
                beta: TWO_PI * 0.080,
                t_scale: 1.0,
                window_factor: 5.0,
            },
            swap: AeStageParams {
                peak: TWO_PI * 0.090,
                beta: TWO_PI * 0.100,
                t_scale: 1.0,
                window_factor: 5.0,
            },
            bell: BellParams {
                g0: TWO_PI * 0.010,
                t0: 5.0,
                tau: 4.0,
                d0: TWO_PI * 0.030,
                m: 1.25,
                half_width: 10.0,
            },
            rung_rescale: true,
            mode: StageMode::Sta,
        }
    }
}

/// What a protocol stage does, with enough detail to rebuild it in another
/// realization mode.
#[derive(Clone)]
pub enum StageKind {
    Drive {
        target: QutritId,
        levels: (Level, Level),
        pulses: StagePulses,
    },
    /// e-f lift applied to both qutrits in the same window.
    MergedDrive {
        levels: (Level, Level),
        pulses: StagePulses,
    },
    Exchange {
        levels: (Level, Level),
        pulses: StagePulses,
    },
    Swap {
        target: QutritId,
        cavity: CavityId,
        levels: (Level, Level),
        pair: PulsePair,
        rung: usize,
        rescale: bool,
    },
}

pub struct ProtocolStage {
    pub label: String,
    pub hamiltonian: StageHamiltonian,
    pub kind: StageKind,
    /// Basis indices the ideal protocol occupies right after this stage.
    pub ideal_support: Vec<usize>,
}

pub struct ProtocolPlan {
    pub topology: Topology,
    pub n: usize,
    pub basis: BasisSpec,
    pub stages: Vec<ProtocolStage>,
    pub initial: StateVector,
    pub target: StateVector,
    /// Indices of the second superposition branch, over which the final
    /// fidelity is phase-insensitive.
    pub phase_subspace: Vec<usize>,
    pub total_duration: f64,
}

/// (|N,0> + |0,N>)/sqrt(2) on both cavities with both qutrits parked in g,
/// plus the index set of the second branch.
pub fn noon_target(basis: BasisSpec, n: usize) -> (StateVector, Vec<usize>) {
    let mut target = StateVector::zero(basis);
    if n == 0 {
        target.amplitudes[basis.index_of(0, 0, 0, 0)] = C64::new(1.0, 0.0);
        return (target, vec![]);
    }
    let left = basis.index_of(0, 0, n, 0);
    let right = basis.index_of(0, 0, 0, n);
    let s = C64::new(0.5f64.sqrt(), 0.0);
    target.amplitudes[left] = s;
    target.amplitudes[right] = s;
    (target, vec![right])
}

type Config = (usize, usize, usize, usize);

fn map_drive(configs: &[Config], target: QutritId, lo: usize, hi: usize) -> Vec<Config> {
    let mut out: Vec<Config> = configs
        .iter()
        .map(|&(q1, q2, na, nb)| {
            let flip = |q: usize| {
                if q == lo {
                    hi
                } else if q == hi {
                    lo
                } else {
                    q
                }
            };
            match target {
                QutritId::Q1 => (flip(q1), q2, na, nb),
                QutritId::Q2 => (q1, flip(q2), na, nb),
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn map_exchange(configs: &[Config], lo: usize, hi: usize) -> Vec<Config> {
    let mut out = Vec::new();
    for &(q1, q2, na, nb) in configs {
        if (q1 == hi && q2 == lo) || (q1 == lo && q2 == hi) {
            out.push((hi, lo, na, nb));
            out.push((lo, hi, na, nb));
        } else {
            out.push((q1, q2, na, nb));
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn map_swap(
    configs: &[Config],
    target: QutritId,
    cavity: CavityId,
    lo: usize,
    hi: usize,
    rung: usize,
) -> Vec<Config> {
    let mut out: Vec<Config> = configs
        .iter()
        .map(|&(q1, q2, na, nb)| {
            let (q, n) = match (target, cavity) {
                (QutritId::Q1, CavityId::A) => (q1, na),
                (QutritId::Q1, CavityId::B) => (q1, nb),
                (QutritId::Q2, CavityId::A) => (q2, na),
                (QutritId::Q2, CavityId::B) => (q2, nb),
            };
            let (q_new, n_new) = if q == hi && n == rung {
                (lo, rung + 1)
            } else if q == lo && n == rung + 1 {
                (hi, rung)
            } else {
                (q, n)
            };
            match (target, cavity) {
                (QutritId::Q1, CavityId::A) => (q_new, q2, n_new, nb),
                (QutritId::Q1, CavityId::B) => (q_new, q2, na, n_new),
                (QutritId::Q2, CavityId::A) => (q1, q_new, n_new, nb),
                (QutritId::Q2, CavityId::B) => (q1, q_new, na, n_new),
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

struct PlanBuilder {
    basis: BasisSpec,
    params: ProtocolParams,
    stages: Vec<ProtocolStage>,
    cursor: f64,
    support: Vec<Config>,
}

impl PlanBuilder {
    fn support_indices(&self) -> Vec<usize> {
        self.support
            .iter()
            .map(|&(q1, q2, na, nb)| self.basis.index_of(q1, q2, na, nb))
            .collect()
    }

    fn push_drive(&mut self, target: QutritId, levels: (Level, Level)) -> Result<()> {
        let pair = self.params.excite.pair_at(self.cursor);
        let pulses = StagePulses::synthesize(pair)?;
        let h = stage_qutrit_drive(&self.basis, target, levels, &pulses, self.params.mode)?;
        self.cursor = h.window().end;
        let lo = levels.0.index(self.basis.topology)?;
        let hi = levels.1.index(self.basis.topology)?;
        self.support = map_drive(&self.support, target, lo, hi);
        self.stages.push(ProtocolStage {
            label: h.label().to_string(),
            hamiltonian: h,
            kind: StageKind::Drive {
                target,
                levels,
                pulses,
            },
            ideal_support: self.support_indices(),
        });
        Ok(())
    }

    fn push_merged_drive(&mut self, levels: (Level, Level)) -> Result<()> {
        let pair = self.params.excite.pair_at(self.cursor);
        let pulses = StagePulses::synthesize(pair)?;
        let h1 = stage_qutrit_drive(&self.basis, QutritId::Q1, levels, &pulses, self.params.mode)?;
        let h2 = stage_qutrit_drive(&self.basis, QutritId::Q2, levels, &pulses, self.params.mode)?;
        let label = format!(
            "drive both {}-{}",
            levels.0.label(),
            levels.1.label()
        );
        let h = h1.merged_with(h2, label.clone())?;
        self.cursor = h.window().end;
        let lo = levels.0.index(self.basis.topology)?;
        let hi = levels.1.index(self.basis.topology)?;
        self.support = map_drive(&self.support, QutritId::Q1, lo, hi);
        self.support = map_drive(&self.support, QutritId::Q2, lo, hi);
        self.stages.push(ProtocolStage {
            label,
            hamiltonian: h,
            kind: StageKind::MergedDrive { levels, pulses },
            ideal_support: self.support_indices(),
        });
        Ok(())
    }

    fn push_exchange(&mut self, levels: (Level, Level)) -> Result<()> {
        let pair = self.params.bell.pair_at(self.cursor);
        let pulses = StagePulses::synthesize(pair)?;
        let h = stage_qutrit_qutrit(&self.basis, levels, &pulses, self.params.mode)?;
        self.cursor = h.window().end;
        let lo = levels.0.index(self.basis.topology)?;
        let hi = levels.1.index(self.basis.topology)?;
        self.support = map_exchange(&self.support, lo, hi);
        self.stages.push(ProtocolStage {
            label: h.label().to_string(),
            hamiltonian: h,
            kind: StageKind::Exchange { levels, pulses },
            ideal_support: self.support_indices(),
        });
        Ok(())
    }

    fn push_swap(
        &mut self,
        target: QutritId,
        cavity: CavityId,
        levels: (Level, Level),
        rung: usize,
    ) -> Result<()> {
        let pair = self.params.swap.pair_at(self.cursor);
        let h = stage_swap(
            &self.basis,
            target,
            cavity,
            levels,
            &pair,
            rung,
            self.params.rung_rescale,
            self.params.mode,
        )?;
        self.cursor = h.window().end;
        let lo = levels.0.index(self.basis.topology)?;
        let hi = levels.1.index(self.basis.topology)?;
        self.support = map_swap(&self.support, target, cavity, lo, hi, rung);
        self.stages.push(ProtocolStage {
            label: h.label().to_string(),
            hamiltonian: h,
            kind: StageKind::Swap {
                target,
                cavity,
                levels,
                pair,
                rung,
                rescale: self.params.rung_rescale,
            },
            ideal_support: self.support_indices(),
        });
        Ok(())
    }
}

/// Build the stage sequence generating NOON(n) on the chosen register.
pub fn plan_noon(topology: Topology, n: usize, params: &ProtocolParams) -> Result<ProtocolPlan> {
    // one photon level of headroom above the target so truncation artifacts
    // are observable instead of silently projected away
    let cutoff = n + 1;
    let basis = build_basis(cutoff, topology);
    let initial = StateVector::basis_state(basis, 0, 0, 0, 0);
    let (target, phase_subspace) = noon_target(basis, n);

    let mut b = PlanBuilder {
        basis,
        params: params.clone(),
        stages: Vec::new(),
        cursor: 0.0,
        support: vec![(0, 0, 0, 0)],
    };

    if n > 0 {
        match topology {
            Topology::Vtype => {
                b.push_drive(QutritId::Q1, (Level::G, Level::A))?;
                b.push_exchange((Level::G, Level::A))?;
                for rung in 0..n - 1 {
                    b.push_drive(QutritId::Q1, (Level::G, Level::E))?;
                    b.push_drive(QutritId::Q2, (Level::G, Level::E))?;
                    b.push_swap(QutritId::Q1, CavityId::A, (Level::G, Level::E), rung)?;
                    b.push_swap(QutritId::Q2, CavityId::B, (Level::G, Level::E), rung)?;
                }
                b.push_drive(QutritId::Q1, (Level::G, Level::A))?;
                b.push_drive(QutritId::Q2, (Level::G, Level::A))?;
                b.push_swap(QutritId::Q1, CavityId::A, (Level::G, Level::A), n - 1)?;
                b.push_swap(QutritId::Q2, CavityId::B, (Level::G, Level::A), n - 1)?;
            }
            Topology::Ladder => {
                b.push_drive(QutritId::Q1, (Level::G, Level::E))?;
                b.push_exchange((Level::G, Level::E))?;
                for rung in 0..n - 1 {
                    b.push_merged_drive((Level::E, Level::F))?;
                    b.push_swap(QutritId::Q1, CavityId::A, (Level::E, Level::F), rung)?;
                    b.push_swap(QutritId::Q2, CavityId::B, (Level::E, Level::F), rung)?;
                }
                b.push_swap(QutritId::Q1, CavityId::A, (Level::G, Level::E), n - 1)?;
                b.push_swap(QutritId::Q2, CavityId::B, (Level::G, Level::E), n - 1)?;
            }
        }
    }

    // the symbolic propagation must land exactly on the target support
    let expected: Vec<usize> = if n == 0 {
        vec![basis.index_of(0, 0, 0, 0)]
    } else {
        let mut v = vec![basis.index_of(0, 0, n, 0), basis.index_of(0, 0, 0, n)];
        v.sort_unstable();
        v
    };
    let landed = if n == 0 {
        vec![basis.index_of(0, 0, 0, 0)]
    } else {
        b.stages
            .last()
            .map(|s| s.ideal_support.clone())
            .unwrap_or_default()
    };
    if landed != expected {
        return Err(Error::IntegrationFailure(format!(
            "plan bookkeeping landed on {landed:?} instead of {expected:?}"
        )));
    }

    Ok(ProtocolPlan {
        topology,
        n,
        basis,
        stages: b.stages,
        initial,
        target,
        phase_subspace,
        total_duration: b.cursor,
    })
}

/// Rebuild one protocol stage in a different realization mode, pulses and
/// window unchanged.
pub fn baseline_mode(stage: &ProtocolStage, basis: &BasisSpec, mode: StageMode) -> Result<StageHamiltonian> {
    match &stage.kind {
        StageKind::Drive {
            target,
            levels,
            pulses,
        } => stage_qutrit_drive(basis, *target, *levels, pulses, mode),
        StageKind::MergedDrive { levels, pulses } => {
            let h1 = stage_qutrit_drive(basis, QutritId::Q1, *levels, pulses, mode)?;
            let h2 = stage_qutrit_drive(basis, QutritId::Q2, *levels, pulses, mode)?;
            h1.merged_with(h2, stage.label.clone())
        }
        StageKind::Exchange { levels, pulses } => {
            stage_qutrit_qutrit(basis, *levels, pulses, mode)
        }
        StageKind::Swap {
            target,
            cavity,
            levels,
            pair,
            rung,
            rescale,
        } => stage_swap(basis, *target, *cavity, *levels, pair, *rung, *rescale, mode),
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub tol: f64,
    pub sample_spacing: Option<f64>,
    pub top_fock_guard: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol: 1e-10,
            sample_spacing: None,
            top_fock_guard: Some(1e-8),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageRecord {
    pub label: String,
    pub start: f64,
    pub end: f64,
    /// population inside the ideal support set right after the stage
    pub support_population: f64,
    pub norm_drift: f64,
}

pub struct ProtocolResult {
    pub final_state: StateVector,
    pub fidelity: f64,
    pub optimal_phase: f64,
    pub total_duration: f64,
    pub stage_records: Vec<StageRecord>,
    pub norm_drift: f64,
    pub sample_times: Vec<f64>,
    pub sample_states: Vec<ndarray::Array1<C64>>,
}

/// Integrate the plan end to end.
pub fn run_protocol(plan: &ProtocolPlan, opts: &RunOptions) -> Result<ProtocolResult> {
    let mut psi = plan.initial.clone();
    let mut records = Vec::with_capacity(plan.stages.len());
    let mut drift = 0.0f64;
    let mut sample_times = Vec::new();
    let mut sample_states = Vec::new();

    for (si, stage) in plan.stages.iter().enumerate() {
        let eopts = EvolveOptions {
            tol: opts.tol,
            sample_spacing: opts.sample_spacing,
            top_fock_guard: opts.top_fock_guard,
            ..EvolveOptions::default()
        };
        let out = evolve(&stage.hamiltonian, &psi, &eopts)?;
        drift = drift.max(out.norm_drift);

        let support_population: f64 = stage
            .ideal_support
            .iter()
            .map(|&i| out.final_state.amplitudes[i].norm_sqr())
            .sum();
        records.push(StageRecord {
            label: stage.label.clone(),
            start: stage.hamiltonian.window().start,
            end: stage.hamiltonian.window().end,
            support_population,
            norm_drift: out.norm_drift,
        });

        let skip = if si > 0 && !out.sample_times.is_empty() {
            1
        } else {
            0
        };
        sample_times.extend(out.sample_times.into_iter().skip(skip));
        sample_states.extend(out.sample_states.into_iter().skip(skip));

        psi = out.final_state;
    }

    let (fidelity, optimal_phase) =
        fidelity_up_to_phase(&psi, &plan.target, &plan.phase_subspace)?;
    Ok(ProtocolResult {
        final_state: psi,
        fidelity,
        optimal_phase,
        total_duration: plan.total_duration,
        stage_records: records,
        norm_drift: drift,
        sample_times,
        sample_states,
    })
}
