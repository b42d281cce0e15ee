//! Stage Hamiltonians: time-dependent operators H(t) = sum_k c_k(t) M_k on
//! the composite space, with every coefficient a real schedule and every M_k
//! Hermitian. Keeping the terms separated (instead of assembling a matrix per
//! evaluation) makes the right-hand side of the integrator cheap and makes
//! stage inversion exact: negating and time-mirroring each coefficient yields
//! the inverse propagator of the original stage.

use std::sync::Arc;

use ndarray::Array2;

use crate::hilbert::{
    annihilation, embed, qutrit_op, BasisSpec, Level, OperatorMatrix, Subsystem, Topology,
};
use crate::pulse::{PulsePair, PulseShape, Schedule, Window};
use crate::sta::StagePulses;
use crate::{C64, Error, Result};

/// How a stage realizes its sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageMode {
    /// Rotated single-quadrature realization of the corrected sweep.
    Sta,
    /// Corrected sweep kept in the lab frame: bare pulses plus an explicit
    /// Y-quadrature correction drive.
    StaLab,
    /// Bare adiabatic passage: same pulses, correction removed.
    App,
    /// Resonant operation: coupling only, detuning dropped.
    Ro,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QutritId {
    Q1,
    Q2,
}

impl QutritId {
    fn subsystem(self) -> Subsystem {
        match self {
            QutritId::Q1 => Subsystem::Qutrit1,
            QutritId::Q2 => Subsystem::Qutrit2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CavityId {
    A,
    B,
}

impl CavityId {
    fn subsystem(self) -> Subsystem {
        match self {
            CavityId::A => Subsystem::CavityA,
            CavityId::B => Subsystem::CavityB,
        }
    }
}

struct Term {
    coeff: Arc<dyn Schedule>,
    op: OperatorMatrix,
    norm_inf: f64,
}

pub struct StageHamiltonian {
    basis: BasisSpec,
    window: Window,
    label: String,
    terms: Vec<Term>,
}

impl StageHamiltonian {
    /// Assemble from explicit (coefficient, operator) pairs. Every operator
    /// must be Hermitian so that real coefficients keep H(t) Hermitian.
    pub fn from_terms(
        basis: BasisSpec,
        window: Window,
        label: impl Into<String>,
        terms: Vec<(Arc<dyn Schedule>, OperatorMatrix)>,
    ) -> Result<StageHamiltonian> {
        let mut built = Vec::with_capacity(terms.len());
        for (coeff, op) in terms {
            if op.basis != basis {
                return Err(Error::BasisMismatch(
                    "stage term operator built on a different basis".into(),
                ));
            }
            if !op.is_hermitian(1e-12) {
                return Err(Error::InvalidArgument(
                    "stage term operator must be Hermitian".into(),
                ));
            }
            let norm_inf = inf_norm(&op.matrix);
            built.push(Term {
                coeff,
                op,
                norm_inf,
            });
        }
        Ok(StageHamiltonian {
            basis,
            window,
            label: label.into(),
            terms: built,
        })
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Dense H(t).
    pub fn assemble(&self, t: f64) -> OperatorMatrix {
        let mut out = OperatorMatrix::zero(self.basis);
        for term in &self.terms {
            let c = term.coeff.value(t);
            if c != 0.0 {
                out.matrix.scaled_add(C64::new(c, 0.0), &term.op.matrix);
            }
        }
        out
    }

    /// out += scale * H(t) * psi
    pub fn apply_scaled(
        &self,
        t: f64,
        scale: C64,
        psi: &ndarray::Array1<C64>,
        out: &mut ndarray::Array1<C64>,
    ) {
        for term in &self.terms {
            let c = term.coeff.value(t);
            if c != 0.0 {
                term.op.accumulate_apply(scale * c, psi, out);
            }
        }
    }

    /// Cheap upper bound on the operator norm at time t, for step sizing.
    pub fn norm_bound(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coeff.value(t).abs() * term.norm_inf)
            .sum()
    }

    /// The stage that exactly undoes this one: every coefficient is negated
    /// and reflected about the window midpoint, so the propagator composes
    /// with the original to the identity.
    pub fn inverse(&self) -> StageHamiltonian {
        let pivot = self.window.start + self.window.end;
        let terms = self
            .terms
            .iter()
            .map(|term| Term {
                coeff: Arc::new(NegatedMirror {
                    inner: term.coeff.clone(),
                    pivot,
                    window: self.window,
                }) as Arc<dyn Schedule>,
                op: term.op.clone(),
                norm_inf: term.norm_inf,
            })
            .collect();
        StageHamiltonian {
            basis: self.basis,
            window: self.window,
            label: format!("{} (undo)", self.label),
            terms,
        }
    }

    /// Combine two stages that share basis and window into one Hamiltonian
    /// applying both drives at once.
    pub fn merged_with(
        mut self,
        other: StageHamiltonian,
        label: impl Into<String>,
    ) -> Result<StageHamiltonian> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(
                "merged stages must share a basis".into(),
            ));
        }
        if self.window != other.window {
            return Err(Error::InvalidArgument(
                "merged stages must share a window".into(),
            ));
        }
        self.terms.extend(other.terms);
        self.label = label.into();
        Ok(self)
    }

    /// Same physics on a shifted time axis.
    pub fn shifted(&self, offset: f64) -> StageHamiltonian {
        let window = Window::new(self.window.start + offset, self.window.end + offset);
        let terms = self
            .terms
            .iter()
            .map(|term| Term {
                coeff: Arc::new(ShiftedSchedule {
                    inner: term.coeff.clone(),
                    offset,
                    window,
                }) as Arc<dyn Schedule>,
                op: term.op.clone(),
                norm_inf: term.norm_inf,
            })
            .collect();
        StageHamiltonian {
            basis: self.basis,
            window,
            label: self.label.clone(),
            terms,
        }
    }
}

fn inf_norm(m: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        let s: f64 = m.row(i).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

struct NegatedMirror {
    inner: Arc<dyn Schedule>,
    pivot: f64,
    window: Window,
}

impl Schedule for NegatedMirror {
    fn value(&self, t: f64) -> f64 {
        -self.inner.value(self.pivot - t)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.inner.derivative(self.pivot - t)
    }
    fn window(&self) -> Window {
        self.window
    }
}

struct ShiftedSchedule {
    inner: Arc<dyn Schedule>,
    offset: f64,
    window: Window,
}

impl Schedule for ShiftedSchedule {
    fn value(&self, t: f64) -> f64 {
        self.inner.value(t - self.offset)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.inner.derivative(t - self.offset)
    }
    fn window(&self) -> Window {
        self.window
    }
}

struct ScaledSchedule {
    inner: Arc<dyn Schedule>,
    factor: f64,
}

impl Schedule for ScaledSchedule {
    fn value(&self, t: f64) -> f64 {
        self.factor * self.inner.value(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.factor * self.inner.derivative(t)
    }
    fn window(&self) -> Window {
        self.inner.window()
    }
}

fn transition_allowed(topology: Topology, lo: Level, hi: Level) -> Result<()> {
    lo.index(topology)?;
    hi.index(topology)?;
    let ok = match topology {
        Topology::Vtype => matches!(
            (lo, hi),
            (Level::G, Level::E) | (Level::G, Level::A)
        ),
        Topology::Ladder => matches!(
            (lo, hi),
            (Level::G, Level::E) | (Level::E, Level::F)
        ),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "transition {}-{} is not driven on the {} register",
            lo.label(),
            hi.label(),
            topology
        )))
    }
}

/// X, Y and projector operators for a driven transition on one qutrit.
fn drive_ops(
    basis: &BasisSpec,
    target: QutritId,
    lo: Level,
    hi: Level,
) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let half = C64::new(0.5, 0.0);
    let x = qutrit_op(
        &[(hi, lo, half), (lo, hi, half)],
        basis.topology,
    )?;
    let y = qutrit_op(
        &[(hi, lo, i * half), (lo, hi, -i * half)],
        basis.topology,
    )?;
    let p = qutrit_op(&[(hi, hi, one)], basis.topology)?;
    Ok((
        embed(&x, target.subsystem(), basis)?,
        embed(&y, target.subsystem(), basis)?,
        embed(&p, target.subsystem(), basis)?,
    ))
}

/// Assemble the mode-dependent term list shared by every stage family.
fn sweep_terms(
    pulses: &StagePulses,
    mode: StageMode,
    coupling_scale: f64,
    x_op: OperatorMatrix,
    y_op: OperatorMatrix,
    p_op: OperatorMatrix,
) -> Vec<(Arc<dyn Schedule>, OperatorMatrix)> {
    let scale = |s: Arc<dyn Schedule>| -> Arc<dyn Schedule> {
        if coupling_scale == 1.0 {
            s
        } else {
            Arc::new(ScaledSchedule {
                inner: s,
                factor: coupling_scale,
            })
        }
    };
    match mode {
        StageMode::Sta => vec![
            (
                scale(Arc::new(pulses.frame.rotated_coupling()) as Arc<dyn Schedule>),
                x_op,
            ),
            (
                Arc::new(pulses.frame.rotated_detuning()) as Arc<dyn Schedule>,
                p_op,
            ),
        ],
        StageMode::StaLab => vec![
            (
                scale(Arc::new(pulses.pair.coupling.clone()) as Arc<dyn Schedule>),
                x_op,
            ),
            (
                scale(Arc::new(pulses.cd.clone()) as Arc<dyn Schedule>),
                y_op,
            ),
            (
                Arc::new(pulses.pair.detuning.clone()) as Arc<dyn Schedule>,
                p_op,
            ),
        ],
        StageMode::App => vec![
            (
                scale(Arc::new(pulses.pair.coupling.clone()) as Arc<dyn Schedule>),
                x_op,
            ),
            (
                Arc::new(pulses.pair.detuning.clone()) as Arc<dyn Schedule>,
                p_op,
            ),
        ],
        StageMode::Ro => vec![(
            scale(Arc::new(pulses.pair.coupling.clone()) as Arc<dyn Schedule>),
            x_op,
        )],
    }
}

/// Single-qutrit transfer lo -> hi.
///
/// H(t) = (1/2) [ W(t) (|hi><lo| + h.c.) + 2 D(t) |hi><hi| ] with (W, D) the
/// mode-dependent coupling/detuning realization of the synthesized pulses.
pub fn stage_qutrit_drive(
    basis: &BasisSpec,
    target: QutritId,
    levels: (Level, Level),
    pulses: &StagePulses,
    mode: StageMode,
) -> Result<StageHamiltonian> {
    let (lo, hi) = levels;
    transition_allowed(basis.topology, lo, hi)?;
    let (x_op, y_op, p_op) = drive_ops(basis, target, lo, hi)?;
    let terms = sweep_terms(pulses, mode, 1.0, x_op, y_op, p_op);
    let q = match target {
        QutritId::Q1 => 1,
        QutritId::Q2 => 2,
    };
    StageHamiltonian::from_terms(
        *basis,
        pulses.pair.window(),
        format!("drive q{q} {}-{}", lo.label(), hi.label()),
        terms,
    )
}

/// Excitation exchange |hi, lo> <-> |lo, hi> between the two qutrits, with
/// the sweep detuning carried by the swapped configuration.
pub fn stage_qutrit_qutrit(
    basis: &BasisSpec,
    levels: (Level, Level),
    pulses: &StagePulses,
    mode: StageMode,
) -> Result<StageHamiltonian> {
    let (lo, hi) = levels;
    if lo == hi {
        return Err(Error::InvalidArgument(
            "exchange levels must be distinct".into(),
        ));
    }
    let one = C64::new(1.0, 0.0);
    let hi1 = embed(
        &qutrit_op(&[(hi, lo, one)], basis.topology)?,
        Subsystem::Qutrit1,
        basis,
    )?;
    let lo2 = embed(
        &qutrit_op(&[(lo, hi, one)], basis.topology)?,
        Subsystem::Qutrit2,
        basis,
    )?;
    // |hi,lo><lo,hi| on the qutrit pair, identity on both cavities
    let lowering = OperatorMatrix {
        basis: *basis,
        matrix: hi1.matrix.dot(&lo2.matrix),
    };
    let raising = OperatorMatrix {
        basis: *basis,
        matrix: lowering.matrix.t().mapv(|z| z.conj()),
    };
    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    let x_op = OperatorMatrix {
        basis: *basis,
        matrix: (&lowering.matrix + &raising.matrix).mapv(|z| z * half),
    };
    let y_op = OperatorMatrix {
        basis: *basis,
        matrix: (&raising.matrix.mapv(|z| z * i) - &lowering.matrix.mapv(|z| z * i))
            .mapv(|z| z * half),
    };
    let p1 = embed(
        &qutrit_op(&[(lo, lo, one)], basis.topology)?,
        Subsystem::Qutrit1,
        basis,
    )?;
    let p2 = embed(
        &qutrit_op(&[(hi, hi, one)], basis.topology)?,
        Subsystem::Qutrit2,
        basis,
    )?;
    let p_op = OperatorMatrix {
        basis: *basis,
        matrix: p1.matrix.dot(&p2.matrix),
    };
    let terms = sweep_terms(pulses, mode, 1.0, x_op, y_op, p_op);
    StageHamiltonian::from_terms(
        *basis,
        pulses.pair.window(),
        format!("exchange {}{}", hi.label(), lo.label()),
        terms,
    )
}

/// Qutrit-cavity photon swap |hi, n> <-> |lo, n+1> aimed at rung `rung`.
///
/// The cavity ladder carries sqrt(n+1) matrix elements, so the correction is
/// synthesized against the effective coupling of the targeted rung and the
/// applied waveform is divided back by that factor. `rescale` keeps that
/// behavior switchable for sensitivity studies.
pub fn stage_swap(
    basis: &BasisSpec,
    target: QutritId,
    cavity: CavityId,
    levels: (Level, Level),
    pair: &PulsePair,
    rung: usize,
    rescale: bool,
    mode: StageMode,
) -> Result<StageHamiltonian> {
    let (lo, hi) = levels;
    transition_allowed(basis.topology, lo, hi)?;
    if rung + 1 > basis.cutoff {
        return Err(Error::InvalidArgument(format!(
            "swap rung {rung} needs photon level {} beyond cutoff {}",
            rung + 1,
            basis.cutoff
        )));
    }
    let root = if rescale {
        ((rung + 1) as f64).sqrt()
    } else {
        1.0
    };
    let effective = pair.with_coupling_scaled(root);
    let pulses = StagePulses::synthesize(effective)?;

    let one = C64::new(1.0, 0.0);
    let lo_q = embed(
        &qutrit_op(&[(lo, hi, one)], basis.topology)?,
        target.subsystem(),
        basis,
    )?;
    let a_dag = {
        let a = annihilation(basis.nph());
        let ad = a.t().mapv(|z| z.conj());
        embed(&ad, cavity.subsystem(), basis)?
    };
    // lowering (away from the detuned branch): |lo><hi| x a^dag
    let lowering = OperatorMatrix {
        basis: *basis,
        matrix: lo_q.matrix.dot(&a_dag.matrix),
    };
    let raising = OperatorMatrix {
        basis: *basis,
        matrix: lowering.matrix.t().mapv(|z| z.conj()),
    };
    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    let x_op = OperatorMatrix {
        basis: *basis,
        matrix: (&lowering.matrix + &raising.matrix).mapv(|z| z * half),
    };
    let y_op = OperatorMatrix {
        basis: *basis,
        matrix: (&raising.matrix.mapv(|z| z * i) - &lowering.matrix.mapv(|z| z * i))
            .mapv(|z| z * half),
    };
    let p_op = embed(
        &qutrit_op(&[(hi, hi, one)], basis.topology)?,
        target.subsystem(),
        basis,
    )?;

    let terms = sweep_terms(&pulses, mode, 1.0 / root, x_op, y_op, p_op);
    let q = match target {
        QutritId::Q1 => 1,
        QutritId::Q2 => 2,
    };
    let c = match cavity {
        CavityId::A => 'a',
        CavityId::B => 'b',
    };
    StageHamiltonian::from_terms(
        *basis,
        pair.window(),
        format!("swap q{q} {}{} cavity {c} rung {rung}", hi.label(), lo.label()),
        terms,
    )
}

/// Always-on laboratory-frame Hamiltonian of the register: cavity energies,
/// qutrit level energies, static qutrit-qutrit exchange and qutrit-cavity
/// couplings. Constant in time; useful as the reference frame generator.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct StaticParams {
    pub cavity_freq: (f64, f64),
    /// level energies (g, e, third) per qutrit
    pub qutrit_levels: [[f64; 3]; 2],
    /// g-e excitation exchange between the qutrits
    pub exchange_ge: f64,
    /// upper-transition exchange between the qutrits
    pub exchange_upper: f64,
    /// lower-transition cavity couplings (qutrit1-cavityA, qutrit2-cavityB)
    pub jc_lower: (f64, f64),
    /// upper-transition cavity couplings
    pub jc_upper: (f64, f64),
}

pub fn static_hamiltonian(
    basis: &BasisSpec,
    params: &StaticParams,
    window: Window,
) -> Result<StageHamiltonian> {
    let one = C64::new(1.0, 0.0);
    let nph = basis.nph();
    let mut h = Array2::<C64>::zeros((basis.dim(), basis.dim()));

    let num_a = embed(&crate::hilbert::number_op(nph), Subsystem::CavityA, basis)?;
    let num_b = embed(&crate::hilbert::number_op(nph), Subsystem::CavityB, basis)?;
    h.scaled_add(C64::new(params.cavity_freq.0, 0.0), &num_a.matrix);
    h.scaled_add(C64::new(params.cavity_freq.1, 0.0), &num_b.matrix);

    let upper = match basis.topology {
        Topology::Ladder => Level::F,
        Topology::Vtype => Level::A,
    };
    let levels = [Level::G, Level::E, upper];
    for (qi, sub) in [(0usize, Subsystem::Qutrit1), (1usize, Subsystem::Qutrit2)] {
        for (li, &level) in levels.iter().enumerate() {
            let p = embed(
                &qutrit_op(&[(level, level, one)], basis.topology)?,
                sub,
                basis,
            )?;
            h.scaled_add(C64::new(params.qutrit_levels[qi][li], 0.0), &p.matrix);
        }
    }

    // exchange terms g |x,y><y,x| + h.c.
    let mut add_exchange = |lo: Level, hi: Level, g: f64| -> Result<()> {
        if g == 0.0 {
            return Ok(());
        }
        let a = embed(
            &qutrit_op(&[(hi, lo, one)], basis.topology)?,
            Subsystem::Qutrit1,
            basis,
        )?;
        let b = embed(
            &qutrit_op(&[(lo, hi, one)], basis.topology)?,
            Subsystem::Qutrit2,
            basis,
        )?;
        let term = a.matrix.dot(&b.matrix);
        let dag = term.t().mapv(|z| z.conj());
        h.scaled_add(C64::new(g, 0.0), &term);
        h.scaled_add(C64::new(g, 0.0), &dag);
        Ok(())
    };
    add_exchange(Level::G, Level::E, params.exchange_ge)?;
    match basis.topology {
        Topology::Ladder => add_exchange(Level::E, Level::F, params.exchange_upper)?,
        Topology::Vtype => add_exchange(Level::G, Level::A, params.exchange_upper)?,
    }

    // cavity couplings g (|lo><hi| a^dag + h.c.), qutrit i onto its cavity
    let jc_pairs: [(QutritId, CavityId); 2] = [(QutritId::Q1, CavityId::A), (QutritId::Q2, CavityId::B)];
    let lower_pair = (Level::G, Level::E);
    let upper_pair = match basis.topology {
        Topology::Ladder => (Level::E, Level::F),
        Topology::Vtype => (Level::G, Level::A),
    };
    for (idx, (q, cav)) in jc_pairs.iter().enumerate() {
        let gs = [
            (
                lower_pair,
                if idx == 0 { params.jc_lower.0 } else { params.jc_lower.1 },
            ),
            (
                upper_pair,
                if idx == 0 { params.jc_upper.0 } else { params.jc_upper.1 },
            ),
        ];
        for ((lo, hi), g) in gs {
            if g == 0.0 {
                continue;
            }
            let qop = embed(
                &qutrit_op(&[(lo, hi, one)], basis.topology)?,
                q.subsystem(),
                basis,
            )?;
            let a = annihilation(nph);
            let ad = a.t().mapv(|z| z.conj());
            let adag = embed(&ad, cav.subsystem(), basis)?;
            let term = qop.matrix.dot(&adag.matrix);
            let dag = term.t().mapv(|z| z.conj());
            h.scaled_add(C64::new(g, 0.0), &term);
            h.scaled_add(C64::new(g, 0.0), &dag);
        }
    }

    let op = OperatorMatrix { basis: *basis, matrix: h };
    StageHamiltonian::from_terms(
        *basis,
        window,
        "static register",
        vec![(
            Arc::new(PulseShape::constant(1.0, window)) as Arc<dyn Schedule>,
            op,
        )],
    )
}

/// Total excitation number: level quanta on each qutrit plus both photon
/// numbers. Commutes with the static register Hamiltonian.
pub fn excitation_number(basis: &BasisSpec) -> OperatorMatrix {
    let mut op = OperatorMatrix::zero(*basis);
    for idx in 0..basis.dim() {
        let (q1, q2, na, nb) = basis.unpack(idx);
        let quanta = |q: usize| -> f64 {
            match (q, basis.topology) {
                (2, Topology::Ladder) => 2.0,
                (2, Topology::Vtype) => 1.0,
                (q, _) => q as f64,
            }
        };
        op.matrix[(idx, idx)] = C64::new(quanta(q1) + quanta(q2) + na as f64 + nb as f64, 0.0);
    }
    op
}
