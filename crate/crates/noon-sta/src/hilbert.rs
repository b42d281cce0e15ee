//! Composite Hilbert space of two driven qutrits and two storage cavities.
//!
//! Basis ordering is qutrit1 x qutrit2 x cavityA x cavityB with the flattened
//! index `((q1*3 + q2)*nph + na)*nph + nb`, `nph = cutoff + 1`. Qutrit levels
//! are indexed g = 0, e = 1 and the third level (f on the ladder register, a
//! on the V register) = 2.

use ndarray::{Array1, Array2};

use crate::{C64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// g - e - f ladder: both transitions share the e level.
    Ladder,
    /// V register: e and the flag level a are both reached from g.
    Vtype,
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Topology::Ladder => write!(f, "ladder"),
            Topology::Vtype => write!(f, "vtype"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    G,
    E,
    F,
    A,
}

impl Level {
    /// Position of the level inside the local qutrit space, checking that the
    /// level exists on the given register.
    pub fn index(self, topology: Topology) -> Result<usize> {
        match (self, topology) {
            (Level::G, _) => Ok(0),
            (Level::E, _) => Ok(1),
            (Level::F, Topology::Ladder) => Ok(2),
            (Level::A, Topology::Vtype) => Ok(2),
            (Level::F, Topology::Vtype) => Err(Error::LevelNotAvailable {
                level: "f".into(),
                topology: "vtype".into(),
                reason: "the V register exposes g, e, a".into(),
            }),
            (Level::A, Topology::Ladder) => Err(Error::LevelNotAvailable {
                level: "a".into(),
                topology: "ladder".into(),
                reason: "the ladder register exposes g, e, f".into(),
            }),
        }
    }

    pub fn label(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::F => 'f',
            Level::A => 'a',
        }
    }

    pub fn from_label(c: char, topology: Topology) -> Result<Level> {
        let level = match c {
            'g' => Level::G,
            'e' => Level::E,
            'f' => Level::F,
            'a' => Level::A,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown qutrit level '{other}'"
                )))
            }
        };
        level.index(topology)?;
        Ok(level)
    }
}

/// Which factor of the tensor product an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Qutrit1,
    Qutrit2,
    CavityA,
    CavityB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    pub topology: Topology,
    pub cutoff: usize,
}

impl BasisSpec {
    pub fn new(topology: Topology, cutoff: usize) -> BasisSpec {
        BasisSpec { topology, cutoff }
    }

    /// Photon levels per cavity.
    #[inline]
    pub fn nph(&self) -> usize {
        self.cutoff + 1
    }

    #[inline]
    pub fn dim(&self) -> usize {
        9 * self.nph() * self.nph()
    }

    #[inline]
    pub fn index_of(&self, q1: usize, q2: usize, na: usize, nb: usize) -> usize {
        let nph = self.nph();
        debug_assert!(q1 < 3 && q2 < 3 && na < nph && nb < nph);
        ((q1 * 3 + q2) * nph + na) * nph + nb
    }

    #[inline]
    pub fn unpack(&self, idx: usize) -> (usize, usize, usize, usize) {
        let nph = self.nph();
        let nb = idx % nph;
        let rest = idx / nph;
        let na = rest % nph;
        let rest = rest / nph;
        let q2 = rest % 3;
        let q1 = rest / 3;
        (q1, q2, na, nb)
    }

    fn level_label(&self, q: usize) -> char {
        match (q, self.topology) {
            (0, _) => 'g',
            (1, _) => 'e',
            (2, Topology::Ladder) => 'f',
            (2, Topology::Vtype) => 'a',
            _ => '?',
        }
    }

    /// Human-readable label of a basis state, e.g. "g,e,1,0".
    pub fn state_label(&self, idx: usize) -> String {
        let (q1, q2, na, nb) = self.unpack(idx);
        format!(
            "{},{},{},{}",
            self.level_label(q1),
            self.level_label(q2),
            na,
            nb
        )
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.state_label(i)).collect()
    }

    /// Parse "q1,q2,na,nb" (e.g. "g,a,0,0") into a flat basis index.
    pub fn parse_label(&self, label: &str) -> Result<usize> {
        let parts: Vec<&str> = label.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "state label '{label}' must have four comma-separated fields"
            )));
        }
        let mut qs = [0usize; 2];
        for (slot, part) in qs.iter_mut().zip(&parts[..2]) {
            let mut chars = part.chars();
            let (Some(c), None) = (chars.next(), chars.next()) else {
                return Err(Error::InvalidArgument(format!(
                    "qutrit field '{part}' in '{label}' must be a single letter"
                )));
            };
            *slot = Level::from_label(c, self.topology)?.index(self.topology)?;
        }
        let mut ns = [0usize; 2];
        for (slot, part) in ns.iter_mut().zip(&parts[2..]) {
            *slot = part.parse::<usize>().map_err(|_| {
                Error::InvalidArgument(format!("photon field '{part}' in '{label}' is not a count"))
            })?;
            if *slot > self.cutoff {
                return Err(Error::InvalidArgument(format!(
                    "photon count {slot} in '{label}' exceeds cutoff {}",
                    self.cutoff
                )));
            }
        }
        Ok(self.index_of(qs[0], qs[1], ns[0], ns[1]))
    }
}

/// Build the basis descriptor. Kept as a function for symmetry with the rest
/// of the construction API.
pub fn build_basis(cutoff: usize, topology: Topology) -> BasisSpec {
    BasisSpec::new(topology, cutoff)
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub basis: BasisSpec,
    pub amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn zero(basis: BasisSpec) -> StateVector {
        StateVector {
            basis,
            amplitudes: Array1::zeros(basis.dim()),
        }
    }

    pub fn from_amplitudes(basis: BasisSpec, amplitudes: Array1<C64>) -> Result<StateVector> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                context: "state amplitudes".into(),
                expected: basis.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// Product basis state |q1, q2, na, nb> from local indices.
    pub fn basis_state(basis: BasisSpec, q1: usize, q2: usize, na: usize, nb: usize) -> StateVector {
        let mut psi = StateVector::zero(basis);
        psi.amplitudes[basis.index_of(q1, q2, na, nb)] = C64::new(1.0, 0.0);
        psi
    }

    pub fn from_label(basis: BasisSpec, label: &str) -> Result<StateVector> {
        let idx = basis.parse_label(label)?;
        let mut psi = StateVector::zero(basis);
        psi.amplitudes[idx] = C64::new(1.0, 0.0);
        Ok(psi)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn population_of(&self, label: &str) -> Result<f64> {
        let idx = self.basis.parse_label(label)?;
        Ok(self.amplitudes[idx].norm_sqr())
    }

    /// Total population outside the given index set.
    pub fn leakage_outside(&self, support: &[usize]) -> f64 {
        let mut keep = vec![false; self.basis.dim()];
        for &i in support {
            keep[i] = true;
        }
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !keep[*i])
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub basis: BasisSpec,
    pub matrix: Array2<C64>,
}

impl OperatorMatrix {
    pub fn zero(basis: BasisSpec) -> OperatorMatrix {
        let d = basis.dim();
        OperatorMatrix {
            basis,
            matrix: Array2::zeros((d, d)),
        }
    }

    pub fn identity(basis: BasisSpec) -> OperatorMatrix {
        let d = basis.dim();
        OperatorMatrix {
            basis,
            matrix: Array2::eye(d),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let m = &self.matrix;
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// out = M * psi, accumulating with the given scalar prefactor.
    pub fn accumulate_apply(&self, scale: C64, psi: &Array1<C64>, out: &mut Array1<C64>) {
        let d = self.basis.dim();
        let m = self.matrix.as_slice().expect("row-major operator");
        let x = psi.as_slice().expect("contiguous state");
        let y = out.as_slice_mut().expect("contiguous output");
        for i in 0..d {
            let row = &m[i * d..(i + 1) * d];
            let mut acc = C64::new(0.0, 0.0);
            for (mij, xj) in row.iter().zip(x.iter()) {
                acc += mij * xj;
            }
            y[i] += scale * acc;
        }
    }
}

/// Local annihilation operator on `nph` photon levels.
pub fn annihilation(nph: usize) -> Array2<C64> {
    let mut a = Array2::zeros((nph, nph));
    for n in 1..nph {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Local photon-number operator.
pub fn number_op(nph: usize) -> Array2<C64> {
    let mut n_op = Array2::zeros((nph, nph));
    for n in 0..nph {
        n_op[(n, n)] = C64::new(n as f64, 0.0);
    }
    n_op
}

/// Local qutrit operator from sparse |row><col| entries given as level pairs.
pub fn qutrit_op(
    entries: &[(Level, Level, C64)],
    topology: Topology,
) -> Result<Array2<C64>> {
    let mut m = Array2::zeros((3, 3));
    for &(row, col, amp) in entries {
        let r = row.index(topology)?;
        let c = col.index(topology)?;
        m[(r, c)] += amp;
    }
    Ok(m)
}

/// Embed a local operator into the composite space, acting as the identity on
/// every other factor.
pub fn embed(
    local_op: &Array2<C64>,
    subsystem: Subsystem,
    basis: &BasisSpec,
) -> Result<OperatorMatrix> {
    let nph = basis.nph();
    let local_dim = match subsystem {
        Subsystem::Qutrit1 | Subsystem::Qutrit2 => 3,
        Subsystem::CavityA | Subsystem::CavityB => nph,
    };
    if local_op.nrows() != local_dim || local_op.ncols() != local_dim {
        return Err(Error::DimensionMismatch {
            context: format!("local operator for {subsystem:?}"),
            expected: local_dim,
            got: local_op.nrows().max(local_op.ncols()),
        });
    }

    let mut out = OperatorMatrix::zero(*basis);
    // Strides of each factor inside the flat index.
    let (sub_stride, sub_dim) = match subsystem {
        Subsystem::Qutrit1 => (3 * nph * nph, 3),
        Subsystem::Qutrit2 => (nph * nph, 3),
        Subsystem::CavityA => (nph, nph),
        Subsystem::CavityB => (1, nph),
    };
    let dim = basis.dim();
    let block = sub_stride * sub_dim;
    for (si, sj) in index_pairs(sub_dim) {
        let amp = local_op[(si, sj)];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        // Iterate over all configurations of the remaining factors: outer
        // blocks above the subsystem and inner offsets below it.
        let mut outer = 0;
        while outer < dim {
            for inner in 0..sub_stride {
                let row = outer + si * sub_stride + inner;
                let col = outer + sj * sub_stride + inner;
                out.matrix[(row, col)] += amp;
            }
            outer += block;
        }
    }
    Ok(out)
}

fn index_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)))
}

/// Overlap fidelity |<target|psi>|^2.
pub fn fidelity(psi: &StateVector, target: &StateVector) -> Result<f64> {
    if psi.basis != target.basis {
        return Err(Error::BasisMismatch(
            "fidelity requires both states on the same basis".into(),
        ));
    }
    let mut ov = C64::new(0.0, 0.0);
    for (t, p) in target.amplitudes.iter().zip(psi.amplitudes.iter()) {
        ov += t.conj() * p;
    }
    Ok(ov.norm_sqr())
}

/// Fidelity maximized over a relative phase applied to the listed basis
/// indices, returning the maximum and the optimizing phase angle.
///
/// Splitting the overlap into the part outside the subspace (A) and inside
/// it (B), max_phi |A + e^{i phi} B|^2 = (|A| + |B|)^2 at
/// phi = arg(A) - arg(B).
pub fn fidelity_up_to_phase(
    psi: &StateVector,
    target: &StateVector,
    phase_subspace: &[usize],
) -> Result<(f64, f64)> {
    if psi.basis != target.basis {
        return Err(Error::BasisMismatch(
            "fidelity requires both states on the same basis".into(),
        ));
    }
    let dim = psi.basis.dim();
    let mut inside = vec![false; dim];
    for &i in phase_subspace {
        if i >= dim {
            return Err(Error::InvalidArgument(format!(
                "phase subspace index {i} out of range for dimension {dim}"
            )));
        }
        inside[i] = true;
    }
    let mut a = C64::new(0.0, 0.0);
    let mut b = C64::new(0.0, 0.0);
    for i in 0..dim {
        let term = target.amplitudes[i].conj() * psi.amplitudes[i];
        if inside[i] {
            b += term;
        } else {
            a += term;
        }
    }
    let fid = (a.norm() + b.norm()).powi(2);
    let phase = if a.norm() > 0.0 && b.norm() > 0.0 {
        a.arg() - b.arg()
    } else {
        0.0
    };
    Ok((fid, phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_scale_with_cutoff() {
        assert_eq!(build_basis(0, Topology::Vtype).dim(), 9);
        assert_eq!(build_basis(1, Topology::Ladder).dim(), 36);
        assert_eq!(build_basis(3, Topology::Vtype).dim(), 144);
    }

    #[test]
    fn index_round_trip() {
        let basis = build_basis(2, Topology::Ladder);
        for idx in 0..basis.dim() {
            let (q1, q2, na, nb) = basis.unpack(idx);
            assert_eq!(basis.index_of(q1, q2, na, nb), idx);
        }
    }

    #[test]
    fn labels_parse_back() {
        let basis = build_basis(1, Topology::Vtype);
        for idx in 0..basis.dim() {
            let label = basis.state_label(idx);
            assert_eq!(basis.parse_label(&label).unwrap(), idx);
        }
        assert!(basis.parse_label("g,f,0,0").is_err());
        assert!(basis.parse_label("g,e,2,0").is_err());
    }

    #[test]
    fn level_validation_by_topology() {
        assert_eq!(Level::F.index(Topology::Ladder).unwrap(), 2);
        assert_eq!(Level::A.index(Topology::Vtype).unwrap(), 2);
        assert!(Level::F.index(Topology::Vtype).is_err());
        assert!(Level::A.index(Topology::Ladder).is_err());
    }

    #[test]
    fn embedded_raising_operator_counts() {
        // |e><g| on qutrit 1 at cutoff 0 touches one matrix element per
        // configuration of the other three factors: 3 * 1 * 1 = 3.
        let basis = build_basis(0, Topology::Vtype);
        let op = qutrit_op(
            &[(Level::E, Level::G, C64::new(1.0, 0.0))],
            basis.topology,
        )
        .unwrap();
        let full = embed(&op, Subsystem::Qutrit1, &basis).unwrap();
        let nonzero = full.matrix.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 3);
    }

    #[test]
    fn annihilation_entries() {
        let a = annihilation(3);
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert!((a[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phase_insensitive_fidelity_example() {
        let basis = build_basis(0, Topology::Vtype);
        let ia = basis.index_of(0, 0, 0, 0);
        let ib = basis.index_of(1, 0, 0, 0);
        let s = 0.5f64.sqrt();
        let mut target = StateVector::zero(basis);
        target.amplitudes[ia] = C64::new(s, 0.0);
        target.amplitudes[ib] = C64::new(s, 0.0);
        let mut psi = StateVector::zero(basis);
        psi.amplitudes[ia] = C64::new(s, 0.0);
        psi.amplitudes[ib] = C64::from_polar(s, std::f64::consts::FRAC_PI_3);

        let plain = fidelity(&psi, &target).unwrap();
        assert!((plain - 0.75).abs() < 1e-12);

        let (fid, phase) = fidelity_up_to_phase(&psi, &target, &[ib]).unwrap();
        assert!((fid - 1.0).abs() < 1e-12);
        assert!((phase + std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }
}
