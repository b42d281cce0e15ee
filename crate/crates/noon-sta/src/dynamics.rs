//! Schroedinger propagation of stage Hamiltonians.
//!
//! The workhorse is an embedded Dormand-Prince 5(4) pair with PI-free step
//! control, FSAL reuse, and exact landing on requested sample times. States
//! are never renormalized: the norm drift is a free accuracy diagnostic, and
//! drifting past 1e-6 aborts the run instead of hiding the damage.
//!
//! A deliberately independent cross-check, `evolve_oracle`, propagates with
//! midpoint matrix exponentials on a fixed grid. It shares no step logic with
//! the adaptive path, so agreement between the two is meaningful.

use ndarray::Array1;

use crate::hilbert::StateVector;
use crate::linalg::{expm, hermitian_eigen};
use crate::stage::StageHamiltonian;
use crate::{C64, Error, Result};

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Mixed absolute/relative local error target per step.
    pub tol: f64,
    /// Record the state on this uniform grid (plus the window end).
    pub sample_spacing: Option<f64>,
    /// Abort when the top photon level of either cavity exceeds this
    /// population. Needs a cutoff with headroom above the protocol target.
    pub top_fock_guard: Option<f64>,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            tol: 1e-10,
            sample_spacing: None,
            top_fock_guard: None,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    pub sample_times: Vec<f64>,
    pub sample_states: Vec<Array1<C64>>,
    /// max |(norm at t) - (initial norm)| over all accepted steps
    pub norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// y5 - y4 error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin_comb(y: &Array1<C64>, parts: &[(f64, &Array1<C64>)], h: f64, out: &mut Array1<C64>) {
    let n = y.len();
    let yo = y.as_slice().unwrap();
    let o = out.as_slice_mut().unwrap();
    o.copy_from_slice(yo);
    for &(a, k) in parts {
        let ks = k.as_slice().unwrap();
        let ah = a * h;
        for i in 0..n {
            o[i] += ks[i] * ah;
        }
    }
}

/// Propagate `psi0` across the stage window.
pub fn evolve(
    stage: &StageHamiltonian,
    psi0: &StateVector,
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    if psi0.basis != stage.basis() {
        return Err(Error::BasisMismatch(
            "state and stage live on different bases".into(),
        ));
    }
    let window = stage.window();
    let span = window.length();
    let t_end = window.end;
    let dim = psi0.basis.dim();

    // sample grid, window end always included
    let samples: Vec<f64> = match opts.sample_spacing {
        None => vec![],
        Some(ds) => {
            if ds <= 0.0 {
                return Err(Error::InvalidArgument(
                    "sample spacing must be positive".into(),
                ));
            }
            let mut ts: Vec<f64> = Vec::new();
            let mut k = 0usize;
            loop {
                let t = window.start + ds * k as f64;
                if t >= t_end - 1e-12 * span {
                    break;
                }
                ts.push(t);
                k += 1;
            }
            ts.push(t_end);
            ts
        }
    };

    // guard index sets: top photon level of each cavity
    let guard_sets: Option<(Vec<usize>, Vec<usize>)> = opts.top_fock_guard.map(|_| {
        let basis = psi0.basis;
        let mut top_a = Vec::new();
        let mut top_b = Vec::new();
        for idx in 0..basis.dim() {
            let (_, _, na, nb) = basis.unpack(idx);
            if na == basis.cutoff {
                top_a.push(idx);
            }
            if nb == basis.cutoff {
                top_b.push(idx);
            }
        }
        (top_a, top_b)
    });

    let mut y = psi0.amplitudes.clone();
    let norm0 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let minus_i = C64::new(0.0, -1.0);

    let mut k1 = Array1::<C64>::zeros(dim);
    let mut k2 = Array1::<C64>::zeros(dim);
    let mut k3 = Array1::<C64>::zeros(dim);
    let mut k4 = Array1::<C64>::zeros(dim);
    let mut k5 = Array1::<C64>::zeros(dim);
    let mut k6 = Array1::<C64>::zeros(dim);
    let mut k7 = Array1::<C64>::zeros(dim);
    let mut ytmp = Array1::<C64>::zeros(dim);
    let mut ynew = Array1::<C64>::zeros(dim);

    let rhs = |t: f64, y: &Array1<C64>, out: &mut Array1<C64>| {
        out.fill(C64::new(0.0, 0.0));
        stage.apply_scaled(t, minus_i, y, out);
    };

    let mut t = window.start;
    let nb0 = stage.norm_bound(t).max(stage.norm_bound(window.midpoint()));
    let mut h = (span * 1e-3).min(0.25 / (nb0 + 1e-9)).min(span);

    let mut sample_times = Vec::with_capacity(samples.len());
    let mut sample_states: Vec<Array1<C64>> = Vec::with_capacity(samples.len());
    let mut next_sample = 0usize;
    if !samples.is_empty() && (samples[0] - t).abs() <= 1e-12 * span {
        sample_times.push(samples[0]);
        sample_states.push(y.clone());
        next_sample = 1;
    }

    rhs(t, &y, &mut k1);
    let mut norm_drift = 0.0f64;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    while t < t_end - 1e-12 * span {
        if accepted + rejected > opts.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        let mut h_try = h.min(t_end - t);
        if next_sample < samples.len() {
            let ts = samples[next_sample];
            if ts > t {
                h_try = h_try.min(ts - t);
            }
        }
        if h_try < 1e-14 * span {
            return Err(Error::StepUnderflow { t, h: h_try });
        }

        lin_comb(&y, &[(A21, &k1)], h_try, &mut ytmp);
        rhs(t + C2 * h_try, &ytmp, &mut k2);
        lin_comb(&y, &[(A31, &k1), (A32, &k2)], h_try, &mut ytmp);
        rhs(t + C3 * h_try, &ytmp, &mut k3);
        lin_comb(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h_try, &mut ytmp);
        rhs(t + C4 * h_try, &ytmp, &mut k4);
        lin_comb(
            &y,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            h_try,
            &mut ytmp,
        );
        rhs(t + C5 * h_try, &ytmp, &mut k5);
        lin_comb(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h_try,
            &mut ytmp,
        );
        rhs(t + h_try, &ytmp, &mut k6);
        lin_comb(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h_try,
            &mut ynew,
        );
        rhs(t + h_try, &ynew, &mut k7);

        // scaled RMS of the embedded error estimate
        let mut err_acc = 0.0f64;
        {
            let yk = y.as_slice().unwrap();
            let yn = ynew.as_slice().unwrap();
            let (s1, s3, s4, s5, s6, s7) = (
                k1.as_slice().unwrap(),
                k3.as_slice().unwrap(),
                k4.as_slice().unwrap(),
                k5.as_slice().unwrap(),
                k6.as_slice().unwrap(),
                k7.as_slice().unwrap(),
            );
            for i in 0..dim {
                let e = (s1[i] * E1 + s3[i] * E3 + s4[i] * E4 + s5[i] * E5 + s6[i] * E6
                    + s7[i] * E7)
                    * h_try;
                let sc = opts.tol + opts.tol * yk[i].norm().max(yn[i].norm());
                err_acc += (e.norm() / sc).powi(2);
            }
        }
        let err = (err_acc / dim as f64).sqrt();

        if err <= 1.0 {
            t += h_try;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            accepted += 1;

            let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let drift = (norm - norm0).abs();
            norm_drift = norm_drift.max(drift);
            if drift > 1e-6 {
                return Err(Error::NormDrift { t, drift });
            }
            if let (Some(guard), Some((top_a, top_b))) = (opts.top_fock_guard, guard_sets.as_ref())
            {
                let pop = |set: &Vec<usize>| -> f64 {
                    set.iter().map(|&i| y[i].norm_sqr()).sum()
                };
                let pa = pop(top_a);
                if pa > guard {
                    return Err(Error::CutoffReached {
                        cavity: 'a',
                        population: pa,
                        guard,
                    });
                }
                let pb = pop(top_b);
                if pb > guard {
                    return Err(Error::CutoffReached {
                        cavity: 'b',
                        population: pb,
                        guard,
                    });
                }
            }
            if next_sample < samples.len()
                && (t - samples[next_sample]).abs() <= 1e-9 * span.max(1.0)
            {
                sample_times.push(samples[next_sample]);
                sample_states.push(y.clone());
                next_sample += 1;
            }

            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = h_try * factor;
        } else {
            rejected += 1;
            let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h = h_try * factor;
        }
    }

    let final_state = StateVector::from_amplitudes(psi0.basis, y)?;
    Ok(EvolutionResult {
        final_state,
        sample_times,
        sample_states,
        norm_drift,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// Fixed-grid midpoint-exponential propagator: psi <- exp(-i h H(t_mid)) psi
/// per slice. Second-order accurate; used only to cross-check `evolve`.
pub fn evolve_oracle(
    stage: &StageHamiltonian,
    psi0: &StateVector,
    dt: f64,
) -> Result<StateVector> {
    if psi0.basis != stage.basis() {
        return Err(Error::BasisMismatch(
            "state and stage live on different bases".into(),
        ));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidArgument("oracle step must be positive".into()));
    }
    let window = stage.window();
    let span = window.length();
    let n = (span / dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut y = psi0.amplitudes.clone();
    for step in 0..n {
        let t_mid = window.start + h * (step as f64 + 0.5);
        let gen = stage.assemble(t_mid).matrix.mapv(|z| z * C64::new(0.0, -h));
        let u = expm(&gen)?;
        y = u.dot(&y);
    }
    StateVector::from_amplitudes(psi0.basis, y)
}

/// Overlap of `psi` with the eigenvector of H(t) at the given position in the
/// ascending eigenvalue ordering. Errors when that position sits inside a
/// degenerate multiplet, where the ordering is meaningless.
pub fn instantaneous_eigenstate_overlap(
    stage: &StageHamiltonian,
    psi: &StateVector,
    t: f64,
    branch: usize,
) -> Result<f64> {
    if psi.basis != stage.basis() {
        return Err(Error::BasisMismatch(
            "state and stage live on different bases".into(),
        ));
    }
    let h = stage.assemble(t);
    let (vals, vecs) = hermitian_eigen(&h.matrix)?;
    let n = vals.len();
    if branch >= n {
        return Err(Error::InvalidArgument(format!(
            "branch {branch} out of range for dimension {n}"
        )));
    }
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let gap_ok = |a: usize, b: usize| (vals[b] - vals[a]).abs() > 1e-9 * scale;
    if (branch > 0 && !gap_ok(branch - 1, branch)) || (branch + 1 < n && !gap_ok(branch, branch + 1))
    {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue branch {branch} is degenerate at t = {t}; track by overlap instead"
        )));
    }
    let mut ov = C64::new(0.0, 0.0);
    for i in 0..n {
        ov += vecs[(i, branch)].conj() * psi.amplitudes[i];
    }
    Ok(ov.norm_sqr())
}

/// Follows one instantaneous eigenvector through time by maximal overlap with
/// the previously tracked vector, which is robust inside block-diagonal
/// spectra where plain eigenvalue ordering reshuffles branches.
pub struct BranchTracker {
    vec: Array1<C64>,
}

impl BranchTracker {
    /// Start from the eigenvector closest to `reference` at time t. Returns
    /// the tracker and the initial overlap.
    pub fn from_state(
        stage: &StageHamiltonian,
        t: f64,
        reference: &Array1<C64>,
    ) -> Result<(BranchTracker, f64)> {
        let h = stage.assemble(t);
        let (_, vecs) = hermitian_eigen(&h.matrix)?;
        let (best_idx, best_ov) = best_column(&vecs, reference);
        let mut vec = vecs.column(best_idx).to_owned();
        align_phase(&mut vec, reference);
        Ok((BranchTracker { vec }, best_ov))
    }

    /// Move the tracked branch to time t.
    pub fn advance(&mut self, stage: &StageHamiltonian, t: f64) -> Result<()> {
        let h = stage.assemble(t);
        let (_, vecs) = hermitian_eigen(&h.matrix)?;
        let prev = self.vec.clone();
        let (best_idx, best_ov) = best_column(&vecs, &prev);
        if best_ov < 0.6 {
            return Err(Error::DegenerateBranch {
                t,
                overlap: best_ov,
            });
        }
        self.vec = vecs.column(best_idx).to_owned();
        align_phase(&mut self.vec, &prev);
        Ok(())
    }

    pub fn vector(&self) -> &Array1<C64> {
        &self.vec
    }

    /// |<branch|psi>|^2
    pub fn overlap_with(&self, psi: &Array1<C64>) -> f64 {
        let mut ov = C64::new(0.0, 0.0);
        for (b, p) in self.vec.iter().zip(psi.iter()) {
            ov += b.conj() * p;
        }
        ov.norm_sqr()
    }
}

fn best_column(vecs: &ndarray::Array2<C64>, reference: &Array1<C64>) -> (usize, f64) {
    let n = vecs.ncols();
    let mut best = (0usize, -1.0f64);
    for k in 0..n {
        let mut ov = C64::new(0.0, 0.0);
        for i in 0..n {
            ov += vecs[(i, k)].conj() * reference[i];
        }
        let o = ov.norm_sqr();
        if o > best.1 {
            best = (k, o);
        }
    }
    (best.0, best.1)
}

fn align_phase(vec: &mut Array1<C64>, reference: &Array1<C64>) {
    let mut ov = C64::new(0.0, 0.0);
    for (v, r) in vec.iter().zip(reference.iter()) {
        ov += v.conj() * r;
    }
    if ov.norm() > 0.0 {
        let phase = ov / ov.norm();
        for v in vec.iter_mut() {
            *v *= phase;
        }
    }
}
