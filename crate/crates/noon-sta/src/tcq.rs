//! Tunable-coupling-qutrit device map: from circuit energies to the dressed
//! three-level model the protocol layer consumes.
//!
//! The normal-mode picture keeps the plus/minus mode pair coupled only
//! through the J exchange, which conserves total excitation number. The
//! one- and two-excitation blocks are therefore tiny Hermitian matrices, and
//! the dressed frequencies and anharmonicities come from diagonalizing them
//! and matching branches to the bare configurations by overlap.

use ndarray::Array2;

use crate::linalg::hermitian_eigen;
use crate::pulse::{PulseKind, PulseShape, Tabulated};
use crate::{C64, Error, Result, TWO_PI};

/// Largest junction coupling the gmon element is rated for.
pub const GMON_CAP: f64 = TWO_PI * 0.055;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TcqParams {
    /// charging energies (plus, minus), rad/ns
    pub e_c: (f64, f64),
    /// Josephson energies (plus, minus), rad/ns
    pub e_j: (f64, f64),
    /// interaction energy, rad/ns
    pub e_i: f64,
    /// bare cavity couplings (plus, minus), rad/ns
    pub g: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum TcqWarning {
    /// E_J/E_C below the transmon regime on the named branch
    SubTransmonRatio { branch: char, ratio: f64 },
    /// two-excitation eigenvalues too close to attribute to branches safely
    IllConditionedFit { gap: f64 },
    /// requested coupling exceeds the gmon cap; output clamped
    Saturation { peak: f64, cap: f64 },
}

impl std::fmt::Display for TcqWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TcqWarning::SubTransmonRatio { branch, ratio } => write!(
                f,
                "E_J/E_C ratio {ratio:.2} on the {branch} branch is below the transmon regime (20)"
            ),
            TcqWarning::IllConditionedFit { gap } => write!(
                f,
                "two-excitation eigenvalues nearly degenerate (gap {gap:.3e}); branch attribution is ill conditioned"
            ),
            TcqWarning::Saturation { peak, cap } => write!(
                f,
                "requested coupling peak {peak:.6} rad/ns exceeds the gmon cap {cap:.6}; clamped"
            ),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BareModel {
    pub omega: (f64, f64),
    pub delta: (f64, f64),
    pub j: f64,
}

/// Transmon closed forms: omega = sqrt(8 E_J E_C) - E_C, delta = -E_C,
/// J = E_I (E_J+ E_J- / (E_C+ E_C-))^{1/4} / sqrt(2).
pub fn bare_model(p: &TcqParams) -> Result<(BareModel, Vec<TcqWarning>)> {
    for (name, v) in [
        ("E_C+", p.e_c.0),
        ("E_C-", p.e_c.1),
        ("E_J+", p.e_j.0),
        ("E_J-", p.e_j.1),
    ] {
        if v <= 0.0 {
            return Err(Error::NonphysicalParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if p.e_i < 0.0 {
        return Err(Error::NonphysicalParameter(format!(
            "E_I must be nonnegative, got {}",
            p.e_i
        )));
    }
    let mut warnings = Vec::new();
    for (branch, ej, ec) in [('+', p.e_j.0, p.e_c.0), ('-', p.e_j.1, p.e_c.1)] {
        let ratio = ej / ec;
        if ratio < 20.0 {
            warnings.push(TcqWarning::SubTransmonRatio { branch, ratio });
        }
    }
    let omega = (
        (8.0 * p.e_j.0 * p.e_c.0).sqrt() - p.e_c.0,
        (8.0 * p.e_j.1 * p.e_c.1).sqrt() - p.e_c.1,
    );
    let delta = (-p.e_c.0, -p.e_c.1);
    let j = p.e_i * (p.e_j.0 * p.e_j.1 / (p.e_c.0 * p.e_c.1)).powf(0.25)
        / std::f64::consts::SQRT_2;
    Ok((BareModel { omega, delta, j }, warnings))
}

/// lambda = arctan(2J / zeta)/2 + theta with zeta the anharmonicity-adjusted
/// splitting; the branch offset theta is pi for zeta > 0 and pi/2 for
/// zeta < 0. zeta = 0 leaves the branch undefined.
pub fn mixing_angle_lambda(omega: (f64, f64), delta: (f64, f64), j: f64) -> Result<f64> {
    let zeta = omega.0 - omega.1 - (delta.0 - delta.1) / 2.0;
    if zeta == 0.0 {
        return Err(Error::DegenerateDetuning);
    }
    let theta = if zeta > 0.0 {
        std::f64::consts::PI
    } else {
        std::f64::consts::FRAC_PI_2
    };
    Ok((2.0 * j / zeta).atan() / 2.0 + theta)
}

/// Dressed cavity couplings g~+- = g+- cos(lambda) -+ g-+ sin(lambda),
/// together with the angle where the plus coupling crosses zero.
pub fn dressed_couplings(g: (f64, f64), lambda: f64) -> ((f64, f64), f64) {
    let dressed = (
        g.0 * lambda.cos() - g.1 * lambda.sin(),
        g.1 * lambda.cos() + g.0 * lambda.sin(),
    );
    let zero_crossing = g.0.atan2(g.1);
    (dressed, zero_crossing)
}

#[derive(Clone, Copy, Debug)]
pub struct EffectiveSpectrum {
    pub omega: (f64, f64),
    pub delta: (f64, f64),
    pub delta_c: f64,
}

fn match_branch(vecs: &Array2<C64>, want: usize) -> usize {
    let n = vecs.ncols();
    let mut best = (0usize, -1.0f64);
    for k in 0..n {
        let o = vecs[(want, k)].norm_sqr();
        if o > best.1 {
            best = (k, o);
        }
    }
    best.0
}

/// Dressed spectrum from the one- and two-excitation blocks of the coupled
/// mode pair. Branches are attributed by dominant overlap with the bare
/// occupation states, so at J = 0 the bare inputs come back exactly.
pub fn effective_spectrum(
    omega: (f64, f64),
    delta: (f64, f64),
    j: f64,
) -> Result<(EffectiveSpectrum, Vec<TcqWarning>)> {
    let mut warnings = Vec::new();

    // one-excitation block on {|10>, |01>}
    let mut h1 = Array2::<C64>::zeros((2, 2));
    h1[(0, 0)] = C64::new(omega.0, 0.0);
    h1[(1, 1)] = C64::new(omega.1, 0.0);
    h1[(0, 1)] = C64::new(j, 0.0);
    h1[(1, 0)] = C64::new(j, 0.0);
    let (vals1, vecs1) = hermitian_eigen(&h1)?;
    let wp = vals1[match_branch(&vecs1, 0)];
    let wm = vals1[match_branch(&vecs1, 1)];

    // two-excitation block on {|20>, |11>, |02>}
    let r2 = std::f64::consts::SQRT_2;
    let mut h2 = Array2::<C64>::zeros((3, 3));
    h2[(0, 0)] = C64::new(2.0 * omega.0 + delta.0, 0.0);
    h2[(1, 1)] = C64::new(omega.0 + omega.1, 0.0);
    h2[(2, 2)] = C64::new(2.0 * omega.1 + delta.1, 0.0);
    h2[(0, 1)] = C64::new(r2 * j, 0.0);
    h2[(1, 0)] = C64::new(r2 * j, 0.0);
    h2[(1, 2)] = C64::new(r2 * j, 0.0);
    h2[(2, 1)] = C64::new(r2 * j, 0.0);
    let (vals2, vecs2) = hermitian_eigen(&h2)?;
    let scale = vals2.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut min_gap = f64::INFINITY;
    for a in 0..3 {
        for b in (a + 1)..3 {
            min_gap = min_gap.min((vals2[a] - vals2[b]).abs());
        }
    }
    if min_gap < 1e-9 * scale {
        warnings.push(TcqWarning::IllConditionedFit { gap: min_gap });
    }
    let e20 = vals2[match_branch(&vecs2, 0)];
    let e11 = vals2[match_branch(&vecs2, 1)];
    let e02 = vals2[match_branch(&vecs2, 2)];

    Ok((
        EffectiveSpectrum {
            omega: (wp, wm),
            delta: (e20 - 2.0 * wp, e02 - 2.0 * wm),
            delta_c: e11 - wp - wm,
        },
        warnings,
    ))
}

/// Full-matrix cross-check on a Fock grid truncated at `max_exc` quanta per
/// mode. Independent construction path from `effective_spectrum`: it builds
/// the complete Hamiltonian and fishes the excitation sectors back out of
/// the global diagonalization.
pub fn effective_spectrum_truncated(
    omega: (f64, f64),
    delta: (f64, f64),
    j: f64,
    max_exc: usize,
) -> Result<EffectiveSpectrum> {
    if max_exc < 2 {
        return Err(Error::InvalidArgument(
            "truncated spectrum needs at least 2 quanta per mode".into(),
        ));
    }
    let m = max_exc + 1;
    let dim = m * m;
    let idx = |np: usize, nm: usize| np * m + nm;
    let mut h = Array2::<C64>::zeros((dim, dim));
    for np in 0..m {
        for nm in 0..m {
            let diag = omega.0 * np as f64
                + delta.0 * (np * np.saturating_sub(1)) as f64 / 2.0
                + omega.1 * nm as f64
                + delta.1 * (nm * nm.saturating_sub(1)) as f64 / 2.0;
            h[(idx(np, nm), idx(np, nm))] = C64::new(diag, 0.0);
            // J (c+ c-^dag + c+^dag c-): |np, nm> -> |np-1, nm+1>
            if np >= 1 && nm + 1 < m {
                let amp = j * (np as f64).sqrt() * ((nm + 1) as f64).sqrt();
                h[(idx(np - 1, nm + 1), idx(np, nm))] += C64::new(amp, 0.0);
                h[(idx(np, nm), idx(np - 1, nm + 1))] += C64::new(amp, 0.0);
            }
        }
    }
    let (vals, vecs) = hermitian_eigen(&h)?;
    let pick = |np: usize, nm: usize| -> f64 {
        let want = idx(np, nm);
        let mut best = (0usize, -1.0f64);
        for k in 0..dim {
            let o = vecs[(want, k)].norm_sqr();
            if o > best.1 {
                best = (k, o);
            }
        }
        vals[best.0]
    };
    let wp = pick(1, 0);
    let wm = pick(0, 1);
    Ok(EffectiveSpectrum {
        omega: (wp, wm),
        delta: (pick(2, 0) - 2.0 * wp, pick(0, 2) - 2.0 * wm),
        delta_c: pick(1, 1) - wp - wm,
    })
}

/// Junction-strength schedule to exchange-coefficient schedule for the
/// splitter stage: the rotating-wave reduction leaves S(t) cos(l1) cos(l2).
/// Peaks beyond the gmon cap are clamped and flagged.
pub fn gmon_coupling(
    junction: &PulseShape,
    lambda1: f64,
    lambda2: f64,
) -> (PulseShape, Vec<TcqWarning>) {
    let factor = lambda1.cos() * lambda2.cos();
    let scaled = junction.scaled(factor);
    let window = scaled.window;
    let mut peak = 0.0f64;
    let samples = 4001usize;
    for t in window.grid(samples) {
        peak = peak.max(scaled.value(t).abs());
    }
    if peak <= GMON_CAP {
        return (scaled, vec![]);
    }
    let ts = window.grid(samples);
    let tab = Tabulated {
        t_start: window.start,
        dt: window.length() / (samples - 1) as f64,
        values: ts
            .iter()
            .map(|&t| scaled.value(t).clamp(-GMON_CAP, GMON_CAP))
            .collect(),
    };
    (
        PulseShape::new(PulseKind::Tabulated(tab), window),
        vec![TcqWarning::Saturation {
            peak,
            cap: GMON_CAP,
        }],
    )
}

/// Everything the protocol layer needs about one device setting.
#[derive(Clone, Debug)]
pub struct EffectiveQutrit {
    pub bare: BareModel,
    pub lambda: f64,
    pub spectrum: EffectiveSpectrum,
    pub dressed_g: (f64, f64),
    pub g_plus_zero_lambda: f64,
}

pub fn effective_qutrit(p: &TcqParams) -> Result<(EffectiveQutrit, Vec<TcqWarning>)> {
    let (bare, mut warnings) = bare_model(p)?;
    let lambda = mixing_angle_lambda(bare.omega, bare.delta, bare.j)?;
    let (spectrum, w2) = effective_spectrum(bare.omega, bare.delta, bare.j)?;
    warnings.extend(w2);
    let (dressed_g, g_plus_zero_lambda) = dressed_couplings(p.g, lambda);
    Ok((
        EffectiveQutrit {
            bare,
            lambda,
            spectrum,
            dressed_g,
            g_plus_zero_lambda,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn sample_params() -> TcqParams {
        TcqParams {
            e_c: (TWO_PI * 0.250, TWO_PI * 0.240),
            e_j: (TWO_PI * 12.5, TWO_PI * 11.0),
            e_i: TWO_PI * 0.150,
            g: (TWO_PI * 0.050, TWO_PI * 0.040),
        }
    }

    #[test]
    fn bare_model_closed_forms() {
        let ec = TWO_PI * 0.3;
        let p = TcqParams {
            e_c: (ec, ec),
            e_j: (50.0 * ec, 50.0 * ec),
            e_i: 0.0,
            g: (0.0, 0.0),
        };
        let (bare, warnings) = bare_model(&p).unwrap();
        assert!((bare.omega.0 - 19.0 * ec).abs() < 1e-12);
        assert_eq!(bare.delta.0, -ec);
        assert_eq!(bare.j, 0.0);
        assert!(warnings.is_empty());
    }

    #[test]
    fn sub_transmon_ratio_warns() {
        let mut p = sample_params();
        p.e_j.1 = 10.0 * p.e_c.1;
        let (_, warnings) = bare_model(&p).unwrap();
        assert!(matches!(
            warnings.as_slice(),
            [TcqWarning::SubTransmonRatio { branch: '-', .. }]
        ));
        p.e_c.0 = -p.e_c.0;
        assert!(bare_model(&p).is_err());
    }

    #[test]
    fn mixing_angle_branches() {
        // zeta > 0, no coupling
        let l = mixing_angle_lambda((5.0, 4.0), (0.0, 0.0), 0.0).unwrap();
        assert!((l - PI).abs() < 1e-15);
        // zeta < 0
        let l = mixing_angle_lambda((4.0, 5.0), (0.0, 0.0), 0.0).unwrap();
        assert!((l - FRAC_PI_2).abs() < 1e-15);
        // 2J = zeta > 0
        let l = mixing_angle_lambda((5.0, 4.0), (0.0, 0.0), 0.5).unwrap();
        assert!((l - (PI / 8.0 + PI)).abs() < 1e-15);
        assert!(mixing_angle_lambda((5.0, 5.0), (0.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn dressed_couplings_rotate() {
        let g = (0.3, 0.3);
        let ((gp, gm), zero_lambda) = dressed_couplings(g, FRAC_PI_4);
        assert!(gp.abs() < 1e-15);
        assert!((gm - 0.3 * 2f64.sqrt()).abs() < 1e-15);
        assert!((zero_lambda - FRAC_PI_4).abs() < 1e-15);
        let ((gp, gm), _) = dressed_couplings((0.3, 0.2), 0.0);
        assert_eq!((gp, gm), (0.3, 0.2));
    }

    #[test]
    fn uncoupled_spectrum_is_bare() {
        let omega = (TWO_PI * 5.1, TWO_PI * 4.9);
        let delta = (-TWO_PI * 0.25, -TWO_PI * 0.22);
        let (spec, warnings) = effective_spectrum(omega, delta, 0.0).unwrap();
        assert!((spec.omega.0 - omega.0).abs() < 1e-12);
        assert!((spec.omega.1 - omega.1).abs() < 1e-12);
        assert!((spec.delta.0 - delta.0).abs() < 1e-12);
        assert!((spec.delta.1 - delta.1).abs() < 1e-12);
        assert!(spec.delta_c.abs() < 1e-12);
        assert!(warnings.is_empty());
    }

    #[test]
    fn harmonic_limit_matches_two_level_eigenvalues() {
        let omega = (TWO_PI * 5.1, TWO_PI * 4.9);
        let j = TWO_PI * 0.03;
        let (spec, _) = effective_spectrum(omega, (0.0, 0.0), j).unwrap();
        let mid = 0.5 * (omega.0 + omega.1);
        let split = ((0.5 * (omega.0 - omega.1)).powi(2) + j * j).sqrt();
        assert!((spec.omega.0 - (mid + split)).abs() < 1e-10);
        assert!((spec.omega.1 - (mid - split)).abs() < 1e-10);
    }

    #[test]
    fn truncation_oracle_agrees() {
        let (bare, _) = bare_model(&sample_params()).unwrap();
        let (spec, _) = effective_spectrum(bare.omega, bare.delta, bare.j).unwrap();
        for max_exc in [2usize, 3] {
            let full =
                effective_spectrum_truncated(bare.omega, bare.delta, bare.j, max_exc).unwrap();
            for (a, b) in [
                (spec.omega.0, full.omega.0),
                (spec.omega.1, full.omega.1),
                (spec.delta.0, full.delta.0),
                (spec.delta.1, full.delta.1),
                (spec.delta_c, full.delta_c),
            ] {
                assert!(
                    (a - b).abs() <= 1e-6 * a.abs().max(1.0),
                    "mismatch {a} vs {b} at truncation {max_exc}"
                );
            }
        }
    }

    #[test]
    fn gmon_respects_the_cap() {
        use crate::pulse::Window;
        let window = Window::centered(0.0, 10.0);
        let under = PulseShape::gaussian(TWO_PI * 0.010, 0.0, 4.0, window);
        let (mapped, warnings) = gmon_coupling(&under, 0.3, 0.2);
        assert!(warnings.is_empty());
        assert!(
            (mapped.value(0.0) - TWO_PI * 0.010 * 0.3f64.cos() * 0.2f64.cos()).abs() < 1e-12
        );

        let over = PulseShape::gaussian(TWO_PI * 0.060, 0.0, 4.0, window);
        let (clamped, warnings) = gmon_coupling(&over, 0.0, 0.0);
        assert!(matches!(warnings.as_slice(), [TcqWarning::Saturation { .. }]));
        assert!(clamped.value(0.0) <= GMON_CAP + 1e-9);
    }

    #[test]
    fn zero_junction_gives_zero_coupling() {
        use crate::pulse::Window;
        let window = Window::centered(0.0, 5.0);
        let zero = PulseShape::zero(window);
        let (mapped, warnings) = gmon_coupling(&zero, 0.7, 0.9);
        assert!(warnings.is_empty());
        for t in window.grid(11) {
            assert_eq!(mapped.value(t), 0.0);
        }
    }
}
