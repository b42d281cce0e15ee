//! Text emitters for the CLI: CSV tables with a stable float format so a
//! rerun is byte-identical to the last one.

use std::io::Write;

use crate::dynamics::EvolutionResult;
use crate::pulse::{PulseShape, Schedule};
use crate::sta::RealizableFrame;
use crate::sweep::SweepRecord;
use crate::Result;

/// 12 significant digits in scientific notation, enough to round-trip the
/// differences we care about while staying platform independent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

pub const SWEEP_HEADER: &str = "G1_radns,T1_ns,f_sta,f_app,f_ro,status";

pub fn write_sweep_csv<W: Write>(mut out: W, records: &[SweepRecord]) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_sig(r.g1),
            fmt_sig(r.t1),
            fmt_sig(r.f_sta),
            fmt_sig(r.f_app),
            fmt_sig(r.f_ro),
            r.status
        )?;
    }
    Ok(())
}

/// Frame synthesis table: the input pair, the correction, and the single
/// realizable pair that replaces all three.
pub fn write_synthesis_csv<W: Write>(
    mut out: W,
    frame: &RealizableFrame,
    samples: usize,
) -> Result<()> {
    let io = |e: std::io::Error| crate::Error::InvalidArgument(format!("write failed: {e}"));
    writeln!(
        out,
        "t,coupling,detuning,cd,rotated_coupling,rotated_detuning,frame_angle"
    )
    .map_err(io)?;
    let window = frame.window();
    let pair = frame.pair();
    let cd = frame.cd();
    let rc = frame.rotated_coupling();
    let rd = frame.rotated_detuning();
    let fa = frame.frame_angle();
    for t in window.grid(samples) {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig(t),
            fmt_sig(pair.coupling.value(t)),
            fmt_sig(pair.detuning.value(t)),
            fmt_sig(cd.value(t)),
            fmt_sig(rc.value(t)),
            fmt_sig(rd.value(t)),
            fmt_sig(fa.value(t)),
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn write_pulse_csv<W: Write>(
    mut out: W,
    shape: &PulseShape,
    samples: usize,
) -> std::io::Result<()> {
    writeln!(out, "t,value,derivative")?;
    for t in shape.window.grid(samples) {
        writeln!(
            out,
            "{},{},{}",
            fmt_sig(t),
            fmt_sig(shape.value(t)),
            fmt_sig(shape.derivative(t))
        )?;
    }
    Ok(())
}

/// Sampled populations over a run. Columns are limited to states whose
/// population ever clears `floor`, so deep protocols stay readable.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    result: &EvolutionResult,
    floor: f64,
) -> std::io::Result<()> {
    let basis = result.final_state.basis;
    let dim = basis.dim();
    let mut keep = vec![false; dim];
    for state in &result.sample_states {
        for (i, amp) in state.iter().enumerate() {
            if amp.norm_sqr() > floor {
                keep[i] = true;
            }
        }
    }
    let columns: Vec<usize> = (0..dim).filter(|&i| keep[i]).collect();
    let mut header = String::from("t");
    for &i in &columns {
        header.push_str(",p_");
        header.push_str(&basis.state_label(i).replace(',', "_"));
    }
    header.push_str(",norm");
    writeln!(out, "{header}")?;
    for (k, t) in result.sample_times.iter().enumerate() {
        let state = &result.sample_states[k];
        let mut line = fmt_sig(*t);
        for &i in &columns {
            line.push(',');
            line.push_str(&fmt_sig(state[i].norm_sqr()));
        }
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        line.push(',');
        line.push_str(&fmt_sig(norm));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_is_stable() {
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig(-0.125), "-1.25000000000e-1");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
    }

    #[test]
    fn sweep_csv_shape() {
        let records = vec![SweepRecord {
            g1: 0.5,
            t1: 1.0,
            f_sta: 0.999,
            f_app: f64::NAN,
            f_ro: 0.5,
            status: "ok".into(),
            wall_ms: 12.0,
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
        let row = lines.next().unwrap();
        assert!(row.contains("NaN"));
        assert!(row.ends_with(",ok"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn trajectory_filters_dark_states() {
        use crate::hilbert::{BasisSpec, StateVector, Topology};
        let basis = BasisSpec::new(Topology::Ladder, 1);
        let s0 = StateVector::basis_state(basis, 0, 0, 0, 0);
        let s1 = StateVector::basis_state(basis, 1, 0, 0, 0);
        let result = EvolutionResult {
            final_state: s1.clone(),
            sample_times: vec![0.0, 1.0],
            sample_states: vec![s0.amplitudes, s1.amplitudes],
            norm_drift: 0.0,
            accepted_steps: 1,
            rejected_steps: 0,
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &result, 1e-12).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, "t,p_g_g_0_0,p_e_g_0_0,norm");
    }
}
