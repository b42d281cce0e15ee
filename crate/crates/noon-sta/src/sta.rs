//! Counterdiabatic synthesis.
//!
//! For a two-level sweep H = (1/2)(coupling * X + 2 * detuning * P_hi) the
//! correction that cancels nonadiabatic transitions is the Y-quadrature drive
//! cd = (coupling * detuning' - coupling' * detuning) / (coupling^2 + detuning^2).
//!
//! A Y drive is not available on hardware that modulates one quadrature plus
//! a frequency, so the corrected Hamiltonian is re-expressed in a rotating
//! frame where it becomes a single rotated coupling
//! R = sqrt(coupling^2 + cd^2) together with a shifted detuning
//! D_s = detuning + phi', phi = atan2(cd, coupling). The phi' shift follows
//! from the frame derivative acting on the level splitting; the populations
//! of the rotated schedule match the corrected lab-frame ones because the
//! frame angle vanishes at both window edges.

use std::sync::Arc;

use crate::pulse::{PulsePair, PulseShape, Schedule, Tabulated, Window};
use crate::{Error, Result};

/// Exact counterdiabatic amplitude for a pulse pair. Evaluates the quotient
/// and its derivative analytically from the shape derivatives.
#[derive(Clone, Debug)]
pub struct CdSchedule {
    pair: PulsePair,
}

impl CdSchedule {
    pub fn new(pair: PulsePair) -> Result<CdSchedule> {
        let window = pair.window();
        for t in window.grid(2049) {
            let c = pair.coupling.value(t);
            let d = pair.detuning.value(t);
            if c == 0.0 && d == 0.0 {
                return Err(Error::CdSingularity { t });
            }
        }
        Ok(CdSchedule { pair })
    }

    pub fn pair(&self) -> &PulsePair {
        &self.pair
    }

    /// Resample onto a uniform grid for export to a waveform generator.
    pub fn to_tabulated(&self, samples: usize) -> PulseShape {
        let window = self.pair.window();
        let n = samples.max(2);
        let ts = window.grid(n);
        let tab = Tabulated {
            t_start: window.start,
            dt: window.length() / (n - 1) as f64,
            values: ts.iter().map(|&t| self.value(t)).collect(),
        };
        PulseShape::new(crate::pulse::PulseKind::Tabulated(tab), window)
    }
}

impl Schedule for CdSchedule {
    fn value(&self, t: f64) -> f64 {
        let c = self.pair.coupling.value(t);
        let d = self.pair.detuning.value(t);
        let dc = self.pair.coupling.derivative(t);
        let dd = self.pair.detuning.derivative(t);
        let denom = c * c + d * d;
        if denom == 0.0 {
            return 0.0;
        }
        (c * dd - dc * d) / denom
    }

    fn derivative(&self, t: f64) -> f64 {
        let c = self.pair.coupling.value(t);
        let d = self.pair.detuning.value(t);
        let dc = self.pair.coupling.derivative(t);
        let dd = self.pair.detuning.derivative(t);
        let ddc = self.pair.coupling.second_derivative(t);
        let ddd = self.pair.detuning.second_derivative(t);
        let denom = c * c + d * d;
        if denom == 0.0 {
            return 0.0;
        }
        // d/dt numerator: the first-derivative cross terms cancel
        let num = c * dd - dc * d;
        let num_dot = c * ddd - ddc * d;
        let denom_dot = 2.0 * (c * dc + d * dd);
        (num_dot - (num / denom) * denom_dot) / denom
    }

    fn window(&self) -> Window {
        self.pair.window()
    }
}

/// Convenience constructor matching the synthesis pipeline naming.
pub fn cd_amplitude(pair: &PulsePair) -> Result<CdSchedule> {
    CdSchedule::new(pair.clone())
}

struct FrameData {
    pair: PulsePair,
    cd: CdSchedule,
    // frame angle sampled on a fine grid to anchor branch unwrapping
    grid_start: f64,
    grid_dt: f64,
    grid_phi: Vec<f64>,
}

impl FrameData {
    fn raw_angle(&self, t: f64) -> f64 {
        self.cd.value(t).atan2(self.pair.coupling.value(t))
    }

    fn angle(&self, t: f64) -> f64 {
        let raw = self.raw_angle(t);
        let idx = ((t - self.grid_start) / self.grid_dt)
            .floor()
            .clamp(0.0, (self.grid_phi.len() - 1) as f64) as usize;
        let anchor = self.grid_phi[idx];
        let k = ((anchor - raw) / std::f64::consts::TAU).round();
        raw + k * std::f64::consts::TAU
    }

    fn angle_rate(&self, t: f64) -> f64 {
        let c = self.pair.coupling.value(t);
        let dc = self.pair.coupling.derivative(t);
        let v = self.cd.value(t);
        let dv = self.cd.derivative(t);
        let denom = c * c + v * v;
        if denom == 0.0 {
            return 0.0;
        }
        (dv * c - v * dc) / denom
    }
}

/// Rotated-frame realization of a counterdiabatically corrected sweep: one
/// coupling quadrature plus a shifted detuning, directly implementable.
#[derive(Clone)]
pub struct RealizableFrame {
    data: Arc<FrameData>,
}

impl RealizableFrame {
    /// Combine a pulse pair with its correction. The correction must have
    /// been synthesized from the same pair (or an equivalent waveform).
    pub fn new(pair: PulsePair, cd: CdSchedule) -> Result<RealizableFrame> {
        let window = pair.window();
        let samples = 4097usize;
        let ts = window.grid(samples);
        let mut grid_phi = Vec::with_capacity(samples);
        let mut prev: Option<f64> = None;
        for &t in &ts {
            let c = pair.coupling.value(t);
            let v = cd.value(t);
            if c == 0.0 && v == 0.0 {
                return Err(Error::FrameSingularity { t });
            }
            let raw = v.atan2(c);
            let phi = match prev {
                None => raw,
                Some(p) => {
                    let k = ((p - raw) / std::f64::consts::TAU).round();
                    raw + k * std::f64::consts::TAU
                }
            };
            prev = Some(phi);
            grid_phi.push(phi);
        }
        Ok(RealizableFrame {
            data: Arc::new(FrameData {
                pair,
                cd,
                grid_start: window.start,
                grid_dt: window.length() / (samples - 1) as f64,
                grid_phi,
            }),
        })
    }

    /// Build correction and frame in one step.
    pub fn synthesize(pair: PulsePair) -> Result<RealizableFrame> {
        let cd = CdSchedule::new(pair.clone())?;
        RealizableFrame::new(pair, cd)
    }

    pub fn pair(&self) -> &PulsePair {
        &self.data.pair
    }

    pub fn cd(&self) -> &CdSchedule {
        &self.data.cd
    }

    pub fn window(&self) -> Window {
        self.data.pair.window()
    }

    pub fn rotated_coupling(&self) -> RotatedCoupling {
        RotatedCoupling {
            data: self.data.clone(),
        }
    }

    pub fn rotated_detuning(&self) -> RotatedDetuning {
        RotatedDetuning {
            data: self.data.clone(),
        }
    }

    pub fn frame_angle(&self) -> FrameAngle {
        FrameAngle {
            data: self.data.clone(),
        }
    }

    pub fn frame_angle_rate(&self, t: f64) -> f64 {
        self.data.angle_rate(t)
    }
}

/// sqrt(coupling^2 + cd^2), the single drive quadrature of the rotated frame.
#[derive(Clone)]
pub struct RotatedCoupling {
    data: Arc<FrameData>,
}

impl Schedule for RotatedCoupling {
    fn value(&self, t: f64) -> f64 {
        let c = self.data.pair.coupling.value(t);
        let v = self.data.cd.value(t);
        c.hypot(v)
    }

    fn derivative(&self, t: f64) -> f64 {
        let c = self.data.pair.coupling.value(t);
        let dc = self.data.pair.coupling.derivative(t);
        let v = self.data.cd.value(t);
        let dv = self.data.cd.derivative(t);
        let r = c.hypot(v);
        if r == 0.0 {
            return 0.0;
        }
        (c * dc + v * dv) / r
    }

    fn window(&self) -> Window {
        self.data.pair.window()
    }
}

/// detuning + phi', the frame-shifted detuning.
#[derive(Clone)]
pub struct RotatedDetuning {
    data: Arc<FrameData>,
}

impl Schedule for RotatedDetuning {
    fn value(&self, t: f64) -> f64 {
        self.data.pair.detuning.value(t) + self.data.angle_rate(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        // the second frame derivative has no closed form worth carrying;
        // five-point stencil on the analytic rate is plenty
        let h = (self.data.pair.window().length() * 1e-5).max(1e-7);
        let rate = |t: f64| self.data.angle_rate(t);
        let fd = (-rate(t + 2.0 * h) + 8.0 * rate(t + h) - 8.0 * rate(t - h) + rate(t - 2.0 * h))
            / (12.0 * h);
        self.data.pair.detuning.derivative(t) + fd
    }

    fn window(&self) -> Window {
        self.data.pair.window()
    }
}

/// Unwrapped frame angle atan2(cd, coupling).
#[derive(Clone)]
pub struct FrameAngle {
    data: Arc<FrameData>,
}

impl Schedule for FrameAngle {
    fn value(&self, t: f64) -> f64 {
        self.data.angle(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        self.data.angle_rate(t)
    }

    fn window(&self) -> Window {
        self.data.pair.window()
    }
}

/// Synthesis bundle for one stage: bare pulses, correction, rotated frame.
#[derive(Clone)]
pub struct StagePulses {
    pub pair: PulsePair,
    pub cd: CdSchedule,
    pub frame: RealizableFrame,
}

impl StagePulses {
    pub fn synthesize(pair: PulsePair) -> Result<StagePulses> {
        let cd = CdSchedule::new(pair.clone())?;
        let frame = RealizableFrame::new(pair.clone(), cd.clone())?;
        Ok(StagePulses { pair, cd, frame })
    }
}
