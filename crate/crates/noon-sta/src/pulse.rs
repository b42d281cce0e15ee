//! Analytic pulse shapes with exact first and second derivatives.
//!
//! Two families cover everything the protocols need: the sech/tanh
//! amplitude/detuning pair for single-transition sweeps, and offset Gaussian
//! pairs for the entangling beam splitter. Shapes know how to mirror
//! themselves in time about their window midpoint, which is what stage
//! inversion builds on.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Window {
        assert!(end > start, "window must have positive length");
        Window { start, end }
    }

    pub fn centered(center: f64, half_width: f64) -> Window {
        Window::new(center - half_width, center + half_width)
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    /// Uniform grid over the window, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        let dt = self.length() / (n - 1) as f64;
        (0..n).map(|i| self.start + dt * i as f64).collect()
    }
}

/// A real-valued control waveform over a finite window.
pub trait Schedule: Send + Sync {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    fn window(&self) -> Window;
}

/// Uniformly sampled waveform with cubic (Catmull-Rom) interpolation, the
/// export form for synthesized corrections.
#[derive(Clone, Debug)]
pub struct Tabulated {
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Tabulated {
    fn ghost(&self, i: isize) -> f64 {
        let n = self.values.len() as isize;
        if i < 0 {
            2.0 * self.values[0] - self.values[1.min(n as usize - 1)]
        } else if i >= n {
            let last = self.values[n as usize - 1];
            let prev = self.values[(n as usize).saturating_sub(2)];
            2.0 * last - prev
        } else {
            self.values[i as usize]
        }
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let n = self.values.len();
        let raw = (t - self.t_start) / self.dt;
        let i = raw.floor().clamp(0.0, (n - 2) as f64) as usize;
        (i, raw - i as f64)
    }

    fn cubic(&self, t: f64) -> (f64, f64, f64) {
        let (i, s) = self.segment(t);
        let i = i as isize;
        let y0 = self.ghost(i - 1);
        let y1 = self.ghost(i);
        let y2 = self.ghost(i + 1);
        let y3 = self.ghost(i + 2);
        let c0 = 2.0 * y1;
        let c1 = y2 - y0;
        let c2 = 2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3;
        let c3 = -y0 + 3.0 * y1 - 3.0 * y2 + y3;
        let value = 0.5 * (c0 + c1 * s + c2 * s * s + c3 * s * s * s);
        let deriv = 0.5 * (c1 + 2.0 * c2 * s + 3.0 * c3 * s * s) / self.dt;
        let second = 0.5 * (2.0 * c2 + 6.0 * c3 * s) / (self.dt * self.dt);
        (value, deriv, second)
    }
}

#[derive(Clone, Debug)]
pub enum PulseKind {
    /// peak * sech(pi (t - center) / (2 t_scale))
    AeAmplitude {
        peak: f64,
        t_scale: f64,
        center: f64,
    },
    /// saturation * tanh(pi (t - center) / (2 t_scale)); the saturation value
    /// 2 beta^2 t_scale / pi carries the sweep direction in its sign.
    AeDetuning {
        saturation: f64,
        t_scale: f64,
        center: f64,
    },
    /// amplitude * exp(-(t - center)^2 / width^2)
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    Constant(f64),
    Zero,
    Tabulated(Tabulated),
}

#[derive(Clone, Debug)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub window: Window,
}

impl PulseShape {
    pub fn new(kind: PulseKind, window: Window) -> PulseShape {
        PulseShape { kind, window }
    }

    pub fn zero(window: Window) -> PulseShape {
        PulseShape::new(PulseKind::Zero, window)
    }

    pub fn constant(value: f64, window: Window) -> PulseShape {
        PulseShape::new(PulseKind::Constant(value), window)
    }

    pub fn ae_amplitude(peak: f64, t_scale: f64, window: Window) -> PulseShape {
        PulseShape::new(
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center: window.midpoint(),
            },
            window,
        )
    }

    /// Detuning ramp of the sech/tanh pair; `beta` sets the saturation value
    /// 2 beta^2 t_scale / pi.
    pub fn ae_detuning(beta: f64, t_scale: f64, window: Window) -> PulseShape {
        PulseShape::new(
            PulseKind::AeDetuning {
                saturation: 2.0 * beta * beta * t_scale / std::f64::consts::PI,
                t_scale,
                center: window.midpoint(),
            },
            window,
        )
    }

    pub fn gaussian(amplitude: f64, center: f64, width: f64, window: Window) -> PulseShape {
        PulseShape::new(
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            },
            window,
        )
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center,
            } => {
                let u = std::f64::consts::PI * (t - center) / (2.0 * t_scale);
                peak * sech(u)
            }
            PulseKind::AeDetuning {
                saturation,
                t_scale,
                center,
            } => {
                let u = std::f64::consts::PI * (t - center) / (2.0 * t_scale);
                saturation * u.tanh()
            }
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let x = (t - center) / width;
                amplitude * (-x * x).exp()
            }
            PulseKind::Constant(v) => *v,
            PulseKind::Zero => 0.0,
            PulseKind::Tabulated(tab) => tab.cubic(t).0,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center,
            } => {
                let a = std::f64::consts::PI / (2.0 * t_scale);
                let u = a * (t - center);
                -peak * a * sech(u) * u.tanh()
            }
            PulseKind::AeDetuning {
                saturation,
                t_scale,
                center,
            } => {
                let a = std::f64::consts::PI / (2.0 * t_scale);
                let u = a * (t - center);
                let s = sech(u);
                saturation * a * s * s
            }
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let x = t - center;
                let w2 = width * width;
                amplitude * (-x * x / w2).exp() * (-2.0 * x / w2)
            }
            PulseKind::Constant(_) | PulseKind::Zero => 0.0,
            PulseKind::Tabulated(tab) => tab.cubic(t).1,
        }
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match &self.kind {
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center,
            } => {
                let a = std::f64::consts::PI / (2.0 * t_scale);
                let u = a * (t - center);
                let s = sech(u);
                let th = u.tanh();
                peak * a * a * s * (th * th - s * s)
            }
            PulseKind::AeDetuning {
                saturation,
                t_scale,
                center,
            } => {
                let a = std::f64::consts::PI / (2.0 * t_scale);
                let u = a * (t - center);
                let s = sech(u);
                -2.0 * saturation * a * a * s * s * u.tanh()
            }
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let x = t - center;
                let w2 = width * width;
                amplitude * (-x * x / w2).exp() * (4.0 * x * x / (w2 * w2) - 2.0 / w2)
            }
            PulseKind::Constant(_) | PulseKind::Zero => 0.0,
            PulseKind::Tabulated(tab) => tab.cubic(t).2,
        }
    }

    /// Reflect the waveform about the window midpoint. Every analytic kind is
    /// closed under this operation, so the result stays exactly evaluable.
    pub fn time_mirrored(&self) -> PulseShape {
        let pivot = self.window.start + self.window.end;
        let kind = match &self.kind {
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center,
            } => PulseKind::AeAmplitude {
                peak: *peak,
                t_scale: *t_scale,
                center: pivot - center,
            },
            PulseKind::AeDetuning {
                saturation,
                t_scale,
                center,
            } => PulseKind::AeDetuning {
                saturation: -saturation,
                t_scale: *t_scale,
                center: pivot - center,
            },
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            } => PulseKind::Gaussian {
                amplitude: *amplitude,
                center: pivot - center,
                width: *width,
            },
            PulseKind::Constant(v) => PulseKind::Constant(*v),
            PulseKind::Zero => PulseKind::Zero,
            PulseKind::Tabulated(tab) => {
                let mut values = tab.values.clone();
                values.reverse();
                let t_end = tab.t_start + tab.dt * (tab.values.len() - 1) as f64;
                PulseKind::Tabulated(Tabulated {
                    t_start: pivot - t_end,
                    dt: tab.dt,
                    values,
                })
            }
        };
        PulseShape::new(kind, self.window)
    }

    /// Multiply the waveform by a constant factor.
    pub fn scaled(&self, factor: f64) -> PulseShape {
        let kind = match &self.kind {
            PulseKind::AeAmplitude {
                peak,
                t_scale,
                center,
            } => PulseKind::AeAmplitude {
                peak: peak * factor,
                t_scale: *t_scale,
                center: *center,
            },
            PulseKind::AeDetuning {
                saturation,
                t_scale,
                center,
            } => PulseKind::AeDetuning {
                saturation: saturation * factor,
                t_scale: *t_scale,
                center: *center,
            },
            PulseKind::Gaussian {
                amplitude,
                center,
                width,
            } => PulseKind::Gaussian {
                amplitude: amplitude * factor,
                center: *center,
                width: *width,
            },
            PulseKind::Constant(v) => PulseKind::Constant(v * factor),
            PulseKind::Zero => PulseKind::Zero,
            PulseKind::Tabulated(tab) => {
                let mut scaled = tab.clone();
                for v in &mut scaled.values {
                    *v *= factor;
                }
                PulseKind::Tabulated(scaled)
            }
        };
        PulseShape::new(kind, self.window)
    }

    /// Numerical area by composite Simpson quadrature with n panels.
    pub fn area(&self, panels: usize) -> f64 {
        let n = panels.max(2) & !1usize;
        let h = self.window.length() / n as f64;
        let mut acc = self.value(self.window.start) + self.value(self.window.end);
        for i in 1..n {
            let t = self.window.start + h * i as f64;
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.value(t);
        }
        acc * h / 3.0
    }
}

impl Schedule for PulseShape {
    fn value(&self, t: f64) -> f64 {
        PulseShape::value(self, t)
    }
    fn derivative(&self, t: f64) -> f64 {
        PulseShape::derivative(self, t)
    }
    fn window(&self) -> Window {
        self.window
    }
}

#[inline]
fn sech(u: f64) -> f64 {
    1.0 / u.cosh()
}

/// sech amplitude evaluated directly (stateless form).
pub fn ae_amplitude(t: f64, omega0: f64, t0: f64) -> f64 {
    omega0 * sech(std::f64::consts::PI * t / (2.0 * t0))
}

/// tanh detuning ramp evaluated directly (stateless form).
pub fn ae_detuning(t: f64, beta: f64, t0: f64) -> f64 {
    let saturation = 2.0 * beta * beta * t0 / std::f64::consts::PI;
    saturation * (std::f64::consts::PI * t / (2.0 * t0)).tanh()
}

/// Gaussian envelope evaluated directly (stateless form).
pub fn gaussian(t: f64, amplitude: f64, center: f64, width: f64) -> f64 {
    let x = (t - center) / width;
    amplitude * (-x * x).exp()
}

/// Closed-form area of the sech amplitude over a symmetric window of the
/// given half width: peak * (8 t_scale / pi) * atan(tanh(pi hw / (4 t_scale))).
pub fn ae_area(peak: f64, t_scale: f64, half_width: f64) -> f64 {
    peak * (8.0 * t_scale / std::f64::consts::PI)
        * (std::f64::consts::PI * half_width / (4.0 * t_scale)).tanh().atan()
}

/// Principal adiabatic mixing angle, 0.5 * atan2(coupling, detuning).
pub fn mixing_angle(coupling: f64, detuning: f64) -> Result<f64> {
    if coupling == 0.0 && detuning == 0.0 {
        return Err(Error::MixingAngleUndefined);
    }
    Ok(0.5 * coupling.atan2(detuning))
}

/// Amplitude/detuning waveforms that share one window and drive the same
/// transition.
#[derive(Clone, Debug)]
pub struct PulsePair {
    pub coupling: PulseShape,
    pub detuning: PulseShape,
}

impl PulsePair {
    pub fn new(coupling: PulseShape, detuning: PulseShape) -> Result<PulsePair> {
        if coupling.window != detuning.window {
            return Err(Error::InvalidArgument(
                "coupling and detuning must share one window".into(),
            ));
        }
        Ok(PulsePair { coupling, detuning })
    }

    /// sech/tanh sweep pair on a window of half width `half_width` around
    /// `center`.
    pub fn ae(peak: f64, beta: f64, t_scale: f64, half_width: f64, center: f64) -> PulsePair {
        let window = Window::centered(center, half_width);
        PulsePair {
            coupling: PulseShape::ae_amplitude(peak, t_scale, window),
            detuning: PulseShape::ae_detuning(beta, t_scale, window),
        }
    }

    /// Offset-Gaussian beam-splitter pair: coupling peaks `tau` after the
    /// window midpoint, the detuning peaks `tau` before it with width
    /// stretched by `m`.
    pub fn bell(
        g0: f64,
        t0: f64,
        tau: f64,
        d0: f64,
        m: f64,
        half_width: f64,
        center: f64,
    ) -> PulsePair {
        let window = Window::centered(center, half_width);
        PulsePair {
            coupling: PulseShape::gaussian(g0, center + tau, t0, window),
            detuning: PulseShape::gaussian(d0, center - tau, m * t0, window),
        }
    }

    #[inline]
    pub fn window(&self) -> Window {
        self.coupling.window
    }

    pub fn time_mirrored(&self) -> PulsePair {
        PulsePair {
            coupling: self.coupling.time_mirrored(),
            detuning: self.detuning.time_mirrored(),
        }
    }

    /// Scale only the coupling waveform (detuning untouched).
    pub fn with_coupling_scaled(&self, factor: f64) -> PulsePair {
        PulsePair {
            coupling: self.coupling.scaled(factor),
            detuning: self.detuning.clone(),
        }
    }
}

/// Mixing angle along a pulse pair, sampled on a uniform grid and continued
/// across branch cuts so the result is a continuous trajectory. Returns
/// (t, angle) samples.
pub fn mixing_angle_path(pair: &PulsePair, samples: usize) -> Result<Vec<(f64, f64)>> {
    let ts = pair.window().grid(samples.max(2));
    let mut out = Vec::with_capacity(ts.len());
    let mut prev: Option<f64> = None;
    for t in ts {
        let raw = mixing_angle(pair.coupling.value(t), pair.detuning.value(t))?;
        let angle = match prev {
            None => raw,
            Some(p) => {
                // the principal value is pi-periodic in the physical angle
                let k = ((p - raw) / std::f64::consts::PI).round();
                raw + k * std::f64::consts::PI
            }
        };
        prev = Some(angle);
        out.push((t, angle));
    }
    Ok(out)
}
