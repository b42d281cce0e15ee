//! Config schema for the front end.
//!
//! One self-describing JSON file per invocation: no environment variables, no
//! hidden defaults for physics. Unknown keys are rejected at parse time, and
//! semantic validation collects every problem in one pass so a bad file is
//! fixed in one edit, not one error at a time.
//!
//! Frequencies in the file carry an explicit `units` block. When it is
//! missing they are read as MHz and scaled by 2*pi (the lab convention), and
//! a notice is printed on stderr. Times are always ns.

use serde::Deserialize;

use noon_sta::hilbert::{BasisSpec, Level, StateVector, Topology};
use noon_sta::stage::StageMode;
use noon_sta::TWO_PI;

fn default_true() -> bool {
    true
}

fn default_cutoff() -> usize {
    1
}

fn default_mode() -> StageMode {
    StageMode::Sta
}

fn default_modes() -> Vec<StageMode> {
    vec![StageMode::Sta, StageMode::App, StageMode::Ro]
}

fn default_qutrit() -> u8 {
    1
}

fn default_cavity() -> String {
    "a".into()
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub units: Option<UnitsConfig>,
    /// Local error target for the adaptive integrator.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Row count for sampled CSV output (synthesize, pulse-dump).
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub stage: Option<StageConfig>,
    #[serde(default)]
    pub pulse: Option<PulseConfig>,
    #[serde(default)]
    pub plan: Option<PlanConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tcq: Option<TcqConfig>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub frequency: FrequencyUnit,
    /// Only meaningful for `mhz`; defaults to true.
    #[serde(default)]
    pub times_two_pi: Option<bool>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    Mhz,
    RadPerNs,
}

/// Resolved frequency conversion applied to every frequency-like key.
#[derive(Clone, Copy)]
pub struct Units {
    factor: f64,
}

impl Units {
    pub fn freq(&self, value: f64) -> f64 {
        value * self.factor
    }
}

/// A single driven or exchanged transition, for `simulate` and `synthesize`.
/// Exactly one of `drive`, `exchange`, `swap` picks the stage family.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub topology: Topology,
    /// Highest cavity Fock level kept in the state space.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_mode")]
    pub mode: StageMode,
    /// Initial state label "q1,q2,na,nb"; defaults to the ground state.
    #[serde(default)]
    pub initial: Option<String>,
    /// Optional target label; adds a fidelity entry to the report.
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub exchange: Option<ExchangeConfig>,
    #[serde(default)]
    pub swap: Option<SwapConfig>,
}

/// Single-register two-tone sweep. `peak` and `beta` are frequencies.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default = "default_qutrit")]
    pub qutrit: u8,
    pub levels: (String, String),
    pub peak: f64,
    pub beta: f64,
    pub t_scale: f64,
    pub window_factor: f64,
}

/// Qutrit-qutrit exchange with Gaussian coupling and detuning envelopes.
/// `g0` and `d0` are frequencies.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct ExchangeConfig {
    pub levels: (String, String),
    pub g0: f64,
    pub t0: f64,
    pub tau: f64,
    pub d0: f64,
    pub m: f64,
    pub half_width: f64,
}

/// Qutrit-cavity photon swap on one Fock rung. `peak` and `beta` are
/// frequencies.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SwapConfig {
    #[serde(default = "default_qutrit")]
    pub qutrit: u8,
    #[serde(default = "default_cavity")]
    pub cavity: String,
    pub levels: (String, String),
    #[serde(default)]
    pub rung: usize,
    #[serde(default = "default_true")]
    pub rescale: bool,
    pub peak: f64,
    pub beta: f64,
    pub t_scale: f64,
    pub window_factor: f64,
}

/// A named pulse for `pulse-dump`. Amplitude-like keys (`peak`, `beta`,
/// `amplitude`, `value`) are frequencies.
#[derive(Deserialize, Clone)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    AeCoupling {
        peak: f64,
        t_scale: f64,
        half_width: f64,
        #[serde(default)]
        center: f64,
    },
    AeDetuning {
        beta: f64,
        t_scale: f64,
        half_width: f64,
        #[serde(default)]
        center: f64,
    },
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
        window: (f64, f64),
    },
    Constant {
        value: f64,
        window: (f64, f64),
    },
}

/// Full NOON(n) protocol for `noon`. Missing pulse blocks fall back to the
/// published stage parameters.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub topology: Topology,
    pub n: usize,
    #[serde(default = "default_mode")]
    pub mode: StageMode,
    #[serde(default)]
    pub excite: Option<AeBlock>,
    #[serde(default)]
    pub swap: Option<AeBlock>,
    #[serde(default)]
    pub bell: Option<BellBlock>,
    #[serde(default = "default_true")]
    pub rung_rescale: bool,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct AeBlock {
    pub peak: f64,
    pub beta: f64,
    pub t_scale: f64,
    pub window_factor: f64,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct BellBlock {
    pub g0: f64,
    pub t0: f64,
    pub tau: f64,
    pub d0: f64,
    pub m: f64,
    pub half_width: f64,
}

/// Pulse-parameter landscape for `sweep`. `g1_*` and `beta` are frequencies,
/// `t1_*` are ns.
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub g1_start: f64,
    pub g1_end: f64,
    pub g1_count: usize,
    pub t1_start: f64,
    pub t1_end: f64,
    pub t1_count: usize,
    pub beta: f64,
    pub window_factor: f64,
    #[serde(default)]
    pub rung: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<StageMode>,
}

/// Two-transmon device parameters for `tcq-map`. All four groups are
/// frequencies; pairs are ordered (+, -).
#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct TcqConfig {
    pub e_c: (f64, f64),
    pub e_j: (f64, f64),
    pub e_i: f64,
    pub g: (f64, f64),
}

/// Accumulates every validation failure with its key path.
struct Checker {
    issues: Vec<String>,
}

impl Checker {
    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0) || !v.is_finite() {
            self.issues.push(format!("{path}: must be positive, got {v}"));
        }
    }

    fn nonnegative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0) || !v.is_finite() {
            self.issues
                .push(format!("{path}: must be zero or positive, got {v}"));
        }
    }

    fn finite(&mut self, path: &str, v: f64) {
        if !v.is_finite() {
            self.issues.push(format!("{path}: must be finite, got {v}"));
        }
    }

    fn at_least(&mut self, path: &str, v: usize, min: usize) {
        if v < min {
            self.issues
                .push(format!("{path}: must be at least {min}, got {v}"));
        }
    }
}

fn parse_level(s: &str, topology: Topology) -> Result<Level, String> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Level::from_label(c, topology).map_err(|e| e.to_string()),
        _ => Err(format!("expected a single level letter, got '{s}'")),
    }
}

fn check_levels(c: &mut Checker, path: &str, levels: &(String, String), topology: Topology) {
    for (i, name) in [&levels.0, &levels.1].into_iter().enumerate() {
        if let Err(msg) = parse_level(name, topology) {
            c.issues.push(format!("{path}.levels[{i}]: {msg}"));
        }
    }
    if levels.0 == levels.1 {
        c.issues
            .push(format!("{path}.levels: the two levels must differ"));
    }
}

fn check_label(c: &mut Checker, path: &str, label: &str, basis: BasisSpec) {
    if let Err(e) = StateVector::from_label(basis, label) {
        c.issues.push(format!("{path}: {e}"));
    }
}

fn check_ae(c: &mut Checker, path: &str, peak: f64, beta: f64, t_scale: f64, window_factor: f64) {
    c.positive(&format!("{path}.peak"), peak);
    c.nonnegative(&format!("{path}.beta"), beta);
    c.positive(&format!("{path}.t_scale"), t_scale);
    c.positive(&format!("{path}.window_factor"), window_factor);
}

fn check_bell(c: &mut Checker, path: &str, b: &BellBlock) {
    c.positive(&format!("{path}.g0"), b.g0);
    c.positive(&format!("{path}.t0"), b.t0);
    c.finite(&format!("{path}.tau"), b.tau);
    c.nonnegative(&format!("{path}.d0"), b.d0);
    c.positive(&format!("{path}.m"), b.m);
    c.positive(&format!("{path}.half_width"), b.half_width);
}

fn check_stage(c: &mut Checker, s: &StageConfig) {
    let picked = s.drive.is_some() as usize + s.exchange.is_some() as usize + s.swap.is_some() as usize;
    if picked != 1 {
        c.issues.push(format!(
            "stage: exactly one of drive, exchange, swap must be present, found {picked}"
        ));
    }
    if let Some(d) = &s.drive {
        if !(d.qutrit == 1 || d.qutrit == 2) {
            c.issues
                .push(format!("stage.drive.qutrit: must be 1 or 2, got {}", d.qutrit));
        }
        check_levels(c, "stage.drive", &d.levels, s.topology);
        check_ae(c, "stage.drive", d.peak, d.beta, d.t_scale, d.window_factor);
    }
    if let Some(x) = &s.exchange {
        check_levels(c, "stage.exchange", &x.levels, s.topology);
        check_bell(
            c,
            "stage.exchange",
            &BellBlock {
                g0: x.g0,
                t0: x.t0,
                tau: x.tau,
                d0: x.d0,
                m: x.m,
                half_width: x.half_width,
            },
        );
    }
    if let Some(w) = &s.swap {
        if !(w.qutrit == 1 || w.qutrit == 2) {
            c.issues
                .push(format!("stage.swap.qutrit: must be 1 or 2, got {}", w.qutrit));
        }
        if !(w.cavity == "a" || w.cavity == "b") {
            c.issues
                .push(format!("stage.swap.cavity: must be \"a\" or \"b\", got \"{}\"", w.cavity));
        }
        check_levels(c, "stage.swap", &w.levels, s.topology);
        check_ae(c, "stage.swap", w.peak, w.beta, w.t_scale, w.window_factor);
        if w.rung + 1 > s.cutoff {
            c.issues.push(format!(
                "stage.swap.rung: rung {} needs cutoff >= {}, got {}",
                w.rung,
                w.rung + 1,
                s.cutoff
            ));
        }
    }
    let basis = BasisSpec::new(s.topology, s.cutoff);
    if let Some(label) = &s.initial {
        check_label(c, "stage.initial", label, basis);
    }
    if let Some(label) = &s.target {
        check_label(c, "stage.target", label, basis);
    }
}

fn check_pulse(c: &mut Checker, p: &PulseConfig) {
    match p {
        PulseConfig::AeCoupling {
            peak,
            t_scale,
            half_width,
            center,
        } => {
            c.positive("pulse.peak", *peak);
            c.positive("pulse.t_scale", *t_scale);
            c.positive("pulse.half_width", *half_width);
            c.finite("pulse.center", *center);
        }
        PulseConfig::AeDetuning {
            beta,
            t_scale,
            half_width,
            center,
        } => {
            c.nonnegative("pulse.beta", *beta);
            c.positive("pulse.t_scale", *t_scale);
            c.positive("pulse.half_width", *half_width);
            c.finite("pulse.center", *center);
        }
        PulseConfig::Gaussian {
            amplitude,
            center,
            width,
            window,
        } => {
            c.finite("pulse.amplitude", *amplitude);
            c.finite("pulse.center", *center);
            c.positive("pulse.width", *width);
            if !(window.1 > window.0) {
                c.issues.push(format!(
                    "pulse.window: end must exceed start, got [{}, {}]",
                    window.0, window.1
                ));
            }
        }
        PulseConfig::Constant { value, window } => {
            c.finite("pulse.value", *value);
            if !(window.1 > window.0) {
                c.issues.push(format!(
                    "pulse.window: end must exceed start, got [{}, {}]",
                    window.0, window.1
                ));
            }
        }
    }
}

fn check_plan(c: &mut Checker, p: &PlanConfig) {
    if let Some(e) = &p.excite {
        check_ae(c, "plan.excite", e.peak, e.beta, e.t_scale, e.window_factor);
    }
    if let Some(s) = &p.swap {
        check_ae(c, "plan.swap", s.peak, s.beta, s.t_scale, s.window_factor);
    }
    if let Some(b) = &p.bell {
        check_bell(c, "plan.bell", b);
    }
}

fn check_grid(c: &mut Checker, g: &GridConfig) {
    c.positive("grid.g1_start", g.g1_start);
    c.positive("grid.t1_start", g.t1_start);
    if !(g.g1_end > g.g1_start) {
        c.issues.push(format!(
            "grid.g1_end: must exceed g1_start ({}), got {}",
            g.g1_start, g.g1_end
        ));
    }
    if !(g.t1_end > g.t1_start) {
        c.issues.push(format!(
            "grid.t1_end: must exceed t1_start ({}), got {}",
            g.t1_start, g.t1_end
        ));
    }
    c.at_least("grid.g1_count", g.g1_count, 2);
    c.at_least("grid.t1_count", g.t1_count, 2);
    c.positive("grid.beta", g.beta);
    c.positive("grid.window_factor", g.window_factor);
    if g.modes.is_empty() {
        c.issues.push("grid.modes: must name at least one mode".into());
    }
}

fn check_tcq(c: &mut Checker, t: &TcqConfig) {
    c.positive("tcq.e_c[0]", t.e_c.0);
    c.positive("tcq.e_c[1]", t.e_c.1);
    c.positive("tcq.e_j[0]", t.e_j.0);
    c.positive("tcq.e_j[1]", t.e_j.1);
    c.nonnegative("tcq.e_i", t.e_i);
    c.finite("tcq.g[0]", t.g.0);
    c.finite("tcq.g[1]", t.g.1);
}

/// Resolve the unit convention, recording misuse. A missing block falls back
/// to 2*pi*MHz with a notice so silent misreads cannot happen.
fn resolve_units(block: Option<&UnitsConfig>, c: &mut Checker) -> Units {
    match block {
        None => {
            eprintln!("note: no units block in the config; frequencies are read as MHz and scaled by 2*pi");
            Units {
                factor: TWO_PI * 1e-3,
            }
        }
        Some(u) => match u.frequency {
            FrequencyUnit::Mhz => Units {
                factor: if u.times_two_pi.unwrap_or(true) {
                    TWO_PI * 1e-3
                } else {
                    1e-3
                },
            },
            FrequencyUnit::RadPerNs => {
                if u.times_two_pi.is_some() {
                    c.issues.push(
                        "units.times_two_pi: not applicable when frequency = rad_per_ns".into(),
                    );
                }
                Units { factor: 1.0 }
            }
        },
    }
}

pub struct Loaded {
    pub config: RawConfig,
    pub units: Units,
}

/// Parse and fully validate a config file. Every semantic problem is
/// reported, each naming the offending key path.
pub fn load(path: &std::path::Path) -> Result<Loaded, crate::error::CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::io(path, e))?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|e| {
        crate::error::CliError::config(format!("{}: {e}", path.display()), Vec::new())
    })?;

    let mut checker = Checker { issues: Vec::new() };
    let units = resolve_units(raw.units.as_ref(), &mut checker);
    if let Some(t) = raw.tolerance {
        checker.positive("tolerance", t);
    }
    if let Some(s) = raw.samples {
        checker.at_least("samples", s, 2);
    }
    if let Some(s) = &raw.stage {
        check_stage(&mut checker, s);
    }
    if let Some(p) = &raw.pulse {
        check_pulse(&mut checker, p);
    }
    if let Some(p) = &raw.plan {
        check_plan(&mut checker, p);
    }
    if let Some(g) = &raw.grid {
        check_grid(&mut checker, g);
    }
    if let Some(t) = &raw.tcq {
        check_tcq(&mut checker, t);
    }

    if !checker.issues.is_empty() {
        let n = checker.issues.len();
        return Err(crate::error::CliError::config(
            format!(
                "{}: {n} validation error{}",
                path.display(),
                if n == 1 { "" } else { "s" }
            ),
            checker.issues,
        ));
    }
    Ok(Loaded { config: raw, units })
}

pub use parse_helpers::*;

mod parse_helpers {
    use super::*;
    use noon_sta::stage::{CavityId, QutritId};

    /// Level pair from validated strings; call only after `load`.
    pub fn level_pair(levels: &(String, String), topology: Topology) -> (Level, Level) {
        (
            parse_level(&levels.0, topology).expect("validated"),
            parse_level(&levels.1, topology).expect("validated"),
        )
    }

    pub fn qutrit_id(n: u8) -> QutritId {
        match n {
            1 => QutritId::Q1,
            _ => QutritId::Q2,
        }
    }

    pub fn cavity_id(name: &str) -> CavityId {
        match name {
            "a" => CavityId::A,
            _ => CavityId::B,
        }
    }
}
