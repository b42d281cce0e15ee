//! Command implementations. Every command reads one validated config, runs
//! the engine, and emits either deterministic CSV or pretty JSON. Output is
//! staged in memory first so a half-written file never reaches disk on a
//! physics error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use noon_sta::dynamics::{evolve, EvolutionResult, EvolveOptions};
use noon_sta::emit::{write_pulse_csv, write_sweep_csv, write_synthesis_csv, write_trajectory_csv};
use noon_sta::hilbert::{fidelity, BasisSpec, StateVector, Topology};
use noon_sta::protocol::{
    plan_noon, run_protocol, AeStageParams, BellParams, ProtocolParams, RunOptions,
};
use noon_sta::pulse::{PulsePair, PulseShape, Window};
use noon_sta::sta::{RealizableFrame, StagePulses};
use noon_sta::stage::{
    stage_qutrit_drive, stage_qutrit_qutrit, stage_swap, StageHamiltonian, StageMode,
};
use noon_sta::sweep::{run_sweep, run_sweep_serial, SweepGrid};
use noon_sta::tcq::{effective_qutrit, TcqParams};

use crate::config::{
    self, cavity_id, level_pair, qutrit_id, Loaded, PulseConfig, StageConfig, Units,
};
use crate::error::CliError;
use crate::{Cli, Command};

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_SAMPLES: usize = 801;
/// Trajectory CSV resolution: rows per stage window.
const TRAJECTORY_POINTS: f64 = 400.0;
/// Populations below this never make it into a report.
const POPULATION_FLOOR: f64 = 1e-6;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, trajectory } => simulate(&config, trajectory.as_deref()),
        Command::Noon { config, out } => noon(&config, &out),
        Command::Sweep { config, out, jobs } => sweep(&config, &out, jobs),
        Command::Synthesize { config, out } => synthesize(&config, &out),
        Command::PulseDump { config, out } => pulse_dump(&config, &out),
        Command::TcqMap { config, out } => tcq_map(&config, &out),
    }
}

fn require<'a, T>(block: Option<&'a T>, key: &str, command: &str) -> Result<&'a T, CliError> {
    block.ok_or_else(|| {
        CliError::config(
            format!("the {command} command needs a `{key}` block in the config"),
            vec![format!("{key}: missing")],
        )
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Centered window, so single-stage output plots symmetrically around the
/// pulse peak like the protocol's own stage frames.
fn ae_pair(units: Units, peak: f64, beta: f64, t_scale: f64, window_factor: f64) -> PulsePair {
    PulsePair::ae(
        units.freq(peak),
        units.freq(beta),
        t_scale,
        window_factor * t_scale,
        0.0,
    )
}

fn stage_pair(s: &StageConfig, units: Units) -> PulsePair {
    if let Some(d) = &s.drive {
        ae_pair(units, d.peak, d.beta, d.t_scale, d.window_factor)
    } else if let Some(x) = &s.exchange {
        PulsePair::bell(
            units.freq(x.g0),
            x.t0,
            x.tau,
            units.freq(x.d0),
            x.m,
            x.half_width,
            0.0,
        )
    } else {
        let w = s.swap.as_ref().expect("validated: one stage family");
        ae_pair(units, w.peak, w.beta, w.t_scale, w.window_factor)
    }
}

fn build_stage(s: &StageConfig, units: Units) -> Result<(BasisSpec, StageHamiltonian), CliError> {
    let basis = BasisSpec::new(s.topology, s.cutoff);
    let stage = if let Some(d) = &s.drive {
        let pulses = StagePulses::synthesize(stage_pair(s, units))?;
        stage_qutrit_drive(
            &basis,
            qutrit_id(d.qutrit),
            level_pair(&d.levels, s.topology),
            &pulses,
            s.mode,
        )?
    } else if let Some(x) = &s.exchange {
        let pulses = StagePulses::synthesize(stage_pair(s, units))?;
        stage_qutrit_qutrit(&basis, level_pair(&x.levels, s.topology), &pulses, s.mode)?
    } else {
        let w = s.swap.as_ref().expect("validated: one stage family");
        stage_swap(
            &basis,
            qutrit_id(w.qutrit),
            cavity_id(&w.cavity),
            level_pair(&w.levels, s.topology),
            &stage_pair(s, units),
            w.rung,
            w.rescale,
            s.mode,
        )?
    };
    Ok((basis, stage))
}

#[derive(Serialize, Deserialize)]
pub struct StatePopulation {
    pub state: String,
    pub population: f64,
}

#[derive(Serialize, Deserialize)]
pub struct SimulateReport {
    pub stage: String,
    pub mode: StageMode,
    pub duration_ns: f64,
    pub norm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub populations: Vec<StatePopulation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_fidelity: Option<f64>,
}

fn simulate(config_path: &Path, trajectory: Option<&Path>) -> Result<(), CliError> {
    let Loaded { config, units } = config::load(config_path)?;
    let s = require(config.stage.as_ref(), "stage", "simulate")?;
    let (basis, stage) = build_stage(s, units)?;

    let initial = match &s.initial {
        Some(label) => StateVector::from_label(basis, label)?,
        None => StateVector::basis_state(basis, 0, 0, 0, 0),
    };
    let opts = EvolveOptions {
        tol: config.tolerance.unwrap_or(DEFAULT_TOL),
        sample_spacing: trajectory.map(|_| stage.window().length() / TRAJECTORY_POINTS),
        ..EvolveOptions::default()
    };
    let result = evolve(&stage, &initial, &opts)?;

    if let Some(path) = trajectory {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &result, 1e-9).expect("in-memory write");
        write_file(path, &buf)?;
    }

    let report = simulate_report(s, basis, &stage, &result)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn simulate_report(
    s: &StageConfig,
    basis: BasisSpec,
    stage: &StageHamiltonian,
    result: &EvolutionResult,
) -> Result<SimulateReport, CliError> {
    let labels = basis.labels();
    let mut populations = Vec::new();
    for (i, amp) in result.final_state.amplitudes.iter().enumerate() {
        let p = amp.norm_sqr();
        if p > POPULATION_FLOOR {
            populations.push(StatePopulation {
                state: labels[i].clone(),
                population: p,
            });
        }
    }
    let target_fidelity = match &s.target {
        Some(label) => {
            let target = StateVector::from_label(basis, label)?;
            Some(fidelity(&result.final_state, &target)?)
        }
        None => None,
    };
    Ok(SimulateReport {
        stage: stage.label().to_string(),
        mode: s.mode,
        duration_ns: stage.window().length(),
        norm_drift: result.norm_drift,
        accepted_steps: result.accepted_steps,
        rejected_steps: result.rejected_steps,
        populations,
        target_fidelity,
    })
}

#[derive(Serialize, Deserialize)]
pub struct StageReport {
    pub label: String,
    pub start_ns: f64,
    pub end_ns: f64,
    pub support_population: f64,
    pub norm_drift: f64,
}

#[derive(Serialize, Deserialize)]
pub struct NoonReport {
    pub topology: Topology,
    pub n: usize,
    pub mode: StageMode,
    pub fidelity: f64,
    pub optimal_phase: f64,
    pub total_duration_ns: f64,
    pub norm_drift: f64,
    pub stages: Vec<StageReport>,
}

fn noon(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let Loaded { config, units } = config::load(config_path)?;
    let p = require(config.plan.as_ref(), "plan", "noon")?;

    let defaults = ProtocolParams::default();
    let params = ProtocolParams {
        excite: p
            .excite
            .map(|b| AeStageParams {
                peak: units.freq(b.peak),
                beta: units.freq(b.beta),
                t_scale: b.t_scale,
                window_factor: b.window_factor,
            })
            .unwrap_or(defaults.excite),
        swap: p
            .swap
            .map(|b| AeStageParams {
                peak: units.freq(b.peak),
                beta: units.freq(b.beta),
                t_scale: b.t_scale,
                window_factor: b.window_factor,
            })
            .unwrap_or(defaults.swap),
        bell: p
            .bell
            .map(|b| BellParams {
                g0: units.freq(b.g0),
                t0: b.t0,
                tau: b.tau,
                d0: units.freq(b.d0),
                m: b.m,
                half_width: b.half_width,
            })
            .unwrap_or(defaults.bell),
        rung_rescale: p.rung_rescale,
        mode: p.mode,
    };

    let plan = plan_noon(p.topology, p.n, &params)?;
    let opts = RunOptions {
        tol: config.tolerance.unwrap_or(DEFAULT_TOL),
        ..RunOptions::default()
    };
    let result = run_protocol(&plan, &opts)?;

    let report = NoonReport {
        topology: p.topology,
        n: p.n,
        mode: p.mode,
        fidelity: result.fidelity,
        optimal_phase: result.optimal_phase,
        total_duration_ns: result.total_duration,
        norm_drift: result.norm_drift,
        stages: result
            .stage_records
            .iter()
            .map(|r| StageReport {
                label: r.label.clone(),
                start_ns: r.start,
                end_ns: r.end,
                support_population: r.support_population,
                norm_drift: r.norm_drift,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_file(out, text.as_bytes())
}

fn sweep(config_path: &Path, out: &Path, jobs: Option<usize>) -> Result<(), CliError> {
    if jobs == Some(0) {
        return Err(CliError::config(
            "--jobs: must be at least 1",
            vec!["jobs: must be at least 1, got 0".into()],
        ));
    }
    let Loaded { config, units } = config::load(config_path)?;
    let g = require(config.grid.as_ref(), "grid", "sweep")?;

    let grid = SweepGrid {
        g1_start: units.freq(g.g1_start),
        g1_end: units.freq(g.g1_end),
        g1_count: g.g1_count,
        t1_start: g.t1_start,
        t1_end: g.t1_end,
        t1_count: g.t1_count,
        beta: units.freq(g.beta),
        window_factor: g.window_factor,
        rung: g.rung,
        modes: g.modes.clone(),
    };
    let tol = config.tolerance.unwrap_or(DEFAULT_TOL);

    let records = match jobs {
        None => run_sweep(&grid, tol)?,
        Some(1) => run_sweep_serial(&grid, tol)?,
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| {
                    CliError::Runtime(noon_sta::Error::InvalidArgument(format!(
                        "worker pool: {e}"
                    )))
                })?;
            pool.install(|| run_sweep(&grid, tol))?
        }
    };

    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &records).expect("in-memory write");
    write_file(out, &buf)
}

fn synthesize(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let Loaded { config, units } = config::load(config_path)?;
    let s = require(config.stage.as_ref(), "stage", "synthesize")?;

    let frame = RealizableFrame::synthesize(stage_pair(s, units))?;
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);

    let mut buf = Vec::new();
    write_synthesis_csv(&mut buf, &frame, samples)?;
    write_file(out, &buf)
}

fn pulse_dump(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let Loaded { config, units } = config::load(config_path)?;
    let p = require(config.pulse.as_ref(), "pulse", "pulse-dump")?;

    let shape = match p {
        PulseConfig::AeCoupling {
            peak,
            t_scale,
            half_width,
            center,
        } => PulseShape::ae_amplitude(
            units.freq(*peak),
            *t_scale,
            Window::centered(*center, *half_width),
        ),
        PulseConfig::AeDetuning {
            beta,
            t_scale,
            half_width,
            center,
        } => PulseShape::ae_detuning(
            units.freq(*beta),
            *t_scale,
            Window::centered(*center, *half_width),
        ),
        PulseConfig::Gaussian {
            amplitude,
            center,
            width,
            window,
        } => PulseShape::gaussian(
            units.freq(*amplitude),
            *center,
            *width,
            Window::new(window.0, window.1),
        ),
        PulseConfig::Constant { value, window } => {
            PulseShape::constant(units.freq(*value), Window::new(window.0, window.1))
        }
    };
    let samples = config.samples.unwrap_or(DEFAULT_SAMPLES);

    let mut buf = Vec::new();
    write_pulse_csv(&mut buf, &shape, samples).expect("in-memory write");
    write_file(out, &buf)
}

#[derive(Serialize, Deserialize)]
pub struct TcqBareReport {
    pub omega: (f64, f64),
    pub delta: (f64, f64),
    pub j: f64,
}

#[derive(Serialize, Deserialize)]
pub struct TcqSpectrumReport {
    pub omega: (f64, f64),
    pub delta: (f64, f64),
    pub delta_c: f64,
}

#[derive(Serialize, Deserialize)]
pub struct TcqReport {
    /// Unit of every frequency below.
    pub frequency_unit: String,
    pub bare: TcqBareReport,
    pub lambda: f64,
    pub spectrum: TcqSpectrumReport,
    pub dressed_g: (f64, f64),
    pub g_plus_zero_lambda: f64,
    pub warnings: Vec<String>,
}

fn tcq_map(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let Loaded { config, units } = config::load(config_path)?;
    let t = require(config.tcq.as_ref(), "tcq", "tcq-map")?;

    let params = TcqParams {
        e_c: (units.freq(t.e_c.0), units.freq(t.e_c.1)),
        e_j: (units.freq(t.e_j.0), units.freq(t.e_j.1)),
        e_i: units.freq(t.e_i),
        g: (units.freq(t.g.0), units.freq(t.g.1)),
    };
    let (q, warnings) = effective_qutrit(&params)?;

    let report = TcqReport {
        frequency_unit: "rad_per_ns".into(),
        bare: TcqBareReport {
            omega: q.bare.omega,
            delta: q.bare.delta,
            j: q.bare.j,
        },
        lambda: q.lambda,
        spectrum: TcqSpectrumReport {
            omega: q.spectrum.omega,
            delta: q.spectrum.delta,
            delta_c: q.spectrum.delta_c,
        },
        dressed_g: q.dressed_g,
        g_plus_zero_lambda: q.g_plus_zero_lambda,
        warnings: warnings.iter().map(|w| w.to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_file(out, text.as_bytes())
}
