//! Fidelity landscapes of the photon-swap stage over peak coupling and sweep
//! time, for the corrected (sta), bare adiabatic (app) and resonant (ro)
//! realizations. Each grid point is an independent integration, so the scan
//! parallelizes trivially; a sequential path is kept behind the `parallel`
//! feature for reproducibility checks and constrained builds.

use std::time::Instant;

use crate::hilbert::{build_basis, fidelity, Level, StateVector, Topology};
use crate::pulse::{ae_area, PulsePair};
use crate::stage::{stage_swap, CavityId, QutritId, StageMode};
use crate::dynamics::{evolve, EvolveOptions};
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct SweepGrid {
    /// peak coupling range, rad/ns
    pub g1_start: f64,
    pub g1_end: f64,
    pub g1_count: usize,
    /// sweep time-scale range, ns
    pub t1_start: f64,
    pub t1_end: f64,
    pub t1_count: usize,
    /// detuning scale of the stage template, rad/ns
    pub beta: f64,
    /// window half-width in units of the sweep time-scale
    pub window_factor: f64,
    /// targeted cavity rung
    pub rung: usize,
    pub modes: Vec<StageMode>,
}

impl SweepGrid {
    /// The published landscape: 2*pi*(60..160) MHz by 0.5..4 ns, 26 x 26.
    pub fn landscape_default() -> SweepGrid {
        SweepGrid {
            g1_start: crate::TWO_PI * 0.060,
            g1_end: crate::TWO_PI * 0.160,
            g1_count: 26,
            t1_start: 0.5,
            t1_end: 4.0,
            t1_count: 26,
            beta: crate::TWO_PI * 0.100,
            window_factor: 4.0,
            rung: 0,
            modes: vec![StageMode::Sta, StageMode::App, StageMode::Ro],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.g1_count < 2 || self.t1_count < 2 {
            return Err(Error::InvalidArgument(
                "sweep grid needs at least 2 points per axis".into(),
            ));
        }
        if !(self.g1_end > self.g1_start) || !(self.t1_end > self.t1_start) {
            return Err(Error::InvalidArgument("sweep ranges must be nonempty".into()));
        }
        if self.window_factor <= 0.0 || self.beta <= 0.0 {
            return Err(Error::InvalidArgument(
                "sweep stage template needs positive beta and window factor".into(),
            ));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidArgument("no sweep modes requested".into()));
        }
        Ok(())
    }

    pub fn g1_values(&self) -> Vec<f64> {
        linspace(self.g1_start, self.g1_end, self.g1_count)
    }

    pub fn t1_values(&self) -> Vec<f64> {
        linspace(self.t1_start, self.t1_end, self.t1_count)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}

#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub g1: f64,
    pub t1: f64,
    pub f_sta: f64,
    pub f_app: f64,
    pub f_ro: f64,
    /// "ok" or the error code of the first failing mode
    pub status: String,
    pub wall_ms: f64,
}

/// One landscape point: photon swap |e,a,k,0> -> |g,a,k+1,0> on the V
/// register with the spectator qutrit parked in its flag level.
pub fn sweep_point(grid: &SweepGrid, g1: f64, t1: f64, tol: f64) -> SweepRecord {
    let started = Instant::now();
    let cutoff = grid.rung + 1;
    let basis = build_basis(cutoff, Topology::Vtype);

    let mut fids = [f64::NAN; 3];
    let mut status = "ok".to_string();

    let psi0 = StateVector::basis_state(basis, 1, 2, grid.rung, 0);
    let mut target = StateVector::zero(basis);
    target.amplitudes[basis.index_of(0, 2, grid.rung + 1, 0)] = crate::C64::new(1.0, 0.0);

    for mode in &grid.modes {
        let slot = match mode {
            StageMode::Sta | StageMode::StaLab => 0,
            StageMode::App => 1,
            StageMode::Ro => 2,
        };
        let run = || -> Result<f64> {
            let pair = PulsePair::ae(g1, grid.beta, t1, grid.window_factor * t1, 0.0);
            let stage = stage_swap(
                &basis,
                QutritId::Q1,
                CavityId::A,
                (Level::G, Level::E),
                &pair,
                grid.rung,
                true,
                *mode,
            )?;
            let opts = EvolveOptions {
                tol,
                ..EvolveOptions::default()
            };
            let out = evolve(&stage, &psi0, &opts)?;
            fidelity(&out.final_state, &target)
        };
        match run() {
            Ok(f) => fids[slot] = f,
            Err(e) => {
                if status == "ok" {
                    status = e.code().to_string();
                }
            }
        }
    }

    SweepRecord {
        g1,
        t1,
        f_sta: fids[0],
        f_app: fids[1],
        f_ro: fids[2],
        status,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    }
}

fn point_list(grid: &SweepGrid) -> Vec<(f64, f64)> {
    let g1s = grid.g1_values();
    let t1s = grid.t1_values();
    let mut pts = Vec::with_capacity(g1s.len() * t1s.len());
    for &g1 in &g1s {
        for &t1 in &t1s {
            pts.push((g1, t1));
        }
    }
    pts
}

/// Scan the grid, one record per point in row-major (G1 outer) order.
/// Per-point failures land in the record status instead of aborting the scan.
pub fn run_sweep(grid: &SweepGrid, tol: f64) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    let pts = point_list(grid);
    #[cfg(feature = "parallel")]
    {
        Ok(pts
            .par_iter()
            .map(|&(g1, t1)| sweep_point(grid, g1, t1, tol))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(pts
            .iter()
            .map(|&(g1, t1)| sweep_point(grid, g1, t1, tol))
            .collect())
    }
}

/// Same scan, forced sequential regardless of the parallel feature.
pub fn run_sweep_serial(grid: &SweepGrid, tol: f64) -> Result<Vec<SweepRecord>> {
    grid.validate()?;
    Ok(point_list(grid)
        .iter()
        .map(|&(g1, t1)| sweep_point(grid, g1, t1, tol))
        .collect())
}

/// Points of the grid's (G1, T1) plane where the coupling envelope area
/// reaches pi, the full-transfer condition of the resonant mode. The window
/// scales with T1, so the area is linear in T1 and the contour is the
/// hyperbola T1 = pi / (G1 * c), c = (8/pi) atan(tanh(pi w / 4)).
pub fn ro_area_contour(grid: &SweepGrid) -> Vec<(f64, f64)> {
    let c = ae_area(1.0, 1.0, grid.window_factor);
    let mut out = Vec::new();
    for g1 in grid.g1_values() {
        let t1 = std::f64::consts::PI / (g1 * c);
        if t1 >= grid.t1_start && t1 <= grid.t1_end {
            out.push((g1, t1));
        }
    }
    out
}

/// Resonant transfer probability predicted from the envelope area.
pub fn ro_transfer_fidelity(area: f64) -> f64 {
    let s = (0.5 * area).sin();
    s * s
}
