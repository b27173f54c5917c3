//! Grid evaluation. Points run on a worker pool; results come back in grid
//! order, so output never depends on scheduling.

use std::f64::consts::TAU;

use giantwg_core::lindblad::MARKOV_COS_LIMIT;
use giantwg_core::{
    build_liouvillian, g2_transmitted_eval, liouvillian_spectrum, scatter_single, t_matrix,
    steady_state, two_photon_s, Backend, Correlator, DriveConfig, Error, SystemParams,
};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, Target};

/// One observable at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub coords: Vec<f64>,
    pub observable: String,
    /// `None` when the point failed.
    pub value: Option<[f64; 2]>,
    /// `ok` or the error code.
    pub flag: String,
    /// Which two-photon backend produced the value, where one was involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub target: Target,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub records: Vec<Record>,
    pub metadata: Metadata,
}

pub const VERSION: &str = concat!("giantwg ", env!("CARGO_PKG_VERSION"));

type Outcome = Result<(C64, Option<Backend>), Error>;

/// Evaluates every observable at every grid point. Per-point failures become
/// flagged records; nothing here aborts the sweep.
pub fn run_sweep(config: &Config) -> SweepResult {
    let grid = config.grid();
    let evaluate = |coords: &Vec<f64>| -> Vec<Record> {
        let point = config.point_at(coords);
        let outcomes = match config.resolve(&point) {
            Ok((params, drive)) => evaluate_point(config, &params, &drive, point.tau, point.p1),
            Err(e) => vec![Err(e); config.sweep.observables.len()],
        };
        config
            .sweep
            .observables
            .iter()
            .zip(outcomes)
            .map(|(name, outcome)| match outcome {
                Ok((v, backend)) => Record {
                    coords: coords.clone(),
                    observable: name.clone(),
                    value: Some([v.re, v.im]),
                    flag: "ok".into(),
                    backend,
                },
                Err(e) => Record {
                    coords: coords.clone(),
                    observable: name.clone(),
                    value: None,
                    flag: e.code().into(),
                    backend: None,
                },
            })
            .collect()
    };
    let records: Vec<Record> = with_pool(|| grid.par_iter().flat_map_iter(evaluate).collect());
    SweepResult {
        axes: config.sweep.axes.iter().map(|a| a.name.name().to_string()).collect(),
        records,
        metadata: Metadata {
            version: VERSION.into(),
            target: config.sweep.target,
            config: config.clone(),
        },
    }
}

/// Runs `f` on a pool capped by `GIANTWG_THREADS` when that is set.
fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("GIANTWG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Grid points of a reflected-density sweep whose `k_i d` is not a multiple
/// of `2π`, where the lab-frame correlator carries a nontrivial phase.
pub fn frame_phase_points(config: &Config) -> usize {
    if config.sweep.target != Target::ReflectedCurve {
        return 0;
    }
    config
        .grid()
        .iter()
        .map(|c| config.point_at(c))
        .filter(|p| {
            let r = (p.k_i * p.d).rem_euclid(TAU);
            r.min(TAU - r) > 1e-9 * TAU.max(p.k_i.abs() * p.d)
        })
        .count()
}

fn evaluate_point(config: &Config, params: &SystemParams, drive: &DriveConfig, tau: f64, p1: f64) -> Vec<Outcome> {
    let obs = &config.sweep.observables;
    let all = |e: Error| obs.iter().map(|_| Err(e.clone())).collect::<Vec<_>>();
    let target = config.sweep.target;
    if target.is_markovian() && params.phi.cos().abs() > MARKOV_COS_LIMIT {
        return all(Error::InvalidParameter {
            name: "phi",
            reason: format!("the master equation needs phi = ±π/2, got {}", params.phi),
        });
    }
    let real = |v: f64| (C64::new(v, 0.0), None);
    match target {
        Target::SinglePhoton => match scatter_single(params, drive.k_i, drive.direction) {
            Err(e) => all(e),
            Ok(a) => obs
                .iter()
                .map(|o| {
                    Ok((
                        match o.as_str() {
                            "t" => a.t,
                            "r" => a.r,
                            "sigma" => a.sigma,
                            _ => a.green,
                        },
                        None,
                    ))
                })
                .collect(),
        },
        Target::G2Map => obs
            .iter()
            .map(|o| match o.as_str() {
                "g2" => g2_transmitted_eval(params, drive.k_i, tau).map(|e| (C64::new(e.value, 0.0), Some(e.diag.backend))),
                _ => t_matrix(params, drive.k_i, drive.k_i).map(|e| (e.value, Some(e.diag.backend))),
            })
            .collect(),
        Target::FluorescenceSlice => match two_photon_s(params, drive.k_i, drive.k_i) {
            Err(e) => all(e),
            Ok(amp) => {
                let backend = Some(amp.diag.backend);
                obs.iter().map(|_| amp.fluorescence(p1).map(|v| (v, backend))).collect()
            }
        },
        Target::SteadyCurve => match Correlator::new(params, drive) {
            Err(e) => all(e),
            Ok(corr) => obs
                .iter()
                .map(|o| match o.as_str() {
                    "n" => corr.observables().map(|x| real(x.n)).or_else(|e| match e {
                        // the vacuum is a legitimate steady state with n = 0
                        Error::UndefinedG2(_) => Ok(real(0.0)),
                        e => Err(e),
                    }),
                    "g2" => corr.observables().map(|x| real(x.g2)),
                    "b_mean" => corr.observables().map(|x| (x.b_mean, None)).or_else(|e| match e {
                        Error::UndefinedG2(_) => Ok(real(0.0)),
                        e => Err(e),
                    }),
                    "transmitted_g2" => corr.transmitted_g2().map(real),
                    _ => Ok(real(corr.state.top_population)),
                })
                .collect(),
        },
        Target::ReflectedCurve => match Correlator::new(params, drive) {
            Err(e) => all(e),
            Ok(corr) => obs
                .iter()
                .map(|o| match o.as_str() {
                    "rho_L" => corr.reflected_density().map(real),
                    _ => corr.b_dag_b(params.d).map(|c| (c, None)),
                })
                .collect(),
        },
        Target::GapCurve => {
            let l = build_liouvillian(params, drive);
            // the steady solve is cheap next to the eigenvalues and catches a
            // cutoff that truncates the state
            match steady_state(&l).and_then(|_| liouvillian_spectrum(&l, 2)) {
                Err(e) => all(e),
                Ok(s) => obs.iter().map(|_| Ok(real(s.gap))).collect(),
            }
        }
    }
}
