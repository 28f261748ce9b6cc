//! Parallel evaluation of sweep points.
//!
//! Semiclassical curves are one job each because consecutive points share a
//! branch hint; master-equation points are independent jobs. Every row is
//! tagged with its position in the sequential sweep order and sorted before
//! it is returned, so the output does not depend on the worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use qdcavity_core::spectra::{
    semiclassical_power_curve, solve_point, sweep_curve, Cavity, Method, SpectrumRow, SpectrumTable, SweepOptions,
};
use qdcavity_core::SystemParams;

pub fn pool(workers: usize) -> Result<ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build()
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Curve {
        outer: usize,
        method: usize,
        cavity: usize,
    },
    Point {
        outer: usize,
        method: usize,
        cavity: usize,
        inner: usize,
    },
}

type Key = (usize, usize, usize, usize);

fn jobs(outer: usize, inner: usize, methods: &[Method], cavities: &[Cavity]) -> Vec<Job> {
    let mut out = Vec::new();
    for o in 0..outer {
        for (mi, &m) in methods.iter().enumerate() {
            for ci in 0..cavities.len() {
                match m {
                    Method::Semiclassical => out.push(Job::Curve {
                        outer: o,
                        method: mi,
                        cavity: ci,
                    }),
                    Method::MasterEquation => out.extend((0..inner).map(|i| Job::Point {
                        outer: o,
                        method: mi,
                        cavity: ci,
                        inner: i,
                    })),
                }
            }
        }
    }
    out
}

fn collect(pool: &ThreadPool, jobs: Vec<Job>, run: impl Fn(Job) -> Vec<(Key, SpectrumRow)> + Sync) -> Vec<SpectrumRow> {
    let mut keyed: Vec<(Key, SpectrumRow)> = pool.install(|| jobs.into_par_iter().flat_map_iter(&run).collect());
    keyed.sort_by_key(|(k, _)| *k);
    keyed.into_iter().map(|(_, row)| row).collect()
}

/// Detuning spectra in the order powers, methods, cavities, detuning.
pub fn spectrum(
    pool: &ThreadPool,
    hot: &SystemParams,
    powers: &[f64],
    grid: &[f64],
    methods: &[Method],
    cavities: &[Cavity],
    options: &SweepOptions,
) -> SpectrumTable {
    let rows = collect(
        pool,
        jobs(powers.len(), grid.len(), methods, cavities),
        |job| match job {
            Job::Curve { outer, method, cavity } => {
                sweep_curve(hot, cavities[cavity], methods[method], powers[outer], grid, options)
                    .into_iter()
                    .enumerate()
                    .map(|(k, row)| ((outer, method, cavity, k), row))
                    .collect()
            }
            Job::Point {
                outer,
                method,
                cavity,
                inner,
            } => vec![(
                (outer, method, cavity, inner),
                solve_point(
                    hot,
                    cavities[cavity],
                    methods[method],
                    grid[inner],
                    powers[outer],
                    options,
                    None,
                ),
            )],
        },
    );
    SpectrumTable {
        topology: hot.topology,
        rows,
    }
}

/// Power sweeps at one detuning in the order methods, cavities, power.
pub fn power_sweep(
    pool: &ThreadPool,
    hot: &SystemParams,
    omega_detuning: f64,
    powers: &[f64],
    methods: &[Method],
    cavities: &[Cavity],
    options: &SweepOptions,
) -> SpectrumTable {
    let rows = collect(pool, jobs(1, powers.len(), methods, cavities), |job| match job {
        Job::Curve { method, cavity, .. } => {
            semiclassical_power_curve(hot, cavities[cavity], omega_detuning, powers, options)
                .into_iter()
                .enumerate()
                .map(|(k, row)| ((0, method, cavity, k), row))
                .collect()
        }
        Job::Point {
            method, cavity, inner, ..
        } => vec![(
            (0, method, cavity, inner),
            solve_point(
                hot,
                cavities[cavity],
                methods[method],
                omega_detuning,
                powers[inner],
                options,
                None,
            ),
        )],
    });
    SpectrumTable {
        topology: hot.topology,
        rows,
    }
}
