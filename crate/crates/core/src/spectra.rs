//! Frequency and power sweeps over both solvers, and the observables built
//! on them: Faraday rotation, saturation windows and dressed-state
//! resonances.
//!
//! Detunings are `(ω − ω_c)/κ_tot` throughout. Every row of a
//! [`SpectrumTable`] can be recomputed from its own inputs; semiclassical
//! rows depend on neighbouring rows only under
//! [`BranchMode::FrequencyContinued`].

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::linalg::eigenvalues_2x2;
use crate::liouvillian::{build_hamiltonian_dense, coefficients_qo, SteadyStateOptions};
use crate::operators::{HilbertLayout, QdState};
use crate::semiclassical::{continue_in_power, select_branch, BranchMode, BranchSelection, CONTINUATION_START_POWER};
use crate::{Drive, Error, Result, SystemParams, Topology, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Semiclassical,
    MasterEquation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Semiclassical => "semiclassical",
            Method::MasterEquation => "master_equation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cavity {
    Hot,
    Cold,
}

impl Cavity {
    pub fn as_str(self) -> &'static str {
        match self {
            Cavity::Hot => "hot",
            Cavity::Cold => "cold",
        }
    }

    /// The parameter set seen by a probe of this polarization.
    pub fn params(self, hot: &SystemParams) -> SystemParams {
        match self {
            Cavity::Hot => *hot,
            Cavity::Cold => hot.cold(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub branch_mode: BranchMode,
    pub steady_state: SteadyStateOptions,
}

/// Solver output at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub r: C64,
    pub t: Option<C64>,
    pub sigma_z: f64,
    pub n_cavity: f64,
    pub branch_id: Option<usize>,
    pub branch_count: Option<usize>,
    pub cutoff: Option<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub omega_detuning: f64,
    pub power_norm: f64,
    pub method: Method,
    pub cavity: Cavity,
    pub result: Result<PointValues>,
}

impl SpectrumRow {
    pub fn values(&self) -> Option<&PointValues> {
        self.result.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub topology: Topology,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn curve(&self, power_norm: f64, method: Method, cavity: Cavity) -> impl Iterator<Item = &SpectrumRow> {
        self.rows
            .iter()
            .filter(move |r| r.power_norm == power_norm && r.method == method && r.cavity == cavity)
    }

    pub fn find(&self, omega_detuning: f64, power_norm: f64, method: Method, cavity: Cavity) -> Option<&SpectrumRow> {
        self.rows.iter().find(|r| {
            r.omega_detuning == omega_detuning && r.power_norm == power_norm && r.method == method && r.cavity == cavity
        })
    }
}

fn semiclassical_values(selection: BranchSelection) -> PointValues {
    let s = selection.solution;
    PointValues {
        r: s.r,
        t: s.t,
        sigma_z: s.sigma_z,
        n_cavity: s.n_cavity,
        branch_id: Some(s.branch_id),
        branch_count: Some(selection.branch_count),
        cutoff: None,
        residual: s.residual,
    }
}

/// One solve. `previous_sigma_z` is only read by the frequency-continued
/// semiclassical mode.
pub fn solve_point(
    hot: &SystemParams,
    cavity: Cavity,
    method: Method,
    omega_detuning: f64,
    power_norm: f64,
    options: &SweepOptions,
    previous_sigma_z: Option<f64>,
) -> SpectrumRow {
    let params = cavity.params(hot);
    let drive = Drive::at_detuning(&params, omega_detuning, power_norm);
    let result = match method {
        Method::Semiclassical => {
            select_branch(&params, &drive, options.branch_mode, previous_sigma_z).map(semiclassical_values)
        }
        Method::MasterEquation => coefficients_qo(&params, &drive, &options.steady_state).map(|q| PointValues {
            r: q.r,
            t: q.t,
            sigma_z: q.state.sigma_z_expect,
            n_cavity: q.state.n_expect,
            branch_id: None,
            branch_count: None,
            cutoff: Some(q.state.cutoff),
            residual: q.state.residual,
        }),
    };
    SpectrumRow {
        omega_detuning,
        power_norm,
        method,
        cavity,
        result,
    }
}

/// One curve over the detuning grid at fixed power, in grid order.
pub fn sweep_curve(
    hot: &SystemParams,
    cavity: Cavity,
    method: Method,
    power_norm: f64,
    grid: &[f64],
    options: &SweepOptions,
) -> Vec<SpectrumRow> {
    let mut previous = None;
    grid.iter()
        .map(|&d| {
            let row = solve_point(hot, cavity, method, d, power_norm, options, previous);
            if let Ok(v) = &row.result {
                previous = Some(v.sigma_z);
            }
            row
        })
        .collect()
}

/// Nonempty, finite and strictly increasing.
pub fn validate_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadGrid(name));
    }
    Ok(())
}

fn validate_powers(powers: &[f64]) -> Result<()> {
    if powers.is_empty() || powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::BadGrid("power"));
    }
    Ok(())
}

/// `n` points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![min],
        _ => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Spectra over the Cartesian product of powers, methods and cavities.
/// Point failures are recorded in the rows; only malformed inputs fail the
/// whole sweep.
pub fn sweep_spectrum(
    hot: &SystemParams,
    powers: &[f64],
    grid: &[f64],
    methods: &[Method],
    cavities: &[Cavity],
    options: &SweepOptions,
) -> Result<SpectrumTable> {
    hot.validate()?;
    validate_grid(grid, "omega")?;
    validate_powers(powers)?;
    let mut rows = Vec::with_capacity(powers.len() * grid.len() * methods.len() * cavities.len());
    for &p in powers {
        for &m in methods {
            for &c in cavities {
                rows.extend(sweep_curve(hot, c, m, p, grid, options));
            }
        }
    }
    Ok(SpectrumTable {
        topology: hot.topology,
        rows,
    })
}

/// Hot-cavity QD inversion over the detuning grid for each power.
pub fn saturation_spectrum(
    hot: &SystemParams,
    powers: &[f64],
    grid: &[f64],
    methods: &[Method],
    options: &SweepOptions,
) -> Result<SpectrumTable> {
    sweep_spectrum(hot, powers, grid, methods, &[Cavity::Hot], options)
}

/// Semiclassical power curve at one detuning, continued in ascending power.
pub fn semiclassical_power_curve(
    hot: &SystemParams,
    cavity: Cavity,
    omega_detuning: f64,
    powers: &[f64],
    options: &SweepOptions,
) -> Vec<SpectrumRow> {
    let params = cavity.params(hot);
    let mut from = (CONTINUATION_START_POWER, -1.0);
    powers
        .iter()
        .map(|&p| {
            let drive = Drive::at_detuning(&params, omega_detuning, p);
            let result = match options.branch_mode {
                BranchMode::PowerContinued | BranchMode::FrequencyContinued => {
                    continue_in_power(&params, &drive, from.0, from.1)
                }
                mode => select_branch(&params, &drive, mode, None),
            };
            if let Ok(sel) = &result {
                from = (p.max(CONTINUATION_START_POWER), sel.solution.sigma_z);
            }
            SpectrumRow {
                omega_detuning,
                power_norm: p,
                method: Method::Semiclassical,
                cavity,
                result: result.map(semiclassical_values),
            }
        })
        .collect()
}

/// Hot and cold responses at a fixed detuning over an increasing power grid.
pub fn power_sweep(
    hot: &SystemParams,
    omega_detuning: f64,
    powers: &[f64],
    methods: &[Method],
    cavities: &[Cavity],
    options: &SweepOptions,
) -> Result<SpectrumTable> {
    hot.validate()?;
    validate_powers(powers)?;
    validate_grid(powers, "power")?;
    if !omega_detuning.is_finite() {
        return Err(Error::BadGrid("omega"));
    }
    let mut rows = Vec::new();
    for &m in methods {
        for &c in cavities {
            match m {
                Method::Semiclassical => {
                    rows.extend(semiclassical_power_curve(hot, c, omega_detuning, powers, options))
                }
                Method::MasterEquation => rows.extend(
                    powers
                        .iter()
                        .map(|&p| solve_point(hot, c, m, omega_detuning, p, options, None)),
                ),
            }
        }
    }
    Ok(SpectrumTable {
        topology: hot.topology,
        rows,
    })
}

/// Wrap an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = libm::remainder(x, 2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Hot/cold comparison at one (ω, P̄, method).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaradayPoint {
    pub omega_detuning: f64,
    pub power_norm: f64,
    pub method: Method,
    /// arg r_cold − arg r_hot, wrapped to (−π, π].
    pub phase_difference: f64,
    /// Half the phase difference.
    pub rotation: f64,
    /// |r_hot| − |r_cold|.
    pub reflectance_contrast: f64,
    /// |t_hot| − |t_cold| for a double-sided cavity.
    pub transmittance_contrast: Option<f64>,
}

pub fn faraday_angle(r_cold: C64, r_hot: C64) -> f64 {
    wrap_phase(r_cold.arg() - r_hot.arg()) / 2.0
}

/// Compare every hot row with its cold counterpart. Pairs where either
/// solve failed are skipped; a hot row with no cold row is an error.
pub fn faraday_rotation(table: &SpectrumTable) -> Result<Vec<FaradayPoint>> {
    let mut out = Vec::new();
    for hot in table.rows.iter().filter(|r| r.cavity == Cavity::Hot) {
        let cold = table
            .find(hot.omega_detuning, hot.power_norm, hot.method, Cavity::Cold)
            .ok_or(Error::MissingCounterpart {
                omega_detuning: hot.omega_detuning,
                power_norm: hot.power_norm,
            })?;
        let (Some(h), Some(c)) = (hot.values(), cold.values()) else {
            continue;
        };
        let phase_difference = wrap_phase(c.r.arg() - h.r.arg());
        out.push(FaradayPoint {
            omega_detuning: hot.omega_detuning,
            power_norm: hot.power_norm,
            method: hot.method,
            phase_difference,
            rotation: phase_difference / 2.0,
            reflectance_contrast: h.r.norm() - c.r.norm(),
            transmittance_contrast: h.t.zip(c.t).map(|(th, tc)| th.norm() - tc.norm()),
        });
    }
    Ok(out)
}

/// Inversion bound defining the non-saturation window.
pub const DEFAULT_WINDOW_THRESHOLD: f64 = -0.95;

/// Largest run of grid points around δ = 0 (the grid point closest to it)
/// with inversion below `threshold`, as `(δ_low, δ_high)`.
pub fn nonsaturation_window(grid: &[f64], sigma_z: &[f64], threshold: f64) -> Option<(f64, f64)> {
    if grid.is_empty() || grid.len() != sigma_z.len() {
        return None;
    }
    let centre = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)?;
    let inside = |k: usize| sigma_z[k] < threshold;
    if !inside(centre) {
        return None;
    }
    let mut lo = centre;
    while lo > 0 && inside(lo - 1) {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < grid.len() && inside(hi + 1) {
        hi += 1;
    }
    Some((grid[lo], grid[hi]))
}

/// Positive detuning nearest the cavity where the weak-excitation hot/cold
/// phase difference reaches π/2 in magnitude.
pub fn pi_half_frequency(hot: &SystemParams) -> Result<f64> {
    hot.validate()?;
    let cold = hot.cold();
    let excess = |d: f64| {
        let r_hot = crate::semiclassical::coefficients_sc(hot, &Drive::at_detuning(hot, d, 0.0), -1.0).0;
        let r_cold = crate::semiclassical::coefficients_sc(&cold, &Drive::at_detuning(&cold, d, 0.0), -1.0).0;
        wrap_phase(r_cold.arg() - r_hot.arg()).abs() - FRAC_PI_2
    };
    let step = 1e-3;
    let limit = 4.0 * hot.g / hot.kappa_total() + 4.0;
    let mut a = 0.0;
    let mut fa = excess(a);
    while a < limit {
        let b = a + step;
        let fb = excess(b);
        if fa == 0.0 && a > 0.0 {
            return Ok(a);
        }
        if (fa > 0.0) != (fb > 0.0) {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..100 {
                let m = 0.5 * (lo + hi);
                let fm = excess(m);
                if (fm > 0.0) == (flo > 0.0) {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoRoot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedBranch {
    Upper,
    Lower,
}

impl DressedBranch {
    pub fn sign(self) -> f64 {
        match self {
            DressedBranch::Upper => 1.0,
            DressedBranch::Lower => -1.0,
        }
    }
}

/// Complex eigenfrequency of the n-excitation manifold `{|n,G⟩, |n−1,E⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedLevel {
    pub order: usize,
    pub branch: DressedBranch,
    /// Closed-form ω_{n,±}.
    pub eigenvalue: C64,
    /// The same level from diagonalizing the non-Hermitian effective Hamiltonian.
    pub diagonalized: C64,
    /// Re(ω_{n,±})/n.
    pub probe_resonance: f64,
    /// (Re(ω_{n,±})/n − ω_c)/κ_tot.
    pub probe_detuning: f64,
    /// ng² < ((κ_tot − γ)/4)²: the splitting is imaginary.
    pub weak_coupling: bool,
}

/// Closed-form ω_{n,±} = nω₀ − i[(2n−1)κ_tot + γ]/4 ± √(ng² − ((κ_tot−γ)/4)²).
pub fn dressed_eigenvalue_closed_form(params: &SystemParams, order: usize, branch: DressedBranch) -> C64 {
    let n = order as f64;
    let kt = params.kappa_total();
    let gamma = params.gamma();
    let q = (kt - gamma) / 4.0;
    let split = C64::new(n * params.g * params.g - q * q, 0.0).sqrt();
    C64::new(n * params.omega_c, -((2.0 * n - 1.0) * kt + gamma) / 4.0) + split * branch.sign()
}

/// Dressed levels for orders 1..=n_max, each computed in closed form and by
/// diagonalizing `H_JC − i(κ_tot/2)a†a − i(γ/2)σ₊σ₋` on the manifold.
pub fn dressed_eigenvalues(params: &SystemParams, n_max: usize) -> Result<Vec<DressedLevel>> {
    params.validate()?;
    if n_max == 0 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "must be at least 1",
        });
    }
    if params.omega_x != params.omega_c {
        return Err(Error::InvalidParameter {
            name: "omega_x",
            reason: "dressed levels need the QD resonant with the cavity",
        });
    }
    let layout = HilbertLayout::new(n_max)?;
    let ops = layout.operators_dense();
    let h = build_hamiltonian_dense(params, &Drive::new(0.0, 0.0), n_max)?;
    let number = ops.a.adjoint().matmul(&ops.a);
    let excited = ops.sigma_minus.adjoint().matmul(&ops.sigma_minus);
    let h_eff = &(&h - &number.scale(C64::new(0.0, params.kappa_total() / 2.0)))
        - &excited.scale(C64::new(0.0, params.gamma() / 2.0));

    let kt = params.kappa_total();
    let mut out = Vec::with_capacity(2 * n_max);
    for order in 1..=n_max {
        let g_n = layout.index(QdState::Ground, order);
        let e_m = layout.index(QdState::Excited, order - 1);
        let (e1, e2) = eigenvalues_2x2(
            h_eff[(g_n, g_n)],
            h_eff[(g_n, e_m)],
            h_eff[(e_m, g_n)],
            h_eff[(e_m, e_m)],
        );
        let q = (kt - params.gamma()) / 4.0;
        let weak_coupling = (order as f64) * params.g * params.g < q * q;
        for branch in [DressedBranch::Upper, DressedBranch::Lower] {
            let eigenvalue = dressed_eigenvalue_closed_form(params, order, branch);
            let diagonalized = if (e1 - eigenvalue).norm() <= (e2 - eigenvalue).norm() {
                e1
            } else {
                e2
            };
            let probe_resonance = eigenvalue.re / order as f64;
            out.push(DressedLevel {
                order,
                branch,
                eigenvalue,
                diagonalized,
                probe_resonance,
                probe_detuning: (probe_resonance - params.omega_c) / kt,
                weak_coupling,
            });
        }
    }
    Ok(out)
}

/// Indices of strict interior local minima.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&k| values[k] < values[k - 1] && values[k] <= values[k + 1])
        .collect()
}

/// Minimizer of a unimodal function on `[a, b]`.
pub fn golden_section_minimum(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
