//! Semiclassical (factorized) steady state with self-consistent QD saturation.
//!
//! Factorizing ⟨σ a⟩ = ⟨σ⟩⟨a⟩ closes the Heisenberg equations. With
//! `X = iΔ_X + γ/2`, `C = iΔ_c + κ_tot/2` and `s = ⟨σ_z⟩` the intracavity
//! field is `⟨a⟩ = −√κ α_in X / (X C − g² s)`, so
//!
//! ```text
//! r = 1 − κ X / (X C − g² s)                 single-sided
//! t = −κ X / (X C − g² s),   r = 1 + t       double-sided
//! n = κ |X|² P / |X C − g² s|²
//! s = −1 / (1 + n / n_c(Δ_X)),   n_c(Δ_X) = n_c (1 + 4Δ_X²/γ²)
//! ```
//!
//! The last two lines are solved together for `s ∈ [−1, 0]`. The system can
//! be bistable, so every root is returned.

use alloc::vec::Vec;

use crate::params::{Drive, SystemParams, Topology};
use crate::{Error, Result, C64};

/// n_c = γ_∥ γ / 8g².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPhotonNumber {
    pub n_c: f64,
}

impl CriticalPhotonNumber {
    /// `None` when g = 0.
    pub fn of(params: &SystemParams) -> Option<Self> {
        params.critical_photon_number().map(|n_c| Self { n_c })
    }
}

/// n_c(1 + 4Δ_X²/γ²), written so that γ_∥ = γ = 0 gives 0 rather than NaN.
fn detuned_critical_number(params: &SystemParams, delta_x: f64) -> Option<f64> {
    if params.g == 0.0 {
        return None;
    }
    if params.gamma_par == 0.0 {
        return Some(0.0);
    }
    let gamma = params.gamma();
    Some(params.gamma_par * (gamma * gamma + 4.0 * delta_x * delta_x) / (8.0 * params.g * params.g * gamma))
}

/// QD inversion for a cavity photon number. Without coupling there is no
/// saturation channel and the QD stays in its ground state.
pub fn sigma_z_of_n(n: f64, delta_x: f64, params: &SystemParams) -> f64 {
    match detuned_critical_number(params, delta_x) {
        None => -1.0,
        Some(ncd) if ncd == 0.0 => {
            if n > 0.0 {
                0.0
            } else {
                -1.0
            }
        }
        Some(ncd) => -1.0 / (1.0 + n / ncd),
    }
}

struct Detunings {
    delta_x: f64,
    delta_c: f64,
}

fn detunings(params: &SystemParams, drive: &Drive) -> Detunings {
    Detunings {
        delta_x: params.omega_x - drive.omega,
        delta_c: params.omega_c - drive.omega,
    }
}

/// Coefficients of `|X C − g² s|² = q0 + q1 s + q2 s²`, and `|X|²`.
struct PhotonPolynomial {
    numerator: f64,
    q0: f64,
    q1: f64,
    q2: f64,
}

impl PhotonPolynomial {
    fn new(params: &SystemParams, drive: &Drive) -> Self {
        let Detunings { delta_x, delta_c } = detunings(params, drive);
        let gamma = params.gamma();
        let kt = params.kappa_total();
        let x2 = delta_x * delta_x + gamma * gamma / 4.0;
        let c2 = delta_c * delta_c + kt * kt / 4.0;
        let g2 = params.g * params.g;
        Self {
            numerator: params.kappa * x2 * drive.flux(params),
            q0: x2 * c2,
            q1: 2.0 * g2 * (delta_x * delta_c - kt * gamma / 4.0),
            q2: g2 * g2,
        }
    }

    fn denominator(&self, s: f64) -> f64 {
        self.q0 + s * (self.q1 + s * self.q2)
    }

    fn photons(&self, s: f64) -> Result<f64> {
        let q = self.denominator(s);
        if !(q > 0.0) {
            return Err(Error::NonPhysicalDenominator(q));
        }
        Ok(self.numerator / q)
    }

    /// Smallest and largest denominators over s ∈ [−1, 0].
    fn denominator_range(&self) -> (f64, f64) {
        let ends = (self.denominator(-1.0), self.denominator(0.0));
        let max = ends.0.max(ends.1);
        let vertex = if self.q2 > 0.0 {
            (-self.q1 / (2.0 * self.q2)).clamp(-1.0, 0.0)
        } else {
            0.0
        };
        let min = ends.0.min(ends.1).min(self.denominator(vertex));
        (min, max)
    }
}

/// Cavity photon number for a given QD inversion.
pub fn photon_number(s: f64, drive: &Drive, params: &SystemParams) -> Result<f64> {
    PhotonPolynomial::new(params, drive).photons(s)
}

/// `−κ X / (X C − g² s)`, the field scattered into the input channel.
fn scattered(params: &SystemParams, drive: &Drive, s: f64) -> C64 {
    let Detunings { delta_x, delta_c } = detunings(params, drive);
    let x = C64::new(params.gamma() / 2.0, delta_x);
    let c = C64::new(params.kappa_total() / 2.0, delta_c);
    -(x * params.kappa) / (x * c - params.g * params.g * s)
}

/// Single-sided reflection coefficient at inversion `s`.
pub fn reflection_sc(params: &SystemParams, drive: &Drive, s: f64) -> Result<C64> {
    if params.topology != Topology::SingleSided {
        return Err(Error::TopologyMismatch {
            expected: Topology::SingleSided,
        });
    }
    Ok(1.0 + scattered(params, drive, s))
}

/// Double-sided `(r, t)` at inversion `s`.
pub fn transmission_sc(params: &SystemParams, drive: &Drive, s: f64) -> Result<(C64, C64)> {
    if params.topology != Topology::DoubleSided {
        return Err(Error::TopologyMismatch {
            expected: Topology::DoubleSided,
        });
    }
    let t = scattered(params, drive, s);
    Ok((1.0 + t, t))
}

/// `(r, t)` for either topology; `t` is `None` for a single-sided cavity.
pub fn coefficients_sc(params: &SystemParams, drive: &Drive, s: f64) -> (C64, Option<C64>) {
    let t = scattered(params, drive, s);
    match params.topology {
        Topology::SingleSided => (1.0 + t, None),
        Topology::DoubleSided => (1.0 + t, Some(t)),
    }
}

/// g√|s|.
pub fn effective_coupling(g: f64, s: f64) -> f64 {
    g * libm::sqrt(s.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalSolution {
    pub sigma_z: f64,
    pub n_cavity: f64,
    /// Position among all roots at this point, in ascending `sigma_z`.
    pub branch_id: usize,
    /// Relative mismatch of the inversion against `sigma_z_of_n(n_cavity)`.
    pub residual: f64,
    pub r: C64,
    pub t: Option<C64>,
}

const SCAN_POINTS: usize = 2001;

fn make_solution(params: &SystemParams, drive: &Drive, s: f64, n: f64, branch_id: usize) -> SemiclassicalSolution {
    let delta_x = params.omega_x - drive.omega;
    let implied = sigma_z_of_n(n, delta_x, params);
    let residual = if s == 0.0 {
        implied.abs()
    } else {
        ((implied - s) / s).abs()
    };
    let (r, t) = coefficients_sc(params, drive, s);
    SemiclassicalSolution {
        sigma_z: s,
        n_cavity: n,
        branch_id,
        residual,
        r,
        t,
    }
}

/// All self-consistent roots at this drive point, in ascending `sigma_z`
/// unless a hint is given, in which case they are ordered by distance from it.
///
/// Roots are bracketed in `x = n / n_c(Δ_X)`, where `s = −1/(1 + x)`: the
/// photon number is confined to `[κ|X|²P/max Q, κ|X|²P/min Q]`, which is
/// scanned on a logarithmic grid and refined by bisection.
pub fn solve_self_consistent(
    drive: &Drive,
    params: &SystemParams,
    hint: Option<f64>,
) -> Result<Vec<SemiclassicalSolution>> {
    params.validate()?;
    drive.validate()?;
    let poly = PhotonPolynomial::new(params, drive);
    let delta_x = params.omega_x - drive.omega;

    let single = |s: f64| -> Result<Vec<SemiclassicalSolution>> {
        let n = poly.photons(s)?;
        Ok(alloc::vec![make_solution(params, drive, s, n, 0)])
    };
    if drive.power_norm == 0.0 || params.g == 0.0 {
        return single(-1.0);
    }
    let ncd = match detuned_critical_number(params, delta_x) {
        Some(v) if v > 0.0 => v,
        _ => return single(0.0),
    };

    let (q_min, q_max) = poly.denominator_range();
    if !(q_min > 0.0) {
        return Err(Error::NonPhysicalDenominator(q_min));
    }
    let x_lo = poly.numerator / q_max / ncd;
    let x_hi = poly.numerator / q_min / ncd;
    let f = |x: f64| -> f64 {
        let s = -1.0 / (1.0 + x);
        poly.numerator / poly.denominator(s) - ncd * x
    };

    let mut roots: Vec<f64> = Vec::new();
    if x_hi <= x_lo * (1.0 + 4.0 * f64::EPSILON) {
        roots.push(x_lo);
    } else {
        let log_lo = libm::log(x_lo);
        let step = (libm::log(x_hi) - log_lo) / (SCAN_POINTS - 1) as f64;
        let grid = |k: usize| match k {
            0 => x_lo,
            k if k == SCAN_POINTS - 1 => x_hi,
            k => libm::exp(log_lo + step * k as f64),
        };
        let mut a = grid(0);
        let mut fa = f(a);
        if fa == 0.0 {
            roots.push(a);
        }
        for k in 1..SCAN_POINTS {
            let b = grid(k);
            let fb = f(b);
            if fb == 0.0 {
                roots.push(b);
            } else if fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
                roots.push(bisect(&f, a, b, fa));
            }
            a = b;
            fa = fb;
        }
    }
    if roots.is_empty() {
        return Err(Error::NoRoot);
    }

    let mut out = Vec::with_capacity(roots.len());
    for (id, x) in roots.into_iter().enumerate() {
        let s = -1.0 / (1.0 + x);
        let n = poly.photons(s)?;
        out.push(make_solution(params, drive, s, n, id));
    }
    if let Some(h) = hint {
        out.sort_by(|p, q| (p.sigma_z - h).abs().total_cmp(&(q.sigma_z - h).abs()));
    }
    Ok(out)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// How a single root is picked where several coexist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchMode {
    /// Follow the root from vanishing power up to the requested power at
    /// fixed frequency (the up-sweep branch).
    #[default]
    PowerContinued,
    /// Follow the root of the previous point along the frequency axis.
    FrequencyContinued,
    /// Least saturated root.
    Lower,
    /// Most saturated root.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSelection {
    pub solution: SemiclassicalSolution,
    /// Number of coexisting roots at this point.
    pub branch_count: usize,
}

/// Power at which continuation starts; the response there is linear.
pub const CONTINUATION_START_POWER: f64 = 1e-6;
const RAMP_STEPS_PER_DECADE: f64 = 20.0;

fn closest(roots: Vec<SemiclassicalSolution>, to: f64) -> BranchSelection {
    let branch_count = roots.len();
    let solution = roots
        .into_iter()
        .min_by(|p, q| (p.sigma_z - to).abs().total_cmp(&(q.sigma_z - to).abs()))
        .expect("solver returns at least one root");
    BranchSelection { solution, branch_count }
}

/// Follow a root in power from `(from_power, from_sigma_z)` up to the drive
/// power, at the drive frequency.
pub fn continue_in_power(
    params: &SystemParams,
    drive: &Drive,
    from_power: f64,
    from_sigma_z: f64,
) -> Result<BranchSelection> {
    let roots = solve_self_consistent(drive, params, None)?;
    if roots.len() == 1 || drive.power_norm <= from_power || from_power <= 0.0 {
        return Ok(closest(roots, from_sigma_z));
    }
    let decades = libm::log10(drive.power_norm / from_power);
    let steps = libm::ceil(decades * RAMP_STEPS_PER_DECADE).max(1.0) as usize;
    let mut s = from_sigma_z;
    for k in 1..steps {
        let p = from_power * libm::pow(10.0, decades * k as f64 / steps as f64);
        let step = Drive::new(drive.omega, p);
        s = closest(solve_self_consistent(&step, params, None)?, s).solution.sigma_z;
    }
    Ok(closest(roots, s))
}

/// The root continued from vanishing power at the drive frequency.
pub fn continued_from_zero_power(params: &SystemParams, drive: &Drive) -> Result<BranchSelection> {
    continue_in_power(params, drive, CONTINUATION_START_POWER, -1.0)
}

/// Pick one root according to `mode`. `previous` is the inversion of the
/// preceding point on the curve, used by [`BranchMode::FrequencyContinued`].
pub fn select_branch(
    params: &SystemParams,
    drive: &Drive,
    mode: BranchMode,
    previous: Option<f64>,
) -> Result<BranchSelection> {
    match mode {
        BranchMode::PowerContinued => continued_from_zero_power(params, drive),
        BranchMode::FrequencyContinued => match previous {
            Some(s) => Ok(closest(solve_self_consistent(drive, params, None)?, s)),
            None => continued_from_zero_power(params, drive),
        },
        BranchMode::Lower => Ok(closest(solve_self_consistent(drive, params, None)?, -1.0)),
        BranchMode::Upper => Ok(closest(solve_self_consistent(drive, params, None)?, 0.0)),
    }
}
