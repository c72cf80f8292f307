//! Wootters concurrence, the initial-state family `a1|++⟩ + a2|−−⟩`, and
//! entanglement death/survival time bounds with their empirical calibration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, CMatrix};
use crate::quadrature::Quadrature;
use crate::resonance::{rates_with, ModelConfig, RateReport, ResonanceTable, Spectra};

/// Tolerance below zero for ξ eigenvalues treated as rounding noise.
const NU_CLAMP: f64 = 1e-8;

/// `S^y ⊗ S^y` in the energy basis.
pub fn sy_sy() -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    CMatrix::from_row_slice(4, 4, &[z, z, z, -o, z, z, o, z, z, o, z, z, -o, z, z, z])
}

/// `ξ(ρ) = ρ (S^y⊗S^y) ρ̄ (S^y⊗S^y)` with `ρ̄` the entrywise conjugate.
pub fn xi_matrix(rho: &DensityMatrix) -> CMatrix {
    let y = sy_sy();
    let rho_bar = rho.entries.map(|z| z.conj());
    &rho.entries * &y * rho_bar * &y
}

/// Spectrum of `ξ`, `D = √ν₁ − √ν₂ − √ν₃ − √ν₄` and `C = max(0, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceReport {
    /// Eigenvalues of `ξ`, descending, near-zero negatives clamped to 0.
    pub nu: [f64; 4],
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

/// Concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceReport> {
    let vals = eigenvalues(&xi_matrix(rho))?;
    let mut nu = [0.0; 4];
    for (slot, v) in nu.iter_mut().zip(vals.iter()) {
        *slot = v.re;
    }
    nu.sort_by(|a, b| b.total_cmp(a));
    for v in nu.iter_mut() {
        if *v < -NU_CLAMP {
            return Err(Error::Numeric {
                what: "xi spectrum of an unphysical state".into(),
                residual: *v,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s = nu.map(f64::sqrt);
    let d = s[0] - (s[1] + s[2] + s[3]);
    Ok(ConcurrenceReport { nu, d, c: d.max(0.0) })
}

/// Amplitudes of `ψ ∝ a1|++⟩ + a2|−−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateParams {
    pub a1: Complex64,
    pub a2: Complex64,
}

impl InitialStateParams {
    pub fn new(a1: Complex64, a2: Complex64) -> Result<Self> {
        if a1.norm_sqr() + a2.norm_sqr() == 0.0 || !(a1.is_finite() && a2.is_finite()) {
            return Err(Error::Domain("amplitudes a1, a2 must be finite and not both zero".into()));
        }
        Ok(Self { a1, a2 })
    }

    fn norm2(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    /// `p = |a1|²/(|a1|²+|a2|²)`.
    pub fn p(&self) -> f64 {
        self.a1.norm_sqr() / self.norm2()
    }

    /// `α(0) = ā1 a2/(|a1|²+|a2|²)`.
    pub fn alpha0(&self) -> Complex64 {
        self.a1.conj() * self.a2 / self.norm2()
    }
}

/// `|ψ⟩⟨ψ|`; the `|−−⟩⟨++|` entry `[ρ]_{41}` equals `α(0)`.
pub fn initial_state(params: &InitialStateParams) -> Result<DensityMatrix> {
    let params = InitialStateParams::new(params.a1, params.a2)?;
    let n = params.norm2().sqrt();
    let z = Complex64::new(0.0, 0.0);
    let psi = [params.a1 / n, z, z, params.a2 / n];
    Ok(DensityMatrix {
        entries: CMatrix::from_fn(4, 4, |i, j| psi[i] * psi[j].conj()),
    })
}

/// Death and survival time bounds with the constants used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBounds {
    pub t_a: f64,
    pub t_b: f64,
    pub c_a: f64,
    pub c_b: f64,
}

fn check_bounds_hypotheses(rates: &RateReport, varkappa: f64, p: f64, kappa0: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("time bounds need 0 < p < 1, got p = {p}")));
    }
    if !(rates.delta2 > 0.0 && rates.delta3 > 0.0) {
        return Err(Error::Precondition(format!(
            "time bounds need delta2, delta3 > 0 (got {:e}, {:e})",
            rates.delta2, rates.delta3
        )));
    }
    let limit = kappa0 * (p * (1.0 - p)).sqrt();
    if !(varkappa > 0.0 && varkappa < limit) {
        return Err(Error::Precondition(format!(
            "time bounds need 0 < varkappa < kappa0 sqrt(p(1-p)) = {limit:e} (varkappa = {varkappa:e})"
        )));
    }
    Ok(())
}

/// `t_A = max{ln[C_A√(p(1−p))/ϰ²]/δ₅, ln[C_A p(1−p)/ϰ²]/(δ₂+δ₃), C_A/(δ₂+δ₃)}`.
pub fn death_time_bound_with(rates: &RateReport, varkappa: f64, p: f64, c_a: f64, kappa0: f64) -> Result<f64> {
    check_bounds_hypotheses(rates, varkappa, p, kappa0)?;
    let q = p * (1.0 - p);
    let k2 = varkappa * varkappa;
    let d23 = rates.delta2 + rates.delta3;
    Ok([
        (c_a * q.sqrt() / k2).ln() / rates.delta5,
        (c_a * q / k2).ln() / d23,
        c_a / d23,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max))
}

/// `t_B = min{ln[1+C_B p(1−p)]/(δ₂+δ₃), ln[1+C_B ϰ²]/δ₊, C_B/(δ₅−δ₋/2)}`.
pub fn survival_time_bound_with(rates: &RateReport, varkappa: f64, p: f64, c_b: f64, kappa0: f64) -> Result<f64> {
    check_bounds_hypotheses(rates, varkappa, p, kappa0)?;
    let q = p * (1.0 - p);
    let d23 = rates.delta2 + rates.delta3;
    Ok([
        (c_b * q).ln_1p() / d23,
        (c_b * varkappa * varkappa).ln_1p() / rates.delta_plus,
        c_b / (rates.delta5 - rates.delta_minus / 2.0),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min))
}

/// Entanglement death time bound for a configuration.
pub fn death_time_bound(cfg: &ModelConfig, p: f64, c_a: f64, kappa0: f64) -> Result<f64> {
    let r = crate::resonance::rates(cfg)?;
    death_time_bound_with(&r, cfg.varkappa(), p, c_a, kappa0)
}

/// Entanglement survival time bound for a configuration.
pub fn survival_time_bound(cfg: &ModelConfig, p: f64, c_b: f64, kappa0: f64) -> Result<f64> {
    let r = crate::resonance::rates(cfg)?;
    survival_time_bound_with(&r, cfg.varkappa(), p, c_b, kappa0)
}

/// `D(ρ_t)` along the resonance dynamics.
pub fn d_at(cfg: &ModelConfig, table: &ResonanceTable, rho0: &DensityMatrix, t: f64) -> Result<f64> {
    Ok(concurrence(&evolve(cfg, rho0, t, table)?)?.d)
}

fn bisect<F: Fn(f64) -> Result<bool>>(mut lo: f64, mut hi: f64, tol: f64, positive: F) -> Result<f64> {
    // invariant: positive(lo) && !positive(hi)
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn check_grid(t_max: f64, grid_n: usize) -> Result<()> {
    if !(t_max.is_finite() && t_max > 0.0) || grid_n < 2 {
        return Err(Error::Domain(format!(
            "need t_max > 0 and at least 2 grid points (t_max = {t_max}, n = {grid_n})"
        )));
    }
    Ok(())
}

/// Smallest grid time after which `D(ρ_t) < 0` at every later grid point,
/// refined by bisection to `1e-6 · t_max`; `None` if `D ≥ 0` at `t_max`.
pub fn numerical_death_time(
    cfg: &ModelConfig,
    table: &ResonanceTable,
    rho0: &DensityMatrix,
    t_max: f64,
    grid_n: usize,
) -> Result<Option<f64>> {
    check_grid(t_max, grid_n)?;
    let ts = grid(t_max, grid_n);
    let ds = ts.iter().map(|&t| d_at(cfg, table, rho0, t)).collect::<Result<Vec<_>>>()?;
    let last_nonneg = match ds.iter().rposition(|&d| d >= 0.0) {
        None => return Ok(Some(0.0)),
        Some(j) if j == grid_n - 1 => return Ok(None),
        Some(j) => j,
    };
    let t0 = bisect(ts[last_nonneg], ts[last_nonneg + 1], 1e-6 * t_max, |t| {
        Ok(d_at(cfg, table, rho0, t)? >= 0.0)
    })?;
    Ok(Some(t0))
}

/// First time at which `D(ρ_t)` stops being positive (grid plus bisection);
/// `None` if it stays positive up to `t_max`.
pub fn first_disentanglement_time(
    cfg: &ModelConfig,
    table: &ResonanceTable,
    rho0: &DensityMatrix,
    t_max: f64,
    grid_n: usize,
) -> Result<Option<f64>> {
    check_grid(t_max, grid_n)?;
    let ts = grid(t_max, grid_n);
    let mut prev = None;
    for &t in &ts {
        let d = d_at(cfg, table, rho0, t)?;
        if d <= 0.0 {
            return match prev {
                None => Ok(Some(0.0)),
                Some(tp) => Ok(Some(bisect(tp, t, 1e-6 * t_max, |s| {
                    Ok(d_at(cfg, table, rho0, s)? > 0.0)
                })?)),
            };
        }
        prev = Some(t);
    }
    Ok(None)
}

/// One configuration and initial population of a calibration sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationCase {
    pub cfg: ModelConfig,
    pub p: f64,
}

/// Outcome of fitting the bound constants to a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_a: f64,
    pub c_b: f64,
    pub kappa0: f64,
    pub cases: usize,
    pub doublings: u32,
    pub halvings: u32,
}

/// Number of check times used on each side of a bound.
pub const CHECK_SAMPLES: usize = 20;

/// Times `t ≥ t_A` probed for `D < 0`.
pub fn death_check_times(t_a: f64, gamma_th: f64) -> Vec<f64> {
    let span = t_a.max(20.0 / gamma_th);
    (0..CHECK_SAMPLES)
        .map(|i| t_a + span * i as f64 / (CHECK_SAMPLES - 1) as f64)
        .collect()
}

/// Times `t < t_B` probed for `C > 0`.
pub fn survival_check_times(t_b: f64) -> Vec<f64> {
    (0..CHECK_SAMPLES)
        .map(|i| t_b * i as f64 / CHECK_SAMPLES as f64)
        .collect()
}

struct PreparedCase {
    cfg: ModelConfig,
    p: f64,
    table: ResonanceTable,
    rates: RateReport,
    rho0: DensityMatrix,
    death: f64,
    first_zero: f64,
}

/// Grid resolution used when locating death times during calibration.
pub const CALIBRATION_GRID: usize = 1500;

/// Time horizon (in units of `1/γ_th`) searched for entanglement death.
pub const CALIBRATION_HORIZON: f64 = 60.0;

/// Grows `C_A` and shrinks `C_B` by factors of two, starting from 1, until
/// on every case `t_B ≤` first zero of `D`, `t_A ≥` the empirical death
/// time, `D < 0` at the sampled times after `t_A` and `C > 0` at the
/// sampled times before `t_B`. Cases use `a1 = √p`, `a2 = √(1−p)`.
pub fn calibrate(cases: &[CalibrationCase], kappa0: f64, quad: &Quadrature) -> Result<Calibration> {
    let mut prepared = Vec::with_capacity(cases.len());
    for case in cases {
        let sp = Spectra::compute(&case.cfg, quad)?;
        let rates = rates_with(&case.cfg, &sp)?;
        let table = ResonanceTable::from_spectra(&case.cfg, &sp)?;
        let rho0 = initial_state(&InitialStateParams::new(
            Complex64::new(case.p.sqrt(), 0.0),
            Complex64::new((1.0 - case.p).sqrt(), 0.0),
        )?)?;
        let t_max = CALIBRATION_HORIZON / rates.gamma_th;
        let death = numerical_death_time(&case.cfg, &table, &rho0, t_max, CALIBRATION_GRID)?
            .ok_or_else(|| Error::Precondition(format!("no entanglement death before t = {t_max:e}")))?;
        let first_zero = first_disentanglement_time(&case.cfg, &table, &rho0, t_max, CALIBRATION_GRID)?
            .unwrap_or(death);
        prepared.push(PreparedCase {
            cfg: case.cfg,
            p: case.p,
            table,
            rates,
            rho0,
            death,
            first_zero,
        });
    }

    let death_ok = |c_a: f64| -> Result<bool> {
        for pc in &prepared {
            let t_a = death_time_bound_with(&pc.rates, pc.cfg.varkappa(), pc.p, c_a, kappa0)?;
            if t_a < pc.death {
                return Ok(false);
            }
            for t in death_check_times(t_a, pc.rates.gamma_th) {
                if d_at(&pc.cfg, &pc.table, &pc.rho0, t)? >= 0.0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let survival_ok = |c_b: f64| -> Result<bool> {
        for pc in &prepared {
            let t_b = survival_time_bound_with(&pc.rates, pc.cfg.varkappa(), pc.p, c_b, kappa0)?;
            if t_b > pc.first_zero {
                return Ok(false);
            }
            for t in survival_check_times(t_b) {
                if d_at(&pc.cfg, &pc.table, &pc.rho0, t)? <= 0.0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };

    const MAX_STEPS: u32 = 200;
    let mut c_a = 1.0;
    let mut doublings = 0;
    while !death_ok(c_a)? {
        c_a *= 2.0;
        doublings += 1;
        if doublings > MAX_STEPS {
            return Err(Error::Numeric {
                what: "death-bound calibration".into(),
                residual: c_a,
            });
        }
    }
    let mut c_b = 1.0;
    let mut halvings = 0;
    while !survival_ok(c_b)? {
        c_b /= 2.0;
        halvings += 1;
        if halvings > MAX_STEPS {
            return Err(Error::Numeric {
                what: "survival-bound calibration".into(),
                residual: c_b,
            });
        }
    }
    Ok(Calibration {
        c_a,
        c_b,
        kappa0,
        cases: cases.len(),
        doublings,
        halvings,
    })
}
