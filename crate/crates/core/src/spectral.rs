//! Reservoir spectral functions for the radial form-factor family
//! `h(r, Σ) = r^p e^{-r^m} h₁(Σ)` with isotropic angular part.
//!
//! Only the angular L² weight `w = ∫|h₁|² dΣ` enters, so the angular
//! integral of `|h(r, Σ)|²` is `w r^{2p} e^{-2 r^m}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, Quadrature};

/// Radial form factor `r^p e^{-r^m}` with angular weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormFactor {
    pub p: f64,
    pub m: u32,
    pub w: f64,
}

impl FormFactor {
    pub fn new(p: f64, m: u32, w: f64) -> Result<Self> {
        let h = Self { p, m, w };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p + 0.5;
        if !self.p.is_finite() || n < 0.0 || (n - n.round()).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "form factor power p = {} must be -1/2 + n for an integer n >= 0",
                self.p
            )));
        }
        if self.m != 1 && self.m != 2 {
            return Err(Error::Domain(format!(
                "form factor decay m = {} must be 1 or 2",
                self.m
            )));
        }
        if !self.w.is_finite() || self.w < 0.0 {
            return Err(Error::Domain(format!(
                "form factor angular weight w = {} must be finite and nonnegative",
                self.w
            )));
        }
        Ok(())
    }

    /// Angular integral of `|h(r, Σ)|²`: `w r^{2p} e^{-2 r^m}`.
    pub fn radial(&self, r: f64) -> f64 {
        self.w * r.powf(2.0 * self.p) * (-2.0 * r.powi(self.m as i32)).exp()
    }

    /// Radius beyond which `r^{2p+2} e^{-2 r^m}` is below `e^{-45}`.
    fn cutoff(&self) -> f64 {
        let m = self.m as f64;
        let k = 2.0 * self.p + 2.0;
        let mut u: f64 = (22.5f64).powf(1.0 / m);
        for _ in 0..50 {
            let next = ((45.0 + k * u.max(1.0).ln()) / 2.0).powf(1.0 / m);
            if (next - u).abs() < 1e-12 * u {
                break;
            }
            u = next;
        }
        u.max(1.0)
    }
}

/// A spectral quantity together with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralValue {
    pub value: f64,
    pub est_error: f64,
}

impl SpectralValue {
    fn exact(value: f64) -> Self {
        Self {
            value,
            est_error: 4.0 * f64::EPSILON * value.abs(),
        }
    }
}

/// Emission (+) or absorption (−) branch of the thermal spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `y coth y`, accurate near `y = 0`.
pub fn y_coth_y(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        let y2 = y * y;
        1.0 + y2 / 3.0 - y2 * y2 / 45.0
    } else {
        y / y.tanh()
    }
}

/// `y / sinh y`, accurate near `y = 0`.
fn y_over_sinh(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        1.0 - y * y / 6.0
    } else {
        y / y.sinh()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("inverse temperature beta = {beta} must be > 0")));
    }
    Ok(())
}

/// `w 2^{2p} x^{2p+1} e^{-2(2x)^m}`: the `x²·∫|h(2x,Σ)|²dΣ / x` combination,
/// written so that `x = 0` is handled for `p = -1/2`.
fn scaled_radial(h: &FormFactor, x: f64) -> f64 {
    let k = 2.0 * h.p + 1.0;
    let xpow = if k == 0.0 { 1.0 } else { x.powf(k) };
    h.w * (2f64).powf(2.0 * h.p) * xpow * (-2.0 * (2.0 * x).powi(h.m as i32)).exp()
}

/// `σ_h(x) = 4π x² coth(βx) ∫|h(2x,Σ)|² dΣ`, with its `x ↓ 0` limit at `x = 0`.
pub fn sigma(h: &FormFactor, x: f64, beta: f64) -> Result<SpectralValue> {
    h.validate()?;
    check_beta(beta)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("sigma needs x >= 0, got {x}")));
    }
    // x² coth(βx) = x · (βx coth βx) / β
    let value = 4.0 * std::f64::consts::PI * scaled_radial(h, x) * y_coth_y(beta * x) / beta;
    Ok(SpectralValue::exact(value))
}

/// `σ^±_h(x) = 2π x² e^{±βx} / sinh(βx) ∫|h(2x,Σ)|² dΣ` for `x > 0`.
pub fn sigma_pm(h: &FormFactor, x: f64, beta: f64, sign: Sign) -> Result<SpectralValue> {
    h.validate()?;
    check_beta(beta)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("sigma± needs x > 0, got {x}")));
    }
    let y = beta * x;
    let boltzmann = match sign {
        Sign::Plus => y.exp(),
        Sign::Minus => (-y).exp(),
    };
    let value =
        2.0 * std::f64::consts::PI * scaled_radial(h, x) * y_over_sinh(y) * boltzmann / beta;
    Ok(SpectralValue::exact(value))
}

/// `r = ∫_{ℝ³} |f|²/|k| d³k = ∫_0^∞ r · w r^{2p} e^{-2r^m} dr`.
///
/// The integrand has no pole for this family, so this is an ordinary
/// integral.
pub fn pv_r(f: &FormFactor, quad: &Quadrature) -> Result<SpectralValue> {
    f.validate()?;
    if f.w == 0.0 {
        return Ok(SpectralValue {
            value: 0.0,
            est_error: 0.0,
        });
    }
    let integrand = |r: f64| r * f.radial(r);
    let u = f.cutoff();
    let breaks = [0.0, 0.5 * u.min(2.0), u.min(2.0), u];
    let res = integrate_pieces(integrand, &breaks, quad)?;
    Ok(SpectralValue {
        value: res.value,
        est_error: res.error,
    })
}

/// `r′ = 4π B² ∫|g(2B,Σ)|² dΣ`.
pub fn r_prime(g: &FormFactor, b: f64) -> Result<SpectralValue> {
    g.validate()?;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("r' needs B > 0, got {b}")));
    }
    Ok(SpectralValue::exact(
        4.0 * std::f64::consts::PI * b * b * g.radial(2.0 * b),
    ))
}

/// The even density `φ(u) = ½ u² coth(β|u|/2) ∫|g(|u|,Σ)|² dΣ` of the
/// principal-value integral in [`pv_rg`].
pub fn pv_rg_density(g: &FormFactor, beta: f64, u: f64) -> f64 {
    let a = u.abs();
    // u² coth(β|u|/2) |u|^{2p} = |u|^{2p+1} · (2/β)(y coth y), y = β|u|/2
    let k = 2.0 * g.p + 1.0;
    let apow = if k == 0.0 { 1.0 } else { a.powf(k) };
    0.5 * g.w * apow * (2.0 / beta) * y_coth_y(0.5 * beta * a) * (-2.0 * a.powi(g.m as i32)).exp()
}

/// `r_g(x) = P.V.∫_ℝ φ(u)/(u − 2x) du` by pole subtraction.
///
/// On the truncated line `[−U, U]`,
/// `P.V.∫ φ(u)/(u−c) du = ∫ (φ(u) − φ(c))/(u−c) du + φ(c) ln((U−c)/(U+c))`,
/// and the subtracted integrand is bounded, so ordinary adaptive
/// quadrature applies. Breakpoints at `0` (kink of `|u|`) and at the pole.
pub fn pv_rg(g: &FormFactor, x: f64, beta: f64, quad: &Quadrature) -> Result<SpectralValue> {
    g.validate()?;
    check_beta(beta)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("r_g needs x > 0, got {x}")));
    }
    if g.w == 0.0 {
        return Ok(SpectralValue {
            value: 0.0,
            est_error: 0.0,
        });
    }
    let c = 2.0 * x;
    let phi = |u: f64| pv_rg_density(g, beta, u);
    let phi_c = phi(c);
    let u_max = g.cutoff().max(2.0 * c + 1.0);
    let integrand = |u: f64| (phi(u) - phi_c) / (u - c);

    // Absolute accuracy target relative to the size of the density.
    let scale = (0..=64)
        .map(|i| phi(u_max * i as f64 / 64.0).abs())
        .fold(phi_c.abs(), f64::max);
    let opts = Quadrature {
        abs_tol: (quad.rel_tol * 1e-3 * scale).max(quad.abs_tol),
        ..*quad
    };
    let breaks = [-u_max, -c.min(1.0), 0.0, 0.5 * c, c, 1.5 * c, 2.0 * c, u_max];
    let res = integrate_pieces(integrand, &breaks, &opts)?;
    let log_term = phi_c * ((u_max - c) / (u_max + c)).ln();
    Ok(SpectralValue {
        value: res.value + log_term,
        est_error: res.error + 4.0 * f64::EPSILON * log_term.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ff(p: f64, m: u32, w: f64) -> FormFactor {
        FormFactor::new(p, m, w).unwrap()
    }

    #[test]
    fn sigma_zero_limit_for_p_minus_half() {
        let c2 = 0.3;
        let h = ff(-0.5, 2, 4.0 * PI * c2);
        let beta = 1.7;
        let s0 = sigma(&h, 0.0, beta).unwrap().value;
        assert!((s0 - 8.0 * PI * PI * c2 / beta).abs() < 1e-14 * s0);
        // approach from the right
        for &x in &[1e-2, 1e-4, 1e-6] {
            let s = sigma(&h, x, beta).unwrap().value;
            assert!((s - s0).abs() < 2.0 * x * s0 + 1e-13, "x = {x}");
        }
    }

    #[test]
    fn sigma_zero_vanishes_for_higher_powers() {
        let h = ff(0.5, 1, 1.0);
        assert_eq!(sigma(&h, 0.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn sigma_is_sum_of_branches() {
        let h = ff(0.5, 2, 2.0);
        let s = sigma(&h, 0.7, 1.3).unwrap().value;
        let p = sigma_pm(&h, 0.7, 1.3, Sign::Plus).unwrap().value;
        let m = sigma_pm(&h, 0.7, 1.3, Sign::Minus).unwrap().value;
        assert!((s - p - m).abs() < 1e-12 * s);
        assert!((p / m - (2.0f64 * 1.3 * 0.7).exp()).abs() < 1e-12 * p / m);
    }

    #[test]
    fn sigma_pm_rejects_zero() {
        let h = ff(-0.5, 1, 1.0);
        assert!(matches!(sigma_pm(&h, 0.0, 1.0, Sign::Plus), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_form_factors() {
        assert!(FormFactor::new(-1.5, 1, 1.0).is_err());
        assert!(FormFactor::new(0.0, 1, 1.0).is_err());
        assert!(FormFactor::new(0.5, 3, 1.0).is_err());
        assert!(FormFactor::new(0.5, 1, -1.0).is_err());
        let bad = FormFactor { p: -1.5, m: 1, w: 1.0 };
        assert!(matches!(sigma(&bad, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pv_r_gamma_values() {
        let q = Quadrature::default();
        let r = pv_r(&ff(-0.5, 1, 1.0), &q).unwrap().value;
        assert!((r - 0.5).abs() < 1e-12);
        // ∫ r^2 e^{-2r^2} dr = sqrt(pi/2)/8
        let r = pv_r(&ff(0.5, 2, 1.0), &q).unwrap().value;
        assert!((r - (PI / 2.0).sqrt() / 8.0).abs() < 1e-12);
        assert_eq!(pv_r(&ff(0.5, 2, 0.0), &q).unwrap().value, 0.0);
    }

    #[test]
    fn r_prime_closed_form() {
        let v = r_prime(&ff(-0.5, 2, 1.0), 0.5).unwrap().value;
        assert!((v - PI * (-2.0f64).exp()).abs() < 1e-15);
        assert!(r_prime(&ff(-0.5, 2, 1.0), 0.0).is_err());
    }

    #[test]
    fn sigma_over_r_prime_is_coth() {
        let g = ff(0.5, 1, 0.8);
        let (b, beta) = (0.5, 2.0);
        let ratio = sigma(&g, b, beta).unwrap().value / r_prime(&g, b).unwrap().value;
        assert!((ratio - 1.0 / (beta * b).tanh()).abs() < 1e-13);
    }

    #[test]
    fn pv_rg_is_linear_in_w() {
        let q = Quadrature::default();
        let a = pv_rg(&ff(0.5, 2, 1.0), 0.8, 1.0, &q).unwrap().value;
        let b = pv_rg(&ff(0.5, 2, 2.5), 0.8, 1.0, &q).unwrap().value;
        assert!((b - 2.5 * a).abs() < 1e-11 * b.abs());
        assert_eq!(pv_rg(&ff(0.5, 2, 0.0), 0.8, 1.0, &q).unwrap().value, 0.0);
    }

    #[test]
    fn pv_rg_of_odd_density_far_from_pole() {
        // For c far beyond the support, P.V.∫ φ/(u−c) ≈ −(1/c)∫φ.
        let g = ff(0.5, 2, 1.0);
        let beta = 1.0;
        let q = Quadrature::default();
        let x = 20.0;
        let v = pv_rg(&g, x, beta, &q).unwrap().value;
        let mass = crate::quadrature::integrate(|u| pv_rg_density(&g, beta, u), -8.0, 8.0, &q)
            .unwrap()
            .value;
        let c = 2.0 * x;
        // next order of the 1/(u−c) expansion vanishes by evenness
        let second = crate::quadrature::integrate(
            |u| u * u * pv_rg_density(&g, beta, u),
            -8.0,
            8.0,
            &q,
        )
        .unwrap()
        .value;
        let approx = -mass / c - second / c.powi(3);
        assert!((v - approx).abs() < 1e-6 * approx.abs(), "{v} vs {approx}");
    }
}
