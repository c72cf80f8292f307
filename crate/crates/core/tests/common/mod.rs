//! Independent numerical oracles and random generators shared by the
//! integration and acceptance tests. Nothing here calls the library's
//! eigensolver or quadrature.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use resq::dynamics::DensityMatrix;
use resq::quadrature::Quadrature;
use resq::resonance::{level_shift_with, BohrEnergy, ModelConfig, Spectra};
use resq::spectral::FormFactor;

pub type C = Complex64;
pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Characteristic polynomials and their roots

/// Faddeev–LeVerrier: coefficients `[c_0, …, c_{n−1}, 1]` (ascending) of
/// `det(zI − A)`.
pub fn faddeev_leverrier(a: &CMat) -> Vec<C> {
    let n = a.nrows();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut m = CMat::zeros(n, n);
    for k in 1..=n {
        m = a * &m + CMat::identity(n, n) * coeffs[n - k + 1];
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}

fn horner(coeffs: &[C], z: C) -> C {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k)
}

fn derivative(coeffs: &[C]) -> Vec<C> {
    coeffs.iter().enumerate().skip(1).map(|(i, &k)| k * i as f64).collect()
}

/// Durand–Kerner (Weierstrass) simultaneous iteration for a monic
/// polynomial given by ascending coefficients, with a final Newton polish.
pub fn durand_kerner(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C> = coeffs.iter().map(|&k| k / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|k| k.norm()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<C> = (0..n).map(|i| seed.powu(i as u32) * radius).collect();
    for _ in 0..2000 {
        let mut change = 0.0f64;
        for i in 0..n {
            let zi = roots[i];
            let denom: C = (0..n).filter(|&j| j != i).map(|j| zi - roots[j]).product();
            if denom.norm() == 0.0 {
                continue;
            }
            let step = horner(&monic, zi) / denom;
            roots[i] = zi - step;
            change = change.max(step.norm());
        }
        if change <= 1e-17 * radius {
            break;
        }
    }
    let d = derivative(&monic);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let dp = horner(&d, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = horner(&monic, *r) / dp;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Eigenvalues through the characteristic polynomial.
pub fn charpoly_eigenvalues(a: &CMat) -> Vec<C> {
    durand_kerner(&faddeev_leverrier(a))
}

/// Right null vector of a (numerically) singular matrix, from the SVD.
pub fn null_vector(a: &CMat) -> Vec<C> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("nonempty");
    v_t.row(idx).iter().map(|z| z.conj()).collect()
}

/// Smallest distance between two unit vectors up to a phase.
pub fn direction_error(x: &[C], y: &[C]) -> f64 {
    let unit = |v: &[C]| {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|z| z / n).collect::<Vec<_>>()
    };
    let (x, y) = (unit(x), unit(y));
    let dot: C = y.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
    let phase = if dot.norm() > 0.0 { dot / dot.norm() } else { c(1.0, 0.0) };
    x.iter().zip(&y).map(|(a, b)| (a - phase * b).norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

type Poly = Vec<C>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let x = left.remove(i);
            prefix.push(x);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out.into_iter()
        .map(|p| {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            (p, if inversions % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Leibniz expansion of `det(A − zI)`, ascending coefficients.
pub fn leibniz_charpoly(a: &CMat) -> Vec<C> {
    let n = a.nrows();
    let mut total = vec![c(0.0, 0.0); n + 1];
    for (perm, sign) in permutations(n) {
        let mut term: Poly = vec![c(sign, 0.0)];
        for (i, &j) in perm.iter().enumerate() {
            let factor = if i == j { vec![a[(i, j)], c(-1.0, 0.0)] } else { vec![a[(i, j)]] };
            term = poly_mul(&term, &factor);
        }
        for (k, v) in term.into_iter().enumerate() {
            total[k] += v;
        }
    }
    total
}

fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval_real(coeffs, lo);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_real(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots in `[lo, hi]` of a real polynomial (ascending coefficients)
/// whose roots are all real: the critical points (roots of the
/// derivative, found recursively) isolate monotone intervals, each
/// searched by bisection; a root at a critical point counts twice.
pub fn real_roots(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    let d: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, &k)| k * i as f64).collect();
    let mut pts = vec![lo];
    pts.extend(real_roots(&d, lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = coeffs.iter().map(|k| k.abs()).fold(0.0, f64::max);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (fa, fb) = (eval_real(coeffs, w[0]), eval_real(coeffs, w[1]));
        if (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect_root(coeffs, w[0], w[1]));
        }
    }
    // double roots sit at critical points without a sign change
    for &x in &pts[1..pts.len() - 1] {
        if roots.len() >= deg {
            break;
        }
        if eval_real(coeffs, x).abs() <= 1e-13 * scale && roots.iter().all(|r| (r - x).abs() > 1e-9) {
            roots.push(x);
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.truncate(deg);
    roots
}

/// `σ^y ⊗ σ^y` built from the Pauli matrix by a Kronecker product.
pub fn pauli_yy() -> CMat {
    let sy = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    sy.kronecker(&sy)
}

/// Brute-force Wootters concurrence: eigenvalues of `ρ (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)`
/// from the Leibniz characteristic polynomial, solved by bisection.
pub fn concurrence_oracle(rho: &CMat) -> (Vec<f64>, f64) {
    let yy = pauli_yy();
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let r = rho * tilde;
    let poly: Vec<f64> = leibniz_charpoly(&r).iter().map(|z| z.re).collect();
    let nu = real_roots(&poly, -1.0, 2.0);
    let s: Vec<f64> = nu.iter().map(|v| v.max(0.0).sqrt()).collect();
    let d = s[0] - s[1] - s[2] - s[3];
    (nu, d.max(0.0))
}

// ---------------------------------------------------------------------------
// Quadrature oracles

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre rule with `panels` equal panels.
pub fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + h * (k as f64 + 0.5);
            rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Principal value of `∫_{−U}^{U} φ(u)/(u − c) du` by pole excision: the
/// window `|u − c| < ε` is folded onto `∫_0^ε (φ(c+s) − φ(c−s))/s ds`,
/// the rest is integrated directly with breakpoints at `0` and `c ± ε`.
pub fn pv_excision<F: Fn(f64) -> f64>(phi: F, c0: f64, u: f64) -> f64 {
    let rule = gauss_legendre(40);
    let eps = 0.5 * c0.min(1.0);
    let g = |x: f64| phi(x) / (x - c0);
    let window = composite_gl(|s| (phi(c0 + s) - phi(c0 - s)) / s, 0.0, eps, 8, &rule);
    let left_neg = composite_gl(&g, -u, 0.0, 400, &rule);
    let left_pos = composite_gl(&g, 0.0, c0 - eps, 50, &rule);
    let right = composite_gl(&g, c0 + eps, u, 400, &rule);
    window + left_neg + left_pos + right
}

/// `Γ(x)` for positive integer or half-integer `x`.
pub fn gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && twice >= 1.0);
    let (mut v, mut y) = if twice as i64 % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while y < x - 0.25 {
        v *= y;
        y += 1.0;
    }
    v
}

/// `∫_0^∞ r · w r^{2p} e^{−2r^m} dr = w Γ((2p+2)/m) / (m 2^{(2p+2)/m})`.
pub fn pv_r_closed_form(f: &FormFactor) -> f64 {
    let s = (2.0 * f.p + 2.0) / f.m as f64;
    f.w * gamma_half_integer(s) / (f.m as f64 * 2f64.powf(s))
}

/// `σ^±_h(x)` with the angular integral done by explicit spherical
/// quadrature of the isotropic `|h(2x, Σ)|² = (w/4π)(2x)^{2p}e^{−2(2x)^m}`.
pub fn sigma_pm_spherical(h: &FormFactor, x: f64, beta: f64, plus: bool) -> f64 {
    use std::f64::consts::{PI, TAU};
    let rule = gauss_legendre(24);
    let r = 2.0 * x;
    let h_sq = |_cos_theta: f64, _phi: f64| h.w / (4.0 * PI) * r.powf(2.0 * h.p) * (-2.0 * r.powi(h.m as i32)).exp();
    // Gauss–Legendre in cos θ, periodic trapezoid in φ
    let n_phi = 64;
    let d_phi = TAU / n_phi as f64;
    let angular: f64 = rule
        .iter()
        .map(|&(ct, wt)| (0..n_phi).map(|k| wt * d_phi * h_sq(ct, d_phi * k as f64)).sum::<f64>())
        .sum();
    let y = beta * x;
    let boltz = if plus { y.exp() } else { (-y).exp() };
    2.0 * std::f64::consts::PI * x * x * boltz / y.sinh() * angular
}

// ---------------------------------------------------------------------------
// Random inputs

/// Random validated configuration with shared form factors and every
/// coupling bounded by `varkappa` in absolute value (one of them equal).
pub fn random_config(rng: &mut ChaCha8Rng, varkappa: f64) -> ModelConfig {
    let b1 = rng.random_range(0.2..0.8);
    let ratio = loop {
        let r: f64 = rng.random_range(1.15..2.9);
        if (r - 2.0).abs() > 0.1 {
            break r;
        }
    };
    let ps = [-0.5, 0.5, 1.5];
    let ff = |rng: &mut ChaCha8Rng| {
        FormFactor::new(ps[rng.random_range(0..3)], rng.random_range(1..=2), rng.random_range(0.5..2.0)).unwrap()
    };
    let g = ff(rng);
    let f = ff(rng);
    let mut k: Vec<f64> = (0..8).map(|_| varkappa * rng.random_range(-1.0..1.0)).collect();
    let top = rng.random_range(0..8);
    k[top] = varkappa.copysign(k[top]);
    let cfg = ModelConfig {
        b1,
        b2: b1 * ratio,
        beta: rng.random_range(0.5..2.0),
        lambda1: k[0],
        lambda2: k[1],
        kappa1: k[2],
        kappa2: k[3],
        mu1: k[4],
        mu2: k[5],
        nu1: k[6],
        nu2: k[7],
        g,
        f,
        g1: g,
        g2: g,
        f1: f,
        f2: f,
    };
    cfg.validate().unwrap();
    cfg
}

/// Smallest pairwise eigenvalue gap of every level-shift block, relative to
/// the block's largest eigenvalue modulus, using the polynomial oracle.
pub fn relative_spectral_gap(cfg: &ModelConfig) -> f64 {
    let sp = Spectra::compute(cfg, &Quadrature::default()).expect("valid configuration");
    let mut worst = f64::INFINITY;
    for e in BohrEnergy::all(cfg) {
        let roots = charpoly_eigenvalues(&level_shift_with(cfg, &sp, e).matrix);
        let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                worst = worst.min((roots[i] - roots[j]).norm() / scale);
            }
        }
    }
    worst
}

/// A random configuration whose level-shift spectra are well separated
/// (relative gap ≥ 1e-6), so that eigenvectors are determined to working
/// precision and can be compared against an oracle.
pub fn generic_config(rng: &mut ChaCha8Rng, varkappa: f64) -> ModelConfig {
    loop {
        let cfg = random_config(rng, varkappa);
        if relative_spectral_gap(&cfg) >= 1e-6 {
            return cfg;
        }
    }
}

/// A fixed moderately coupled configuration.
pub fn reference_config() -> ModelConfig {
    let g = FormFactor::new(0.5, 1, 1.0).unwrap();
    let f = FormFactor::new(-0.5, 2, 1.0).unwrap();
    ModelConfig {
        b1: 0.5,
        b2: 0.8,
        beta: 1.2,
        lambda1: 0.03,
        lambda2: 0.05,
        kappa1: 0.04,
        kappa2: 0.02,
        mu1: 0.02,
        mu2: 0.01,
        nu1: 0.03,
        nu2: 0.015,
        g,
        f,
        g1: g,
        g2: g,
        f1: f,
        f2: f,
    }
}

/// Full-rank random state `GG†/Tr(GG†)` with complex Ginibre `G`.
pub fn random_density_matrix(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = CMat::from_fn(4, 4, |_, _| {
        c(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    // exact hermiticity
    let m = (&m + m.adjoint()) * c(0.5, 0.0);
    DensityMatrix::new(m).unwrap()
}

/// Random X-form state: diagonal `x` and corner `[ρ]_{41} = α`, `[ρ]_{14} = ᾱ`.
pub fn random_x_state(rng: &mut ChaCha8Rng) -> (DensityMatrix, [f64; 4], C) {
    let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let x = [raw[0] / s, raw[1] / s, raw[2] / s, raw[3] / s];
    let mag = (x[0] * x[3]).sqrt() * rng.random_range(0.0..0.95);
    let alpha = C::from_polar(mag, rng.random_range(0.0..std::f64::consts::TAU));
    let mut m = CMat::zeros(4, 4);
    for j in 0..4 {
        m[(j, j)] = c(x[j], 0.0);
    }
    m[(3, 0)] = alpha;
    m[(0, 3)] = alpha.conj();
    (DensityMatrix::new(m).unwrap(), x, alpha)
}

/// Uniformly random complex number in the unit square around 0.
pub fn random_complex(rng: &mut ChaCha8Rng) -> C {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}
