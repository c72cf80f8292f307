//! Level-shift operators, resonance data, decoherence/thermalization rates
//! and the Davies generator of the two-qubit model.
//!
//! Energy basis (0-based): `Φ₀ = |++⟩, Φ₁ = |+−⟩, Φ₂ = |−+⟩, Φ₃ = |−−⟩` with
//! energies `B1+B2, B1−B2, −B1+B2, −B1−B2`. A pair `(k, l)` stands for
//! `Φ_k ⊗ Φ_l`, an eigenvector of the Liouvillian with eigenvalue `E_k − E_l`.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen_decompose, CMatrix, CVector};
use crate::quadrature::Quadrature;
use crate::spectral::{self, FormFactor, Sign};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Relative eigenvalue gap below which two resonances count as collided.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Physical parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub beta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub g: FormFactor,
    pub f: FormFactor,
    pub g1: FormFactor,
    pub g2: FormFactor,
    pub f1: FormFactor,
    pub f2: FormFactor,
}

impl ModelConfig {
    /// Checks field ordering and non-degeneracy, temperature and form factors.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.b1,
            self.b2,
            self.beta,
            self.lambda1,
            self.lambda2,
            self.kappa1,
            self.kappa2,
            self.mu1,
            self.mu2,
            self.nu1,
            self.nu2,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("all parameters must be finite".into()));
        }
        if !(self.b1 > 0.0 && self.b2 > self.b1) {
            return Err(Error::Config(format!(
                "fields must satisfy 0 < B1 < B2 (got B1 = {}, B2 = {})",
                self.b1, self.b2
            )));
        }
        if ((self.b2 / self.b1 - 2.0) / 2.0).abs() <= 1e-9 {
            return Err(Error::Config(format!(
                "non-degeneracy B2/B1 != 2 violated (B1 = {}, B2 = {})",
                self.b1, self.b2
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!("beta = {} must be > 0", self.beta)));
        }
        for (name, h) in self.form_factors() {
            h.validate()
                .map_err(|e| Error::Config(format!("form factor {name}: {e}")))?;
        }
        Ok(())
    }

    pub fn form_factors(&self) -> [(&'static str, FormFactor); 6] {
        [
            ("g", self.g),
            ("f", self.f),
            ("g1", self.g1),
            ("g2", self.g2),
            ("f1", self.f1),
            ("f2", self.f2),
        ]
    }

    /// `ϰ = max{|κⱼ|, |λⱼ|, |μⱼ|, |νⱼ|}`.
    pub fn varkappa(&self) -> f64 {
        [
            self.kappa1,
            self.kappa2,
            self.lambda1,
            self.lambda2,
            self.mu1,
            self.mu2,
            self.nu1,
            self.nu2,
        ]
        .iter()
        .fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Local form factors coincide with the collective ones (`g₁=g₂=g`, `f₁=f₂=f`).
    pub fn has_shared_form_factors(&self) -> bool {
        self.g1 == self.g && self.g2 == self.g && self.f1 == self.f && self.f2 == self.f
    }

    /// Energies of `Φ₀..Φ₃`.
    pub fn energies(&self) -> [f64; 4] {
        [
            self.b1 + self.b2,
            self.b1 - self.b2,
            -self.b1 + self.b2,
            -self.b1 - self.b2,
        ]
    }

    /// `Tr e^{−βH_S}`.
    pub fn partition_function(&self) -> f64 {
        self.energies().iter().map(|e| (-self.beta * e).exp()).sum()
    }

    /// Gibbs populations `e^{−βE_j}/Tr e^{−βH_S}`.
    pub fn gibbs_populations(&self) -> [f64; 4] {
        let z = self.partition_function();
        self.energies().map(|e| (-self.beta * e).exp() / z)
    }

    /// `(e₁, e₂) = (e^{2βB1}, e^{2βB2})`.
    pub fn boltzmann_ratios(&self) -> (f64, f64) {
        ((2.0 * self.beta * self.b1).exp(), (2.0 * self.beta * self.b2).exp())
    }

    /// Returns `true` (and logs a warning) when `ϰ²` is not small compared
    /// to the smallest Gibbs population, where dropped remainders may matter.
    pub fn warn_if_strong_coupling(&self) -> bool {
        let k2 = self.varkappa().powi(2);
        let pmin = self.gibbs_populations().iter().cloned().fold(f64::INFINITY, f64::min);
        let strong = k2 > 0.1 * pmin;
        if strong {
            warn!(
                "coupling varkappa^2 = {k2:e} exceeds 0.1 x smallest Gibbs population ({pmin:e}); \
                 second-order resonance results may be inaccurate"
            );
        }
        strong
    }
}

/// A Bohr energy `±e_index` with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BohrEnergy {
    /// 1..=5 for `e₁=0, e₂=2B1, e₃=2B2, e₄=2(B2−B1), e₅=2(B1+B2)`.
    pub index: usize,
    /// `true` for `−e_index` (never set for `index = 1`).
    pub negative: bool,
    pub value: f64,
    pub multiplicity: usize,
}

const BASES: [&[(usize, usize)]; 5] = [
    &[(0, 0), (1, 1), (2, 2), (3, 3)],
    &[(0, 2), (1, 3)],
    &[(0, 1), (2, 3)],
    &[(2, 1)],
    &[(0, 3)],
];

impl BohrEnergy {
    pub fn new(cfg: &ModelConfig, index: usize) -> Result<Self> {
        let value = match index {
            1 => 0.0,
            2 => 2.0 * cfg.b1,
            3 => 2.0 * cfg.b2,
            4 => 2.0 * (cfg.b2 - cfg.b1),
            5 => 2.0 * (cfg.b1 + cfg.b2),
            _ => return Err(Error::Domain(format!("Bohr energy index {index} not in 1..=5"))),
        };
        Ok(Self {
            index,
            negative: false,
            value,
            multiplicity: BASES[index - 1].len(),
        })
    }

    /// The mirrored energy `−e` (identity for `e = 0`).
    pub fn negated(self) -> Self {
        if self.index == 1 {
            return self;
        }
        Self {
            negative: !self.negative,
            value: -self.value,
            ..self
        }
    }

    /// All nine signed Bohr energies: `0, ±e₂, ±e₃, ±e₄, ±e₅`.
    pub fn all(cfg: &ModelConfig) -> Vec<Self> {
        let mut out = vec![Self::new(cfg, 1).expect("index 1")];
        for index in 2..=5 {
            let e = Self::new(cfg, index).expect("index in range");
            out.push(e);
            out.push(e.negated());
        }
        out
    }

    /// The energy `E_k − E_l` labelling the pair `(k, l)`.
    pub fn of_pair(cfg: &ModelConfig, k: usize, l: usize) -> Self {
        let (index, negative) = Self::label_of_pair(k, l);
        let e = Self::new(cfg, index).expect("index in range");
        if negative {
            e.negated()
        } else {
            e
        }
    }

    /// `(index, negative)` of the energy `E_k − E_l`; needs no field values
    /// because the ordering `0 < B1 < B2` fixes the combinatorics.
    pub fn label_of_pair(k: usize, l: usize) -> (usize, bool) {
        for (i, basis) in BASES.iter().enumerate() {
            if basis.contains(&(k, l)) {
                return (i + 1, false);
            }
            if basis.contains(&(l, k)) {
                return (i + 1, true);
            }
        }
        panic!("pair ({k}, {l}) outside the 4-level basis")
    }

    /// Ordered basis of the eigenspace as pairs `(k, l)` meaning `Φ_k ⊗ Φ_l`.
    pub fn basis(&self) -> Vec<(usize, usize)> {
        let base = BASES[self.index - 1];
        if self.negative {
            base.iter().map(|&(k, l)| (l, k)).collect()
        } else {
            base.to_vec()
        }
    }

    /// Position of the pair `(k, l)` in [`Self::basis`].
    pub fn position(&self, k: usize, l: usize) -> Option<usize> {
        self.basis().iter().position(|&p| p == (k, l))
    }

    pub fn label(&self) -> String {
        if self.negative {
            format!("-e{}", self.index)
        } else {
            format!("e{}", self.index)
        }
    }
}

/// All spectral constants entering the level-shift operators, evaluated once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectra {
    pub sigma_g_b1: f64,
    pub sigma_g_b2: f64,
    pub sigma_g1_b1: f64,
    pub sigma_g2_b2: f64,
    pub sigma_minus_g_b1: f64,
    pub sigma_minus_g_b2: f64,
    pub sigma_minus_g1_b1: f64,
    pub sigma_minus_g2_b2: f64,
    pub sigma_f_0: f64,
    pub sigma_f1_0: f64,
    pub sigma_f2_0: f64,
    pub r_g_b1: f64,
    pub r_g_b2: f64,
    pub r_g1_b1: f64,
    pub r_g2_b2: f64,
    pub r: f64,
    pub r_prime_1: f64,
    pub r_prime_2: f64,
}

impl Spectra {
    pub fn compute(cfg: &ModelConfig, quad: &Quadrature) -> Result<Self> {
        cfg.validate()?;
        let b = cfg.beta;
        let s = |h: &FormFactor, x: f64| spectral::sigma(h, x, b).map(|v| v.value);
        let sm = |h: &FormFactor, x: f64| spectral::sigma_pm(h, x, b, Sign::Minus).map(|v| v.value);
        let rg = |h: &FormFactor, x: f64| spectral::pv_rg(h, x, b, quad).map(|v| v.value);
        let r_g_b1 = rg(&cfg.g, cfg.b1)?;
        let r_g_b2 = rg(&cfg.g, cfg.b2)?;
        Ok(Self {
            sigma_g_b1: s(&cfg.g, cfg.b1)?,
            sigma_g_b2: s(&cfg.g, cfg.b2)?,
            sigma_g1_b1: s(&cfg.g1, cfg.b1)?,
            sigma_g2_b2: s(&cfg.g2, cfg.b2)?,
            sigma_minus_g_b1: sm(&cfg.g, cfg.b1)?,
            sigma_minus_g_b2: sm(&cfg.g, cfg.b2)?,
            sigma_minus_g1_b1: sm(&cfg.g1, cfg.b1)?,
            sigma_minus_g2_b2: sm(&cfg.g2, cfg.b2)?,
            sigma_f_0: s(&cfg.f, 0.0)?,
            sigma_f1_0: s(&cfg.f1, 0.0)?,
            sigma_f2_0: s(&cfg.f2, 0.0)?,
            r_g_b1,
            r_g_b2,
            r_g1_b1: if cfg.g1 == cfg.g { r_g_b1 } else { rg(&cfg.g1, cfg.b1)? },
            r_g2_b2: if cfg.g2 == cfg.g { r_g_b2 } else { rg(&cfg.g2, cfg.b2)? },
            r: spectral::pv_r(&cfg.f, quad)?.value,
            r_prime_1: spectral::r_prime(&cfg.g, cfg.b1)?.value,
            r_prime_2: spectral::r_prime(&cfg.g, cfg.b2)?.value,
        })
    }
}

/// Level-shift operator `Λ_e` in the ordered basis of `energy`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelShiftOperator {
    pub energy: BohrEnergy,
    pub matrix: CMatrix,
}

/// Coefficients of `Λ_{2B_j} = A·1 + [[e B + C, −e B], [−B, B − C]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelShift {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    /// `e = e^{2βB}` of the *other* spin.
    pub e: f64,
}

impl TwoLevelShift {
    pub fn matrix(&self) -> CMatrix {
        let TwoLevelShift { a, b, c, e } = *self;
        CMatrix::from_row_slice(2, 2, &[a + b * e + c, -b * e, -b, a + b - c])
    }

    /// `δ^{(±)} = A + ½B(1+e) ± ½[B²(1+e)² + 4C(B(e−1) + C)]^{1/2}`.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let TwoLevelShift { a, b, c, e } = *self;
        let root = (b * b * (1.0 + e).powi(2) + 4.0 * c * (b * (e - 1.0) + c)).sqrt();
        let mid = a + 0.5 * b * (1.0 + e);
        (mid + 0.5 * root, mid - 0.5 * root)
    }
}

fn spin_weights(cfg: &ModelConfig, sp: &Spectra) -> (f64, f64) {
    (
        cfg.mu1.powi(2) * sp.sigma_minus_g1_b1 + cfg.lambda1.powi(2) * sp.sigma_minus_g_b1,
        cfg.mu2.powi(2) * sp.sigma_minus_g2_b2 + cfg.lambda2.powi(2) * sp.sigma_minus_g_b2,
    )
}

/// Coefficients of `Λ_{2B1}` (`spin = 1`) or `Λ_{2B2}` (`spin = 2`).
pub fn two_level_shift(cfg: &ModelConfig, sp: &Spectra, spin: usize) -> TwoLevelShift {
    let (e1, e2) = cfg.boltzmann_ratios();
    let (c1, c2) = spin_weights(cfg, sp);
    let c = re(-2.0 * cfg.kappa1 * cfg.kappa2 * sp.r);
    if spin == 1 {
        let a = I * (c1 * (1.0 + e1) / 2.0)
            + I * (cfg.kappa1.powi(2) * sp.sigma_f_0 + cfg.nu1.powi(2) * sp.sigma_f1_0)
            - re(cfg.mu1.powi(2) * sp.r_g1_b1 + cfg.lambda1.powi(2) * sp.r_g_b1);
        TwoLevelShift { a, b: I * c2, c, e: e2 }
    } else {
        let a = I * (c2 * (1.0 + e2) / 2.0)
            + I * (cfg.kappa2.powi(2) * sp.sigma_f_0 + cfg.nu2.powi(2) * sp.sigma_f2_0)
            - re(cfg.mu2.powi(2) * sp.r_g2_b2 + cfg.lambda2.powi(2) * sp.r_g_b2);
        TwoLevelShift { a, b: I * c1, c, e: e1 }
    }
}

fn positive_level_shift(cfg: &ModelConfig, sp: &Spectra, index: usize) -> CMatrix {
    let (e1, e2) = cfg.boltzmann_ratios();
    let (c1, c2) = spin_weights(cfg, sp);
    match index {
        1 => {
            let m1 = [
                [e1, 0.0, -e1, 0.0],
                [0.0, e1, 0.0, -e1],
                [-1.0, 0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0, 1.0],
            ];
            let m2 = [
                [e2, -e2, 0.0, 0.0],
                [-1.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, e2, -e2],
                [0.0, 0.0, -1.0, 1.0],
            ];
            CMatrix::from_fn(4, 4, |i, j| I * (c1 * m1[i][j] + c2 * m2[i][j]))
        }
        2 => two_level_shift(cfg, sp, 1).matrix(),
        3 => two_level_shift(cfg, sp, 2).matrix(),
        4 | 5 => {
            let dephasing = if index == 4 {
                (cfg.kappa1 - cfg.kappa2).powi(2)
            } else {
                (cfg.kappa1 + cfg.kappa2).powi(2)
            };
            let width = cfg.mu1.powi(2) * sp.sigma_g1_b1
                + cfg.lambda1.powi(2) * sp.sigma_g_b1
                + cfg.mu2.powi(2) * sp.sigma_g2_b2
                + cfg.lambda2.powi(2) * sp.sigma_g_b2
                + dephasing * sp.sigma_f_0
                + cfg.nu1.powi(2) * sp.sigma_f1_0
                + cfg.nu2.powi(2) * sp.sigma_f2_0;
            let shift1 = cfg.mu1.powi(2) * sp.r_g1_b1 + cfg.lambda1.powi(2) * sp.r_g_b1;
            let shift2 = cfg.mu2.powi(2) * sp.r_g2_b2 + cfg.lambda2.powi(2) * sp.r_g_b2;
            let shift = if index == 4 {
                shift1 - shift2
            } else {
                -shift1 - shift2
            };
            CMatrix::from_element(1, 1, I * width + re(shift))
        }
        _ => unreachable!("Bohr energy index validated on construction"),
    }
}

/// `Λ_e` from precomputed spectral constants. `Λ_{−e}` is the entrywise
/// negated complex conjugate of `Λ_e` in the transposed-pair basis.
pub fn level_shift_with(cfg: &ModelConfig, sp: &Spectra, energy: BohrEnergy) -> LevelShiftOperator {
    let positive = positive_level_shift(cfg, sp, energy.index);
    let matrix = if energy.negative {
        positive.map(|z| -z.conj())
    } else {
        positive
    };
    LevelShiftOperator { energy, matrix }
}

/// Builds `Λ_e` for a validated configuration.
pub fn build_level_shift(cfg: &ModelConfig, e: BohrEnergy) -> Result<LevelShiftOperator> {
    let sp = Spectra::compute(cfg, &Quadrature::default())?;
    Ok(level_shift_with(cfg, &sp, e))
}

/// One second-order resonance: `δ`, right vector `η` and left vector `η̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceDatum {
    pub energy: BohrEnergy,
    /// 1-based branch label.
    pub branch: usize,
    pub delta: Complex64,
    pub eta: Vec<Complex64>,
    pub eta_tilde: Vec<Complex64>,
}

impl ResonanceDatum {
    /// `ε = e + δ`.
    pub fn epsilon(&self) -> Complex64 {
        re(self.energy.value) + self.delta
    }
}

fn datum(energy: BohrEnergy, branch: usize, delta: Complex64, eta: Vec<Complex64>, eta_tilde: Vec<Complex64>) -> ResonanceDatum {
    ResonanceDatum {
        energy,
        branch,
        delta,
        eta,
        eta_tilde,
    }
}

fn check_gap(energy: &BohrEnergy, deltas: &[Complex64]) -> Result<()> {
    let scale = deltas.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for i in 0..deltas.len() {
        for j in i + 1..deltas.len() {
            let gap = (deltas[i] - deltas[j]).norm();
            if gap <= DEGENERACY_GAP * scale || scale == 0.0 {
                return Err(Error::Degeneracy {
                    energy: energy.label(),
                    first: i + 1,
                    second: j + 1,
                    gap,
                });
            }
        }
    }
    Ok(())
}

fn zero_energy_data(cfg: &ModelConfig, sp: &Spectra, energy: BohrEnergy) -> Vec<ResonanceDatum> {
    let (e1, e2) = cfg.boltzmann_ratios();
    let (c1, c2) = spin_weights(cfg, sp);
    let z = cfg.partition_function();
    let (s1, s2) = (e1.sqrt(), e2.sqrt());
    let d2 = I * (c2 * (1.0 + e2));
    let d3 = I * (c1 * (1.0 + e1));
    let v = |xs: [f64; 4]| xs.iter().map(|&x| re(x)).collect::<Vec<_>>();
    vec![
        datum(
            energy,
            1,
            re(0.0),
            v([1.0, 1.0, 1.0, 1.0]),
            v([1.0 / (s1 * s2) / z, s2 / s1 / z, s1 / s2 / z, s1 * s2 / z]),
        ),
        datum(
            energy,
            2,
            d2,
            v([-e2, 1.0, -e2, 1.0]),
            v([-1.0 / e1, 1.0 / e1, -1.0, 1.0].map(|x| x * s1 / s2 / z)),
        ),
        datum(
            energy,
            3,
            d3,
            v([-e1, -e1, 1.0, 1.0]),
            v([-1.0 / e2, -1.0, 1.0 / e2, 1.0].map(|x| x * s2 / s1 / z)),
        ),
        datum(
            energy,
            4,
            d2 + d3,
            v([e1 * e2, -e1, -e2, 1.0]),
            v([1.0, -1.0, -1.0, 1.0].map(|x| x / (s1 * s2) / z)),
        ),
    ]
}

fn two_level_data(shift: &TwoLevelShift, energy: BohrEnergy) -> Result<Vec<ResonanceDatum>> {
    let (dp, dm) = shift.eigenvalues();
    check_gap(&energy, &[dp, dm])?;
    let m = shift.matrix();
    let out = [(1, dp), (2, dm)]
        .into_iter()
        .map(|(branch, d)| {
            let (eta, eta_tilde) = two_level_vectors(&m, d);
            datum(energy, branch, d, eta, eta_tilde)
        })
        .collect();
    Ok(out)
}

/// Right and left null vectors of a 2×2 `m − δ`, normalised so that `⟨η̃, η⟩ = 1`.
///
/// The textbook form `η = (1, 1 + (A + C − δ)/(eB))` loses all precision once the
/// off-diagonal coupling `B` is small, so each vector is read off the row (column)
/// of `m − δ` with the larger norm instead.
fn two_level_vectors(m: &CMatrix, d: Complex64) -> (Vec<Complex64>, Vec<Complex64>) {
    let s = m - CMatrix::identity(2, 2) * d;
    let row_norm = |i: usize| s[(i, 0)].norm_sqr() + s[(i, 1)].norm_sqr();
    let col_norm = |j: usize| s[(0, j)].norm_sqr() + s[(1, j)].norm_sqr();
    let i = if row_norm(0) >= row_norm(1) { 0 } else { 1 };
    let j = if col_norm(0) >= col_norm(1) { 0 } else { 1 };
    let mut eta = [s[(i, 1)], -s[(i, 0)]];
    let mut eta_tilde = [s[(1, j)].conj(), -s[(0, j)].conj()];
    if row_norm(i) == 0.0 {
        eta = [re(1.0), re(0.0)];
        eta_tilde = eta;
    }
    // unit right vector with its largest component real and positive
    let big = if eta[0].norm() >= eta[1].norm() { eta[0] } else { eta[1] };
    let scale = big.conj() / (big.norm() * (eta[0].norm_sqr() + eta[1].norm_sqr()).sqrt());
    let eta = eta.map(|z| z * scale);
    let ip = eta_tilde[0].conj() * eta[0] + eta_tilde[1].conj() * eta[1];
    let eta_tilde = eta_tilde.map(|z| z / ip.conj());
    (eta.to_vec(), eta_tilde.to_vec())
}

fn diagonal_data(matrix: &CMatrix, energy: BohrEnergy) -> Vec<ResonanceDatum> {
    let n = matrix.nrows();
    (0..n)
        .map(|s| {
            let mut unit = vec![re(0.0); n];
            unit[s] = re(1.0);
            datum(energy, s + 1, matrix[(s, s)], unit.clone(), unit)
        })
        .collect()
}

fn generic_data(matrix: &CMatrix, energy: BohrEnergy) -> Result<Vec<ResonanceDatum>> {
    let eig = eigen_decompose(matrix)?;
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (eig.values[i], eig.values[j]);
        a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
    });
    let sorted: Vec<Complex64> = order.iter().map(|&i| eig.values[i]).collect();
    check_gap(&energy, &sorted)?;
    let as_vec = |v: &CVector| v.iter().cloned().collect::<Vec<_>>();
    Ok(order
        .iter()
        .enumerate()
        .map(|(pos, &i)| datum(energy, pos + 1, eig.values[i], as_vec(&eig.right[i]), as_vec(&eig.left[i])))
        .collect())
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == re(0.0)))
}

fn positive_resonance_data(cfg: &ModelConfig, sp: &Spectra, energy: BohrEnergy) -> Result<Vec<ResonanceDatum>> {
    let lso = level_shift_with(cfg, sp, energy);
    match energy.index {
        1 => Ok(zero_energy_data(cfg, sp, energy)),
        _ if is_diagonal(&lso.matrix) => Ok(diagonal_data(&lso.matrix, energy)),
        2 | 3 if cfg.has_shared_form_factors() => {
            let shift = two_level_shift(cfg, sp, energy.index - 1);
            two_level_data(&shift, energy)
        }
        _ => generic_data(&lso.matrix, energy),
    }
}

/// Resonance data of `energy` from precomputed spectral constants.
///
/// Branch order: `e = 0` as `(0, spin-2 rate, spin-1 rate, sum)`;
/// `e = 2B_j` as `(+, −)`; `−e` mirrors `e` with `δ → −δ̄`, `η → η̄`, `η̃ → η̃̄`.
pub fn resonance_data_with(cfg: &ModelConfig, sp: &Spectra, energy: BohrEnergy) -> Result<Vec<ResonanceDatum>> {
    let positive = BohrEnergy { negative: false, value: energy.value.abs(), ..energy };
    let data = positive_resonance_data(cfg, sp, positive)?;
    if !energy.negative {
        return Ok(data);
    }
    Ok(data
        .into_iter()
        .map(|d| ResonanceDatum {
            energy,
            branch: d.branch,
            delta: -d.delta.conj(),
            eta: d.eta.iter().map(|z| z.conj()).collect(),
            eta_tilde: d.eta_tilde.iter().map(|z| z.conj()).collect(),
        })
        .collect())
}

/// Resonance data for one Bohr energy with default quadrature settings.
pub fn resonance_data(cfg: &ModelConfig, e: BohrEnergy) -> Result<Vec<ResonanceDatum>> {
    let sp = Spectra::compute(cfg, &Quadrature::default())?;
    resonance_data_with(cfg, &sp, e)
}

/// Resonance data for all nine signed Bohr energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceTable {
    pub entries: Vec<Vec<ResonanceDatum>>,
}

impl ResonanceTable {
    pub fn compute(cfg: &ModelConfig, quad: &Quadrature) -> Result<Self> {
        let sp = Spectra::compute(cfg, quad)?;
        Self::from_spectra(cfg, &sp)
    }

    pub fn from_spectra(cfg: &ModelConfig, sp: &Spectra) -> Result<Self> {
        cfg.warn_if_strong_coupling();
        let entries = BohrEnergy::all(cfg)
            .into_iter()
            .map(|e| resonance_data_with(cfg, sp, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { entries })
    }

    /// Data for the signed energy with the given index and sign.
    pub fn get(&self, energy: &BohrEnergy) -> &[ResonanceDatum] {
        self.by_label(energy.index, energy.negative)
    }

    /// Data for the energy `±e_index`.
    pub fn by_label(&self, index: usize, negative: bool) -> &[ResonanceDatum] {
        let slot = match (index, negative) {
            (1, _) => 0,
            (i, false) => 2 * i - 3,
            (i, true) => 2 * i - 2,
        };
        &self.entries[slot]
    }
}

/// Second-order rates and the decay constants of the entanglement bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub gamma_th: f64,
    pub gamma_dec_2: f64,
    pub gamma_dec_3: f64,
    pub gamma_dec_4: f64,
    pub gamma_dec_5: f64,
    #[serde(rename = "Y2")]
    pub y2: f64,
    #[serde(rename = "Y3")]
    pub y3: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
    pub delta5: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
}

/// `|Im [4κ₁²κ₂²r² − ¼L²σ² − 2iκ₁κ₂ L r r′]^{1/2}|` (principal root).
fn y_term(cfg: &ModelConfig, sp: &Spectra, l2: f64, sigma: f64, r_prime: f64) -> f64 {
    let k = cfg.kappa1 * cfg.kappa2;
    let arg = re(4.0 * k * k * sp.r * sp.r - 0.25 * l2 * l2 * sigma * sigma)
        - I * (2.0 * k * l2 * sp.r * r_prime);
    arg.sqrt().im.abs()
}

/// Thermalization and decoherence rates from precomputed spectral constants.
pub fn rates_with(cfg: &ModelConfig, sp: &Spectra) -> Result<RateReport> {
    if !cfg.has_shared_form_factors() {
        return Err(Error::Precondition(
            "rate formulas require shared form factors g1 = g2 = g and f1 = f2 = f".into(),
        ));
    }
    let l1 = cfg.lambda1.powi(2) + cfg.mu1.powi(2);
    let l2 = cfg.lambda2.powi(2) + cfg.mu2.powi(2);
    let w1 = l1 * sp.sigma_g_b1;
    let w2 = l2 * sp.sigma_g_b2;
    let y2 = y_term(cfg, sp, l2, sp.sigma_g_b2, sp.r_prime_2);
    let y3 = y_term(cfg, sp, l1, sp.sigma_g_b1, sp.r_prime_1);
    let nn = cfg.nu1.powi(2) + cfg.nu2.powi(2);
    let gamma_th = w1.min(w2);
    let gamma_dec_2 = 0.5 * w1 + 0.5 * w2 - y2 + (cfg.kappa1.powi(2) + cfg.nu1.powi(2)) * sp.sigma_f_0;
    let gamma_dec_3 = 0.5 * w1 + 0.5 * w2 - y3 + (cfg.kappa2.powi(2) + cfg.nu2.powi(2)) * sp.sigma_f_0;
    let gamma_dec_4 = w1 + w2 + ((cfg.kappa1 - cfg.kappa2).powi(2) + nn) * sp.sigma_f_0;
    let gamma_dec_5 = w1 + w2 + ((cfg.kappa1 + cfg.kappa2).powi(2) + nn) * sp.sigma_f_0;
    for (name, g) in [
        ("gamma_th", gamma_th),
        ("gamma_dec_2", gamma_dec_2),
        ("gamma_dec_3", gamma_dec_3),
        ("gamma_dec_4", gamma_dec_4),
        ("gamma_dec_5", gamma_dec_5),
    ] {
        if g < -1e-10 {
            return Err(Error::Consistency(format!("{name} = {g:e} is negative")));
        }
    }
    let delta5 = w1 + w2 + ((cfg.kappa1 + cfg.kappa2).powi(2) + nn) * sp.sigma_f_0;
    Ok(RateReport {
        gamma_th,
        gamma_dec_2,
        gamma_dec_3,
        gamma_dec_4,
        gamma_dec_5,
        y2,
        y3,
        delta2: w1,
        delta3: w2,
        delta4: w1 + w2,
        delta5,
        delta_plus: w1.max(w2),
        delta_minus: w1.min(w2),
    })
}

/// Thermalization and decoherence rates with default quadrature settings.
pub fn rates(cfg: &ModelConfig) -> Result<RateReport> {
    let sp = Spectra::compute(cfg, &Quadrature::default())?;
    rates_with(cfg, &sp)
}

/// Generator of the Davies semigroup on 4×4 matrices, acting on the
/// row-major vectorization `ρ ↦ ρ[4m + n]`.
///
/// On each cluster block the entries are `K[(m,n),(k,l)] = ⟨Φ_mn, (iΛ_e)* Φ_kl⟩`.
pub fn davies_generator_with(cfg: &ModelConfig, sp: &Spectra) -> CMatrix {
    let mut k = CMatrix::zeros(16, 16);
    for e in BohrEnergy::all(cfg) {
        let lso = level_shift_with(cfg, sp, e);
        let basis = e.basis();
        for (i, &(m, n)) in basis.iter().enumerate() {
            for (j, &(kk, ll)) in basis.iter().enumerate() {
                k[(4 * m + n, 4 * kk + ll)] = (I * lso.matrix[(j, i)]).conj();
            }
        }
    }
    k
}

/// Davies generator with default quadrature settings.
pub fn davies_generator(cfg: &ModelConfig) -> Result<CMatrix> {
    let sp = Spectra::compute(cfg, &Quadrature::default())?;
    Ok(davies_generator_with(cfg, &sp))
}
