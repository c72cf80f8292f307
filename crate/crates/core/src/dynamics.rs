//! Cluster-decoupled resonance propagation of the reduced density matrix
//! and the closed-form population and coherence trajectories.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::resonance::{self, BohrEnergy, ModelConfig, ResonanceDatum, ResonanceTable};

/// A 4×4 density matrix in the energy basis `|++⟩, |+−⟩, |−+⟩, |−−⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking shape, hermiticity and unit trace
    /// (both to `1e-12`).
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != 4 || entries.ncols() != 4 {
            return Err(Error::Domain("density matrix must be 4x4".into()));
        }
        let herm = (&entries - entries.adjoint()).norm();
        if herm > 1e-12 {
            return Err(Error::Domain(format!("density matrix not hermitian (defect {herm:e})")));
        }
        let tr = entries.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::Domain(format!("density matrix trace {tr} != 1")));
        }
        Ok(Self { entries })
    }

    /// Diagonal `[ρ]_{jj}`.
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|j| self.entries[(j, j)].re)
    }

    /// The `|−−⟩⟨++|` coherence `α = [ρ]_{41}` (1-based).
    pub fn alpha(&self) -> Complex64 {
        self.entries[(3, 0)]
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }
}

/// Index pairs `(k, l)` evolving jointly, all with `E_k − E_l = energy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub energy: BohrEnergy,
    pub pairs: Vec<(usize, usize)>,
}

/// The five clusters on and above the diagonal, `C(0), C(2B1), C(2B2),
/// C(−2(B2−B1)), C(2(B1+B2))`, followed by their four transposed mirrors.
pub fn cluster_sets(cfg: &ModelConfig) -> Result<Vec<ClusterSet>> {
    cfg.validate()?;
    let e = |i| BohrEnergy::new(cfg, i).expect("index in range");
    let upper = [e(1), e(2), e(3), e(4).negated(), e(5)];
    let mut out: Vec<ClusterSet> = upper
        .iter()
        .map(|&energy| ClusterSet {
            energy,
            pairs: energy.basis(),
        })
        .collect();
    for &energy in &upper[1..] {
        let mirror = energy.negated();
        out.push(ClusterSet {
            energy: mirror,
            pairs: mirror.basis(),
        });
    }
    Ok(out)
}

/// A transition amplitude, or the structural zero between different clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    InCluster(Complex64),
    CrossCluster,
}

impl Amplitude {
    pub fn value(&self) -> Complex64 {
        match *self {
            Amplitude::InCluster(z) => z,
            Amplitude::CrossCluster => Complex64::new(0.0, 0.0),
        }
    }
}

fn amplitude_from(data: &[ResonanceDatum], t: f64, row: usize, col: usize) -> Complex64 {
    data.iter()
        .map(|d| (Complex64::new(0.0, t) * d.epsilon()).exp() * d.eta[col] * d.eta_tilde[row].conj())
        .sum()
}

/// `A_t(m,n;k,l) = Σ_s e^{itε_s} ⟨Φ_l⊗Φ_k, η_s⟩⟨η̃_s, Φ_n⊗Φ_m⟩` using the
/// resonances of `E_n − E_m` and `ε = e + δ`.
pub fn amplitude(table: &ResonanceTable, t: f64, m: usize, n: usize, k: usize, l: usize) -> Amplitude {
    if BohrEnergy::label_of_pair(m, n) != BohrEnergy::label_of_pair(k, l) {
        return Amplitude::CrossCluster;
    }
    if t == 0.0 {
        // Completeness of the bi-orthonormal resonance basis; exact rather
        // than rounded.
        let one = if (m, n) == (k, l) { 1.0 } else { 0.0 };
        return Amplitude::InCluster(Complex64::new(one, 0.0));
    }
    let (index, negative) = BohrEnergy::label_of_pair(n, m);
    let data = table.by_label(index, negative);
    let energy = data[0].energy;
    let col = energy.position(l, k).expect("pair in cluster");
    let row = energy.position(n, m).expect("pair in cluster");
    Amplitude::InCluster(amplitude_from(data, t, row, col))
}

/// Amplitude tables of every cluster at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub t: f64,
    /// One block per entry of [`cluster_sets`]: `blocks[c][(i, j)] = A_t(pairs[i]; pairs[j])`.
    pub clusters: Vec<ClusterSet>,
    pub blocks: Vec<CMatrix>,
}

impl Propagator {
    pub fn new(cfg: &ModelConfig, table: &ResonanceTable, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time t = {t} must be >= 0")));
        }
        let clusters = cluster_sets(cfg)?;
        let blocks = clusters
            .iter()
            .map(|c| {
                let n = c.pairs.len();
                CMatrix::from_fn(n, n, |i, j| {
                    let (m, nn) = c.pairs[i];
                    let (k, l) = c.pairs[j];
                    amplitude(table, t, m, nn, k, l).value()
                })
            })
            .collect();
        Ok(Self { t, clusters, blocks })
    }

    /// `A_t(m,n;k,l)`, a structural zero across clusters.
    pub fn get(&self, m: usize, n: usize, k: usize, l: usize) -> Amplitude {
        for (c, block) in self.clusters.iter().zip(&self.blocks) {
            if let Some(i) = c.pairs.iter().position(|&p| p == (m, n)) {
                return match c.pairs.iter().position(|&p| p == (k, l)) {
                    Some(j) => Amplitude::InCluster(block[(i, j)]),
                    None => Amplitude::CrossCluster,
                };
            }
        }
        unreachable!("every pair belongs to a cluster")
    }

    /// Applies the main term of the cluster dynamics to `rho0`.
    pub fn apply(&self, rho0: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(4, 4);
        for (c, block) in self.clusters.iter().zip(&self.blocks) {
            for (i, &(m, n)) in c.pairs.iter().enumerate() {
                if m > n {
                    continue;
                }
                let v: Complex64 = c
                    .pairs
                    .iter()
                    .enumerate()
                    .map(|(j, &(k, l))| block[(i, j)] * rho0[(k, l)])
                    .sum();
                out[(m, n)] = v;
                if m != n {
                    out[(n, m)] = v.conj();
                }
            }
        }
        out
    }
}

/// `ρ_t` from `ρ_0` (main resonance term; entries below the diagonal by
/// hermiticity).
pub fn evolve(cfg: &ModelConfig, rho0: &DensityMatrix, t: f64, table: &ResonanceTable) -> Result<DensityMatrix> {
    let prop = Propagator::new(cfg, table, t)?;
    Ok(DensityMatrix {
        entries: prop.apply(&rho0.entries),
    })
}

/// Gibbs state `e^{−βH_S}/Tr e^{−βH_S}`.
pub fn gibbs_state(cfg: &ModelConfig) -> DensityMatrix {
    let p = cfg.gibbs_populations();
    DensityMatrix {
        entries: CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                Complex64::new(p[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    }
}

/// Population decay constants `(δ₂, δ₃, δ₄)` of the diagonal cluster, with
/// `δ₂` the spin-2 rate and `δ₃` the spin-1 rate (imaginary parts of the
/// `e = 0` resonances in branch order).
pub fn population_rates(cfg: &ModelConfig) -> Result<(f64, f64, f64)> {
    let r = resonance::rates(cfg)?;
    Ok((r.delta3, r.delta2, r.delta3 + r.delta2))
}

/// Closed-form populations `(x1, x2, x3, x4)` for the initial family
/// `a1|++⟩ + a2|−−⟩` with `p = |a1|²/(|a1|²+|a2|²)`.
pub fn populations_closed_form(cfg: &ModelConfig, p: f64, t: f64) -> Result<[f64; 4]> {
    let (d2, d3, d4) = population_rates(cfg)?;
    populations_closed_form_with(cfg, (d2, d3, d4), p, t)
}

/// As [`populations_closed_form`] with the decay constants supplied.
pub fn populations_closed_form_with(cfg: &ModelConfig, rates: (f64, f64, f64), p: f64, t: f64) -> Result<[f64; 4]> {
    let (d2, d3, d4) = rates;
    if !(d2 > 0.0 && d3 > 0.0) {
        return Err(Error::Precondition(format!(
            "population decay constants must be positive (got {d2:e}, {d3:e})"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    let (e1, e2) = cfg.boltzmann_ratios();
    let z = cfg.partition_function();
    let (b1, b2, beta) = (cfg.b1, cfg.b2, cfg.beta);
    let x2e = (-t * d2).exp();
    let x3e = (-t * d3).exp();
    let x4e = (-t * d4).exp();
    let x1 = (-beta * (b1 + b2)).exp() / z
        * ((1.0 - x2e) * (1.0 - x3e)
            + p * (x2e * (e2 + 1.0) + x3e * (e1 + 1.0) + x4e * (e1 * e2 - 1.0)));
    let x2 = (-beta * (b1 - b2)).exp() / z
        * ((1.0 - x2e) / e2 * (p * (e2 + 1.0) - 1.0)
            + (1.0 - x3e) * (-p * (e1 + 1.0) + 1.0)
            + (1.0 - x4e) / e2 * (p * (e1 * e2 - 1.0) + 1.0));
    let x3 = (-beta * (-b1 + b2)).exp() / z
        * ((1.0 - x2e) * (-p * (e2 + 1.0) + 1.0)
            + (1.0 - x3e) / e1 * (p * (e1 + 1.0) - 1.0)
            + (1.0 - x4e) / e1 * (p * (e1 * e2 - 1.0) + 1.0));
    let x4 = (beta * (b1 + b2)).exp() / z
        * ((1.0 - p) * (1.0 + x2e / e2) * (1.0 + x3e / e1) + p * (1.0 - x2e) * (1.0 - x3e));
    Ok([x1, x2, x3, x4])
}

/// `α(t) = e^{itε₅} α(0)` with `ε₅ = 2(B1+B2) + δ` from the resonance datum of `e₅`.
pub fn alpha_closed_form_with(e5: &ResonanceDatum, alpha0: Complex64, t: f64) -> Complex64 {
    let eps = e5.epsilon();
    Complex64::from_polar((-t * eps.im).exp(), t * eps.re) * alpha0
}

/// `α(t)` for a configuration (computes the `e₅` resonance).
pub fn alpha_closed_form(cfg: &ModelConfig, alpha0: Complex64, t: f64) -> Result<Complex64> {
    let e5 = BohrEnergy::new(cfg, 5)?;
    let data = resonance::resonance_data(cfg, e5)?;
    Ok(alpha_closed_form_with(&data[0], alpha0, t))
}
