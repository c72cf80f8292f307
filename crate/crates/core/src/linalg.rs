//! Dense eigen-decomposition of small complex, non-hermitian matrices.
//!
//! Hessenberg reduction followed by single-shift complex QR with Wilkinson
//! shifts yields a Schur form `A = Z T Z†`. Right eigenvectors come from
//! back substitution on `T`; left eigenvectors are the rows of the inverse
//! eigenvector matrix, which makes the pair bi-orthonormal by construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Complex Schur decomposition `A = Z T Z†` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub z: CMatrix,
    pub t: CMatrix,
}

/// Eigenvalues with bi-orthonormal right and left eigenvectors.
///
/// `right[s]` satisfies `A r = λ r`, `left[s]` satisfies `A† l = conj(λ) l`
/// and `⟨left[s], right[s']⟩ = δ_{ss'}` (inner product antilinear in the
/// first slot).
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Vec<Complex64>,
    pub right: Vec<CVector>,
    pub left: Vec<CVector>,
}

fn hessenberg(a: &mut CMatrix, z: &mut CMatrix) {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let alpha = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // A <- (I - 2vv†) A (I - 2vv†), Z <- Z (I - 2vv†)
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * a[(k + 1 + i, j)])
                .sum();
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] -= 2.0 * vi * dot;
            }
        }
        for m in [&mut *a, &mut *z] {
            for i in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(j, vj)| m[(i, k + 1 + j)] * vj)
                    .sum();
                for (j, vj) in v.iter().enumerate() {
                    m[(i, k + 1 + j)] -= 2.0 * dot * vj.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Computes the complex Schur form of a square matrix.
pub fn schur(a: &CMatrix) -> Result<Schur> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "schur needs a square matrix");
    let mut h = a.clone();
    let mut z = CMatrix::identity(n, n);
    if n <= 1 {
        return Ok(Schur { z, t: h });
    }
    hessenberg(&mut h, &mut z);
    let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let zero = Complex64::new(0.0, 0.0);

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let reference = if diag > 0.0 { diag } else { scale };
            if sub <= f64::EPSILON * reference || sub <= f64::MIN_POSITIVE {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_SWEEPS_PER_EIGENVALUE * n {
            return Err(Error::Numeric {
                what: "complex QR iteration".into(),
                residual: h[(hi, hi - 1)].norm(),
            });
        }
        let mu = if iter % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (gx, gy) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), zero)
            } else {
                (x / r, y / r)
            };
            for j in k..n {
                let top = h[(k, j)];
                let bot = h[(k + 1, j)];
                h[(k, j)] = gx.conj() * top + gy.conj() * bot;
                h[(k + 1, j)] = -gy * top + gx * bot;
            }
            rotations.push((gx, gy));
        }
        for (offset, &(gx, gy)) in rotations.iter().enumerate() {
            let k = l + offset;
            for m in [&mut h, &mut z] {
                let rows = m.nrows();
                for i in 0..rows {
                    let left = m[(i, k)];
                    let right = m[(i, k + 1)];
                    m[(i, k)] = left * gx + right * gy;
                    m[(i, k + 1)] = -left * gy.conj() + right * gx.conj();
                }
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = zero;
        }
    }
    Ok(Schur { z, t: h })
}

/// Eigenvalues in Schur order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let s = schur(a)?;
    Ok((0..a.nrows()).map(|i| s.t[(i, i)]).collect())
}

/// Full eigen-decomposition with bi-orthonormal left/right eigenvectors.
///
/// The caller is responsible for checking that eigenvalues are separated;
/// near-coincident eigenvalues produce ill-conditioned vectors.
pub fn eigen_decompose(a: &CMatrix) -> Result<EigenBasis> {
    let n = a.nrows();
    let Schur { z, t } = schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * scale;

    let mut v = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut y = CVector::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let rhs: Complex64 = (j + 1..=k).map(|i| t[(j, i)] * y[i]).sum();
            let mut denom = t[(j, j)] - values[k];
            if denom.norm() < floor {
                denom = Complex64::new(floor, 0.0);
            }
            y[j] = -rhs / denom;
        }
        let x = &z * y;
        let norm = x.norm();
        v.set_column(k, &(x / Complex64::new(norm, 0.0)));
    }
    let inv = v.clone().try_inverse().ok_or_else(|| Error::Numeric {
        what: "eigenvector matrix inversion".into(),
        residual: f64::INFINITY,
    })?;
    let right = (0..n).map(|k| v.column(k).into_owned()).collect();
    let left = (0..n)
        .map(|s| CVector::from_iterator(n, (0..n).map(|i| inv[(s, i)].conj())))
        .collect();
    Ok(EigenBasis {
        values,
        right,
        left,
    })
}

/// `⟨x, y⟩`, antilinear in `x`.
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}
