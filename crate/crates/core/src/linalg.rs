//! Thin dense helpers over `faer`: LU with a condition estimate, singular
//! values, and a power-iteration norm estimate used as a cross-check.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::{Mat, Side};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Condition numbers above this are treated as numerically singular.
pub const CONDITION_LIMIT: f64 = 1e14;

pub(crate) fn column(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn to_vec(m: &Mat<c64>) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

pub(crate) fn matvec(a: &Mat<c64>, x: &[c64]) -> Vec<c64> {
    to_vec(&(a * column(x)))
}

pub(crate) fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &Mat<c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("svd failed: {e:?}")))
}

/// Largest singular value of `a^{-1}`, guarded by the condition limit.
pub fn inverse_norm_from_svd(a: &Mat<c64>) -> Result<f64> {
    let sv = singular_values(a)?;
    let (max, min) = (sv[0], *sv.last().unwrap());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition.is_finite() && condition <= CONDITION_LIMIT) {
        return Err(Error::Singular { condition });
    }
    Ok(1.0 / min)
}

pub struct LuSolver {
    lu: faer::linalg::solvers::PartialPivLu<c64>,
    dim: usize,
    norm1: f64,
}

impl LuSolver {
    pub fn new(a: &Mat<c64>) -> Result<Self> {
        let dim = a.nrows();
        let mut norm1 = 0.0f64;
        for j in 0..a.ncols() {
            let col: f64 = (0..dim).map(|i| a[(i, j)].norm()).sum();
            if !col.is_finite() {
                return Err(Error::LinearAlgebra("non-finite matrix entry".into()));
            }
            norm1 = norm1.max(col);
        }
        Ok(Self {
            lu: a.partial_piv_lu(),
            dim,
            norm1,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[c64]) -> Vec<c64> {
        to_vec(&self.lu.solve(column(b)))
    }

    pub fn solve_adjoint(&self, b: &[c64]) -> Vec<c64> {
        to_vec(&self.lu.solve_adjoint(column(b)))
    }

    pub fn inverse(&self) -> Mat<c64> {
        self.lu.inverse()
    }

    /// 1-norm condition estimate (Hager's method with Higham's
    /// alternating-sign safeguard).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![c64::new(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0f64;
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let y_norm: f64 = y.iter().map(|z| z.norm()).sum();
            if !y_norm.is_finite() {
                return f64::INFINITY;
            }
            estimate = estimate.max(y_norm);
            let signs: Vec<c64> = y
                .iter()
                .map(|z| {
                    let r = z.norm();
                    if r > 0.0 {
                        z / r
                    } else {
                        c64::new(1.0, 0.0)
                    }
                })
                .collect();
            let z = self.solve_adjoint(&signs);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_index {
                break;
            }
            last_index = j;
            x = vec![c64::new(0.0, 0.0); n];
            x[j] = c64::new(1.0, 0.0);
        }
        let alt: Vec<c64> = (0..n)
            .map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let mag = if n > 1 { 1.0 + i as f64 / (n - 1) as f64 } else { 1.0 };
                c64::new(sign * mag, 0.0)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
        if !alt_est.is_finite() {
            return f64::INFINITY;
        }
        self.norm1 * estimate.max(alt_est)
    }

    /// Fails with [`Error::Singular`] when the estimate exceeds the limit.
    pub fn ensure_well_conditioned(&self) -> Result<f64> {
        let condition = self.condition_estimate();
        if condition.is_finite() && condition <= CONDITION_LIMIT {
            Ok(condition)
        } else {
            Err(Error::Singular { condition })
        }
    }
}

/// Vectors per block in [`power_norm`].
const POWER_BLOCK: usize = 4;

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn orthonormalize(vs: &mut [Vec<c64>]) {
    for i in 0..vs.len() {
        for _ in 0..2 {
            for j in 0..i {
                let c = dot(&vs[j], &vs[i]);
                let (head, tail) = vs.split_at_mut(i);
                tail[0].iter_mut().zip(&head[j]).for_each(|(v, q)| *v -= c * q);
            }
        }
        let n = vec_norm(&vs[i]);
        if n > 0.0 {
            vs[i].iter_mut().for_each(|v| *v /= n);
        }
    }
}

/// Largest singular value of the operator `apply` by block power iteration
/// on `apply_adjoint . apply` with a Rayleigh-Ritz step, which keeps
/// convergence fast when the top singular values are nearly degenerate.
pub fn power_norm(
    dim: usize,
    apply: impl Fn(&[c64]) -> Vec<c64>,
    apply_adjoint: impl Fn(&[c64]) -> Vec<c64>,
    rel_tol: f64,
    max_iter: usize,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let block = POWER_BLOCK.min(dim);
    let mut xs: Vec<Vec<c64>> = (0..block)
        .map(|_| (0..dim).map(|_| c64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
        .collect();
    orthonormalize(&mut xs);
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let ys: Vec<Vec<c64>> = xs.iter().map(|x| apply(x)).collect();
        let gram = Mat::<c64>::from_fn(block, block, |i, j| dot(&ys[i], &ys[j]));
        let next = match gram.self_adjoint_eigenvalues(Side::Lower) {
            Ok(eig) => eig.into_iter().fold(0.0, f64::max).sqrt(),
            Err(_) => return sigma,
        };
        xs = ys.iter().map(|y| apply_adjoint(y)).collect();
        orthonormalize(&mut xs);
        if (next - sigma).abs() <= rel_tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> Mat<c64> {
        Mat::from_fn(n, n, |i, j| {
            let d = if i == j { 4.0 + i as f64 } else { 0.0 };
            c64::new(d + 1.0 / (1.0 + (i + 2 * j) as f64), ((i * j) % 3) as f64 * 0.1)
        })
    }

    #[test]
    fn lu_solves_and_adjoint() {
        let a = test_matrix(12);
        let lu = LuSolver::new(&a).unwrap();
        let b: Vec<c64> = (0..12).map(|i| c64::new(i as f64, 1.0)).collect();
        let x = lu.solve(&b);
        let r: Vec<c64> = matvec(&a, &x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(vec_norm(&r) < 1e-12 * vec_norm(&b));
        let xa = lu.solve_adjoint(&b);
        let ah = a.adjoint().to_owned();
        let r: Vec<c64> = matvec(&ah, &xa).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(vec_norm(&r) < 1e-12 * vec_norm(&b));
    }

    #[test]
    fn condition_estimate_is_a_lower_bound_close_to_truth() {
        let a = test_matrix(20);
        let lu = LuSolver::new(&a).unwrap();
        let inv = lu.inverse();
        let mut exact_inv1 = 0.0f64;
        let mut norm1 = 0.0f64;
        for j in 0..20 {
            exact_inv1 = exact_inv1.max((0..20).map(|i| inv[(i, j)].norm()).sum());
            norm1 = norm1.max((0..20).map(|i| a[(i, j)].norm()).sum());
        }
        let exact = norm1 * exact_inv1;
        let est = lu.condition_estimate();
        assert!(est <= exact * (1.0 + 1e-10));
        assert!(est >= exact / 10.0);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut a = test_matrix(6);
        for j in 0..6 {
            let v = a[(0, j)];
            a[(1, j)] = v;
        }
        let lu = LuSolver::new(&a).unwrap();
        assert!(lu.ensure_well_conditioned().is_err());
        assert!(inverse_norm_from_svd(&a).is_err());
    }

    #[test]
    fn power_norm_matches_svd() {
        let a = test_matrix(16);
        let sv = singular_values(&a).unwrap();
        let ah = a.adjoint().to_owned();
        let est = power_norm(16, |x| matvec(&a, x), |y| matvec(&ah, y), 1e-12, 5000);
        assert!((est - sv[0]).abs() < 1e-8 * sv[0]);
    }
}
