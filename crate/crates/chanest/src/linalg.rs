//! Complex linear-algebra aliases and the Hermitian positive-definite
//! solver used by the estimator trainers.
//!
//! The LL^H factorization is written out here rather than delegated:
//! complex Cholesky must reject indefinite matrices on the real diagonal,
//! which generic complex-field square roots silently paper over.

use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// In-place LL^H factorization of the lower triangle; `false` when a pivot
/// is non-positive (the matrix is not positive-definite).
fn cholesky_in_place(l: &mut CMat) -> bool {
    let n = l.nrows();
    for j in 0..n {
        let mut d = l[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let dj = d.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut s = l[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / dj;
        }
    }
    true
}

/// Solves `L L^H x = b` by forward/back substitution, for each column of `b`.
fn solve_with_factor(l: &CMat, b: &CMat) -> CMat {
    let n = l.nrows();
    let mut x = b.clone();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
    }
    x
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
///
/// If the factorization fails, a relative diagonal jitter of
/// `1e-12 * trace(A) / D` is added and the factorization retried once;
/// `None` means both attempts failed.
pub fn hermitian_solve(a: &CMat, b: &CMat) -> Option<CMat> {
    debug_assert_eq!(a.nrows(), a.ncols());
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut l = a.lower_triangle();
    if cholesky_in_place(&mut l) {
        return Some(solve_with_factor(&l, b));
    }
    let d = a.nrows();
    let jitter = 1e-12 * a.trace().re / d as f64;
    let mut lj = a.lower_triangle();
    for i in 0..d {
        lj[(i, i)] += Complex64::new(jitter, 0.0);
    }
    if cholesky_in_place(&mut lj) {
        Some(solve_with_factor(&lj, b))
    } else {
        None
    }
}

/// Eigenvalues of a Hermitian matrix, ascending. Used by validation checks.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let eig = a.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}

/// Identity matrix shorthand.
pub fn identity(d: usize) -> CMat {
    CMat::identity_generic(Dyn(d), Dyn(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_hermitian_system() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(2.0, 0.0),
                Complex64::new(0.3, 0.4),
                Complex64::new(0.3, -0.4),
                Complex64::new(1.5, 0.0),
            ],
        );
        let b = identity(2);
        let x = hermitian_solve(&a, &b).unwrap();
        let residual = (&a * &x - &b).norm();
        assert!(residual < 1e-12, "residual {residual}");
    }

    #[test]
    fn solves_larger_random_spd_system() {
        // A = G G^H + I is positive-definite by construction.
        let mut state = 1u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = CMat::from_fn(12, 12, |_, _| Complex64::new(next(), next()));
        let a = &g * g.adjoint() + identity(12);
        let b = CMat::from_fn(12, 3, |_, _| Complex64::new(next(), next()));
        let x = hermitian_solve(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() < 1e-10);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        );
        assert!(hermitian_solve(&a, &identity(2)).is_none());
    }

    #[test]
    fn jitter_rescues_a_barely_singular_matrix() {
        // rank-1 PSD: plain factorization hits a zero pivot, the jittered
        // retry succeeds
        let v = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let a = &v * v.adjoint();
        let b = identity(2);
        assert!(hermitian_solve(&a, &b).is_some());
    }
}
