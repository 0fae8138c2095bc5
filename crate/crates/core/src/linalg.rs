//! Small dense eigenvalue routines.
//!
//! Hermitian matrices are handled through the real symmetric embedding
//! `[[Re, −Im], [Im, Re]]`, whose spectrum is that of the original matrix
//! with every eigenvalue doubled. The symmetric problem is solved with
//! cyclic Jacobi rotations, which is plenty for the ≤ 100-dimensional
//! matrices that occur here.

use ndarray::Array2;
use num_complex::Complex;

use crate::scalar::{lit, Real};

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &Array2<T>) -> Vec<T> {
    let n = a.nrows();
    let mut m = a.clone();
    let tol = T::epsilon() * lit(0.5);
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum();
        let diag: T = (0..n).map(|i| m[[i, i]] * m[[i, i]]).sum();
        if off <= tol * tol * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[[k, p]];
                    let akq = m[[k, q]];
                    m[[k, p]] = c * akp - s * akq;
                    m[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[[p, k]];
                    let aqk = m[[q, k]];
                    m[[p, k]] = c * apk - s * aqk;
                    m[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[[i, i]]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// Only the Hermitian part `(M + M†)/2` is looked at.
pub fn hermitian_eigenvalues<T: Real>(m: &Array2<Complex<T>>) -> Vec<T> {
    let n = m.nrows();
    let half = lit::<T>(0.5);
    let mut e = Array2::from_elem((2 * n, 2 * n), T::zero());
    for i in 0..n {
        for j in 0..n {
            let h = (m[[i, j]] + m[[j, i]].conj()) * half;
            e[[i, j]] = h.re;
            e[[i + n, j + n]] = h.re;
            e[[i, j + n]] = -h.im;
            e[[i + n, j]] = h.im;
        }
    }
    symmetric_eigenvalues(&e).into_iter().step_by(2).collect()
}
