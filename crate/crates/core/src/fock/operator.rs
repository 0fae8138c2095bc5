use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, creal, czero, from_usize, Real};

/// What a [`ModeOperator`] represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind<T: Real> {
    Annihilation,
    Creation,
    Number,
    /// `X = (a + a†)/√2`
    Quadrature,
    /// `e^{i n θ}`
    PhaseShift(T),
    /// `(-1)^n`
    Parity,
    Custom,
}

/// A single-mode operator truncated to the mode's dimension.
///
/// On a dimension-2 (qubit-encoded) mode the same constructors give the
/// two-level truncations, e.g. `X = σx/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator<T: Real> {
    kind: OperatorKind<T>,
    matrix: Array2<Complex<T>>,
}

impl<T: Real> ModeOperator<T> {
    pub fn custom(matrix: Array2<Complex<T>>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "mode operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { kind: OperatorKind::Custom, matrix })
    }

    /// `a|n⟩ = √n |n−1⟩`
    pub fn annihilation(dim: usize) -> Self {
        let mut m = Array2::from_elem((dim, dim), czero());
        for n in 1..dim {
            m[[n - 1, n]] = creal(from_usize::<T>(n).sqrt());
        }
        Self { kind: OperatorKind::Annihilation, matrix: m }
    }

    pub fn creation(dim: usize) -> Self {
        let a = Self::annihilation(dim);
        Self { kind: OperatorKind::Creation, matrix: a.matrix.t().mapv(|z| z.conj()) }
    }

    pub fn number(dim: usize) -> Self {
        Self::diagonal(dim, OperatorKind::Number, |n| creal(from_usize(n)))
    }

    pub fn quadrature(dim: usize) -> Self {
        let a = Self::annihilation(dim);
        let s = T::one() / (T::one() + T::one()).sqrt();
        let m = (&a.matrix + &a.matrix.t().mapv(|z| z.conj())).mapv(|z| z * s);
        Self { kind: OperatorKind::Quadrature, matrix: m }
    }

    pub fn phase_shift(dim: usize, theta: T) -> Self {
        Self::diagonal(dim, OperatorKind::PhaseShift(theta), |n| cis(from_usize::<T>(n) * theta))
    }

    pub fn parity(dim: usize) -> Self {
        Self::diagonal(dim, OperatorKind::Parity, |n| {
            if n % 2 == 0 {
                creal(T::one())
            } else {
                creal(-T::one())
            }
        })
    }

    fn diagonal(dim: usize, kind: OperatorKind<T>, f: impl Fn(usize) -> Complex<T>) -> Self {
        let mut m = Array2::from_elem((dim, dim), czero());
        for n in 0..dim {
            m[[n, n]] = f(n);
        }
        Self { kind, matrix: m }
    }

    pub fn kind(&self) -> OperatorKind<T> {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex<T>> {
        &self.matrix
    }

    pub fn dagger(&self) -> Self {
        let kind = match self.kind {
            OperatorKind::Annihilation => OperatorKind::Creation,
            OperatorKind::Creation => OperatorKind::Annihilation,
            OperatorKind::PhaseShift(t) => OperatorKind::PhaseShift(-t),
            k @ (OperatorKind::Number | OperatorKind::Quadrature | OperatorKind::Parity) => k,
            OperatorKind::Custom => OperatorKind::Custom,
        };
        Self { kind, matrix: self.matrix.t().mapv(|z| z.conj()) }
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch("operator dimensions differ".into()));
        }
        Ok(Self { kind: OperatorKind::Custom, matrix: self.matrix.dot(&rhs.matrix) })
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm() <= tol))
    }

    pub(crate) fn apply_slice(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[[i, j]] * v[j]).sum())
            .collect()
    }
}
