use ndarray::Array2;
use num_complex::Complex;

use super::{Mode, MultiModeState};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::scalar::{czero, lit, Real};

/// Density matrix over an ordered set of modes (same layout as
/// [`MultiModeState`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    modes: Vec<Mode>,
    dims: Vec<usize>,
    matrix: Array2<Complex<T>>,
}

impl<T: Real> DensityOperator<T> {
    /// Validated constructor: Hermitian to 1e-10, eigenvalues ≥ −1e-9,
    /// real trace in `(0, 1 + 1e-10]`.
    pub fn new(modes: Vec<Mode>, dims: Vec<usize>, matrix: Array2<Complex<T>>) -> Result<Self> {
        let rho = Self::from_parts(modes, dims, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Structural checks only. Used for analytic matrices that are known to
    /// break positivity and must still be inspected.
    pub fn from_parts(modes: Vec<Mode>, dims: Vec<usize>, matrix: Array2<Complex<T>>) -> Result<Self> {
        if modes.len() != dims.len() {
            return Err(Error::DimensionMismatch("modes and dimensions differ in length".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        let size: usize = dims.iter().product();
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}x{} but the modes span {size}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, dims, matrix })
    }

    /// `|ψ⟩⟨ψ|`, carrying the state's own norm as the trace.
    pub fn from_pure(state: &MultiModeState<T>) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| a[i] * a[j].conj());
        Self { modes: state.modes().to_vec(), dims: state.dims().to_vec(), matrix }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &Array2<Complex<T>> {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.size()).map(|i| self.matrix[[i, i]]).sum()
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> T {
        let n = self.size();
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + (self.matrix[[i, j]] * self.matrix[[j, i]]).re;
            }
        }
        acc
    }

    /// Largest `|M − M†|` entry.
    pub fn hermiticity_error(&self) -> T {
        let n = self.size();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    /// Checks the density-operator invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > lit(1e-10) {
            return Err(Error::Normalization(format!("matrix is not Hermitian (deviation {herm})")));
        }
        let tr = self.trace();
        if tr.im.abs() > lit(1e-10) || tr.re <= T::zero() || tr.re > T::one() + lit(1e-10) {
            return Err(Error::Normalization(format!("trace {tr} outside (0, 1]")));
        }
        let min = self.min_eigenvalue();
        if min < lit(-1e-9) {
            return Err(Error::Normalization(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    /// `ρ / Tr ρ`
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace().re;
        if tr <= T::min_positive_value() {
            return Err(Error::ZeroProbability);
        }
        Ok(Self { modes: self.modes.clone(), dims: self.dims.clone(), matrix: self.matrix.mapv(|z| z / tr) })
    }

    /// `⟨ψ|ρ|ψ⟩ / (Tr ρ ‖ψ‖²)`
    pub fn fidelity_with(&self, psi: &MultiModeState<T>) -> Result<T> {
        if psi.modes() != self.modes.as_slice() || psi.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch("state and density matrix live on different modes".into()));
        }
        let a = psi.amplitudes();
        let n = a.len();
        let mut acc: Complex<T> = czero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + a[i].conj() * self.matrix[[i, j]] * a[j];
            }
        }
        Ok(acc.re / (self.trace().re * psi.norm_sqr()))
    }

    /// `½ Σ|λ(ρ − σ)|`
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        if self.modes != other.modes || self.dims != other.dims {
            return Err(Error::DimensionMismatch("density matrices live on different modes".into()));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(hermitian_eigenvalues(&diff).into_iter().map(|l| l.abs()).sum::<T>() * lit(0.5))
    }
}

/// Reduction to a subset of modes.
pub trait PartialTrace<T: Real> {
    /// Traces out every mode not in `keep`. The result keeps the input's
    /// mode order regardless of the order of `keep`.
    fn partial_trace(&self, keep: &[Mode]) -> Result<DensityOperator<T>>;
}

/// Splits flat indices into (kept, traced) sub-indices.
fn split_indices(modes: &[Mode], dims: &[usize], keep: &[Mode]) -> Result<(Vec<Mode>, Vec<usize>, Vec<(usize, usize)>)> {
    for (i, k) in keep.iter().enumerate() {
        if keep[..i].contains(k) {
            return Err(Error::DuplicateMode(*k));
        }
        if !modes.contains(k) {
            return Err(Error::MissingMode(*k));
        }
    }
    let kept_pos: Vec<usize> = (0..modes.len()).filter(|&p| keep.contains(&modes[p])).collect();
    let kept_modes = kept_pos.iter().map(|&p| modes[p]).collect();
    let kept_dims: Vec<usize> = kept_pos.iter().map(|&p| dims[p]).collect();
    let size: usize = dims.iter().product();
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let map = (0..size)
        .map(|i| {
            let (mut ki, mut ri) = (0, 0);
            for p in 0..dims.len() {
                let digit = (i / strides[p]) % dims[p];
                if kept_pos.contains(&p) {
                    ki = ki * dims[p] + digit;
                } else {
                    ri = ri * dims[p] + digit;
                }
            }
            (ki, ri)
        })
        .collect();
    Ok((kept_modes, kept_dims, map))
}

impl<T: Real> PartialTrace<T> for MultiModeState<T> {
    fn partial_trace(&self, keep: &[Mode]) -> Result<DensityOperator<T>> {
        let (modes, dims, map) = split_indices(self.modes(), self.dims(), keep)?;
        let ksize: usize = dims.iter().product();
        let rsize = self.len() / ksize;
        let mut psi = Array2::from_elem((ksize, rsize), czero());
        for (a, &(k, r)) in self.amplitudes().iter().zip(&map) {
            psi[[k, r]] = *a;
        }
        let matrix = psi.dot(&psi.t().mapv(|z| z.conj()));
        DensityOperator::from_parts(modes, dims, matrix)
    }
}

impl<T: Real> PartialTrace<T> for DensityOperator<T> {
    fn partial_trace(&self, keep: &[Mode]) -> Result<DensityOperator<T>> {
        let (modes, dims, map) = split_indices(&self.modes, &self.dims, keep)?;
        let ksize: usize = dims.iter().product();
        let mut out = Array2::from_elem((ksize, ksize), czero());
        for (i, &(ki, ri)) in map.iter().enumerate() {
            for (j, &(kj, rj)) in map.iter().enumerate() {
                if ri == rj {
                    out[[ki, kj]] = out[[ki, kj]] + self.matrix[[i, j]];
                }
            }
        }
        DensityOperator::from_parts(modes, dims, out)
    }
}

/// Free-function form of [`PartialTrace::partial_trace`].
pub fn partial_trace<T: Real, P: PartialTrace<T> + ?Sized>(x: &P, keep: &[Mode]) -> Result<DensityOperator<T>> {
    x.partial_trace(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, tensor};
    use approx::assert_abs_diff_eq;

    fn q(c0: f64, c1: f64, m: Mode) -> MultiModeState<f64> {
        MultiModeState::qubit(m, Complex::new(c0, 0.0), Complex::new(c1, 0.0))
    }

    #[test]
    fn product_state_reduces_to_pure() {
        let a = q(0.6, 0.8, Mode::A);
        let b = MultiModeState::single(Mode::B, &make_coherent(Complex::new(0.4, -0.3), 16).unwrap());
        let s = tensor(&[&a, &b]).unwrap();
        let rho = partial_trace(&s, &[Mode::A]).unwrap();
        rho.validate().unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rho.matrix()[[0, 1]].re, 0.48, epsilon = 1e-12);
        let via_density = partial_trace(&DensityOperator::from_pure(&s), &[Mode::A]).unwrap();
        assert!(rho.trace_distance(&via_density).unwrap() < 1e-12);
    }

    #[test]
    fn bell_pair_reduces_to_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = MultiModeState::new(
            vec![Mode::C, Mode::D],
            vec![2, 2],
            vec![Complex::new(h, 0.0), czero(), czero(), Complex::new(h, 0.0)],
        )
        .unwrap();
        let rho = s.partial_trace(&[Mode::D]).unwrap();
        assert_abs_diff_eq!(rho.purity(), 0.5, epsilon = 1e-15);
        assert_eq!(rho.modes(), &[Mode::D]);
        let ev = rho.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn keep_order_follows_state_order() {
        let s = tensor(&[&q(1.0, 0.0, Mode::B), &q(0.0, 1.0, Mode::C), &q(1.0, 0.0, Mode::D)]).unwrap();
        let rho = s.partial_trace(&[Mode::D, Mode::B]).unwrap();
        assert_eq!(rho.modes(), &[Mode::B, Mode::D]);
        assert!(s.partial_trace(&[Mode::A]).is_err());
        assert!(s.partial_trace(&[Mode::B, Mode::B]).is_err());
    }

    #[test]
    fn validation_flags_negative_eigenvalue() {
        let m = ndarray::array![
            [Complex::new(0.5, 0.0), Complex::new(0.6, 0.0)],
            [Complex::new(0.6, 0.0), Complex::new(0.5, 0.0)]
        ];
        assert!(DensityOperator::new(vec![Mode::C], vec![2], m).is_err());
    }
}
