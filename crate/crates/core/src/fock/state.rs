use num_complex::Complex;

use super::{FockVector, Mode, ModeOperator};
use crate::error::{Error, Result};
use crate::scalar::{czero, lit, Real};

/// Amplitude tensor over an ordered list of modes.
///
/// Amplitudes are stored row-major: the first mode is the most significant
/// index. Norm may be below one for conditional (projected) states; such
/// states always travel together with their branch probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeState<T: Real> {
    modes: Vec<Mode>,
    dims: Vec<usize>,
    amps: Vec<Complex<T>>,
}

impl<T: Real> MultiModeState<T> {
    /// Validated constructor: distinct modes, matching sizes, norm ≤ 1 + 1e-10.
    pub fn new(modes: Vec<Mode>, dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        let s = Self::from_parts(modes, dims, amps)?;
        let n2 = s.norm_sqr();
        if n2 > T::one() + lit(1e-10) {
            return Err(Error::Normalization(format!("state norm² {n2} exceeds one")));
        }
        Ok(s)
    }

    /// Structural checks only; used for intermediate, unnormalized results.
    pub fn from_parts(modes: Vec<Mode>, dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        if modes.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} modes but {} dimensions",
                modes.len(),
                dims.len()
            )));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch("zero-dimensional mode".into()));
        }
        let size: usize = dims.iter().product();
        if size != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "dimensions multiply to {size} but {} amplitudes were given",
                amps.len()
            )));
        }
        Ok(Self { modes, dims, amps })
    }

    pub fn single(mode: Mode, v: &FockVector<T>) -> Self {
        Self { modes: vec![mode], dims: vec![v.dim()], amps: v.amplitudes().to_vec() }
    }

    /// Qubit-encoded (dimension-2) mode `c0|0⟩ + c1|1⟩`.
    pub fn qubit(mode: Mode, c0: Complex<T>, c1: Complex<T>) -> Self {
        Self { modes: vec![mode], dims: vec![2], amps: vec![c0, c1] }
    }

    /// The product basis state `|i₀ i₁ …⟩`.
    pub fn basis(modes: Vec<Mode>, dims: Vec<usize>, indices: &[usize]) -> Result<Self> {
        let size: usize = dims.iter().product();
        if indices.len() != dims.len() || indices.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(Error::DimensionMismatch("basis index out of range".into()));
        }
        let mut amps = vec![czero(); size];
        let mut flat = 0;
        for (i, d) in indices.iter().zip(&dims) {
            flat = flat * d + i;
        }
        amps[flat] = Complex::new(T::one(), T::zero());
        Self::from_parts(modes, dims, amps)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn position(&self, mode: Mode) -> Result<usize> {
        self.modes.iter().position(|&m| m == mode).ok_or(Error::MissingMode(mode))
    }

    pub fn dim_of(&self, mode: Mode) -> Result<usize> {
        Ok(self.dims[self.position(mode)?])
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Digit of `mode` within flat index `i`.
    pub(crate) fn digit(&self, i: usize, pos: usize, strides: &[usize]) -> usize {
        (i / strides[pos]) % self.dims[pos]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= T::min_positive_value() {
            return Err(Error::ZeroProbability);
        }
        Ok(self.scaled(Complex::new(T::one() / n2.sqrt(), T::zero())))
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self { modes: self.modes.clone(), dims: self.dims.clone(), amps: self.amps.iter().map(|a| a * s).collect() }
    }

    /// Returns `(op ⊗ 1) · self` acting on `mode`; not renormalized.
    pub fn apply_mode_operator(&self, op: &ModeOperator<T>, mode: Mode) -> Result<Self> {
        let pos = self.position(mode)?;
        let d = self.dims[pos];
        if op.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} on mode {mode} of dimension {d}",
                op.dim()
            )));
        }
        let stride = self.strides()[pos];
        let m = op.matrix();
        let mut out = vec![czero(); self.amps.len()];
        let mut col = vec![czero(); d];
        for base in 0..self.amps.len() {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            for (j, c) in col.iter_mut().enumerate() {
                *c = self.amps[base + j * stride];
            }
            for i in 0..d {
                let mut acc = czero();
                for (j, c) in col.iter().enumerate() {
                    acc = acc + m[[i, j]] * c;
                }
                out[base + i * stride] = acc;
            }
        }
        Ok(Self { modes: self.modes.clone(), dims: self.dims.clone(), amps: out })
    }

    /// Applies `f` to every two-mode slice over `(x, y)`.
    ///
    /// The slice passed to `f` is indexed `ix * dim(y) + iy`; `f` writes the
    /// transformed slice into its second argument.
    pub(crate) fn transform_pair<F>(&self, x: Mode, y: Mode, mut f: F) -> Result<Self>
    where
        F: FnMut(&[Complex<T>], &mut [Complex<T>]) -> Result<()>,
    {
        let px = self.position(x)?;
        let py = self.position(y)?;
        if px == py {
            return Err(Error::DuplicateMode(x));
        }
        let (dx, dy) = (self.dims[px], self.dims[py]);
        let strides = self.strides();
        let (sx, sy) = (strides[px], strides[py]);
        let mut out = vec![czero(); self.amps.len()];
        let mut slice = vec![czero(); dx * dy];
        let mut result = vec![czero(); dx * dy];
        for base in 0..self.amps.len() {
            if (base / sx) % dx != 0 || (base / sy) % dy != 0 {
                continue;
            }
            for ix in 0..dx {
                for iy in 0..dy {
                    slice[ix * dy + iy] = self.amps[base + ix * sx + iy * sy];
                }
            }
            result.iter_mut().for_each(|r| *r = czero());
            f(&slice, &mut result)?;
            for ix in 0..dx {
                for iy in 0..dy {
                    out[base + ix * sx + iy * sy] = result[ix * dy + iy];
                }
            }
        }
        Ok(Self { modes: self.modes.clone(), dims: self.dims.clone(), amps: out })
    }

    /// Contracts `modes` with `⟨bra|`, leaving a state over the other modes.
    ///
    /// `bra` must be defined over exactly `modes`, in that order. The result is
    /// sub-normalized: its squared norm is the projection probability.
    pub fn contract(&self, modes: &[Mode], bra: &MultiModeState<T>) -> Result<Self> {
        if bra.modes() != modes {
            return Err(Error::DimensionMismatch(format!(
                "projector is over {:?}, requested {:?}",
                bra.modes(),
                modes
            )));
        }
        let positions = modes.iter().map(|&m| self.position(m)).collect::<Result<Vec<_>>>()?;
        for (k, &p) in positions.iter().enumerate() {
            if self.dims[p] != bra.dims()[k] {
                return Err(Error::DimensionMismatch(format!(
                    "mode {} has dimension {} but the projector uses {}",
                    modes[k],
                    self.dims[p],
                    bra.dims()[k]
                )));
            }
        }
        let rest: Vec<usize> = (0..self.modes.len()).filter(|p| !positions.contains(p)).collect();
        let rest_modes: Vec<Mode> = rest.iter().map(|&p| self.modes[p]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&p| self.dims[p]).collect();
        let rest_size: usize = rest_dims.iter().product();
        let bra_strides = bra.strides();
        let strides = self.strides();
        let mut out = vec![czero(); rest_size];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == T::zero() {
                continue;
            }
            let mut bi = 0;
            for (k, &p) in positions.iter().enumerate() {
                bi += self.digit(i, p, &strides) * bra_strides[k];
            }
            let b = bra.amps[bi];
            if b.norm_sqr() == T::zero() {
                continue;
            }
            let mut ri = 0;
            for &p in &rest {
                ri = ri * self.dims[p] + self.digit(i, p, &strides);
            }
            out[ri] = out[ri] + b.conj() * a;
        }
        Self::from_parts(rest_modes, rest_dims, out)
    }

    /// `⟨self| O₁ ⊗ O₂ ⊗ … |self⟩` for operators on distinct modes.
    pub fn expectation(&self, ops: &[(Mode, &ModeOperator<T>)]) -> Result<Complex<T>> {
        let mut phi = self.clone();
        for (m, op) in ops {
            phi = phi.apply_mode_operator(op, *m)?;
        }
        inner(self, &phi)
    }

    /// Probability of each basis level of `mode`.
    pub fn marginal(&self, mode: Mode) -> Result<Vec<T>> {
        let pos = self.position(mode)?;
        let strides = self.strides();
        let mut p = vec![T::zero(); self.dims[pos]];
        for (i, a) in self.amps.iter().enumerate() {
            let k = self.digit(i, pos, &strides);
            p[k] = p[k] + a.norm_sqr();
        }
        Ok(p)
    }

    /// Reads a single-mode state back as a [`FockVector`].
    pub fn to_fock(&self) -> Result<FockVector<T>> {
        if self.modes.len() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected a single-mode state, got {} modes",
                self.modes.len()
            )));
        }
        FockVector::from_amplitudes(self.amps.clone())
    }

    /// `|⟨self|other⟩|²/(‖self‖²‖other‖²)`
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let ov = inner(self, other)?;
        Ok(ov.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }
}

/// Tensor product in argument order; mode labels must be distinct.
pub fn tensor<T: Real>(states: &[&MultiModeState<T>]) -> Result<MultiModeState<T>> {
    let mut iter = states.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidParameter("tensor of an empty list".into()))?;
    let mut acc = (*first).clone();
    for s in iter {
        let mut modes = acc.modes.clone();
        modes.extend_from_slice(s.modes());
        let mut dims = acc.dims.clone();
        dims.extend_from_slice(s.dims());
        let mut amps = Vec::with_capacity(acc.amps.len() * s.amps.len());
        for a in &acc.amps {
            for b in &s.amps {
                amps.push(a * b);
            }
        }
        acc = MultiModeState::from_parts(modes, dims, amps)?;
    }
    Ok(acc)
}

/// `⟨u|v⟩`; both states must share modes and dimensions.
pub fn inner<T: Real>(u: &MultiModeState<T>, v: &MultiModeState<T>) -> Result<Complex<T>> {
    if u.modes() != v.modes() || u.dims() != v.dims() {
        return Err(Error::DimensionMismatch(format!(
            "inner product of states over {:?}{:?} and {:?}{:?}",
            u.modes(),
            u.dims(),
            v.modes(),
            v.dims()
        )));
    }
    Ok(u.amps.iter().zip(&v.amps).map(|(a, b)| a.conj() * b).sum())
}

/// `exp[i(n_B θ_B + n_C θ_C + n_D θ_D)]`
pub fn phase_shift_all<T: Real>(
    state: &MultiModeState<T>,
    theta_b: T,
    theta_c: T,
    theta_d: T,
) -> Result<MultiModeState<T>> {
    let mut out = state.clone();
    for (mode, theta) in [(Mode::B, theta_b), (Mode::C, theta_c), (Mode::D, theta_d)] {
        let d = state.dim_of(mode)?;
        out = out.apply_mode_operator(&ModeOperator::phase_shift(d, theta), mode)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, FockVector};
    use crate::scalar::cis;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn q(c0: f64, c1: f64, m: Mode) -> MultiModeState<f64> {
        MultiModeState::qubit(m, Complex::new(c0, 0.0), Complex::new(c1, 0.0))
    }

    #[test]
    fn orthonormal_basis_gives_kronecker_delta() {
        for i in 0..4 {
            for j in 0..4 {
                let u = MultiModeState::<f64>::basis(vec![Mode::A, Mode::B], vec![2, 2], &[i / 2, i % 2]).unwrap();
                let v = MultiModeState::<f64>::basis(vec![Mode::A, Mode::B], vec![2, 2], &[j / 2, j % 2]).unwrap();
                let t = tensor(&[&u, &q(1.0, 0.0, Mode::C)]).unwrap();
                let s = tensor(&[&v, &q(1.0, 0.0, Mode::C)]).unwrap();
                let ov = inner(&t, &s).unwrap();
                assert_eq!(ov.re, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn tensor_rejects_label_collision() {
        let a = q(1.0, 0.0, Mode::A);
        assert_eq!(tensor(&[&a, &a]).unwrap_err(), Error::DuplicateMode(Mode::A));
        let b = q(1.0, 0.0, Mode::B);
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn annihilation_on_vacuum_vanishes() {
        let vac = MultiModeState::single(Mode::B, &FockVector::<f64>::vacuum(10).unwrap());
        let out = vac.apply_mode_operator(&ModeOperator::annihilation(10 + 1), Mode::B).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
        assert!(vac.apply_mode_operator(&ModeOperator::annihilation(5), Mode::B).is_err());
        assert!(vac.apply_mode_operator(&ModeOperator::annihilation(11), Mode::C).is_err());
    }

    #[test]
    fn phase_shift_rotates_coherent_amplitude() {
        let alpha = Complex::new(0.8, 0.1);
        let theta = 0.9;
        let s = MultiModeState::single(Mode::B, &make_coherent(alpha, 30).unwrap());
        let rotated = s.apply_mode_operator(&ModeOperator::phase_shift(31, theta), Mode::B).unwrap();
        let target = MultiModeState::single(Mode::B, &make_coherent(alpha * cis(theta), 30).unwrap());
        assert!(rotated.fidelity(&target).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn phase_shift_pi_flips_coherent_sign() {
        let alpha = Complex::new(0.7, 0.0);
        let b = MultiModeState::single(Mode::B, &make_coherent(alpha, 30).unwrap());
        let s = tensor(&[&b, &q(1.0, 0.0, Mode::C), &q(1.0, 0.0, Mode::D)]).unwrap();
        let out = phase_shift_all(&s, PI, 0.0, 0.0).unwrap();
        let neg = MultiModeState::single(Mode::B, &make_coherent(-alpha, 30).unwrap());
        let target = tensor(&[&neg, &q(1.0, 0.0, Mode::C), &q(1.0, 0.0, Mode::D)]).unwrap();
        assert_abs_diff_eq!(out.fidelity(&target).unwrap(), 1.0, epsilon = 1e-12);
        let same = phase_shift_all(&s, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(same, s);
    }

    #[test]
    fn contract_projects_product_factor() {
        let a = q(0.6, 0.8, Mode::A);
        let b = MultiModeState::single(Mode::B, &make_coherent(Complex::new(0.5, 0.2), 20).unwrap());
        let s = tensor(&[&a, &b]).unwrap();
        let bra = q(1.0, 0.0, Mode::A);
        let rest = s.contract(&[Mode::A], &bra).unwrap();
        assert_abs_diff_eq!(rest.norm_sqr(), 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(rest.fidelity(&b).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(rest.modes(), &[Mode::B]);
    }

    #[test]
    fn marginal_sums_to_norm() {
        let a = q(0.6, 0.8, Mode::A);
        let b = q(0.0, 1.0, Mode::B);
        let s = tensor(&[&a, &b]).unwrap();
        let m = s.marginal(Mode::A).unwrap();
        assert_abs_diff_eq!(m[0], 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 0.64, epsilon = 1e-15);
    }
}
