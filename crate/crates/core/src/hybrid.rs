//! Resource channel, target qubit and their four-mode product.
//!
//! Mode `B` of the resource and mode `A` of the target are either Fock
//! modes (coherent components `|±α⟩` truncated at the cutoff) or
//! qubit-encoded, where `|±α⟩ ↦ (|0⟩ ± |1⟩)/√2`. Modes `C` and `D` are
//! always two-level.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    cat_normalization, make_coherent, make_photon_subtracted_squeezed, make_squeezed_vacuum, phase_shift_all,
    tensor, FockVector, Mode, MultiModeState, Parity, DEFAULT_CUTOFF,
};
use crate::scalar::{cis, cone, creal, czero, lit, Real};

/// How the coherent-state mode is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    #[default]
    Fock,
    Qubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec<T: Real> {
    pub alpha: T,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default)]
    pub theta_b: T,
    #[serde(default)]
    pub theta_c: T,
    #[serde(default)]
    pub theta_d: T,
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

impl<T: Real> ResourceSpec<T> {
    pub fn new(alpha: T, encoding: Encoding, cutoff: usize) -> Self {
        Self { alpha, encoding, cutoff, theta_b: T::zero(), theta_c: T::zero(), theta_d: T::zero() }
    }

    pub fn with_phases(mut self, theta_b: T, theta_c: T, theta_d: T) -> Self {
        self.theta_b = theta_b;
        self.theta_c = theta_c;
        self.theta_d = theta_d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        for t in [self.theta_b, self.theta_c, self.theta_d] {
            if !t.is_finite() {
                return Err(Error::InvalidParameter("phases must be finite".into()));
            }
        }
        Ok(())
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// The two logical components `(|α⟩, |−α⟩)` of a mode in the given encoding.
pub fn logical_pair<T: Real>(alpha: T, encoding: Encoding, cutoff: usize) -> Result<(Vec<Complex<T>>, Vec<Complex<T>>)> {
    match encoding {
        Encoding::Fock => Ok((
            make_coherent(creal(alpha), cutoff)?.into_amplitudes(),
            make_coherent(creal(-alpha), cutoff)?.into_amplitudes(),
        )),
        Encoding::Qubit => {
            let h = creal(T::FRAC_1_SQRT_2());
            Ok((vec![h, h], vec![h, -h]))
        }
    }
}

/// Sums `Σ coeff · |b⟩_B |c⟩_C |d⟩_D` with two-level `C`, `D`.
fn assemble_bcd<T: Real>(terms: &[(Complex<T>, &[Complex<T>], usize, usize)]) -> Result<MultiModeState<T>> {
    let db = terms[0].1.len();
    let mut amps = vec![czero(); db * 4];
    for (coef, b, c, d) in terms {
        for (i, bi) in b.iter().enumerate() {
            amps[i * 4 + c * 2 + d] = amps[i * 4 + c * 2 + d] + coef * bi;
        }
    }
    MultiModeState::from_parts(vec![Mode::B, Mode::C, Mode::D], vec![db, 2, 2], amps)
}

/// `½([|α⟩|0⟩ − |−α⟩|1⟩]|0⟩ + [|α⟩|0⟩ + |−α⟩|1⟩]|1⟩)` over `(B, C, D)`,
/// followed by `exp[i(n_B θ_B + n_C θ_C + n_D θ_D)]`.
pub fn build_resource<T: Real>(spec: &ResourceSpec<T>) -> Result<MultiModeState<T>> {
    spec.validate()?;
    let (plus, minus) = logical_pair(spec.alpha, spec.encoding, spec.cutoff)?;
    let h = creal(lit::<T>(0.5));
    let raw = assemble_bcd(&[(h, &plus, 0, 0), (-h, &minus, 1, 0), (h, &plus, 0, 1), (h, &minus, 1, 1)])?;
    finish_resource(raw, spec)
}

/// The same resource written as
/// `(|α⟩|0⟩(|0⟩+|1⟩)/√2 − |−α⟩|1⟩(|0⟩−|1⟩)/√2)/√2`.
pub fn build_resource_factored<T: Real>(spec: &ResourceSpec<T>) -> Result<MultiModeState<T>> {
    spec.validate()?;
    let (plus, minus) = logical_pair(spec.alpha, spec.encoding, spec.cutoff)?;
    let b_plus = MultiModeState::from_parts(vec![Mode::B], vec![plus.len()], plus)?;
    let b_minus = MultiModeState::from_parts(vec![Mode::B], vec![minus.len()], minus)?;
    let s = T::FRAC_1_SQRT_2();
    let c0 = MultiModeState::qubit(Mode::C, cone(), czero());
    let c1 = MultiModeState::qubit(Mode::C, czero(), cone());
    let d_plus = MultiModeState::qubit(Mode::D, creal(s), creal(s));
    let d_minus = MultiModeState::qubit(Mode::D, creal(s), creal(-s));
    let first = tensor(&[&b_plus, &c0, &d_plus])?;
    let second = tensor(&[&b_minus, &c1, &d_minus])?;
    let amps = first
        .amplitudes()
        .iter()
        .zip(second.amplitudes())
        .map(|(a, b)| (a - b) * s)
        .collect();
    let raw = MultiModeState::from_parts(first.modes().to_vec(), first.dims().to_vec(), amps)?;
    finish_resource(raw, spec)
}

/// Resource whose coherent components are replaced by their squeezed
/// approximations: `|±α⟩_B → (|sq⟩ ± |a·sq⟩)/√2`, with `|sq⟩` the squeezed
/// vacuum (close to an even cat of amplitude `√ζ`) and `|a·sq⟩` the
/// normalized photon-subtracted squeezed vacuum (close to an odd cat of
/// amplitude `√(3ζ)`). Mode `B` is always Fock-encoded.
pub fn build_resource_squeezed<T: Real>(zeta: T, cutoff: usize, phases: (T, T, T)) -> Result<MultiModeState<T>> {
    let sq = make_squeezed_vacuum(zeta, cutoff)?;
    let asq = make_photon_subtracted_squeezed(zeta, cutoff)?;
    let s = T::FRAC_1_SQRT_2();
    let plus: Vec<Complex<T>> = sq.amplitudes().iter().zip(asq.amplitudes()).map(|(a, b)| (a + b) * s).collect();
    let minus: Vec<Complex<T>> = sq.amplitudes().iter().zip(asq.amplitudes()).map(|(a, b)| (a - b) * s).collect();
    let h = creal(lit::<T>(0.5));
    let raw = assemble_bcd(&[(h, &plus, 0, 0), (-h, &minus, 1, 0), (h, &plus, 0, 1), (h, &minus, 1, 1)])?;
    let spec = ResourceSpec { alpha: T::one(), encoding: Encoding::Fock, cutoff, theta_b: phases.0, theta_c: phases.1, theta_d: phases.2 };
    finish_resource(raw, &spec)
}

fn finish_resource<T: Real>(raw: MultiModeState<T>, spec: &ResourceSpec<T>) -> Result<MultiModeState<T>> {
    let phased = phase_shift_all(&raw, spec.theta_b, spec.theta_c, spec.theta_d)?;
    let normed = phased.normalized()?;
    MultiModeState::new(normed.modes().to_vec(), normed.dims().to_vec(), normed.into_amplitudes())
}

/// What the target qubit is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetKind<T: Real> {
    /// `X|α⟩ + Y|−α⟩`
    Coefficients { x: Complex<T>, y: Complex<T> },
    /// Phase-varied coherent state `|αe^{iφ}⟩`.
    Phase { phi: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec<T: Real> {
    pub kind: TargetKind<T>,
    pub alpha: T,
    #[serde(default)]
    pub encoding: Encoding,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

impl<T: Real> TargetSpec<T> {
    pub fn coefficients(x: Complex<T>, y: Complex<T>, alpha: T, encoding: Encoding, cutoff: usize) -> Self {
        Self { kind: TargetKind::Coefficients { x, y }, alpha, encoding, cutoff }
    }

    /// Phase target; qubit encoding is the usual choice.
    pub fn phase(phi: T, alpha: T, encoding: Encoding, cutoff: usize) -> Self {
        Self { kind: TargetKind::Phase { phi }, alpha, encoding, cutoff }
    }
}

/// `x² = ⟨α|−α⟩ = e^{−2α²}`
pub fn overlap_x2<T: Real>(alpha: T) -> T {
    (lit::<T>(-2.0) * alpha * alpha).exp()
}

/// `(X, Y) = ((1 + e^{iφ})/2, (1 − e^{iφ})/2)`
pub fn phase_coefficients<T: Real>(phi: T) -> (Complex<T>, Complex<T>) {
    let e = cis(phi);
    let h = lit::<T>(0.5);
    ((cone::<T>() + e) * h, (cone::<T>() - e) * h)
}

/// `A± = (X ± Y)/(2N±)`, so that `X|α⟩ + Y|−α⟩ = A₊|EVEN,α⟩ + A₋|ODD,α⟩`.
pub fn even_odd_coefficients<T: Real>(x: Complex<T>, y: Complex<T>, alpha: T) -> (Complex<T>, Complex<T>) {
    let two = lit::<T>(2.0);
    let np = cat_normalization(alpha, Parity::Even);
    let nm = cat_normalization(alpha, Parity::Odd);
    ((x + y) / (two * np), (x - y) / (two * nm))
}

/// `|X|² + |Y|² + 2x² Re(X*Y)` (the norm² of `X|α⟩ + Y|−α⟩`).
pub fn coefficient_norm<T: Real>(x: Complex<T>, y: Complex<T>, alpha: T) -> T {
    let two = lit::<T>(2.0);
    x.norm_sqr() + y.norm_sqr() + two * overlap_x2(alpha) * (x.conj() * y).re
}

/// Mode-`A` target state.
///
/// In qubit encoding the logical states are orthogonal, so coefficient
/// targets are checked against `|X|² + |Y|² = 1`; in Fock encoding the
/// overlap term `2x² Re(X*Y)` is included.
pub fn build_target<T: Real>(spec: &TargetSpec<T>) -> Result<MultiModeState<T>> {
    check_alpha(spec.alpha)?;
    let tol = lit::<T>(1e-8);
    match (spec.kind, spec.encoding) {
        (TargetKind::Coefficients { x, y }, enc) => {
            let norm = match enc {
                Encoding::Fock => coefficient_norm(x, y, spec.alpha),
                Encoding::Qubit => x.norm_sqr() + y.norm_sqr(),
            };
            if (norm - T::one()).abs() > tol {
                return Err(Error::Normalization(format!("target coefficients have norm² {norm}")));
            }
            let (plus, minus) = logical_pair(spec.alpha, enc, spec.cutoff)?;
            let amps: Vec<Complex<T>> = plus.iter().zip(&minus).map(|(p, m)| x * p + y * m).collect();
            let s = MultiModeState::from_parts(vec![Mode::A], vec![amps.len()], amps)?.normalized()?;
            Ok(s)
        }
        (TargetKind::Phase { phi }, Encoding::Qubit) => {
            let s = T::FRAC_1_SQRT_2();
            Ok(MultiModeState::qubit(Mode::A, creal(s), cis(phi) * s))
        }
        (TargetKind::Phase { phi }, Encoding::Fock) => {
            let v = make_coherent(cis(phi) * spec.alpha, spec.cutoff)?;
            Ok(MultiModeState::single(Mode::A, &v))
        }
    }
}

/// `|⟨αe^{iφ}| (|0⟩ + e^{iφ}|1⟩)/√2⟩|²`, how well the two-level truncation
/// stands in for the phase-varied coherent state.
pub fn truncation_fidelity<T: Real>(alpha: T, phi: T, cutoff: usize) -> Result<T> {
    let coh = make_coherent(cis(phi) * alpha, cutoff)?;
    let s = T::FRAC_1_SQRT_2();
    let mut amps = vec![czero(); cutoff + 1];
    amps[0] = creal(s);
    amps[1] = cis(phi) * s;
    coh.fidelity(&FockVector::from_amplitudes(amps)?)
}

/// `|in⟩_A ⊗ |R⟩_BCD`
pub fn build_combined<T: Real>(target: &MultiModeState<T>, resource: &MultiModeState<T>) -> Result<MultiModeState<T>> {
    if target.modes() != [Mode::A] {
        return Err(Error::DimensionMismatch("target must be a single mode A".into()));
    }
    if resource.modes() != [Mode::B, Mode::C, Mode::D] {
        return Err(Error::DimensionMismatch("resource must span modes B, C, D".into()));
    }
    let (da, db) = (target.dims()[0], resource.dims()[0]);
    if da != db {
        return Err(Error::EncodingMismatch(format!(
            "target mode A has dimension {da} but resource mode B has {db}"
        )));
    }
    tensor(&[target, resource])?.normalized()
}
