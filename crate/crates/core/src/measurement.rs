//! Projective and photon-counting measurements that return conditional
//! states together with their probabilities.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{cat_normalization, Mode, ModeOperator, MultiModeState, Parity};
use crate::hybrid::{logical_pair, Encoding};
use crate::scalar::{creal, czero, lit, Real};

/// Outcome of Alice's two-mode (quasi-)Bell measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] =
        [BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        })
    }
}

/// The four vectors `φ±`, `ψ±` over modes `(A, B)`.
///
/// They are assembled with the common prefactor `√2 N₊N₋` and then each
/// rescaled to unit norm; `correction[k]` is the factor that rescaling
/// applied. In Fock encoding `φ⁺` and `ψ⁺` overlap, so the set is not a
/// complete measurement; the qubit encoding gives the exact Bell basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiBellSet<T: Real> {
    pub alpha: T,
    pub encoding: Encoding,
    pub cutoff: usize,
    states: [MultiModeState<T>; 4],
    raw_norm_sqr: [T; 4],
    correction: [T; 4],
}

impl<T: Real> QuasiBellSet<T> {
    pub fn state(&self, which: BellOutcome) -> &MultiModeState<T> {
        &self.states[which.index()]
    }

    /// Norm² of the vector before rescaling.
    pub fn raw_norm_sqr(&self, which: BellOutcome) -> T {
        self.raw_norm_sqr[which.index()]
    }

    pub fn correction(&self, which: BellOutcome) -> T {
        self.correction[which.index()]
    }
}

/// Fock-encoded quasi-Bell vectors at amplitude `alpha`.
pub fn quasi_bell_states<T: Real>(alpha: T, cutoff: usize) -> Result<QuasiBellSet<T>> {
    build_quasi_bell(alpha, Encoding::Fock, cutoff)
}

/// Quasi-Bell vectors in either encoding. In qubit encoding the logical
/// states are orthogonal, so the prefactor is taken at `x = 0` (that is
/// `1/√2`) and no correction is needed.
pub fn build_quasi_bell<T: Real>(alpha: T, encoding: Encoding, cutoff: usize) -> Result<QuasiBellSet<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let (p, m) = logical_pair(alpha, encoding, cutoff)?;
    let pref = match encoding {
        Encoding::Fock => {
            T::SQRT_2() * cat_normalization(alpha, Parity::Even) * cat_normalization(alpha, Parity::Odd)
        }
        Encoding::Qubit => T::FRAC_1_SQRT_2(),
    };
    let d = p.len();
    let pair = |u: &[Complex<T>], v: &[Complex<T>], w: &[Complex<T>], z: &[Complex<T>], sign: T| {
        let mut amps = vec![czero(); d * d];
        for i in 0..d {
            for j in 0..d {
                amps[i * d + j] = (u[i] * v[j] + w[i] * z[j] * sign) * pref;
            }
        }
        MultiModeState::from_parts(vec![Mode::A, Mode::B], vec![d, d], amps)
    };
    let one = T::one();
    let raw = [
        pair(&p, &p, &m, &m, one)?,
        pair(&p, &p, &m, &m, -one)?,
        pair(&p, &m, &m, &p, one)?,
        pair(&p, &m, &m, &p, -one)?,
    ];
    let raw_norm_sqr = [raw[0].norm_sqr(), raw[1].norm_sqr(), raw[2].norm_sqr(), raw[3].norm_sqr()];
    let correction = raw_norm_sqr.map(|n| one / n.sqrt());
    let states = [raw[0].normalized()?, raw[1].normalized()?, raw[2].normalized()?, raw[3].normalized()?];
    Ok(QuasiBellSet { alpha, encoding, cutoff, states, raw_norm_sqr, correction })
}

/// One measurement branch: probability and the normalized post-measurement
/// state of the unmeasured modes (`None` when the branch cannot occur).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalResult<T: Real> {
    pub label: String,
    pub probability: T,
    pub state: Option<MultiModeState<T>>,
}

impl<T: Real> ConditionalResult<T> {
    /// Builds a result from an unnormalized conditional vector.
    pub fn from_unnormalized(label: String, v: MultiModeState<T>) -> Self {
        let p = v.norm_sqr();
        let state = if p > T::epsilon() * T::epsilon() { v.normalized().ok() } else { None };
        let probability = if state.is_some() { p } else { T::zero() };
        Self { label, probability, state }
    }

    pub fn state(&self) -> Result<&MultiModeState<T>> {
        self.state.as_ref().ok_or(Error::ZeroProbability)
    }
}

/// `⟨bell|_AB ⊗ 1 |ψ⟩` for the rescaled (unit-norm) vector.
pub fn project_quasi_bell<T: Real>(
    state: &MultiModeState<T>,
    set: &QuasiBellSet<T>,
    which: BellOutcome,
) -> Result<ConditionalResult<T>> {
    let v = state.contract(&[Mode::A, Mode::B], set.state(which))?;
    Ok(ConditionalResult::from_unnormalized(which.to_string(), v))
}

/// Projects `mode` onto the number (or qubit basis) state `|n⟩`.
pub fn project_fock<T: Real>(state: &MultiModeState<T>, mode: Mode, n: usize) -> Result<ConditionalResult<T>> {
    project_pattern(state, &[(mode, n)])
}

/// Projects several modes at once onto `|n₁ n₂ …⟩`.
pub fn project_pattern<T: Real>(state: &MultiModeState<T>, pattern: &[(Mode, usize)]) -> Result<ConditionalResult<T>> {
    let modes: Vec<Mode> = pattern.iter().map(|(m, _)| *m).collect();
    let dims = modes.iter().map(|&m| state.dim_of(m)).collect::<Result<Vec<_>>>()?;
    let idx: Vec<usize> = pattern.iter().map(|(_, n)| *n).collect();
    let bra = MultiModeState::basis(modes.clone(), dims, &idx)?;
    let v = state.contract(&modes, &bra)?;
    let label = pattern.iter().map(|(m, n)| format!("{m}={n}")).collect::<Vec<_>>().join(",");
    Ok(ConditionalResult::from_unnormalized(label, v))
}

/// Projects `modes` onto an arbitrary (normalized) vector over those modes.
pub fn project_onto<T: Real>(
    state: &MultiModeState<T>,
    bra: &MultiModeState<T>,
    label: impl Into<String>,
) -> Result<ConditionalResult<T>> {
    let v = state.contract(bra.modes(), bra)?;
    Ok(ConditionalResult::from_unnormalized(label.into(), v))
}

/// Inefficient photon counter `Π = Σₙ [1 − (1−η)ⁿ] |n⟩⟨n|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement<T: Real> {
    pub eta: T,
    pub diagonal: Vec<T>,
}

impl<T: Real> PovmElement<T> {
    pub fn cutoff(&self) -> usize {
        self.diagonal.len() - 1
    }
}

pub fn photon_counter_povm<T: Real>(eta: T, cutoff: usize) -> Result<PovmElement<T>> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(Error::InvalidParameter(format!("detector efficiency must lie in (0, 1], got {eta}")));
    }
    let miss = T::one() - eta;
    let diagonal = (0..=cutoff).map(|n| T::one() - miss.powi(n as i32)).collect();
    Ok(PovmElement { eta, diagonal })
}

/// Click probability and post-click state.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmOutcome<T: Real> {
    pub click_probability: T,
    /// `√Π ψ / ‖√Π ψ‖`
    pub post_click: Option<MultiModeState<T>>,
}

/// Applies the click element on `mode` (Lüders update with `√Π`).
pub fn apply_povm<T: Real>(state: &MultiModeState<T>, povm: &PovmElement<T>, mode: Mode) -> Result<PovmOutcome<T>> {
    let d = state.dim_of(mode)?;
    if d != povm.diagonal.len() {
        return Err(Error::DimensionMismatch(format!(
            "detector built for dimension {} on a mode of dimension {d}",
            povm.diagonal.len()
        )));
    }
    let mut m = ndarray::Array2::from_elem((d, d), czero());
    for (n, p) in povm.diagonal.iter().enumerate() {
        m[[n, n]] = creal(p.sqrt());
    }
    let v = state.apply_mode_operator(&ModeOperator::custom(m)?, mode)?;
    let r = ConditionalResult::from_unnormalized(String::new(), v);
    Ok(PovmOutcome { click_probability: r.probability, post_click: r.state })
}

/// `⟨X_B X_C X_D⟩` with `X = (a + a†)/√2` on every mode (two-level modes use
/// the truncated `σx/√2`).
pub fn quadrature_expectation_xxx<T: Real>(resource: &MultiModeState<T>) -> Result<T> {
    let xb = ModeOperator::quadrature(resource.dim_of(Mode::B)?);
    let xc = ModeOperator::quadrature(resource.dim_of(Mode::C)?);
    let xd = ModeOperator::quadrature(resource.dim_of(Mode::D)?);
    let v = resource.expectation(&[(Mode::B, &xb), (Mode::C, &xc), (Mode::D, &xd)])?;
    Ok(v.re)
}

/// Closed-form prediction `α sin(θ_B − θ_C) sin(θ_D)`.
pub fn quadrature_law<T: Real>(alpha: T, theta_b: T, theta_c: T, theta_d: T) -> T {
    alpha * (theta_b - theta_c).sin() * theta_d.sin()
}

/// Value obtained by evaluating the triple-quadrature expectation exactly
/// on the phased resource:
/// `α sinθ_B cosθ_C sinθ_D e^{−2α²}/√2`.
pub fn quadrature_exact<T: Real>(alpha: T, theta_b: T, theta_c: T, theta_d: T) -> T {
    alpha * theta_b.sin() * theta_c.cos() * theta_d.sin() * (lit::<T>(-2.0) * alpha * alpha).exp()
        * T::FRAC_1_SQRT_2()
}
