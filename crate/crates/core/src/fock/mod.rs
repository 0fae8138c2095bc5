//! Truncated bosonic Hilbert-space kernel.
//!
//! A single mode is represented by a [`FockVector`] holding amplitudes of
//! `|0⟩ … |N⟩`. Several modes live together in a [`MultiModeState`], where
//! every mode carries its own dimension (`N+1` for Fock modes, `2` for
//! qubit-encoded modes). Every constructor checks how much probability the
//! truncation throws away and refuses cutoffs that lose more than
//! [`MASS_TOLERANCE`].

mod beam_splitter;
mod density;
mod operator;
mod state;

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, from_usize, lit, to_f64, Real};

pub use beam_splitter::beam_splitter_5050;
pub use density::{partial_trace, DensityOperator, PartialTrace};
pub use operator::{ModeOperator, OperatorKind};
pub use state::{inner, phase_shift_all, tensor, MultiModeState};

/// Default photon-number cutoff.
pub const DEFAULT_CUTOFF: usize = 24;

/// Largest discarded probability accepted from a truncation.
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Mode labels. The global ordering is `A < B < C < D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    A,
    B,
    C,
    D,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A, Mode::B, Mode::C, Mode::D];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::A => "A",
            Mode::B => "B",
            Mode::C => "C",
            Mode::D => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Mode::A),
            "B" | "b" => Ok(Mode::B),
            "C" | "c" => Ok(Mode::C),
            "D" | "d" => Ok(Mode::D),
            other => Err(Error::InvalidParameter(format!("unknown mode label {other:?}"))),
        }
    }
}

/// Photon-number parity of a cat state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even, `-1` for odd.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Parity::Even => T::one(),
            Parity::Odd => -T::one(),
        }
    }
}

/// Amplitudes of a single truncated bosonic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T: Real> {
    cutoff: usize,
    amps: Vec<Complex<T>>,
    normalized: bool,
    discarded: T,
}

impl<T: Real> FockVector<T> {
    /// Wraps raw amplitudes; `amps.len()` must be `cutoff + 1 >= 2`.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "a Fock vector needs at least two amplitudes, got {}",
                amps.len()
            )));
        }
        Ok(Self { cutoff: amps.len() - 1, amps, normalized: false, discarded: T::zero() })
    }

    /// The Fock state `|n⟩` truncated at `cutoff`.
    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::InvalidParameter(format!("|{n}⟩ lies above cutoff {cutoff}")));
        }
        let mut amps = vec![czero(); cutoff + 1];
        amps[n] = cone();
        let mut v = Self::from_amplitudes(amps)?;
        v.normalized = true;
        Ok(v)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::number_state(0, cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Probability mass that the constructor dropped before renormalizing.
    pub fn discarded_mass(&self) -> T {
        self.discarded
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns a unit-norm copy.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= T::min_positive_value() {
            return Err(Error::Normalization("cannot normalize the zero vector".into()));
        }
        let s = T::one() / n2.sqrt();
        Ok(Self {
            cutoff: self.cutoff,
            amps: self.amps.iter().map(|a| a * s).collect(),
            normalized: true,
            discarded: self.discarded,
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cutoffs {} and {} differ",
                self.cutoff, other.cutoff
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨u|v⟩|² / (‖u‖²‖v‖²)`
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let ov = self.inner(other)?;
        Ok(ov.norm_sqr() / (self.norm_sqr() * other.norm_sqr()))
    }

    /// `op · self`, not renormalized.
    pub fn apply(&self, op: &ModeOperator<T>) -> Result<Self> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} on a mode of dimension {}",
                op.dim(),
                self.dim()
            )));
        }
        let amps = op.apply_slice(&self.amps);
        Ok(Self { cutoff: self.cutoff, amps, normalized: false, discarded: self.discarded })
    }

    /// `|c_n|²` for every `n`.
    pub fn photon_distribution(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Truncates the infinite series `terms` at `cutoff`.
    ///
    /// `decay_from` is an index beyond which `|c_n|` is non-increasing, so the
    /// tail can be summed until it stops contributing.
    fn from_series<I>(cutoff: usize, mut terms: I, decay_from: T) -> Result<Self>
    where
        I: Iterator<Item = Complex<T>>,
    {
        if cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
        }
        let amps: Vec<Complex<T>> = terms.by_ref().take(cutoff + 1).collect();
        let kept: T = amps.iter().map(|a| a.norm_sqr()).sum();
        let mut tail = T::zero();
        let tiny = T::epsilon() * T::epsilon();
        for (k, term) in terms.enumerate().take(100_000) {
            let n = from_usize::<T>(cutoff + 1 + k);
            let t = term.norm_sqr();
            tail = tail + t;
            if n > decay_from && t <= tiny * (kept + tail) {
                break;
            }
        }
        let total = kept + tail;
        if !(total > T::zero()) {
            return Err(Error::Normalization("series has zero norm".into()));
        }
        let discarded = tail / total;
        if to_f64(discarded) > MASS_TOLERANCE {
            return Err(Error::InsufficientCutoff { cutoff, discarded: to_f64(discarded) });
        }
        let mut v = Self::from_amplitudes(amps)?.normalized()?;
        v.discarded = discarded;
        Ok(v)
    }
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ/√n!` as an endless iterator.
fn coherent_terms<T: Real>(alpha: Complex<T>) -> impl Iterator<Item = Complex<T>> {
    let mut cur = Complex::new((-alpha.norm_sqr() / lit(2.0)).exp(), T::zero());
    let mut n = 0usize;
    std::iter::from_fn(move || {
        let out = cur;
        n += 1;
        cur = cur * alpha / from_usize::<T>(n).sqrt();
        Some(out)
    })
}

/// The coherent state `|α⟩` truncated at `cutoff` and renormalized.
pub fn make_coherent<T: Real>(alpha: Complex<T>, cutoff: usize) -> Result<FockVector<T>> {
    FockVector::from_series(cutoff, coherent_terms(alpha), alpha.norm_sqr())
}

/// Normalization `N± = 1/√(2(1 ± x²))` of `|α⟩ ± |−α⟩`, with `x² = e^{−2α²}`.
pub fn cat_normalization<T: Real>(alpha: T, parity: Parity) -> T {
    let x2 = (lit::<T>(-2.0) * alpha * alpha).exp();
    T::one() / (lit::<T>(2.0) * (T::one() + parity.sign::<T>() * x2)).sqrt()
}

/// The cat state `N±(|α⟩ ± |−α⟩)` for real `α > 0`.
pub fn make_cat<T: Real>(alpha: T, parity: Parity, cutoff: usize) -> Result<FockVector<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("cat amplitude must be positive, got {alpha}")));
    }
    let keep_odd = parity == Parity::Odd;
    let terms = coherent_terms(Complex::new(alpha, T::zero()))
        .enumerate()
        .map(move |(n, t)| if (n % 2 == 1) == keep_odd { t } else { czero() });
    FockVector::from_series(cutoff, terms, alpha * alpha)
}

/// Squeezed vacuum `Σ (1/√cosh ζ)(√(2n)!/(2ⁿ n!)) tanhⁿζ |2n⟩`.
///
/// The expansion carries `+tanh ζ` on every pair, giving the
/// `|0⟩ + (ζ/√2)|2⟩ + √(3/8)ζ²|4⟩ + …` small-ζ series.
pub fn make_squeezed_vacuum<T: Real>(zeta: T, cutoff: usize) -> Result<FockVector<T>> {
    if !(zeta >= T::zero() && zeta < T::one()) {
        return Err(Error::InvalidParameter(format!("squeezing must satisfy 0 ≤ ζ < 1, got {zeta}")));
    }
    let th = zeta.tanh();
    let mut cur = T::one() / zeta.cosh().sqrt();
    let mut n = 0usize;
    // c_{2n} followed by the empty odd slot
    let pairs = std::iter::from_fn(move || {
        let even = Complex::new(cur, T::zero());
        let k = from_usize::<T>(n);
        cur = cur * th * ((lit::<T>(2.0) * k + T::one()) / (lit::<T>(2.0) * k + lit(2.0))).sqrt();
        n += 1;
        Some([even, czero()])
    })
    .flatten();
    FockVector::from_series(cutoff, pairs, T::zero())
}

/// `a S(ζ)|0⟩`, renormalized: the photon-subtracted squeezed vacuum.
pub fn make_photon_subtracted_squeezed<T: Real>(zeta: T, cutoff: usize) -> Result<FockVector<T>> {
    if !(zeta > T::zero()) {
        return Err(Error::InvalidParameter("photon subtraction needs ζ > 0".into()));
    }
    // one extra level so the annihilated vector keeps `cutoff + 1` entries
    let sq = make_squeezed_vacuum(zeta, cutoff + 1)?;
    let lowered = sq.apply(&ModeOperator::annihilation(cutoff + 2))?;
    let mut amps = lowered.into_amplitudes();
    let dropped = amps.pop().map(|a| a.norm_sqr()).unwrap_or_else(T::zero);
    let kept: T = amps.iter().map(|a| a.norm_sqr()).sum();
    let discarded = dropped / (dropped + kept) + sq.discarded;
    if to_f64(discarded) > MASS_TOLERANCE {
        return Err(Error::InsufficientCutoff { cutoff, discarded: to_f64(discarded) });
    }
    let mut v = FockVector::from_amplitudes(amps)?.normalized()?;
    v.discarded = discarded;
    Ok(v)
}
