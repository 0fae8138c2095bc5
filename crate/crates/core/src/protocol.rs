//! Controlled teleportation: branch enumeration, Bob's corrections, and
//! the closed-form fidelity and density-matrix laws next to their numeric
//! counterparts.

use std::fmt;

use ndarray::{array, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    beam_splitter_5050, make_coherent, DensityOperator, Mode, ModeOperator, MultiModeState, PartialTrace,
};
use crate::hybrid::{
    build_combined, build_resource, build_target, logical_pair, Encoding, ResourceSpec, TargetSpec,
};
use crate::measurement::{build_quasi_bell, project_fock, project_pattern, project_quasi_bell, BellOutcome};
use crate::scalar::{c, cis, cone, creal, czero, lit, Real};

/// Bob's unitary. `U₁ = σz`, `U₂ = iσx`, `U₃ = iσy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    I,
    U1,
    U2,
    #[serde(rename = "-U2")]
    NegU2,
    U3,
    #[serde(rename = "-U3")]
    NegU3,
}

impl Correction {
    pub fn matrix<T: Real>(self) -> Array2<Complex<T>> {
        let (o, z, i) = (cone::<T>(), czero::<T>(), c(T::zero(), T::one()));
        match self {
            Correction::I => array![[o, z], [z, o]],
            Correction::U1 => array![[o, z], [z, -o]],
            Correction::U2 => array![[z, i], [i, z]],
            Correction::NegU2 => array![[z, -i], [-i, z]],
            // iσy = [[0, 1], [−1, 0]]
            Correction::U3 => array![[z, o], [-o, z]],
            Correction::NegU3 => array![[z, -o], [o, z]],
        }
    }

    pub fn operator<T: Real>(self) -> ModeOperator<T> {
        ModeOperator::custom(self.matrix()).expect("2x2 correction")
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::I => "I",
            Correction::U1 => "U1",
            Correction::U2 => "U2",
            Correction::NegU2 => "-U2",
            Correction::U3 => "U3",
            Correction::NegU3 => "-U3",
        })
    }
}

/// `(Bell outcome, Charlie's count) → correction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub rows: Vec<(BellOutcome, u8, Correction)>,
}

impl CorrectionTable {
    /// The eight-row table used with the quasi-Bell measurement.
    pub fn bell_and_count() -> Self {
        use BellOutcome::*;
        use Correction::*;
        Self {
            rows: vec![
                (PhiPlus, 0, U1),
                (PhiPlus, 1, I),
                (PhiMinus, 0, I),
                (PhiMinus, 1, U1),
                (PsiPlus, 0, NegU3),
                (PsiPlus, 1, U2),
                (PsiMinus, 0, NegU2),
                (PsiMinus, 1, U3),
            ],
        }
    }

    pub fn lookup(&self, bell: BellOutcome, count: u8) -> Option<Correction> {
        self.rows.iter().find(|(b, n, _)| *b == bell && *n == count).map(|r| r.2)
    }
}

/// Correction after the single-click `|10⟩_AB` projection: only Charlie's
/// count matters (0 → `U₁`, 1 → `I`).
pub fn count_only_correction(count: u8) -> Correction {
    if count == 0 {
        Correction::U1
    } else {
        Correction::I
    }
}

/// `|⟨out|in⟩|²` for pure states, normalized by both norms.
pub fn fidelity<T: Real>(out: &MultiModeState<T>, input: &MultiModeState<T>) -> Result<T> {
    out.fidelity(input)
}

/// `⟨in|ρ|in⟩` with `ρ` normalized by its trace.
pub fn fidelity_mixed<T: Real>(rho: &DensityOperator<T>, input: &MultiModeState<T>) -> Result<T> {
    rho.fidelity_with(input)
}

/// One branch of the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome<T: Real> {
    pub bell: BellOutcome,
    pub count: u8,
    pub probability: T,
    pub correction: Correction,
    /// Corrected state of mode `C`; `None` for branches that cannot occur.
    pub output: Option<MultiModeState<T>>,
    pub fidelity: T,
}

/// Runs all eight branches in qubit encoding for target `X|α⟩ + Y|−α⟩`
/// (`|X|² + |Y|² = 1`). Every corrected output is compared with
/// `X|0⟩ + Y|1⟩`.
pub fn run_cqt_dv<T: Real>(x: Complex<T>, y: Complex<T>) -> Result<Vec<ProtocolOutcome<T>>> {
    let alpha = T::one();
    let target = build_target(&TargetSpec::coefficients(x, y, alpha, Encoding::Qubit, 1))?;
    let resource = build_resource(&ResourceSpec::new(alpha, Encoding::Qubit, 1))?;
    let psi = build_combined(&target, &resource)?;
    let set = build_quasi_bell(alpha, Encoding::Qubit, 1)?;
    let table = CorrectionTable::bell_and_count();
    let reference = MultiModeState::qubit(Mode::C, x, y);
    let mut out = Vec::with_capacity(8);
    for bell in BellOutcome::ALL {
        let after_bell = project_quasi_bell(&psi, &set, bell)?;
        for count in 0..2u8 {
            let correction = table.lookup(bell, count).expect("table covers every branch");
            let Some(cd) = after_bell.state.as_ref() else {
                out.push(ProtocolOutcome { bell, count, probability: T::zero(), correction, output: None, fidelity: T::zero() });
                continue;
            };
            let after_count = project_fock(cd, Mode::D, count as usize)?;
            let probability = after_bell.probability * after_count.probability;
            let (output, fid) = match after_count.state {
                Some(cs) => {
                    let corrected = cs.apply_mode_operator(&correction.operator(), Mode::C)?;
                    let f = fidelity(&corrected, &reference)?;
                    (Some(corrected), f)
                }
                None => (None, T::zero()),
            };
            out.push(ProtocolOutcome { bell, count, probability, correction, output, fidelity: fid });
        }
    }
    Ok(out)
}

/// `½[(e^{iφ} + e^{iθ_B})|0⟩ + (e^{iφ} − e^{iθ_B})e^{iθ_C}|1⟩]` on mode `C`.
pub fn ideal_first_order_output<T: Real>(phi: T, theta_b: T, theta_c: T) -> MultiModeState<T> {
    let h = lit::<T>(0.5);
    let (ep, eb) = (cis(phi), cis(theta_b));
    MultiModeState::qubit(Mode::C, (ep + eb) * h, (ep - eb) * cis(theta_c) * h)
}

/// `(|0⟩ + e^{iφ}|1⟩)/√2` on mode `C`, the qubit being teleported.
pub fn phase_input_on_c<T: Real>(phi: T) -> MultiModeState<T> {
    let s = T::FRAC_1_SQRT_2();
    MultiModeState::qubit(Mode::C, creal(s), cis(phi) * s)
}

/// `¼[2 + cos(θ_B − θ_C) − cos(2φ − θ_B − θ_C)]`
pub fn fidelity_first_order_closed<T: Real>(phi: T, theta_b: T, theta_c: T) -> T {
    let two = lit::<T>(2.0);
    (two + (theta_b - theta_c).cos() - (two * phi - theta_b - theta_c).cos()) * lit(0.25)
}

/// Printed first-order density matrix
/// `½[[1 + cos(φ−θ_B), x*(1−y)], [x(1−y*), 1 − cos(φ−θ_B)]]`
/// with `x = e^{iφ}/2`, `y = e^{2i(φ−θ_B)}/2`.
pub fn rho_c_first_order_printed<T: Real>(phi: T, theta_b: T) -> Array2<Complex<T>> {
    let h = lit::<T>(0.5);
    let x = cis(phi) * h;
    let y = cis(lit::<T>(2.0) * (phi - theta_b)) * h;
    let cd = (phi - theta_b).cos();
    array![
        [creal((T::one() + cd) * h), x.conj() * (cone::<T>() - y) * h],
        [x * (cone::<T>() - y.conj()) * h, creal((T::one() - cd) * h)]
    ]
}

/// One of Charlie's outcomes in the single-click pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct CvBranch<T: Real> {
    pub count: u8,
    /// Probability relative to the `|10⟩_AB` event.
    pub probability: T,
    pub correction: Correction,
    pub output: Option<MultiModeState<T>>,
    pub fidelity: T,
}

/// Result of the first-order (single-click) pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderResult<T: Real> {
    /// Probability of the `|1⟩_A|0⟩_B` detection.
    pub click_probability: T,
    pub branches: Vec<CvBranch<T>>,
    /// Count-averaged fidelity with `(|0⟩ + e^{iφ}|1⟩)/√2`.
    pub fidelity: T,
    /// Closed-form output ket, normalized.
    pub ideal_output: MultiModeState<T>,
    /// `1 − |⟨ideal|numeric⟩|²`; grows with α as higher photon numbers enter.
    pub higher_order_deviation: T,
    /// Count-averaged density matrix of the corrected output.
    pub rho_c: DensityOperator<T>,
    /// The printed analytic matrix, kept for comparison.
    pub rho_c_printed: Array2<Complex<T>>,
}

/// Phased coherent input on `A`, phased Fock resource, 50:50 beam splitter on
/// `(A, B)`, projection on `|1⟩_A|0⟩_B`, Charlie's count on `D`, and the
/// count-only correction on `C`.
pub fn run_cqt_cv_first_order<T: Real>(
    phi: T,
    theta_b: T,
    theta_c: T,
    theta_d: T,
    alpha: T,
    cutoff: usize,
) -> Result<FirstOrderResult<T>> {
    let target = build_target(&TargetSpec::phase(phi, alpha, Encoding::Fock, cutoff))?;
    let resource =
        build_resource(&ResourceSpec::new(alpha, Encoding::Fock, cutoff).with_phases(theta_b, theta_c, theta_d))?;
    let psi = build_combined(&target, &resource)?;
    let mixed = beam_splitter_5050(&psi, Mode::A, Mode::B)?;
    let click = project_pattern(&mixed, &[(Mode::A, 1), (Mode::B, 0)])?;
    let cd = click.state()?;
    let input = phase_input_on_c(phi);
    let ideal = ideal_first_order_output(phi, theta_b, theta_c).normalized()?;
    let mut branches = Vec::with_capacity(2);
    let mut rho = Array2::from_elem((2, 2), czero::<T>());
    let mut fid = T::zero();
    let mut deviation = T::zero();
    for count in 0..2u8 {
        let r = project_fock(cd, Mode::D, count as usize)?;
        let correction = count_only_correction(count);
        let (output, f) = match r.state {
            Some(s) => {
                let corrected = s.apply_mode_operator(&correction.operator(), Mode::C)?;
                let f = fidelity(&corrected, &input)?;
                let dev = T::one() - fidelity(&corrected, &ideal)?;
                deviation = deviation + r.probability * dev;
                let a = corrected.amplitudes();
                for i in 0..2 {
                    for j in 0..2 {
                        rho[[i, j]] = rho[[i, j]] + a[i] * a[j].conj() * r.probability;
                    }
                }
                (Some(corrected), f)
            }
            None => (None, T::zero()),
        };
        fid = fid + r.probability * f;
        branches.push(CvBranch { count, probability: r.probability, correction, output, fidelity: f });
    }
    Ok(FirstOrderResult {
        click_probability: click.probability,
        branches,
        fidelity: fid,
        ideal_output: ideal,
        higher_order_deviation: deviation,
        rho_c: DensityOperator::from_parts(vec![Mode::C], vec![2], rho)?,
        rho_c_printed: rho_c_first_order_printed(phi, theta_b),
    })
}

/// Assembled two-click density matrix of modes `(C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderDensity<T: Real> {
    pub a: T,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: T,
    pub e: Complex<T>,
    pub f: Complex<T>,
    pub phi: T,
    pub theta_b: T,
    pub theta_c: T,
    pub theta_d: T,
    pub alpha: T,
    /// Matrix with the `1/4` prefactor, as assembled.
    pub raw: Array2<Complex<T>>,
}

impl<T: Real> SecondOrderDensity<T> {
    pub fn density(&self) -> Result<DensityOperator<T>> {
        DensityOperator::from_parts(vec![Mode::C, Mode::D], vec![2, 2], self.raw.clone())
    }

    /// Trace-normalized version used for every fidelity computation.
    pub fn normalized(&self) -> Result<DensityOperator<T>> {
        self.density()?.normalized()
    }
}

/// Entries `a, b, c, d, e = e^{iθ_C}, f = e^{iθ_D}` of the two-click
/// `ρ_CD`, assembled into the 4×4 matrix.
pub fn rho_cd_second_order<T: Real>(phi: T, theta_b: T, theta_c: T, theta_d: T, alpha: T) -> SecondOrderDensity<T> {
    let delta = phi - theta_b;
    let a2 = alpha * alpha;
    let h = lit::<T>(0.5);
    let k = T::one() + a2 * (T::one() + delta.cos());
    let a = a2 * (T::one() + delta.cos());
    let d = a2 * (T::one() - delta.cos());
    let two_i = |s: T| cis(lit::<T>(2.0) * s * delta);
    let b = cis(-delta) * (cone::<T>() - two_i(T::one())) * (a2 * h * k);
    let cc = cis(delta) * (cone::<T>() - two_i(-T::one())) * (a2 * h * k);
    let e = cis(theta_c);
    let f = cis(theta_d);
    let (ar, dr) = (creal(a), creal(d));
    let q = lit::<T>(0.25);
    let raw = array![
        [ar, ar * f.conj(), -b * e.conj(), b * e.conj() * f.conj()],
        [ar * f, ar, -b * e.conj() * f, b * e.conj()],
        [-cc * e, -cc * e * f.conj(), dr, -dr * f.conj()],
        [cc * e * f, cc * e, -dr * f, dr]
    ]
    .mapv(|z| z * q);
    SecondOrderDensity { a, b, c: cc, d, e, f, phi, theta_b, theta_c, theta_d, alpha, raw }
}

/// `ρ_C = (α²/2) diag(1 + cos(φ−θ_B), 1 − cos(φ−θ_B))`
pub fn rho_c_second_order<T: Real>(phi: T, theta_b: T, alpha: T) -> Array2<Complex<T>> {
    let s = alpha * alpha * lit(0.5);
    let cd = (phi - theta_b).cos();
    array![[creal(s * (T::one() + cd)), czero()], [czero(), creal(s * (T::one() - cd))]]
}

/// `(1 + cos²(φ − θ_B))/2`
pub fn fidelity_second_order_closed<T: Real>(phi: T, theta_b: T) -> T {
    let cd = (phi - theta_b).cos();
    (T::one() + cd * cd) * lit(0.5)
}

/// `⟨out|ρ_C|out⟩` with `ρ_C = Tr_D ρ_CD` normalized and `|out⟩` the ideal
/// first-order output.
pub fn fidelity_second_order_numeric<T: Real>(phi: T, theta_b: T, theta_c: T, theta_d: T, alpha: T) -> Result<T> {
    let rho_cd = rho_cd_second_order(phi, theta_b, theta_c, theta_d, alpha).normalized()?;
    let rho_c = rho_cd.partial_trace(&[Mode::C])?;
    rho_c.fidelity_with(&ideal_first_order_output(phi, theta_b, theta_c))
}

/// Three readings of the phase-only fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseOnlyFidelity<T: Real> {
    /// `cos²(φ)/2`
    pub printed: T,
    /// `|⟨in|out⟩|²` with `out = X|0⟩ + Y|1⟩` and `in = (|0⟩ + e^{iφ}|1⟩)/√2`
    /// taken literally in the number basis (reproduces the printed value).
    pub literal: T,
    /// Same comparison with `|0⟩, |1⟩` read as the logical states `|±α⟩`:
    /// `|⟨αe^{iφ}| X|α⟩ + Y|−α⟩⟩|²` in the Fock space. Equals one at `φ = 0`.
    pub logical: T,
}

pub fn fidelity_phase_only<T: Real>(phi: T, alpha: T, cutoff: usize) -> Result<PhaseOnlyFidelity<T>> {
    let (x, y) = crate::hybrid::phase_coefficients(phi);
    let cp = phi.cos();
    let printed = cp * cp * lit(0.5);
    let literal = fidelity(&MultiModeState::qubit(Mode::C, x, y), &phase_input_on_c(phi))?;
    let (p, m) = logical_pair(alpha, Encoding::Fock, cutoff)?;
    let out: Vec<Complex<T>> = p.iter().zip(&m).map(|(a, b)| x * a + y * b).collect();
    let out = MultiModeState::from_parts(vec![Mode::A], vec![cutoff + 1], out)?;
    let coh = MultiModeState::single(Mode::A, &make_coherent(cis(phi) * alpha, cutoff)?);
    let logical = fidelity(&out, &coh)?;
    Ok(PhaseOnlyFidelity { printed, literal, logical })
}

/// Fails unless `probabilities` sum to one within `tol`.
pub fn check_complete<T: Real>(probabilities: impl IntoIterator<Item = T>, tol: T) -> Result<T> {
    let s: T = probabilities.into_iter().sum();
    if (s - T::one()).abs() > tol {
        return Err(Error::Normalization(format!("branch probabilities sum to {s}")));
    }
    Ok(s)
}
