//! Wigner functions: closed forms for coherent and cat states, a
//! displaced-parity evaluation for any single-mode density matrix, and the
//! conditional mode-`B` states of the resource.
//!
//! Two phase-space conventions are provided. `Printed` uses the widths
//! exactly as they are commonly quoted for these closed forms (unit
//! variance in `q`, variance 1/4 in `p`, centre `q₀ = Re α`). `Symmetric`
//! uses `X = (a + a†)/√2`, where the vacuum has variance 1/2 in both
//! quadratures and `|α⟩` is centred at `√2 (Re α, Im α)`. The
//! displaced-parity oracle is written in the symmetric convention, and that
//! is the one the closed forms are checked against.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{make_cat, make_coherent, DensityOperator, FockVector, Mode, ModeOperator, MultiModeState, Parity, PartialTrace};
use crate::measurement::project_onto;
use crate::scalar::{creal, czero, from_usize, lit, ln_factorials, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Printed,
    #[default]
    Symmetric,
}

/// Coherent-state Wigner function.
pub fn wigner_coherent<T: Real>(q: T, p: T, alpha: Complex<T>, convention: Convention) -> T {
    match convention {
        Convention::Printed => {
            let (dq, dp) = (q - alpha.re, p - alpha.im);
            T::FRAC_1_PI() * (-(dq * dq) * lit(0.5)).exp() * (lit::<T>(-2.0) * dp * dp).exp()
        }
        Convention::Symmetric => {
            let (dq, dp) = (q - T::SQRT_2() * alpha.re, p - T::SQRT_2() * alpha.im);
            T::FRAC_1_PI() * (-(dq * dq) - dp * dp).exp()
        }
    }
}

/// Cat-state Wigner function: two lobes plus the interference term.
///
/// `alpha` is real. For `Odd` the interference term changes sign and the
/// normalization uses `1 − e^{−q₀²}`.
pub fn wigner_cat<T: Real>(q: T, p: T, alpha: T, parity: Parity, convention: Convention) -> T {
    let s = parity.sign::<T>();
    let two = lit::<T>(2.0);
    match convention {
        Convention::Printed => {
            let (q0, p0) = (alpha, T::zero());
            let n2 = T::one() / (T::one() + s * (two * p0 * q0).cos() * (-(q0 * q0)).exp());
            let lobe = |sgn: T| {
                let dq = q + sgn * q0;
                n2 / (two * T::PI()) * (-(dq * dq) - two * (p - p0) * (p - p0)).exp()
            };
            let int = s * n2 * T::FRAC_1_PI() * (two * p * q0).cos() * (-(q * q) - (p - p0) * (p - p0)).exp();
            lobe(T::one()) + lobe(-T::one()) + int
        }
        Convention::Symmetric => {
            let q0 = T::SQRT_2() * alpha;
            let n2 = T::one() / (T::one() + s * (-(q0 * q0)).exp());
            let lobe = |sgn: T| {
                let dq = q + sgn * q0;
                n2 / (two * T::PI()) * (-(dq * dq) - p * p).exp()
            };
            let int = s * n2 * T::FRAC_1_PI() * (two * p * q0).cos() * (-(q * q) - p * p).exp();
            lobe(T::one()) + lobe(-T::one()) + int
        }
    }
}

/// Axis ranges and resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec<T: Real> {
    pub q_min: T,
    pub q_max: T,
    pub p_min: T,
    pub p_max: T,
    pub points: usize,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self { q_min: lit(-5.0), q_max: lit(5.0), p_min: lit(-5.0), p_max: lit(5.0), points: 201 }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParameter("a grid needs at least two points per axis".into()));
        }
        if !(self.q_max > self.q_min) || !(self.p_max > self.p_min) {
            return Err(Error::InvalidParameter("grid ranges must be non-empty".into()));
        }
        Ok(())
    }

    pub fn q(&self, i: usize) -> T {
        self.q_min + (self.q_max - self.q_min) * from_usize::<T>(i) / from_usize::<T>(self.points - 1)
    }

    pub fn p(&self, j: usize) -> T {
        self.p_min + (self.p_max - self.p_min) * from_usize::<T>(j) / from_usize::<T>(self.points - 1)
    }
}

/// Wigner values on a rectangular grid, indexed `[q, p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid<T: Real> {
    pub spec: GridSpec<T>,
    pub values: Array2<T>,
}

impl<T: Real> PhaseSpaceGrid<T> {
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        spec.validate()?;
        let values = Array2::from_shape_fn((spec.points, spec.points), |(i, j)| f(spec.q(i), spec.p(j)));
        Ok(Self { spec, values })
    }

    /// Trapezoidal `∫∫ W dq dp`.
    pub fn integral(&self) -> T {
        let n = self.spec.points;
        let hq = (self.spec.q_max - self.spec.q_min) / from_usize::<T>(n - 1);
        let hp = (self.spec.p_max - self.spec.p_min) / from_usize::<T>(n - 1);
        let w = |k: usize| if k == 0 || k == n - 1 { lit::<T>(0.5) } else { T::one() };
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                acc = acc + w(i) * w(j) * self.values[[i, j]];
            }
        }
        acc * hq * hp
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Largest pointwise difference.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

/// Tabulates ⟨n|D(γ)|m⟩ for all `n, m < dim` via associated Laguerre polynomials.
struct Displacement<T: Real> {
    dim: usize,
    /// `√(lo!/hi!)` indexed `[lo][hi]`
    sqrt_ratio: Vec<Vec<T>>,
    lag: Vec<Vec<T>>,
    rpow: Vec<T>,
    phase: Vec<Complex<T>>,
}

impl<T: Real> Displacement<T> {
    fn new(dim: usize) -> Self {
        let lf = ln_factorials::<T>(dim);
        let sqrt_ratio = (0..dim)
            .map(|lo| (0..dim).map(|hi| ((lf[lo] - lf[hi]) * lit(0.5)).exp()).collect())
            .collect();
        Self {
            dim,
            sqrt_ratio,
            lag: vec![vec![T::zero(); dim]; dim],
            rpow: vec![T::zero(); dim],
            phase: vec![czero(); dim],
        }
    }

    fn matrix(&mut self, gamma: Complex<T>, out: &mut Array2<Complex<T>>) {
        let d = self.dim;
        let x = gamma.norm_sqr();
        let gauss = (-x * lit(0.5)).exp();
        // lag[k][j] = L_j^{(k)}(x)
        for (k, row) in self.lag.iter_mut().enumerate() {
            let kk = from_usize::<T>(k);
            row[0] = T::one();
            if d > 1 {
                row[1] = T::one() + kk - x;
            }
            for j in 1..d.saturating_sub(1) {
                let jj = from_usize::<T>(j);
                row[j + 1] = ((lit::<T>(2.0) * jj + T::one() + kk - x) * row[j] - (jj + kk) * row[j - 1]) / (jj + T::one());
            }
        }
        let r = gamma.norm();
        let unit = if r > T::zero() { gamma / r } else { Complex::new(T::one(), T::zero()) };
        self.rpow[0] = gauss;
        self.phase[0] = Complex::new(T::one(), T::zero());
        for k in 1..d {
            self.rpow[k] = self.rpow[k - 1] * r;
            self.phase[k] = self.phase[k - 1] * unit;
        }
        for n in 0..d {
            for m in 0..d {
                let (hi, lo) = if n >= m { (n, m) } else { (m, n) };
                let k = hi - lo;
                let mag = self.sqrt_ratio[lo][hi] * self.rpow[k] * self.lag[k][lo];
                // γ^k above the diagonal, (−γ*)^k below
                let ph = if n >= m {
                    self.phase[k]
                } else if k % 2 == 0 {
                    self.phase[k].conj()
                } else {
                    -self.phase[k].conj()
                };
                out[[n, m]] = ph * mag;
            }
        }
    }
}

/// `W(q, p) = (1/π) Σ ρ_{mn} (−1)^m ⟨n|D(2β)|m⟩`, `β = (q + ip)/√2`: the
/// displaced-parity formula `(1/π) Tr[ρ D(β) Π D†(β)]` in the symmetric
/// convention.
pub fn wigner_from_density<T: Real>(rho: &DensityOperator<T>, spec: GridSpec<T>) -> Result<PhaseSpaceGrid<T>> {
    spec.validate()?;
    if rho.modes().len() != 1 {
        return Err(Error::DimensionMismatch("Wigner function needs a single-mode density matrix".into()));
    }
    let d = rho.size();
    let mut disp = Displacement::new(d);
    let m = rho.matrix();
    let mut dm = Array2::from_elem((d, d), czero());
    let mut values = Array2::from_elem((spec.points, spec.points), T::zero());
    for i in 0..spec.points {
        for j in 0..spec.points {
            let beta = Complex::new(spec.q(i), spec.p(j)) * T::FRAC_1_SQRT_2();
            disp.matrix(beta * lit::<T>(2.0), &mut dm);
            let mut acc = czero::<T>();
            for a in 0..d {
                let sign = if a % 2 == 0 { T::one() } else { -T::one() };
                for b in 0..d {
                    acc = acc + m[[a, b]] * dm[[b, a]] * sign;
                }
            }
            values[[i, j]] = acc.re * T::FRAC_1_PI();
        }
    }
    Ok(PhaseSpaceGrid { spec, values })
}

/// Convenience for pure single-mode states.
pub fn wigner_from_fock<T: Real>(v: &FockVector<T>, spec: GridSpec<T>) -> Result<PhaseSpaceGrid<T>> {
    wigner_from_density(&DensityOperator::from_pure(&MultiModeState::single(Mode::B, v)), spec)
}

/// `(α₊, α₋) = (√ζ, √(3ζ))`
pub fn cat_amplitude_from_squeezing<T: Real>(zeta: T) -> Result<(T, T)> {
    if !(zeta > T::zero() && zeta < T::one()) {
        return Err(Error::InvalidParameter(format!("squeezing must lie in (0, 1), got {zeta}")));
    }
    Ok((zeta.sqrt(), (lit::<T>(3.0) * zeta).sqrt()))
}

/// Conditioning outcome on the two-level mode `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum COutcome {
    Zero,
    One,
    Plus,
    Minus,
}

impl COutcome {
    pub const ALL: [COutcome; 4] = [COutcome::Zero, COutcome::One, COutcome::Plus, COutcome::Minus];

    fn ket<T: Real>(self) -> (Complex<T>, Complex<T>) {
        let s = T::FRAC_1_SQRT_2();
        match self {
            COutcome::Zero => (creal(T::one()), czero()),
            COutcome::One => (czero(), creal(T::one())),
            COutcome::Plus => (creal(s), creal(s)),
            COutcome::Minus => (creal(s), creal(-s)),
        }
    }
}

impl std::str::FromStr for COutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" | "zero" => Ok(COutcome::Zero),
            "1" | "one" => Ok(COutcome::One),
            "+" | "plus" => Ok(COutcome::Plus),
            "-" | "minus" => Ok(COutcome::Minus),
            other => Err(Error::InvalidParameter(format!("unknown C outcome {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    Coherent,
    EvenCat,
    OddCat,
    Unclassified,
}

/// Best match among coherent, even-cat and odd-cat states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification<T: Real> {
    pub class: StateClass,
    /// Fidelity of the winning candidate.
    pub fidelity: T,
    pub coherent_amplitude: Complex<T>,
    pub coherent_fidelity: T,
    pub even_amplitude: T,
    pub even_fidelity: T,
    pub odd_amplitude: T,
    pub odd_fidelity: T,
}

/// Fidelity threshold for accepting a classification.
pub const CLASSIFICATION_THRESHOLD: f64 = 0.98;

fn golden_max<T: Real>(lo: T, hi: T, f: impl Fn(T) -> T) -> (T, T) {
    let g = (lit::<T>(5.0).sqrt() - T::one()) * lit(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * lit(0.5);
    (x, f(x))
}

/// Classifies a normalized single-mode state by maximum fidelity.
pub fn classify<T: Real>(v: &FockVector<T>) -> Result<Classification<T>> {
    let cutoff = v.cutoff();
    let a = ModeOperator::annihilation(v.dim());
    let av = v.apply(&a)?;
    let beta = v.inner(&av)? / v.norm_sqr();
    let coherent_fidelity = make_coherent(beta, cutoff).and_then(|c| c.fidelity(v)).unwrap_or_else(|_| T::zero());
    let cat_fid = |parity: Parity| {
        move |alpha: T| make_cat(alpha, parity, cutoff).and_then(|c| c.fidelity(v)).unwrap_or_else(|_| T::zero())
    };
    let (lo, hi) = (lit::<T>(0.02), lit::<T>(2.5));
    let (even_amplitude, even_fidelity) = golden_max(lo, hi, cat_fid(Parity::Even));
    let (odd_amplitude, odd_fidelity) = golden_max(lo, hi, cat_fid(Parity::Odd));
    let mut best = (StateClass::Coherent, coherent_fidelity);
    for cand in [(StateClass::EvenCat, even_fidelity), (StateClass::OddCat, odd_fidelity)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    if best.1 < lit(CLASSIFICATION_THRESHOLD) {
        best.0 = StateClass::Unclassified;
    }
    Ok(Classification {
        class: best.0,
        fidelity: best.1,
        coherent_amplitude: beta,
        coherent_fidelity,
        even_amplitude,
        even_fidelity,
        odd_amplitude,
        odd_fidelity,
    })
}

/// Mode-`B` Wigner function of the resource after conditioning `C` and `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionWigner<T: Real> {
    pub c: COutcome,
    pub d: usize,
    pub probability: T,
    pub state: FockVector<T>,
    pub grid: PhaseSpaceGrid<T>,
    pub classification: Classification<T>,
}

/// Conditions `C` on `c` and `D` on `|d⟩`, then evaluates mode `B`.
pub fn resource_projection_wigner<T: Real>(
    resource: &MultiModeState<T>,
    c: COutcome,
    d: usize,
    spec: GridSpec<T>,
) -> Result<ProjectionWigner<T>> {
    if resource.modes() != [Mode::B, Mode::C, Mode::D] {
        return Err(Error::DimensionMismatch("expected a resource over modes B, C, D".into()));
    }
    if resource.dim_of(Mode::B)? <= 2 {
        return Err(Error::EncodingMismatch("mode B must be Fock-encoded".into()));
    }
    if d > 1 {
        return Err(Error::InvalidParameter(format!("D outcome must be 0 or 1, got {d}")));
    }
    let (c0, c1) = c.ket::<T>();
    let dk = if d == 0 { (creal(T::one()), czero()) } else { (czero(), creal(T::one())) };
    let bra = MultiModeState::from_parts(
        vec![Mode::C, Mode::D],
        vec![2, 2],
        vec![c0 * dk.0, c0 * dk.1, c1 * dk.0, c1 * dk.1],
    )?;
    let r = project_onto(resource, &bra, format!("C={c:?},D={d}"))?;
    let b = r.state()?.clone();
    let fv = FockVector::from_amplitudes(b.amplitudes().to_vec())?.normalized()?;
    let rho = b.partial_trace(&[Mode::B])?;
    let grid = wigner_from_density(&rho, spec)?;
    let classification = classify(&fv)?;
    Ok(ProjectionWigner { c, d, probability: r.probability, state: fv, grid, classification })
}
