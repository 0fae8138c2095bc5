use num_complex::Complex;

use super::{Mode, MultiModeState, MASS_TOLERANCE};
use crate::error::{Error, Result};
use crate::scalar::{creal, czero, ln_factorials, to_f64, Real};

/// Symmetric (50:50) beam splitter on modes `x` and `y`.
///
/// Creation operators transform as `x† → (x† + y†)/√2`,
/// `y† → (x† − y†)/√2`, so coherent inputs obey
/// `|a⟩|b⟩ → |(a+b)/√2⟩|(a−b)/√2⟩`. The unitary conserves total photon
/// number `M`; each sector is a `(M+1)×(M+1)` block evaluated in closed
/// form. Sectors with `M` above the cutoff cannot be represented, so the
/// input may carry at most [`MASS_TOLERANCE`] there; that mass is dropped.
pub fn beam_splitter_5050<T: Real>(state: &MultiModeState<T>, x: Mode, y: Mode) -> Result<MultiModeState<T>> {
    let dx = state.dim_of(x)?;
    let dy = state.dim_of(y)?;
    if dx != dy {
        return Err(Error::DimensionMismatch(format!(
            "beam splitter needs equal cutoffs, got dimensions {dx} and {dy}"
        )));
    }
    let cutoff = dx - 1;
    let blocks = sector_blocks::<T>(cutoff);

    let strides = state.strides();
    let (px, py) = (state.position(x)?, state.position(y)?);
    let overflow: T = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| state.digit(*i, px, &strides) + state.digit(*i, py, &strides) > cutoff)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let total = state.norm_sqr();
    if total > T::zero() && to_f64(overflow / total) > MASS_TOLERANCE {
        return Err(Error::InsufficientCutoff { cutoff, discarded: to_f64(overflow / total) });
    }

    state.transform_pair(x, y, |input, out| {
        for (m_tot, block) in blocks.iter().enumerate() {
            for m in 0..=m_tot {
                let a = input[m * dy + (m_tot - m)];
                if a.norm_sqr() == T::zero() {
                    continue;
                }
                for p in 0..=m_tot {
                    let idx = p * dy + (m_tot - p);
                    out[idx] = out[idx] + a * block[p * (m_tot + 1) + m];
                }
            }
        }
        Ok(())
    })
}

/// `U_M[p, m] = ⟨p, M−p| U |m, M−m⟩` for `M = 0..=cutoff`, row-major.
fn sector_blocks<T: Real>(cutoff: usize) -> Vec<Vec<Complex<T>>> {
    let lf = ln_factorials::<f64>(cutoff);
    let ln2 = std::f64::consts::LN_2;
    (0..=cutoff)
        .map(|big_m| {
            let mut block = vec![czero::<T>(); (big_m + 1) * (big_m + 1)];
            for m in 0..=big_m {
                let n = big_m - m;
                // ((x†+y†)^m (x†−y†)^n)/√(m! n! 2^M) acting on vacuum
                for j in 0..=m {
                    for k in 0..=n {
                        let p = j + k;
                        let q = big_m - p;
                        let ln_mag = (lf[m] - lf[j] - lf[m - j]) + (lf[n] - lf[k] - lf[n - k])
                            + 0.5 * (lf[p] + lf[q] - lf[m] - lf[n])
                            - 0.5 * big_m as f64 * ln2;
                        let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                        let v: T = T::from_f64(sign * ln_mag.exp()).unwrap_or_else(T::zero);
                        block[p * (big_m + 1) + m] = block[p * (big_m + 1) + m] + creal(v);
                    }
                }
            }
            block
        })
        .collect()
}

/// Dense matrix of the beam splitter on the retained two-mode space, for tests.
#[cfg(test)]
pub(crate) fn dense_matrix(cutoff: usize) -> ndarray::Array2<Complex<f64>> {
    let d = cutoff + 1;
    let blocks = sector_blocks::<f64>(cutoff);
    let mut u = ndarray::Array2::from_elem((d * d, d * d), czero());
    for (big_m, block) in blocks.iter().enumerate() {
        for m in 0..=big_m {
            for p in 0..=big_m {
                u[[p * d + big_m - p, m * d + big_m - m]] = block[p * (big_m + 1) + m];
            }
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_coherent, tensor, FockVector, ModeOperator};
    use crate::scalar::cis;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn two_coherent(a: Complex<f64>, b: Complex<f64>, n: usize) -> MultiModeState<f64> {
        let x = MultiModeState::single(Mode::A, &make_coherent(a, n).unwrap());
        let y = MultiModeState::single(Mode::B, &make_coherent(b, n).unwrap());
        tensor(&[&x, &y]).unwrap()
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let s = two_coherent(czero(), czero(), 6);
        let out = beam_splitter_5050(&s, Mode::A, Mode::B).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn equal_coherent_inputs_combine() {
        let a = Complex::new(0.6, 0.0);
        let out = beam_splitter_5050(&two_coherent(a, a, 24), Mode::A, Mode::B).unwrap();
        let want = two_coherent(a * 2f64.sqrt(), czero(), 24);
        assert!(out.fidelity(&want).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn coherent_amplitude_rule() {
        let alpha = 0.7;
        for (phi, theta) in [(0.3, 1.9), (PI / 2.0, 0.0), (2.0, -1.0)] {
            let a = cis(phi) * alpha;
            let b = cis(theta) * alpha;
            let out = beam_splitter_5050(&two_coherent(a, b, 24), Mode::A, Mode::B).unwrap();
            let want = two_coherent((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2, 24);
            assert!(out.fidelity(&want).unwrap() > 1.0 - 1e-10);
            let ov = crate::fock::inner(&want, &out).unwrap();
            assert_abs_diff_eq!(ov.re, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_photon_splits_evenly() {
        let one = MultiModeState::<f64>::single(Mode::A, &FockVector::number_state(1, 3).unwrap());
        let vac = MultiModeState::single(Mode::B, &FockVector::vacuum(3).unwrap());
        let out = beam_splitter_5050(&tensor(&[&one, &vac]).unwrap(), Mode::A, Mode::B).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[4].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn overflowing_input_is_rejected() {
        let s = two_coherent(Complex::new(1.2, 0.0), Complex::new(1.2, 0.0), 14);
        assert!(matches!(
            beam_splitter_5050(&s, Mode::A, Mode::B),
            Err(Error::InsufficientCutoff { .. })
        ));
    }

    fn taylor_expm(g: &Array2<Complex<f64>>) -> Array2<Complex<f64>> {
        let n = g.nrows();
        let mut out = Array2::from_diag(&ndarray::Array1::from_elem(n, creal(1.0)));
        let mut term = out.clone();
        for k in 1..200 {
            term = term.dot(g).mapv(|z| z / k as f64);
            out = &out + &term;
            if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
                break;
            }
        }
        out
    }

    #[test]
    fn matches_matrix_exponential_of_generator() {
        let cutoff = 8;
        let d = cutoff + 1;
        let a = ModeOperator::<f64>::annihilation(d);
        let ad = a.dagger();
        let id = Array2::from_diag(&ndarray::Array1::from_elem(d, creal(1.0)));
        let kron = |p: &Array2<Complex<f64>>, q: &Array2<Complex<f64>>| {
            let mut k = Array2::from_elem((d * d, d * d), czero());
            for i in 0..d {
                for j in 0..d {
                    for r in 0..d {
                        for s in 0..d {
                            k[[i * d + r, j * d + s]] = p[[i, j]] * q[[r, s]];
                        }
                    }
                }
            }
            k
        };
        let xdy = kron(ad.matrix(), a.matrix());
        let xyd = kron(a.matrix(), ad.matrix());
        let gen = (&xdy - &xyd).mapv(|z| z * (PI / 4.0));
        let phase = kron(&id, ModeOperator::<f64>::phase_shift(d, PI).matrix());
        let exact = phase.dot(&taylor_expm(&gen));
        let ours = dense_matrix(cutoff);
        for row in 0..d * d {
            for col in 0..d * d {
                let (m, n) = (col / d, col % d);
                if m + n > cutoff {
                    continue;
                }
                assert_abs_diff_eq!(ours[[row, col]].re, exact[[row, col]].re, epsilon = 1e-12);
                assert_abs_diff_eq!(ours[[row, col]].im, exact[[row, col]].im, epsilon = 1e-12);
            }
        }
    }
}
