//! Statevector simulator for the four-qubit circuit version of the
//! protocol.
//!
//! Qubits are mode labels; amplitudes are stored with the first listed
//! qubit as the most significant bit, so bitstrings read in qubit order.

use std::collections::BTreeMap;

use ndarray::{array, Array2};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, Mode, ModeOperator, MultiModeState, PartialTrace};
use crate::scalar::{c, cis, cone, creal, czero, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    /// Phase gate `diag(1, e^{iφ})`.
    P,
    CNOT,
    CZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub kind: GateKind,
    pub target: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl Gate {
    pub fn single(kind: GateKind, target: Mode) -> Self {
        Self { kind, target, control: None, angle: None }
    }

    pub fn phase(target: Mode, angle: f64) -> Self {
        Self { kind: GateKind::P, target, control: None, angle: Some(angle) }
    }

    pub fn cnot(control: Mode, target: Mode) -> Self {
        Self { kind: GateKind::CNOT, target, control: Some(control), angle: None }
    }

    pub fn cz(control: Mode, target: Mode) -> Self {
        Self { kind: GateKind::CZ, target, control: Some(control), angle: None }
    }

    fn is_two_qubit(&self) -> bool {
        matches!(self.kind, GateKind::CNOT | GateKind::CZ)
    }

    /// 2×2 matrix of a single-qubit gate.
    pub fn matrix<T: Real>(&self) -> Result<Array2<Complex<T>>> {
        let (o, z, i) = (cone::<T>(), czero::<T>(), c(T::zero(), T::one()));
        let h = creal(T::FRAC_1_SQRT_2());
        let quarter = T::FRAC_PI_4();
        Ok(match self.kind {
            GateKind::H => array![[h, h], [h, -h]],
            GateKind::X => array![[z, o], [o, z]],
            GateKind::Y => array![[z, -i], [i, z]],
            GateKind::Z => array![[o, z], [z, -o]],
            GateKind::S => array![[o, z], [z, i]],
            GateKind::Sdg => array![[o, z], [z, -i]],
            GateKind::T => array![[o, z], [z, cis(quarter)]],
            GateKind::Tdg => array![[o, z], [z, cis(-quarter)]],
            GateKind::P => {
                let a = self.angle.ok_or_else(|| Error::Circuit("phase gate without an angle".into()))?;
                array![[o, z], [z, cis(lit::<T>(a))]]
            }
            GateKind::CNOT | GateKind::CZ => {
                return Err(Error::Circuit(format!("{:?} is a two-qubit gate", self.kind)))
            }
        })
    }
}

/// Ordered gate list over named qubits; measurement happens at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitCircuit {
    pub qubits: Vec<Mode>,
    pub gates: Vec<Gate>,
}

impl QubitCircuit {
    pub fn new(qubits: Vec<Mode>) -> Self {
        Self { qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn extend(&mut self, other: &QubitCircuit) -> &mut Self {
        self.gates.extend_from_slice(&other.gates);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(Error::DuplicateMode(*q));
            }
        }
        for g in &self.gates {
            if !self.qubits.contains(&g.target) {
                return Err(Error::Circuit(format!("gate {:?} targets unknown qubit {}", g.kind, g.target)));
            }
            match (g.is_two_qubit(), g.control) {
                (true, Some(ctl)) if ctl == g.target => {
                    return Err(Error::Circuit(format!("{:?} with control equal to target", g.kind)))
                }
                (true, Some(ctl)) if !self.qubits.contains(&ctl) => {
                    return Err(Error::Circuit(format!("control qubit {ctl} is not in the circuit")))
                }
                (true, None) => return Err(Error::Circuit(format!("{:?} needs a control qubit", g.kind))),
                (false, Some(_)) => return Err(Error::Circuit(format!("{:?} takes no control qubit", g.kind))),
                _ => {}
            }
            if g.kind == GateKind::P && g.angle.is_none() {
                return Err(Error::Circuit("phase gate without an angle".into()));
            }
        }
        Ok(())
    }

    /// `|0…0⟩` over the circuit's qubits.
    pub fn initial_state<T: Real>(&self) -> Result<MultiModeState<T>> {
        let n = self.qubits.len();
        MultiModeState::basis(self.qubits.clone(), vec![2; n], &vec![0; n])
    }
}

/// Applies one gate; the state must hold every qubit the gate touches as a
/// two-level mode.
pub fn apply_gate<T: Real>(state: &MultiModeState<T>, gate: &Gate) -> Result<MultiModeState<T>> {
    if state.dim_of(gate.target)? != 2 {
        return Err(Error::DimensionMismatch(format!("qubit {} is not two-level", gate.target)));
    }
    match gate.kind {
        GateKind::CNOT | GateKind::CZ => {
            let ctl = gate.control.ok_or_else(|| Error::Circuit("two-qubit gate without control".into()))?;
            if state.dim_of(ctl)? != 2 {
                return Err(Error::DimensionMismatch(format!("qubit {ctl} is not two-level")));
            }
            let cnot = gate.kind == GateKind::CNOT;
            state.transform_pair(ctl, gate.target, |input, out| {
                for cbit in 0..2 {
                    for tbit in 0..2 {
                        let src = cbit * 2 + tbit;
                        let v = input[src];
                        if cnot {
                            out[cbit * 2 + (tbit ^ cbit)] = v;
                        } else if cbit == 1 && tbit == 1 {
                            out[src] = -v;
                        } else {
                            out[src] = v;
                        }
                    }
                }
                Ok(())
            })
        }
        _ => state.apply_mode_operator(&ModeOperator::custom(gate.matrix()?)?, gate.target),
    }
}

/// Final statevector starting from `|0…0⟩`.
pub fn simulate_statevector<T: Real>(circuit: &QubitCircuit) -> Result<MultiModeState<T>> {
    Ok(simulate_steps(circuit)?.pop().expect("at least the initial state"))
}

/// Initial state followed by the state after every gate.
pub fn simulate_steps<T: Real>(circuit: &QubitCircuit) -> Result<Vec<MultiModeState<T>>> {
    circuit.validate()?;
    let mut states = vec![circuit.initial_state()?];
    for g in &circuit.gates {
        let next = apply_gate(states.last().expect("non-empty"), g)?;
        states.push(next);
    }
    Ok(states)
}

/// `H(C), Z(C), CNOT(C→B), X(B), H(B), CNOT(C→D), H(D), Z(B)` on `|000⟩_BCD`.
pub fn build_channel_circuit() -> QubitCircuit {
    use GateKind::*;
    let mut c = QubitCircuit::new(vec![Mode::B, Mode::C, Mode::D]);
    c.push(Gate::single(H, Mode::C))
        .push(Gate::single(Z, Mode::C))
        .push(Gate::cnot(Mode::C, Mode::B))
        .push(Gate::single(X, Mode::B))
        .push(Gate::single(H, Mode::B))
        .push(Gate::cnot(Mode::C, Mode::D))
        .push(Gate::single(H, Mode::D))
        .push(Gate::single(Z, Mode::B));
    c
}

/// Phase gates realizing `diag(1, e^{iφ})`: S/T combinations for multiples
/// of π/4, otherwise a single `P(φ)`.
pub fn phase_gates(target: Mode, phi: f64) -> Vec<Gate> {
    use GateKind::*;
    let k = phi / std::f64::consts::FRAC_PI_4;
    let kr = k.round();
    if (k - kr).abs() > 1e-12 {
        return vec![Gate::phase(target, phi)];
    }
    let kinds: &[GateKind] = match (kr as i64).rem_euclid(8) {
        0 => &[],
        1 => &[T],
        2 => &[S],
        3 => &[S, T],
        4 => &[Z],
        5 => &[Sdg, Tdg],
        6 => &[Sdg],
        _ => &[Tdg],
    };
    kinds.iter().map(|&k| Gate::single(k, target)).collect()
}

/// `H(A)` followed by the phase gates for `φ`.
pub fn build_target_circuit(phi: f64) -> QubitCircuit {
    let mut c = QubitCircuit::new(vec![Mode::A]);
    c.push(Gate::single(GateKind::H, Mode::A));
    for g in phase_gates(Mode::A, phi) {
        c.push(g);
    }
    c
}

/// The gates applied after target and channel preparation, split into the
/// named blocks of the construction.
fn readout_blocks(theta_b: f64, theta_c: f64, theta_d: f64) -> [Vec<Gate>; 4] {
    [
        vec![Gate::phase(Mode::B, theta_b), Gate::phase(Mode::C, theta_c), Gate::phase(Mode::D, theta_d)],
        vec![Gate::cnot(Mode::A, Mode::B), Gate::single(GateKind::H, Mode::A)],
        // beam-splitter block: folds Alice's two readout bits into qubit A
        vec![Gate::cnot(Mode::B, Mode::A)],
        // deferred Charlie/Alice-controlled phase flip on Bob's qubit
        vec![Gate::cz(Mode::A, Mode::C), Gate::cz(Mode::D, Mode::C)],
    ]
}

/// Full four-qubit circuit over `(A, B, C, D)`.
pub fn build_full_cqt_circuit(phi: f64, theta_b: f64, theta_c: f64, theta_d: f64) -> QubitCircuit {
    let mut c = QubitCircuit::new(vec![Mode::A, Mode::B, Mode::C, Mode::D]);
    c.extend(&build_target_circuit(phi));
    c.extend(&build_channel_circuit());
    for block in readout_blocks(theta_b, theta_c, theta_d) {
        for g in block {
            c.push(g);
        }
    }
    c
}

/// The same circuit without the final (deferred-measurement) block.
pub fn build_pre_measurement_circuit(phi: f64, theta_b: f64, theta_c: f64, theta_d: f64) -> QubitCircuit {
    let mut c = build_full_cqt_circuit(phi, theta_b, theta_c, theta_d);
    let n = c.gates.len();
    c.gates.truncate(n - 2);
    c
}

/// Sampled measurement counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    /// Bitstring (in qubit order) → count.
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotRecord {
    /// Fraction of shots in which `qubit` (position in the bitstring) read `bit`.
    pub fn marginal(&self, position: usize, bit: char) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(k, _)| k.chars().nth(position) == Some(bit))
            .map(|(_, v)| *v)
            .sum();
        hits as f64 / self.shots as f64
    }
}

fn bitstring(index: usize, width: usize) -> String {
    (0..width).map(|k| if (index >> (width - 1 - k)) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Draws an index from `probs` (cumulative inversion).
fn draw(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cumulative.last().expect("non-empty");
    let u: f64 = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulative(probs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Samples terminal measurements of all qubits from the exact distribution.
pub fn sample_shots(circuit: &QubitCircuit, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let state = simulate_statevector::<f64>(circuit)?;
    let cum = cumulative(state.amplitudes().iter().map(|a| a.norm_sqr()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = circuit.qubits.len();
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(bitstring(draw(&cum, &mut rng), width)).or_insert(0) += 1;
    }
    Ok(ShotRecord { counts, shots, seed })
}

/// The eight benchmark phases `0, π/4, …, 7π/4`.
pub fn table3_phis() -> Vec<f64> {
    (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect()
}

/// Resource phases used for input phase `φ`: `θ_B = θ_C = φ − π/2`, `θ_D = 0`.
pub fn table3_thetas(phi: f64) -> (f64, f64, f64) {
    let t = phi - std::f64::consts::FRAC_PI_2;
    (t, t, 0.0)
}

/// One row of the circuit experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table3Row {
    pub phi: f64,
    pub theta: f64,
    /// Exact `[P(0), P(1)]` of qubit C.
    pub exact: [f64; 2],
    /// Sampled `[P(0), P(1)]` of qubit C.
    pub sampled: [f64; 2],
    /// Reduced density matrix of qubit C, `[[re, im]; 4]` row-major.
    pub rho_c: [[f64; 2]; 4],
    /// `arg ρ_C[1][0]`
    pub coherence_phase: f64,
    pub shots: u64,
    pub seed: u64,
}

/// Reduced density matrix of qubit `C` at the end of the full circuit.
pub fn circuit_rho_c(phi: f64, theta_b: f64, theta_c: f64, theta_d: f64) -> Result<DensityOperator<f64>> {
    simulate_statevector::<f64>(&build_full_cqt_circuit(phi, theta_b, theta_c, theta_d))?.partial_trace(&[Mode::C])
}

/// Runs the full circuit for each `φ`; row `k` is sampled with seed `seed + k`.
pub fn table3_experiment(phis: &[f64], shots: u64, seed: u64) -> Result<Vec<Table3Row>> {
    phis.iter()
        .enumerate()
        .map(|(k, &phi)| {
            let (tb, tc, td) = table3_thetas(phi);
            let circuit = build_full_cqt_circuit(phi, tb, tc, td);
            let state = simulate_statevector::<f64>(&circuit)?;
            let exact = state.marginal(Mode::C)?;
            let row_seed = seed.wrapping_add(k as u64);
            let rec = sample_shots(&circuit, shots, row_seed)?;
            let pos = circuit.qubits.iter().position(|&q| q == Mode::C).expect("C in circuit");
            let rho = state.partial_trace(&[Mode::C])?;
            let m = rho.matrix();
            Ok(Table3Row {
                phi,
                theta: tb,
                exact: [exact[0], exact[1]],
                sampled: [rec.marginal(pos, '0'), rec.marginal(pos, '1')],
                rho_c: [
                    [m[[0, 0]].re, m[[0, 0]].im],
                    [m[[0, 1]].re, m[[0, 1]].im],
                    [m[[1, 0]].re, m[[1, 0]].im],
                    [m[[1, 1]].re, m[[1, 1]].im],
                ],
                coherence_phase: m[[1, 0]].arg(),
                shots,
                seed: row_seed,
            })
        })
        .collect()
}

/// Mid-circuit reading of the same protocol: measure `A`, `B`, `D` after
/// the beam-splitter block, apply `Z^{a⊕d}` to `C`, then measure `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidCircuitResult {
    /// Ensemble density matrix of the corrected qubit `C`.
    pub rho_c: DensityOperator<f64>,
    /// Sampled `[P(0), P(1)]` of qubit C.
    pub sampled: [f64; 2],
    pub shots: u64,
    pub seed: u64,
}

pub fn mid_circuit_measurement(phi: f64, theta_b: f64, theta_c: f64, theta_d: f64, shots: u64, seed: u64) -> Result<MidCircuitResult> {
    use crate::measurement::project_pattern;
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let pre = simulate_statevector::<f64>(&build_pre_measurement_circuit(phi, theta_b, theta_c, theta_d))?;
    let z = Gate::single(GateKind::Z, Mode::C);
    let mut branch_p = Vec::with_capacity(8);
    let mut branch_c = Vec::with_capacity(8);
    let mut rho = Array2::from_elem((2, 2), czero::<f64>());
    for idx in 0..8usize {
        let (a, b, d) = ((idx >> 2) & 1, (idx >> 1) & 1, idx & 1);
        let r = project_pattern(&pre, &[(Mode::A, a), (Mode::B, b), (Mode::D, d)])?;
        branch_p.push(r.probability);
        let Some(cs) = r.state else {
            branch_c.push([0.5, 0.5]);
            continue;
        };
        let corrected = if a ^ d == 1 { apply_gate(&cs, &z)? } else { cs };
        let amp = corrected.amplitudes();
        for i in 0..2 {
            for j in 0..2 {
                rho[[i, j]] += amp[i] * amp[j].conj() * r.probability;
            }
        }
        branch_c.push([amp[0].norm_sqr(), amp[1].norm_sqr()]);
    }
    let outer = cumulative(branch_p.iter().copied());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ones = 0u64;
    for _ in 0..shots {
        let k = draw(&outer, &mut rng);
        if rng.random::<f64>() >= branch_c[k][0] {
            ones += 1;
        }
    }
    let p1 = ones as f64 / shots as f64;
    Ok(MidCircuitResult {
        rho_c: DensityOperator::from_parts(vec![Mode::C], vec![2], rho)?,
        sampled: [1.0 - p1, p1],
        shots,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner;
    use crate::hybrid::{build_resource, build_target, Encoding, ResourceSpec, TargetSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    #[test]
    fn hadamard_and_t() {
        let s = MultiModeState::<f64>::basis(vec![Mode::A], vec![2], &[0]).unwrap();
        let h = apply_gate(&s, &Gate::single(GateKind::H, Mode::A)).unwrap();
        assert_abs_diff_eq!(h.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let one = MultiModeState::<f64>::basis(vec![Mode::A], vec![2], &[1]).unwrap();
        let t = apply_gate(&one, &Gate::phase(Mode::A, FRAC_PI_4)).unwrap();
        let tt = apply_gate(&one, &Gate::single(GateKind::T, Mode::A)).unwrap();
        assert_abs_diff_eq!((t.amplitudes()[1] - cis(FRAC_PI_4)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(t, tt);
    }

    #[test]
    fn cz_is_symmetric() {
        let s = MultiModeState::<f64>::new(
            vec![Mode::A, Mode::B],
            vec![2, 2],
            vec![creal(0.5), creal(0.5), creal(0.5), Complex::new(0.0, 0.5)],
        )
        .unwrap();
        let a = apply_gate(&s, &Gate::cz(Mode::A, Mode::B)).unwrap();
        let b = apply_gate(&s, &Gate::cz(Mode::B, Mode::A)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gates_are_unitary() {
        use GateKind::*;
        for k in [H, X, Y, Z, S, Sdg, T, Tdg] {
            let m = Gate::single(k, Mode::A).matrix::<f64>().unwrap();
            let p = m.t().mapv(|z| z.conj()).dot(&m);
            for i in 0..2 {
                for j in 0..2 {
                    assert_abs_diff_eq!((p[[i, j]] - creal(if i == j { 1.0 } else { 0.0 })).norm(), 0.0, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn channel_matches_resource() {
        let s = simulate_statevector::<f64>(&build_channel_circuit()).unwrap();
        let r = build_resource(&ResourceSpec::new(1.0, Encoding::Qubit, 1)).unwrap();
        assert_abs_diff_eq!(inner(&s, &r).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn target_circuit_matches_phase_target() {
        for k in -8..=8 {
            let phi = k as f64 * FRAC_PI_4 + if k == 3 { 0.1 } else { 0.0 };
            let s = simulate_statevector::<f64>(&build_target_circuit(phi)).unwrap();
            let t = build_target(&TargetSpec::phase(phi, 1.0, Encoding::Qubit, 1)).unwrap();
            assert_abs_diff_eq!(inner(&s, &t).unwrap().re, 1.0, epsilon = 1e-12);
        }
        assert_eq!(build_target_circuit(FRAC_PI_4).gates.len(), 2);
        assert_eq!(build_target_circuit(FRAC_PI_4).gates[1].kind, GateKind::T);
    }

    #[test]
    fn full_circuit_c_marginal_is_balanced() {
        for phi in table3_phis() {
            let (tb, tc, td) = table3_thetas(phi);
            let s = simulate_statevector::<f64>(&build_full_cqt_circuit(phi, tb, tc, td)).unwrap();
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
            let m = s.marginal(Mode::C).unwrap();
            assert_abs_diff_eq!(m[0], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = build_full_cqt_circuit(0.0, -PI / 2.0, -PI / 2.0, 0.0);
        let a = sample_shots(&c, 500, 11).unwrap();
        assert_eq!(a, sample_shots(&c, 500, 11).unwrap());
        assert_eq!(a.counts.values().sum::<u64>(), 500);
        let one = sample_shots(&c, 1, 3).unwrap();
        assert_eq!(one.counts.len(), 1);
        assert!(sample_shots(&c, 0, 3).is_err());
    }

    #[test]
    fn invalid_circuits_are_rejected() {
        let mut c = QubitCircuit::new(vec![Mode::A]);
        c.push(Gate::cnot(Mode::B, Mode::A));
        assert!(c.validate().is_err());
        let mut c = QubitCircuit::new(vec![Mode::A]);
        c.push(Gate { kind: GateKind::P, target: Mode::A, control: None, angle: None });
        assert!(simulate_statevector::<f64>(&c).is_err());
    }

    #[test]
    fn json_shape() {
        let g = Gate::cnot(Mode::A, Mode::B);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"kind":"CNOT","target":"B","control":"A"}"#);
        let c = build_full_cqt_circuit(0.3, 0.1, 0.2, 0.0);
        let back: QubitCircuit = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn coherence_phase_tracks_input() {
        let rows = table3_experiment(&table3_phis(), 4000, 5).unwrap();
        for r in &rows {
            let off = (r.rho_c[2][0].powi(2) + r.rho_c[2][1].powi(2)).sqrt();
            assert_abs_diff_eq!(off, 0.5 * r.phi.sin().powi(2), epsilon = 1e-12);
            if off < 1e-9 {
                continue;
            }
            let d = (r.coherence_phase - r.phi).rem_euclid(2.0 * PI);
            assert!(d < 1e-9 || 2.0 * PI - d < 1e-9, "phi {} arg {}", r.phi, r.coherence_phase);
            assert!((r.sampled[0] - 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn mid_circuit_ensemble_equals_deferred() {
        for (phi, tb, tc, td) in [(0.3, 0.1, -0.4, 0.7), (1.2, -0.37, -0.37, 0.0), (2.0, 0.9, 0.2, -1.1)] {
            let deferred = circuit_rho_c(phi, tb, tc, td).unwrap();
            let mid = mid_circuit_measurement(phi, tb, tc, td, 2000, 9).unwrap();
            let diff = (deferred.matrix() - mid.rho_c.matrix()).mapv(|z| z.norm());
            assert!(diff.iter().all(|&x| x < 1e-12), "{diff:?}");
            let c = build_full_cqt_circuit(phi, tb, tc, td);
            let rec = sample_shots(&c, 8192, 9).unwrap();
            let mid = mid_circuit_measurement(phi, tb, tc, td, 8192, 10).unwrap();
            let p = deferred.matrix()[[0, 0]].re;
            let sigma = (p * (1.0 - p) / 8192.0).sqrt();
            let tv = (rec.marginal(2, '0') - mid.sampled[0]).abs();
            assert!(tv <= 3.0 * sigma * 2f64.sqrt(), "tv {tv} sigma {sigma}");
        }
    }

    /// Intermediate states of the channel preparation, in `|BCD⟩` order.
    pub(crate) fn channel_reference() -> Vec<[f64; 8]> {
        let h = FRAC_1_SQRT_2;
        let q = 0.5 * FRAC_1_SQRT_2;
        vec![
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [h, 0.0, h, 0.0, 0.0, 0.0, 0.0, 0.0],
            [h, 0.0, -h, 0.0, 0.0, 0.0, 0.0, 0.0],
            [h, 0.0, 0.0, 0.0, 0.0, 0.0, -h, 0.0],
            [0.0, 0.0, -h, 0.0, h, 0.0, 0.0, 0.0],
            [0.5, 0.0, -0.5, 0.0, -0.5, 0.0, -0.5, 0.0],
            [0.5, 0.0, 0.0, -0.5, -0.5, 0.0, 0.0, -0.5],
            [q, q, -q, q, -q, -q, -q, q],
            [q, q, -q, q, q, q, q, -q],
        ]
    }

    #[test]
    fn channel_intermediate_states() {
        let steps = simulate_steps::<f64>(&build_channel_circuit()).unwrap();
        let reference = channel_reference();
        assert_eq!(steps.len(), reference.len());
        for (k, (s, r)) in steps.iter().zip(&reference).enumerate() {
            for (a, b) in s.amplitudes().iter().zip(r) {
                assert!((a - creal(*b)).norm() < 1e-12, "step {k}: {:?}", s.amplitudes());
            }
        }
    }
}
