//! Dense state-vector simulation.
//!
//! Amplitude index bit `k` is qubit `k`. Gates are applied in place by
//! striding over amplitude pairs; large states split the sweep across the
//! current rayon pool. Each amplitude pair is updated independently of the
//! others, so results do not depend on the thread count.

use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, Operation, Polarity, UnitaryOp};
use crate::distribution::{bitstring_lsb_first, OutcomeDistribution};
use crate::gates::{single_qubit_matrix, Mat2};
use crate::matrix::{C64, ONE, ZERO};

/// Largest register the dense kernel will allocate.
pub const MAX_QUBITS: usize = 30;

/// States at least this large are updated in parallel.
const PARALLEL_MIN_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub norm_tolerance: f64,
    /// Outcomes with probability at or below this are treated as impossible.
    pub zero_prob_threshold: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { norm_tolerance: 1e-10, zero_prob_threshold: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: u64, num_qubits: usize },
    #[error("{0} qubits exceed the state-vector limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("zero-probability projection: qubit {qubit} onto |{}⟩ has probability {probability:e}", u8::from(*outcome))]
    ZeroProbabilityProjection { qubit: usize, outcome: bool, probability: f64 },
    #[error("not static: {0}")]
    NotStatic(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn init_basis(num_qubits: usize, index: u64) -> Result<Self, SimError> {
        if num_qubits > MAX_QUBITS {
            return Err(SimError::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim as u64 {
            return Err(SimError::IndexOutOfRange { index, num_qubits });
        }
        let mut amps = vec![ZERO; dim];
        amps[index as usize] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Applies a (controlled) gate in place.
    pub fn apply(&mut self, op: &UnitaryOp) {
        apply_unitary(&mut self.amps, op);
        debug_assert!(
            (self.norm() - 1.0).abs() <= SimConfig::default().norm_tolerance,
            "norm drifted to {} after {op:?}",
            self.norm()
        );
    }

    /// Probability that measuring `qubit` yields 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        p.clamp(0.0, 1.0)
    }

    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        p.clamp(0.0, 1.0)
    }

    /// Collapses `qubit` onto `outcome` and renormalizes. Returns the
    /// probability of that outcome before the collapse.
    pub fn project(&mut self, qubit: usize, outcome: bool, cfg: &SimConfig) -> Result<f64, SimError> {
        let p = if outcome { self.prob_one(qubit) } else { self.prob_zero(qubit) };
        if p <= cfg.zero_prob_threshold {
            return Err(SimError::ZeroProbabilityProjection { qubit, outcome, probability: p });
        }
        self.collapse(qubit, outcome, p);
        Ok(p)
    }

    /// Projection with a known outcome probability `p > 0`.
    pub(crate) fn collapse(&mut self, qubit: usize, outcome: bool, p: f64) {
        let bit = 1usize << qubit;
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        debug_assert!((self.norm() - 1.0).abs() <= SimConfig::default().norm_tolerance);
    }
}

/// Control bits as `(mask, required value)`.
fn control_pattern(op: &UnitaryOp) -> (usize, usize) {
    op.controls.iter().fold((0, 0), |(mask, value), c| {
        let bit = 1usize << c.qubit.0;
        match c.polarity {
            Polarity::Positive => (mask | bit, value | bit),
            Polarity::Negative => (mask | bit, value),
        }
    })
}

/// Applies `op` to a raw amplitude vector of length `2^n`. Does not require
/// the vector to be normalized.
pub fn apply_unitary(amps: &mut [C64], op: &UnitaryOp) {
    let (mask, value) = control_pattern(op);
    match single_qubit_matrix(&op.gate) {
        Some(m) => apply_single(amps, op.targets[0].0, &m, mask, value),
        None => apply_swap(amps, op.targets[0].0, op.targets[1].0, mask, value),
    }
}

fn apply_single(amps: &mut [C64], target: usize, m: &Mat2, mask: usize, value: usize) {
    let stride = 1usize << target;
    let block = stride << 1;
    let kernel = |base: usize, chunk: &mut [C64]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (off, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if (base + off) & mask != value {
                continue;
            }
            let (x, y) = (*a0, *a1);
            *a0 = m[0] * x + m[1] * y;
            *a1 = m[2] * x + m[3] * y;
        }
    };
    if amps.len() >= 1 << PARALLEL_MIN_QUBITS && amps.len() / block >= 2 {
        amps.par_chunks_mut(block).enumerate().for_each(|(k, chunk)| kernel(k * block, chunk));
    } else {
        amps.chunks_mut(block).enumerate().for_each(|(k, chunk)| kernel(k * block, chunk));
    }
}

fn apply_swap(amps: &mut [C64], a: usize, b: usize, mask: usize, value: usize) {
    let (bit_a, bit_b) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        // visit each pair once from the |..1_a..0_b..⟩ side
        if i & bit_a != 0 && i & bit_b == 0 && i & mask == value {
            amps.swap(i, i ^ bit_a ^ bit_b);
        }
    }
}

/// Simulates a circuit whose measurements all sit at the end of their wires
/// and returns the joint distribution of the output bits for the basis input.
pub fn outcome_distribution_static(
    g: &Circuit,
    input: u64,
    cfg: &SimConfig,
) -> Result<OutcomeDistribution, SimError> {
    if let Some(e) = g.validate().into_iter().next() {
        return Err(SimError::InvalidCircuit(e.to_string()));
    }
    if g.is_dynamic() {
        return Err(SimError::NotStatic(
            "circuit has resets, classical controls, or mid-circuit measurements".into(),
        ));
    }
    let state = simulate_unitaries(g, input)?;

    let mut measured_by = vec![None; g.num_clbits];
    for op in &g.ops {
        if let Operation::Measure { qubit, clbit } = op {
            measured_by[clbit.0] = Some(qubit.0);
        }
    }
    let out_qubits: Vec<usize> = g
        .output_order()
        .iter()
        .map(|c| measured_by[c.0].expect("validated output order"))
        .collect();

    let mut probs = std::collections::HashMap::<u64, f64>::new();
    if out_qubits.len() <= 64 {
        for (i, a) in state.amplitudes().iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = out_qubits
                .iter()
                .enumerate()
                .fold(0u64, |k, (pos, &q)| k | ((((i >> q) & 1) as u64) << pos));
            *probs.entry(key).or_insert(0.0) += p;
        }
    }
    let mut keys: Vec<u64> = probs.keys().copied().collect();
    keys.sort_unstable();
    let mut dist = OutcomeDistribution::new(out_qubits.len());
    for key in keys {
        let p = probs[&key];
        if p <= cfg.zero_prob_threshold {
            dist.pruned_mass += p;
            continue;
        }
        let bits: Vec<bool> = (0..out_qubits.len()).map(|k| (key >> k) & 1 == 1).collect();
        dist.add(bitstring_lsb_first(&bits), p);
    }
    Ok(dist)
}

/// Final state after applying every unitary of `g` (measurements skipped) to `|input⟩`.
pub fn simulate_unitaries(g: &Circuit, input: u64) -> Result<StateVector, SimError> {
    let mut state = StateVector::init_basis(g.num_qubits, input)?;
    for op in &g.ops {
        match op {
            Operation::Unitary(u) => state.apply(u),
            Operation::Measure { .. } => {}
            _ => return Err(SimError::NotStatic("non-unitary operation".into())),
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use crate::circuit::{Control, GateKind};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let mut amps: Vec<C64> = (0..1 << n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector { num_qubits: n, amps }
    }

    #[test]
    fn basis_states() {
        let s = StateVector::init_basis(4, 0b0001).unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
        assert_eq!(s.amplitudes().iter().filter(|a| **a != ZERO).count(), 1);
        assert_eq!(StateVector::init_basis(1, 0).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(StateVector::init_basis(10, 37).unwrap().norm(), 1.0);
        assert!(matches!(StateVector::init_basis(2, 4), Err(SimError::IndexOutOfRange { .. })));
        assert!(matches!(StateVector::init_basis(40, 0), Err(SimError::TooManyQubits(40))));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::init_basis(1, 0).unwrap();
        s.apply(&UnitaryOp::new(GateKind::H, &[0]));
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(s.amplitudes(), &[h, h], 1e-15));
        s.apply(&UnitaryOp::new(GateKind::H, &[0]));
        assert!(close(s.amplitudes(), &[ONE, ZERO], 1e-12));
    }

    #[test]
    fn controlled_phase_on_eleven() {
        let mut s = StateVector::init_basis(2, 0b11).unwrap();
        s.apply(&UnitaryOp::controlled(GateKind::P(Angle::pi_frac(3, 8)), &[Control::pos(1)], &[0]));
        let expected = C64::from_polar(1.0, 2.0 * PI * 3.0 / 16.0);
        assert!((s.amplitudes()[3] - expected).norm() < 1e-15);
        assert_eq!(s.amplitudes()[0], ZERO);
    }

    #[test]
    fn negative_controls_fire_on_zero() {
        let mut s = StateVector::init_basis(2, 0).unwrap();
        s.apply(&UnitaryOp::controlled(GateKind::X, &[Control::neg(1)], &[0]));
        assert_eq!(s.amplitudes()[1], ONE);
        s.apply(&UnitaryOp::controlled(GateKind::X, &[Control::pos(1)], &[0]));
        assert_eq!(s.amplitudes()[1], ONE);
    }

    #[test]
    fn swap_exchanges_qubits() {
        let mut s = StateVector::init_basis(3, 0b001).unwrap();
        s.apply(&UnitaryOp::new(GateKind::Swap, &[0, 2]));
        assert_eq!(s.amplitudes()[0b100], ONE);
        s.apply(&UnitaryOp::controlled(GateKind::Swap, &[Control::pos(1)], &[0, 2]));
        assert_eq!(s.amplitudes()[0b100], ONE);
    }

    #[test]
    fn probabilities_and_projection() {
        let mut s = StateVector::init_basis(1, 0).unwrap();
        s.apply(&UnitaryOp::new(GateKind::H, &[0]));
        assert!((s.prob_zero(0) - 0.5).abs() < 1e-15);
        assert_eq!(StateVector::init_basis(1, 1).unwrap().prob_zero(0), 0.0);

        let cfg = SimConfig::default();
        let mut one = s.clone();
        let p = one.project(0, true, &cfg).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(close(one.amplitudes(), &[ZERO, ONE], 1e-15));
        assert_eq!(one.prob_zero(0), 0.0);

        let mut zero = s.clone();
        zero.project(0, false, &cfg).unwrap();
        assert_eq!(zero.prob_zero(0), 1.0);

        let mut basis = StateVector::init_basis(1, 0).unwrap();
        assert!(matches!(
            basis.project(0, true, &cfg),
            Err(SimError::ZeroProbabilityProjection { qubit: 0, outcome: true, .. })
        ));
    }

    #[test]
    fn large_states_match_sequential_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_state(PARALLEL_MIN_QUBITS + 1, &mut rng);
        for t in [0, 5, PARALLEL_MIN_QUBITS] {
            let op = UnitaryOp::controlled(
                GateKind::U(Angle::Radians(0.4), Angle::Radians(1.1), Angle::Radians(-0.3)),
                &[Control::pos((t + 1) % (PARALLEL_MIN_QUBITS + 1))],
                &[t],
            );
            let mut par = s.clone();
            par.apply(&op);
            let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            let mut seq = s.clone();
            one_thread.install(|| seq.apply(&op));
            assert_eq!(par.amplitudes(), seq.amplitudes(), "bitwise-identical across thread counts");
        }
    }

    #[test]
    fn static_distribution_of_hadamard() {
        let mut g = Circuit::new(1, 1);
        g.h(0).measure(0, 0);
        let d = outcome_distribution_static(&g, 0, &SimConfig::default()).unwrap();
        assert!((d.get("0") - 0.5).abs() < 1e-15);
        assert!((d.get("1") - 0.5).abs() < 1e-15);
        assert_eq!(d.entries.len(), 2);
    }

    #[test]
    fn static_distribution_rejects_dynamic_circuits() {
        let mut g = Circuit::new(1, 1);
        g.measure(0, 0).h(0);
        assert!(matches!(
            outcome_distribution_static(&g, 0, &SimConfig::default()),
            Err(SimError::NotStatic(_))
        ));
    }

    #[test]
    fn no_measurements_gives_empty_bitstring() {
        let mut g = Circuit::new(1, 0);
        g.h(0);
        let d = outcome_distribution_static(&g, 0, &SimConfig::default()).unwrap();
        assert_eq!(d.entries.len(), 1);
        assert!((d.get("") - 1.0).abs() < 1e-15);
    }

    fn gate_strategy() -> impl Strategy<Value = GateKind> {
        let angle = (-7.0f64..7.0).prop_map(Angle::Radians);
        prop_oneof![
            Just(GateKind::X),
            Just(GateKind::Y),
            Just(GateKind::Z),
            Just(GateKind::H),
            Just(GateKind::S),
            Just(GateKind::Sdg),
            Just(GateKind::T),
            Just(GateKind::Tdg),
            Just(GateKind::SX),
            Just(GateKind::Swap),
            angle.clone().prop_map(GateKind::P),
            angle.clone().prop_map(GateKind::RX),
            angle.clone().prop_map(GateKind::RY),
            angle.clone().prop_map(GateKind::RZ),
            (angle.clone(), angle.clone(), angle).prop_map(|(a, b, c)| GateKind::U(a, b, c)),
        ]
    }

    fn op_strategy(n: usize) -> impl Strategy<Value = UnitaryOp> {
        (gate_strategy(), any::<u64>()).prop_map(move |(gate, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut qs: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                qs.swap(i, rng.gen_range(0..=i));
            }
            let k = gate.arity();
            let ncontrols = rng.gen_range(0..=(n - k).min(2));
            let controls: Vec<Control> = qs[k..k + ncontrols]
                .iter()
                .map(|&q| if rng.gen_bool(0.5) { Control::pos(q) } else { Control::neg(q) })
                .collect();
            UnitaryOp::controlled(gate, &controls, &qs[..k])
        })
    }

    proptest! {
        #[test]
        fn apply_preserves_norm_and_inverts(op in op_strategy(4), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(4, &mut rng);
            let mut t = s.clone();
            t.apply(&op);
            prop_assert!((t.norm() - 1.0).abs() <= 1e-10);
            for inv in op.inverse() {
                t.apply(&inv);
            }
            prop_assert!(close(t.amplitudes(), s.amplitudes(), 1e-10));
            for q in 0..4 {
                prop_assert!((s.prob_zero(q) + s.prob_one(q) - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn apply_is_linear(op in op_strategy(3), seed in any::<u64>(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_state(3, &mut rng).into_amplitudes();
            let b = random_state(3, &mut rng).into_amplitudes();
            let (ca, cb) = (C64::new(alpha, 0.5), C64::new(beta, -0.25));
            let mut combo: Vec<C64> = a.iter().zip(&b).map(|(x, y)| ca * x + cb * y).collect();
            apply_unitary(&mut combo, &op);
            let (mut a2, mut b2) = (a.clone(), b.clone());
            apply_unitary(&mut a2, &op);
            apply_unitary(&mut b2, &op);
            let expected: Vec<C64> = a2.iter().zip(&b2).map(|(x, y)| ca * x + cb * y).collect();
            prop_assert!(close(&combo, &expected, 1e-12));
        }
    }
}
