//! Functional equivalence (system-matrix comparison up to global phase) and
//! fixed-input distribution equivalence.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::circuit::{Circuit, Operation};
use crate::distribution::{bitstring_of, OutcomeDistribution};
use crate::extract::{extract, ExtractConfig, ExtractError};
use crate::matrix::{Matrix, C64};
use crate::reconstruct::{reconstruct_unitary, ReconstructError};
use crate::sim::{outcome_distribution_static, simulate_unitaries, SimError};
use crate::workers::Workers;

pub const DEFAULT_DENSE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Max-norm tolerance for unitary comparison.
    pub tolerance: f64,
    /// Total-variation tolerance for distribution comparison.
    pub tvd_tolerance: f64,
    /// Qubit `q` of the first circuit corresponds to qubit `perm[q]` of the second.
    pub input_permutation: Option<Vec<usize>>,
    /// Output correspondence. In full mode a qubit permutation defaulting to
    /// the input permutation; in distribution mode an output-bit permutation
    /// defaulting to the identity.
    pub output_permutation: Option<Vec<usize>>,
    /// Basis input for distribution mode.
    pub input_state: u64,
    pub dense_cap: usize,
    pub workers: Workers,
    pub extract: ExtractConfig,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            tolerance: 1e-10,
            tvd_tolerance: 1e-9,
            input_permutation: None,
            output_permutation: None,
            input_state: 0,
            dense_cap: DEFAULT_DENSE_CAP,
            workers: Workers::Auto,
            extract: ExtractConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("arity mismatch: {left} vs {right} {what}")]
    ArityMismatch { what: &'static str, left: usize, right: usize },
    #[error("too many qubits for dense unitary: {qubits} > cap {cap} (use distribution mode)")]
    TooManyQubits { qubits: usize, cap: usize },
    #[error("invalid permutation: {0}")]
    BadPermutation(String),
    #[error("circuit is not unitary: {0}")]
    NotUnitary(String),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
    Error,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extract_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate_seconds: Option<f64>,
}

fn serialize_complexes<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| [c.re, c.im]))
}

fn serialize_phase<S: Serializer>(v: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(c) => s.serialize_some(&[c.re, c.im]),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Counterexample {
    /// Worst column of the system matrices.
    #[serde(rename_all = "camelCase")]
    Column {
        input: String,
        #[serde(serialize_with = "serialize_complexes")]
        expected: Vec<C64>,
        /// Column of the second circuit, multiplied by the fixed global phase.
        #[serde(serialize_with = "serialize_complexes")]
        observed: Vec<C64>,
    },
    /// Outcome with the largest probability difference.
    #[serde(rename_all = "camelCase")]
    Distribution {
        input: String,
        bitstring: String,
        expected_probability: f64,
        observed_probability: f64,
        expected: OutcomeDistribution,
        observed: OutcomeDistribution,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceResult {
    pub verdict: Verdict,
    /// Max-norm deviation (full mode) or total variation distance.
    pub max_deviation: f64,
    #[serde(serialize_with = "serialize_phase")]
    pub global_phase: Option<C64>,
    pub counterexample: Option<Counterexample>,
    pub timings: Timings,
}

fn seconds_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn check_permutation(perm: &[usize], n: usize, what: &str) -> Result<(), CheckError> {
    if perm.len() != n {
        return Err(CheckError::BadPermutation(format!("{what} has {} entries, expected {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(CheckError::BadPermutation(format!("{what} {perm:?} is not a bijection of 0..{n}")));
        }
    }
    Ok(())
}

/// Moves bit `q` of `index` to bit `perm[q]`.
fn permute_index(index: u64, perm: &[usize]) -> u64 {
    perm.iter().enumerate().fold(0, |acc, (q, &p)| acc | (((index >> q) & 1) << p))
}

/// Strips trailing measurements from a circuit that is otherwise unitary.
fn unitary_part(g: &Circuit) -> Result<Circuit, CheckError> {
    if g.is_dynamic() {
        return Err(CheckError::NotUnitary("circuit is dynamic; reconstruct it first".into()));
    }
    let stripped = g.without_measurements();
    if let Some(i) = stripped.ops.iter().position(|op| !op.is_unitary()) {
        return Err(CheckError::NotUnitary(format!("op {i} is not unitary")));
    }
    Ok(stripped)
}

fn column(g: &Circuit, input: u64) -> Result<Vec<C64>, CheckError> {
    Ok(simulate_unitaries(g, input)?.into_amplitudes())
}

/// Dense system matrix of a unitary circuit (trailing measurements are
/// ignored). Column `j` is the final state for basis input `j`.
pub fn build_unitary(g: &Circuit, dense_cap: usize) -> Result<Matrix, CheckError> {
    let u = unitary_part(g)?;
    if u.num_qubits > dense_cap {
        return Err(CheckError::TooManyQubits { qubits: u.num_qubits, cap: dense_cap });
    }
    let columns: Result<Vec<Vec<C64>>, CheckError> =
        (0..1u64 << u.num_qubits).into_par_iter().map(|j| column(&u, j)).collect();
    Ok(Matrix::from_columns(columns?))
}

/// Reconstructs a dynamic circuit and strips its measurements; static
/// circuits only lose their measurements.
fn to_unitary(g: &Circuit) -> Result<Circuit, CheckError> {
    if g.is_dynamic() {
        unitary_part(&reconstruct_unitary(g)?.0)
    } else {
        unitary_part(g)
    }
}

/// Qubit correspondence that pairs qubits writing the same clbit, after
/// reconstructing both circuits. Unmeasured qubits are paired in index order.
pub fn align_by_measurements(g: &Circuit, g2: &Circuit) -> Result<Vec<usize>, CheckError> {
    let reconstructed = |c: &Circuit| -> Result<Circuit, CheckError> {
        Ok(if c.is_dynamic() { reconstruct_unitary(c)?.0 } else { c.clone() })
    };
    let (a, b) = (reconstructed(g)?, reconstructed(g2)?);
    if a.num_qubits != b.num_qubits {
        return Err(CheckError::ArityMismatch { what: "qubits", left: a.num_qubits, right: b.num_qubits });
    }
    let writer = |c: &Circuit| {
        let mut w = vec![None; c.num_clbits];
        for op in &c.ops {
            if let Operation::Measure { qubit, clbit } = op {
                w[clbit.0] = Some(qubit.0);
            }
        }
        w
    };
    let (wa, wb) = (writer(&a), writer(&b));
    let n = a.num_qubits;
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (qa, qb) in wa.iter().zip(&wb).filter_map(|(x, y)| x.zip(*y)) {
        if perm[qa] == usize::MAX && !taken[qb] {
            perm[qa] = qb;
            taken[qb] = true;
        }
    }
    let mut free = (0..n).filter(|&q| !taken[q]);
    for p in perm.iter_mut().filter(|p| **p == usize::MAX) {
        *p = free.next().expect("as many free targets as unassigned sources");
    }
    Ok(perm)
}

/// Full functional check: `U = φ·U'` for some unit `φ`, after reconstruction
/// and the configured qubit correspondence.
pub fn check_full(g: &Circuit, g2: &Circuit, cfg: &CheckConfig) -> Result<EquivalenceResult, CheckError> {
    let start = Instant::now();
    let (u1, u2) = (to_unitary(g)?, to_unitary(g2)?);
    let transform_seconds = seconds_since(start);
    let n = u1.num_qubits;
    if n != u2.num_qubits {
        return Err(CheckError::ArityMismatch { what: "qubits", left: n, right: u2.num_qubits });
    }
    if n > cfg.dense_cap {
        return Err(CheckError::TooManyQubits { qubits: n, cap: cfg.dense_cap });
    }
    let identity: Vec<usize> = (0..n).collect();
    let in_perm = cfg.input_permutation.clone().unwrap_or_else(|| identity.clone());
    let out_perm = cfg.output_permutation.clone().unwrap_or_else(|| in_perm.clone());
    check_permutation(&in_perm, n, "input permutation")?;
    check_permutation(&out_perm, n, "output permutation")?;

    let verify_start = Instant::now();
    let observed_column = |j: u64| -> Result<Vec<C64>, CheckError> {
        let raw = column(&u2, permute_index(j, &in_perm))?;
        Ok((0..raw.len() as u64).map(|k| raw[permute_index(k, &out_perm) as usize]).collect())
    };

    let (e0, o0) = (column(&u1, 0)?, observed_column(0)?);
    let pivot = (0..o0.len())
        .max_by(|&a, &b| o0[a].norm().total_cmp(&o0[b].norm()).then(b.cmp(&a)))
        .expect("nonempty column");
    let ratio = e0[pivot] / o0[pivot];
    let phase = if ratio.norm() > 0.0 && ratio.is_finite() { ratio / ratio.norm() } else { C64::new(1.0, 0.0) };

    let deviations: Result<Vec<f64>, CheckError> = cfg.workers.install(|| {
        (0..1u64 << n)
            .into_par_iter()
            .map(|j| {
                let (e, o) = (column(&u1, j)?, observed_column(j)?);
                Ok(e.iter().zip(&o).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max))
            })
            .collect()
    });
    let deviations = deviations?;
    let (worst, max_deviation) = deviations
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (j, d)| if d > best.1 { (j, d) } else { best });
    let equivalent = max_deviation <= cfg.tolerance;
    let counterexample = if equivalent {
        None
    } else {
        let j = worst as u64;
        Some(Counterexample::Column {
            input: bitstring_of(j, n),
            expected: column(&u1, j)?,
            observed: observed_column(j)?.into_iter().map(|b| phase * b).collect(),
        })
    };
    Ok(EquivalenceResult {
        verdict: if equivalent { Verdict::Equivalent } else { Verdict::NotEquivalent },
        max_deviation,
        global_phase: Some(phase),
        counterexample,
        timings: Timings {
            transform_seconds: Some(transform_seconds),
            verify_seconds: Some(seconds_since(verify_start)),
            ..Default::default()
        },
    })
}

/// Outcome distribution for a basis input, via branching extraction for
/// dynamic circuits and a single state-vector run otherwise.
pub fn outcome_distribution(g: &Circuit, input: u64, cfg: &ExtractConfig) -> Result<OutcomeDistribution, CheckError> {
    if g.is_dynamic() {
        Ok(extract(g, input, cfg)?.distribution)
    } else {
        Ok(outcome_distribution_static(g, input, &cfg.sim)?)
    }
}

/// Distribution check for the configured basis input: equivalent iff the
/// total variation distance is within `tvd_tolerance`.
pub fn check_distribution(
    g: &Circuit,
    g2: &Circuit,
    cfg: &CheckConfig,
) -> Result<EquivalenceResult, CheckError> {
    let mut extract_cfg = cfg.extract.clone();
    extract_cfg.workers = cfg.workers;
    let input2 = match &cfg.input_permutation {
        Some(perm) => {
            if g.num_qubits != g2.num_qubits {
                return Err(CheckError::ArityMismatch { what: "qubits", left: g.num_qubits, right: g2.num_qubits });
            }
            check_permutation(perm, g.num_qubits, "input permutation")?;
            permute_index(cfg.input_state, perm)
        }
        None => cfg.input_state,
    };

    let mut timings = Timings::default();
    let timed = |c: &Circuit, input: u64, timings: &mut Timings| -> Result<OutcomeDistribution, CheckError> {
        let t = Instant::now();
        let d = outcome_distribution(c, input, &extract_cfg)?;
        let slot = if c.is_dynamic() { &mut timings.extract_seconds } else { &mut timings.simulate_seconds };
        *slot = Some(slot.unwrap_or(0.0) + seconds_since(t));
        Ok(d)
    };
    let expected = timed(g, cfg.input_state, &mut timings)?;
    let mut observed = timed(g2, input2, &mut timings)?;
    if expected.width != observed.width {
        return Err(CheckError::ArityMismatch { what: "output bits", left: expected.width, right: observed.width });
    }
    if let Some(perm) = &cfg.output_permutation {
        check_permutation(perm, observed.width, "output permutation")?;
        let mut inverse = vec![0; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        observed = observed.permute_bits(&inverse);
    }

    let tvd = expected.tvd(&observed);
    let equivalent = tvd <= cfg.tvd_tolerance;
    let counterexample = if equivalent {
        None
    } else {
        let (key, p, q) = expected.worst_key(&observed).expect("distributions differ");
        Some(Counterexample::Distribution {
            input: bitstring_of(cfg.input_state, g.num_qubits),
            bitstring: key.to_string(),
            expected_probability: p,
            observed_probability: q,
            expected: expected.clone(),
            observed: observed.clone(),
        })
    };
    Ok(EquivalenceResult {
        verdict: if equivalent { Verdict::Equivalent } else { Verdict::NotEquivalent },
        max_deviation: tvd,
        global_phase: None,
        counterexample,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;
    use crate::circuit::{Control, GateKind};
    use crate::matrix::{ONE, ZERO};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn hadamard_matrix() {
        let mut g = Circuit::new(1, 0);
        g.h(0);
        let u = build_unitary(&g, 14).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(u.max_abs_diff(&Matrix::from_rows(2, vec![h, h, h, -h])) < 1e-15);
    }

    #[test]
    fn cnot_matrix_uses_low_bit_control() {
        let mut g = Circuit::new(2, 0);
        g.cx(0, 1);
        let u = build_unitary(&g, 14).unwrap();
        // |01⟩ (index 1, control set) ↦ |11⟩ (index 3)
        assert_eq!(u[(3, 1)], ONE);
        assert_eq!(u[(1, 1)], ZERO);
        assert_eq!(u[(2, 2)], ONE);
    }

    #[test]
    fn dense_cap_is_enforced() {
        let g = Circuit::new(3, 0);
        assert_eq!(build_unitary(&g, 2), Err(CheckError::TooManyQubits { qubits: 3, cap: 2 }));
        assert!(build_unitary(&g, 2).unwrap_err().to_string().contains("too many qubits for dense unitary"));
    }

    #[test]
    fn global_phase_is_ignored() {
        let mut a = Circuit::new(1, 0);
        a.gate(GateKind::Z, &[0]);
        let mut b = Circuit::new(1, 0);
        b.gate(GateKind::RZ(Angle::pi_frac(1, 1)), &[0]);
        let r = check_full(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Equivalent);
        let phase = r.global_phase.unwrap();
        assert!((phase - C64::new(0.0, 1.0)).norm() < 1e-12, "{phase}");
    }

    #[test]
    fn detects_a_wrong_gate() {
        let mut a = Circuit::new(2, 0);
        a.h(0).cx(0, 1);
        let mut b = Circuit::new(2, 0);
        b.h(0).cx(1, 0);
        let r = check_full(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotEquivalent);
        assert!(matches!(r.counterexample, Some(Counterexample::Column { .. })));
    }

    #[test]
    fn permutations_relabel_the_second_circuit() {
        let mut a = Circuit::new(2, 0);
        a.cx(0, 1);
        let mut b = Circuit::new(2, 0);
        b.cx(1, 0);
        let cfg = CheckConfig { input_permutation: Some(vec![1, 0]), ..Default::default() };
        assert_eq!(check_full(&a, &b, &cfg).unwrap().verdict, Verdict::Equivalent);
        let bad = CheckConfig { input_permutation: Some(vec![0, 0]), ..Default::default() };
        assert!(matches!(check_full(&a, &b, &bad), Err(CheckError::BadPermutation(_))));
    }

    #[test]
    fn arity_mismatch() {
        let err = check_full(&Circuit::new(1, 0), &Circuit::new(2, 0), &CheckConfig::default()).unwrap_err();
        assert!(err.to_string().starts_with("arity mismatch"));
    }

    #[test]
    fn teleport_like_feed_forward_equals_controlled_gate() {
        // measure-and-correct equals a CNOT followed by a measurement
        let mut dynamic = Circuit::new(2, 1);
        dynamic.h(0).measure(0, 0).c_if(0, true, GateKind::X, &[1]);
        let mut fixed = Circuit::new(2, 1);
        fixed.h(0).controlled(GateKind::X, &[Control::pos(0)], &[1]).measure(0, 0);
        assert_eq!(check_full(&dynamic, &fixed, &CheckConfig::default()).unwrap().verdict, Verdict::Equivalent);
        let dist = check_distribution(&dynamic, &fixed, &CheckConfig::default()).unwrap();
        assert_eq!(dist.verdict, Verdict::Equivalent);
        assert!(dist.max_deviation < 1e-15);
    }

    #[test]
    fn distribution_counterexample() {
        let mut a = Circuit::new(1, 1);
        a.measure(0, 0);
        let mut b = Circuit::new(1, 1);
        b.x(0).measure(0, 0);
        let r = check_distribution(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotEquivalent);
        assert_eq!(r.max_deviation, 1.0);
        match r.counterexample {
            Some(Counterexample::Distribution { bitstring, .. }) => assert!(bitstring == "0" || bitstring == "1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn output_permutation_in_distribution_mode() {
        let mut a = Circuit::new(2, 2);
        a.x(0).measure(0, 0).measure(1, 1);
        let mut b = Circuit::new(2, 2);
        b.x(1).measure(0, 0).measure(1, 1);
        let cfg = CheckConfig { output_permutation: Some(vec![1, 0]), ..Default::default() };
        assert_eq!(check_distribution(&a, &b, &cfg).unwrap().verdict, Verdict::Equivalent);
        assert_eq!(check_distribution(&a, &b, &CheckConfig::default()).unwrap().verdict, Verdict::NotEquivalent);
    }

    #[test]
    fn measurement_alignment() {
        let mut dynamic = Circuit::new(1, 2);
        dynamic.h(0).measure(0, 0).reset(0).h(0).measure(0, 1);
        let mut fixed = Circuit::new(2, 2);
        fixed.h(1).h(0).measure(1, 0).measure(0, 1);
        assert_eq!(align_by_measurements(&dynamic, &fixed).unwrap(), vec![1, 0]);
        let cfg = CheckConfig { input_permutation: Some(vec![1, 0]), ..Default::default() };
        assert_eq!(check_full(&dynamic, &fixed, &cfg).unwrap().verdict, Verdict::Equivalent);
    }

    #[test]
    fn result_json_shape() {
        let g = Circuit::new(1, 0);
        let r = check_full(&g, &g, &CheckConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "equivalent");
        assert_eq!(v["maxDeviation"], 0.0);
        assert_eq!(v["globalPhase"], serde_json::json!([1.0, 0.0]));
        assert!(v["counterexample"].is_null());
        assert!(v["timings"]["verifySeconds"].is_number());
    }
}
