//! Benchmark harness: for each (family, size) pair, time the transformation,
//! full verification, branching extraction and static simulation, and emit a
//! CSV table with a JSON twin.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::angle::Angle;
use crate::benchgen::{default_theta, random_secret, static_qubits, BenchSpec, Family, Variant};
use crate::circuit::Circuit;
use crate::equivalence::{align_by_measurements, check_full, CheckConfig, Verdict};
use crate::extract::{extract, ExtractConfig};
use crate::reconstruct::reconstruct_unitary;
use crate::sim::{outcome_distribution_static, MAX_QUBITS};
use crate::workers::Workers;

/// Largest static partner the harness simulates (a 1 GiB state vector).
const STATIC_SIM_CAP: usize = if MAX_QUBITS < 26 { MAX_QUBITS } else { 26 };

/// Marker for cells that were not computed.
pub const SKIPPED: &str = "---";

pub const HEADER: [&str; 20] = [
    "family",
    "variants",
    "size",
    "parameter",
    "n_static",
    "g_static",
    "n_dynamic",
    "g_dynamic",
    "n_reconstructed",
    "t_trans",
    "t_ver",
    "t_extract",
    "t_sim",
    "verdict",
    "tvd",
    "branches",
    "gate_apps_dynamic",
    "gate_apps_static",
    "amp_updates_dynamic",
    "amp_updates_static",
];

/// Columns holding durations.
const DURATIONS: std::ops::Range<usize> = 9..13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: Family,
    /// Always `static/dynamic`.
    pub variants: String,
    pub size: usize,
    /// BV secret or phase angle.
    pub parameter: String,
    pub n_static: usize,
    pub g_static: usize,
    pub n_dynamic: usize,
    pub g_dynamic: usize,
    pub n_reconstructed: usize,
    pub t_trans: Option<f64>,
    pub t_ver: Option<f64>,
    pub t_extract: Option<f64>,
    pub t_sim: Option<f64>,
    /// Full-check verdict, `skipped` above the dense cap, or `error: …`.
    pub verdict: String,
    /// Distance between the extracted and simulated distributions.
    pub tvd: Option<f64>,
    pub branches: Option<u64>,
    pub gate_apps_dynamic: Option<u64>,
    pub gate_apps_static: Option<u64>,
    pub amp_updates_dynamic: Option<u64>,
    pub amp_updates_static: Option<u64>,
}

impl BenchRow {
    fn cells(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| SKIPPED.to_string(), ToString::to_string)
        }
        fn secs(v: &Option<f64>) -> String {
            v.map_or_else(|| SKIPPED.to_string(), |s| format!("{s:.6}"))
        }
        vec![
            self.family.to_string(),
            self.variants.clone(),
            self.size.to_string(),
            self.parameter.clone(),
            self.n_static.to_string(),
            self.g_static.to_string(),
            self.n_dynamic.to_string(),
            self.g_dynamic.to_string(),
            self.n_reconstructed.to_string(),
            secs(&self.t_trans),
            secs(&self.t_ver),
            secs(&self.t_extract),
            secs(&self.t_sim),
            self.verdict.clone(),
            self.tvd.map_or_else(|| SKIPPED.to_string(), |v| format!("{v:.3e}")),
            opt(&self.branches),
            opt(&self.gate_apps_dynamic),
            opt(&self.gate_apps_static),
            opt(&self.amp_updates_dynamic),
            opt(&self.amp_updates_static),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub theta: Angle,
    pub seed: u64,
    pub dense_cap: usize,
    pub workers: Workers,
    pub tolerance: f64,
    pub prune_threshold: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            families: vec![Family::Bv, Family::Qft, Family::Qpe],
            sizes: Vec::new(),
            theta: default_theta(),
            seed: 0,
            dense_cap: crate::equivalence::DEFAULT_DENSE_CAP,
            workers: Workers::Auto,
            tolerance: 1e-9,
            prune_threshold: 1e-12,
        }
    }
}

fn pair(family: Family, size: usize, secret: Option<String>, theta: Angle) -> Result<(Circuit, Circuit), String> {
    let build = |variant| {
        BenchSpec { family, variant, size, theta: Some(theta), secret: secret.clone() }.build().map_err(|e| e.to_string())
    };
    Ok((build(Variant::Static)?, build(Variant::Dynamic)?))
}

/// Runs one instance. Failures are recorded in `verdict` instead of aborting.
pub fn bench_instance(family: Family, size: usize, secret: Option<String>, opts: &BenchOptions) -> BenchRow {
    let parameter = match family {
        Family::Bv => secret.clone().unwrap_or_default(),
        Family::Qft => String::new(),
        Family::Qpe => opts.theta.to_string(),
    };
    let mut row = BenchRow {
        family,
        variants: "static/dynamic".into(),
        size,
        parameter,
        n_static: 0,
        g_static: 0,
        n_dynamic: 0,
        g_dynamic: 0,
        n_reconstructed: 0,
        t_trans: None,
        t_ver: None,
        t_extract: None,
        t_sim: None,
        verdict: SKIPPED.into(),
        tvd: None,
        branches: None,
        gate_apps_dynamic: None,
        gate_apps_static: None,
        amp_updates_dynamic: None,
        amp_updates_static: None,
    };
    let (fixed, dynamic) = match pair(family, size, secret, opts.theta) {
        Ok(p) => p,
        Err(e) => {
            row.verdict = format!("error: {e}");
            return row;
        }
    };
    row.n_static = fixed.num_qubits;
    row.g_static = fixed.ops.len();
    row.n_dynamic = dynamic.num_qubits;
    row.g_dynamic = dynamic.ops.len();

    let t = Instant::now();
    match reconstruct_unitary(&dynamic) {
        Ok((rec, _)) => {
            row.t_trans = Some(t.elapsed().as_secs_f64());
            row.n_reconstructed = rec.num_qubits;
        }
        Err(e) => {
            row.verdict = format!("error: {e}");
            return row;
        }
    }

    if static_qubits(family, size) <= opts.dense_cap {
        let cfg = CheckConfig { tolerance: opts.tolerance, dense_cap: opts.dense_cap, workers: opts.workers, ..Default::default() };
        let t = Instant::now();
        let result = align_by_measurements(&dynamic, &fixed).and_then(|perm| {
            check_full(&dynamic, &fixed, &CheckConfig { input_permutation: Some(perm), ..cfg })
        });
        match result {
            Ok(r) => {
                row.t_ver = Some(t.elapsed().as_secs_f64());
                row.verdict = match r.verdict {
                    Verdict::Equivalent => "equivalent",
                    Verdict::NotEquivalent => "not_equivalent",
                    Verdict::Error => "error",
                }
                .into();
            }
            Err(e) => row.verdict = format!("error: {e}"),
        }
    } else {
        row.verdict = "skipped".into();
    }

    let extract_cfg =
        ExtractConfig { prune_threshold: opts.prune_threshold, workers: opts.workers, ..ExtractConfig::default() };
    let t = Instant::now();
    let extracted = match extract(&dynamic, 0, &extract_cfg) {
        Ok(ex) => {
            row.t_extract = Some(t.elapsed().as_secs_f64());
            row.branches = Some(ex.stats.branches_simulated);
            row.gate_apps_dynamic = Some(ex.stats.gate_applications);
            row.amp_updates_dynamic = Some(ex.stats.amplitude_updates);
            Some(ex.distribution)
        }
        Err(e) => {
            row.verdict = format!("error: {e}");
            None
        }
    };

    if fixed.num_qubits <= STATIC_SIM_CAP {
        let t = Instant::now();
        if let Ok(d) = outcome_distribution_static(&fixed, 0, &extract_cfg.sim) {
            row.t_sim = Some(t.elapsed().as_secs_f64());
            let apps = fixed.count_unitaries() as u64;
            row.gate_apps_static = Some(apps);
            row.amp_updates_static = Some(apps << fixed.num_qubits);
            row.tvd = extracted.map(|e| e.tvd(&d));
        }
    }
    row
}

/// Runs every (family, size) pair in order. BV secrets are drawn from a
/// ChaCha8 stream seeded with `opts.seed`.
pub fn run_bench(opts: &BenchOptions) -> Vec<BenchRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows = Vec::new();
    for &family in &opts.families {
        for &size in &opts.sizes {
            let secret = (family == Family::Bv).then(|| random_secret(size, &mut rng));
            rows.push(bench_instance(family, size, secret, opts));
        }
    }
    rows
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(row.cells()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn to_json(rows: &[BenchRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Validates a bench CSV: exact header, fixed column count, nonnegative
/// durations and counts (or the skip marker). Returns the number of rows.
pub fn check_report(text: &str) -> Result<usize, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format!("unreadable header: {e}"))?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(format!("unexpected header: {}", header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut count = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        if record.len() != HEADER.len() {
            return Err(format!("line {line}: {} columns, expected {}", record.len(), HEADER.len()));
        }
        record[0].parse::<Family>().map_err(|e| format!("line {line}: {e}"))?;
        for col in [2, 4, 5, 6, 7, 8] {
            record[col]
                .parse::<u64>()
                .map_err(|_| format!("line {line}: column `{}` is not a count: `{}`", HEADER[col], &record[col]))?;
        }
        for col in DURATIONS.chain(14..HEADER.len()) {
            let cell = &record[col];
            if cell == SKIPPED {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| format!("line {line}: column `{}` is not a number: `{cell}`", HEADER[col]))?;
            if v.is_nan() || v < 0.0 {
                return Err(format!("line {line}: column `{}` is negative or NaN", HEADER[col]));
            }
        }
        count += 1;
    }
    Ok(count)
}
