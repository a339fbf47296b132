//! Runs an experiment config: fans work units out over threads, collects
//! result rows, sorts them into a canonical order and writes CSV plus a
//! manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use nusc_core::bounds::{eval_bounds, BoundInputs, BoundRecord};
use nusc_core::codebook::{dimension, gen_codebook};
use nusc_core::dlc::{dlc_concatenate, DlcConfig, OuterCode};
use nusc_core::gacskorner::common_part;
use nusc_core::seed::EmulatorAudit;
use nusc_core::sw::{sw_build, SwCode, SwConfig};
use nusc_core::wz::{wz_build, TestChannel, WzConfig};
use nusc_core::{rng, stats, Mode};

use crate::config::{ExperimentConfig, ExperimentKind, Loaded, OneOrMany};
use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 8] = ["experiment", "config_hash", "n", "codebook", "trial", "metric", "value", "flags"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    /// Position of the sweep point; orders rows, not written.
    pub point: usize,
    pub experiment: String,
    pub config_hash: String,
    pub n: usize,
    pub codebook: Option<usize>,
    pub trial: Option<usize>,
    pub metric: &'static str,
    pub value: f64,
    pub flags: Vec<&'static str>,
}

impl ResultRow {
    fn key(&self) -> (usize, usize, Option<usize>, Option<usize>, &'static str) {
        (self.point, self.n, self.codebook, self.trial, self.metric)
    }

    fn record(&self) -> [String; 8] {
        let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        [
            self.experiment.clone(),
            self.config_hash.clone(),
            self.n.to_string(),
            opt(self.codebook),
            opt(self.trial),
            self.metric.to_string(),
            self.value.to_string(),
            self.flags.join("|"),
        ]
    }
}

/// One sweep point: the config with a scalar `epsilon` and its own seed.
#[derive(Clone, Debug)]
pub struct Point {
    pub index: usize,
    pub id: String,
    pub epsilon: f64,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryEntry {
    pub experiment: String,
    pub n: usize,
    pub metric: &'static str,
    pub median: f64,
    pub iqr: f64,
    pub count: usize,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryEntry>,
    pub manifest: Value,
}

pub fn hash_config(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

/// Sweep points. A scalar `epsilon` gives one point on the master seed; a
/// list gives one point per entry, each on `sub_seed(master, "sweep", i)`.
pub fn points(loaded: &Loaded) -> Vec<Point> {
    let cfg = &loaded.config;
    let kind = loaded.kind.name();
    match &cfg.epsilon {
        OneOrMany::One(e) => vec![Point {
            index: 0,
            id: kind.to_string(),
            epsilon: *e,
            seed: cfg.master_seed,
            config_hash: hash_config(cfg),
        }],
        OneOrMany::Many(list) => list
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let mut single = cfg.clone();
                single.epsilon = OneOrMany::One(e);
                let seed = rng::sub_seed(cfg.master_seed, "sweep", i as u64);
                single.master_seed = seed;
                Point { index: i, id: format!("{kind}[{i}]"), epsilon: e, seed, config_hash: hash_config(&single) }
            })
            .collect(),
    }
}

/// Everything a work unit needs that does not depend on the codebook index.
enum Plan {
    Resolve { q: nusc_core::Pmf, ch: nusc_core::Channel, target: nusc_core::Pmf, rate: f64, mode: Mode },
    Wz { cfg: WzConfig },
    Sw { cfg: SwConfig, exhaustive: bool },
    Dlc { cfg: DlcConfig },
    Bounds { inputs: BoundInputs },
}

struct Unit<'a> {
    point: &'a Point,
    n: usize,
    plan: &'a Plan,
    codebook: Option<usize>,
}

struct Prepared {
    points: Vec<Point>,
    plans: Vec<Vec<(usize, Plan)>>,
    manifest_points: Vec<Value>,
}

fn prepare(loaded: &Loaded, base: &Path) -> Result<Prepared> {
    let cfg = &loaded.config;
    let pts = points(loaded);
    let test = match loaded.kind {
        ExperimentKind::Wz => Some(loaded.test_channel(base)?),
        _ => None,
    };
    let outer = match loaded.kind {
        ExperimentKind::Dlc => Some(padded_outer(loaded, base)?),
        _ => None,
    };
    let mut plans = Vec::with_capacity(pts.len());
    let mut manifest_points = Vec::with_capacity(pts.len());
    for p in &pts {
        let mut per_n = Vec::new();
        let mut info = Vec::new();
        for &n in &cfg.n {
            let (plan, dims) = plan_for(loaded, n, p.epsilon, test.as_ref(), outer.as_ref())?;
            info.push(dims);
            per_n.push((n, plan));
        }
        manifest_points.push(json!({
            "experiment": p.id,
            "epsilon": p.epsilon,
            "seed": p.seed,
            "config_hash": p.config_hash,
            "per_n": info,
        }));
        plans.push(per_n);
    }
    Ok(Prepared { points: pts, plans, manifest_points })
}

fn padded_outer(loaded: &Loaded, base: &Path) -> Result<OuterCode> {
    let outer = loaded.outer_code(base)?;
    match loaded.config.dlc.as_ref().and_then(|d| d.pad) {
        Some(pad) => {
            let cp = common_part(&loaded.source)?;
            outer.pad_with_common(&cp, pad).map_err(|e| HarnessError::config("dlc.pad", e))
        }
        None => Ok(outer),
    }
}

fn plan_for(loaded: &Loaded, n: usize, epsilon: f64, test: Option<&TestChannel>, outer: Option<&OuterCode>) -> Result<(Plan, Value)> {
    let cfg = &loaded.config;
    let source = &loaded.source;
    Ok(match loaded.kind {
        ExperimentKind::Resolve => {
            let spec = cfg.resolve.as_ref().expect("validated");
            let q = source.marginal_pmf(0)?;
            let ch = source.conditional(0, 1)?;
            let target = source.marginal_pmf(1)?;
            let rate = source.mutual_information(&[0], &[1])? + spec.rate_offset;
            let dim = dimension(n, rate);
            let mode = match cfg.mode() {
                Mode::Exact => Mode::Exact,
                Mode::MonteCarlo { .. } => Mode::MonteCarlo { trials: spec.mc_samples },
            };
            let dims = json!({ "n": n, "rate": rate, "codebook_rows": dim.size, "rate_rounding": dim.rounding() });
            (Plan::Resolve { q, ch, target, rate, mode }, dims)
        }
        ExperimentKind::Wz => {
            let wz = WzConfig {
                source: source.clone(),
                test: test.expect("built for wz").clone(),
                n,
                epsilon,
                delta: cfg.delta,
                distortion_target: cfg.wz.as_ref().and_then(|w| w.distortion_target),
            };
            let d = wz.derive()?;
            let dims = json!({
                "n": n,
                "rate": d.rate,
                "rate_prime": d.rate_prime,
                "codebook_rows": d.rows.size,
                "codebook_cols": d.cols.size,
                "seed_block": d.seed_block,
                "seed_bins": d.seed_bins,
                "expected_distortion": d.expected_distortion,
            });
            (Plan::Wz { cfg: wz }, dims)
        }
        ExperimentKind::Sw => {
            let sw = SwConfig { source: source.clone(), epsilon, n, delta: cfg.delta };
            let d = sw.derive()?;
            let exhaustive = cfg.sw.as_ref().is_some_and(|s| s.exhaustive);
            let dims = json!({
                "n": n,
                "u_rows": d.u_rows.size,
                "x_rows": d.x_rows.size,
                "x_cols": d.x_cols.size,
                "y_rows": d.y_rows.size,
                "seed_len": d.seed_len,
                "total_len": d.total_len,
                "seed_bins": d.seed_bins,
                "exhaustive": exhaustive,
            });
            (Plan::Sw { cfg: sw, exhaustive }, dims)
        }
        ExperimentKind::Dlc => {
            let outer = outer.expect("built for dlc").clone();
            let message_joint = outer.message_joint(source)?;
            let inner = SwConfig { source: message_joint, epsilon, n, delta: cfg.delta }.derive()?;
            let dims = json!({
                "inner_n": n,
                "outer_n": outer.n,
                "messages_x": outer.messages_x,
                "messages_y": outer.messages_y,
                "u_rows": inner.u_rows.size,
                "x_rows": inner.x_rows.size,
                "x_cols": inner.x_cols.size,
                "y_rows": inner.y_rows.size,
                "seed_bins": inner.seed_bins,
                "total_len": inner.total_len,
            });
            let blocks = cfg.dlc.as_ref().expect("validated").blocks;
            (Plan::Dlc { cfg: DlcConfig { source: source.clone(), outer, inner_n: n, epsilon, delta: cfg.delta, blocks } }, dims)
        }
        ExperimentKind::Bounds => {
            let spec = cfg.bounds.clone().unwrap_or_default();
            let cp = common_part(source)?;
            let uxy = cp.joint_with_common(source)?;
            let (kx, ky) = (source.dims()[0], source.dims()[1]);
            let i_xy_given_u = uxy.conditional_mutual_information(&[1], &[2], &[0])?;
            let i_ab = source.mutual_information(&[0], &[1])?;
            let inputs = BoundInputs {
                n,
                delta: cfg.delta,
                mu: uxy.min_support_mass(),
                sizes_xyu: (kx, ky, uxy.dims()[0]),
                i_xy_given_u,
                rate_x_prime: i_xy_given_u + epsilon / 2.0,
                sizes_ab: (kx, ky),
                i_ab,
                list_rate: i_ab + spec.list_rate_offset,
                epsilon: spec.outside_mass,
                head_size: spec.head_size,
                ell: spec.ell,
                variational: spec.variational,
            };
            let dims = json!({ "n": n, "mu": inputs.mu, "rate_x_prime": inputs.rate_x_prime, "list_rate": inputs.list_rate });
            (Plan::Bounds { inputs }, dims)
        }
    })
}

struct Sink<'a> {
    unit: &'a Unit<'a>,
    rows: Vec<ResultRow>,
}

impl Sink<'_> {
    fn push(&mut self, trial: Option<usize>, metric: &'static str, value: f64, flags: &[&'static str]) {
        self.rows.push(ResultRow {
            point: self.unit.point.index,
            experiment: self.unit.point.id.clone(),
            config_hash: self.unit.point.config_hash.clone(),
            n: self.unit.n,
            codebook: self.unit.codebook,
            trial,
            metric,
            value,
            flags: flags.to_vec(),
        });
    }

    fn metric(&mut self, metric: &'static str, value: f64) {
        self.push(None, metric, value, &[]);
    }

    fn audit(&mut self, a: &EmulatorAudit) {
        self.metric("audit_conditions", a.conditions as f64);
        self.metric("audit_violations", a.violations as f64);
        self.metric("audit_symbol_violations", a.symbol_violations as f64);
        self.metric("audit_worst_slack", a.worst_slack);
    }
}

fn estimate_flags(exact: bool, undersampled: bool) -> Vec<&'static str> {
    let mut f = vec![if exact { "exact" } else { "mc" }];
    if undersampled {
        f.push("undersampled");
    }
    f
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn run_unit(unit: &Unit<'_>, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let seed = unit.point.seed;
    let c = unit.codebook.unwrap_or(0) as u64;
    let mut s = Sink { unit, rows: Vec::new() };
    match unit.plan {
        Plan::Resolve { q, ch, target, rate, mode } => {
            let dim = dimension(unit.n, *rate);
            let mut r = rng::stream(seed, "resolve/codebook", c);
            let cb = gen_codebook(q, unit.n, dim.size, 1, &mut r, "resolve/codebook")?;
            let mut mc = rng::stream(seed, "resolve/mc", c);
            let gap = cb.resolvability_gap(ch, target, *mode, Some(&mut mc))?;
            s.push(None, "resolvability_gap", gap.value, &estimate_flags(gap.exact, gap.undersampled));
            s.metric("rate", *rate);
            s.metric("codebook_rows", dim.size as f64);
            s.metric("rate_rounding", dim.rounding());
        }
        Plan::Wz { cfg: wz } => {
            let code = wz_build(wz, seed, c)?;
            let (m, trials) = code.evaluate_detailed(seed, c, cfg.trials, cfg.mode())?;
            s.push(None, "uniformity_v", m.uniformity_v, &estimate_flags(m.uniformity_exact, m.uniformity_undersampled));
            s.metric("avg_distortion", m.avg_distortion);
            s.metric("distortion_first_n", m.distortion_first_n);
            s.metric("expected_distortion", code.derived.expected_distortion);
            s.metric("decode_err", m.decode_err);
            s.metric("atypicality", m.atypicality);
            s.metric("fallback_rate", m.fallback_rate);
            s.metric("n_effective", m.n_effective as f64);
            s.metric("codebook_rows", m.rows as f64);
            s.metric("codebook_cols", m.cols as f64);
            s.metric("seed_bins", code.derived.seed_bins as f64);
            s.metric("rate", code.derived.rate);
            s.metric("rate_prime", code.derived.rate_prime);
            s.metric("certified_fraction", m.certified_fraction);
            s.audit(&m.audit);
            for (t, tr) in trials.iter().enumerate() {
                s.push(Some(t), "trial_distortion", tr.distortion_total, &[]);
                s.push(Some(t), "trial_distortion_first_n", tr.distortion_first_n, &[]);
                s.push(Some(t), "trial_decode_error", flag(tr.col_hat != tr.col), &[]);
                s.push(Some(t), "trial_atypical", flag(!tr.typical), &[]);
                s.push(Some(t), "trial_fallback", flag(tr.fallback), &[]);
            }
        }
        Plan::Sw { cfg: sw, exhaustive } => {
            let code = if *exhaustive { SwCode::exhaustive(sw)? } else { sw_build(sw, seed, c)? };
            let (m, trials) = code.evaluate_detailed(seed, c, cfg.trials, cfg.mode())?;
            let (rx, ry) = code.rates();
            s.push(None, "joint_uniformity_v", m.joint_uniformity_v, &estimate_flags(m.uniformity_exact, m.uniformity_undersampled));
            s.metric("block_err", m.block_err);
            s.metric("encoder_fallback_rate", m.encoder_fallback_rate);
            s.metric("decode_ambiguity_rate", m.decode_ambiguity_rate);
            s.metric("u_rows", m.dims.u_rows as f64);
            s.metric("x_rows", m.dims.x_rows as f64);
            s.metric("x_cols", m.dims.x_cols as f64);
            s.metric("y_rows", m.dims.y_rows as f64);
            s.metric("seed_bins", m.seed_bins as f64);
            s.metric("total_len", m.total_len as f64);
            s.metric("rate_x", rx);
            s.metric("rate_y", ry);
            s.audit(&m.audit);
            for (t, tr) in trials.iter().enumerate() {
                s.push(Some(t), "trial_block_error", flag(tr.block_error), &[]);
                s.push(Some(t), "trial_fallback", flag(tr.fallback), &[]);
                s.push(Some(t), "trial_ambiguous", flag(tr.ambiguous), &[]);
            }
        }
        Plan::Dlc { cfg: dlc } => {
            let code = dlc_concatenate(dlc, seed, c)?;
            let (m, trials) = code.evaluate_detailed(seed, c, cfg.trials)?;
            s.push(None, "joint_uniformity_v", m.joint_uniformity_v, &["exact"]);
            s.push(None, "composed_uniformity_v", m.composed_uniformity_v, &["exact"]);
            s.metric("avg_distortion_x", m.avg_distortion_x);
            s.metric("avg_distortion_y", m.avg_distortion_y);
            s.metric("baseline_x", m.baseline_x);
            s.metric("baseline_y", m.baseline_y);
            s.metric("rate_x", m.rate_x);
            s.metric("rate_y", m.rate_y);
            s.metric("inner_block_err", m.inner_block_err);
            s.metric("overhead", m.overhead);
            s.metric("accounting_violations", m.accounting_violations as f64);
            s.audit(&m.audit);
            for (t, tr) in trials.iter().enumerate() {
                s.push(Some(t), "trial_distortion_x", tr.distortion_x, &[]);
                s.push(Some(t), "trial_distortion_y", tr.distortion_y, &[]);
                s.push(Some(t), "trial_baseline_x", tr.baseline_x, &[]);
                s.push(Some(t), "trial_baseline_y", tr.baseline_y, &[]);
                s.push(Some(t), "trial_inner_block_err", tr.inner_block_err, &[]);
                s.push(Some(t), "trial_accounting_holds", flag(tr.accounting_holds), &[]);
            }
        }
        Plan::Bounds { inputs } => {
            let record = eval_bounds(inputs);
            for (name, value) in record.fields() {
                s.metric(name, value);
            }
            s.metric("mu", inputs.mu);
        }
    }
    Ok(s.rows)
}

/// Runs every sweep point. `threads` pins the worker count; `None` uses the global pool.
pub fn run(loaded: &Loaded, base: &Path, threads: Option<usize>) -> Result<RunOutput> {
    let start = Instant::now();
    let prepared = prepare(loaded, base)?;
    let cfg = &loaded.config;
    let codebooks: Vec<Option<usize>> = match loaded.kind {
        ExperimentKind::Bounds => vec![None],
        _ => (0..cfg.codebooks).map(Some).collect(),
    };
    let mut units = Vec::new();
    for (p, per_n) in prepared.points.iter().zip(&prepared.plans) {
        for (n, plan) in per_n {
            for &codebook in &codebooks {
                units.push(Unit { point: p, n: *n, plan, codebook });
            }
        }
    }
    let work = || units.par_iter().map(|u| run_unit(u, cfg)).collect::<Result<Vec<_>>>();
    let (chunks, used_threads) = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| HarnessError::config("threads", e))?;
            (pool.install(work)?, t)
        }
        None => (work()?, rayon::current_num_threads()),
    };
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    let summary = summarize(&rows);
    let manifest = json!({
        "tool": "nusc",
        "version": env!("CARGO_PKG_VERSION"),
        "fingerprint": fingerprint(),
        "experiment": loaded.kind.name(),
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "config_hash": hash_config(cfg),
        "master_seed": cfg.master_seed,
        "threads": used_threads,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "list_size_bound_sign": BoundRecord::LIST_SIZE_SIGN,
        "points": prepared.manifest_points,
    });
    Ok(RunOutput { rows, summary, manifest })
}

fn fingerprint() -> String {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    format!("nusc-{}-{}", env!("CARGO_PKG_VERSION"), profile)
}

/// Median and IQR of every codebook-level metric per `(experiment, n)`.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryEntry> {
    let mut groups: BTreeMap<(usize, usize, &'static str), (String, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.trial.is_none()) {
        groups.entry((r.point, r.n, r.metric)).or_insert_with(|| (r.experiment.clone(), Vec::new())).1.push(r.value);
    }
    groups
        .into_iter()
        .map(|((_, n, metric), (experiment, values))| SummaryEntry {
            experiment,
            n,
            metric,
            median: stats::median(&values),
            iqr: stats::iqr(&values),
            count: values.len(),
        })
        .collect()
}

/// Looks up a summary median.
pub fn median_of(summary: &[SummaryEntry], n: usize, metric: &str) -> Option<f64> {
    summary.iter().find(|e| e.n == n && e.metric == metric).map(|e| e.median)
}

pub fn format_summary(summary: &[SummaryEntry]) -> String {
    let mut out = format!("{:<12} {:>6} {:<26} {:>14} {:>14} {:>6}\n", "experiment", "n", "metric", "median", "iqr", "count");
    for e in summary {
        out.push_str(&format!(
            "{:<12} {:>6} {:<26} {:>14.6} {:>14.6} {:>6}\n",
            e.experiment, e.n, e.metric, e.median, e.iqr, e.count
        ));
    }
    out
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the CSV at `out` and the manifest next to it.
pub fn write_outputs(output: &RunOutput, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(out, csv_string(&output.rows)?).map_err(|e| HarnessError::io(out, e))?;
    let m = manifest_path(out);
    let text = serde_json::to_string_pretty(&output.manifest).expect("manifest serializes");
    std::fs::write(&m, text + "\n").map_err(|e| HarnessError::io(&m, e))
}
