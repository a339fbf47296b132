//! Experiment configuration documents (JSON).
//!
//! ```json
//! {
//!   "experiment": "wz",
//!   "source": { "dsbs": { "p": 0.1 } },
//!   "n": [6, 10],
//!   "epsilon": 0.1,
//!   "delta": 0.5,
//!   "trials": 400,
//!   "codebooks": 10,
//!   "mode": "exact",
//!   "master_seed": 7,
//!   "wz": { "test_channel": { "bsc": 0.25 } }
//! }
//! ```
//!
//! `epsilon` may also be a list, which makes the run a sweep. Unknown fields
//! are rejected and every validation message names the offending field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nusc_core::dlc::OuterCode;
use nusc_core::wz::{hamming, TestChannel};
use nusc_core::{Alphabet, Channel, JointPmf, Mode, Pmf};

use crate::error::{HarnessError, Result};
use crate::format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Resolve,
    Wz,
    Sw,
    Dlc,
    Bounds,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Resolve => "resolve",
            ExperimentKind::Wz => "wz",
            ExperimentKind::Sw => "sw",
            ExperimentKind::Dlc => "dlc",
            ExperimentKind::Bounds => "bounds",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Exact,
    Mc,
}

/// The joint source pmf. For `resolve` it is the joint of `(W, X)`; for the
/// other experiments the joint of `(X, Y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Uniform binary pair flipped with probability `p`.
    Dsbs { p: f64 },
    /// Blocks of `block × block` letters, uniform inside each block, block `k` carrying `masses[k]`.
    BlockDiag {
        masses: Vec<f64>,
        #[serde(default = "default_block")]
        block: usize,
    },
    /// A matrix of masses, rows indexed by the first variable.
    Inline {
        mass: Vec<Vec<f64>>,
        #[serde(default)]
        rows: Option<Vec<String>>,
        #[serde(default)]
        cols: Option<Vec<String>>,
    },
    /// A joint table file, resolved relative to the config file.
    File { path: PathBuf },
}

fn default_block() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, OneOrMany::Many(_))
    }
}

/// A channel out of the source's first variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity,
    /// Binary symmetric channel; the input must be binary.
    Bsc(f64),
    /// One row per input symbol; outputs are labelled `0, 1, …`.
    Rows(Vec<Vec<f64>>),
    /// A channel table file.
    File(PathBuf),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionSpec {
    /// Reconstruction alphabet equals the source alphabet.
    #[default]
    Hamming,
    /// One row per source symbol, one column per reconstruction symbol.
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolveSpec {
    /// `R + R' = I(X;W) + rate_offset`.
    pub rate_offset: f64,
    /// Monte-Carlo sample count per codebook in `mc` mode.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
}

fn default_mc_samples() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WzSpec {
    pub test_channel: ChannelSpec,
    #[serde(default)]
    pub distortion: DistortionSpec,
    #[serde(default)]
    pub distortion_target: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwSpec {
    /// Use every consistent sequence as a codeword (tiny n only).
    #[serde(default)]
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSpec {
    pub n: usize,
    pub cells_x: Vec<usize>,
    pub reps_x: Vec<usize>,
    pub cells_y: Vec<usize>,
    pub reps_y: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomOuterSpec {
    pub n: usize,
    pub size_x: usize,
    pub size_y: usize,
    pub test_channel_x: ChannelSpec,
    pub test_channel_y: ChannelSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterSpec {
    Identity,
    Quantizer(QuantizerSpec),
    Random(RandomOuterSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlcSpec {
    pub outer: OuterSpec,
    /// Digest size appended to each message; needs a nontrivial common part.
    #[serde(default)]
    pub pad: Option<usize>,
    /// Outer blocks per inner letter block.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
}

fn default_blocks() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default = "default_list_rate_offset")]
    pub list_rate_offset: f64,
    #[serde(default = "default_head_size")]
    pub head_size: usize,
    #[serde(default = "default_ell")]
    pub ell: usize,
    #[serde(default)]
    pub outside_mass: f64,
    #[serde(default)]
    pub variational: f64,
}

fn default_list_rate_offset() -> f64 {
    0.1
}
fn default_head_size() -> usize {
    2
}
fn default_ell() -> usize {
    3
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            list_rate_offset: default_list_rate_offset(),
            head_size: default_head_size(),
            ell: default_ell(),
            outside_mass: 0.0,
            variational: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub source: SourceSpec,
    /// Block lengths. For `dlc` these are the inner block lengths.
    pub n: Vec<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: OneOrMany,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_codebooks")]
    pub codebooks: usize,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolve: Option<ResolveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wz: Option<WzSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sw: Option<SwSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dlc: Option<DlcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
}

fn default_epsilon() -> OneOrMany {
    OneOrMany::One(0.1)
}
fn default_delta() -> f64 {
    0.1
}
fn default_trials() -> usize {
    200
}
fn default_codebooks() -> usize {
    10
}

impl ExperimentConfig {
    /// Parses a document. Relative file references stay unresolved until [`Loaded`] is built.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            HarnessError::config(field, e.inner())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Canonical JSON used for hashing and the manifest echo.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn mode(&self) -> Mode {
        match self.mode {
            ModeSpec::Exact => Mode::Exact,
            ModeSpec::Mc => Mode::MonteCarlo { trials: self.trials },
        }
    }

    /// Checks every field for `kind` without doing any simulation work.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(HarnessError::config("experiment", format!("config is for `{}`, not `{}`", k.name(), kind.name())));
            }
        }
        if self.n.is_empty() {
            return Err(HarnessError::config("n", "needs at least one block length"));
        }
        if let Some(i) = self.n.iter().position(|&n| n == 0) {
            return Err(HarnessError::config(format!("n[{i}]"), "block length must be positive"));
        }
        for (i, &e) in self.epsilon.values().iter().enumerate() {
            if !(e.is_finite() && e >= 0.0) {
                let field = if self.epsilon.is_sweep() { format!("epsilon[{i}]") } else { "epsilon".into() };
                return Err(HarnessError::config(field, format!("must be a nonnegative number, got {e}")));
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(HarnessError::config("delta", format!("must be a nonnegative number, got {}", self.delta)));
        }
        if self.codebooks == 0 && kind != ExperimentKind::Bounds {
            return Err(HarnessError::config("codebooks", "must be positive"));
        }
        if self.trials == 0 && !matches!(kind, ExperimentKind::Bounds | ExperimentKind::Resolve) {
            return Err(HarnessError::config("trials", "must be positive"));
        }
        match kind {
            ExperimentKind::Resolve => {
                let r = self.resolve.as_ref().ok_or_else(|| HarnessError::config("resolve", "section is required"))?;
                if !r.rate_offset.is_finite() {
                    return Err(HarnessError::config("resolve.rate_offset", "must be finite"));
                }
                if self.mode == ModeSpec::Mc && r.mc_samples == 0 {
                    return Err(HarnessError::config("resolve.mc_samples", "must be positive"));
                }
            }
            ExperimentKind::Wz => {
                if self.wz.is_none() {
                    return Err(HarnessError::config("wz", "section is required"));
                }
            }
            ExperimentKind::Dlc => {
                let d = self.dlc.as_ref().ok_or_else(|| HarnessError::config("dlc", "section is required"))?;
                if d.blocks == 0 {
                    return Err(HarnessError::config("dlc.blocks", "must be positive"));
                }
                if d.pad == Some(0) {
                    return Err(HarnessError::config("dlc.pad", "must be positive"));
                }
            }
            ExperimentKind::Sw | ExperimentKind::Bounds => {}
        }
        Ok(())
    }
}

/// A validated config with its sources and channels built.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub source: JointPmf,
}

impl Loaded {
    /// Validates `config` for `kind` and builds its source. `base` resolves relative paths.
    pub fn new(kind: ExperimentKind, config: ExperimentConfig, base: &Path) -> Result<Self> {
        config.validate(kind)?;
        let source = build_source(&config.source, base)?;
        let loaded = Self { kind, config, source };
        // surface structural errors before any simulation starts
        match kind {
            ExperimentKind::Wz => {
                loaded.test_channel(base)?;
            }
            ExperimentKind::Dlc => {
                loaded.outer_code(base)?;
            }
            _ => {}
        }
        Ok(loaded)
    }

    pub fn test_channel(&self, base: &Path) -> Result<TestChannel> {
        let spec = self.config.wz.as_ref().ok_or_else(|| HarnessError::config("wz", "section is required"))?;
        let x = self.source.alphabet(0).clone();
        let ch = build_channel(&spec.test_channel, &x, base, "wz.test_channel")?;
        let (x_hat, d) = match &spec.distortion {
            DistortionSpec::Hamming => (x.clone(), hamming(x.len())),
            DistortionSpec::Matrix(rows) => {
                if rows.len() != x.len() {
                    return Err(HarnessError::config("wz.distortion", format!("needs {} rows, one per source symbol", x.len())));
                }
                let cols = rows[0].len();
                if cols == 0 || rows.iter().any(|r| r.len() != cols) {
                    return Err(HarnessError::config("wz.distortion", "rows must be nonempty and of equal length"));
                }
                if rows.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(HarnessError::config("wz.distortion", "entries must be nonnegative numbers"));
                }
                (Alphabet::indexed(cols), rows.concat())
            }
        };
        TestChannel::bayes(&self.source, ch, x_hat, d).map_err(|e| HarnessError::config("wz.test_channel", e))
    }

    pub fn outer_code(&self, base: &Path) -> Result<OuterCode> {
        let spec = self.config.dlc.as_ref().ok_or_else(|| HarnessError::config("dlc", "section is required"))?;
        let xa = self.source.alphabet(0).clone();
        let ya = self.source.alphabet(1).clone();
        let field = |e: nusc_core::Error| HarnessError::config("dlc.outer", e);
        match &spec.outer {
            OuterSpec::Identity => OuterCode::identity(xa, ya).map_err(field),
            OuterSpec::Quantizer(q) => OuterCode::scalar_quantizer(
                xa,
                ya,
                q.n,
                (&q.cells_x, &q.reps_x),
                (&q.cells_y, &q.reps_y),
            )
            .map_err(field),
            OuterSpec::Random(r) => {
                let cx = build_channel(&r.test_channel_x, &xa, base, "dlc.outer.random.test_channel_x")?;
                let cy = build_channel(&r.test_channel_y, &ya, base, "dlc.outer.random.test_channel_y")?;
                // codebooks live on the test channel's output; decoding reads x given w
                let x_given_w = reverse(&self.source.marginal_pmf(0)?, &cx).map_err(field)?;
                let y_given_w = reverse(&self.source.marginal_pmf(1)?, &cy).map_err(field)?;
                let mut rng = nusc_core::rng::stream(self.config.master_seed, "dlc/outer", 0);
                OuterCode::random_codebook(&self.source, r.n, (r.size_x, &x_given_w), (r.size_y, &y_given_w), &mut rng)
                    .map_err(field)
            }
        }
    }
}

/// `P(x | w)` from `P(x)` and `P(w | x)`; unused outputs get a uniform row.
fn reverse(p: &Pmf, ch: &Channel) -> nusc_core::Result<Channel> {
    let joint = JointPmf::from_input_and_channel(p, ch)?;
    joint.conditional(1, 0)
}

pub fn build_source(spec: &SourceSpec, base: &Path) -> Result<JointPmf> {
    let field = |e: nusc_core::Error| HarnessError::config("source", e);
    match spec {
        SourceSpec::Dsbs { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(HarnessError::config("source.dsbs.p", format!("must lie in [0, 1], got {p}")));
            }
            let b = Alphabet::binary();
            JointPmf::new(vec![b.clone(), b], vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0]).map_err(field)
        }
        SourceSpec::BlockDiag { masses, block } => {
            if masses.is_empty() {
                return Err(HarnessError::config("source.block_diag.masses", "needs at least one block"));
            }
            if *block == 0 {
                return Err(HarnessError::config("source.block_diag.block", "must be positive"));
            }
            let k = masses.len() * block;
            let mut mass = vec![0.0; k * k];
            for (b, &m) in masses.iter().enumerate() {
                for i in 0..*block {
                    for j in 0..*block {
                        mass[(b * block + i) * k + b * block + j] = m / (block * block) as f64;
                    }
                }
            }
            JointPmf::new(vec![Alphabet::indexed(k), Alphabet::indexed(k)], mass)
                .map_err(|e| HarnessError::config("source.block_diag.masses", e))
        }
        SourceSpec::Inline { mass, rows, cols } => {
            if mass.is_empty() || mass[0].is_empty() || mass.iter().any(|r| r.len() != mass[0].len()) {
                return Err(HarnessError::config("source.inline.mass", "must be a nonempty rectangular matrix"));
            }
            let labels = |given: &Option<Vec<String>>, k: usize, name: &str| -> Result<Alphabet> {
                match given {
                    None => Ok(Alphabet::indexed(k)),
                    Some(v) if v.len() == k => Alphabet::new(v.iter().map(String::as_str))
                        .map_err(|e| HarnessError::config(format!("source.inline.{name}"), e)),
                    Some(v) => Err(HarnessError::config(
                        format!("source.inline.{name}"),
                        format!("has {} labels, the matrix needs {k}", v.len()),
                    )),
                }
            };
            let a = labels(rows, mass.len(), "rows")?;
            let b = labels(cols, mass[0].len(), "cols")?;
            JointPmf::new(vec![a, b], mass.concat()).map_err(|e| HarnessError::config("source.inline.mass", e))
        }
        SourceSpec::File { path } => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| HarnessError::io(&full, e))?;
            format::read_joint(&text)
        }
    }
}

fn build_channel(spec: &ChannelSpec, input: &Alphabet, base: &Path, field: &str) -> Result<Channel> {
    let err = |e: nusc_core::Error| HarnessError::config(field, e);
    match spec {
        ChannelSpec::Identity => Ok(Channel::identity(input.clone())),
        ChannelSpec::Bsc(p) => {
            if input.len() != 2 {
                return Err(HarnessError::config(field, "bsc needs a binary input"));
            }
            let b = Channel::bsc(*p).map_err(err)?;
            let rows = (0..2).map(|i| b.row(i).to_vec()).collect();
            Channel::new(input.clone(), input.clone(), rows).map_err(err)
        }
        ChannelSpec::Rows(rows) => {
            let k = rows.first().map_or(0, Vec::len);
            Channel::new(input.clone(), Alphabet::indexed(k), rows.clone()).map_err(err)
        }
        ChannelSpec::File(path) => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| HarnessError::io(&full, e))?;
            let ch = format::read_channel(&text)?;
            if ch.input() != input {
                return Err(HarnessError::config(field, "channel input alphabet differs from the source alphabet"));
            }
            Ok(ch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_is_named() {
        let e = ExperimentConfig::from_json(r#"{"source": {"dsbs": {"p": 0.1}}, "n": [4], "trails": 3}"#).unwrap_err();
        assert!(e.to_string().contains("trails"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn type_error_names_the_path() {
        let e = ExperimentConfig::from_json(r#"{"source": {"dsbs": {"p": "x"}}, "n": [4]}"#).unwrap_err();
        assert!(e.to_string().contains("source.dsbs.p"), "{e}");
    }

    #[test]
    fn block_diag_is_uniform_within_blocks() {
        let j = build_source(&SourceSpec::BlockDiag { masses: vec![0.6, 0.4], block: 2 }, Path::new(".")).unwrap();
        assert_eq!(j.dims(), &[4, 4]);
        assert!((j.prob(&[0, 1]) - 0.15).abs() < 1e-15);
        assert!((j.prob(&[3, 2]) - 0.1).abs() < 1e-15);
        assert_eq!(j.prob(&[0, 2]), 0.0);
    }

    #[test]
    fn kind_mismatch_is_a_config_error() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "sw", "source": {"dsbs": {"p": 0.1}}, "n": [4]}"#).unwrap();
        let e = c.validate(ExperimentKind::Wz).unwrap_err();
        assert!(e.to_string().contains("experiment"));
    }
}
