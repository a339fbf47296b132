//! Every metric name the harness may emit.

use crate::config::ExperimentKind;

/// Codebook-level metrics emitted by each experiment kind.
pub fn codebook_metrics(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Resolve => &["resolvability_gap", "rate", "codebook_rows", "rate_rounding"],
        ExperimentKind::Wz => &[
            "uniformity_v",
            "avg_distortion",
            "distortion_first_n",
            "expected_distortion",
            "decode_err",
            "atypicality",
            "fallback_rate",
            "n_effective",
            "codebook_rows",
            "codebook_cols",
            "seed_bins",
            "rate",
            "rate_prime",
            "certified_fraction",
            "audit_conditions",
            "audit_violations",
            "audit_symbol_violations",
            "audit_worst_slack",
        ],
        ExperimentKind::Sw => &[
            "joint_uniformity_v",
            "block_err",
            "encoder_fallback_rate",
            "decode_ambiguity_rate",
            "u_rows",
            "x_rows",
            "x_cols",
            "y_rows",
            "seed_bins",
            "total_len",
            "rate_x",
            "rate_y",
            "audit_conditions",
            "audit_violations",
            "audit_symbol_violations",
            "audit_worst_slack",
        ],
        ExperimentKind::Dlc => &[
            "joint_uniformity_v",
            "composed_uniformity_v",
            "avg_distortion_x",
            "avg_distortion_y",
            "baseline_x",
            "baseline_y",
            "rate_x",
            "rate_y",
            "inner_block_err",
            "overhead",
            "accounting_violations",
            "audit_conditions",
            "audit_violations",
            "audit_symbol_violations",
            "audit_worst_slack",
        ],
        ExperimentKind::Bounds => &["kl_gap_bound", "list_size_bound", "sampler_bound", "coupling_bound", "mu"],
    }
}

/// Per-trial metrics emitted by each experiment kind.
pub fn trial_metrics(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Resolve | ExperimentKind::Bounds => &[],
        ExperimentKind::Wz => &["trial_distortion", "trial_distortion_first_n", "trial_decode_error", "trial_atypical", "trial_fallback"],
        ExperimentKind::Sw => &["trial_block_error", "trial_fallback", "trial_ambiguous"],
        ExperimentKind::Dlc => &[
            "trial_distortion_x",
            "trial_distortion_y",
            "trial_baseline_x",
            "trial_baseline_y",
            "trial_inner_block_err",
            "trial_accounting_holds",
        ],
    }
}

pub const FLAGS: &[&str] = &["exact", "mc", "undersampled"];

pub fn is_registered(kind: ExperimentKind, metric: &str) -> bool {
    codebook_metrics(kind).contains(&metric) || trial_metrics(kind).contains(&metric)
}
