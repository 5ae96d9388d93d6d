//! Report rendering. JSON output is canonical, so identical runs produce
//! identical bytes.

use std::fmt::Write;

use conelab_core::json::{element_to_json, float, to_canonical_string};
use conelab_core::{MutationReport, SearchOutcome, SuiteReport};
use serde_json::{json, Value};

use crate::{Format, WitnessKind};

fn json_lines(values: Vec<Value>) -> String {
    to_canonical_string(&Value::Array(values)) + "\n"
}

fn text_report(out: &mut String, r: &SuiteReport) {
    let _ = writeln!(
        out,
        "{} on {}: {} (max violation {:.3e}, seed {}, {} trials, tol {:.1e})",
        r.suite,
        r.params.shape,
        r.verdict,
        r.max_violation,
        r.params.seed,
        r.params.trials,
        r.params.tol
    );
    if let Some(reason) = &r.reason {
        let _ = writeln!(out, "  reason: {reason}");
    }
    for c in &r.checks {
        let _ = write!(
            out,
            "  {:<12} {:<32} {:.3e} / {:.1e}",
            c.verdict.as_str(),
            c.name,
            c.max_violation,
            c.tol
        );
        if c.searches > 0 {
            let _ = write!(out, "  witnesses {}/{}", c.found, c.searches);
        }
        if let Some(note) = &c.note {
            let _ = write!(out, "  ({note})");
        }
        out.push('\n');
    }
}

/// Suite reports as a JSON array, or a human-readable summary.
pub fn emit_report(reports: &[SuiteReport], format: Format) -> String {
    match format {
        Format::Json => json_lines(reports.iter().map(SuiteReport::to_json).collect()),
        Format::Text => {
            let mut out = String::new();
            for r in reports {
                text_report(&mut out, r);
            }
            out
        }
    }
}

pub fn emit_mutations(reports: &[MutationReport], format: Format) -> String {
    match format {
        Format::Json => json_lines(reports.iter().map(MutationReport::to_json).collect()),
        Format::Text => {
            let mut out = String::new();
            for m in reports {
                let _ = writeln!(
                    out,
                    "{} under {}: {}",
                    m.report.suite,
                    m.mutation,
                    match (m.applicable, m.harness_ok) {
                        (false, _) => "not applicable",
                        (true, true) => "detected as expected",
                        (true, false) => "EXPECTATIONS NOT MET",
                    }
                );
                for e in &m.expectations {
                    let _ = writeln!(
                        out,
                        "  {:<32} expected {:<4} observed {:<12} {:.3e}{}",
                        e.check,
                        e.expected.as_str(),
                        e.observed.as_str(),
                        e.max_violation,
                        if e.met { "" } else { "  <- unmet" }
                    );
                }
            }
            out
        }
    }
}

fn kind_name(kind: WitnessKind) -> &'static str {
    match kind {
        WitnessKind::Nonadditivity => "nonadditivity",
        WitnessKind::Squaring => "squaring",
        WitnessKind::SeminormGap => "seminorm-gap",
    }
}

pub fn emit_witness(
    kind: WitnessKind,
    budget: usize,
    seed: u64,
    outcome: &SearchOutcome,
    format: Format,
) -> String {
    let name = kind_name(kind);
    match format {
        Format::Json => {
            let mut v = json!({ "kind": name, "budget": budget, "seed": seed });
            match outcome {
                SearchOutcome::Central {
                    max_violation,
                    samples,
                } => {
                    v["outcome"] = json!("Central");
                    v["max_violation"] = float(*max_violation);
                    v["samples"] = json!(samples);
                }
                SearchOutcome::Found(w) => {
                    v["outcome"] = json!("Found");
                    v["witness"] = w.to_json();
                }
                SearchOutcome::Inconclusive { reason } => {
                    v["outcome"] = json!("Inconclusive");
                    v["reason"] = json!(reason);
                }
            }
            to_canonical_string(&v) + "\n"
        }
        Format::Text => match outcome {
            SearchOutcome::Central {
                max_violation,
                samples,
            } => format!(
                "{name}: central; conditions hold on {samples} samples (max violation {max_violation:.3e})\n"
            ),
            SearchOutcome::Found(w) => {
                let mut out = format!(
                    "{name}: witness found, lhs {:.6e} rhs {:.6e} margin {:.3e}\n",
                    w.lhs, w.rhs, w.margin
                );
                for (k, x) in &w.elements {
                    let _ = writeln!(out, "  {k} = {}", to_canonical_string(&element_to_json(x)));
                }
                out
            }
            SearchOutcome::Inconclusive { reason } => format!("{name}: inconclusive: {reason}\n"),
        },
    }
}
