//! Diagnostic renderers for the command line.

use serde_json::{json, Value};

use crate::depdb::MatchKind;
use crate::scan::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Sarif,
}

pub fn render(diags: &[Diagnostic], format: OutputFormat) -> String {
    match format {
        OutputFormat::Text => render_text(diags),
        OutputFormat::Json => render_json(diags),
        OutputFormat::Sarif => render_sarif(diags),
    }
}

/// `file:line:col message`, one line per diagnostic.
pub fn render_text(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{}:{}:{} {}\n", d.span.file, d.span.start_line, d.span.start_col, d.rendered_message))
        .collect()
}

pub fn render_json(diags: &[Diagnostic]) -> String {
    let mut s = serde_json::to_string_pretty(diags).expect("diagnostics serialize");
    s.push('\n');
    s
}

const RULES: [(&str, &str); 3] = [
    ("Decorator", "Use of an API marked with a deprecation decorator"),
    ("WarningCall", "Use of an API that emits a deprecation warning"),
    ("Docstring", "Use of an API whose docstring declares it deprecated"),
];

/// Minimal SARIF 2.1.0 log with one run.
pub fn sarif_value(diags: &[Diagnostic]) -> Value {
    let rules: Vec<Value> = RULES
        .iter()
        .map(|(id, text)| json!({ "id": id, "shortDescription": { "text": text } }))
        .collect();
    let results: Vec<Value> = diags
        .iter()
        .map(|d| {
            let level = if d.approximate { "note" } else { "warning" };
            json!({
                "ruleId": d.record.strategy.as_str(),
                "level": level,
                "message": { "text": d.rendered_message },
                "locations": [{
                    "physicalLocation": {
                        "artifactLocation": { "uri": d.span.file.replace('\\', "/") },
                        "region": {
                            "startLine": d.span.start_line,
                            "startColumn": d.span.start_col + 1,
                            "endLine": d.span.end_line,
                            "endColumn": d.span.end_col + 1,
                        }
                    }
                }],
                "properties": {
                    "fqn": d.matched_fqn,
                    "matchKind": match d.match_kind {
                        MatchKind::Exact => "exact",
                        MatchKind::Alias => "alias",
                        MatchKind::Suffix => "suffix",
                    },
                }
            })
        })
        .collect();
    json!({
        "$schema": "https://json.schemastore.org/sarif-2.1.0.json",
        "version": "2.1.0",
        "runs": [{
            "tool": {
                "driver": {
                    "name": "deprscan",
                    "version": env!("CARGO_PKG_VERSION"),
                    "rules": rules,
                }
            },
            "results": results,
        }]
    })
}

pub fn render_sarif(diags: &[Diagnostic]) -> String {
    let mut s = serde_json::to_string_pretty(&sarif_value(diags)).expect("sarif serializes");
    s.push('\n');
    s
}
