//! Resolving client-code usages against a deprecation database.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::depdb::{DeprecationDb, Match, MatchKind};
use crate::error::{Error, Result};
use crate::extractor::DeprecationRecord;
use crate::pysrc::{self, walk_preorder, NodeKind, SourceSpan, SyntaxError, SyntaxNode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub target: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarImport {
    pub module: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasMap {
    /// Local dotted prefix to library dotted prefix.
    pub bindings: BTreeMap<String, Binding>,
    pub star_modules: Vec<StarImport>,
    /// Relative imports, which cannot be tied to a library.
    pub unresolved: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub fqn: String,
    /// Produced from a star import rather than an explicit binding.
    pub approximate: bool,
}

/// Import bindings of a module, in source order; later bindings shadow
/// earlier ones.
pub fn build_alias_map(module: &SyntaxNode) -> AliasMap {
    let mut map = AliasMap::default();
    for node in walk_preorder(module) {
        let Some(stmt) = &node.import else { continue };
        match node.kind {
            NodeKind::Import => {
                for n in &stmt.names {
                    let span = n.span.clone();
                    match &n.asname {
                        Some(local) => {
                            map.bindings.insert(local.clone(), Binding { target: n.name.clone(), span });
                        }
                        None => {
                            let mut prefix = String::new();
                            for seg in n.name.split('.') {
                                if !prefix.is_empty() {
                                    prefix.push('.');
                                }
                                prefix.push_str(seg);
                                map.bindings.insert(prefix.clone(), Binding { target: prefix.clone(), span: span.clone() });
                            }
                        }
                    }
                }
            }
            NodeKind::ImportFrom => {
                let module = match (&stmt.module, stmt.level) {
                    (Some(m), 0) => m,
                    _ => {
                        log::debug!("{}: relative import ignored", node.span);
                        map.unresolved.push(node.span.clone());
                        continue;
                    }
                };
                for n in &stmt.names {
                    if n.name == "*" {
                        map.star_modules.retain(|s| &s.module != module);
                        map.star_modules.push(StarImport { module: module.clone(), span: n.span.clone() });
                        continue;
                    }
                    let local = n.asname.clone().unwrap_or_else(|| n.name.clone());
                    map.bindings.insert(local, Binding { target: format!("{module}.{}", n.name), span: n.span.clone() });
                }
            }
            _ => {}
        }
    }
    map
}

/// Candidate fully qualified names for a dotted usage: the longest bound
/// prefix substituted, then one guess per star-imported module.
pub fn resolve_usage(expr: &str, aliases: &AliasMap) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::new();
    let mut ends: Vec<usize> = expr.match_indices('.').map(|(i, _)| i).collect();
    ends.push(expr.len());
    for &end in ends.iter().rev() {
        if let Some(b) = aliases.bindings.get(&expr[..end]) {
            out.push(Candidate { fqn: format!("{}{}", b.target, &expr[end..]), approximate: false });
            break;
        }
    }
    for s in &aliases.star_modules {
        let fqn = format!("{}.{expr}", s.module);
        if !out.iter().any(|c| c.fqn == fqn) {
            out.push(Candidate { fqn, approximate: true });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub span: SourceSpan,
    /// Fully qualified name of the matched record.
    pub matched_fqn: String,
    /// The name the usage resolved to before database lookup.
    pub resolved: String,
    pub match_kind: MatchKind,
    pub approximate: bool,
    pub record: DeprecationRecord,
    pub rendered_message: String,
}

pub fn render_message(record: &DeprecationRecord, approximate: bool) -> String {
    let mut s = format!("deprecated: {}", record.fqn);
    if let Some(m) = &record.message {
        s.push_str(" — ");
        s.push_str(m);
    }
    if approximate {
        s.push_str(" [approximate match]");
    }
    s
}

/// Most informative record among one lookup's matches: one with a message
/// if there is any, else the first.
fn pick<'a>(matches: &[Match<'a>]) -> Match<'a> {
    matches.iter().find(|m| m.record.message.is_some()).copied().unwrap_or(matches[0])
}

fn diagnose(node: &SyntaxNode, aliases: &AliasMap, db: &DeprecationDb) -> Option<Diagnostic> {
    let path = node.dotted_path()?;
    for cand in resolve_usage(&path, aliases) {
        let matches = db.lookup(&cand.fqn);
        if matches.is_empty() {
            continue;
        }
        let m = pick(&matches);
        let approximate = cand.approximate || m.approximate();
        return Some(Diagnostic {
            span: node.span.clone(),
            matched_fqn: m.record.fqn.clone(),
            resolved: cand.fqn,
            match_kind: m.kind,
            approximate,
            record: m.record.clone(),
            rendered_message: render_message(m.record, approximate),
        });
    }
    None
}

/// Every Name and Attribute usage that resolves to a deprecated element,
/// sorted by span.
pub fn scan_tree(module: &SyntaxNode, db: &DeprecationDb) -> Vec<Diagnostic> {
    let aliases = build_alias_map(module);
    let mut out: Vec<Diagnostic> = walk_preorder(module)
        .filter(|n| matches!(n.kind, NodeKind::Name | NodeKind::Attribute))
        .filter_map(|n| diagnose(n, &aliases, db))
        .collect();
    out.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.matched_fqn.cmp(&b.matched_fqn)));
    out
}

pub fn scan_file(path: &Path, source: &str, db: &DeprecationDb) -> Result<Vec<Diagnostic>, SyntaxError> {
    let tree = pysrc::parse_file(path, source)?;
    Ok(scan_tree(&tree, db))
}

#[derive(Debug, Default)]
pub struct ProjectScan {
    pub diagnostics: Vec<Diagnostic>,
    pub files_scanned: usize,
    pub errors: Vec<(PathBuf, String)>,
}

/// Scans a file, or every `.py` file under a directory (hidden directories
/// and `__pycache__` skipped). Reported paths are relative to the
/// directory.
pub fn scan_project(project: &Path, db: &DeprecationDb) -> Result<ProjectScan> {
    let meta = std::fs::metadata(project).map_err(|e| Error::io(project, e))?;
    let files: Vec<(PathBuf, PathBuf)> = if meta.is_file() {
        vec![(project.to_path_buf(), project.to_path_buf())]
    } else {
        let mut v = Vec::new();
        let walker = walkdir::WalkDir::new(project).sort_by_file_name().into_iter().filter_entry(|e| {
            e.depth() == 0
                || !e.file_type().is_dir()
                || !(e.file_name().to_string_lossy().starts_with('.') || e.file_name() == "__pycache__")
        });
        for entry in walker {
            let entry = entry.map_err(|e| {
                let path = e.path().unwrap_or(project).to_path_buf();
                Error::io(path, e.into())
            })?;
            if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "py") {
                let rel = entry.path().strip_prefix(project).unwrap_or(entry.path()).to_path_buf();
                v.push((entry.into_path(), rel));
            }
        }
        v
    };
    let mut out = ProjectScan { files_scanned: files.len(), ..ProjectScan::default() };
    for (abs, rel) in files {
        let bytes = std::fs::read(&abs).map_err(|e| Error::io(&abs, e))?;
        let display = rel.to_string_lossy().replace('\\', "/");
        match pysrc::parse_bytes(Path::new(&display), &bytes) {
            Ok(tree) => out.diagnostics.extend(scan_tree(&tree, db)),
            Err(e) => {
                log::warn!("{e}");
                out.errors.push((rel, e.to_string()));
            }
        }
    }
    Ok(out)
}
