//! Mining of deprecated API elements from library sources.
//!
//! Three rules are applied while walking each module:
//! a definition carrying a deprecation decorator, a warning call inside a
//! function body that passes a deprecation warning category, and a class
//! docstring mentioning the deprecation keyword.

mod reexport;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::path::{Component, Path, PathBuf};
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::pysrc::{self, ArgKind, DecoratorRef, NodeKind, SourceSpan, SyntaxNode};

pub use reexport::{collect_reexports, ReExport};

pub const DEFAULT_EXCLUDE_DIRS: &[&str] = &["tests", "test", "benchmarks", "examples"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Function,
    Method,
    Class,
    /// Only produced when module-level warning calls are enabled.
    Module,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Decorator,
    WarningCall,
    Docstring,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Decorator => "Decorator",
            Strategy::WarningCall => "WarningCall",
            Strategy::Docstring => "Docstring",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeprecationRecord {
    pub fqn: String,
    pub element_kind: ElementKind,
    pub strategy: Strategy,
    pub message: Option<String>,
    pub span: SourceSpan,
    pub library: String,
    pub library_version: Option<String>,
}

impl Ord for DeprecationRecord {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.fqn, self.strategy, &self.span)
            .cmp(&(&other.fqn, other.strategy, &other.span))
            .then_with(|| self.element_kind.cmp(&other.element_kind))
            .then_with(|| self.message.cmp(&other.message))
            .then_with(|| self.library.cmp(&other.library))
            .then_with(|| self.library_version.cmp(&other.library_version))
    }
}

impl PartialOrd for DeprecationRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    decorator_pattern: Regex,
    pub warning_categories: BTreeSet<String>,
    docstring_keyword: String,
    pub check_function_docstrings: bool,
    pub include_pending: bool,
    /// Attribute warning calls outside any function to the module itself.
    pub module_level_warnings: bool,
    pub exclude_dirs: Vec<String>,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            decorator_pattern: compile_pattern("deprecat").expect("default pattern"),
            warning_categories: ["DeprecationWarning", "FutureWarning"].into_iter().map(String::from).collect(),
            docstring_keyword: "deprecat".to_owned(),
            check_function_docstrings: false,
            include_pending: false,
            module_level_warnings: false,
            exclude_dirs: DEFAULT_EXCLUDE_DIRS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn compile_pattern(pattern: &str) -> Result<Regex> {
    if pattern.is_empty() {
        return Err(Error::Config("decorator pattern is empty".into()));
    }
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::Config(format!("decorator pattern: {e}")))
}

impl ExtractorConfig {
    /// Case-insensitive regex matched against a decorator's terminal name
    /// segment. A plain word behaves as a substring test.
    pub fn with_decorator_pattern(mut self, pattern: &str) -> Result<Self> {
        self.decorator_pattern = compile_pattern(pattern)?;
        Ok(self)
    }

    pub fn with_docstring_keyword(mut self, keyword: &str) -> Result<Self> {
        if keyword.trim().is_empty() {
            return Err(Error::Config("docstring keyword is empty".into()));
        }
        self.docstring_keyword = keyword.to_lowercase();
        Ok(self)
    }

    pub fn decorator_pattern(&self) -> &str {
        self.decorator_pattern.as_str()
    }

    pub fn docstring_keyword(&self) -> &str {
        &self.docstring_keyword
    }

    pub fn validate(&self) -> Result<()> {
        if self.warning_categories.is_empty() {
            return Err(Error::Config("no warning categories".into()));
        }
        Ok(())
    }

    fn is_category(&self, dotted: &str) -> bool {
        let terminal = last_segment(dotted);
        (self.include_pending && terminal == "PendingDeprecationWarning")
            || self.warning_categories.iter().any(|c| last_segment(c) == terminal)
    }
}

fn last_segment(dotted: &str) -> &str {
    dotted.rsplit('.').next().unwrap_or(dotted)
}

/// First decorator whose terminal segment matches the configured pattern.
pub fn matching_decorator<'a>(decorators: &'a [DecoratorRef], cfg: &ExtractorConfig) -> Option<&'a DecoratorRef> {
    decorators.iter().find(|d| cfg.decorator_pattern.is_match(d.terminal_segment()))
}

pub fn is_deprecated_decorator(decorators: &[DecoratorRef], cfg: &ExtractorConfig) -> bool {
    matching_decorator(decorators, cfg).is_some()
}

pub fn is_deprecation_warning_call(node: &SyntaxNode, cfg: &ExtractorConfig) -> bool {
    node.kind == NodeKind::Call
        && node.call_args.iter().any(|a| {
            matches!(a.value_kind, ArgKind::NameRef | ArgKind::AttributeRef) && cfg.is_category(&a.value_text)
        })
}

pub fn docstring_has_keyword(docstring: Option<&str>, cfg: &ExtractorConfig) -> bool {
    docstring.is_some_and(|d| d.to_lowercase().contains(&cfg.docstring_keyword))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c == '_' || unicode_ident::is_xid_start(c) => chars.all(unicode_ident::is_xid_continue),
        _ => false,
    }
}

/// Dotted module segments of a library-relative `.py` path; `__init__.py`
/// contributes no segment.
pub fn module_segments(module_path: &Path) -> Result<Vec<String>> {
    let invalid = || Error::InvalidPath(module_path.display().to_string());
    if module_path.extension().and_then(|e| e.to_str()) != Some("py") {
        return Err(invalid());
    }
    let mut segments = Vec::new();
    for comp in module_path.with_extension("").components() {
        match comp {
            Component::Normal(s) => segments.push(s.to_str().ok_or_else(invalid)?.to_owned()),
            Component::CurDir => {}
            _ => return Err(invalid()),
        }
    }
    if segments.last().map(String::as_str) == Some("__init__") {
        segments.pop();
    }
    if !segments.iter().all(|s| is_identifier(s)) {
        return Err(invalid());
    }
    Ok(segments)
}

pub fn fully_qualified_name(module_path: &Path, scope_stack: &[&str], name: &str) -> Result<String> {
    let mut parts = module_segments(module_path)?;
    parts.extend(scope_stack.iter().map(|s| s.to_string()));
    parts.push(name.to_owned());
    Ok(parts.join("."))
}

/// Collapses whitespace runs; empty messages become `None`.
fn normalize_message(text: &str) -> Option<String> {
    let joined = text.split_whitespace().collect::<Vec<_>>().join(" ");
    (!joined.is_empty()).then_some(joined)
}

fn first_string_arg(args: &[pysrc::ArgRef]) -> Option<String> {
    args.iter().find(|a| a.value_kind == ArgKind::StringLit).and_then(|a| normalize_message(&a.value_text))
}

/// The paragraph of the docstring that starts at the first line mentioning
/// the keyword.
fn docstring_excerpt(doc: &str, keyword: &str) -> Option<String> {
    let lines: Vec<&str> = doc.lines().collect();
    let first = lines.iter().position(|l| l.to_lowercase().contains(keyword))?;
    let para: Vec<&str> = lines[first..].iter().take_while(|l| !l.trim().is_empty()).map(|l| l.trim()).collect();
    normalize_message(&para.join(" "))
}

pub fn extract_message(node: &SyntaxNode, strategy: Strategy, cfg: &ExtractorConfig) -> Option<String> {
    match strategy {
        Strategy::Decorator => matching_decorator(&node.decorators, cfg).and_then(|d| first_string_arg(&d.args)),
        Strategy::WarningCall => first_string_arg(&node.call_args),
        Strategy::Docstring => node.docstring.as_deref().and_then(|d| docstring_excerpt(d, &cfg.docstring_keyword)),
    }
}

struct Frame<'t> {
    name: &'t str,
    is_class: bool,
}

struct Enclosing {
    fqn: String,
    kind: ElementKind,
}

struct FileExtractor<'c> {
    cfg: &'c ExtractorConfig,
    module: Vec<String>,
    out: Vec<DeprecationRecord>,
    seen: HashSet<(String, Strategy)>,
}

impl FileExtractor<'_> {
    fn fqn(&self, scope: &[Frame<'_>], name: &str) -> String {
        let mut parts: Vec<&str> = self.module.iter().map(String::as_str).collect();
        parts.extend(scope.iter().map(|f| f.name));
        parts.push(name);
        parts.join(".")
    }

    fn emit(&mut self, fqn: &str, kind: ElementKind, strategy: Strategy, message: Option<String>, span: &SourceSpan) {
        if !self.seen.insert((fqn.to_owned(), strategy)) {
            return;
        }
        self.out.push(DeprecationRecord {
            fqn: fqn.to_owned(),
            element_kind: kind,
            strategy,
            message,
            span: span.clone(),
            library: String::new(),
            library_version: None,
        });
    }

    fn walk<'t>(&mut self, node: &'t SyntaxNode, scope: &mut Vec<Frame<'t>>, func: Option<&Enclosing>) {
        match node.kind {
            NodeKind::FunctionDef | NodeKind::ClassDef => {
                let Some(name) = node.name.as_deref() else { return };
                let fqn = self.fqn(scope, name);
                let is_class = node.kind == NodeKind::ClassDef;
                let kind = if is_class {
                    ElementKind::Class
                } else if scope.iter().any(|f| f.is_class) {
                    ElementKind::Method
                } else {
                    ElementKind::Function
                };
                if (is_class || self.cfg.check_function_docstrings)
                    && docstring_has_keyword(node.docstring.as_deref(), self.cfg)
                {
                    let msg = extract_message(node, Strategy::Docstring, self.cfg);
                    self.emit(&fqn, kind, Strategy::Docstring, msg, &node.span);
                }
                if is_deprecated_decorator(&node.decorators, self.cfg) {
                    let msg = extract_message(node, Strategy::Decorator, self.cfg);
                    self.emit(&fqn, kind, Strategy::Decorator, msg, &node.span);
                }
                for child in &node.children[..node.header_len.min(node.children.len())] {
                    self.walk(child, scope, func);
                }
                scope.push(Frame { name, is_class });
                if is_class {
                    for child in node.body() {
                        self.walk(child, scope, func);
                    }
                } else {
                    let inner = Enclosing { fqn, kind };
                    for child in node.body() {
                        self.walk(child, scope, Some(&inner));
                    }
                }
                scope.pop();
            }
            _ => {
                if is_deprecation_warning_call(node, self.cfg) {
                    let msg = extract_message(node, Strategy::WarningCall, self.cfg);
                    if let Some(f) = func {
                        self.emit(&f.fqn, f.kind, Strategy::WarningCall, msg, &node.span);
                    } else if self.cfg.module_level_warnings && !self.module.is_empty() {
                        let fqn = self.module.join(".");
                        self.emit(&fqn, ElementKind::Module, Strategy::WarningCall, msg, &node.span);
                    }
                }
                for child in &node.children {
                    self.walk(child, scope, func);
                }
            }
        }
    }
}

/// Applies the three rules to one parsed module. Records are unstamped
/// (empty library) and sorted.
pub fn extract_file(module_path: &Path, root: &SyntaxNode, cfg: &ExtractorConfig) -> Vec<DeprecationRecord> {
    let module = match module_segments(module_path) {
        Ok(m) => m,
        Err(e) => {
            log::warn!("{e}");
            return Vec::new();
        }
    };
    let mut fx = FileExtractor { cfg, module, out: Vec::new(), seen: HashSet::new() };
    fx.walk(root, &mut Vec::new(), None);
    let mut out = fx.out;
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub library: String,
    pub library_version: Option<String>,
    pub records: Vec<DeprecationRecord>,
    pub reexports: Vec<ReExport>,
    pub files_scanned: usize,
    pub skipped: Vec<SkippedFile>,
}

impl Extraction {
    /// One line per skipped file: `path: error`.
    pub fn skipped_report(&self) -> String {
        self.skipped.iter().map(|s| format!("{}: {}\n", s.path.display(), s.error)).collect()
    }
}

/// Directory that module paths are taken relative to: the parent of a
/// package directory, or the directory itself when its name is not an
/// importable identifier (a source checkout, say).
fn module_base(root: &Path) -> PathBuf {
    match root.file_name().and_then(|n| n.to_str()) {
        Some(name) if is_identifier(name) => root.parent().map(Path::to_path_buf).unwrap_or_default(),
        _ => root.to_path_buf(),
    }
}

enum FileOutcome {
    Parsed { records: Vec<DeprecationRecord>, reexports: Vec<ReExport> },
    Skipped(SkippedFile),
}

fn extract_one(base: &Path, path: &Path, cfg: &ExtractorConfig) -> FileOutcome {
    let rel = path.strip_prefix(base).unwrap_or(path);
    let skipped = |error: String| FileOutcome::Skipped(SkippedFile { path: path.to_path_buf(), error });
    let module = match module_segments(rel) {
        Ok(m) => m,
        Err(e) => return skipped(e.to_string()),
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return skipped(e.to_string()),
    };
    let display = rel.to_string_lossy().replace('\\', "/");
    let tree = match pysrc::parse_bytes(Path::new(&display), &bytes) {
        Ok(t) => t,
        Err(e) => return skipped(e.to_string()),
    };
    let records = extract_file(rel, &tree, cfg);
    let reexports = if rel.file_name().is_some_and(|n| n == "__init__.py") {
        collect_reexports(&module, &tree)
    } else {
        Vec::new()
    };
    FileOutcome::Parsed { records, reexports }
}

/// Runs [`extract_file`] over every `.py` file under `root`.
pub fn extract_library(root: &Path, library: &str, version: Option<&str>, cfg: &ExtractorConfig) -> Result<Extraction> {
    cfg.validate()?;
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root, e))?;
    if !meta.is_dir() {
        return Err(Error::io(root, std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory")));
    }
    std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;

    let mut skipped = Vec::new();
    let mut files = Vec::new();
    let walker = WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| {
        e.depth() == 0 || !e.file_type().is_dir() || !cfg.exclude_dirs.iter().any(|x| e.file_name() == x.as_str())
    });
    for entry in walker {
        match entry {
            Ok(e) if e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py") => {
                files.push(e.into_path())
            }
            Ok(_) => {}
            Err(e) => skipped.push(SkippedFile {
                path: e.path().map(Path::to_path_buf).unwrap_or_default(),
                error: e.to_string(),
            }),
        }
    }

    let base = module_base(root);
    let outcomes: Vec<FileOutcome> = files.par_iter().map(|p| extract_one(&base, p, cfg)).collect();

    let library_version = version.map(str::to_owned).or_else(|| detect_version(root));
    let mut records = Vec::new();
    let mut reexports = Vec::new();
    for outcome in outcomes {
        match outcome {
            FileOutcome::Parsed { records: r, reexports: x } => {
                records.extend(r);
                reexports.extend(x);
            }
            FileOutcome::Skipped(s) => {
                log::warn!("skipping {}: {}", s.path.display(), s.error);
                skipped.push(s);
            }
        }
    }
    for r in &mut records {
        r.library = library.to_owned();
        r.library_version = library_version.clone();
    }
    records.sort();
    reexports.sort();
    reexports.dedup();
    Ok(Extraction {
        library: library.to_owned(),
        library_version,
        records,
        reexports,
        files_scanned: files.len(),
        skipped,
    })
}

static VERSION_ASSIGN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?m)^(?:__version__|version)\s*(?::[^=\n]*)?=\s*['"]([^'"\n]+)['"]"#).unwrap()
});
static METADATA_VERSION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?m)^Version:\s*(\S+)").unwrap());

/// Best-effort version of the library rooted at `root`: a version constant
/// in the package, else packaging metadata next to it.
pub fn detect_version(root: &Path) -> Option<String> {
    for name in ["__init__.py", "version.py", "_version.py"] {
        if let Ok(text) = std::fs::read_to_string(root.join(name)) {
            if let Some(c) = VERSION_ASSIGN.captures(&text) {
                return Some(c[1].to_owned());
            }
        }
    }
    let parent = root.parent()?;
    let pkg = root.file_name()?.to_str()?;
    let mut candidates = vec![parent.join("PKG-INFO"), root.join("PKG-INFO")];
    if let Ok(dir) = std::fs::read_dir(parent) {
        let mut infos: Vec<PathBuf> = dir
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name().and_then(|n| n.to_str()).is_some_and(|n| {
                    n.starts_with(&format!("{pkg}-")) && (n.ends_with(".dist-info") || n.ends_with(".egg-info"))
                })
            })
            .collect();
        infos.sort();
        for info in infos {
            candidates.push(info.join("METADATA"));
            candidates.push(info.join("PKG-INFO"));
        }
    }
    candidates.iter().find_map(|p| {
        let text = std::fs::read_to_string(p).ok()?;
        METADATA_VERSION.captures(&text).map(|c| c[1].to_owned())
    })
}

/// Parses `source` as `module_path` and extracts; convenience for callers
/// holding text rather than a tree.
pub fn extract_source(module_path: &Path, source: &str, cfg: &ExtractorConfig) -> Result<Vec<DeprecationRecord>> {
    let display = module_path.to_string_lossy().replace('\\', "/");
    let tree = pysrc::parse_file(Path::new(&display), source)?;
    Ok(extract_file(module_path, &tree, cfg))
}
