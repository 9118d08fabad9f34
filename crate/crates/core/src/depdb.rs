//! The persisted deprecation database.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extractor::{DeprecationRecord, Extraction, ReExport, Strategy};

pub const SCHEMA_VERSION: u64 = 1;

/// Upper bound on alias rewrites explored per lookup.
const MAX_ALIAS_STEPS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryInfo {
    pub name: String,
    pub version: Option<String>,
    pub record_count: usize,
}

#[derive(Serialize, Deserialize)]
struct DbFile {
    schema_version: u64,
    generated_at: DateTime<Utc>,
    libraries: Vec<LibraryInfo>,
    records: Vec<DeprecationRecord>,
    #[serde(default)]
    aliases: Vec<ReExport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatchKind {
    Exact,
    Alias,
    Suffix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match<'a> {
    pub record: &'a DeprecationRecord,
    pub kind: MatchKind,
}

impl Match<'_> {
    pub fn approximate(&self) -> bool {
        self.kind == MatchKind::Suffix
    }
}

type RecordKey<'a> = (&'a str, Strategy, &'a str, u32);

fn key(r: &DeprecationRecord) -> RecordKey<'_> {
    (&r.fqn, r.strategy, &r.span.file, r.span.start_line)
}

fn tail2(fqn: &str) -> Option<&str> {
    let mut dots = fqn.rmatch_indices('.');
    dots.next()?;
    Some(match dots.next() {
        Some((i, _)) => &fqn[i + 1..],
        None => fqn,
    })
}

#[derive(Debug, Clone)]
pub struct DeprecationDb {
    pub schema_version: u64,
    pub generated_at: DateTime<Utc>,
    libraries: Vec<LibraryInfo>,
    records: Vec<DeprecationRecord>,
    aliases: Vec<ReExport>,
    by_fqn: HashMap<String, Vec<usize>>,
    by_tail: HashMap<String, Vec<usize>>,
    by_alias: HashMap<String, Vec<usize>>,
}

impl PartialEq for DeprecationDb {
    fn eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.generated_at == other.generated_at
            && self.libraries == other.libraries
            && self.records == other.records
            && self.aliases == other.aliases
    }
}

impl Eq for DeprecationDb {}

impl Default for DeprecationDb {
    fn default() -> Self {
        Self::build(Vec::new(), Vec::new(), Vec::new())
    }
}

impl DeprecationDb {
    /// Normalizes the parts into a valid database: records sorted with
    /// duplicate keys dropped (earliest in input order wins), libraries
    /// completed from the records and recounted, aliases sorted.
    pub fn build(libraries: Vec<LibraryInfo>, records: Vec<DeprecationRecord>, aliases: Vec<ReExport>) -> Self {
        let mut seen = HashSet::new();
        let mut kept: Vec<DeprecationRecord> = Vec::with_capacity(records.len());
        for r in records {
            if seen.insert((r.fqn.clone(), r.strategy, r.span.file.to_string(), r.span.start_line)) {
                kept.push(r);
            }
        }
        Self::assemble(Utc::now(), libraries, kept, aliases)
    }

    fn assemble(
        generated_at: DateTime<Utc>,
        mut libraries: Vec<LibraryInfo>,
        mut records: Vec<DeprecationRecord>,
        mut aliases: Vec<ReExport>,
    ) -> Self {
        records.sort();
        let mut names: HashSet<String> = HashSet::new();
        libraries.retain(|l| names.insert(l.name.clone()));
        for r in &records {
            if names.insert(r.library.clone()) {
                libraries.push(LibraryInfo { name: r.library.clone(), version: r.library_version.clone(), record_count: 0 });
            }
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for r in &records {
            *counts.entry(&r.library).or_default() += 1;
        }
        for l in &mut libraries {
            l.record_count = counts.get(l.name.as_str()).copied().unwrap_or(0);
        }
        libraries.sort_by(|a, b| a.name.cmp(&b.name));
        aliases.sort();
        aliases.dedup();
        let mut db = DeprecationDb {
            schema_version: SCHEMA_VERSION,
            generated_at,
            libraries,
            records,
            aliases,
            by_fqn: HashMap::new(),
            by_tail: HashMap::new(),
            by_alias: HashMap::new(),
        };
        db.reindex();
        db
    }

    fn reindex(&mut self) {
        self.by_fqn.clear();
        self.by_tail.clear();
        self.by_alias.clear();
        for (i, r) in self.records.iter().enumerate() {
            self.by_fqn.entry(r.fqn.clone()).or_default().push(i);
            if let Some(t) = tail2(&r.fqn) {
                self.by_tail.entry(t.to_owned()).or_default().push(i);
            }
        }
        for (i, a) in self.aliases.iter().enumerate() {
            self.by_alias.entry(a.alias.clone()).or_default().push(i);
        }
    }

    pub fn from_extraction(x: &Extraction) -> Self {
        let lib = LibraryInfo { name: x.library.clone(), version: x.library_version.clone(), record_count: 0 };
        Self::build(vec![lib], x.records.clone(), x.reexports.clone())
    }

    pub fn with_generated_at(mut self, at: DateTime<Utc>) -> Self {
        self.generated_at = at;
        self
    }

    pub fn libraries(&self) -> &[LibraryInfo] {
        &self.libraries
    }

    pub fn records(&self) -> &[DeprecationRecord] {
        &self.records
    }

    pub fn aliases(&self) -> &[ReExport] {
        &self.aliases
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_json(&self) -> String {
        let file = DbFile {
            schema_version: self.schema_version,
            generated_at: self.generated_at,
            libraries: self.libraries.clone(),
            records: self.records.clone(),
            aliases: self.aliases.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("db serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let found = value
            .get("schema_version")
            .ok_or_else(|| Error::Format("missing schema_version".into()))?
            .as_u64()
            .ok_or_else(|| Error::Format("schema_version is not an unsigned integer".into()))?;
        if found != SCHEMA_VERSION {
            return Err(Error::Schema { found, supported: SCHEMA_VERSION });
        }
        let file: DbFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
        validate(&file)?;
        let mut db = DeprecationDb {
            schema_version: file.schema_version,
            generated_at: file.generated_at,
            libraries: file.libraries,
            records: file.records,
            aliases: file.aliases,
            by_fqn: HashMap::new(),
            by_tail: HashMap::new(),
            by_alias: HashMap::new(),
        };
        db.reindex();
        Ok(db)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Union of both databases. On duplicate record keys and library names
    /// `self` wins.
    pub fn merge(&self, other: &DeprecationDb) -> DeprecationDb {
        let mut seen: HashSet<RecordKey<'_>> = self.records.iter().map(key).collect();
        let mut records = self.records.clone();
        for r in &other.records {
            if seen.insert(key(r)) {
                records.push(r.clone());
            }
        }
        let libraries = self.libraries.iter().chain(&other.libraries).cloned().collect();
        let aliases = self.aliases.iter().chain(&other.aliases).cloned().collect();
        let at = self.generated_at.max(other.generated_at);
        Self::assemble(at, libraries, records, aliases)
    }

    fn exact(&self, fqn: &str) -> impl Iterator<Item = &DeprecationRecord> {
        self.by_fqn.get(fqn).into_iter().flatten().map(|&i| &self.records[i])
    }

    /// Paths `fqn` can be rewritten to through one alias.
    fn rewrites(&self, fqn: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut prefix_ends: Vec<usize> = fqn.match_indices('.').map(|(i, _)| i).collect();
        prefix_ends.push(fqn.len());
        for end in prefix_ends {
            for &i in self.by_alias.get(&fqn[..end]).into_iter().flatten() {
                if let Some(r) = self.aliases[i].apply(fqn) {
                    out.push(r);
                }
            }
        }
        out
    }

    /// Exact matches; failing that, matches reached through re-export
    /// aliases; failing that, records sharing the longest common suffix of
    /// at least two segments.
    pub fn lookup(&self, fqn: &str) -> Vec<Match<'_>> {
        let exact: Vec<Match<'_>> = self.exact(fqn).map(|record| Match { record, kind: MatchKind::Exact }).collect();
        if !exact.is_empty() {
            return exact;
        }
        let aliased = self.lookup_aliases(fqn);
        if !aliased.is_empty() {
            return aliased;
        }
        self.lookup_suffix(fqn)
    }

    /// Breadth-first over alias rewrites; the first depth with any hit wins.
    fn lookup_aliases(&self, fqn: &str) -> Vec<Match<'_>> {
        if self.aliases.is_empty() {
            return Vec::new();
        }
        let mut visited: HashSet<String> = HashSet::from([fqn.to_owned()]);
        let mut frontier = VecDeque::from([fqn.to_owned()]);
        let mut steps = 0;
        while !frontier.is_empty() && steps < MAX_ALIAS_STEPS {
            let mut next = VecDeque::new();
            let mut hits: Vec<usize> = Vec::new();
            for q in frontier {
                steps += 1;
                for r in self.rewrites(&q) {
                    if visited.insert(r.clone()) {
                        hits.extend(self.by_fqn.get(&r).into_iter().flatten());
                        next.push_back(r);
                    }
                }
            }
            if !hits.is_empty() {
                hits.sort_unstable();
                hits.dedup();
                return hits.into_iter().map(|i| Match { record: &self.records[i], kind: MatchKind::Alias }).collect();
            }
            frontier = next;
        }
        Vec::new()
    }

    fn lookup_suffix(&self, fqn: &str) -> Vec<Match<'_>> {
        let Some(tail) = tail2(fqn) else { return Vec::new() };
        let query: Vec<&str> = fqn.split('.').collect();
        let common = |r: &DeprecationRecord| {
            r.fqn.split('.').rev().zip(query.iter().rev()).take_while(|(a, b)| a == *b).count()
        };
        let candidates: Vec<(usize, usize)> =
            self.by_tail.get(tail).into_iter().flatten().map(|&i| (i, common(&self.records[i]))).collect();
        let Some(best) = candidates.iter().map(|&(_, k)| k).max() else { return Vec::new() };
        let mut idx: Vec<usize> = candidates.into_iter().filter(|&(_, k)| k == best).map(|(i, _)| i).collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| Match { record: &self.records[i], kind: MatchKind::Suffix }).collect()
    }
}

fn validate(file: &DbFile) -> Result<()> {
    let bad = |m: String| Err(Error::Format(m));
    for w in file.records.windows(2) {
        if w[0] > w[1] {
            return bad(format!("records not sorted at {}", w[1].fqn));
        }
    }
    let mut keys = HashSet::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &file.records {
        if r.fqn.is_empty() || r.fqn.split('.').any(str::is_empty) {
            return bad(format!("malformed fqn {:?}", r.fqn));
        }
        if !keys.insert(key(r)) {
            return bad(format!("duplicate record {} ({})", r.fqn, r.strategy.as_str()));
        }
        *counts.entry(&r.library).or_default() += 1;
    }
    let mut names = HashSet::new();
    for l in &file.libraries {
        if !names.insert(l.name.as_str()) {
            return bad(format!("library {} listed twice", l.name));
        }
        let n = counts.get(l.name.as_str()).copied().unwrap_or(0);
        if n != l.record_count {
            return bad(format!("library {} declares {} records, has {}", l.name, l.record_count, n));
        }
    }
    if let Some(lib) = counts.keys().find(|n| !names.contains(*n)) {
        return bad(format!("records reference unlisted library {lib}"));
    }
    Ok(())
}
