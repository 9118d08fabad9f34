//! Re-exports declared in package `__init__` modules, e.g.
//! `from .function_base import trapz` inside `numpy/lib/__init__.py` makes
//! `numpy.lib.trapz` an alias of `numpy.lib.function_base.trapz`.

use serde::{Deserialize, Serialize};

use crate::pysrc::{NodeKind, SyntaxNode};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReExport {
    /// Short dotted path (a package for star re-exports).
    pub alias: String,
    /// Defining dotted path (a module for star re-exports).
    pub target: String,
    /// `from .mod import *`: every public name under `target` is also
    /// reachable under `alias`.
    #[serde(default)]
    pub star: bool,
}

impl ReExport {
    /// Rewrites `fqn` through this alias, if it applies.
    pub fn apply(&self, fqn: &str) -> Option<String> {
        if self.star {
            let rest = fqn.strip_prefix(&self.alias)?.strip_prefix('.')?;
            if rest.starts_with('_') {
                return None;
            }
            Some(format!("{}.{rest}", self.target))
        } else if fqn == self.alias {
            Some(self.target.clone())
        } else {
            let rest = fqn.strip_prefix(&self.alias)?.strip_prefix('.')?;
            Some(format!("{}.{rest}", self.target))
        }
    }
}

/// Module-scope `from ... import` statements of the package `package`
/// (its dotted segments) that point back into the same top-level package.
pub fn collect_reexports(package: &[String], module: &SyntaxNode) -> Vec<ReExport> {
    let mut out = Vec::new();
    if package.is_empty() {
        return out;
    }
    let pkg = package.join(".");
    let mut stack: Vec<&SyntaxNode> = module.children.iter().rev().collect();
    while let Some(node) = stack.pop() {
        match node.kind {
            NodeKind::FunctionDef | NodeKind::ClassDef => continue,
            NodeKind::ImportFrom => {}
            _ => {
                stack.extend(node.children.iter().rev());
                continue;
            }
        }
        let Some(stmt) = &node.import else { continue };
        let target_module = if stmt.level > 0 {
            let up = stmt.level as usize - 1;
            if up >= package.len() {
                continue;
            }
            let mut parts = package[..package.len() - up].to_vec();
            parts.extend(stmt.module.iter().flat_map(|m| m.split('.')).map(str::to_owned));
            parts.join(".")
        } else {
            match &stmt.module {
                Some(m) if m.split('.').next() == Some(package[0].as_str()) => m.clone(),
                _ => continue,
            }
        };
        for name in &stmt.names {
            if name.name == "*" {
                if target_module != pkg {
                    out.push(ReExport { alias: pkg.clone(), target: target_module.clone(), star: true });
                }
                continue;
            }
            let alias = format!("{pkg}.{}", name.asname.as_deref().unwrap_or(&name.name));
            let target = format!("{target_module}.{}", name.name);
            if alias != target {
                out.push(ReExport { alias, target, star: false });
            }
        }
    }
    out
}
