//! A simplified Python 3 syntax tree.
//!
//! The tree keeps exactly the node kinds the deprecation rules and the client
//! scanner look at (definitions, calls, imports, names, attributes and string
//! literals). Every other construct is kept as [`NodeKind::Other`] so that a
//! pre-order walk still visits nodes in source order.

mod decode;
mod fstring;
mod parser;
mod strings;
mod token;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use decode::{decode_source, declared_encoding, normalize_newlines};
pub use parser::parse_expression;

/// A region of a source file. Lines are 1-based, columns are 0-based and
/// counted in characters of the LF-normalized text. The end is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_col)
    }

    /// Whether `(line, col)` lies inside the half-open span.
    pub fn contains(&self, line: u32, col: u32) -> bool {
        (line, col) >= self.start() && (line, col) < self.end()
    }

    /// Whether `other` lies entirely inside this span.
    pub fn encloses(&self, other: &SourceSpan) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    pub fn with_file(&self, file: Arc<str>) -> SourceSpan {
        SourceSpan { file, ..self.clone() }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Module,
    ClassDef,
    FunctionDef,
    Call,
    Import,
    ImportFrom,
    Attribute,
    Name,
    StringLiteral,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArgKind {
    NameRef,
    AttributeRef,
    StringLit,
    Other,
}

/// One argument of a call or decorator call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgRef {
    /// Absent for positional and `*`/`**` arguments.
    pub keyword: Option<String>,
    pub value_kind: ArgKind,
    /// Dotted name for name/attribute references, decoded contents for
    /// string literals, raw source text otherwise.
    pub value_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratorRef {
    /// The decorator expression with call parentheses stripped, e.g.
    /// `util.deprecate` for `@util.deprecate("0.3")`.
    pub dotted_name: String,
    pub args: Vec<ArgRef>,
    pub span: SourceSpan,
}

impl DecoratorRef {
    /// Last dotted segment of the decorator name.
    pub fn terminal_segment(&self) -> &str {
        self.dotted_name.rsplit('.').next().unwrap_or(&self.dotted_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportedName {
    /// Dotted module for `import`, a single identifier (or `*`) for `from`.
    pub name: String,
    pub asname: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportStmt {
    /// The `from` module; absent for plain `import` and for `from . import x`.
    pub module: Option<String>,
    /// Number of leading dots of a relative `from` import.
    pub level: u32,
    pub names: Vec<ImportedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    /// Identifier for Name, attribute name for Attribute, defined name for
    /// ClassDef/FunctionDef.
    pub name: Option<String>,
    pub decorators: Vec<DecoratorRef>,
    pub docstring: Option<String>,
    pub call_args: Vec<ArgRef>,
    /// Decoded contents of a StringLiteral, implicit concatenations joined.
    pub literal: Option<String>,
    pub import: Option<ImportStmt>,
    pub children: Vec<SyntaxNode>,
    /// For ClassDef/FunctionDef: how many leading children are decorators,
    /// bases, defaults or annotations rather than body statements.
    pub header_len: usize,
    pub span: SourceSpan,
}

impl SyntaxNode {
    pub(crate) fn new(kind: NodeKind, span: SourceSpan) -> Self {
        SyntaxNode {
            kind,
            name: None,
            decorators: Vec::new(),
            docstring: None,
            call_args: Vec::new(),
            literal: None,
            import: None,
            children: Vec::new(),
            header_len: 0,
            span,
        }
    }

    /// `a.b.c` for a Name or an Attribute chain rooted at a Name.
    pub fn dotted_path(&self) -> Option<String> {
        match self.kind {
            NodeKind::Name => self.name.clone(),
            NodeKind::Attribute => {
                let base = self.children.first()?.dotted_path()?;
                Some(format!("{base}.{}", self.name.as_deref()?))
            }
            _ => None,
        }
    }

    /// The called expression of a Call node.
    pub fn callee(&self) -> Option<&SyntaxNode> {
        match self.kind {
            NodeKind::Call => self.children.first(),
            _ => None,
        }
    }

    /// Children that make up the body of a definition (all children for
    /// other kinds).
    pub fn body(&self) -> &[SyntaxNode] {
        &self.children[self.header_len.min(self.children.len())..]
    }

    pub fn is_definition(&self) -> bool {
        matches!(self.kind, NodeKind::ClassDef | NodeKind::FunctionDef)
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn subtree_size(&self) -> usize {
        1 + self.children.iter().map(SyntaxNode::subtree_size).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct SyntaxError {
    pub file: String,
    pub line: u32,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(file: &str, line: u32, message: impl Into<String>) -> Self {
        SyntaxError { file: file.to_owned(), line, message: message.into() }
    }
}

/// Parses already-decoded Python source into a Module node.
pub fn parse_file(path: &Path, source: &str) -> Result<SyntaxNode, SyntaxError> {
    let file: Arc<str> = Arc::from(path.to_string_lossy().as_ref());
    let normalized = decode::normalize_newlines(source);
    parser::parse_module(file, &normalized)
}

/// Decodes raw bytes using the Python source-encoding rules, then parses.
pub fn parse_bytes(path: &Path, bytes: &[u8]) -> Result<SyntaxNode, SyntaxError> {
    let text = decode_source(bytes)
        .map_err(|msg| SyntaxError::new(&path.to_string_lossy(), 1, msg))?;
    parse_file(path, &text)
}

/// Pre-order depth-first traversal: parent before children, children in
/// source order.
pub fn walk_preorder(root: &SyntaxNode) -> Preorder<'_> {
    Preorder { stack: vec![root] }
}

pub struct Preorder<'a> {
    stack: Vec<&'a SyntaxNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a SyntaxNode;

    fn next(&mut self) -> Option<&'a SyntaxNode> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}
