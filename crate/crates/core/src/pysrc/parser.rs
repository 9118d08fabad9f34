//! Recursive-descent parser over the token stream. Builds [`SyntaxNode`]s
//! directly; constructs the rules do not care about become `Other` nodes
//! that keep their sub-expressions as children.

use std::sync::Arc;

use super::fstring;
use super::strings::decode_string_token;
use super::token::{tokenize, Pos, TokKind, Token};
use super::{
    ArgKind, ArgRef, DecoratorRef, ImportStmt, ImportedName, NodeKind, SourceSpan, SyntaxError,
    SyntaxNode,
};

type PResult<T> = Result<T, SyntaxError>;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

const AUGMENTED: &[&str] = &[
    "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**=",
];

const COMPARISON: &[&str] = &["<", ">", "==", ">=", "<=", "!="];

pub(crate) fn parse_module(file: Arc<str>, src: &str) -> PResult<SyntaxNode> {
    let toks = tokenize(&file, src)?;
    let mut p = Parser::new(file, src, toks);
    let (body, docstring) = p.parse_statements_until_end()?;
    let end = p.toks.last().map(|t| t.end).unwrap_or_default();
    let mut module = SyntaxNode::new(
        NodeKind::Module,
        SourceSpan {
            file: p.file.clone(),
            start_line: 1,
            start_col: 0,
            end_line: end.line.max(1),
            end_col: end.col,
        },
    );
    module.docstring = docstring;
    module.children = body;
    Ok(module)
}

/// Parses `src` as a single expression (a tuple when comma-separated).
pub fn parse_expression(src: &str) -> PResult<SyntaxNode> {
    let file: Arc<str> = Arc::from("<expr>");
    let normalized = super::decode::normalize_newlines(src);
    let toks = tokenize(&file, &normalized)?;
    let mut p = Parser::new(file, &normalized, toks);
    let node = p.parse_star_expressions()?;
    while p.peek().kind == TokKind::Newline {
        p.advance();
    }
    if p.peek().kind != TokKind::EndMarker {
        return Err(p.error("unexpected tokens after expression"));
    }
    Ok(node)
}

struct Parser<'s> {
    toks: Vec<Token<'s>>,
    pos: usize,
    src: &'s str,
    file: Arc<str>,
    prev_end: Pos,
}

/// Result of a call argument list.
struct CallArgs {
    nodes: Vec<SyntaxNode>,
    refs: Vec<ArgRef>,
}

impl<'s> Parser<'s> {
    fn new(file: Arc<str>, src: &'s str, toks: Vec<Token<'s>>) -> Self {
        Parser { toks, pos: 0, src, file, prev_end: Pos { line: 1, col: 0, off: 0 } }
    }

    // ---- token plumbing -------------------------------------------------

    fn peek(&self) -> Token<'s> {
        self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_n(&self, n: usize) -> Token<'s> {
        self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> Token<'s> {
        let t = self.peek();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        if matches!(t.kind, TokKind::Name | TokKind::Number | TokKind::String | TokKind::Op) {
            self.prev_end = t.end;
        }
        t
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_op(op)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_name(kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(&self.file, self.peek().start.line, msg)
    }

    fn unexpected(&self) -> SyntaxError {
        let t = self.peek();
        match t.kind {
            TokKind::Indent => self.error("unexpected indent"),
            TokKind::Dedent => self.error("unindent does not match any outer indentation level"),
            TokKind::Newline | TokKind::EndMarker => self.error("invalid syntax: unexpected end of line"),
            _ => self.error(format!("invalid syntax near '{}'", t.text)),
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<Token<'s>> {
        if self.at_op(op) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected '{op}'")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token<'s>> {
        if self.at_kw(kw) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected '{kw}'")))
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        match self.peek().kind {
            TokKind::Newline => {
                self.advance();
                Ok(())
            }
            TokKind::EndMarker => Ok(()),
            _ => Err(self.unexpected()),
        }
    }

    fn at_identifier(&self) -> bool {
        let t = self.peek();
        t.kind == TokKind::Name && !is_keyword(t.text)
    }

    fn expect_identifier(&mut self) -> PResult<String> {
        if self.at_identifier() {
            Ok(self.advance().text.to_owned())
        } else {
            Err(self.error("expected identifier"))
        }
    }

    fn span_from(&self, start: Pos) -> SourceSpan {
        let end = if self.prev_end < start { start } else { self.prev_end };
        SourceSpan {
            file: self.file.clone(),
            start_line: start.line,
            start_col: start.col,
            end_line: end.line,
            end_col: end.col,
        }
    }

    fn node(&self, kind: NodeKind, start: Pos) -> SyntaxNode {
        SyntaxNode::new(kind, self.span_from(start))
    }

    fn other(&self, start: Pos, children: Vec<SyntaxNode>) -> SyntaxNode {
        let mut n = self.node(NodeKind::Other, start);
        n.children = children;
        n
    }

    fn raw_text(&self, start: Pos) -> String {
        let end = self.prev_end.off.max(start.off);
        self.src[start.off..end].to_owned()
    }

    // ---- statements -----------------------------------------------------

    fn parse_statements_until_end(&mut self) -> PResult<(Vec<SyntaxNode>, Option<String>)> {
        let mut body = Vec::new();
        let mut docstring = None;
        let mut first = true;
        loop {
            match self.peek().kind {
                TokKind::EndMarker => break,
                TokKind::Newline => {
                    self.advance();
                    continue;
                }
                _ => {}
            }
            let before = body.len();
            let candidate = self.docstring_candidate();
            self.parse_statement(&mut body)?;
            if first {
                docstring = candidate.and_then(|_| docstring_of(body.get(before)));
                first = false;
            }
        }
        Ok((body, docstring))
    }

    /// Whether the next statement can be a docstring: a non-bytes string token.
    fn docstring_candidate(&self) -> Option<()> {
        let mut n = 0;
        while self.peek_n(n).is_op("(") {
            n += 1;
        }
        let t = self.peek_n(n);
        (t.kind == TokKind::String && !decode_string_token(t.text).is_bytes).then_some(())
    }

    /// Parses the body after a block's ':'.
    fn parse_body(&mut self) -> PResult<(Vec<SyntaxNode>, Option<String>)> {
        let mut body = Vec::new();
        if self.peek().kind != TokKind::Newline {
            let candidate = self.docstring_candidate();
            self.parse_simple_statements(&mut body)?;
            let doc = candidate.and_then(|_| docstring_of(body.first()));
            return Ok((body, doc));
        }
        self.advance();
        if self.peek().kind != TokKind::Indent {
            return Err(self.error("expected an indented block"));
        }
        self.advance();
        let candidate = self.docstring_candidate();
        self.parse_statement(&mut body)?;
        let docstring = candidate.and_then(|_| docstring_of(body.first()));
        while self.peek().kind != TokKind::Dedent && self.peek().kind != TokKind::EndMarker {
            if self.peek().kind == TokKind::Newline {
                self.advance();
                continue;
            }
            self.parse_statement(&mut body)?;
        }
        if self.peek().kind == TokKind::Dedent {
            self.advance();
        }
        Ok((body, docstring))
    }

    fn parse_block(&mut self) -> PResult<Vec<SyntaxNode>> {
        self.expect_op(":")?;
        Ok(self.parse_body()?.0)
    }

    fn parse_statement(&mut self, out: &mut Vec<SyntaxNode>) -> PResult<()> {
        let t = self.peek();
        match t.kind {
            TokKind::Indent => return Err(self.error("unexpected indent")),
            TokKind::Dedent => return Err(self.unexpected()),
            _ => {}
        }
        if t.kind == TokKind::Op && t.text == "@" {
            out.push(self.parse_decorated()?);
            return Ok(());
        }
        if t.kind == TokKind::Name {
            match t.text {
                "def" => {
                    out.push(self.parse_funcdef(Vec::new(), Vec::new(), t.start)?);
                    return Ok(());
                }
                "class" => {
                    out.push(self.parse_classdef(Vec::new(), Vec::new(), t.start)?);
                    return Ok(());
                }
                "if" => {
                    out.push(self.parse_if()?);
                    return Ok(());
                }
                "while" => {
                    out.push(self.parse_while()?);
                    return Ok(());
                }
                "for" => {
                    out.push(self.parse_for(t.start)?);
                    return Ok(());
                }
                "try" => {
                    out.push(self.parse_try()?);
                    return Ok(());
                }
                "with" => {
                    out.push(self.parse_with(t.start)?);
                    return Ok(());
                }
                "async" => {
                    let next = self.peek_n(1);
                    let start = t.start;
                    if next.is_name("def") {
                        self.advance();
                        out.push(self.parse_funcdef(Vec::new(), Vec::new(), start)?);
                        return Ok(());
                    }
                    if next.is_name("for") {
                        self.advance();
                        out.push(self.parse_for(start)?);
                        return Ok(());
                    }
                    if next.is_name("with") {
                        self.advance();
                        out.push(self.parse_with(start)?);
                        return Ok(());
                    }
                    return Err(self.unexpected());
                }
                "match" => {
                    if let Some(node) = self.try_parse_match()? {
                        out.push(node);
                        return Ok(());
                    }
                }
                _ => {}
            }
        }
        self.parse_simple_statements(out)
    }

    fn parse_simple_statements(&mut self, out: &mut Vec<SyntaxNode>) -> PResult<()> {
        loop {
            out.push(self.parse_simple_statement()?);
            if self.eat_op(";") {
                if matches!(self.peek().kind, TokKind::Newline | TokKind::EndMarker) {
                    break;
                }
                continue;
            }
            break;
        }
        self.expect_newline()
    }

    fn parse_simple_statement(&mut self) -> PResult<SyntaxNode> {
        let t = self.peek();
        let start = t.start;
        if t.kind == TokKind::Name {
            match t.text {
                "pass" | "break" | "continue" => {
                    self.advance();
                    return Ok(self.other(start, Vec::new()));
                }
                "return" => {
                    self.advance();
                    let mut children = Vec::new();
                    if !self.at_statement_end() {
                        children.push(self.parse_star_expressions()?);
                    }
                    return Ok(self.other(start, children));
                }
                "raise" => {
                    self.advance();
                    let mut children = Vec::new();
                    if !self.at_statement_end() {
                        children.push(self.parse_expression()?);
                        if self.eat_kw("from") {
                            children.push(self.parse_expression()?);
                        }
                    }
                    return Ok(self.other(start, children));
                }
                "global" | "nonlocal" => {
                    self.advance();
                    self.expect_identifier()?;
                    while self.eat_op(",") {
                        self.expect_identifier()?;
                    }
                    return Ok(self.other(start, Vec::new()));
                }
                "del" => {
                    self.advance();
                    let target = self.parse_star_expressions()?;
                    return Ok(self.other(start, vec![target]));
                }
                "assert" => {
                    self.advance();
                    let mut children = vec![self.parse_expression()?];
                    if self.eat_op(",") {
                        children.push(self.parse_expression()?);
                    }
                    return Ok(self.other(start, children));
                }
                "import" => return self.parse_import(),
                "from" => return self.parse_from_import(),
                "type" => {
                    let n1 = self.peek_n(1);
                    let n2 = self.peek_n(2);
                    if n1.kind == TokKind::Name
                        && !is_keyword(n1.text)
                        && (n2.is_op("=") || n2.is_op("["))
                    {
                        self.advance();
                        self.advance();
                        let mut children = Vec::new();
                        if self.at_op("[") {
                            children.extend(self.parse_type_params()?);
                        }
                        self.expect_op("=")?;
                        children.push(self.parse_expression()?);
                        return Ok(self.other(start, children));
                    }
                }
                _ => {}
            }
        }
        self.parse_expression_statement()
    }

    fn at_statement_end(&self) -> bool {
        let t = self.peek();
        matches!(t.kind, TokKind::Newline | TokKind::EndMarker) || t.is_op(";")
    }

    fn parse_yield_or_star_expressions(&mut self) -> PResult<SyntaxNode> {
        if self.at_kw("yield") {
            self.parse_yield()
        } else {
            self.parse_star_expressions()
        }
    }

    fn parse_expression_statement(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = self.parse_yield_or_star_expressions()?;
        if self.at_op(":") {
            // Annotated assignment.
            self.advance();
            let mut children = vec![first, self.parse_expression()?];
            if self.eat_op("=") {
                children.push(self.parse_yield_or_star_expressions()?);
            }
            return Ok(self.other(start, children));
        }
        let t = self.peek();
        if t.kind == TokKind::Op && AUGMENTED.contains(&t.text) {
            self.advance();
            let value = self.parse_yield_or_star_expressions()?;
            return Ok(self.other(start, vec![first, value]));
        }
        if self.at_op("=") {
            let mut children = vec![first];
            while self.eat_op("=") {
                children.push(self.parse_yield_or_star_expressions()?);
            }
            return Ok(self.other(start, children));
        }
        Ok(first)
    }

    fn parse_dotted_name(&mut self) -> PResult<String> {
        let mut name = self.expect_identifier()?;
        while self.at_op(".") {
            self.advance();
            name.push('.');
            name.push_str(&self.expect_identifier()?);
        }
        Ok(name)
    }

    fn parse_import(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("import")?.start;
        let mut names = Vec::new();
        loop {
            let nstart = self.peek().start;
            let name = self.parse_dotted_name()?;
            let asname = if self.eat_kw("as") { Some(self.expect_identifier()?) } else { None };
            names.push(ImportedName { name, asname, span: self.span_from(nstart) });
            if !self.eat_op(",") {
                break;
            }
        }
        let mut node = self.node(NodeKind::Import, start);
        node.import = Some(ImportStmt { module: None, level: 0, names });
        Ok(node)
    }

    fn parse_from_import(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("from")?.start;
        let mut level = 0;
        loop {
            if self.eat_op(".") {
                level += 1;
            } else if self.eat_op("...") {
                level += 3;
            } else {
                break;
            }
        }
        let module = if self.at_kw("import") {
            if level == 0 {
                return Err(self.error("expected module name"));
            }
            None
        } else {
            Some(self.parse_dotted_name()?)
        };
        self.expect_kw("import")?;
        let mut names = Vec::new();
        if self.at_op("*") {
            let t = self.advance();
            names.push(ImportedName { name: "*".into(), asname: None, span: self.span_from(t.start) });
        } else {
            let parens = self.eat_op("(");
            loop {
                let nstart = self.peek().start;
                let name = self.expect_identifier()?;
                let asname = if self.eat_kw("as") { Some(self.expect_identifier()?) } else { None };
                names.push(ImportedName { name, asname, span: self.span_from(nstart) });
                if !self.eat_op(",") {
                    break;
                }
                if parens && self.at_op(")") {
                    break;
                }
            }
            if parens {
                self.expect_op(")")?;
            }
        }
        let mut node = self.node(NodeKind::ImportFrom, start);
        node.import = Some(ImportStmt { module, level, names });
        Ok(node)
    }

    fn parse_if(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("if")?.start;
        let mut children = vec![self.parse_named_expression()?];
        children.extend(self.parse_block()?);
        loop {
            if self.eat_kw("elif") {
                children.push(self.parse_named_expression()?);
                children.extend(self.parse_block()?);
            } else if self.eat_kw("else") {
                children.extend(self.parse_block()?);
                break;
            } else {
                break;
            }
        }
        Ok(self.other(start, children))
    }

    fn parse_while(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("while")?.start;
        let mut children = vec![self.parse_named_expression()?];
        children.extend(self.parse_block()?);
        if self.eat_kw("else") {
            children.extend(self.parse_block()?);
        }
        Ok(self.other(start, children))
    }

    fn parse_for(&mut self, start: Pos) -> PResult<SyntaxNode> {
        self.expect_kw("for")?;
        let mut children = vec![self.parse_target_list()?];
        self.expect_kw("in")?;
        children.push(self.parse_star_expressions()?);
        children.extend(self.parse_block()?);
        if self.eat_kw("else") {
            children.extend(self.parse_block()?);
        }
        Ok(self.other(start, children))
    }

    fn parse_try(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("try")?.start;
        let mut children = self.parse_block()?;
        let mut handlers = 0;
        while self.at_kw("except") {
            self.advance();
            handlers += 1;
            self.eat_op("*");
            if !self.at_op(":") {
                children.push(self.parse_expression()?);
                while self.eat_op(",") {
                    children.push(self.parse_expression()?);
                }
                if self.eat_kw("as") {
                    self.expect_identifier()?;
                }
            }
            children.extend(self.parse_block()?);
        }
        let mut has_finally = false;
        if handlers > 0 && self.eat_kw("else") {
            children.extend(self.parse_block()?);
        }
        if self.eat_kw("finally") {
            has_finally = true;
            children.extend(self.parse_block()?);
        }
        if handlers == 0 && !has_finally {
            return Err(self.error("expected 'except' or 'finally' block"));
        }
        Ok(self.other(start, children))
    }

    fn parse_with(&mut self, start: Pos) -> PResult<SyntaxNode> {
        self.expect_kw("with")?;
        let mut children = Vec::new();
        let saved = (self.pos, self.prev_end);
        let mut parenthesized = false;
        if self.at_op("(") {
            self.advance();
            let mut items = Vec::new();
            let ok = (|| -> PResult<()> {
                loop {
                    items.extend(self.parse_with_item()?);
                    if !self.eat_op(",") || self.at_op(")") {
                        break;
                    }
                }
                self.expect_op(")")?;
                if !self.at_op(":") {
                    return Err(self.error("expected ':'"));
                }
                Ok(())
            })();
            if ok.is_ok() {
                parenthesized = true;
                children = items;
            } else {
                self.pos = saved.0;
                self.prev_end = saved.1;
            }
        }
        if !parenthesized {
            loop {
                children.extend(self.parse_with_item()?);
                if !self.eat_op(",") {
                    break;
                }
            }
        }
        children.extend(self.parse_block()?);
        Ok(self.other(start, children))
    }

    fn parse_with_item(&mut self) -> PResult<Vec<SyntaxNode>> {
        let mut items = vec![self.parse_expression()?];
        if self.eat_kw("as") {
            items.push(self.parse_target()?);
        }
        Ok(items)
    }

    fn parse_decorated(&mut self) -> PResult<SyntaxNode> {
        let mut decorators = Vec::new();
        let mut nodes = Vec::new();
        while self.at_op("@") {
            self.advance();
            let dstart = self.peek().start;
            let expr = self.parse_named_expression()?;
            decorators.push(self.decorator_ref(&expr, dstart));
            nodes.push(expr);
            if self.peek().kind != TokKind::Newline {
                return Err(self.unexpected());
            }
            self.advance();
        }
        let t = self.peek();
        let start = t.start;
        if t.is_name("def") {
            self.parse_funcdef(decorators, nodes, start)
        } else if t.is_name("class") {
            self.parse_classdef(decorators, nodes, start)
        } else if t.is_name("async") && self.peek_n(1).is_name("def") {
            self.advance();
            self.parse_funcdef(decorators, nodes, start)
        } else {
            Err(self.error("expected function or class definition after decorator"))
        }
    }

    fn decorator_ref(&self, expr: &SyntaxNode, start: Pos) -> DecoratorRef {
        let raw = |n: &SyntaxNode| self.slice_span(&n.span).unwrap_or_default();
        let (target, args) = match expr.kind {
            NodeKind::Call => (expr.callee().unwrap_or(expr), expr.call_args.clone()),
            _ => (expr, Vec::new()),
        };
        let dotted_name = target.dotted_path().unwrap_or_else(|| raw(target));
        DecoratorRef { dotted_name, args, span: self.span_from(start) }
    }

    /// Source text covered by a span produced by this parser.
    fn slice_span(&self, span: &SourceSpan) -> Option<String> {
        let start = self.offset_of(span.start_line, span.start_col)?;
        let end = self.offset_of(span.end_line, span.end_col)?;
        self.src.get(start..end).map(str::to_owned)
    }

    fn offset_of(&self, line: u32, col: u32) -> Option<usize> {
        let line_start = if line <= 1 {
            0
        } else {
            self.src.match_indices('\n').nth(line as usize - 2)?.0 + 1
        };
        let rest = &self.src[line_start..];
        let byte = rest.char_indices().nth(col as usize).map(|(i, _)| i).unwrap_or(rest.len());
        Some(line_start + byte)
    }

    fn parse_funcdef(
        &mut self,
        decorators: Vec<DecoratorRef>,
        decorator_nodes: Vec<SyntaxNode>,
        start: Pos,
    ) -> PResult<SyntaxNode> {
        self.expect_kw("def")?;
        let name = self.expect_identifier()?;
        let mut children = decorator_nodes;
        if self.at_op("[") {
            children.extend(self.parse_type_params()?);
        }
        self.expect_op("(")?;
        children.extend(self.parse_parameters(")", true)?);
        self.expect_op(")")?;
        if self.eat_op("->") {
            children.push(self.parse_expression()?);
        }
        self.expect_op(":")?;
        let header_len = children.len();
        let (body, docstring) = self.parse_body()?;
        children.extend(body);
        let mut node = self.node(NodeKind::FunctionDef, start);
        node.name = Some(name);
        node.decorators = decorators;
        node.docstring = docstring;
        node.children = children;
        node.header_len = header_len;
        Ok(node)
    }

    fn parse_classdef(
        &mut self,
        decorators: Vec<DecoratorRef>,
        decorator_nodes: Vec<SyntaxNode>,
        start: Pos,
    ) -> PResult<SyntaxNode> {
        self.expect_kw("class")?;
        let name = self.expect_identifier()?;
        let mut children = decorator_nodes;
        if self.at_op("[") {
            children.extend(self.parse_type_params()?);
        }
        if self.eat_op("(") {
            let args = self.parse_call_args()?;
            children.extend(args.nodes);
            self.expect_op(")")?;
        }
        self.expect_op(":")?;
        let header_len = children.len();
        let (body, docstring) = self.parse_body()?;
        children.extend(body);
        let mut node = self.node(NodeKind::ClassDef, start);
        node.name = Some(name);
        node.decorators = decorators;
        node.docstring = docstring;
        node.children = children;
        node.header_len = header_len;
        Ok(node)
    }

    fn parse_type_params(&mut self) -> PResult<Vec<SyntaxNode>> {
        self.expect_op("[")?;
        let mut nodes = Vec::new();
        loop {
            if self.at_op("]") {
                break;
            }
            if !self.eat_op("**") {
                self.eat_op("*");
            }
            self.expect_identifier()?;
            if self.eat_op(":") {
                nodes.push(self.parse_expression()?);
            }
            if self.eat_op("=") {
                nodes.push(self.parse_expression()?);
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op("]")?;
        Ok(nodes)
    }

    /// Parameter list up to (not including) `close`. Returns default and
    /// annotation expressions in source order.
    fn parse_parameters(&mut self, close: &str, annotations: bool) -> PResult<Vec<SyntaxNode>> {
        let mut nodes = Vec::new();
        while !self.at_op(close) {
            if self.eat_op("/") {
            } else if self.eat_op("**") {
                self.expect_identifier()?;
                if annotations && self.eat_op(":") {
                    nodes.push(self.parse_expression()?);
                }
            } else if self.eat_op("*") {
                if self.at_identifier() {
                    self.advance();
                    if annotations && self.eat_op(":") {
                        // `*args: *Ts` is allowed.
                        nodes.push(if self.at_op("*") { self.parse_star_expression()? } else { self.parse_expression()? });
                    }
                }
            } else {
                self.expect_identifier()?;
                if annotations && self.eat_op(":") {
                    nodes.push(self.parse_expression()?);
                }
                if self.eat_op("=") {
                    nodes.push(self.parse_expression()?);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        if !self.at_op(close) {
            return Err(self.unexpected());
        }
        Ok(nodes)
    }

    // ---- match statements -----------------------------------------------

    fn try_parse_match(&mut self) -> PResult<Option<SyntaxNode>> {
        let saved = (self.pos, self.prev_end);
        let start = self.peek().start;
        self.advance();
        let header = (|| -> PResult<SyntaxNode> {
            let subject = self.parse_star_named_expressions()?;
            self.expect_op(":")?;
            if self.peek().kind != TokKind::Newline || self.peek_n(1).kind != TokKind::Indent || !self.peek_n(2).is_name("case") {
                return Err(self.error("not a match statement"));
            }
            Ok(subject)
        })();
        let subject = match header {
            Ok(s) => s,
            Err(_) => {
                self.pos = saved.0;
                self.prev_end = saved.1;
                return Ok(None);
            }
        };
        self.advance();
        self.advance();
        let mut children = vec![subject];
        while self.at_kw("case") {
            self.advance();
            children.push(self.parse_open_pattern()?);
            if self.eat_kw("if") {
                children.push(self.parse_named_expression()?);
            }
            children.extend(self.parse_block()?);
            while self.peek().kind == TokKind::Newline {
                self.advance();
            }
        }
        if self.peek().kind != TokKind::Dedent && self.peek().kind != TokKind::EndMarker {
            return Err(self.unexpected());
        }
        if self.peek().kind == TokKind::Dedent {
            self.advance();
        }
        Ok(Some(self.other(start, children)))
    }

    fn parse_open_pattern(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = self.parse_pattern()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op(":") || self.at_kw("if") {
                break;
            }
            items.push(self.parse_pattern()?);
        }
        Ok(self.other(start, items))
    }

    fn parse_pattern(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let mut alts = vec![self.parse_closed_pattern()?];
        while self.eat_op("|") {
            alts.push(self.parse_closed_pattern()?);
        }
        let bound = self.eat_kw("as");
        if bound {
            self.expect_identifier()?;
        }
        if alts.len() == 1 && !bound {
            return Ok(alts.pop().unwrap());
        }
        Ok(self.other(start, alts))
    }

    fn parse_closed_pattern(&mut self) -> PResult<SyntaxNode> {
        let t = self.peek();
        let start = t.start;
        match t.kind {
            TokKind::Number => {
                self.advance();
                if self.at_op("+") || self.at_op("-") {
                    self.advance();
                    self.expect_number()?;
                }
                Ok(self.other(start, Vec::new()))
            }
            TokKind::String => self.parse_strings(),
            TokKind::Op if t.text == "-" => {
                self.advance();
                self.expect_number()?;
                if self.at_op("+") || self.at_op("-") {
                    self.advance();
                    self.expect_number()?;
                }
                Ok(self.other(start, Vec::new()))
            }
            TokKind::Op if t.text == "*" => {
                self.advance();
                self.expect_identifier()?;
                Ok(self.other(start, Vec::new()))
            }
            TokKind::Op if t.text == "(" || t.text == "[" => {
                let close = if t.text == "(" { ")" } else { "]" };
                self.advance();
                let mut items = Vec::new();
                while !self.at_op(close) {
                    items.push(self.parse_pattern()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(close)?;
                Ok(self.other(start, items))
            }
            TokKind::Op if t.text == "{" => {
                self.advance();
                let mut items = Vec::new();
                while !self.at_op("}") {
                    if self.eat_op("**") {
                        self.expect_identifier()?;
                    } else {
                        items.push(self.parse_closed_pattern()?);
                        self.expect_op(":")?;
                        items.push(self.parse_pattern()?);
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op("}")?;
                Ok(self.other(start, items))
            }
            TokKind::Name if matches!(t.text, "None" | "True" | "False") => {
                self.advance();
                Ok(self.other(start, Vec::new()))
            }
            TokKind::Name if !is_keyword(t.text) => {
                let dotted = self.peek_n(1).is_op(".");
                let called = self.peek_n(1).is_op("(");
                if !dotted && !called {
                    // Capture or wildcard binds a name; it is not a usage.
                    self.advance();
                    return Ok(self.other(start, Vec::new()));
                }
                let mut value = self.parse_name_atom()?;
                while self.at_op(".") {
                    self.advance();
                    let attr = self.expect_identifier()?;
                    let mut a = self.node(NodeKind::Attribute, start);
                    a.name = Some(attr);
                    a.children = vec![value];
                    value = a;
                }
                if !self.eat_op("(") {
                    return Ok(value);
                }
                let mut items = vec![value];
                while !self.at_op(")") {
                    if self.peek().kind == TokKind::Name && self.peek_n(1).is_op("=") {
                        self.advance();
                        self.advance();
                    }
                    items.push(self.parse_pattern()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(")")?;
                Ok(self.other(start, items))
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_number(&mut self) -> PResult<()> {
        if self.peek().kind == TokKind::Number {
            self.advance();
            Ok(())
        } else {
            Err(self.error("expected number"))
        }
    }

    // ---- expressions ----------------------------------------------------

    /// Comma-separated expressions (with `*` items) forming an implicit tuple.
    fn parse_star_expressions(&mut self) -> PResult<SyntaxNode> {
        self.parse_sequence(Self::parse_star_expression)
    }

    fn parse_star_named_expressions(&mut self) -> PResult<SyntaxNode> {
        self.parse_sequence(Self::parse_star_named_expression)
    }

    fn parse_sequence(&mut self, item: fn(&mut Self) -> PResult<SyntaxNode>) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = item(self)?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if !self.can_start_expression() {
                break;
            }
            items.push(item(self)?);
        }
        Ok(self.other(start, items))
    }

    fn can_start_expression(&self) -> bool {
        let t = self.peek();
        match t.kind {
            TokKind::Name => {
                !is_keyword(t.text)
                    || matches!(t.text, "None" | "True" | "False" | "lambda" | "not" | "await" | "yield")
            }
            TokKind::Number | TokKind::String => true,
            TokKind::Op => matches!(t.text, "(" | "[" | "{" | "-" | "+" | "~" | "*" | "..." | "**"),
            _ => false,
        }
    }

    fn parse_star_expression(&mut self) -> PResult<SyntaxNode> {
        if self.at_op("*") {
            let start = self.advance().start;
            let inner = self.parse_bitor()?;
            return Ok(self.other(start, vec![inner]));
        }
        self.parse_expression()
    }

    fn parse_star_named_expression(&mut self) -> PResult<SyntaxNode> {
        if self.at_op("*") {
            let start = self.advance().start;
            let inner = self.parse_bitor()?;
            return Ok(self.other(start, vec![inner]));
        }
        self.parse_named_expression()
    }

    fn parse_named_expression(&mut self) -> PResult<SyntaxNode> {
        let t = self.peek();
        if t.kind == TokKind::Name && !is_keyword(t.text) && self.peek_n(1).is_op(":=") {
            let start = t.start;
            let target = self.parse_name_atom()?;
            self.advance();
            let value = self.parse_expression()?;
            return Ok(self.other(start, vec![target, value]));
        }
        self.parse_expression()
    }

    fn parse_expression(&mut self) -> PResult<SyntaxNode> {
        if self.at_kw("lambda") {
            return self.parse_lambda();
        }
        let start = self.peek().start;
        let body = self.parse_disjunction()?;
        if self.at_kw("if") {
            self.advance();
            let test = self.parse_disjunction()?;
            self.expect_kw("else")?;
            let orelse = self.parse_expression()?;
            return Ok(self.other(start, vec![body, test, orelse]));
        }
        Ok(body)
    }

    fn parse_lambda(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("lambda")?.start;
        let mut children = self.parse_parameters(":", false)?;
        self.expect_op(":")?;
        children.push(self.parse_expression()?);
        Ok(self.other(start, children))
    }

    fn parse_yield(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_kw("yield")?.start;
        let mut children = Vec::new();
        if self.eat_kw("from") {
            children.push(self.parse_expression()?);
        } else if self.can_start_expression() {
            children.push(self.parse_star_expressions()?);
        }
        Ok(self.other(start, children))
    }

    fn parse_binary_chain(
        &mut self,
        operand: fn(&mut Self) -> PResult<SyntaxNode>,
        is_operator: fn(&Token<'_>) -> bool,
    ) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let mut left = operand(self)?;
        while is_operator(&self.peek()) {
            self.advance();
            let right = operand(self)?;
            left = self.other(start, vec![left, right]);
        }
        Ok(left)
    }

    fn parse_disjunction(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_conjunction, |t| t.is_name("or"))
    }

    fn parse_conjunction(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_inversion, |t| t.is_name("and"))
    }

    fn parse_inversion(&mut self) -> PResult<SyntaxNode> {
        if self.at_kw("not") {
            let start = self.advance().start;
            let inner = self.parse_inversion()?;
            return Ok(self.other(start, vec![inner]));
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = self.parse_bitor()?;
        let mut operands = vec![first];
        loop {
            let t = self.peek();
            if t.kind == TokKind::Op && COMPARISON.contains(&t.text) || t.is_name("in") {
                self.advance();
            } else if t.is_name("not") && self.peek_n(1).is_name("in") {
                self.advance();
                self.advance();
            } else if t.is_name("is") {
                self.advance();
                self.eat_kw("not");
            } else {
                break;
            }
            operands.push(self.parse_bitor()?);
        }
        if operands.len() == 1 {
            return Ok(operands.pop().unwrap());
        }
        Ok(self.other(start, operands))
    }

    fn parse_bitor(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_bitxor, |t| t.is_op("|"))
    }

    fn parse_bitxor(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_bitand, |t| t.is_op("^"))
    }

    fn parse_bitand(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_shift, |t| t.is_op("&"))
    }

    fn parse_shift(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_sum, |t| t.is_op("<<") || t.is_op(">>"))
    }

    fn parse_sum(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_term, |t| t.is_op("+") || t.is_op("-"))
    }

    fn parse_term(&mut self) -> PResult<SyntaxNode> {
        self.parse_binary_chain(Self::parse_factor, |t| {
            t.kind == TokKind::Op && matches!(t.text, "*" | "/" | "//" | "%" | "@")
        })
    }

    fn parse_factor(&mut self) -> PResult<SyntaxNode> {
        let t = self.peek();
        if t.kind == TokKind::Op && matches!(t.text, "+" | "-" | "~") {
            let start = self.advance().start;
            let inner = self.parse_factor()?;
            return Ok(self.other(start, vec![inner]));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let base = if self.at_kw("await") {
            self.advance();
            let inner = self.parse_primary()?;
            self.other(start, vec![inner])
        } else {
            self.parse_primary()?
        };
        if self.eat_op("**") {
            let exp = self.parse_factor()?;
            return Ok(self.other(start, vec![base, exp]));
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let mut node = self.parse_atom()?;
        loop {
            if self.at_op(".") {
                self.advance();
                let t = self.peek();
                if t.kind != TokKind::Name {
                    return Err(self.error("expected attribute name"));
                }
                self.advance();
                let mut attr = self.node(NodeKind::Attribute, start);
                attr.name = Some(t.text.to_owned());
                attr.children = vec![node];
                node = attr;
            } else if self.at_op("(") {
                self.advance();
                let args = self.parse_call_args()?;
                self.expect_op(")")?;
                let mut call = self.node(NodeKind::Call, start);
                call.children = std::iter::once(node).chain(args.nodes).collect();
                call.call_args = args.refs;
                node = call;
            } else if self.at_op("[") {
                self.advance();
                let slice = self.parse_slices()?;
                self.expect_op("]")?;
                node = self.other(start, vec![node, slice]);
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn parse_call_args(&mut self) -> PResult<CallArgs> {
        let mut nodes = Vec::new();
        let mut refs = Vec::new();
        while !self.at_op(")") {
            let t = self.peek();
            let start = t.start;
            if t.is_op("*") || t.is_op("**") {
                self.advance();
                let value = self.parse_expression()?;
                refs.push(ArgRef { keyword: None, value_kind: ArgKind::Other, value_text: self.raw_text(start) });
                nodes.push(self.other(start, vec![value]));
            } else if t.kind == TokKind::Name && !is_keyword(t.text) && self.peek_n(1).is_op("=") {
                self.advance();
                self.advance();
                let vstart = self.peek().start;
                let value = self.parse_expression()?;
                refs.push(self.arg_ref(Some(t.text.to_owned()), &value, vstart));
                nodes.push(value);
            } else {
                let value = self.parse_named_expression()?;
                let value = if self.at_kw("for") || self.at_kw("async") {
                    // Bare generator argument: f(x for x in y).
                    let mut children = vec![value];
                    self.parse_comprehension_clauses(&mut children)?;
                    self.other(start, children)
                } else {
                    value
                };
                refs.push(self.arg_ref(None, &value, start));
                nodes.push(value);
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(CallArgs { nodes, refs })
    }

    fn arg_ref(&self, keyword: Option<String>, value: &SyntaxNode, start: Pos) -> ArgRef {
        let (value_kind, value_text) = match value.kind {
            NodeKind::Name => (ArgKind::NameRef, value.name.clone().unwrap_or_default()),
            NodeKind::Attribute => match value.dotted_path() {
                Some(path) => (ArgKind::AttributeRef, path),
                None => (ArgKind::Other, self.raw_text(start)),
            },
            NodeKind::StringLiteral => (ArgKind::StringLit, value.literal.clone().unwrap_or_default()),
            _ => (ArgKind::Other, self.raw_text(start)),
        };
        ArgRef { keyword, value_kind, value_text }
    }

    fn parse_slices(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = self.parse_slice()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.parse_slice()?);
        }
        Ok(self.other(start, items))
    }

    fn parse_slice(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let mut parts = Vec::new();
        if !self.at_op(":") {
            let lower = self.parse_star_named_expression()?;
            if !self.at_op(":") {
                return Ok(lower);
            }
            parts.push(lower);
        }
        self.expect_op(":")?;
        if !self.at_op(":") && !self.at_op(",") && !self.at_op("]") {
            parts.push(self.parse_expression()?);
        }
        if self.eat_op(":") && !self.at_op(",") && !self.at_op("]") {
            parts.push(self.parse_expression()?);
        }
        Ok(self.other(start, parts))
    }

    fn parse_name_atom(&mut self) -> PResult<SyntaxNode> {
        let t = self.advance();
        let mut n = self.node(NodeKind::Name, t.start);
        n.name = Some(t.text.to_owned());
        Ok(n)
    }

    fn parse_atom(&mut self) -> PResult<SyntaxNode> {
        let t = self.peek();
        let start = t.start;
        match t.kind {
            TokKind::Name => match t.text {
                "None" | "True" | "False" => {
                    self.advance();
                    Ok(self.other(start, Vec::new()))
                }
                kw if is_keyword(kw) => Err(self.unexpected()),
                _ => self.parse_name_atom(),
            },
            TokKind::Number => {
                self.advance();
                Ok(self.other(start, Vec::new()))
            }
            TokKind::String => self.parse_strings(),
            TokKind::Op => match t.text {
                "..." => {
                    self.advance();
                    Ok(self.other(start, Vec::new()))
                }
                "(" => self.parse_paren(),
                "[" => self.parse_list(),
                "{" => self.parse_brace(),
                _ => Err(self.unexpected()),
            },
            _ => Err(self.unexpected()),
        }
    }

    fn parse_strings(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let mut value = String::new();
        let mut children = Vec::new();
        while self.peek().kind == TokKind::String {
            let t = self.advance();
            let decoded = decode_string_token(t.text);
            if decoded.is_formatted {
                children.extend(self.parse_fstring_fields(t)?);
            }
            value.push_str(&decoded.value);
        }
        let mut n = self.node(NodeKind::StringLiteral, start);
        n.literal = Some(value);
        n.children = children;
        Ok(n)
    }

    /// Parses the replacement-field expressions of an f-string token.
    fn parse_fstring_fields(&self, tok: Token<'s>) -> PResult<Vec<SyntaxNode>> {
        let ranges = fstring::field_ranges(tok.text)
            .map_err(|msg| SyntaxError::new(&self.file, tok.start.line, msg))?;
        let mut nodes = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            let abs_lo = tok.start.off + lo;
            let abs_hi = tok.start.off + hi;
            let origin = advance_pos(tok.start, &tok.text[..lo]);
            let text = &self.src[abs_lo..abs_hi];
            if text.trim().is_empty() {
                return Err(SyntaxError::new(&self.file, origin.line, "f-string: empty expression not allowed"));
            }
            let toks = tokenize(&self.file, text)?
                .into_iter()
                .filter(|t| !matches!(t.kind, TokKind::Newline | TokKind::Indent | TokKind::Dedent))
                .map(|t| Token { start: shift_pos(origin, t.start), end: shift_pos(origin, t.end), ..t })
                .collect::<Vec<_>>();
            let mut sub = Parser::new(self.file.clone(), self.src, toks);
            sub.prev_end = origin;
            let node = if sub.at_kw("yield") { sub.parse_yield()? } else { sub.parse_star_expressions()? };
            if sub.peek().kind != TokKind::EndMarker {
                return Err(sub.error("f-string: invalid expression"));
            }
            nodes.push(node);
        }
        Ok(nodes)
    }

    fn parse_paren(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_op("(")?.start;
        if self.eat_op(")") {
            return Ok(self.other(start, Vec::new()));
        }
        if self.at_kw("yield") {
            let y = self.parse_yield()?;
            self.expect_op(")")?;
            return Ok(y);
        }
        let first = self.parse_star_named_expression()?;
        if self.at_kw("for") || self.at_kw("async") {
            let mut children = vec![first];
            self.parse_comprehension_clauses(&mut children)?;
            self.expect_op(")")?;
            return Ok(self.other(start, children));
        }
        if self.eat_op(")") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_op(")") {
                break;
            }
            items.push(self.parse_star_named_expression()?);
        }
        self.expect_op(")")?;
        Ok(self.other(start, items))
    }

    fn parse_list(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_op("[")?.start;
        let mut items = Vec::new();
        if self.eat_op("]") {
            return Ok(self.other(start, items));
        }
        items.push(self.parse_star_named_expression()?);
        if self.at_kw("for") || self.at_kw("async") {
            self.parse_comprehension_clauses(&mut items)?;
            self.expect_op("]")?;
            return Ok(self.other(start, items));
        }
        while self.eat_op(",") {
            if self.at_op("]") {
                break;
            }
            items.push(self.parse_star_named_expression()?);
        }
        self.expect_op("]")?;
        Ok(self.other(start, items))
    }

    fn parse_brace(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_op("{")?.start;
        let mut items = Vec::new();
        if self.eat_op("}") {
            return Ok(self.other(start, items));
        }
        let is_dict = if self.eat_op("**") {
            items.push(self.parse_bitor()?);
            true
        } else {
            items.push(self.parse_star_named_expression()?);
            if self.eat_op(":") {
                items.push(self.parse_expression()?);
                true
            } else {
                false
            }
        };
        if self.at_kw("for") || self.at_kw("async") {
            self.parse_comprehension_clauses(&mut items)?;
            self.expect_op("}")?;
            return Ok(self.other(start, items));
        }
        while self.eat_op(",") {
            if self.at_op("}") {
                break;
            }
            if is_dict {
                if self.eat_op("**") {
                    items.push(self.parse_bitor()?);
                } else {
                    items.push(self.parse_expression()?);
                    self.expect_op(":")?;
                    items.push(self.parse_expression()?);
                }
            } else {
                items.push(self.parse_star_named_expression()?);
            }
        }
        self.expect_op("}")?;
        Ok(self.other(start, items))
    }

    fn parse_comprehension_clauses(&mut self, out: &mut Vec<SyntaxNode>) -> PResult<()> {
        loop {
            if self.at_kw("async") && self.peek_n(1).is_name("for") {
                self.advance();
            }
            if !self.eat_kw("for") {
                break;
            }
            out.push(self.parse_target_list()?);
            self.expect_kw("in")?;
            out.push(self.parse_disjunction()?);
            while self.eat_kw("if") {
                out.push(self.parse_disjunction()?);
            }
        }
        Ok(())
    }

    fn parse_target(&mut self) -> PResult<SyntaxNode> {
        if self.at_op("*") {
            let start = self.advance().start;
            let inner = self.parse_bitor()?;
            return Ok(self.other(start, vec![inner]));
        }
        self.parse_bitor()
    }

    /// Targets of `for`/comprehensions, up to the `in` keyword.
    fn parse_target_list(&mut self) -> PResult<SyntaxNode> {
        let start = self.peek().start;
        let first = self.parse_target()?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_kw("in") {
                break;
            }
            items.push(self.parse_target()?);
        }
        Ok(self.other(start, items))
    }
}

/// Position reached after walking `text` from `start`.
fn advance_pos(start: Pos, text: &str) -> Pos {
    let mut p = start;
    for c in text.chars() {
        if c == '\n' {
            p.line += 1;
            p.col = 0;
        } else {
            p.col += 1;
        }
    }
    p.off = start.off + text.len();
    p
}

/// Maps a position relative to a sub-tokenized fragment back into the file.
fn shift_pos(origin: Pos, rel: Pos) -> Pos {
    Pos {
        line: origin.line + rel.line - 1,
        col: if rel.line == 1 { origin.col + rel.col } else { rel.col },
        off: origin.off + rel.off,
    }
}

fn docstring_of(first: Option<&SyntaxNode>) -> Option<String> {
    let node = first?;
    (node.kind == NodeKind::StringLiteral).then(|| node.literal.clone()).flatten()
}
