//! Python 3 tokenizer: logical lines, INDENT/DEDENT, and string/number/operator
//! tokens with line and character positions.

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    /// 1-based.
    pub line: u32,
    /// 0-based, in characters.
    pub col: u32,
    /// Byte offset into the normalized text.
    pub off: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Name,
    Number,
    String,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

#[derive(Debug, Clone, Copy)]
pub struct Token<'s> {
    pub kind: TokKind,
    pub text: &'s str,
    pub start: Pos,
    pub end: Pos,
}

impl Token<'_> {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokKind::Op && self.text == op
    }

    pub fn is_name(&self, name: &str) -> bool {
        self.kind == TokKind::Name && self.text == name
    }
}

const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "...", "!="];
const OPS2: &[&str] = &[
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=", "@=", ":=",
];
const OPS1: &str = "+-*/%@&|^~<>()[]{},:;.=!";

fn is_id_start(c: char) -> bool {
    c == '_' || unicode_ident::is_xid_start(c)
}

fn is_id_continue(c: char) -> bool {
    unicode_ident::is_xid_continue(c)
}

fn is_string_prefix(p: &str) -> bool {
    matches!(
        p.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "br" | "rb" | "f" | "fr" | "rf" | "t" | "tr" | "rt"
    )
}

struct Lexer<'s, 'f> {
    src: &'s str,
    file: &'f str,
    pos: Pos,
    tokens: Vec<Token<'s>>,
    indents: Vec<u32>,
    brackets: Vec<(char, Pos)>,
    at_line_start: bool,
}

pub fn tokenize<'s>(file: &str, src: &'s str) -> Result<Vec<Token<'s>>, SyntaxError> {
    let mut lx = Lexer {
        src,
        file,
        pos: Pos { line: 1, col: 0, off: 0 },
        tokens: Vec::with_capacity(src.len() / 4),
        indents: vec![0],
        brackets: Vec::new(),
        at_line_start: true,
    };
    lx.run()?;
    Ok(lx.tokens)
}

impl<'s> Lexer<'s, '_> {
    fn err(&self, line: u32, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.file, line, msg)
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos.off..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos.off..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos.off += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 0;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn push(&mut self, kind: TokKind, start: Pos) {
        let text = &self.src[start.off..self.pos.off];
        self.tokens.push(Token { kind, text, start, end: self.pos });
    }

    fn push_empty(&mut self, kind: TokKind) {
        let p = self.pos;
        self.tokens.push(Token { kind, text: "", start: p, end: p });
    }

    fn last_is_newline(&self) -> bool {
        matches!(
            self.tokens.last().map(|t| t.kind),
            None | Some(TokKind::Newline) | Some(TokKind::Indent) | Some(TokKind::Dedent)
        )
    }

    fn run(&mut self) -> Result<(), SyntaxError> {
        loop {
            if self.at_line_start && self.brackets.is_empty() && !self.handle_indentation()? {
                break;
            }
            let Some(c) = self.peek() else { break };
            match c {
                ' ' | '\t' | '\x0c' => {
                    self.bump();
                }
                '#' => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                '\n' => {
                    if self.brackets.is_empty() {
                        self.push_empty(TokKind::Newline);
                        self.at_line_start = true;
                    }
                    self.bump();
                }
                '\\' => {
                    let line = self.pos.line;
                    self.bump();
                    match self.peek() {
                        Some('\n') => {
                            self.bump();
                        }
                        None => return Err(self.err(line, "unexpected EOF after line continuation")),
                        Some(_) => {
                            return Err(self.err(line, "unexpected character after line continuation character"))
                        }
                    }
                }
                c if is_id_start(c) => self.name_or_string()?,
                c if c.is_ascii_digit() => self.number(),
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => self.number(),
                '"' | '\'' => {
                    let start = self.pos;
                    self.string_body(start, "")?;
                }
                _ => self.operator()?,
            }
        }
        if let Some((open, at)) = self.brackets.last() {
            return Err(self.err(at.line, format!("'{open}' was never closed")));
        }
        if !self.last_is_newline() {
            self.push_empty(TokKind::Newline);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push_empty(TokKind::Dedent);
        }
        self.push_empty(TokKind::EndMarker);
        Ok(())
    }

    /// Measures indentation at the start of a physical line and emits
    /// INDENT/DEDENT. Returns false at EOF.
    fn handle_indentation(&mut self) -> Result<bool, SyntaxError> {
        loop {
            let mut width: u32 = 0;
            loop {
                match self.peek() {
                    Some(' ') => width += 1,
                    Some('\t') => width = (width / 8 + 1) * 8,
                    Some('\x0c') => width = 0,
                    _ => break,
                }
                self.bump();
            }
            match self.peek() {
                None => return Ok(false),
                Some('\n') => {
                    self.bump();
                    continue;
                }
                Some('#') => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                    continue;
                }
                Some('\\') if self.peek_at(1) == Some('\n') => {
                    // A continuation on an otherwise blank line joins with the next.
                    self.at_line_start = false;
                    self.apply_indent(width)?;
                    return Ok(true);
                }
                Some(_) => {
                    self.at_line_start = false;
                    self.apply_indent(width)?;
                    return Ok(true);
                }
            }
        }
    }

    fn apply_indent(&mut self, width: u32) -> Result<(), SyntaxError> {
        let current = *self.indents.last().expect("indent stack never empty");
        if width > current {
            self.indents.push(width);
            self.push_empty(TokKind::Indent);
        } else if width < current {
            while *self.indents.last().unwrap() > width {
                self.indents.pop();
                self.push_empty(TokKind::Dedent);
            }
            if *self.indents.last().unwrap() != width {
                return Err(self.err(self.pos.line, "unindent does not match any outer indentation level"));
            }
        }
        Ok(())
    }

    fn name_or_string(&mut self) -> Result<(), SyntaxError> {
        let start = self.pos;
        while self.peek().is_some_and(is_id_continue) {
            self.bump();
        }
        let word = &self.src[start.off..self.pos.off];
        if matches!(self.peek(), Some('"' | '\'')) && is_string_prefix(word) {
            return self.string_body(start, word);
        }
        self.push(TokKind::Name, start);
        Ok(())
    }

    fn number(&mut self) {
        let start = self.pos;
        let radix_prefixed = self.peek() == Some('0')
            && matches!(self.peek_at(1), Some('x' | 'X' | 'o' | 'O' | 'b' | 'B'));
        let mut prev = '\0';
        while let Some(c) = self.peek() {
            let take = c.is_ascii_alphanumeric()
                || c == '_'
                || (c == '.' && !radix_prefixed && prev != '.')
                || (matches!(c, '+' | '-') && !radix_prefixed && matches!(prev, 'e' | 'E'));
            if !take {
                break;
            }
            // `1.__class__` style: stop before an attribute access.
            if c == '.' && self.peek_at(1).is_some_and(|n| n == '_' || n.is_alphabetic() && !matches!(n, 'e' | 'E' | 'j' | 'J')) {
                break;
            }
            prev = c;
            self.bump();
        }
        self.push(TokKind::Number, start);
    }

    fn string_body(&mut self, start: Pos, prefix: &str) -> Result<(), SyntaxError> {
        let lower = prefix.to_ascii_lowercase();
        let formatted = lower.contains('f') || lower.contains('t');
        self.scan_string(formatted)?;
        self.push(TokKind::String, start);
        Ok(())
    }

    /// Scans a quoted body starting at the opening quote.
    fn scan_string(&mut self, formatted: bool) -> Result<(), SyntaxError> {
        let line = self.pos.line;
        let quote = self.bump().expect("caller checked quote");
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.bump();
            self.bump();
        }
        let mut depth = 0u32;
        loop {
            let Some(c) = self.peek() else {
                let what = if triple { "unterminated triple-quoted string literal" } else { "unterminated string literal" };
                return Err(self.err(line, what));
            };
            if formatted && depth > 0 {
                match c {
                    '{' | '[' | '(' => {
                        depth += 1;
                        self.bump();
                    }
                    '}' | ']' | ')' => {
                        depth -= 1;
                        self.bump();
                    }
                    // Nested literal inside a replacement field; a same-quote
                    // literal here is only valid under 3.12 rules.
                    '"' | '\'' => self.scan_string(false)?,
                    _ => {
                        self.bump();
                    }
                }
                continue;
            }
            match c {
                '\\' => {
                    self.bump();
                    if self.bump().is_none() {
                        return Err(self.err(line, "unterminated string literal"));
                    }
                }
                '\n' if !triple => return Err(self.err(line, "unterminated string literal")),
                '{' if formatted => {
                    self.bump();
                    if self.peek() == Some('{') {
                        self.bump();
                    } else {
                        depth = 1;
                    }
                }
                c if c == quote => {
                    if !triple {
                        self.bump();
                        return Ok(());
                    }
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.bump();
                        self.bump();
                        self.bump();
                        return Ok(());
                    }
                    self.bump();
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn operator(&mut self) -> Result<(), SyntaxError> {
        let start = self.pos;
        let rest = &self.src[self.pos.off..];
        let op = OPS3
            .iter()
            .chain(OPS2.iter())
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .or_else(|| rest.chars().next().filter(|c| OPS1.contains(*c)).map(|_| 1));
        let Some(len) = op else {
            let c = rest.chars().next().unwrap_or('?');
            return Err(self.err(start.line, format!("invalid character '{c}' (U+{:04X})", c as u32)));
        };
        for _ in 0..len {
            self.bump();
        }
        let text = &self.src[start.off..self.pos.off];
        match text {
            "(" | "[" | "{" => self.brackets.push((text.chars().next().unwrap(), start)),
            ")" | "]" | "}" => {
                let close = text.chars().next().unwrap();
                let expected = match close {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                match self.brackets.pop() {
                    Some((open, _)) if open == expected => {}
                    Some((open, _)) => {
                        return Err(self.err(start.line, format!("closing parenthesis '{close}' does not match opening parenthesis '{open}'")))
                    }
                    None => return Err(self.err(start.line, format!("unmatched '{close}'"))),
                }
            }
            _ => {}
        }
        self.push(TokKind::Op, start);
        Ok(())
    }
}
