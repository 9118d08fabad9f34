//! Language server exposing scan results as diagnostics and hovers.
//!
//! Documents are rescanned in full after each change once edits have been
//! quiet for the debounce interval; opening a document scans it at once.

pub mod transport;

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crossbeam_channel::RecvTimeoutError;
use serde_json::{json, Value};

use crate::depdb::DeprecationDb;
use crate::pysrc::{normalize_newlines, SourceSpan, SyntaxError};
use crate::scan::{scan_file, Diagnostic};

pub use transport::{read_message, write_message};

pub const DEFAULT_DEBOUNCE: Duration = Duration::from_millis(200);

const PARSE_ERROR: i64 = -32700;
const INVALID_REQUEST: i64 = -32600;
const METHOD_NOT_FOUND: i64 = -32601;
const INVALID_PARAMS: i64 = -32602;
const SERVER_NOT_INITIALIZED: i64 = -32002;

const SEVERITY_ERROR: u8 = 1;
const SEVERITY_WARNING: u8 = 2;
const SEVERITY_INFORMATION: u8 = 3;

#[derive(Debug, Clone)]
pub struct DocumentState {
    pub uri: String,
    pub version: i64,
    /// Full text with newlines normalized to LF.
    pub text: String,
    pub last_diagnostics: Vec<Diagnostic>,
    pub parse_error: Option<SyntaxError>,
    due: Option<Instant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Exit(i32),
}

pub struct Server<W: Write> {
    db: Arc<DeprecationDb>,
    out: W,
    docs: BTreeMap<String, DocumentState>,
    debounce: Duration,
    initialized: bool,
    shutdown: bool,
}

/// UTF-16 offset of char column `col` in `line`.
fn utf16_col(line: &str, col: u32) -> u32 {
    line.chars().take(col as usize).map(|c| c.len_utf16() as u32).sum()
}

/// Char column at UTF-16 offset `units` in `line`.
fn char_col(line: &str, units: u32) -> u32 {
    let mut seen = 0;
    for (i, c) in line.chars().enumerate() {
        if seen >= units {
            return i as u32;
        }
        seen += c.len_utf16() as u32;
    }
    line.chars().count() as u32
}

fn lsp_position(lines: &[&str], line: u32, col: u32) -> Value {
    let text = lines.get(line.saturating_sub(1) as usize).copied().unwrap_or("");
    json!({ "line": line.saturating_sub(1), "character": utf16_col(text, col) })
}

fn lsp_range(lines: &[&str], span: &SourceSpan) -> Value {
    json!({
        "start": lsp_position(lines, span.start_line, span.start_col),
        "end": lsp_position(lines, span.end_line, span.end_col),
    })
}

fn span_size(s: &SourceSpan) -> (u32, i64) {
    (s.end_line - s.start_line, s.end_col as i64 - s.start_col as i64)
}

/// Applies one `contentChanges` entry; entries without a range replace the
/// whole text.
fn apply_change(text: &mut String, change: &Value) -> Option<()> {
    let new_text = change.get("text")?.as_str()?;
    let Some(range) = change.get("range") else {
        *text = normalize_newlines(new_text);
        return Some(());
    };
    let offset = |pos: &Value| -> Option<usize> {
        let line = pos.get("line")?.as_u64()? as usize;
        let units = pos.get("character")?.as_u64()? as u32;
        let mut start = 0;
        for _ in 0..line {
            start += text[start..].find('\n')? + 1;
        }
        let end = text[start..].find('\n').map_or(text.len(), |i| start + i);
        let col = char_col(&text[start..end], units) as usize;
        Some(start + text[start..end].char_indices().nth(col).map_or(end - start, |(i, _)| i))
    };
    let a = offset(range.get("start")?)?;
    let b = offset(range.get("end")?)?;
    if a > b {
        return None;
    }
    text.replace_range(a..b, &normalize_newlines(new_text));
    Some(())
}

impl<W: Write> Server<W> {
    pub fn new(db: Arc<DeprecationDb>, out: W, debounce: Duration) -> Self {
        Server { db, out, docs: BTreeMap::new(), debounce, initialized: false, shutdown: false }
    }

    pub fn document(&self, uri: &str) -> Option<&DocumentState> {
        self.docs.get(uri)
    }

    pub fn into_writer(self) -> W {
        self.out
    }

    pub fn next_deadline(&self) -> Option<Instant> {
        self.docs.values().filter_map(|d| d.due).min()
    }

    fn send(&mut self, message: Value) -> io::Result<()> {
        write_message(&mut self.out, &message)
    }

    fn reply(&mut self, id: &Value, result: Value) -> io::Result<()> {
        self.send(json!({ "jsonrpc": "2.0", "id": id, "result": result }))
    }

    fn reply_error(&mut self, id: &Value, code: i64, message: &str) -> io::Result<()> {
        self.send(json!({ "jsonrpc": "2.0", "id": id, "error": { "code": code, "message": message } }))
    }

    /// Handles one raw message body.
    pub fn handle_raw(&mut self, body: &str, now: Instant) -> io::Result<Flow> {
        match serde_json::from_str::<Value>(body) {
            Ok(v) => self.handle(v, now),
            Err(e) => {
                self.reply_error(&Value::Null, PARSE_ERROR, &e.to_string())?;
                Ok(Flow::Continue)
            }
        }
    }

    pub fn handle(&mut self, msg: Value, now: Instant) -> io::Result<Flow> {
        let Some(method) = msg.get("method").and_then(Value::as_str) else {
            // A response to a request we never send, or garbage.
            return Ok(Flow::Continue);
        };
        let params = msg.get("params").cloned().unwrap_or(Value::Null);
        match msg.get("id") {
            Some(id) => {
                let id = id.clone();
                self.handle_request(&id, method, &params)?;
                Ok(Flow::Continue)
            }
            None => self.handle_notification(method, &params, now),
        }
    }

    fn handle_request(&mut self, id: &Value, method: &str, params: &Value) -> io::Result<()> {
        if method == "initialize" {
            self.initialized = true;
            let result = json!({
                "capabilities": {
                    "textDocumentSync": { "openClose": true, "change": 1 },
                    "hoverProvider": true,
                },
                "serverInfo": { "name": "deprscan", "version": env!("CARGO_PKG_VERSION") },
            });
            return self.reply(id, result);
        }
        if !self.initialized {
            return self.reply_error(id, SERVER_NOT_INITIALIZED, "server not initialized");
        }
        if self.shutdown {
            return self.reply_error(id, INVALID_REQUEST, "server is shutting down");
        }
        match method {
            "shutdown" => {
                self.flush_all()?;
                self.shutdown = true;
                self.reply(id, Value::Null)
            }
            "textDocument/hover" => {
                let uri = params.pointer("/textDocument/uri").and_then(Value::as_str);
                let line = params.pointer("/position/line").and_then(Value::as_u64);
                let character = params.pointer("/position/character").and_then(Value::as_u64);
                match (uri, line, character) {
                    (Some(uri), Some(line), Some(character)) => {
                        let uri = uri.to_owned();
                        if self.docs.get(&uri).is_some_and(|d| d.due.is_some()) {
                            self.rescan(&uri)?;
                        }
                        let result = self.hover(&uri, line as u32, character as u32).unwrap_or(Value::Null);
                        self.reply(id, result)
                    }
                    _ => self.reply_error(id, INVALID_PARAMS, "hover needs textDocument.uri and position"),
                }
            }
            _ => self.reply_error(id, METHOD_NOT_FOUND, &format!("unsupported method {method}")),
        }
    }

    fn handle_notification(&mut self, method: &str, params: &Value, now: Instant) -> io::Result<Flow> {
        if method == "exit" {
            return Ok(Flow::Exit(if self.shutdown { 0 } else { 1 }));
        }
        if !self.initialized || self.shutdown {
            return Ok(Flow::Continue);
        }
        match method {
            "textDocument/didOpen" => {
                let doc = params.get("textDocument");
                let uri = doc.and_then(|d| d.get("uri")).and_then(Value::as_str);
                let text = doc.and_then(|d| d.get("text")).and_then(Value::as_str);
                let version = doc.and_then(|d| d.get("version")).and_then(Value::as_i64).unwrap_or(0);
                if let (Some(uri), Some(text)) = (uri, text) {
                    self.docs.insert(
                        uri.to_owned(),
                        DocumentState {
                            uri: uri.to_owned(),
                            version,
                            text: normalize_newlines(text),
                            last_diagnostics: Vec::new(),
                            parse_error: None,
                            due: None,
                        },
                    );
                    self.rescan(uri)?;
                }
            }
            "textDocument/didChange" => {
                let uri = params.pointer("/textDocument/uri").and_then(Value::as_str);
                let version = params.pointer("/textDocument/version").and_then(Value::as_i64);
                let changes = params.get("contentChanges").and_then(Value::as_array);
                if let (Some(uri), Some(changes)) = (uri, changes) {
                    self.on_document_changed(uri, version, changes, now)?;
                }
            }
            "textDocument/didClose" => {
                if let Some(uri) = params.pointer("/textDocument/uri").and_then(Value::as_str) {
                    if self.docs.remove(uri).is_some() {
                        self.send(json!({
                            "jsonrpc": "2.0",
                            "method": "textDocument/publishDiagnostics",
                            "params": { "uri": uri, "diagnostics": [] },
                        }))?;
                    }
                }
            }
            _ => {}
        }
        Ok(Flow::Continue)
    }

    fn on_document_changed(&mut self, uri: &str, version: Option<i64>, changes: &[Value], now: Instant) -> io::Result<()> {
        let debounce = self.debounce;
        let Some(doc) = self.docs.get_mut(uri) else {
            log::warn!("change for unopened document {uri}");
            return Ok(());
        };
        let version = version.unwrap_or(doc.version);
        if version < doc.version {
            log::debug!("{uri}: ignoring stale version {version} (have {})", doc.version);
            return Ok(());
        }
        for change in changes {
            if apply_change(&mut doc.text, change).is_none() {
                log::warn!("{uri}: malformed content change ignored");
            }
        }
        doc.version = version;
        if debounce.is_zero() {
            self.rescan(uri)
        } else {
            doc.due = Some(now + debounce);
            Ok(())
        }
    }

    /// Rescans every document whose debounce deadline has passed.
    pub fn flush_due(&mut self, now: Instant) -> io::Result<()> {
        let due: Vec<String> = self.docs.values().filter(|d| d.due.is_some_and(|t| t <= now)).map(|d| d.uri.clone()).collect();
        for uri in due {
            self.rescan(&uri)?;
        }
        Ok(())
    }

    pub fn flush_all(&mut self) -> io::Result<()> {
        let due: Vec<String> = self.docs.values().filter(|d| d.due.is_some()).map(|d| d.uri.clone()).collect();
        for uri in due {
            self.rescan(&uri)?;
        }
        Ok(())
    }

    fn rescan(&mut self, uri: &str) -> io::Result<()> {
        let db = Arc::clone(&self.db);
        let Some(doc) = self.docs.get_mut(uri) else { return Ok(()) };
        doc.due = None;
        match scan_file(Path::new(uri), &doc.text, &db) {
            Ok(diags) => {
                doc.last_diagnostics = diags;
                doc.parse_error = None;
            }
            Err(e) => {
                doc.last_diagnostics.clear();
                doc.parse_error = Some(e);
            }
        }
        let params = self.publish_params(uri);
        self.send(json!({ "jsonrpc": "2.0", "method": "textDocument/publishDiagnostics", "params": params }))
    }

    fn publish_params(&self, uri: &str) -> Value {
        let doc = &self.docs[uri];
        let lines: Vec<&str> = doc.text.split('\n').collect();
        let mut items: Vec<Value> = doc
            .last_diagnostics
            .iter()
            .map(|d| {
                json!({
                    "range": lsp_range(&lines, &d.span),
                    "severity": if d.approximate { SEVERITY_INFORMATION } else { SEVERITY_WARNING },
                    "source": "deprscan",
                    "code": d.record.strategy.as_str(),
                    "message": d.rendered_message,
                })
            })
            .collect();
        if let Some(e) = &doc.parse_error {
            let line = e.line.max(1);
            let text = lines.get(line as usize - 1).copied().unwrap_or("");
            items.push(json!({
                "range": {
                    "start": { "line": line - 1, "character": 0 },
                    "end": { "line": line - 1, "character": utf16_col(text, text.chars().count() as u32) },
                },
                "severity": SEVERITY_ERROR,
                "source": "deprscan",
                "message": format!("syntax error: {}", e.message),
            }));
        }
        json!({ "uri": uri, "version": doc.version, "diagnostics": items })
    }

    /// Hover for a 0-based line and UTF-16 character: exact matches before
    /// approximate ones, then the smallest enclosing span.
    pub fn hover(&self, uri: &str, line: u32, character: u32) -> Option<Value> {
        let doc = self.docs.get(uri)?;
        let lines: Vec<&str> = doc.text.split('\n').collect();
        let col = char_col(lines.get(line as usize)?, character);
        let best = doc
            .last_diagnostics
            .iter()
            .filter(|d| d.span.contains(line + 1, col))
            .min_by_key(|d| (d.approximate, span_size(&d.span)))?;
        Some(json!({
            "contents": { "kind": "plaintext", "value": best.rendered_message },
            "range": lsp_range(&lines, &best.span),
        }))
    }
}

/// Runs the server until `exit`; returns the process exit code.
pub fn serve<R, W>(reader: R, writer: W, db: Arc<DeprecationDb>, debounce: Duration) -> io::Result<i32>
where
    R: BufRead + Send + 'static,
    W: Write,
{
    let (tx, rx) = crossbeam_channel::unbounded::<io::Result<String>>();
    std::thread::spawn(move || {
        let mut reader = reader;
        loop {
            match read_message(&mut reader) {
                Ok(Some(body)) => {
                    if tx.send(Ok(body)).is_err() {
                        break;
                    }
                }
                Ok(None) => break,
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });
    let mut server = Server::new(db, writer, debounce);
    loop {
        let received = match server.next_deadline() {
            Some(deadline) => rx.recv_timeout(deadline.saturating_duration_since(Instant::now())),
            None => rx.recv().map_err(|_| RecvTimeoutError::Disconnected),
        };
        match received {
            Ok(Ok(body)) => {
                if let Flow::Exit(code) = server.handle_raw(&body, Instant::now())? {
                    return Ok(code);
                }
            }
            Ok(Err(e)) => return Err(e),
            Err(RecvTimeoutError::Timeout) => server.flush_due(Instant::now())?,
            Err(RecvTimeoutError::Disconnected) => {
                log::warn!("client closed the stream without exit");
                server.flush_all()?;
                return Ok(1);
            }
        }
    }
}

pub fn serve_stdio(db: Arc<DeprecationDb>, debounce: Duration) -> io::Result<i32> {
    let reader = io::BufReader::new(io::stdin());
    serve(reader, io::stdout(), db, debounce)
}
