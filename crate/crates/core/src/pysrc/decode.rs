//! Byte-to-text decoding following Python's source-encoding rules.

use std::sync::OnceLock;

use encoding_rs::Encoding;
use regex::bytes::Regex;

const UTF8_BOM: &[u8] = b"\xef\xbb\xbf";

fn coding_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[ \t\x0c]*#.*?coding[:=][ \t]*([-\w.]+)").unwrap())
}

/// Finds a PEP 263 encoding declaration on the first or second line.
///
/// The second line is only consulted when the first line is blank or a
/// comment, as the CPython tokenizer does.
pub fn declared_encoding(bytes: &[u8]) -> Option<String> {
    let mut lines = bytes.split(|b| *b == b'\n');
    let first = lines.next()?;
    if let Some(c) = coding_regex().captures(first) {
        return Some(String::from_utf8_lossy(&c[1]).into_owned());
    }
    let trimmed = first.iter().skip_while(|b| matches!(b, b' ' | b'\t' | b'\x0c' | b'\r'));
    let first_is_comment_or_blank = matches!(trimmed.clone().next(), None | Some(b'#'));
    if !first_is_comment_or_blank {
        return None;
    }
    let second = lines.next()?;
    coding_regex()
        .captures(second)
        .map(|c| String::from_utf8_lossy(&c[1]).into_owned())
}

fn normalize_label(label: &str) -> String {
    let lower = label.to_ascii_lowercase().replace('_', "-");
    // Python accepts a few spellings that WHATWG labels do not.
    match lower.as_str() {
        "utf8" | "utf-8-sig" => "utf-8".to_owned(),
        "latin1" | "latin-1" | "iso-latin-1" | "l1" | "iso8859-1" => "iso-8859-1".to_owned(),
        "ascii" | "us-ascii" => "ascii".to_owned(),
        s if s.starts_with("utf-8-") => "utf-8".to_owned(),
        _ => lower,
    }
}

/// Decodes raw source bytes into text with LF newlines.
///
/// Returns the reason as text when the bytes cannot be decoded; callers turn
/// that into a syntax error for the file.
pub fn decode_source(bytes: &[u8]) -> Result<String, String> {
    let (has_bom, body) = match bytes.strip_prefix(UTF8_BOM) {
        Some(rest) => (true, rest),
        None => (false, bytes),
    };
    let label = declared_encoding(body).map(|l| normalize_label(&l));
    let text = match label.as_deref() {
        None | Some("utf-8") => std::str::from_utf8(body)
            .map(str::to_owned)
            .map_err(|e| format!("invalid utf-8 at byte {}", e.valid_up_to()))?,
        Some(_) if has_bom => return Err("encoding problem: utf-8 BOM with non-utf-8 coding".into()),
        Some("ascii") => {
            if let Some(pos) = body.iter().position(|b| !b.is_ascii()) {
                return Err(format!("non-ascii byte at offset {pos}"));
            }
            String::from_utf8(body.to_vec()).expect("ascii is utf-8")
        }
        // WHATWG maps latin-1 onto windows-1252; Python's latin-1 is a 1:1 byte map.
        Some("iso-8859-1") => body.iter().map(|&b| b as char).collect(),
        Some(other) => {
            let enc = Encoding::for_label(other.as_bytes())
                .ok_or_else(|| format!("unknown encoding: {other}"))?;
            let (cow, had_errors) = enc.decode_without_bom_handling(body);
            if had_errors {
                return Err(format!("source is not valid {}", enc.name()));
            }
            cow.into_owned()
        }
    };
    Ok(normalize_newlines(&text))
}

pub fn normalize_newlines(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\r' {
            if chars.peek() == Some(&'\n') {
                chars.next();
            }
            out.push('\n');
        } else {
            out.push(c);
        }
    }
    out
}
