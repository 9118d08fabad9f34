//! Locates replacement-field expressions inside f-string (and t-string)
//! tokens so they can be parsed as ordinary expressions.

/// Byte ranges, relative to the token text, of every replacement-field
/// expression, including fields nested inside format specs.
pub fn field_ranges(token: &str) -> Result<Vec<(usize, usize)>, String> {
    let quote_at = token.find(['\'', '"']).ok_or("malformed string token")?;
    let prefix = token[..quote_at].to_ascii_lowercase();
    let raw = prefix.contains('r');
    let q = token.as_bytes()[quote_at];
    let triple = token.len() >= quote_at + 6 && token.as_bytes()[quote_at + 1] == q && token.as_bytes()[quote_at + 2] == q;
    let qlen = if triple { 3 } else { 1 };
    let body_start = quote_at + qlen;
    let body_end = token.len() - qlen;
    let mut out = Vec::new();
    let bytes = token.as_bytes();
    let mut i = body_start;
    while i < body_end {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => i += 2,
            b'{' => i = scan_field(bytes, i, body_end, &mut out)?,
            b'}' if bytes.get(i + 1) == Some(&b'}') => i += 2,
            b'}' => return Err("f-string: single '}' is not allowed".into()),
            b'\\' if !raw => {
                if bytes.get(i + 1) == Some(&b'N') && bytes.get(i + 2) == Some(&b'{') {
                    // \N{NAME} is an escape, not a field.
                    let close = token[i..body_end].find('}').ok_or("malformed \\N escape")?;
                    i += close + 1;
                } else if matches!(bytes.get(i + 1), Some(b'{') | Some(b'}')) {
                    i += 1;
                } else {
                    i += 2;
                }
            }
            _ => i += 1,
        }
    }
    Ok(out)
}

/// Scans one field starting at its `{`; returns the index after its `}`.
fn scan_field(bytes: &[u8], open: usize, end: usize, out: &mut Vec<(usize, usize)>) -> Result<usize, String> {
    let expr_start = open + 1;
    let mut j = scan_expression_end(bytes, expr_start, end)?;
    out.push((expr_start, j));
    if bytes[j] == b'=' {
        j += 1;
        while j < end && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
    }
    if j < end && bytes[j] == b'!' {
        j += 2;
    }
    if j < end && bytes[j] == b':' {
        j += 1;
        while j < end && bytes[j] != b'}' {
            if bytes[j] == b'{' {
                j = scan_field(bytes, j, end, out)?;
            } else {
                j += 1;
            }
        }
    }
    if j >= end || bytes[j] != b'}' {
        return Err("f-string: expecting '}'".into());
    }
    Ok(j + 1)
}

/// Index of the first depth-0 `}`, `!`, `:` or self-documenting `=`.
fn scan_expression_end(bytes: &[u8], start: usize, end: usize) -> Result<usize, String> {
    let mut depth = 0usize;
    let mut j = start;
    while j < end {
        let c = bytes[j];
        match c {
            b'\'' | b'"' => {
                j = skip_string(bytes, j, end)?;
                continue;
            }
            b'(' | b'[' | b'{' => depth += 1,
            b')' | b']' => depth = depth.saturating_sub(1),
            b'}' if depth == 0 => return Ok(j),
            b'}' => depth -= 1,
            b'!' if depth == 0 && bytes.get(j + 1) != Some(&b'=') => return Ok(j),
            b'!' => j += 1,
            b':' if depth == 0 => return Ok(j),
            b'=' if depth == 0 => {
                let next = bytes.get(j + 1).copied();
                let prev = if j > start { bytes[j - 1] } else { b' ' };
                if next == Some(b'=') {
                    j += 1;
                } else if !matches!(prev, b'=' | b'!' | b'<' | b'>') {
                    return Ok(j);
                }
            }
            _ => {}
        }
        j += 1;
    }
    Err("f-string: expecting '}'".into())
}

fn skip_string(bytes: &[u8], open: usize, end: usize) -> Result<usize, String> {
    let q = bytes[open];
    let triple = open + 2 < end && bytes[open + 1] == q && bytes[open + 2] == q;
    let mut j = open + if triple { 3 } else { 1 };
    while j < end {
        match bytes[j] {
            b'\\' => j += 2,
            c if c == q => {
                if !triple {
                    return Ok(j + 1);
                }
                if j + 2 < end && bytes[j + 1] == q && bytes[j + 2] == q {
                    return Ok(j + 3);
                }
                j += 1;
            }
            _ => j += 1,
        }
    }
    Err("f-string: unterminated nested string".into())
}
