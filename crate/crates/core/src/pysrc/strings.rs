//! Decoding of string-literal tokens into their contents.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringToken {
    pub value: String,
    pub is_bytes: bool,
    pub is_formatted: bool,
}

/// Splits a string token into (prefix, body without quotes).
fn split_token(text: &str) -> (&str, &str) {
    let quote_at = text.find(['\'', '"']).unwrap_or(0);
    let (prefix, quoted) = text.split_at(quote_at);
    let q = &quoted[..1];
    let triple = quoted.len() >= 6 && quoted[1..].starts_with(&q.repeat(2));
    let body = if triple { &quoted[3..quoted.len() - 3] } else { &quoted[1..quoted.len() - 1] };
    (prefix, body)
}

pub fn decode_string_token(text: &str) -> StringToken {
    let (prefix, body) = split_token(text);
    let lower = prefix.to_ascii_lowercase();
    let raw = lower.contains('r');
    let is_bytes = lower.contains('b');
    let is_formatted = lower.contains('f') || lower.contains('t');
    let value = if raw { body.to_owned() } else { unescape(body, is_bytes) };
    StringToken { value, is_bytes, is_formatted }
}

fn unescape(body: &str, is_bytes: bool) -> String {
    if !body.contains('\\') {
        return body.to_owned();
    }
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let Some(e) = chars.next() else {
            out.push('\\');
            break;
        };
        match e {
            '\n' => {}
            '\\' => out.push('\\'),
            '\'' => out.push('\''),
            '"' => out.push('"'),
            'a' => out.push('\x07'),
            'b' => out.push('\x08'),
            'f' => out.push('\x0c'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            't' => out.push('\t'),
            'v' => out.push('\x0b'),
            '0'..='7' => {
                let mut v = e.to_digit(8).unwrap();
                for _ in 0..2 {
                    match chars.peek().and_then(|d| d.to_digit(8)) {
                        Some(d) => {
                            v = v * 8 + d;
                            chars.next();
                        }
                        None => break,
                    }
                }
                out.push(char::from_u32(v).unwrap_or('\u{fffd}'));
            }
            'x' => push_hex(&mut out, &mut chars, 2, 'x'),
            'u' if !is_bytes => push_hex(&mut out, &mut chars, 4, 'u'),
            'U' if !is_bytes => push_hex(&mut out, &mut chars, 8, 'U'),
            other => {
                // Unknown escapes (and \N{...}) are kept verbatim.
                out.push('\\');
                out.push(other);
            }
        }
    }
    out
}

fn push_hex(out: &mut String, chars: &mut std::iter::Peekable<std::str::Chars<'_>>, n: usize, tag: char) {
    let digits: String = chars.clone().take(n).collect();
    match u32::from_str_radix(&digits, 16).ok().filter(|_| digits.len() == n).and_then(char::from_u32) {
        Some(ch) => {
            for _ in 0..n {
                chars.next();
            }
            out.push(ch);
        }
        None => {
            out.push('\\');
            out.push(tag);
        }
    }
}
