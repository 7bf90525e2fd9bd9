//! Plain-text tensor format.
//!
//! ```text
//! hlform 1
//! field real
//! m 2
//! n 2
//! 1.0
//! 1.0
//! 1.0
//! -1.0
//! ```
//!
//! Four header lines (magic and version, field, order, dimension) followed
//! by the `n^m` coefficients in row-major order of `(j_1, …, j_m)`, one
//! per line. Real coefficients are one number; complex ones are `re im`.
//! Numbers are written in shortest round-trip form, so a write/read cycle
//! is lossless. Blank lines and lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::{coefficient_count, MultilinearForm, Scalar};
use crate::constants::FieldTag;
use crate::error::{Error, Result};

pub const FORM_MAGIC: &str = "hlform";
const FORM_VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_form<K: Scalar, W: Write>(form: &MultilinearForm<K>, mut out: W) -> Result<()> {
    writeln!(out, "{FORM_MAGIC} {FORM_VERSION}").map_err(io_err)?;
    writeln!(out, "field {}", K::FIELD).map_err(io_err)?;
    writeln!(out, "m {}", form.order()).map_err(io_err)?;
    writeln!(out, "n {}", form.dim()).map_err(io_err)?;
    for c in form.coefficients() {
        writeln!(out, "{}", c.to_text()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads the header only, to decide which scalar type to parse into.
pub fn peek_field(text: &str) -> Result<FieldTag> {
    let mut lines = content_lines(text);
    expect_magic(lines.next())?;
    header_value(lines.next(), "field")?.parse()
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn expect_magic(line: Option<&str>) -> Result<()> {
    let line = line.ok_or_else(|| Error::Format("empty input".into()))?;
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        [FORM_MAGIC, v] if v.parse() == Ok(FORM_VERSION) => Ok(()),
        _ => Err(Error::Format(format!(
            "expected `{FORM_MAGIC} {FORM_VERSION}`, got {line:?}"
        ))),
    }
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{key}` header")))?;
    match line.split_once(char::is_whitespace) {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(Error::Format(format!("expected `{key} …`, got {line:?}"))),
    }
}

pub fn read_form<K: Scalar, R: BufRead>(mut input: R) -> Result<MultilinearForm<K>> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(io_err)?;
    let mut lines = content_lines(&text);

    expect_magic(lines.next())?;
    let field: FieldTag = header_value(lines.next(), "field")?.parse()?;
    if field != K::FIELD {
        return Err(Error::Format(format!(
            "file holds a {field} form, expected {}",
            K::FIELD
        )));
    }
    let parse_usize = |v: &str, key: &str| {
        v.parse::<usize>()
            .map_err(|_| Error::Format(format!("`{key}` must be a positive integer, got {v:?}")))
    };
    let m = parse_usize(header_value(lines.next(), "m")?, "m")?;
    let n = parse_usize(header_value(lines.next(), "n")?, "n")?;
    let count = coefficient_count(m, n).ok_or_else(|| Error::SizeGuard(format!("n^m = {n}^{m} is too large")))?;

    let coeffs = lines.map(K::parse_text).collect::<Result<Vec<_>>>()?;
    if coeffs.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            actual: coeffs.len(),
        });
    }
    MultilinearForm::new(m, n, coeffs)
}
