//! Text form of grounding outputs.
//!
//! ```text
//! output    = "" | boxes | masks
//! boxes     = group { "<bsep>" group }        ; 4 integers per group
//! masks     = group { "<msep>" group }        ; even count >= 6 per group
//! group     = "[" int { "," int } "]"
//! int       = digit { digit }
//! ```
//!
//! The serializer writes integers separated by `", "` with no other
//! whitespace. The parser accepts arbitrary ASCII whitespace between tokens.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::quant::{QuantBox, QuantSeq};

pub const BOX_SEP: &str = "<bsep>";
pub const MASK_SEP: &str = "<msep>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundingOutput {
    NoTarget,
    Boxes(Vec<QuantBox>),
    Masks(Vec<QuantSeq>),
}

impl GroundingOutput {
    pub fn is_no_target(&self) -> bool {
        matches!(self, Self::NoTarget)
    }
}

impl fmt::Display for GroundingOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

fn bracket(values: impl IntoIterator<Item = u32>) -> String {
    let body: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    format!("[{}]", body.join(", "))
}

/// Canonical text for a grounding output. `NoTarget` is the empty string.
pub fn serialize(out: &GroundingOutput) -> String {
    match out {
        GroundingOutput::NoTarget => String::new(),
        GroundingOutput::Boxes(boxes) => boxes
            .iter()
            .map(|b| bracket(b.coords()))
            .collect::<Vec<_>>()
            .join(BOX_SEP),
        GroundingOutput::Masks(masks) => masks
            .iter()
            .map(|m| bracket(m.flat()))
            .collect::<Vec<_>>()
            .join(MASK_SEP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Boxes,
    Masks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub mode: ParseMode,
    pub expect: Expect,
    pub n_bins: u32,
}

impl ParseOptions {
    pub fn strict(expect: Expect) -> Self {
        Self { mode: ParseMode::Strict, expect, n_bins: 1000 }
    }

    pub fn lenient(expect: Expect) -> Self {
        Self { mode: ParseMode::Lenient, expect, n_bins: 1000 }
    }

    pub fn with_bins(mut self, n_bins: u32) -> Self {
        self.n_bins = n_bins;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("not an integer: {0:?}")]
    NotAnInteger(String),
    #[error("odd coordinate count ({0})")]
    OddCoordinateCount(usize),
    #[error("empty bracket group")]
    EmptyGroup,
    #[error("bin out of range: {value} not in [0, {n_bins})")]
    BinOutOfRange { value: i64, n_bins: u32 },
    #[error("box needs 4 integers, found {0}")]
    BoxArity(usize),
    #[error("fewer than 3 points ({0})")]
    TooFewPoints(usize),
    #[error("separator {found} where {expected} was expected")]
    WrongSeparator { found: &'static str, expected: &'static str },
    #[error("box corners out of order")]
    InvertedBox,
}

/// Parse failure at a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

/// A parsed output plus the number of repairs lenient mode applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub output: GroundingOutput,
    pub warnings: usize,
}

struct Group {
    offset: usize,
    values: Vec<(i64, usize)>,
}

struct Scanner<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn bytes(&self) -> &'a [u8] {
        self.text.as_bytes()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.pos, kind }
    }

    fn unexpected(&self) -> ParseError {
        match self.text[self.pos..].chars().next() {
            Some(c) => self.err(ParseErrorKind::UnexpectedChar(c)),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn integer(&mut self) -> Result<(i64, usize), ParseError> {
        let start = self.pos;
        let end = self.text[start..]
            .find(|c: char| c == ',' || c == ']' || c == '[' || c == '<' || c.is_ascii_whitespace())
            .map_or(self.text.len(), |i| start + i);
        let token = &self.text[start..end];
        let digits = token.strip_prefix(['-', '+']).unwrap_or(token);
        let not_int = || ParseError {
            offset: start,
            kind: ParseErrorKind::NotAnInteger(token.to_string()),
        };
        if token.is_empty() {
            return Err(self.unexpected());
        }
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(not_int());
        }
        let value: i64 = token.parse().map_err(|_| not_int())?;
        self.pos = end;
        Ok((value, start))
    }

    fn group(&mut self) -> Result<Group, ParseError> {
        let offset = self.pos;
        if self.peek() != Some(b'[') {
            return Err(self.unexpected());
        }
        self.pos += 1;
        self.skip_ws();
        let mut values = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(Group { offset, values });
        }
        loop {
            self.skip_ws();
            values.push(self.integer()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(Group { offset, values });
                }
                _ => return Err(self.unexpected()),
            }
        }
    }

    fn separator(&mut self) -> Option<&'static str> {
        let rest = &self.text[self.pos..];
        [BOX_SEP, MASK_SEP].into_iter().find(|sep| rest.starts_with(sep))
    }
}

/// Parses model output text into a [`GroundingOutput`].
///
/// Empty or whitespace-only text is `NoTarget`. Lenient mode drops a
/// trailing unpaired integer, clamps out-of-range bins, skips empty groups,
/// accepts either separator and reorders inverted box corners; each repair
/// counts as one warning.
pub fn parse_grounding(text: &str, opts: &ParseOptions) -> Result<Parsed, ParseError> {
    let lenient = opts.mode == ParseMode::Lenient;
    let expected_sep = match opts.expect {
        Expect::Boxes => BOX_SEP,
        Expect::Masks => MASK_SEP,
    };
    let mut sc = Scanner { text, pos: 0 };
    sc.skip_ws();
    if sc.peek().is_none() {
        return Ok(Parsed { output: GroundingOutput::NoTarget, warnings: 0 });
    }

    let mut groups = Vec::new();
    loop {
        sc.skip_ws();
        groups.push(sc.group()?);
        sc.skip_ws();
        if sc.peek().is_none() {
            break;
        }
        match sc.separator() {
            Some(sep) if sep == expected_sep || lenient => sc.pos += sep.len(),
            Some(sep) => {
                return Err(sc.err(ParseErrorKind::WrongSeparator { found: sep, expected: expected_sep }))
            }
            None => return Err(sc.unexpected()),
        }
        sc.skip_ws();
        if sc.peek().is_none() {
            return Err(sc.err(ParseErrorKind::UnexpectedEnd));
        }
    }

    let mut warnings = 0usize;
    let mut cleaned: Vec<(usize, Vec<u32>)> = Vec::with_capacity(groups.len());
    for g in groups {
        if g.values.is_empty() {
            if lenient {
                warnings += 1;
                continue;
            }
            return Err(ParseError { offset: g.offset, kind: ParseErrorKind::EmptyGroup });
        }
        let mut values = Vec::with_capacity(g.values.len());
        for (v, at) in g.values {
            if v < 0 || v >= i64::from(opts.n_bins) {
                if !lenient {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::BinOutOfRange { value: v, n_bins: opts.n_bins },
                    });
                }
                warnings += 1;
                values.push(v.clamp(0, i64::from(opts.n_bins) - 1) as u32);
            } else {
                values.push(v as u32);
            }
        }
        if values.len() % 2 == 1 {
            if !lenient {
                return Err(ParseError {
                    offset: g.offset,
                    kind: ParseErrorKind::OddCoordinateCount(values.len()),
                });
            }
            warnings += 1;
            values.pop();
        }
        cleaned.push((g.offset, values));
    }
    if cleaned.is_empty() {
        return Err(ParseError { offset: 0, kind: ParseErrorKind::EmptyGroup });
    }

    let output = match opts.expect {
        Expect::Boxes => {
            let mut boxes = Vec::with_capacity(cleaned.len());
            for (offset, v) in cleaned {
                if v.len() != 4 {
                    return Err(ParseError { offset, kind: ParseErrorKind::BoxArity(v.len()) });
                }
                let mut b = QuantBox::new(v[0], v[1], v[2], v[3]);
                if b.x0 > b.x1 || b.y0 > b.y1 {
                    if !lenient {
                        return Err(ParseError { offset, kind: ParseErrorKind::InvertedBox });
                    }
                    warnings += 1;
                    b = QuantBox::new(b.x0.min(b.x1), b.y0.min(b.y1), b.x0.max(b.x1), b.y0.max(b.y1));
                }
                boxes.push(b);
            }
            GroundingOutput::Boxes(boxes)
        }
        Expect::Masks => {
            let mut masks = Vec::with_capacity(cleaned.len());
            for (offset, v) in cleaned {
                if v.len() < 6 {
                    return Err(ParseError { offset, kind: ParseErrorKind::TooFewPoints(v.len() / 2) });
                }
                masks.push(QuantSeq::new(v.chunks_exact(2).map(|c| (c[0], c[1])).collect()));
            }
            GroundingOutput::Masks(masks)
        }
    };
    Ok(Parsed { output, warnings })
}
