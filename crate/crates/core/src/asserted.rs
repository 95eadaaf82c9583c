//! Asserted instruction sequences `{b | P} S {e | Q}`.

use std::fmt;

use thiserror::Error;

use crate::logic::{parse_formula, Formula};
use crate::sequence::{parse_sequence, SequenceTerm};

/// The judgment that execution entering `seq` at instruction `entry` in a
/// state satisfying `pre` becomes inactive, or exits at offset `exit`
/// (terminates inside `seq` when `exit` is 0) in a state satisfying `post`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertedSeq {
    pub entry: u64,
    pub pre: Formula,
    pub seq: SequenceTerm,
    pub exit: u64,
    pub post: Formula,
}

impl AssertedSeq {
    pub fn new(entry: u64, pre: Formula, seq: SequenceTerm, exit: u64, post: Formula) -> Self {
        AssertedSeq {
            entry,
            pre,
            seq,
            exit,
            post,
        }
    }

    /// Same judgment up to α-equivalence of the assertions.
    pub fn alpha_eq(&self, other: &AssertedSeq) -> bool {
        self.entry == other.entry
            && self.exit == other.exit
            && self.seq == other.seq
            && self.pre.alpha_eq(&other.pre)
            && self.post.alpha_eq(&other.post)
    }
}

impl fmt::Display for AssertedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{} | {}}} \"{}\" {{{} | {}}}",
            self.entry, self.pre, self.seq, self.exit, self.post
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssertedParseError {
    #[error("asserted sequence syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("entry points are positive")]
    ZeroEntry,
    #[error("in assertion: {0}")]
    Formula(#[from] crate::logic::FormulaParseError),
    #[error("in sequence: {0}")]
    Sequence(#[from] crate::sequence::SeqParseError),
}

/// `{b | P} S {e | Q}` where `S` is optionally enclosed in double quotes.
pub fn parse_asserted(text: &str) -> Result<AssertedSeq, AssertedParseError> {
    let syntax = |pos: usize, msg: &str| AssertedParseError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let (entry, pre, rest_at) = parse_condition(text, 0)?;
    let rest = &text[rest_at..];
    let open = rest.find('{').ok_or_else(|| {
        syntax(
            rest_at + rest.len(),
            "expected `{` before the post-condition",
        )
    })?;
    let mut seq_text = rest[..open].trim();
    if let Some(inner) = seq_text.strip_prefix('"') {
        seq_text = inner
            .strip_suffix('"')
            .ok_or_else(|| syntax(rest_at, "unterminated sequence quote"))?;
    }
    let seq = parse_sequence(seq_text)?;
    let (exit, post, end) = parse_condition(text, rest_at + open)?;
    if !text[end..].trim().is_empty() {
        return Err(syntax(end, "unexpected trailing input"));
    }
    if entry == 0 {
        return Err(AssertedParseError::ZeroEntry);
    }
    Ok(AssertedSeq::new(entry, pre, seq, exit, post))
}

/// `{n | F}` starting at or after `from`; returns the number, the formula
/// and the byte offset just past the closing brace.
fn parse_condition(text: &str, from: usize) -> Result<(u64, Formula, usize), AssertedParseError> {
    let syntax = |pos: usize, msg: &str| AssertedParseError::Syntax {
        pos,
        msg: msg.to_string(),
    };
    let skipped = text[from..].len() - text[from..].trim_start().len();
    let start = from + skipped;
    if !text[start..].starts_with('{') {
        return Err(syntax(start, "expected `{`"));
    }
    let close = text[start..]
        .find('}')
        .map(|i| start + i)
        .ok_or_else(|| syntax(start, "unclosed `{`"))?;
    let inner = &text[start + 1..close];
    let bar = inner
        .find('|')
        .ok_or_else(|| syntax(start + 1, "expected `|` after the instruction number"))?;
    let num = inner[..bar].trim();
    let n = num.parse::<u64>().map_err(|_| {
        syntax(
            start + 1,
            &format!("expected a natural number, found `{num}`"),
        )
    })?;
    let f = parse_formula(&inner[bar + 1..])?;
    Ok((n, f, close + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a =
            parse_asserted("{1 | true} \"(-c.iszero;#2;!;c.decr)^w\" {0 | c = nnc(0)}").unwrap();
        assert_eq!(a.entry, 1);
        assert_eq!(a.exit, 0);
        assert_eq!(a.pre, Formula::True);
        let b = parse_asserted(&a.to_string()).unwrap();
        assert_eq!(a, b);
        let unquoted =
            parse_asserted("{1 | true} (-c.iszero;#2;!;c.decr)^w {0 | c = nnc(0)}").unwrap();
        assert_eq!(a, unquoted);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_asserted("{0 | true} ! {0 | true}"),
            Err(AssertedParseError::ZeroEntry)
        ));
        assert!(parse_asserted("{1 | true} ! {0 | true").is_err());
        assert!(parse_asserted("{x | true} ! {0 | true}").is_err());
        assert!(parse_asserted("{1 | true} \"!\" {0 | true} extra").is_err());
        assert!(matches!(
            parse_asserted("{1 | c = } ! {0 | true}"),
            Err(AssertedParseError::Formula(_))
        ));
    }
}
