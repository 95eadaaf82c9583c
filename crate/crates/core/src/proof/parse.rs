use thiserror::Error;

use super::{Axiom, Justification, ProofNode, Rule};
use crate::asserted::{parse_asserted, AssertedSeq};
use crate::logic::parse_formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("proof syntax error at line {line}, column {col}: {msg}")]
pub struct ProofParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    LBracket,
    RBracket,
    Arrow,
    /// Contents of `{...}`.
    Brace(String),
    /// Contents of `"..."`.
    Str(String),
    Word(String),
}

/// Parse a proof file: one node, written as nested parenthesized forms.
///
/// ```text
/// (A9 {1 | P} "#3" {3 | P})
/// (R1 <node> <node> => {b | P} "S1 ; S2" {e | Q})
/// (R9 x y <node> => ...)
/// (R10 "P -> P'" <node> "Q' -> Q" => ...)
/// (R5 hyps [<asserted> ...] k 1 subproofs [<node> ...])
/// (RepIntro <node> => ...)
/// (HYP 1)
/// ```
///
/// `;` starts a comment running to the end of the line, outside quotes
/// and braces.
pub fn parse_proof(text: &str) -> Result<ProofNode, ProofParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { text, toks, pos: 0 };
    let node = p.node()?;
    if p.pos != p.toks.len() {
        return Err(p.error("unexpected input after the proof"));
    }
    Ok(node)
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ProofParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let delimited = |i: usize, close: u8| -> Result<usize, ProofParseError> {
        text[i + 1..]
            .bytes()
            .position(|b| b == close)
            .map(|j| i + 1 + j)
            .ok_or_else(|| error_at(text, i, &format!("missing closing `{}`", close as char)))
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b if b.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'=' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'{' => {
                let end = delimited(i, b'}')?;
                let t = Tok::Brace(text[i..=end].to_string());
                i = end;
                t
            }
            b'"' => {
                let end = delimited(i, b'"')?;
                let t = Tok::Str(text[i + 1..end].to_string());
                i = end;
                t
            }
            _ => {
                while i < bytes.len() && !b" \t\r\n()[]{}\";".contains(&bytes[i]) {
                    i += 1;
                }
                out.push((start, Tok::Word(text[start..i].to_string())));
                continue;
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

fn error_at(text: &str, offset: usize, msg: &str) -> ProofParseError {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    ProofParseError {
        line,
        col,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ProofParseError {
        let offset = self.toks.get(self.pos).map_or(self.text.len(), |t| t.0);
        error_at(self.text, offset, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ProofParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ProofParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(&format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ProofParseError> {
        let at = self.pos;
        match self.word(&format!("`{kw}`"))? {
            w if w.eq_ignore_ascii_case(kw) => Ok(()),
            _ => {
                self.pos = at;
                Err(self.error(&format!("expected `{kw}`")))
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ProofParseError> {
        let at = self.pos;
        let w = self.word(what)?;
        w.parse().map_err(|_| {
            self.pos = at;
            self.error(&format!("expected {what}, found `{w}`"))
        })
    }

    fn asserted(&mut self) -> Result<AssertedSeq, ProofParseError> {
        let at = self.pos;
        let mut parts = Vec::new();
        for what in [
            "`{entry | pre-condition}`",
            "a quoted sequence",
            "`{exit | post-condition}`",
        ] {
            match (self.next(), parts.len()) {
                (Some(Tok::Brace(b)), 0 | 2) => parts.push(b),
                (Some(Tok::Str(s)), 1) => parts.push(format!("\"{s}\"")),
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&format!("expected {what}")));
                }
            }
        }
        parse_asserted(&parts.join(" ")).map_err(|e| {
            self.pos = at;
            self.error(&e.to_string())
        })
    }

    fn formula_str(&mut self, what: &str) -> Result<crate::logic::Formula, ProofParseError> {
        match self.next() {
            Some(Tok::Str(s)) => parse_formula(&s).map_err(|e| {
                self.pos -= 1;
                self.error(&e.to_string())
            }),
            _ => {
                self.pos -= 1;
                Err(self.error(&format!("expected {what} in double quotes")))
            }
        }
    }

    fn conclusion(&mut self) -> Result<AssertedSeq, ProofParseError> {
        self.expect(Tok::Arrow, "`=>` and the conclusion")?;
        self.asserted()
    }

    fn node(&mut self) -> Result<ProofNode, ProofParseError> {
        self.expect(Tok::Open, "`(`")?;
        let head = self.word("a rule name")?;
        let node = if let Ok(a) = head.parse::<Axiom>() {
            ProofNode::axiom(a, self.asserted()?)
        } else if let Ok(r) = head.parse::<Rule>() {
            let mut premises = Vec::new();
            while self.peek() == Some(&Tok::Open) {
                premises.push(self.node()?);
            }
            ProofNode::rule(r, premises, self.conclusion()?)
        } else {
            match head.to_ascii_uppercase().as_str() {
                "HYP" => ProofNode::Hyp(self.number("a hypothesis number")?),
                "R9" => {
                    let from = self.word("the variable to replace")?;
                    let to = self.word("the replacement variable")?;
                    let premise = Box::new(self.node()?);
                    ProofNode::step(
                        self.conclusion()?,
                        Justification::Substitution { from, to, premise },
                    )
                }
                "R10" => {
                    let pre = self.formula_str("the pre-condition obligation")?;
                    let premise = Box::new(self.node()?);
                    let post = self.formula_str("the post-condition obligation")?;
                    ProofNode::step(
                        self.conclusion()?,
                        Justification::Consequence { pre, premise, post },
                    )
                }
                "R5" => self.repetition()?,
                "REPINTRO" => {
                    let premise = Box::new(self.node()?);
                    ProofNode::step(self.conclusion()?, Justification::RepIntro(premise))
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&format!("unknown rule `{head}`")));
                }
            }
        };
        self.expect(Tok::Close, "`)`")?;
        Ok(node)
    }

    fn repetition(&mut self) -> Result<ProofNode, ProofParseError> {
        self.keyword("hyps")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut hyps = Vec::new();
        while self.peek() != Some(&Tok::RBracket) {
            hyps.push(self.asserted()?);
        }
        self.pos += 1;
        self.keyword("k")?;
        let k_at = self.pos;
        let k = self.number("the index of the concluded hypothesis")?;
        self.keyword("subproofs")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut subproofs = Vec::new();
        while self.peek() != Some(&Tok::RBracket) {
            subproofs.push(self.node()?);
        }
        self.pos += 1;
        let conclusion = if self.peek() == Some(&Tok::Arrow) {
            self.conclusion()?
        } else {
            match k.checked_sub(1).and_then(|i| hyps.get(i)) {
                Some(h) => h.clone(),
                None => {
                    self.pos = k_at;
                    return Err(self.error(&format!("k = {k} is not a hypothesis number")));
                }
            }
        };
        Ok(ProofNode::step(
            conclusion,
            Justification::Repetition { hyps, k, subproofs },
        ))
    }
}
