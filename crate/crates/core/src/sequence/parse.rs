use thiserror::Error;

use super::{BasicAction, PrimitiveInstruction, SequenceTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqParseError {
    #[error("empty instruction sequence")]
    Empty,
    #[error("negative jump offset at position {0}")]
    NegativeJump(usize),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// Parse an instruction sequence term.
///
/// ```text
/// seq    := item (";" item)*
/// item   := atom suffix*
/// suffix := "^" nat | "^w"
/// atom   := "(" seq ")" | "!" | "#" nat | ["+"|"-"] ident "." ident
/// ```
pub fn parse_sequence(text: &str) -> Result<SequenceTerm, SeqParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(SeqParseError::Empty);
    }
    let t = p.seq()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

pub(crate) fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

pub(crate) fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Method names may carry a `:` qualifier, as in `set:t`.
pub(crate) fn is_method_char(c: u8) -> bool {
    is_ident_char(c) || c == b':'
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, msg: &str) -> SeqParseError {
        SeqParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn seq(&mut self) -> Result<SequenceTerm, SeqParseError> {
        let mut items = vec![self.item()?];
        while self.eat(b';') {
            items.push(self.item()?);
        }
        Ok(SequenceTerm::concat_all(items).expect("at least one item"))
    }

    fn item(&mut self) -> Result<SequenceTerm, SeqParseError> {
        let mut t = self.atom()?;
        while self.eat(b'^') {
            self.skip_ws();
            if self.peek() == Some(b'w') {
                self.pos += 1;
                t = SequenceTerm::repeat(t);
            } else {
                let n = self.nat()?;
                let n = u32::try_from(n).map_err(|_| self.error("exponent too large"))?;
                t = SequenceTerm::power(t, n);
            }
        }
        Ok(t)
    }

    fn nat(&mut self) -> Result<u64, SeqParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| SeqParseError::Syntax {
                pos: start,
                msg: "number out of range".into(),
            })
    }

    fn name(&mut self, method: bool) -> Result<String, SeqParseError> {
        let start = self.pos;
        if !self.peek().is_some_and(is_ident_start) {
            return Err(self.error("expected an identifier"));
        }
        let ok = if method {
            is_method_char
        } else {
            is_ident_char
        };
        while self.peek().is_some_and(ok) {
            self.pos += 1;
        }
        Ok(String::from_utf8(self.src[start..self.pos].to_vec()).unwrap())
    }

    fn action(&mut self) -> Result<BasicAction, SeqParseError> {
        self.skip_ws();
        let focus = self.name(false)?;
        if self.peek() != Some(b'.') {
            return Err(self.error("expected '.' between focus and method"));
        }
        self.pos += 1;
        let method = self.name(true)?;
        Ok(BasicAction { focus, method })
    }

    fn atom(&mut self) -> Result<SequenceTerm, SeqParseError> {
        self.skip_ws();
        let instr = match self.peek() {
            None => return Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let t = self.seq()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                return Ok(t);
            }
            Some(b'!') => {
                self.pos += 1;
                PrimitiveInstruction::Halt
            }
            Some(b'#') => {
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some(b'-') {
                    return Err(SeqParseError::NegativeJump(self.pos));
                }
                PrimitiveInstruction::Jump(self.nat()?)
            }
            Some(b'+') => {
                self.pos += 1;
                PrimitiveInstruction::PosTest(self.action()?)
            }
            Some(b'-') => {
                self.pos += 1;
                PrimitiveInstruction::NegTest(self.action()?)
            }
            Some(c) if is_ident_start(c) => PrimitiveInstruction::Basic(self.action()?),
            Some(_) => return Err(self.error("expected an instruction")),
        };
        Ok(SequenceTerm::Instr(instr))
    }
}
