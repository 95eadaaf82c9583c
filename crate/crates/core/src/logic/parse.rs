use thiserror::Error;

use super::{Formula, Sort, Term};
use crate::sequence::parse::{is_ident_char, is_ident_start, is_method_char};
use crate::service::Reply;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula syntax error at position {pos}: {msg}")]
pub struct FormulaParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse an assertion.
///
/// ```text
/// F := F -> F | F \/ F | F /\ F | ~F | (F) | true | false
///    | exists x:sort. F | forall x:sort. F | t = t | t != t
/// t := x | :t | :f | :d | 0 | s(t) | p(t) | nnc(t) | true | false | reg(t)
///    | d[m](t) | r[m](t)
/// ```
///
/// `->` associates to the right and binds weakest; quantifier bodies
/// extend as far right as possible.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> FormulaParseError {
        FormulaParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn looking_at(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.looking_at(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), FormulaParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    /// Identifier at the cursor without consuming it.
    fn peek_ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if start >= self.src.len() || !is_ident_start(self.src[start]) {
            return None;
        }
        let mut end = start;
        while end < self.src.len() && is_ident_char(self.src[end]) {
            end += 1;
        }
        std::str::from_utf8(&self.src[start..end])
            .ok()
            .map(str::to_string)
    }

    fn ident(&mut self) -> Result<String, FormulaParseError> {
        let Some(id) = self.peek_ident() else {
            return Err(self.error("expected an identifier"));
        };
        self.pos += id.len();
        Ok(id)
    }

    /// The byte after the identifier at the cursor, skipping whitespace.
    fn after_ident(&mut self) -> Option<u8> {
        let len = self.peek_ident()?.len();
        let mut i = self.pos + len;
        while i < self.src.len() && self.src[i].is_ascii_whitespace() {
            i += 1;
        }
        self.src.get(i).copied()
    }

    fn implication(&mut self) -> Result<Formula, FormulaParseError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaParseError> {
        let mut f = self.conjunction()?;
        while self.eat("\\/") {
            let g = self.conjunction()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaParseError> {
        let mut f = self.unary()?;
        while self.eat("/\\") {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, FormulaParseError> {
        if self.eat("~") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("(") {
            let f = self.implication()?;
            self.expect(")")?;
            return Ok(f);
        }
        match self.peek_ident().as_deref() {
            Some(q @ ("exists" | "forall")) => {
                let exists = q == "exists";
                self.pos += q.len();
                let x = self.ident()?;
                let sort = if self.eat(":") {
                    match self.ident()?.as_str() {
                        "nat" => Sort::Nat,
                        "bool" => Sort::Bool,
                        "serv" => Sort::Serv,
                        "repl" => Sort::Repl,
                        s => return Err(self.error(&format!("unknown sort `{s}`"))),
                    }
                } else {
                    Sort::Nat
                };
                self.expect(".")?;
                let body = self.implication()?;
                return Ok(if exists {
                    Formula::Exists(x, sort, Box::new(body))
                } else {
                    Formula::Forall(x, sort, Box::new(body))
                });
            }
            Some(c @ ("true" | "false")) => {
                let value = c == "true";
                let next = self.after_ident();
                if next != Some(b'=') && next != Some(b'!') {
                    self.pos += c.len();
                    return Ok(if value { Formula::True } else { Formula::False });
                }
            }
            _ => {}
        }
        let lhs = self.term()?;
        if self.eat("!=") {
            let rhs = self.term()?;
            Ok(Formula::neq(lhs, rhs))
        } else if self.eat("=") {
            let rhs = self.term()?;
            Ok(Formula::eq(lhs, rhs))
        } else {
            Err(self.error("expected `=` or `!=`"))
        }
    }

    fn method(&mut self) -> Result<String, FormulaParseError> {
        self.expect("[")?;
        self.skip_ws();
        let start = self.pos;
        if start >= self.src.len() || !is_ident_start(self.src[start]) {
            return Err(self.error("expected a method name"));
        }
        while self.pos < self.src.len() && is_method_char(self.src[self.pos]) {
            self.pos += 1;
        }
        let m = String::from_utf8(self.src[start..self.pos].to_vec()).unwrap();
        self.expect("]")?;
        Ok(m)
    }

    fn arg(&mut self) -> Result<Term, FormulaParseError> {
        self.expect("(")?;
        let t = self.term()?;
        self.expect(")")?;
        Ok(t)
    }

    fn term(&mut self) -> Result<Term, FormulaParseError> {
        self.skip_ws();
        if self.eat(":") {
            return match self.ident()?.as_str() {
                "t" => Ok(Term::Reply(Reply::T)),
                "f" => Ok(Term::Reply(Reply::F)),
                "d" => Ok(Term::Reply(Reply::D)),
                _ => Err(self.error("expected a reply literal :t, :f or :d")),
            };
        }
        if self.eat("0") {
            return Ok(Term::Zero);
        }
        let Some(name) = self.peek_ident() else {
            return Err(self.error("expected a term"));
        };
        let next = self.after_ident();
        match (name.as_str(), next) {
            ("d", Some(b'[')) | ("r", Some(b'[')) => {
                self.pos += 1;
                let m = self.method()?;
                let t = self.arg()?;
                Ok(if name == "d" {
                    Term::Derive(m, Box::new(t))
                } else {
                    Term::ReplyOf(m, Box::new(t))
                })
            }
            ("s" | "p" | "nnc" | "reg", Some(b'(')) => {
                self.pos += name.len();
                let t = self.arg()?;
                Ok(match name.as_str() {
                    "s" => Term::succ(t),
                    "p" => Term::pred(t),
                    "nnc" => Term::nnc(t),
                    _ => Term::reg(t),
                })
            }
            ("true", _) => {
                self.pos += 4;
                Ok(Term::Bool(true))
            }
            ("false", _) => {
                self.pos += 5;
                Ok(Term::Bool(false))
            }
            _ => {
                self.pos += name.len();
                Ok(Term::Var(name))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_grammar() {
        let f = parse_formula("c = nnc(0) \\/ c = nnc(s(n))").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::eq(Term::var("c"), Term::nnc(Term::Zero)),
                Formula::eq(Term::var("c"), Term::nnc(Term::succ(Term::var("n")))),
            )
        );
        let g = parse_formula("r[iszero](c) != :d /\\ d[decr](c) = nnc(n)").unwrap();
        assert_eq!(
            g,
            Formula::and(
                Formula::neq(
                    Term::reply_of("iszero", Term::var("c")),
                    Term::Reply(Reply::D)
                ),
                Formula::eq(
                    Term::derive("decr", Term::var("c")),
                    Term::nnc(Term::var("n"))
                ),
            )
        );
        assert_eq!(
            parse_formula("r = reg(true)").unwrap(),
            Formula::eq(Term::var("r"), Term::reg(Term::Bool(true)))
        );
        assert_eq!(
            parse_formula("r[set:t](r) = :t").unwrap(),
            Formula::eq(
                Term::reply_of("set:t", Term::var("r")),
                Term::Reply(Reply::T)
            )
        );
    }

    #[test]
    fn precedence() {
        let f = parse_formula("true -> false -> ~true /\\ false \\/ true").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::True,
                Formula::implies(
                    Formula::False,
                    Formula::or(
                        Formula::and(Formula::not(Formula::True), Formula::False),
                        Formula::True
                    )
                )
            )
        );
        let q = parse_formula("exists n. c = nnc(n) /\\ true").unwrap();
        assert!(
            matches!(q, Formula::Exists(_, Sort::Nat, ref b) if matches!(**b, Formula::And(..)))
        );
    }

    #[test]
    fn focus_names_that_look_like_operators() {
        let f = parse_formula("s = d").unwrap();
        assert_eq!(f, Formula::eq(Term::var("s"), Term::var("d")));
        let g = parse_formula("r[get](r) = :t").unwrap();
        assert_eq!(
            g,
            Formula::eq(Term::reply_of("get", Term::var("r")), Term::Reply(Reply::T))
        );
    }

    #[test]
    fn errors() {
        assert!(parse_formula("").is_err());
        assert!(parse_formula("c =").is_err());
        assert!(parse_formula("c = nnc(0").is_err());
        assert!(parse_formula("exists n:widget. true").is_err());
        assert!(parse_formula("c = :x").is_err());
        let e = parse_formula("true true").unwrap_err();
        assert_eq!(e.pos, 5);
    }
}
