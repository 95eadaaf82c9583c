//! First-order assertions over the service-algebra signature. Foci occur
//! as free variables of sort `serv`.

mod entails;
mod eval;
mod parse;
mod simplify;
mod subst;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::service::Reply;

pub(crate) use entails::valuations;
pub use entails::{entails, EntailVerdict, Valuation, Witness};
pub use eval::{eval_formula, eval_with, EvalError, Truth, Value};
pub use parse::{parse_formula, FormulaParseError};
pub use simplify::{simplify, symbolically_valid};
pub use subst::{fresh_name, substitute, Substitution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Serv,
    Nat,
    Bool,
    Repl,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Serv => "serv",
            Sort::Nat => "nat",
            Sort::Bool => "bool",
            Sort::Repl => "repl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// A focus or a variable; which one is settled by sort inference.
    Var(String),
    Reply(Reply),
    /// `d[m](t)`: the service `t` proceeds as after processing `m`.
    Derive(String, Box<Term>),
    /// `r[m](t)`: the reply of `t` to `m`.
    ReplyOf(String, Box<Term>),
    Zero,
    Succ(Box<Term>),
    Pred(Box<Term>),
    /// The counter service with the given content.
    Nnc(Box<Term>),
    Bool(bool),
    /// The register service with the given content.
    Reg(Box<Term>),
}

impl Term {
    pub fn var(x: &str) -> Self {
        Term::Var(x.to_string())
    }

    pub fn derive(m: &str, t: Term) -> Self {
        Term::Derive(m.to_string(), Box::new(t))
    }

    pub fn reply_of(m: &str, t: Term) -> Self {
        Term::ReplyOf(m.to_string(), Box::new(t))
    }

    pub fn succ(t: Term) -> Self {
        Term::Succ(Box::new(t))
    }

    pub fn pred(t: Term) -> Self {
        Term::Pred(Box::new(t))
    }

    pub fn nnc(t: Term) -> Self {
        Term::Nnc(Box::new(t))
    }

    pub fn reg(t: Term) -> Self {
        Term::Reg(Box::new(t))
    }

    /// The numeral `s(...s(0))`.
    pub fn numeral(n: u64) -> Self {
        (0..n).fold(Term::Zero, |t, _| Term::succ(t))
    }

    /// Number of nested constructors.
    pub fn depth(&self) -> u64 {
        match self {
            Term::Derive(_, t)
            | Term::ReplyOf(_, t)
            | Term::Succ(t)
            | Term::Pred(t)
            | Term::Nnc(t)
            | Term::Reg(t) => 1 + t.depth(),
            Term::Var(_) | Term::Reply(_) | Term::Zero | Term::Bool(_) => 0,
        }
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Derive(_, t)
            | Term::ReplyOf(_, t)
            | Term::Succ(t)
            | Term::Pred(t)
            | Term::Nnc(t)
            | Term::Reg(t) => t.vars(out),
            Term::Reply(_) | Term::Zero | Term::Bool(_) => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::Reply(r) => write!(f, "{r}"),
            Term::Derive(m, t) => write!(f, "d[{m}]({t})"),
            Term::ReplyOf(m, t) => write!(f, "r[{m}]({t})"),
            Term::Zero => f.write_str("0"),
            Term::Succ(t) => write!(f, "s({t})"),
            Term::Pred(t) => write!(f, "p({t})"),
            Term::Nnc(t) => write!(f, "nnc({t})"),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Reg(t) => write!(f, "reg({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, sort: Sort, body: Formula) -> Self {
        Formula::Exists(x.to_string(), sort, Box::new(body))
    }

    pub fn forall(x: &str, sort: Sort, body: Formula) -> Self {
        Formula::Forall(x.to_string(), sort, Box::new(body))
    }

    /// Depth of the deepest term.
    pub fn term_depth(&self) -> u64 {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Eq(a, b) => a.depth().max(b.depth()),
            Formula::Not(f) | Formula::Exists(_, _, f) | Formula::Forall(_, _, f) => f.term_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.term_depth().max(b.term_depth())
            }
        }
    }

    /// Nesting depth of quantifiers.
    pub fn quantifier_depth(&self) -> u32 {
        match self {
            Formula::True | Formula::False | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::Exists(_, _, f) | Formula::Forall(_, _, f) => 1 + f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
        }
    }

    /// Identifiers occurring free (foci and variables alike).
    pub fn free_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) => {
                let mut vs = BTreeSet::new();
                a.vars(&mut vs);
                b.vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, _, f) | Formula::Forall(x, _, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Sorts of the free identifiers. Identifiers whose sort is not forced
    /// by their context (e.g. both sides of `c = d`) are services.
    pub fn free_sorts(&self) -> Result<BTreeMap<String, Sort>, SortError> {
        let mut inf = Inference::default();
        loop {
            inf.changed = false;
            inf.formula(self, &mut Vec::new(), false)?;
            if !inf.changed {
                break;
            }
        }
        inf.formula(self, &mut Vec::new(), true)?;
        Ok(inf.free)
    }

    /// Foci: free identifiers of sort `serv`.
    pub fn free_foci(&self) -> BTreeSet<String> {
        match self.free_sorts() {
            Ok(sorts) => sorts
                .into_iter()
                .filter(|(_, s)| *s == Sort::Serv)
                .map(|(x, _)| x)
                .collect(),
            // ill-sorted formulas: report every free name that might be a focus
            Err(_) => self.free_names(),
        }
    }

    /// Free identifiers that are not foci, with their sorts.
    pub fn free_vars(&self) -> Result<BTreeMap<String, Sort>, SortError> {
        Ok(self
            .free_sorts()?
            .into_iter()
            .filter(|(_, s)| *s != Sort::Serv)
            .collect())
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha(self, other, &mut Vec::new())
    }

    /// The conjuncts of a (possibly nested) conjunction.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            f => vec![f],
        }
    }
}

/// Joint free foci of several formulas.
pub fn free_foci(f: &Formula) -> BTreeSet<String> {
    f.free_foci()
}

fn alpha(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
        (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => {
            alpha_term(a1, b1, env) && alpha_term(a2, b2, env)
        }
        (Formula::Not(x), Formula::Not(y)) => alpha(x, y, env),
        (Formula::And(a1, a2), Formula::And(b1, b2))
        | (Formula::Or(a1, a2), Formula::Or(b1, b2))
        | (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => {
            alpha(a1, b1, env) && alpha(a2, b2, env)
        }
        (Formula::Exists(x, sx, fx), Formula::Exists(y, sy, fy))
        | (Formula::Forall(x, sx, fx), Formula::Forall(y, sy, fy)) => {
            if sx != sy {
                return false;
            }
            env.push((x.clone(), y.clone()));
            let r = alpha(fx, fy, env);
            env.pop();
            r
        }
        _ => false,
    }
}

fn alpha_term(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            // innermost binder of either name decides
            for (bx, by) in env.iter().rev() {
                if bx == x || by == y {
                    return bx == x && by == y;
                }
            }
            x == y
        }
        (Term::Derive(m, s), Term::Derive(n, t)) | (Term::ReplyOf(m, s), Term::ReplyOf(n, t)) => {
            m == n && alpha_term(s, t, env)
        }
        (Term::Succ(s), Term::Succ(t))
        | (Term::Pred(s), Term::Pred(t))
        | (Term::Nnc(s), Term::Nnc(t))
        | (Term::Reg(s), Term::Reg(t)) => alpha_term(s, t, env),
        _ => a == b,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("`{name}` is used both as {first} and as {second}")]
    Conflict {
        name: String,
        first: Sort,
        second: Sort,
    },
    #[error("term `{term}` has sort {found}, expected {expected}")]
    Mismatch {
        term: String,
        found: Sort,
        expected: Sort,
    },
}

#[derive(Default)]
struct Inference {
    free: BTreeMap<String, Sort>,
    changed: bool,
}

impl Inference {
    fn lookup(&self, x: &str, bound: &[(String, Sort)]) -> Option<Sort> {
        bound
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, s)| *s)
            .or_else(|| self.free.get(x).copied())
    }

    fn formula(
        &mut self,
        f: &Formula,
        bound: &mut Vec<(String, Sort)>,
        settle: bool,
    ) -> Result<(), SortError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                let sa = self.synth(a, bound)?;
                let sb = self.synth(b, bound)?;
                match (sa, sb) {
                    (Some(x), Some(y)) if x != y => Err(SortError::Mismatch {
                        term: b.to_string(),
                        found: y,
                        expected: x,
                    }),
                    (Some(s), None) => self.check(b, s, bound),
                    (None, Some(s)) => self.check(a, s, bound),
                    (None, None) if settle => {
                        self.check(a, Sort::Serv, bound)?;
                        self.check(b, Sort::Serv, bound)
                    }
                    _ => Ok(()),
                }
            }
            Formula::Not(g) => self.formula(g, bound, settle),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.formula(a, bound, settle)?;
                self.formula(b, bound, settle)
            }
            Formula::Exists(x, s, g) | Formula::Forall(x, s, g) => {
                bound.push((x.clone(), *s));
                let r = self.formula(g, bound, settle);
                bound.pop();
                r
            }
        }
    }

    fn synth(&mut self, t: &Term, bound: &[(String, Sort)]) -> Result<Option<Sort>, SortError> {
        Ok(Some(match t {
            Term::Var(x) => return Ok(self.lookup(x, bound)),
            Term::Reply(_) => Sort::Repl,
            Term::Derive(_, s) => {
                self.check(s, Sort::Serv, bound)?;
                Sort::Serv
            }
            Term::ReplyOf(_, s) => {
                self.check(s, Sort::Serv, bound)?;
                Sort::Repl
            }
            Term::Zero => Sort::Nat,
            Term::Succ(s) | Term::Pred(s) => {
                self.check(s, Sort::Nat, bound)?;
                Sort::Nat
            }
            Term::Nnc(s) => {
                self.check(s, Sort::Nat, bound)?;
                Sort::Serv
            }
            Term::Bool(_) => Sort::Bool,
            Term::Reg(s) => {
                self.check(s, Sort::Bool, bound)?;
                Sort::Serv
            }
        }))
    }

    fn check(
        &mut self,
        t: &Term,
        expected: Sort,
        bound: &[(String, Sort)],
    ) -> Result<(), SortError> {
        if let Term::Var(x) = t {
            if let Some(s) = bound.iter().rev().find(|(y, _)| y == x).map(|(_, s)| *s) {
                return if s == expected {
                    Ok(())
                } else {
                    Err(SortError::Mismatch {
                        term: x.clone(),
                        found: s,
                        expected,
                    })
                };
            }
            return match self.free.get(x) {
                Some(&s) if s != expected => Err(SortError::Conflict {
                    name: x.clone(),
                    first: s,
                    second: expected,
                }),
                Some(_) => Ok(()),
                None => {
                    self.free.insert(x.clone(), expected);
                    self.changed = true;
                    Ok(())
                }
            };
        }
        match self.synth(t, bound)? {
            Some(s) if s != expected => Err(SortError::Mismatch {
                term: t.to_string(),
                found: s,
                expected,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, true)
    }
}

/// Binary connectives are always parenthesized; quantifiers are
/// parenthesized unless they are the whole formula, since their body
/// extends as far right as possible.
fn write_formula(f: &mut fmt::Formatter<'_>, phi: &Formula, top: bool) -> fmt::Result {
    match phi {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Eq(a, b) => write!(f, "{a} = {b}"),
        Formula::Not(g) => match &**g {
            Formula::Eq(a, b) => write!(f, "{a} != {b}"),
            g => {
                f.write_str("~")?;
                match g {
                    Formula::True | Formula::False => write_formula(f, g, false),
                    _ => {
                        // `~` binds tighter than `=`, so atoms need parentheses too
                        f.write_str("(")?;
                        write_formula(f, g, true)?;
                        f.write_str(")")
                    }
                }
            }
        },
        Formula::And(a, b) => write_binary(f, a, "/\\", b),
        Formula::Or(a, b) => write_binary(f, a, "\\/", b),
        Formula::Implies(a, b) => write_binary(f, a, "->", b),
        Formula::Exists(x, s, g) | Formula::Forall(x, s, g) => {
            let q = if matches!(phi, Formula::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            if !top {
                f.write_str("(")?;
            }
            write!(f, "{q} {x}:{s}. ")?;
            write_formula(f, g, true)?;
            if !top {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula) -> fmt::Result {
    f.write_str("(")?;
    write_formula(f, a, false)?;
    write!(f, " {op} ")?;
    write_formula(f, b, false)?;
    f.write_str(")")
}
