use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{Formula, Sort, Term};
use crate::service::{Algebra, AlgebraConfig, Reply, Service, ServiceFamily};

/// Three-valued truth: `Unknown` when a quantifier bound decides the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn or(self, other: Truth) -> Truth {
        self.not().and(other.not()).not()
    }
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Value {
    Serv(Service),
    Nat(u64),
    Bool(bool),
    Repl(Reply),
}

impl Value {
    fn magnitude(&self) -> u64 {
        match self {
            Value::Serv(Service::Counter(n)) | Value::Nat(n) => *n,
            _ => 0,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Serv(s) => write!(f, "{s}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Repl(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("focus `{0}` is not present in the state")]
    MissingFocus(String),
    #[error("variable `{0}` has no value")]
    Unbound(String),
    #[error("ill-sorted term `{0}`")]
    IllSorted(String),
}

/// Evaluate a formula in a state; free non-service variables are not allowed.
pub fn eval_formula(
    f: &Formula,
    state: &ServiceFamily,
    cfg: &AlgebraConfig,
) -> Result<Truth, EvalError> {
    eval_with(f, state, &BTreeMap::new(), cfg)
}

/// Evaluate a formula in a state under a valuation of its free variables.
///
/// Quantifiers over naturals (and counter services) are decided exactly:
/// with terms of depth at most `d` and `k` quantifiers nested below, two
/// values at distance at least `(2d + 1)·2^k` from every value in scope
/// (and from 0) satisfy the same formulas, so it suffices to try the
/// values near those in scope and one value far beyond them. Formulas
/// nested too deeply for that fall back to `0..=max(Q, m + 1)`, `m` the
/// largest natural in scope, and a quantifier whose answer depends on
/// values past that range is `Unknown`.
pub fn eval_with(
    f: &Formula,
    state: &ServiceFamily,
    valuation: &BTreeMap<String, Value>,
    cfg: &AlgebraConfig,
) -> Result<Truth, EvalError> {
    let mut ev = Evaluator {
        state,
        valuation,
        cfg,
        bound: Vec::new(),
        depth: f.term_depth(),
    };
    ev.formula(f)
}

struct Evaluator<'a> {
    state: &'a ServiceFamily,
    valuation: &'a BTreeMap<String, Value>,
    cfg: &'a AlgebraConfig,
    bound: Vec<(String, Value)>,
    /// Deepest term of the formula being evaluated.
    depth: u64,
}

/// Largest neighbourhood radius for which exact candidate sets are built.
const MAX_RADIUS: u64 = 1 << 12;

impl Evaluator<'_> {
    fn formula(&mut self, f: &Formula) -> Result<Truth, EvalError> {
        Ok(match f {
            Formula::True => Truth::True,
            Formula::False => Truth::False,
            Formula::Eq(a, b) => (self.term(a)? == self.term(b)?).into(),
            Formula::Not(g) => self.formula(g)?.not(),
            Formula::And(a, b) => {
                let x = self.formula(a)?;
                if x == Truth::False {
                    return Ok(Truth::False);
                }
                x.and(self.formula(b)?)
            }
            Formula::Or(a, b) => {
                let x = self.formula(a)?;
                if x == Truth::True {
                    return Ok(Truth::True);
                }
                x.or(self.formula(b)?)
            }
            Formula::Implies(a, b) => {
                let x = self.formula(a)?;
                if x == Truth::False {
                    return Ok(Truth::True);
                }
                x.not().or(self.formula(b)?)
            }
            Formula::Exists(x, sort, body) => self.quantifier(x, *sort, body, true)?,
            Formula::Forall(x, sort, body) => self.quantifier(x, *sort, body, false)?,
        })
    }

    /// Naturals in scope: counter contents, values of naturals and 0.
    fn anchors(&self) -> BTreeSet<u64> {
        let state = self.state.iter().map(|(_, s)| match s {
            Service::Counter(n) => *n,
            _ => 0,
        });
        let vals = self.valuation.values().map(Value::magnitude);
        let bound = self.bound.iter().map(|(_, v)| v.magnitude());
        std::iter::once(0)
            .chain(state)
            .chain(vals)
            .chain(bound)
            .collect()
    }

    /// Naturals a quantifier over `body` has to try, and whether they
    /// decide it exactly.
    fn naturals(&self, body: &Formula) -> (Vec<u64>, bool) {
        let anchors = self.anchors();
        let top = *anchors.last().expect("0 is an anchor");
        let mut radius = Some(2 * self.depth + 1).filter(|&r| r <= MAX_RADIUS);
        for _ in 0..body.quantifier_depth() {
            radius = radius
                .and_then(|r| r.checked_mul(2))
                .filter(|&r| r <= MAX_RADIUS);
        }
        match radius {
            Some(r) => {
                let mut near: BTreeSet<u64> = anchors
                    .iter()
                    .flat_map(|&a| a.saturating_sub(r)..=a.saturating_add(r))
                    .collect();
                near.insert(top.saturating_add(r).saturating_add(1));
                (near.into_iter().collect(), true)
            }
            None => (
                (0..=self.cfg.qbound.max(top.saturating_add(1))).collect(),
                false,
            ),
        }
    }

    /// The values a bound variable ranges over, and whether that is all of them.
    fn domain(&self, sort: Sort, body: &Formula) -> (Vec<Value>, bool) {
        match sort {
            Sort::Nat => {
                let (ns, exact) = self.naturals(body);
                (ns.into_iter().map(Value::Nat).collect(), exact)
            }
            Sort::Bool => (vec![Value::Bool(false), Value::Bool(true)], true),
            Sort::Repl => (
                vec![
                    Value::Repl(Reply::T),
                    Value::Repl(Reply::F),
                    Value::Repl(Reply::D),
                ],
                true,
            ),
            Sort::Serv => match self.cfg.algebra {
                Algebra::Counter => {
                    let (ns, exact) = self.naturals(body);
                    (
                        ns.into_iter()
                            .map(|n| Value::Serv(Service::Counter(n)))
                            .collect(),
                        exact,
                    )
                }
                Algebra::BoolReg => (
                    self.cfg.domain().into_iter().map(Value::Serv).collect(),
                    true,
                ),
            },
        }
    }

    fn quantifier(
        &mut self,
        x: &str,
        sort: Sort,
        body: &Formula,
        exists: bool,
    ) -> Result<Truth, EvalError> {
        let (values, complete) = self.domain(sort, body);
        // the value that settles the quantifier: true for ∃, false for ∀
        let decisive = if exists { Truth::True } else { Truth::False };
        let mut unknown = false;
        for v in values {
            self.bound.push((x.to_string(), v));
            let r = self.formula(body);
            self.bound.pop();
            let r = r?;
            if r == decisive {
                return Ok(decisive);
            }
            if r == Truth::Unknown {
                unknown = true;
            }
        }
        Ok(if unknown || !complete {
            Truth::Unknown
        } else {
            decisive.not()
        })
    }

    fn lookup(&self, x: &str) -> Result<Value, EvalError> {
        if let Some((_, v)) = self.bound.iter().rev().find(|(y, _)| y == x) {
            return Ok(v.clone());
        }
        if let Some(v) = self.valuation.get(x) {
            return Ok(v.clone());
        }
        match self.state.get(x) {
            Some(s) => Ok(Value::Serv(s.clone())),
            None => Err(EvalError::MissingFocus(x.to_string())),
        }
    }

    fn term(&mut self, t: &Term) -> Result<Value, EvalError> {
        let ill = || EvalError::IllSorted(t.to_string());
        Ok(match t {
            Term::Var(x) => self.lookup(x)?,
            Term::Reply(r) => Value::Repl(*r),
            Term::Derive(m, s) => match self.term(s)? {
                Value::Serv(s) => Value::Serv(s.derive(m)),
                _ => return Err(ill()),
            },
            Term::ReplyOf(m, s) => match self.term(s)? {
                Value::Serv(s) => Value::Repl(s.reply(m)),
                _ => return Err(ill()),
            },
            Term::Zero => Value::Nat(0),
            Term::Succ(s) => match self.term(s)? {
                Value::Nat(n) => Value::Nat(n.saturating_add(1)),
                _ => return Err(ill()),
            },
            Term::Pred(s) => match self.term(s)? {
                Value::Nat(n) => Value::Nat(n.saturating_sub(1)),
                _ => return Err(ill()),
            },
            Term::Nnc(s) => match self.term(s)? {
                Value::Nat(n) => Value::Serv(Service::Counter(n)),
                _ => return Err(ill()),
            },
            Term::Bool(b) => Value::Bool(*b),
            Term::Reg(s) => match self.term(s)? {
                Value::Bool(b) => Value::Serv(Service::BoolReg(b)),
                _ => return Err(ill()),
            },
        })
    }
}
