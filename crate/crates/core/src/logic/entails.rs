use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{eval_with, simplify::symbolically_valid, Formula, Sort, Truth, Value};
use crate::service::{Algebra, AlgebraConfig, Reply, ServiceFamily};

/// Values of free non-service variables.
pub type Valuation = BTreeMap<String, Value>;

/// A state and valuation where the premise holds and the conclusion fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub state: ServiceFamily,
    pub valuation: Valuation,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.state)?;
        if !self.valuation.is_empty() {
            let vals: Vec<String> = self
                .valuation
                .iter()
                .map(|(x, v)| format!("{x} = {v}"))
                .collect();
            write!(f, " with {}", vals.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum EntailVerdict {
    /// Proven symbolically or by exhausting a finite space.
    Valid,
    /// No counterexample among counters up to the given bound and naturals
    /// up to the quantifier bound.
    BoundedValid(u64),
    Invalid(Witness),
    Unknown(String),
}

impl EntailVerdict {
    /// Valid or bounded-valid.
    pub fn accepted(&self) -> bool {
        matches!(self, EntailVerdict::Valid | EntailVerdict::BoundedValid(_))
    }
}

impl fmt::Display for EntailVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntailVerdict::Valid => write!(f, "valid"),
            EntailVerdict::BoundedValid(b) => write!(f, "valid up to bound {b}"),
            EntailVerdict::Invalid(w) => write!(f, "invalid, counterexample {w}"),
            EntailVerdict::Unknown(why) => write!(f, "unknown: {why}"),
        }
    }
}

/// All valuations of `vars`, naturals ranging over `0..=qbound`.
pub(crate) fn valuations(vars: &BTreeMap<String, Sort>, qbound: u64) -> Vec<Valuation> {
    let mut out = vec![Valuation::new()];
    for (x, sort) in vars {
        let values: Vec<Value> = match sort {
            Sort::Nat => (0..=qbound).map(Value::Nat).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::Repl => [Reply::T, Reply::F, Reply::D]
                .into_iter()
                .map(Value::Repl)
                .collect(),
            Sort::Serv => unreachable!("services are foci"),
        };
        out = out
            .into_iter()
            .flat_map(|v| {
                values.iter().map(move |val| {
                    let mut v = v.clone();
                    v.insert(x.clone(), val.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Decide whether `p` entails `q`: every state and valuation of the free
/// variables satisfying `p` satisfies `q`. Free variables are shared
/// between the two formulas.
pub fn entails(p: &Formula, q: &Formula, cfg: &AlgebraConfig) -> EntailVerdict {
    if p.alpha_eq(q) || *q == Formula::True || *p == Formula::False {
        return EntailVerdict::Valid;
    }
    let joint = Formula::implies(p.clone(), q.clone());
    let sorts = match joint.free_sorts() {
        Ok(s) => s,
        Err(e) => return EntailVerdict::Unknown(e.to_string()),
    };
    if symbolically_valid(p, q) {
        return EntailVerdict::Valid;
    }
    let foci: BTreeSet<String> = sorts
        .iter()
        .filter(|(_, s)| **s == Sort::Serv)
        .map(|(x, _)| x.clone())
        .collect();
    let vars: BTreeMap<String, Sort> = sorts
        .into_iter()
        .filter(|(_, s)| *s != Sort::Serv)
        .collect();

    let mut exhaustive =
        (foci.is_empty() || cfg.algebra.is_finite()) && vars.values().all(|s| *s != Sort::Nat);
    let vals = valuations(&vars, cfg.qbound);
    let mut unknown = None;
    for state in cfg.states(&foci) {
        for val in &vals {
            let premise = match eval_with(p, &state, val, cfg) {
                Ok(t) => t,
                Err(e) => return EntailVerdict::Unknown(e.to_string()),
            };
            if premise == Truth::False {
                continue;
            }
            let conclusion = match eval_with(q, &state, val, cfg) {
                Ok(t) => t,
                Err(e) => return EntailVerdict::Unknown(e.to_string()),
            };
            match (premise, conclusion) {
                (Truth::True, Truth::False) => {
                    return EntailVerdict::Invalid(Witness {
                        state,
                        valuation: val.clone(),
                    })
                }
                (_, Truth::True) => {}
                _ => {
                    exhaustive = false;
                    unknown.get_or_insert_with(|| Witness {
                        state: state.clone(),
                        valuation: val.clone(),
                    });
                }
            }
        }
    }
    match unknown {
        Some(w) => {
            EntailVerdict::Unknown(format!("a quantifier bound decides the formulas at {w}"))
        }
        None if exhaustive => EntailVerdict::Valid,
        None => EntailVerdict::BoundedValid(match cfg.algebra {
            Algebra::Counter => cfg.bound,
            Algebra::BoolReg => cfg.qbound,
        }),
    }
}
