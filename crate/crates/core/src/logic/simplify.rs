//! Rewriting with the equations of the built-in algebras. Every rule is an
//! identity of the intended model, so a formula that simplifies to `true`
//! is valid without enumeration.

use super::{substitute, Formula, Substitution, Term};
use crate::service::Reply;

fn simplify_term(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Reply(_) | Term::Zero | Term::Bool(_) => t.clone(),
        Term::Succ(s) => Term::succ(simplify_term(s)),
        Term::Nnc(s) => Term::nnc(simplify_term(s)),
        Term::Reg(s) => Term::reg(simplify_term(s)),
        Term::Pred(s) => match simplify_term(s) {
            Term::Zero => Term::Zero,
            Term::Succ(x) => *x,
            s => Term::pred(s),
        },
        Term::ReplyOf(m, s) => {
            let s = simplify_term(s);
            reply_rule(m, &s).unwrap_or_else(|| Term::reply_of(m, s))
        }
        Term::Derive(m, s) => {
            let s = simplify_term(s);
            derive_rule(m, &s).unwrap_or_else(|| Term::derive(m, s))
        }
    }
}

fn reply_rule(m: &str, s: &Term) -> Option<Term> {
    let r = match (s, m) {
        (Term::Nnc(_), "incr") => Reply::T,
        (Term::Nnc(x), "decr" | "iszero") => {
            let zero = match **x {
                Term::Zero => true,
                Term::Succ(_) => false,
                _ => return None,
            };
            match (m, zero) {
                ("decr", true) | ("iszero", false) => Reply::F,
                _ => Reply::T,
            }
        }
        (Term::Nnc(_), _) => Reply::D,
        (Term::Reg(_), "set:t" | "set:f") => Reply::T,
        (Term::Reg(b), "get") => match **b {
            Term::Bool(true) => Reply::T,
            Term::Bool(false) => Reply::F,
            _ => return None,
        },
        (Term::Reg(_), _) => Reply::D,
        _ => return None,
    };
    Some(Term::Reply(r))
}

fn derive_rule(m: &str, s: &Term) -> Option<Term> {
    match (s, m) {
        (Term::Nnc(x), "incr") => Some(Term::nnc(Term::Succ(x.clone()))),
        (Term::Nnc(x), "decr") => match &**x {
            Term::Zero => Some(s.clone()),
            Term::Succ(y) => Some(Term::Nnc(y.clone())),
            _ => None,
        },
        (Term::Nnc(_), "iszero") | (Term::Reg(_), "get") => Some(s.clone()),
        (Term::Reg(_), "set:t") => Some(Term::reg(Term::Bool(true))),
        (Term::Reg(_), "set:f") => Some(Term::reg(Term::Bool(false))),
        _ => None,
    }
}

/// Decide an equation between simplified terms by constructor
/// injectivity and disjointness, or leave it as it is.
fn simplify_eq(a: Term, b: Term) -> Formula {
    if a == b {
        return Formula::True;
    }
    match (&a, &b) {
        (Term::Reply(_), Term::Reply(_)) | (Term::Bool(_), Term::Bool(_)) => Formula::False,
        (Term::Zero, Term::Succ(_)) | (Term::Succ(_), Term::Zero) => Formula::False,
        (Term::Nnc(_), Term::Reg(_)) | (Term::Reg(_), Term::Nnc(_)) => Formula::False,
        (Term::Succ(x), Term::Succ(y))
        | (Term::Nnc(x), Term::Nnc(y))
        | (Term::Reg(x), Term::Reg(y)) => simplify_eq((**x).clone(), (**y).clone()),
        _ => Formula::Eq(a, b),
    }
}

/// Simplify with the algebra equations and propositional constant folding.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => simplify_eq(simplify_term(a), simplify_term(b)),
        Formula::Not(g) => match simplify(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(h) => *h,
            g => Formula::not(g),
        },
        Formula::And(a, b) => match (simplify(a), simplify(b)) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, g) | (g, Formula::True) => g,
            (x, y) => Formula::and(x, y),
        },
        Formula::Or(a, b) => match (simplify(a), simplify(b)) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, g) | (g, Formula::False) => g,
            (x, y) => Formula::or(x, y),
        },
        Formula::Implies(a, b) => match (simplify(a), simplify(b)) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, g) => g,
            (g, Formula::False) => Formula::not(g),
            (x, y) => Formula::implies(x, y),
        },
        Formula::Exists(x, s, body) | Formula::Forall(x, s, body) => {
            let body = simplify(body);
            // every sort is inhabited
            if matches!(body, Formula::True | Formula::False) || !body.free_names().contains(x) {
                return body;
            }
            match f {
                Formula::Exists(..) => Formula::Exists(x.clone(), *s, Box::new(body)),
                _ => Formula::Forall(x.clone(), *s, Box::new(body)),
            }
        }
    }
}

/// A sound, incomplete check that `p → q` holds in the intended model:
/// case split on disjunctive hypotheses, substitute defining equations
/// `x = t` from the hypotheses into `q`, simplify, and match the remaining
/// conjuncts of `q` against hypotheses.
pub fn symbolically_valid(p: &Formula, q: &Formula) -> bool {
    let p = simplify(p);
    let q = simplify(q);
    valid(&p, &q, 0)
}

fn valid(p: &Formula, q: &Formula, depth: usize) -> bool {
    if depth > 8 {
        return false;
    }
    match (p, q) {
        (Formula::False, _) | (_, Formula::True) => return true,
        (Formula::Or(a, b), _) => {
            return valid(&simplify(a), q, depth + 1) && valid(&simplify(b), q, depth + 1)
        }
        _ => {}
    }
    if let Formula::Or(a, b) = q {
        if valid(p, a, depth + 1) || valid(p, b, depth + 1) {
            return true;
        }
    }

    let mut hyps: Vec<Formula> = p.conjuncts().into_iter().cloned().collect();
    let mut goal = q.clone();
    // substitute definitions one at a time; each removes a variable
    while let Some((i, x, t)) = hyps
        .iter()
        .enumerate()
        .find_map(|(i, h)| definition(h).map(|(x, t)| (i, x, t)))
    {
        hyps.remove(i);
        let sub = Substitution::Term {
            var: x.clone(),
            term: t.clone(),
        };
        goal = simplify(&substitute(&goal, &sub));
        hyps = hyps
            .iter()
            .map(|h| simplify(&substitute(h, &sub)))
            .collect();
        if hyps.contains(&Formula::False) {
            return true;
        }
    }
    goal.conjuncts()
        .into_iter()
        .all(|g| *g == Formula::True || hyps.iter().any(|h| h.alpha_eq(g)))
}

/// `x = t` or `t = x` with `x` not occurring in `t`.
fn definition(h: &Formula) -> Option<(String, Term)> {
    let Formula::Eq(a, b) = h else { return None };
    for (l, r) in [(a, b), (b, a)] {
        if let Term::Var(x) = l {
            let mut vs = Default::default();
            r.vars(&mut vs);
            if !vs.contains(x) {
                return Some((x.clone(), r.clone()));
            }
        }
    }
    None
}
