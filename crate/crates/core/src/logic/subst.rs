use std::collections::BTreeSet;

use super::{Formula, Term};

/// A substitution applied to the free occurrences of a name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Substitution {
    /// `P[d[m](f)/f]`: the focus as it is after processing `method`.
    DeriveFocus { focus: String, method: String },
    /// `P[y/x]`
    Rename { from: String, to: String },
    /// `P[t/x]` for an arbitrary term.
    Term { var: String, term: Term },
}

impl Substitution {
    pub fn derive_focus(focus: &str, method: &str) -> Self {
        Substitution::DeriveFocus {
            focus: focus.to_string(),
            method: method.to_string(),
        }
    }

    pub fn rename(from: &str, to: &str) -> Self {
        Substitution::Rename {
            from: from.to_string(),
            to: to.to_string(),
        }
    }

    fn target(&self) -> (&str, Term) {
        match self {
            Substitution::DeriveFocus { focus, method } => {
                (focus, Term::derive(method, Term::Var(focus.clone())))
            }
            Substitution::Rename { from, to } => (from, Term::Var(to.clone())),
            Substitution::Term { var, term } => (var, term.clone()),
        }
    }
}

/// Replace all free occurrences, renaming bound variables that would
/// capture a name of the replacement.
pub fn substitute(f: &Formula, sub: &Substitution) -> Formula {
    let (var, term) = sub.target();
    let mut term_vars = BTreeSet::new();
    term.vars(&mut term_vars);
    subst_formula(f, var, &term, &term_vars)
}

/// A variant of `base` not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| !avoid.contains(c))
        .unwrap()
}

fn subst_formula(f: &Formula, x: &str, t: &Term, tvars: &BTreeSet<String>) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(subst_term(a, x, t), subst_term(b, x, t)),
        Formula::Not(g) => Formula::not(subst_formula(g, x, t, tvars)),
        Formula::And(a, b) => {
            Formula::and(subst_formula(a, x, t, tvars), subst_formula(b, x, t, tvars))
        }
        Formula::Or(a, b) => {
            Formula::or(subst_formula(a, x, t, tvars), subst_formula(b, x, t, tvars))
        }
        Formula::Implies(a, b) => {
            Formula::implies(subst_formula(a, x, t, tvars), subst_formula(b, x, t, tvars))
        }
        Formula::Exists(y, s, body) | Formula::Forall(y, s, body) => {
            let rebuild = |y: String, body: Formula| match f {
                Formula::Exists(..) => Formula::Exists(y, *s, Box::new(body)),
                _ => Formula::Forall(y, *s, Box::new(body)),
            };
            if y == x || !body.free_names().contains(x) {
                return f.clone();
            }
            if tvars.contains(y) {
                let mut avoid = body.free_names();
                avoid.extend(tvars.iter().cloned());
                avoid.insert(x.to_string());
                let z = fresh_name(y, &avoid);
                let renamed = subst_formula(body, y, &Term::Var(z.clone()), &[z.clone()].into());
                return rebuild(z, subst_formula(&renamed, x, t, tvars));
            }
            rebuild(y.clone(), subst_formula(body, x, t, tvars))
        }
    }
}

fn subst_term(u: &Term, x: &str, t: &Term) -> Term {
    let rec = |s: &Term| Box::new(subst_term(s, x, t));
    match u {
        Term::Var(y) if y == x => t.clone(),
        Term::Var(_) | Term::Reply(_) | Term::Zero | Term::Bool(_) => u.clone(),
        Term::Derive(m, s) => Term::Derive(m.clone(), rec(s)),
        Term::ReplyOf(m, s) => Term::ReplyOf(m.clone(), rec(s)),
        Term::Succ(s) => Term::Succ(rec(s)),
        Term::Pred(s) => Term::Pred(rec(s)),
        Term::Nnc(s) => Term::Nnc(rec(s)),
        Term::Reg(s) => Term::Reg(rec(s)),
    }
}
