//! Proof trees for the asserted-sequence logic and their checker.

mod check;
mod parse;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::asserted::AssertedSeq;
use crate::logic::Formula;
use crate::sequence::SequenceTerm;

pub use check::{check_proof, check_proof_with, Assumption, CheckOptions, CheckResult};
pub use parse::{parse_proof, ProofParseError};

/// Instruction axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
    A11,
}

/// Rules whose premises are plain proof nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Concatenation through an intermediate exit/entry.
    R1,
    /// Concatenation exiting from the first part.
    R2,
    /// Concatenation terminating in the first part.
    R3,
    /// Concatenation entering the second part.
    R4,
    /// Alternatives.
    R6,
    /// Invariance.
    R7,
    /// Existential elimination.
    R8,
}

impl Rule {
    pub fn arity(self) -> usize {
        match self {
            Rule::R1 | Rule::R6 => 2,
            _ => 1,
        }
    }
}

macro_rules! name_enum {
    ($t:ty, $($v:ident),*) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$v => stringify!($v)),* })
            }
        }
        impl FromStr for $t {
            type Err = ();
            fn from_str(s: &str) -> Result<Self, ()> {
                match s.to_ascii_uppercase().as_str() {
                    $(x if x == stringify!($v) => Ok(Self::$v),)*
                    _ => Err(()),
                }
            }
        }
    };
}

name_enum!(Axiom, A1, A2, A3, A4, A5, A6, A7, A8, A9, A10, A11);
name_enum!(Rule, R1, R2, R3, R4, R6, R7, R8);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofNode {
    /// The given hypothesis (1-based) of the enclosing repetition node.
    Hyp(usize),
    Step {
        conclusion: AssertedSeq,
        justification: Justification,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(Axiom),
    Rule(Rule, Vec<ProofNode>),
    /// Rename the variable `from` to `to` in both assertions.
    Substitution {
        from: String,
        to: String,
        premise: Box<ProofNode>,
    },
    /// Consequence: `pre` is `P -> P'` and `post` is `Q' -> Q`.
    Consequence {
        pre: Formula,
        premise: Box<ProofNode>,
        post: Formula,
    },
    /// Repetition: each subproof derives `S ; S^w` for the matching
    /// hypothesis from all hypotheses; concludes hypothesis `k` (1-based).
    Repetition {
        hyps: Vec<AssertedSeq>,
        k: usize,
        subproofs: Vec<ProofNode>,
    },
    /// From `{b | P} S {0 | Q}` conclude `{b | P} S^w {0 | Q}`.
    RepIntro(Box<ProofNode>),
}

impl ProofNode {
    pub fn step(conclusion: AssertedSeq, justification: Justification) -> Self {
        ProofNode::Step {
            conclusion,
            justification,
        }
    }

    pub fn axiom(id: Axiom, conclusion: AssertedSeq) -> Self {
        ProofNode::step(conclusion, Justification::Axiom(id))
    }

    pub fn rule(id: Rule, premises: Vec<ProofNode>, conclusion: AssertedSeq) -> Self {
        ProofNode::step(conclusion, Justification::Rule(id, premises))
    }

    /// The claimed conclusion; `None` for hypothesis references.
    pub fn conclusion(&self) -> Option<&AssertedSeq> {
        match self {
            ProofNode::Hyp(_) => None,
            ProofNode::Step { conclusion, .. } => Some(conclusion),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn children(&self) -> Vec<&ProofNode> {
        match self {
            ProofNode::Hyp(_) => vec![],
            ProofNode::Step { justification, .. } => match justification {
                Justification::Axiom(_) => vec![],
                Justification::Rule(_, ps) => ps.iter().collect(),
                Justification::Substitution { premise, .. }
                | Justification::Consequence { premise, .. }
                | Justification::RepIntro(premise) => vec![premise],
                Justification::Repetition { subproofs, .. } => subproofs.iter().collect(),
            },
        }
    }

    /// Whether a repetition or repetition-introduction node occurs anywhere.
    pub fn uses_repetition(&self) -> bool {
        matches!(
            self,
            ProofNode::Step {
                justification: Justification::Repetition { .. } | Justification::RepIntro(_),
                ..
            }
        ) || self.children().iter().any(|c| c.uses_repetition())
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let (conclusion, just) = match self {
            ProofNode::Hyp(i) => return write!(f, "(HYP {i})"),
            ProofNode::Step {
                conclusion,
                justification,
            } => (conclusion, justification),
        };
        let pad = " ".repeat(indent + 2);
        let premises = |f: &mut fmt::Formatter<'_>, ps: &[&ProofNode]| -> fmt::Result {
            for p in ps {
                write!(f, "\n{pad}")?;
                p.write(f, indent + 2)?;
            }
            Ok(())
        };
        match just {
            Justification::Axiom(a) => return write!(f, "({a} {conclusion})"),
            Justification::Rule(r, ps) => {
                write!(f, "({r}")?;
                premises(f, &ps.iter().collect::<Vec<_>>())?;
            }
            Justification::Substitution { from, to, premise } => {
                write!(f, "(R9 {from} {to}")?;
                premises(f, &[premise])?;
            }
            Justification::Consequence { pre, premise, post } => {
                write!(f, "(R10 \"{pre}\"")?;
                premises(f, &[premise])?;
                write!(f, "\n{pad}\"{post}\"")?;
            }
            Justification::Repetition { hyps, k, subproofs } => {
                write!(f, "(R5 hyps [")?;
                for h in hyps {
                    write!(f, "\n{pad}  {h}")?;
                }
                write!(f, "]\n{pad}k {k}\n{pad}subproofs [")?;
                premises(f, &subproofs.iter().collect::<Vec<_>>())?;
                write!(f, "]")?;
            }
            Justification::RepIntro(p) => {
                write!(f, "(RepIntro")?;
                premises(f, &[p])?;
            }
        }
        write!(f, "\n{pad}=> {conclusion})")
    }
}

impl fmt::Display for ProofNode {
    /// The proof file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("a multi-exit assertion needs at least one exit")]
pub struct NoExits;

/// `{b | P} S {e1, ..., en | Q}` as the set of single-exit assertions.
pub fn expand_multi_exit(
    entry: u64,
    pre: &Formula,
    seq: &SequenceTerm,
    exits: &[u64],
    post: &Formula,
) -> Result<Vec<AssertedSeq>, NoExits> {
    if exits.is_empty() {
        return Err(NoExits);
    }
    Ok(exits
        .iter()
        .map(|&e| AssertedSeq::new(entry, pre.clone(), seq.clone(), e, post.clone()))
        .collect())
}

/// Rewrite every repetition-introduction node whose premise uses no
/// repetition into the repetition rule with one hypothesis, whose single
/// subproof applies R3 to the premise.
pub fn expand_rep_intro(node: &ProofNode) -> ProofNode {
    let ProofNode::Step {
        conclusion,
        justification,
    } = node
    else {
        return node.clone();
    };
    let map = |p: &ProofNode| Box::new(expand_rep_intro(p));
    let justification = match justification {
        Justification::RepIntro(p) if !p.uses_repetition() => {
            let Some(inner) = p.conclusion() else {
                return node.clone();
            };
            let unrolled = AssertedSeq {
                seq: SequenceTerm::concat(inner.seq.clone(), conclusion.seq.clone()),
                ..inner.clone()
            };
            Justification::Repetition {
                hyps: vec![conclusion.clone()],
                k: 1,
                subproofs: vec![ProofNode::rule(Rule::R3, vec![(**p).clone()], unrolled)],
            }
        }
        Justification::RepIntro(p) => Justification::RepIntro(map(p)),
        j @ (Justification::Axiom(_) | Justification::Repetition { .. }) => j.clone(),
        Justification::Rule(r, ps) => {
            Justification::Rule(*r, ps.iter().map(expand_rep_intro).collect())
        }
        Justification::Substitution { from, to, premise } => Justification::Substitution {
            from: from.clone(),
            to: to.clone(),
            premise: map(premise),
        },
        Justification::Consequence { pre, premise, post } => Justification::Consequence {
            pre: pre.clone(),
            premise: map(premise),
            post: post.clone(),
        },
    };
    ProofNode::step(conclusion.clone(), justification)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::parse_sequence;

    #[test]
    fn multi_exit() {
        let s = parse_sequence("+c.iszero").unwrap();
        assert_eq!(
            expand_multi_exit(1, &Formula::True, &s, &[1, 2], &Formula::True)
                .unwrap()
                .len(),
            2
        );
        let one = expand_multi_exit(1, &Formula::True, &s, &[0], &Formula::True).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].exit, 0);
        assert_eq!(
            expand_multi_exit(1, &Formula::True, &s, &[], &Formula::True),
            Err(NoExits)
        );
    }

    #[test]
    fn names() {
        assert_eq!("a11".parse::<Axiom>(), Ok(Axiom::A11));
        assert_eq!(Rule::R6.to_string(), "R6");
        assert!("R5".parse::<Rule>().is_err());
    }
}
