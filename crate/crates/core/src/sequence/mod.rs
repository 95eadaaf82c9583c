//! Instruction sequences: primitive instructions, sequence terms and their
//! canonical (eventually periodic) normal form.

mod canonical;
pub(crate) mod parse;

use std::fmt;

use serde::Serialize;

pub use canonical::{normalize, seq_equal, CanonicalSequence, Len};
pub use parse::{parse_sequence, SeqParseError};

/// A basic instruction `f.m`: request the service named `focus` to process `method`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasicAction {
    pub focus: String,
    pub method: String,
}

impl BasicAction {
    pub fn new(focus: impl Into<String>, method: impl Into<String>) -> Self {
        BasicAction {
            focus: focus.into(),
            method: method.into(),
        }
    }
}

impl fmt::Display for BasicAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.focus, self.method)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PrimitiveInstruction {
    Basic(BasicAction),
    PosTest(BasicAction),
    NegTest(BasicAction),
    Jump(u64),
    Halt,
}

impl PrimitiveInstruction {
    pub fn basic(focus: &str, method: &str) -> Self {
        PrimitiveInstruction::Basic(BasicAction::new(focus, method))
    }

    pub fn pos_test(focus: &str, method: &str) -> Self {
        PrimitiveInstruction::PosTest(BasicAction::new(focus, method))
    }

    pub fn neg_test(focus: &str, method: &str) -> Self {
        PrimitiveInstruction::NegTest(BasicAction::new(focus, method))
    }

    /// The basic action performed by this instruction, if any.
    pub fn action(&self) -> Option<&BasicAction> {
        match self {
            PrimitiveInstruction::Basic(a)
            | PrimitiveInstruction::PosTest(a)
            | PrimitiveInstruction::NegTest(a) => Some(a),
            PrimitiveInstruction::Jump(_) | PrimitiveInstruction::Halt => None,
        }
    }
}

impl fmt::Display for PrimitiveInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitiveInstruction::Basic(a) => write!(f, "{a}"),
            PrimitiveInstruction::PosTest(a) => write!(f, "+{a}"),
            PrimitiveInstruction::NegTest(a) => write!(f, "-{a}"),
            PrimitiveInstruction::Jump(l) => write!(f, "#{l}"),
            PrimitiveInstruction::Halt => write!(f, "!"),
        }
    }
}

/// A closed term of sort instruction sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SequenceTerm {
    Instr(PrimitiveInstruction),
    Concat(Box<SequenceTerm>, Box<SequenceTerm>),
    /// `t^n`; `t^0` denotes `#0`.
    Power(Box<SequenceTerm>, u32),
    /// `t^w`
    Repeat(Box<SequenceTerm>),
}

impl SequenceTerm {
    pub fn instr(i: PrimitiveInstruction) -> Self {
        SequenceTerm::Instr(i)
    }

    pub fn concat(a: SequenceTerm, b: SequenceTerm) -> Self {
        SequenceTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn power(t: SequenceTerm, n: u32) -> Self {
        SequenceTerm::Power(Box::new(t), n)
    }

    pub fn repeat(t: SequenceTerm) -> Self {
        SequenceTerm::Repeat(Box::new(t))
    }

    /// Right-nested concatenation of a non-empty list of terms.
    pub fn concat_all(items: impl IntoIterator<Item = SequenceTerm>) -> Option<Self> {
        let mut items: Vec<_> = items.into_iter().collect();
        let mut acc = items.pop()?;
        while let Some(t) = items.pop() {
            acc = SequenceTerm::concat(t, acc);
        }
        Some(acc)
    }

    /// Sequence term of a finite instruction list.
    pub fn from_instrs(instrs: &[PrimitiveInstruction]) -> Option<Self> {
        Self::concat_all(instrs.iter().cloned().map(SequenceTerm::Instr))
    }

    /// Foci occurring in the term.
    pub fn foci(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_foci(&mut out);
        out
    }

    fn collect_foci(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            SequenceTerm::Instr(i) => {
                if let Some(a) = i.action() {
                    out.insert(a.focus.clone());
                }
            }
            SequenceTerm::Concat(a, b) => {
                a.collect_foci(out);
                b.collect_foci(out);
            }
            SequenceTerm::Power(t, _) | SequenceTerm::Repeat(t) => t.collect_foci(out),
        }
    }

    /// Largest jump offset occurring in the term.
    pub fn max_jump(&self) -> u64 {
        match self {
            SequenceTerm::Instr(PrimitiveInstruction::Jump(l)) => *l,
            SequenceTerm::Instr(_) => 0,
            SequenceTerm::Concat(a, b) => a.max_jump().max(b.max_jump()),
            SequenceTerm::Power(t, _) | SequenceTerm::Repeat(t) => t.max_jump(),
        }
    }

    pub fn contains_repeat(&self) -> bool {
        match self {
            SequenceTerm::Instr(_) => false,
            SequenceTerm::Concat(a, b) => a.contains_repeat() || b.contains_repeat(),
            SequenceTerm::Power(t, _) => t.contains_repeat(),
            SequenceTerm::Repeat(_) => true,
        }
    }
}

impl fmt::Display for SequenceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceTerm::Instr(i) => write!(f, "{i}"),
            // the parser nests to the right, so only a left operand needs parentheses
            SequenceTerm::Concat(a, b) => {
                if matches!(**a, SequenceTerm::Concat(..)) {
                    write!(f, "({a}) ; {b}")
                } else {
                    write!(f, "{a} ; {b}")
                }
            }
            SequenceTerm::Power(t, n) => {
                write_operand(f, t)?;
                write!(f, "^{n}")
            }
            SequenceTerm::Repeat(t) => {
                write_operand(f, t)?;
                write!(f, "^w")
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &SequenceTerm) -> fmt::Result {
    match t {
        SequenceTerm::Instr(PrimitiveInstruction::Jump(_))
        | SequenceTerm::Instr(PrimitiveInstruction::Halt)
        | SequenceTerm::Power(..)
        | SequenceTerm::Repeat(_) => write!(f, "{t}"),
        _ => write!(f, "({t})"),
    }
}
