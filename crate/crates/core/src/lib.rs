//! Instruction sequences of program algebra, their thread semantics over
//! service families, and a Hoare-like logic of asserted single-pass
//! instruction sequences with a semantic checker and a proof checker.

pub mod asserted;
pub mod exec;
pub mod logic;
pub mod proof;
pub mod sequence;
pub mod service;
pub mod thread;

pub use asserted::{parse_asserted, AssertedParseError, AssertedSeq};
pub use exec::{
    holds, run_segment, strongest_post, Coverage, ExecError, Failure, HoldsError, Outcome,
    PostError, Program, StrongestPost, Verdict,
};
pub use logic::{
    entails, eval_formula, free_foci, parse_formula, substitute, EntailVerdict, Formula, Sort,
    Substitution, Term, Truth,
};
pub use proof::{
    check_proof, check_proof_with, expand_multi_exit, parse_proof, Axiom, CheckOptions,
    CheckResult, Justification, ProofNode, Rule,
};
pub use sequence::{
    normalize, parse_sequence, seq_equal, BasicAction, CanonicalSequence, Len,
    PrimitiveInstruction, SequenceTerm,
};
pub use service::{
    fam_compose, fam_encapsulate, parse_family, svc_step, Algebra, AlgebraConfig, Reply, Service,
    ServiceFamily,
};
pub use thread::{apply, embed, extract, RegularThread};
