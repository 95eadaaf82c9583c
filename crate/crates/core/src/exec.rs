//! Program-counter interpreter for instruction sequence segments and the
//! semantic checker for asserted sequences built on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::asserted::AssertedSeq;
use crate::logic::{eval_with, Formula, Sort, SortError, Term, Truth, Valuation};
use crate::sequence::{normalize, CanonicalSequence, Len, PrimitiveInstruction, SequenceTerm};
use crate::service::{AlgebraConfig, Reply, Service, ServiceFamily, DEFAULT_BOUND};
use crate::thread::step_budget;

/// How a run that entered a segment ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// Terminated inside the segment.
    Halted(ServiceFamily),
    /// Went to the given instruction following the segment.
    Exited(u64, ServiceFamily),
    /// Inaction: `#0`, a D reply, a missing focus, or an endless loop.
    Inactive,
    /// No decision within the step budget.
    BudgetExhausted(u64),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Halted(u) => write!(f, "halted {u}"),
            Outcome::Exited(e, u) => write!(f, "exited {e} {u}"),
            Outcome::Inactive => write!(f, "inactive"),
            Outcome::BudgetExhausted(n) => write!(f, "budget of {n} steps exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ExecError {
    #[error("entry {entry} beyond segment of length {len}")]
    EntryBeyondSegment { entry: u64, len: Len },
    #[error("entry points are positive")]
    ZeroEntry,
}

#[derive(Debug, Clone)]
enum Op {
    Basic(usize, String),
    PosTest(usize, String),
    NegTest(usize, String),
    Jump(u64),
    Halt,
}

/// A normalized segment with foci resolved to slots.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    prefix: u64,
    period: u64,
    len: Len,
    foci: Vec<String>,
}

enum Step {
    Next(u64),
    Halt,
    Exit(u64),
    Inactive,
}

impl Program {
    pub fn new(seq: &CanonicalSequence) -> Self {
        let mut foci: Vec<String> = Vec::new();
        let mut slot = |f: &str| match foci.iter().position(|g| g == f) {
            Some(i) => i,
            None => {
                foci.push(f.to_string());
                foci.len() - 1
            }
        };
        let instrs = seq.prefix().iter().chain(seq.period().unwrap_or(&[]));
        let ops = instrs
            .map(|i| match i {
                PrimitiveInstruction::Basic(a) => Op::Basic(slot(&a.focus), a.method.clone()),
                PrimitiveInstruction::PosTest(a) => Op::PosTest(slot(&a.focus), a.method.clone()),
                PrimitiveInstruction::NegTest(a) => Op::NegTest(slot(&a.focus), a.method.clone()),
                PrimitiveInstruction::Jump(l) => Op::Jump(*l),
                PrimitiveInstruction::Halt => Op::Halt,
            })
            .collect();
        Program {
            ops,
            prefix: seq.prefix().len() as u64,
            period: seq.period().map_or(0, |p| p.len() as u64),
            len: seq.len(),
            foci,
        }
    }

    pub fn from_term(s: &SequenceTerm) -> Self {
        Program::new(&normalize(s))
    }

    pub fn len(&self) -> Len {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// The representative of position `p`, or the exit offset past the end.
    fn locate(&self, p: u64) -> Step {
        if p <= self.prefix {
            Step::Next(p)
        } else if self.period == 0 {
            Step::Exit(p - self.prefix)
        } else {
            Step::Next(self.prefix + 1 + (p - self.prefix - 1) % self.period)
        }
    }

    fn step(&self, pc: u64, services: &mut [Option<Service>]) -> Step {
        let mut call = |slot: usize, m: &str| -> Option<bool> {
            let s = services[slot].as_ref()?;
            let (reply, derived) = s.step(m);
            services[slot] = Some(derived);
            match reply {
                Reply::T => Some(true),
                Reply::F => Some(false),
                Reply::D => None,
            }
        };
        let offset = match &self.ops[(pc - 1) as usize] {
            Op::Basic(slot, m) => match call(*slot, m) {
                Some(_) => 1,
                None => return Step::Inactive,
            },
            Op::PosTest(slot, m) => match call(*slot, m) {
                Some(true) => 1,
                Some(false) => 2,
                None => return Step::Inactive,
            },
            Op::NegTest(slot, m) => match call(*slot, m) {
                Some(true) => 2,
                Some(false) => 1,
                None => return Step::Inactive,
            },
            Op::Jump(0) => return Step::Inactive,
            Op::Jump(l) => *l,
            Op::Halt => return Step::Halt,
        };
        self.locate(pc.saturating_add(offset))
    }

    /// Run from instruction `entry` in state `u`.
    pub fn run(&self, entry: u64, u: &ServiceFamily, bound: u64) -> Result<Outcome, ExecError> {
        if entry == 0 {
            return Err(ExecError::ZeroEntry);
        }
        if let Len::Finite(n) = self.len {
            if entry > n {
                return Err(ExecError::EntryBeyondSegment {
                    entry,
                    len: self.len,
                });
            }
        }
        let mut services: Vec<Option<Service>> =
            self.foci.iter().map(|f| u.get(f).cloned()).collect();
        let finish = |services: Vec<Option<Service>>| {
            let mut out = u.clone();
            for (f, s) in self.foci.iter().zip(services) {
                if let Some(s) = s {
                    out.set(f.clone(), s);
                }
            }
            out
        };
        let budget = step_budget(bound, self.ops.len(), u);
        let Step::Next(mut pc) = self.locate(entry) else {
            unreachable!("entry is within the segment")
        };
        // Brent's cycle detection on the exact (position, services) pair
        let mut saved = (pc, services.clone());
        let mut power = 1u64;
        let mut lambda = 0u64;
        for _ in 0..budget {
            pc = match self.step(pc, &mut services) {
                Step::Next(p) => p,
                Step::Halt => return Ok(Outcome::Halted(finish(services))),
                Step::Exit(e) => return Ok(Outcome::Exited(e, finish(services))),
                Step::Inactive => return Ok(Outcome::Inactive),
            };
            lambda += 1;
            if saved.0 == pc && saved.1 == services {
                return Ok(Outcome::Inactive);
            }
            if lambda == power {
                saved = (pc, services.clone());
                power *= 2;
                lambda = 0;
            }
        }
        Ok(Outcome::BudgetExhausted(budget))
    }
}

/// Run `s` entered at instruction `entry` in state `u`, with the default budget.
pub fn run_segment(s: &SequenceTerm, entry: u64, u: &ServiceFamily) -> Result<Outcome, ExecError> {
    Program::from_term(s).run(entry, u, DEFAULT_BOUND)
}

/// Which part of the state space a verdict covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coverage {
    Exhaustive,
    /// Counter contents up to `bound` and free naturals up to `qbound`
    /// (each present only when it limited the enumeration).
    Bounded {
        bound: Option<u64>,
        qbound: Option<u64>,
    },
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coverage::Exhaustive => write!(f, "exhaustive"),
            Coverage::Bounded { bound, qbound } => {
                write!(f, "bounded")?;
                if let Some(b) = bound {
                    write!(f, ", B={b}")?;
                }
                if let Some(q) = qbound {
                    write!(f, ", Q={q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Failure {
    EntryBeyondSegment {
        entry: u64,
        len: Len,
    },
    /// A state satisfying the pre-condition whose run violates the judgment.
    Counterexample {
        state: ServiceFamily,
        valuation: Valuation,
        outcome: Outcome,
    },
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::EntryBeyondSegment { entry, len } => {
                write!(f, "entry {entry} beyond segment of length {len}")
            }
            Failure::Counterexample {
                state,
                valuation,
                outcome,
            } => {
                write!(f, "from {state}")?;
                if !valuation.is_empty() {
                    let vals: Vec<String> = valuation
                        .iter()
                        .map(|(x, v)| format!("{x} = {v}"))
                        .collect();
                    write!(f, " with {}", vals.join(", "))?;
                }
                write!(f, ": {outcome}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds(Coverage),
    Fails(Failure),
    Unknown(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds(c) => write!(f, "HOLDS ({c})"),
            Verdict::Fails(w) => write!(f, "FAILS: {w}"),
            Verdict::Unknown(why) => write!(f, "UNKNOWN: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HoldsError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::logic::EvalError),
    #[error("`{0}` is a focus of the sequence but not a service in the assertions")]
    FocusSort(String),
}

/// The states and valuations an asserted sequence quantifies over.
struct Space {
    states: Vec<ServiceFamily>,
    valuations: Vec<Valuation>,
    coverage: Coverage,
}

fn space(
    pre: &Formula,
    post: &Formula,
    seq: &SequenceTerm,
    cfg: &AlgebraConfig,
) -> Result<Space, HoldsError> {
    let sorts = Formula::implies(pre.clone(), post.clone()).free_sorts()?;
    let mut foci: BTreeSet<String> = BTreeSet::new();
    let mut vars: BTreeMap<String, Sort> = BTreeMap::new();
    for (x, s) in sorts {
        if s == Sort::Serv {
            foci.insert(x);
        } else {
            vars.insert(x, s);
        }
    }
    for f in seq.foci() {
        if vars.contains_key(&f) {
            return Err(HoldsError::FocusSort(f));
        }
        foci.insert(f);
    }
    let nat_vars = vars.values().any(|s| *s == Sort::Nat);
    let infinite_states = !foci.is_empty() && !cfg.algebra.is_finite();
    let coverage = if nat_vars || infinite_states {
        Coverage::Bounded {
            bound: infinite_states.then_some(cfg.bound),
            qbound: nat_vars.then_some(cfg.qbound),
        }
    } else {
        Coverage::Exhaustive
    };
    Ok(Space {
        states: cfg.states(&foci),
        valuations: crate::logic::valuations(&vars, cfg.qbound),
        coverage,
    })
}

enum Check {
    Ok,
    Unknown(String),
    Fail(Failure),
}

/// Decide `{b | P} S {e | Q}` by running `S` from every enumerated state
/// satisfying `P`: each run must become inactive, or exit at offset `e`
/// (terminate inside `S` when `e = 0`) in a state satisfying `Q`.
pub fn holds(phi: &AssertedSeq, cfg: &AlgebraConfig) -> Result<Verdict, HoldsError> {
    let program = Program::from_term(&phi.seq);
    if let Len::Finite(n) = program.len() {
        if phi.entry > n {
            return Ok(Verdict::Fails(Failure::EntryBeyondSegment {
                entry: phi.entry,
                len: program.len(),
            }));
        }
    }
    let space = space(&phi.pre, &phi.post, &phi.seq, cfg)?;
    let cases: Vec<(&ServiceFamily, &Valuation)> = space
        .states
        .iter()
        .flat_map(|s| space.valuations.iter().map(move |v| (s, v)))
        .collect();
    let results: Vec<Result<Check, HoldsError>> = cases
        .par_iter()
        .map(|(state, val)| check_one(phi, &program, state, val, cfg))
        .collect();
    let mut unknown = None;
    for r in results {
        match r? {
            Check::Ok => {}
            Check::Fail(w) => return Ok(Verdict::Fails(w)),
            Check::Unknown(why) => {
                unknown.get_or_insert(why);
            }
        }
    }
    Ok(match unknown {
        Some(why) => Verdict::Unknown(why),
        None => Verdict::Holds(space.coverage),
    })
}

fn check_one(
    phi: &AssertedSeq,
    program: &Program,
    state: &ServiceFamily,
    val: &Valuation,
    cfg: &AlgebraConfig,
) -> Result<Check, HoldsError> {
    let pre = eval_with(&phi.pre, state, val, cfg)?;
    if pre == Truth::False {
        return Ok(Check::Ok);
    }
    let outcome = program
        .run(phi.entry, state, cfg.bound)
        .expect("entry checked against the length");
    let end = match (&outcome, phi.exit) {
        (Outcome::Inactive, _) => return Ok(Check::Ok),
        (Outcome::BudgetExhausted(n), _) => {
            return Ok(Check::Unknown(format!(
                "run from {state} exhausted its budget of {n} steps"
            )))
        }
        (Outcome::Halted(t), 0) => Some(t),
        (Outcome::Exited(e, t), exit) if *e == exit => Some(t),
        _ => None,
    };
    let post = match end {
        Some(t) => eval_with(&phi.post, t, val, cfg)?,
        None => Truth::False,
    };
    Ok(match (pre, post) {
        (_, Truth::True) => Check::Ok,
        (Truth::True, Truth::False) => Check::Fail(Failure::Counterexample {
            state: state.clone(),
            valuation: val.clone(),
            outcome,
        }),
        _ => Check::Unknown(format!(
            "a quantifier bound decides the assertions at {state}"
        )),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PostError {
    #[error("no post-condition exists for this e: {0}")]
    NoPostCondition(Failure),
    #[error("existence of a post-condition is undecided: {0}")]
    Undecided(String),
    #[error(transparent)]
    Holds(#[from] HoldsError),
}

/// The exact image of a pre-condition under a segment, as a set of states
/// and as a formula satisfied by exactly those states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrongestPost {
    pub states: BTreeSet<ServiceFamily>,
    #[serde(serialize_with = "display")]
    pub formula: Formula,
    pub coverage: Coverage,
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// The formula `f1 = t1 /\ ... /\ fn = tn` describing a state.
pub fn describe_state(u: &ServiceFamily) -> Formula {
    let eqs = u.iter().filter_map(|(f, s)| {
        let t = match s {
            Service::Counter(n) => Term::nnc(Term::numeral(*n)),
            Service::BoolReg(b) => Term::reg(Term::Bool(*b)),
            Service::Empty => return None,
        };
        Some(Formula::eq(Term::var(f), t))
    });
    eqs.reduce(Formula::and).unwrap_or(Formula::True)
}

/// The states in which entering `s` at `entry` from a state satisfying
/// `pre` exits at offset `exit` (terminates inside when `exit` is 0).
pub fn strongest_post(
    pre: &Formula,
    s: &SequenceTerm,
    entry: u64,
    exit: u64,
    cfg: &AlgebraConfig,
) -> Result<StrongestPost, PostError> {
    let probe = AssertedSeq::new(entry, pre.clone(), s.clone(), exit, Formula::True);
    let coverage = match holds(&probe, cfg)? {
        Verdict::Holds(c) => c,
        Verdict::Fails(w) => return Err(PostError::NoPostCondition(w)),
        Verdict::Unknown(why) => return Err(PostError::Undecided(why)),
    };
    let program = Program::from_term(s);
    let space = space(pre, &Formula::True, s, cfg)?;
    let mut states = BTreeSet::new();
    for state in &space.states {
        for val in &space.valuations {
            match eval_with(pre, state, val, cfg).map_err(HoldsError::from)? {
                Truth::False => continue,
                Truth::Unknown => {
                    return Err(PostError::Undecided(format!(
                        "a quantifier bound decides the pre-condition at {state}"
                    )))
                }
                Truth::True => {}
            }
            match program.run(entry, state, cfg.bound) {
                Ok(Outcome::Halted(t)) if exit == 0 => {
                    states.insert(t);
                }
                Ok(Outcome::Exited(e, t)) if e == exit => {
                    states.insert(t);
                }
                _ => {}
            }
        }
    }
    let formula = states
        .iter()
        .map(describe_state)
        .reduce(Formula::or)
        .unwrap_or(Formula::False);
    Ok(StrongestPost {
        states,
        formula,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asserted::parse_asserted;
    use crate::logic::parse_formula;
    use crate::sequence::parse_sequence;
    use crate::service::parse_family;

    fn run(s: &str, b: u64, u: &str) -> Outcome {
        run_segment(&parse_sequence(s).unwrap(), b, &parse_family(u).unwrap()).unwrap()
    }

    fn fam(u: &str) -> ServiceFamily {
        parse_family(u).unwrap()
    }

    const S0: &str = "-c.iszero ; #2 ; ! ; c.decr";

    #[test]
    fn run_examples() {
        assert_eq!(
            run(S0, 1, "{c = counter(0)}"),
            Outcome::Halted(fam("{c = counter(0)}"))
        );
        assert_eq!(
            run(S0, 1, "{c = counter(5)}"),
            Outcome::Exited(1, fam("{c = counter(4)}"))
        );
        assert_eq!(run("#0", 1, "{c = counter(5)}"), Outcome::Inactive);
        assert_eq!(
            run("(-c.iszero ; #2 ; ! ; c.decr)^w", 1, "{c = counter(3)}"),
            Outcome::Halted(fam("{c = counter(0)}"))
        );
    }

    #[test]
    fn inaction() {
        assert_eq!(run("c.incr", 1, "{d = counter(0)}"), Outcome::Inactive);
        assert_eq!(run("r.get", 1, "{r = counter(0)}"), Outcome::Inactive);
        assert_eq!(run("(#1)^w", 1, "{}"), Outcome::Inactive);
        assert_eq!(
            run("(r.set:t ; r.get)^w", 1, "{r = bool(false)}"),
            Outcome::Inactive
        );
        assert_eq!(run("#3 ; !", 1, "{}"), Outcome::Exited(2, fam("{}")));
    }

    #[test]
    fn growing_counter_exhausts_budget() {
        let p = Program::from_term(&parse_sequence("(c.incr)^w").unwrap());
        assert!(matches!(
            p.run(1, &fam("{c = counter(0)}"), 10),
            Ok(Outcome::BudgetExhausted(_))
        ));
    }

    #[test]
    fn entry_errors() {
        let s = parse_sequence("!").unwrap();
        assert!(matches!(
            run_segment(&s, 2, &ServiceFamily::empty()),
            Err(ExecError::EntryBeyondSegment { entry: 2, .. })
        ));
        assert_eq!(
            run_segment(&s, 0, &ServiceFamily::empty()),
            Err(ExecError::ZeroEntry)
        );
    }

    fn verdict(text: &str, cfg: &AlgebraConfig) -> Verdict {
        holds(&parse_asserted(text).unwrap(), cfg).unwrap()
    }

    #[test]
    fn holds_examples() {
        let cfg = AlgebraConfig::counter();
        assert_eq!(
            verdict(
                "{1 | true} (-c.iszero;#2;!;c.decr)^w {0 | c = nnc(0)}",
                &cfg
            ),
            Verdict::Holds(Coverage::Bounded {
                bound: Some(100),
                qbound: None
            })
        );
        assert!(matches!(
            verdict("{1 | true} ! {1 | true}", &cfg),
            Verdict::Fails(Failure::Counterexample { .. })
        ));
        assert!(matches!(
            verdict("{2 | true} ! {0 | true}", &cfg),
            Verdict::Fails(Failure::EntryBeyondSegment { entry: 2, .. })
        ));
        assert_eq!(
            verdict("{1 | false} #0 {7 | true}", &cfg),
            Verdict::Holds(Coverage::Exhaustive)
        );
    }

    #[test]
    fn holds_with_shared_variables() {
        let cfg = AlgebraConfig::counter().with_bound(10).with_qbound(10);
        assert!(matches!(
            verdict("{1 | c = nnc(s(n))} c.decr {1 | c = nnc(n)}", &cfg),
            Verdict::Holds(_)
        ));
        assert!(matches!(
            verdict("{1 | c = nnc(n)} c.incr {1 | c = nnc(n)}", &cfg),
            Verdict::Fails(_)
        ));
    }

    #[test]
    fn holds_for_registers_is_exhaustive() {
        let cfg = AlgebraConfig::boolreg();
        assert_eq!(
            verdict(
                "{1 | true} r.set:t ; +r.get ; #0 ; ! {0 | r = reg(true)}",
                &cfg
            ),
            Verdict::Holds(Coverage::Exhaustive)
        );
    }

    #[test]
    fn strongest_post_examples() {
        let cfg = AlgebraConfig::counter();
        let sp = strongest_post(
            &parse_formula("c = nnc(s(s(0)))").unwrap(),
            &parse_sequence(S0).unwrap(),
            1,
            1,
            &cfg,
        )
        .unwrap();
        assert_eq!(sp.states, [fam("{c = counter(1)}")].into());

        let b = AlgebraConfig::boolreg();
        let sp = strongest_post(
            &Formula::True,
            &parse_sequence("r.set:t").unwrap(),
            1,
            1,
            &b,
        )
        .unwrap();
        assert_eq!(sp.states, [fam("{r = bool(true)}")].into());
        assert_eq!(sp.formula, parse_formula("r = reg(true)").unwrap());

        let sp = strongest_post(&Formula::False, &parse_sequence(S0).unwrap(), 1, 0, &cfg).unwrap();
        assert!(sp.states.is_empty());
        assert_eq!(sp.formula, Formula::False);

        assert!(matches!(
            strongest_post(&Formula::True, &parse_sequence("!").unwrap(), 1, 1, &b),
            Err(PostError::NoPostCondition(_))
        ));
    }
}
