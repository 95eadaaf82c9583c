use serde::Serialize;

use super::{Axiom, Justification, ProofNode, Rule};
use crate::asserted::AssertedSeq;
use crate::logic::{entails, substitute, EntailVerdict, Formula, Sort, Substitution, Term};
use crate::sequence::{normalize, Len, PrimitiveInstruction, SequenceTerm};
use crate::service::{AlgebraConfig, Reply};

/// An entailment accepted only because no counterexample exists within
/// the enumeration bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assumption {
    pub path: String,
    #[serde(serialize_with = "display")]
    pub obligation: Formula,
    pub bound: u64,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub accepted: bool,
    /// `(node path, reason)` for every rejected node.
    pub failures: Vec<(String, String)>,
    pub assumptions: Vec<Assumption>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckOptions {
    /// Reject entailments that are only valid up to the enumeration bounds.
    pub strict: bool,
}

/// Check every node of a proof tree in permissive mode.
pub fn check_proof(p: &ProofNode, cfg: &AlgebraConfig) -> CheckResult {
    check_proof_with(p, cfg, CheckOptions::default())
}

pub fn check_proof_with(p: &ProofNode, cfg: &AlgebraConfig, opts: CheckOptions) -> CheckResult {
    let mut c = Checker {
        cfg,
        opts,
        failures: Vec::new(),
        assumptions: Vec::new(),
        hyps: None,
    };
    c.node(p, "root");
    CheckResult {
        accepted: c.failures.is_empty(),
        failures: c.failures,
        assumptions: c.assumptions,
    }
}

/// A sequence as a flat list: concatenation flattened and powers unfolded,
/// repetitions kept as opaque items. Rules match sequences in this form;
/// full normalization would identify `S ; S^w` with `S^w` and let a
/// repetition subproof use its own hypothesis as the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Item {
    Instr(PrimitiveInstruction),
    Rep(Vec<Item>),
}

fn flatten(t: &SequenceTerm) -> Vec<Item> {
    let mut out = Vec::new();
    flatten_into(t, &mut out);
    out
}

fn flatten_into(t: &SequenceTerm, out: &mut Vec<Item>) {
    match t {
        SequenceTerm::Instr(i) => out.push(Item::Instr(i.clone())),
        SequenceTerm::Concat(a, b) => {
            flatten_into(a, out);
            flatten_into(b, out);
        }
        SequenceTerm::Power(_, 0) => out.push(Item::Instr(PrimitiveInstruction::Jump(0))),
        SequenceTerm::Power(a, n) => {
            let items = flatten(a);
            for _ in 0..*n {
                out.extend(items.iter().cloned());
            }
        }
        SequenceTerm::Repeat(a) => out.push(Item::Rep(flatten(a))),
    }
}

fn unflatten(items: &[Item]) -> Option<SequenceTerm> {
    SequenceTerm::concat_all(items.iter().map(|i| match i {
        Item::Instr(i) => SequenceTerm::Instr(i.clone()),
        Item::Rep(body) => {
            SequenceTerm::repeat(unflatten(body).expect("repetition bodies are non-empty"))
        }
    }))
}

/// The finite length of a list of items, if it has one.
fn finite_len(items: &[Item]) -> Option<u64> {
    match normalize(&unflatten(items)?).len() {
        Len::Finite(n) => Some(n),
        Len::Omega => None,
    }
}

fn single_instr(s: &SequenceTerm) -> Option<PrimitiveInstruction> {
    match flatten(s).as_slice() {
        [Item::Instr(i)] => Some(i.clone()),
        _ => None,
    }
}

struct Checker<'a> {
    cfg: &'a AlgebraConfig,
    opts: CheckOptions,
    failures: Vec<(String, String)>,
    assumptions: Vec<Assumption>,
    /// Hypotheses in scope inside a repetition subproof.
    hyps: Option<Vec<AssertedSeq>>,
}

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same(what: &str, a: &Formula, b: &Formula) -> Check {
    ensure(a.alpha_eq(b), || {
        format!("{what}: expected `{b}`, found `{a}`")
    })
}

impl Checker<'_> {
    fn fail(&mut self, path: &str, reason: String) {
        self.failures.push((path.to_string(), reason));
    }

    /// Check a node; returns its conclusion when it can be used by the parent.
    fn node(&mut self, n: &ProofNode, path: &str) -> Option<AssertedSeq> {
        let (conclusion, just) = match n {
            ProofNode::Hyp(i) => {
                let found = match &self.hyps {
                    None => Err("hypothesis used outside a repetition subproof".to_string()),
                    Some(hyps) => i
                        .checked_sub(1)
                        .and_then(|j| hyps.get(j))
                        .cloned()
                        .ok_or_else(|| format!("no hypothesis {i} (there are {})", hyps.len())),
                };
                return match found {
                    Ok(h) => Some(h),
                    Err(e) => {
                        self.fail(path, e);
                        None
                    }
                };
            }
            ProofNode::Step {
                conclusion,
                justification,
            } => (conclusion, justification),
        };
        if let Err(e) = self.well_formed(conclusion) {
            self.fail(path, e);
        }
        let premises = |c: &mut Self, ps: &[&ProofNode], tag: &str| -> Option<Vec<AssertedSeq>> {
            let concls: Vec<Option<AssertedSeq>> = ps
                .iter()
                .enumerate()
                .map(|(i, p)| c.node(p, &format!("{path}.{tag}{}", i + 1)))
                .collect();
            concls.into_iter().collect()
        };
        let result = match just {
            Justification::Axiom(a) => self.axiom(*a, conclusion),
            Justification::Rule(r, ps) => {
                if ps.len() != r.arity() {
                    Err(format!(
                        "{r} takes {} premise(s), found {}",
                        r.arity(),
                        ps.len()
                    ))
                } else {
                    match premises(self, &ps.iter().collect::<Vec<_>>(), "") {
                        Some(prem) => self.rule(*r, &prem, conclusion),
                        None => Ok(()),
                    }
                }
            }
            Justification::Substitution { from, to, premise } => {
                match premises(self, &[premise], "") {
                    Some(prem) => self.substitution(from, to, &prem[0], conclusion),
                    None => Ok(()),
                }
            }
            Justification::Consequence { pre, premise, post } => {
                match premises(self, &[premise], "") {
                    Some(prem) => self.consequence(pre, &prem[0], post, conclusion, path),
                    None => Ok(()),
                }
            }
            Justification::Repetition { hyps, k, subproofs } => {
                self.repetition(hyps, *k, subproofs, conclusion, path)
            }
            Justification::RepIntro(premise) => {
                if self.hyps.is_some() {
                    Err("repetition introduction inside a repetition subproof".to_string())
                } else {
                    match premises(self, &[premise], "") {
                        Some(prem) => rep_intro(&prem[0], conclusion),
                        None => Ok(()),
                    }
                }
            }
        };
        if let Err(e) = result {
            self.fail(path, e);
        }
        Some(conclusion.clone())
    }

    /// Assertions are well sorted and agree with the sequence on which
    /// names are foci.
    fn well_formed(&self, a: &AssertedSeq) -> Check {
        let sorts = Formula::implies(a.pre.clone(), a.post.clone())
            .free_sorts()
            .map_err(|e| format!("ill-sorted assertion: {e}"))?;
        for f in a.seq.foci() {
            if let Some(s) = sorts.get(&f).filter(|s| **s != Sort::Serv) {
                return Err(format!(
                    "`{f}` is a focus of the sequence but has sort {s} in the assertions"
                ));
            }
        }
        ensure(a.entry >= 1, || "entry points are positive".to_string())
    }

    fn axiom(&self, id: Axiom, c: &AssertedSeq) -> Check {
        let instr = single_instr(&c.seq)
            .ok_or_else(|| format!("{id} concerns a single instruction, found `{}`", c.seq))?;
        ensure(c.entry == 1, || {
            format!("{id} has entry 1, found {}", c.entry)
        })?;
        let (kind, action) = match &instr {
            PrimitiveInstruction::Basic(a) => ("basic", Some(a)),
            PrimitiveInstruction::PosTest(a) => ("positive test", Some(a)),
            PrimitiveInstruction::NegTest(a) => ("negative test", Some(a)),
            PrimitiveInstruction::Jump(_) => ("jump", None),
            PrimitiveInstruction::Halt => ("termination", None),
        };
        let wrong = || format!("{id} does not apply to the {kind} instruction `{instr}`");
        // reply, exit; None for the D-reply axioms
        let (expected_kind, reply_exit): (&str, Option<(Reply, u64)>) = match id {
            Axiom::A1 => ("basic", Some((Reply::D, 1))),
            Axiom::A2 | Axiom::A5 | Axiom::A8 => (
                match id {
                    Axiom::A2 => "basic",
                    Axiom::A5 => "positive test",
                    _ => "negative test",
                },
                None,
            ),
            Axiom::A3 => ("positive test", Some((Reply::T, 1))),
            Axiom::A4 => ("positive test", Some((Reply::F, 2))),
            Axiom::A6 => ("negative test", Some((Reply::T, 2))),
            Axiom::A7 => ("negative test", Some((Reply::F, 1))),
            Axiom::A9 => {
                let PrimitiveInstruction::Jump(l) = instr else {
                    return Err(wrong());
                };
                ensure(l >= 1, || {
                    "A9 needs a jump of at least 1; use A10 for #0".to_string()
                })?;
                ensure(c.exit == l, || {
                    format!("A9 for `#{l}` exits at {l}, found {}", c.exit)
                })?;
                return same("pre-condition", &c.pre, &c.post);
            }
            Axiom::A10 => {
                ensure(instr == PrimitiveInstruction::Jump(0), wrong)?;
                ensure(c.exit == 0, || format!("A10 exits at 0, found {}", c.exit))?;
                same("pre-condition", &c.pre, &Formula::True)?;
                return same("post-condition", &c.post, &Formula::False);
            }
            Axiom::A11 => {
                ensure(instr == PrimitiveInstruction::Halt, wrong)?;
                ensure(c.exit == 0, || format!("A11 exits at 0, found {}", c.exit))?;
                return same("pre-condition", &c.pre, &c.post);
            }
        };
        ensure(kind == expected_kind, wrong)?;
        let a = action.expect("action instructions");
        let reply_of = Term::reply_of(&a.method, Term::var(&a.focus));
        match reply_exit {
            None => {
                ensure(c.exit == 0, || format!("{id} exits at 0, found {}", c.exit))?;
                same(
                    "pre-condition",
                    &c.pre,
                    &Formula::eq(reply_of, Term::Reply(Reply::D)),
                )?;
                same("post-condition", &c.post, &Formula::False)
            }
            Some((reply, exit)) => {
                ensure(c.exit == exit, || {
                    format!("{id} exits at {exit}, found {}", c.exit)
                })?;
                let guard = if id == Axiom::A1 {
                    Formula::neq(reply_of, Term::Reply(Reply::D))
                } else {
                    Formula::eq(reply_of, Term::Reply(reply))
                };
                let derived = substitute(&c.post, &Substitution::derive_focus(&a.focus, &a.method));
                same("pre-condition", &c.pre, &Formula::and(guard, derived))
            }
        }
    }

    fn rule(&self, r: Rule, prem: &[AssertedSeq], c: &AssertedSeq) -> Check {
        let whole = flatten(&c.seq);
        let first = flatten(&prem[0].seq);
        match r {
            Rule::R1 => {
                let (p1, p2) = (&prem[0], &prem[1]);
                let second = flatten(&p2.seq);
                ensure(p1.exit > 0, || {
                    "R1 needs the first premise to exit (i > 0)".to_string()
                })?;
                ensure(p1.exit == p2.entry, || {
                    format!(
                        "R1: first premise exits at {} but the second is entered at {}",
                        p1.exit, p2.entry
                    )
                })?;
                same("R1 intermediate assertion", &p2.pre, &p1.post)?;
                ensure(whole == [first, second].concat(), || {
                    format!(
                        "R1: `{}` is not `{}` followed by `{}`",
                        c.seq, p1.seq, p2.seq
                    )
                })?;
                ensure(c.entry == p1.entry && c.exit == p2.exit, || {
                    format!("R1 concludes entry {} and exit {}", p1.entry, p2.exit)
                })?;
                same("pre-condition", &c.pre, &p1.pre)?;
                same("post-condition", &c.post, &p2.post)
            }
            Rule::R2 | Rule::R3 => {
                let p = &prem[0];
                let rest = whole
                    .strip_prefix(first.as_slice())
                    .filter(|rest| !rest.is_empty())
                    .ok_or_else(|| format!("{r}: `{}` does not extend `{}`", c.seq, p.seq))?;
                ensure(c.entry == p.entry, || {
                    format!("{r} keeps the entry {}", p.entry)
                })?;
                same("pre-condition", &c.pre, &p.pre)?;
                same("post-condition", &c.post, &p.post)?;
                if r == Rule::R3 {
                    ensure(p.exit == 0 && c.exit == 0, || {
                        "R3 concerns exit 0".to_string()
                    })
                } else {
                    let n = finite_len(rest)
                        .ok_or_else(|| "R2 needs a finite second part".to_string())?;
                    ensure(c.exit > 0, || "R2 concludes a positive exit".to_string())?;
                    ensure(p.exit == c.exit + n, || {
                        format!(
                            "R2: premise exit should be {} + {n}, found {}",
                            c.exit, p.exit
                        )
                    })
                }
            }
            Rule::R4 => {
                let p = &prem[0];
                let lead = whole
                    .strip_suffix(first.as_slice())
                    .filter(|lead| !lead.is_empty())
                    .ok_or_else(|| format!("R4: `{}` does not end with `{}`", c.seq, p.seq))?;
                let n =
                    finite_len(lead).ok_or_else(|| "R4 needs a finite first part".to_string())?;
                ensure(c.entry == p.entry + n, || {
                    format!("R4: entry should be {} + {n}, found {}", p.entry, c.entry)
                })?;
                ensure(c.exit == p.exit, || format!("R4 keeps the exit {}", p.exit))?;
                same("pre-condition", &c.pre, &p.pre)?;
                same("post-condition", &c.post, &p.post)
            }
            Rule::R6 => {
                let (p1, p2) = (&prem[0], &prem[1]);
                for p in prem {
                    ensure(
                        flatten(&p.seq) == whole && p.entry == c.entry && p.exit == c.exit,
                        || {
                            "R6 premises must have the conclusion's sequence, entry and exit"
                                .to_string()
                        },
                    )?;
                    same("post-condition", &p.post, &c.post)?;
                }
                same(
                    "pre-condition",
                    &c.pre,
                    &Formula::or(p1.pre.clone(), p2.pre.clone()),
                )
            }
            Rule::R7 => {
                let p = &prem[0];
                same_shape(p, c, r)?;
                let (Formula::And(pre, inv), Formula::And(post, inv2)) = (&c.pre, &c.post) else {
                    return Err("R7 concludes `P /\\ R` and `Q /\\ R`".to_string());
                };
                same("pre-condition", pre, &p.pre)?;
                same("post-condition", post, &p.post)?;
                same("invariant", inv2, inv)?;
                let shared: Vec<String> = inv
                    .free_names()
                    .intersection(&c.seq.foci())
                    .cloned()
                    .collect();
                ensure(shared.is_empty(), || {
                    format!(
                        "R7: invariant mentions {} used by the sequence",
                        shared.join(", ")
                    )
                })
            }
            Rule::R8 => {
                let p = &prem[0];
                same_shape(p, c, r)?;
                let Formula::Exists(x, _, body) = &c.pre else {
                    return Err("R8 concludes an existential pre-condition".to_string());
                };
                same("pre-condition body", body, &p.pre)?;
                same("post-condition", &c.post, &p.post)?;
                ensure(!c.seq.foci().contains(x), || {
                    format!("R8: `{x}` is a focus of the sequence")
                })?;
                ensure(!c.post.free_names().contains(x), || {
                    format!("R8: `{x}` occurs free in the post-condition")
                })
            }
        }
    }

    fn substitution(&self, from: &str, to: &str, p: &AssertedSeq, c: &AssertedSeq) -> Check {
        same_shape(p, c, "R9")?;
        let foci = c.seq.foci();
        for x in [from, to] {
            ensure(!foci.contains(x), || {
                format!("R9: `{x}` is a focus of the sequence")
            })?;
        }
        let sub = Substitution::rename(from, to);
        same("pre-condition", &c.pre, &substitute(&p.pre, &sub))?;
        same("post-condition", &c.post, &substitute(&p.post, &sub))
    }

    fn consequence(
        &mut self,
        pre: &Formula,
        p: &AssertedSeq,
        post: &Formula,
        c: &AssertedSeq,
        path: &str,
    ) -> Check {
        same_shape(p, c, "R10")?;
        let (Formula::Implies(pa, pb), Formula::Implies(qa, qb)) = (pre, post) else {
            return Err("R10 obligations are implications".to_string());
        };
        same("pre-condition obligation premise", pa, &c.pre)?;
        same("pre-condition obligation conclusion", pb, &p.pre)?;
        same("post-condition obligation premise", qa, &p.post)?;
        same("post-condition obligation conclusion", qb, &c.post)?;
        for (which, a, b, f) in [("pre", pa, pb, pre), ("post", qa, qb, post)] {
            match entails(a, b, self.cfg) {
                EntailVerdict::Valid => {}
                EntailVerdict::BoundedValid(bound) if !self.opts.strict => {
                    self.assumptions.push(Assumption {
                        path: format!("{path}.{which}"),
                        obligation: f.clone(),
                        bound,
                    })
                }
                v => return Err(format!("R10 {which}-condition obligation `{f}`: {v}")),
            }
        }
        Ok(())
    }

    fn repetition(
        &mut self,
        hyps: &[AssertedSeq],
        k: usize,
        subproofs: &[ProofNode],
        c: &AssertedSeq,
        path: &str,
    ) -> Check {
        if self.hyps.is_some() {
            return Err("repetition rule inside a repetition subproof".to_string());
        }
        ensure(!hyps.is_empty(), || {
            "R5 needs at least one hypothesis".to_string()
        })?;
        ensure(subproofs.len() == hyps.len(), || {
            format!(
                "R5: {} hypotheses but {} subproofs",
                hyps.len(),
                subproofs.len()
            )
        })?;
        let hyp = k
            .checked_sub(1)
            .and_then(|i| hyps.get(i))
            .ok_or_else(|| format!("R5: k = {k} is not a hypothesis number"))?;
        ensure(c.alpha_eq(hyp), || {
            format!("R5 concludes hypothesis {k}, `{hyp}`")
        })?;
        let body = match flatten(&hyps[0].seq).as_slice() {
            [Item::Rep(body)] => body.clone(),
            _ => {
                return Err(format!(
                    "R5 hypotheses concern a repetition `S^w`, found `{}`",
                    hyps[0].seq
                ))
            }
        };
        for (i, h) in hyps.iter().enumerate() {
            ensure(flatten(&h.seq) == [Item::Rep(body.clone())], || {
                format!("R5: hypothesis {} is not about `{}`", i + 1, hyps[0].seq)
            })?;
            ensure(h.exit == 0, || {
                format!("R5: hypothesis {} has exit {}, not 0", i + 1, h.exit)
            })?;
        }
        let unrolled: Vec<Item> = body
            .iter()
            .cloned()
            .chain([Item::Rep(body.clone())])
            .collect();
        let outer = self.hyps.replace(hyps.to_vec());
        let mut bad = Vec::new();
        for (i, (sp, h)) in subproofs.iter().zip(hyps).enumerate() {
            let sub_path = format!("{path}.sub{}", i + 1);
            let Some(got) = self.node(sp, &sub_path) else {
                continue;
            };
            let expected = flatten(&got.seq) == unrolled
                && got.entry == h.entry
                && got.exit == 0
                && got.pre.alpha_eq(&h.pre)
                && got.post.alpha_eq(&h.post);
            if !expected {
                bad.push(format!(
                    "subproof {} concludes `{got}`, expected hypothesis {} unrolled once",
                    i + 1,
                    i + 1
                ));
            }
        }
        self.hyps = outer;
        ensure(bad.is_empty(), || format!("R5: {}", bad.join("; ")))
    }
}

/// Same sequence, entry and exit.
fn same_shape(p: &AssertedSeq, c: &AssertedSeq, rule: impl std::fmt::Display) -> Check {
    ensure(flatten(&p.seq) == flatten(&c.seq), || {
        format!("{rule} keeps the sequence `{}`, found `{}`", p.seq, c.seq)
    })?;
    ensure(p.entry == c.entry && p.exit == c.exit, || {
        format!("{rule} keeps entry {} and exit {}", p.entry, p.exit)
    })
}

fn rep_intro(p: &AssertedSeq, c: &AssertedSeq) -> Check {
    ensure(flatten(&c.seq) == [Item::Rep(flatten(&p.seq))], || {
        format!("repetition introduction concludes `({})^w`", p.seq)
    })?;
    ensure(p.exit == 0 && c.exit == 0, || {
        "repetition introduction concerns exit 0".to_string()
    })?;
    ensure(c.entry == p.entry, || {
        format!("repetition introduction keeps entry {}", p.entry)
    })?;
    same("pre-condition", &c.pre, &p.pre)?;
    same("post-condition", &c.post, &p.post)
}
