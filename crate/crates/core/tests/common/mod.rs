//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use pga_core::logic::Sort;
use pga_core::{
    parse_formula, substitute, AssertedSeq, Axiom, Formula, Justification, PrimitiveInstruction,
    ProofNode, Rule, SequenceTerm, Substitution, Term,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub use pga_core::Reply;

// ---------------------------------------------------------------------------
// Instruction streams: an oracle for sequence equality that never normalizes.
// ---------------------------------------------------------------------------

/// Length of the instruction stream a term denotes; `None` when infinite.
pub fn stream_len(t: &SequenceTerm) -> Option<u64> {
    match t {
        SequenceTerm::Instr(_) => Some(1),
        SequenceTerm::Concat(a, b) => Some(stream_len(a)? + stream_len(b)?),
        SequenceTerm::Power(_, 0) => Some(1),
        SequenceTerm::Power(t, n) => stream_len(t).map(|l| l * u64::from(*n)),
        SequenceTerm::Repeat(_) => None,
    }
}

/// The instruction at 0-based position `i` of the stream, read off the term.
pub fn instr_at(t: &SequenceTerm, i: u64) -> Option<PrimitiveInstruction> {
    match t {
        SequenceTerm::Instr(x) => (i == 0).then(|| x.clone()),
        SequenceTerm::Concat(a, b) => match stream_len(a) {
            Some(l) if i >= l => instr_at(b, i - l),
            _ => instr_at(a, i),
        },
        SequenceTerm::Power(_, 0) => (i == 0).then_some(PrimitiveInstruction::Jump(0)),
        SequenceTerm::Power(t, n) => match stream_len(t) {
            Some(l) if i >= l * u64::from(*n) => None,
            Some(l) => instr_at(t, i % l),
            None => instr_at(t, i),
        },
        SequenceTerm::Repeat(t) => match stream_len(t) {
            Some(l) => instr_at(t, i % l),
            None => instr_at(t, i),
        },
    }
}

/// Instructions written out when every power is unfolded; bounds both the
/// pre-period and the period of the stream.
pub fn unfolded_size(t: &SequenceTerm) -> u64 {
    match t {
        SequenceTerm::Instr(_) => 1,
        SequenceTerm::Concat(a, b) => unfolded_size(a) + unfolded_size(b),
        SequenceTerm::Power(_, 0) => 1,
        SequenceTerm::Power(t, n) => unfolded_size(t) * u64::from(*n),
        SequenceTerm::Repeat(t) => unfolded_size(t),
    }
}

/// Two eventually periodic streams are equal iff they agree on a prefix
/// covering both pre-periods and the least common multiple of the periods.
pub fn streams_equal(a: &SequenceTerm, b: &SequenceTerm) -> bool {
    if stream_len(a) != stream_len(b) {
        return false;
    }
    let (fa, fb) = (unfolded_size(a), unfolded_size(b));
    let horizon = match stream_len(a) {
        Some(l) => l,
        None => 2 * (fa + fb) + fa * fb,
    };
    (0..horizon).all(|i| instr_at(a, i) == instr_at(b, i))
}

// ---------------------------------------------------------------------------
// Random terms.
// ---------------------------------------------------------------------------

/// Primitive instructions over one boolean register `r`.
pub fn register_alphabet() -> Vec<PrimitiveInstruction> {
    let mut v = Vec::new();
    v.push(PrimitiveInstruction::basic("r", "get"));
    v.push(PrimitiveInstruction::pos_test("r", "get"));
    v.push(PrimitiveInstruction::neg_test("r", "get"));
    v.push(PrimitiveInstruction::basic("r", "set:t"));
    v.push(PrimitiveInstruction::basic("r", "set:f"));
    v.extend((0..=5).map(PrimitiveInstruction::Jump));
    v.push(PrimitiveInstruction::Halt);
    v
}

pub fn random_instrs(
    rng: &mut StdRng,
    alphabet: &[PrimitiveInstruction],
    n: usize,
) -> Vec<PrimitiveInstruction> {
    (0..n)
        .map(|_| alphabet.choose(rng).unwrap().clone())
        .collect()
}

/// A random term of the given depth over `alphabet`.
pub fn random_term(
    rng: &mut StdRng,
    alphabet: &[PrimitiveInstruction],
    depth: u32,
) -> SequenceTerm {
    if depth == 0 || rng.gen_bool(0.3) {
        return SequenceTerm::Instr(alphabet.choose(rng).unwrap().clone());
    }
    match rng.gen_range(0..6) {
        0..=2 => SequenceTerm::concat(
            random_term(rng, alphabet, depth - 1),
            random_term(rng, alphabet, depth - 1),
        ),
        3 => SequenceTerm::power(random_term(rng, alphabet, depth - 1), rng.gen_range(1..=3)),
        _ => SequenceTerm::repeat(random_term(rng, alphabet, depth - 1)),
    }
}

fn subterms(t: &SequenceTerm) -> usize {
    1 + match t {
        SequenceTerm::Instr(_) => 0,
        SequenceTerm::Concat(a, b) => subterms(a) + subterms(b),
        SequenceTerm::Power(t, _) | SequenceTerm::Repeat(t) => subterms(t),
    }
}

/// Apply `f` to the `i`th subterm in preorder.
fn rewrite_at(
    t: &SequenceTerm,
    i: usize,
    f: &mut dyn FnMut(&SequenceTerm) -> Option<SequenceTerm>,
) -> SequenceTerm {
    if i == 0 {
        return f(t).unwrap_or_else(|| t.clone());
    }
    let i = i - 1;
    match t {
        SequenceTerm::Instr(_) => t.clone(),
        SequenceTerm::Concat(a, b) => {
            let na = subterms(a);
            if i < na {
                SequenceTerm::concat(rewrite_at(a, i, f), (**b).clone())
            } else {
                SequenceTerm::concat((**a).clone(), rewrite_at(b, i - na, f))
            }
        }
        SequenceTerm::Power(x, n) => SequenceTerm::power(rewrite_at(x, i, f), *n),
        SequenceTerm::Repeat(x) => SequenceTerm::repeat(rewrite_at(x, i, f)),
    }
}

/// One equation of program algebra (or the definition of powers), applied
/// in either direction where it matches.
fn pga_step(
    rng: &mut StdRng,
    t: &SequenceTerm,
    alphabet: &[PrimitiveInstruction],
) -> Option<SequenceTerm> {
    use SequenceTerm::*;
    let filler = random_term(rng, alphabet, 1);
    let n = rng.gen_range(1..=3);
    let rule = rng.gen_range(0..9);
    match (rule, t) {
        // (X;Y);Z = X;(Y;Z)
        (0, Concat(ab, c)) => match &**ab {
            Concat(a, b) => Some(SequenceTerm::concat(
                (**a).clone(),
                SequenceTerm::concat((**b).clone(), (**c).clone()),
            )),
            _ => None,
        },
        (1, Concat(a, bc)) => match &**bc {
            Concat(b, c) => Some(SequenceTerm::concat(
                SequenceTerm::concat((**a).clone(), (**b).clone()),
                (**c).clone(),
            )),
            _ => None,
        },
        // (X^n)^w = X^w
        (2, Repeat(x)) => match &**x {
            Power(y, k) if *k >= 1 => Some(SequenceTerm::repeat((**y).clone())),
            _ => Some(SequenceTerm::repeat(SequenceTerm::power((**x).clone(), n))),
        },
        // X^w;Y = X^w
        (3, Concat(a, _)) if matches!(**a, Repeat(_)) => Some((**a).clone()),
        (4, Repeat(_)) => Some(SequenceTerm::concat(t.clone(), filler)),
        // (X;Y)^w = X;(Y;X)^w
        (5, Repeat(xy)) => match &**xy {
            Concat(x, y) => Some(SequenceTerm::concat(
                (**x).clone(),
                SequenceTerm::repeat(SequenceTerm::concat((**y).clone(), (**x).clone())),
            )),
            _ => None,
        },
        // X^w = X;X^w
        (6, Repeat(x)) => Some(SequenceTerm::concat((**x).clone(), t.clone())),
        // X^1 = X and X^(n+1) = X;X^n
        (7, Power(x, 1)) => Some((**x).clone()),
        (7, Power(x, k)) if *k >= 2 => Some(SequenceTerm::concat(
            (**x).clone(),
            SequenceTerm::power((**x).clone(), k - 1),
        )),
        (8, _) => Some(SequenceTerm::power(t.clone(), 1)),
        _ => None,
    }
}

/// A term equal to `t` by up to `steps` program-algebra rewrites.
pub fn related_term(
    rng: &mut StdRng,
    t: &SequenceTerm,
    alphabet: &[PrimitiveInstruction],
    steps: usize,
) -> SequenceTerm {
    let mut t = t.clone();
    for _ in 0..steps {
        let at = rng.gen_range(0..subterms(&t));
        t = rewrite_at(&t, at, &mut |s| pga_step(rng, s, alphabet));
    }
    t
}

// ---------------------------------------------------------------------------
// Random assertions and axiom instances.
// ---------------------------------------------------------------------------

pub fn f(text: &str) -> Formula {
    parse_formula(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Atoms about register `r`, an untouched register `q` and a boolean `x`.
pub const REGISTER_ATOMS: &[&str] = &[
    "true",
    "false",
    "r = reg(true)",
    "r = reg(false)",
    "q = reg(true)",
    "q = reg(false)",
    "r = reg(x)",
    "q = reg(x)",
    "r[get](r) = :t",
    "r = q",
];

/// Atoms about counter `c`, an untouched counter `d` and a natural `n`.
pub const COUNTER_ATOMS: &[&str] = &[
    "true",
    "false",
    "c = nnc(0)",
    "c = nnc(s(0))",
    "c = nnc(n)",
    "c = nnc(s(n))",
    "d = nnc(n)",
    "r[iszero](c) = :t",
    "c = d",
    "exists m:nat. c = nnc(s(m))",
];

pub fn random_formula(rng: &mut StdRng, atoms: &[&str], depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.4) {
        return f(atoms.choose(rng).unwrap());
    }
    let a = random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..3) {
        0 => Formula::not(a),
        1 => Formula::and(a, random_formula(rng, atoms, depth - 1)),
        _ => Formula::or(a, random_formula(rng, atoms, depth - 1)),
    }
}

/// The instance of an instruction axiom for `instr` whose post-condition is
/// `post` (or whose pre- and post-condition are `post` for jumps and
/// termination). `None` if the axiom does not concern that instruction.
pub fn axiom_instance(
    id: Axiom,
    instr: &PrimitiveInstruction,
    post: &Formula,
) -> Option<ProofNode> {
    let seq = SequenceTerm::Instr(instr.clone());
    let d_guard = |focus: &str, m: &str| {
        Formula::eq(Term::reply_of(m, Term::var(focus)), Term::Reply(Reply::D))
    };
    let with = |pre: Formula, exit: u64, post: Formula| {
        Some(ProofNode::axiom(
            id,
            AssertedSeq::new(1, pre, seq.clone(), exit, post),
        ))
    };
    let reply_pre = |focus: &str, m: &str, reply: Option<Reply>| {
        let guard = match reply {
            Some(r) => Formula::eq(Term::reply_of(m, Term::var(focus)), Term::Reply(r)),
            None => Formula::neq(Term::reply_of(m, Term::var(focus)), Term::Reply(Reply::D)),
        };
        Formula::and(
            guard,
            substitute(post, &Substitution::derive_focus(focus, m)),
        )
    };
    use PrimitiveInstruction as I;
    match (id, instr) {
        (Axiom::A1, I::Basic(a)) => with(reply_pre(&a.focus, &a.method, None), 1, post.clone()),
        (Axiom::A2, I::Basic(a)) | (Axiom::A5, I::PosTest(a)) | (Axiom::A8, I::NegTest(a)) => {
            with(d_guard(&a.focus, &a.method), 0, Formula::False)
        }
        (Axiom::A3, I::PosTest(a)) => with(
            reply_pre(&a.focus, &a.method, Some(Reply::T)),
            1,
            post.clone(),
        ),
        (Axiom::A4, I::PosTest(a)) => with(
            reply_pre(&a.focus, &a.method, Some(Reply::F)),
            2,
            post.clone(),
        ),
        (Axiom::A6, I::NegTest(a)) => with(
            reply_pre(&a.focus, &a.method, Some(Reply::T)),
            2,
            post.clone(),
        ),
        (Axiom::A7, I::NegTest(a)) => with(
            reply_pre(&a.focus, &a.method, Some(Reply::F)),
            1,
            post.clone(),
        ),
        (Axiom::A9, I::Jump(l)) if *l >= 1 => with(post.clone(), *l, post.clone()),
        (Axiom::A10, I::Jump(0)) => with(Formula::True, 0, Formula::False),
        (Axiom::A11, I::Halt) => with(post.clone(), 0, post.clone()),
        _ => None,
    }
}

pub const AXIOMS: [Axiom; 11] = [
    Axiom::A1,
    Axiom::A2,
    Axiom::A3,
    Axiom::A4,
    Axiom::A5,
    Axiom::A6,
    Axiom::A7,
    Axiom::A8,
    Axiom::A9,
    Axiom::A10,
    Axiom::A11,
];

/// An instruction the axiom concerns, with a method drawn from `methods`.
pub fn axiom_instr(
    rng: &mut StdRng,
    id: Axiom,
    focus: &str,
    methods: &[&str],
) -> PrimitiveInstruction {
    let m = *methods.choose(rng).unwrap();
    match id {
        Axiom::A1 | Axiom::A2 => PrimitiveInstruction::basic(focus, m),
        Axiom::A3 | Axiom::A4 | Axiom::A5 => PrimitiveInstruction::pos_test(focus, m),
        Axiom::A6 | Axiom::A7 | Axiom::A8 => PrimitiveInstruction::neg_test(focus, m),
        Axiom::A9 => PrimitiveInstruction::Jump(rng.gen_range(1..=5)),
        Axiom::A10 => PrimitiveInstruction::Jump(0),
        Axiom::A11 => PrimitiveInstruction::Halt,
    }
}

// ---------------------------------------------------------------------------
// Random proofs over the register algebra by forward rule application.
// ---------------------------------------------------------------------------

fn concl(p: &ProofNode) -> &AssertedSeq {
    p.conclusion().expect("generated nodes are steps")
}

/// The rule or axiom at the root of a proof, for coverage statistics.
pub fn root_label(p: &ProofNode) -> String {
    match p {
        ProofNode::Hyp(_) => "HYP".into(),
        ProofNode::Step { justification, .. } => match justification {
            Justification::Axiom(a) => a.to_string(),
            Justification::Rule(r, _) => r.to_string(),
            Justification::Substitution { .. } => "R9".into(),
            Justification::Consequence { .. } => "R10".into(),
            Justification::Repetition { hyps, .. } => format!("R5/{}", hyps.len()),
            Justification::RepIntro(_) => "RepIntro".into(),
        },
    }
}

/// Every label occurring in the tree.
pub fn labels(p: &ProofNode, out: &mut Vec<String>) {
    out.push(root_label(p));
    for c in p.children() {
        labels(c, out);
    }
}

pub struct ProofGen {
    pub rng: StdRng,
    alphabet: Vec<PrimitiveInstruction>,
}

impl ProofGen {
    pub fn new(rng: StdRng) -> Self {
        ProofGen {
            rng,
            alphabet: register_alphabet(),
        }
    }

    fn formula(&mut self) -> Formula {
        random_formula(&mut self.rng, REGISTER_ATOMS, 2)
    }

    fn finite(&mut self, max: usize) -> SequenceTerm {
        let n = self.rng.gen_range(1..=max);
        SequenceTerm::from_instrs(&random_instrs(&mut self.rng, &self.alphabet, n)).unwrap()
    }

    /// An axiom instance with post-condition `post` when one is given.
    fn leaf(&mut self, post: Option<Formula>) -> ProofNode {
        let post = post.unwrap_or_else(|| self.formula());
        loop {
            let id = *AXIOMS.choose(&mut self.rng).unwrap();
            let instr = axiom_instr(&mut self.rng, id, "r", &["get", "set:t", "set:f"]);
            if let Some(p) = axiom_instance(id, &instr, &post) {
                return p;
            }
        }
    }

    /// Consequence step moving `p` to the given assertions.
    pub fn consequence(p: ProofNode, pre: Formula, post: Formula) -> ProofNode {
        let c = concl(&p).clone();
        let conclusion = AssertedSeq {
            pre: pre.clone(),
            post: post.clone(),
            ..c.clone()
        };
        ProofNode::step(
            conclusion,
            Justification::Consequence {
                pre: Formula::implies(pre, c.pre),
                premise: Box::new(p),
                post: Formula::implies(c.post, post),
            },
        )
    }

    fn with_pre(p: ProofNode, pre: &Formula) -> ProofNode {
        if &concl(&p).pre == pre {
            return p;
        }
        let post = concl(&p).post.clone();
        Self::consequence(p, pre.clone(), post)
    }

    /// A proof of depth at most `depth`; `hyps` are the hypotheses of an
    /// enclosing repetition node, if any.
    pub fn proof(
        &mut self,
        depth: u32,
        post: Option<Formula>,
        hyps: Option<&[AssertedSeq]>,
    ) -> ProofNode {
        if depth == 0 {
            if let Some(hs) = hyps.filter(|hs| !hs.is_empty()) {
                if self.rng.gen_bool(0.2) {
                    return ProofNode::Hyp(self.rng.gen_range(1..=hs.len()));
                }
            }
            return self.leaf(post);
        }
        let d = depth - 1;
        let choice = self.rng.gen_range(0..if hyps.is_some() { 10 } else { 13 });
        match choice {
            0 | 1 => self.r1(d, post, hyps),
            2 => self.r2(d, post, hyps),
            3 => self.r3(d, post, hyps),
            4 => self.r4(d, post, hyps),
            5 => self.r6(d, post, hyps),
            6 => self.r7(d, hyps),
            7 => self.r8(d, post, hyps),
            8 => self.r9(d, post, hyps),
            9 => self.r10(d, post, hyps),
            10 | 11 => self.r5(d),
            _ => self.rep_intro(d),
        }
    }

    fn premise(
        &mut self,
        d: u32,
        post: Option<Formula>,
        hyps: Option<&[AssertedSeq]>,
    ) -> Option<ProofNode> {
        let p = self.proof(d, post, hyps);
        p.conclusion().is_some().then_some(p)
    }

    fn r1(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p2) = self.premise(d, post.clone(), hyps) else {
            return self.leaf(post);
        };
        let c2 = concl(&p2).clone();
        for _ in 0..8 {
            let Some(p1) = self.premise(d, Some(c2.pre.clone()), hyps) else {
                continue;
            };
            let c1 = concl(&p1).clone();
            // the second part is entered where the first one exits
            if c1.exit != c2.entry {
                continue;
            }
            let p2 = Self::with_pre(p2.clone(), &c1.post);
            let c2 = concl(&p2).clone();
            let conclusion = AssertedSeq::new(
                c1.entry,
                c1.pre.clone(),
                SequenceTerm::concat(c1.seq, c2.seq),
                c2.exit,
                c2.post,
            );
            return ProofNode::rule(Rule::R1, vec![p1, p2], conclusion);
        }
        p2
    }

    fn r2(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        if c.exit < 2 {
            return p;
        }
        let n = self.rng.gen_range(1..c.exit);
        let tail =
            SequenceTerm::from_instrs(&random_instrs(&mut self.rng, &self.alphabet, n as usize))
                .unwrap();
        let conclusion = AssertedSeq::new(
            c.entry,
            c.pre,
            SequenceTerm::concat(c.seq, tail),
            c.exit - n,
            c.post,
        );
        ProofNode::rule(Rule::R2, vec![p], conclusion)
    }

    fn r3(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        if c.exit != 0 {
            return p;
        }
        let tail = random_term(&mut self.rng, &self.alphabet.clone(), 2);
        let conclusion =
            AssertedSeq::new(c.entry, c.pre, SequenceTerm::concat(c.seq, tail), 0, c.post);
        ProofNode::rule(Rule::R3, vec![p], conclusion)
    }

    fn r4(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        let lead = self.finite(3);
        let n = stream_len(&lead).unwrap();
        let conclusion = AssertedSeq::new(
            c.entry + n,
            c.pre,
            SequenceTerm::concat(lead, c.seq),
            c.exit,
            c.post,
        );
        ProofNode::rule(Rule::R4, vec![p], conclusion)
    }

    fn r6(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p1) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c1 = concl(&p1).clone();
        let extra = self.formula();
        let p2 = Self::consequence(
            p1.clone(),
            Formula::and(c1.pre.clone(), extra),
            c1.post.clone(),
        );
        let (p1, p2) = if self.rng.gen_bool(0.5) {
            (p1, p2)
        } else {
            (p2, p1)
        };
        let pre = Formula::or(concl(&p1).pre.clone(), concl(&p2).pre.clone());
        let conclusion = AssertedSeq { pre, ..c1 };
        ProofNode::rule(Rule::R6, vec![p1, p2], conclusion)
    }

    fn r7(&mut self, d: u32, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, None, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        let inv = random_formula(
            &mut self.rng,
            &["q = reg(true)", "q = reg(false)", "q = reg(x)", "true"],
            1,
        );
        let conclusion = AssertedSeq {
            pre: Formula::and(c.pre.clone(), inv.clone()),
            post: Formula::and(c.post.clone(), inv),
            ..c
        };
        ProofNode::rule(Rule::R7, vec![p], conclusion)
    }

    fn r8(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(mut p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let mut c = concl(&p).clone();
        if c.post.free_names().contains("x") {
            return p;
        }
        if !c.pre.free_names().contains("x") {
            let atom = f(["q = reg(x)", "r = reg(x)"].choose(&mut self.rng).unwrap());
            p = Self::consequence(p, Formula::and(c.pre.clone(), atom), c.post.clone());
            c = concl(&p).clone();
        }
        let conclusion = AssertedSeq {
            pre: Formula::exists("x", Sort::Bool, c.pre.clone()),
            ..c
        };
        ProofNode::rule(Rule::R8, vec![p], conclusion)
    }

    fn r9(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        let sub = Substitution::rename("x", "y");
        let conclusion = AssertedSeq {
            pre: substitute(&c.pre, &sub),
            post: substitute(&c.post, &sub),
            ..c
        };
        ProofNode::step(
            conclusion,
            Justification::Substitution {
                from: "x".into(),
                to: "y".into(),
                premise: Box::new(p),
            },
        )
    }

    fn r10(&mut self, d: u32, post: Option<Formula>, hyps: Option<&[AssertedSeq]>) -> ProofNode {
        let Some(p) = self.premise(d, post, hyps) else {
            return self.leaf(None);
        };
        let c = concl(&p).clone();
        let extra = self.formula();
        let (pre, post) = match self.rng.gen_range(0..4) {
            0 => (Formula::and(c.pre.clone(), extra), c.post.clone()),
            1 => (c.pre.clone(), Formula::or(c.post.clone(), extra)),
            // arbitrary obligations, mostly rejected by the checker
            2 => (extra, c.post.clone()),
            _ => (c.pre.clone(), extra),
        };
        Self::consequence(p, pre, post)
    }

    /// A finite, repetition-free proof whose conclusion has the given exit.
    fn body_proof(&mut self, d: u32, post: Option<Formula>, exit: u64) -> Option<ProofNode> {
        for _ in 0..40 {
            let p = self.proof(d, post.clone(), Some(&[]));
            let Some(c) = p.conclusion() else { continue };
            if c.exit == exit && c.entry == 1 && stream_len(&c.seq).is_some() && !uses_hyp(&p) {
                return Some(p);
            }
        }
        None
    }

    /// Repetition with one or two hypotheses about the same `B^w`:
    /// an invariant pattern (`B` falls through and re-enters the loop) and
    /// a termination pattern (`B` halts).
    fn r5(&mut self, d: u32) -> ProofNode {
        let q = self.formula();
        let looping = self.rng.gen_bool(0.5);
        let inv = self.formula();
        let body = if looping {
            self.body_proof(d, Some(inv.clone()), 1)
        } else {
            self.body_proof(d, Some(q.clone()), 0)
        };
        let Some(body) = body else {
            return self.leaf(None);
        };
        let cb = concl(&body).clone();
        let rep = SequenceTerm::repeat(cb.seq.clone());
        let unrolled = SequenceTerm::concat(cb.seq.clone(), rep.clone());
        let (h1, sub1) = if looping {
            let h = AssertedSeq::new(1, inv.clone(), rep.clone(), 0, q.clone());
            let step = Self::consequence(body, inv.clone(), inv.clone());
            let sub = ProofNode::rule(
                Rule::R1,
                vec![step, ProofNode::Hyp(1)],
                AssertedSeq::new(1, inv.clone(), unrolled.clone(), 0, q.clone()),
            );
            (h, sub)
        } else {
            let h = AssertedSeq::new(1, cb.pre.clone(), rep.clone(), 0, cb.post.clone());
            let sub = ProofNode::rule(
                Rule::R3,
                vec![body],
                AssertedSeq {
                    seq: unrolled.clone(),
                    ..cb.clone()
                },
            );
            (h, sub)
        };
        let mut hyps = vec![h1.clone()];
        let mut subproofs = vec![sub1.clone()];
        if self.rng.gen_bool(0.4) {
            // a second hypothesis with a stronger pre-condition
            let extra = self.formula();
            let pre2 = Formula::and(h1.pre.clone(), extra);
            hyps.push(AssertedSeq {
                pre: pre2.clone(),
                ..h1.clone()
            });
            subproofs.push(Self::consequence(sub1, pre2, h1.post.clone()));
        }
        let k = self.rng.gen_range(1..=hyps.len());
        let conclusion = hyps[k - 1].clone();
        ProofNode::step(conclusion, Justification::Repetition { hyps, k, subproofs })
    }

    fn rep_intro(&mut self, d: u32) -> ProofNode {
        let Some(body) = self.body_proof(d, None, 0) else {
            return self.leaf(None);
        };
        let c = concl(&body).clone();
        let conclusion = AssertedSeq {
            seq: SequenceTerm::repeat(c.seq.clone()),
            ..c
        };
        ProofNode::step(conclusion, Justification::RepIntro(Box::new(body)))
    }
}

fn uses_hyp(p: &ProofNode) -> bool {
    matches!(p, ProofNode::Hyp(_)) || p.children().iter().any(|c| uses_hyp(c))
}
