use std::fmt;

use serde::Serialize;

use super::{PrimitiveInstruction, SequenceTerm};

/// Length of an instruction sequence: finite or ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Len {
    Finite(u64),
    Omega,
}

impl Len {
    pub fn is_finite(self) -> bool {
        matches!(self, Len::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Len::Finite(n) => Some(n),
            Len::Omega => None,
        }
    }
}

impl fmt::Display for Len {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Len::Finite(n) => write!(f, "{n}"),
            Len::Omega => write!(f, "omega"),
        }
    }
}

/// Unique representative of a finite or eventually periodic instruction
/// sequence: `prefix` followed by `period` repeated forever.
///
/// The period, when present, is primitive and the prefix is as short as it
/// can be for that period, so structural equality is sequence equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalSequence {
    prefix: Vec<PrimitiveInstruction>,
    period: Option<Vec<PrimitiveInstruction>>,
}

impl CanonicalSequence {
    pub fn finite(instrs: Vec<PrimitiveInstruction>) -> Self {
        assert!(!instrs.is_empty(), "instruction sequences are non-empty");
        CanonicalSequence {
            prefix: instrs,
            period: None,
        }
    }

    /// Build and minimize `prefix ++ period^ω`.
    pub fn periodic(prefix: Vec<PrimitiveInstruction>, period: Vec<PrimitiveInstruction>) -> Self {
        assert!(!period.is_empty(), "period must be non-empty");
        let mut period = primitive_root(period);
        let mut prefix = prefix;
        while let (Some(p), Some(q)) = (prefix.last(), period.last()) {
            if p != q {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        CanonicalSequence {
            prefix,
            period: Some(period),
        }
    }

    pub fn prefix(&self) -> &[PrimitiveInstruction] {
        &self.prefix
    }

    pub fn period(&self) -> Option<&[PrimitiveInstruction]> {
        self.period.as_deref()
    }

    pub fn len(&self) -> Len {
        match self.period {
            None => Len::Finite(self.prefix.len() as u64),
            Some(_) => Len::Omega,
        }
    }

    /// Never true; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_none()
    }

    /// Number of distinct positions: `|prefix| + |period|`.
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.period.as_ref().map_or(0, Vec::len)
    }

    /// Representative position (1-based) of position `pos`: positions past
    /// the prefix of an infinite sequence fold onto the first unrolling of
    /// the period. `None` past the end of a finite sequence.
    pub fn representative(&self, pos: u64) -> Option<u64> {
        assert!(pos >= 1, "positions are 1-based");
        let np = self.prefix.len() as u64;
        match &self.period {
            None => (pos <= np).then_some(pos),
            Some(period) => {
                if pos <= np {
                    Some(pos)
                } else {
                    Some(np + (pos - np - 1) % period.len() as u64 + 1)
                }
            }
        }
    }

    /// The instruction at 1-based position `pos`.
    pub fn get(&self, pos: u64) -> Option<&PrimitiveInstruction> {
        let rep = self.representative(pos)? as usize;
        if rep <= self.prefix.len() {
            Some(&self.prefix[rep - 1])
        } else {
            let period = self.period.as_ref().unwrap();
            Some(&period[rep - self.prefix.len() - 1])
        }
    }

    /// The first `n` instructions (fewer if the sequence is shorter).
    pub fn take(&self, n: u64) -> Vec<PrimitiveInstruction> {
        (1..=n).map_while(|p| self.get(p).cloned()).collect()
    }

    /// The sequence with its first `n` instructions removed, `None` when
    /// nothing remains.
    pub fn drop_prefix(&self, n: u64) -> Option<CanonicalSequence> {
        match &self.period {
            None => {
                let n = usize::try_from(n).ok()?;
                (n < self.prefix.len())
                    .then(|| CanonicalSequence::finite(self.prefix[n..].to_vec()))
            }
            Some(period) => {
                let np = self.prefix.len() as u64;
                if n <= np {
                    Some(CanonicalSequence::periodic(
                        self.prefix[n as usize..].to_vec(),
                        period.clone(),
                    ))
                } else {
                    let shift = ((n - np) % period.len() as u64) as usize;
                    let mut rotated = period.clone();
                    rotated.rotate_left(shift);
                    Some(CanonicalSequence::periodic(Vec::new(), rotated))
                }
            }
        }
    }

    /// Concatenation of two canonical sequences.
    pub fn concat(&self, other: &CanonicalSequence) -> CanonicalSequence {
        if self.period.is_some() {
            return self.clone();
        }
        let mut prefix = self.prefix.clone();
        prefix.extend(other.prefix.iter().cloned());
        match &other.period {
            None => CanonicalSequence::finite(prefix),
            Some(period) => CanonicalSequence::periodic(prefix, period.clone()),
        }
    }

    /// A sequence term denoting this sequence.
    pub fn to_term(&self) -> SequenceTerm {
        let period = self
            .period
            .as_ref()
            .map(|p| SequenceTerm::repeat(SequenceTerm::from_instrs(p).unwrap()));
        let items = self
            .prefix
            .iter()
            .cloned()
            .map(SequenceTerm::Instr)
            .chain(period);
        SequenceTerm::concat_all(items).unwrap()
    }
}

impl fmt::Display for CanonicalSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Shortest `u` such that `v = u^k`.
fn primitive_root(v: Vec<PrimitiveInstruction>) -> Vec<PrimitiveInstruction> {
    let n = v.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| v[i] == v[i - d]) {
            return v[..d].to_vec();
        }
    }
    v
}

/// Reduce a term to its canonical sequence, unfolding powers, truncating
/// after an infinite left operand of concatenation and collapsing
/// repetition of an infinite sequence to the sequence itself.
pub fn normalize(t: &SequenceTerm) -> CanonicalSequence {
    match t {
        SequenceTerm::Instr(i) => CanonicalSequence::finite(vec![i.clone()]),
        SequenceTerm::Concat(a, b) => {
            let a = normalize(a);
            if !a.is_finite() {
                return a;
            }
            a.concat(&normalize(b))
        }
        SequenceTerm::Power(_, 0) => CanonicalSequence::finite(vec![PrimitiveInstruction::Jump(0)]),
        SequenceTerm::Power(t, n) => {
            let base = normalize(t);
            if !base.is_finite() {
                return base;
            }
            let mut instrs = Vec::with_capacity(base.prefix.len() * *n as usize);
            for _ in 0..*n {
                instrs.extend(base.prefix.iter().cloned());
            }
            CanonicalSequence::finite(instrs)
        }
        SequenceTerm::Repeat(t) => {
            let base = normalize(t);
            if !base.is_finite() {
                return base;
            }
            CanonicalSequence::periodic(Vec::new(), base.prefix)
        }
    }
}

/// Do the two terms denote the same instruction sequence?
pub fn seq_equal(a: &SequenceTerm, b: &SequenceTerm) -> bool {
    normalize(a) == normalize(b)
}
