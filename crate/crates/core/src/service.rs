//! Services, service families and the two built-in service algebras
//! (natural number counters and boolean registers).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sequence::parse::{is_ident_char, is_ident_start};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Reply {
    T,
    F,
    D,
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Reply::T => ":t",
            Reply::F => ":f",
            Reply::D => ":d",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Service {
    /// Unable to process any method.
    Empty,
    Counter(u64),
    BoolReg(bool),
}

impl Service {
    /// Process `method`: the reply and the service it proceeds as.
    ///
    /// Counters: `incr` replies T; `decr` replies T and decrements a
    /// positive content, F at zero (content stays 0); `iszero` replies
    /// whether the content is zero. Registers: `set:t`/`set:f` reply T and
    /// overwrite, `get` replies the content. Anything else replies D.
    pub fn step(&self, method: &str) -> (Reply, Service) {
        use Service::*;
        let processed = match (self, method) {
            (Counter(n), "incr") => Some((Reply::T, Counter(n.saturating_add(1)))),
            (Counter(0), "decr") => Some((Reply::F, Counter(0))),
            (Counter(n), "decr") => Some((Reply::T, Counter(n - 1))),
            (Counter(n), "iszero") => Some((truth(*n == 0), Counter(*n))),
            (BoolReg(_), "set:t") => Some((Reply::T, BoolReg(true))),
            (BoolReg(_), "set:f") => Some((Reply::T, BoolReg(false))),
            (BoolReg(b), "get") => Some((truth(*b), BoolReg(*b))),
            _ => None,
        };
        processed.unwrap_or((Reply::D, Empty))
    }

    pub fn reply(&self, method: &str) -> Reply {
        self.step(method).0
    }

    pub fn derive(&self, method: &str) -> Service {
        self.step(method).1
    }
}

fn truth(b: bool) -> Reply {
    if b {
        Reply::T
    } else {
        Reply::F
    }
}

/// Process `m` on `s`, returning `(reply, derived service)`.
pub fn svc_step(s: &Service, m: &str) -> (Reply, Service) {
    s.step(m)
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Service::Empty => f.write_str("empty"),
            Service::Counter(n) => write!(f, "counter({n})"),
            Service::BoolReg(b) => write!(f, "bool({b})"),
        }
    }
}

/// A finite map from foci to services; also the machine state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ServiceFamily(BTreeMap<String, Service>);

impl ServiceFamily {
    /// The empty service family.
    pub fn empty() -> Self {
        ServiceFamily(BTreeMap::new())
    }

    pub fn singleton(focus: impl Into<String>, s: Service) -> Self {
        let mut m = BTreeMap::new();
        m.insert(focus.into(), s);
        ServiceFamily(m)
    }

    pub fn get(&self, focus: &str) -> Option<&Service> {
        self.0.get(focus)
    }

    pub fn contains(&self, focus: &str) -> bool {
        self.0.contains_key(focus)
    }

    /// Replace the service under an existing or new focus.
    pub fn set(&mut self, focus: impl Into<String>, s: Service) {
        self.0.insert(focus.into(), s);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn foci(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Service)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Largest counter content in the family, 0 if none.
    pub fn max_counter(&self) -> u64 {
        self.0
            .values()
            .filter_map(|s| match s {
                Service::Counter(n) => Some(*n),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

impl FromIterator<(String, Service)> for ServiceFamily {
    fn from_iter<I: IntoIterator<Item = (String, Service)>>(iter: I) -> Self {
        ServiceFamily(iter.into_iter().collect())
    }
}

impl fmt::Display for ServiceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str("}")
    }
}

/// Composition `u ⊕ v`: foci present on both sides collapse to the empty service.
pub fn fam_compose(u: &ServiceFamily, v: &ServiceFamily) -> ServiceFamily {
    let mut out = u.0.clone();
    for (focus, s) in &v.0 {
        out.entry(focus.clone())
            .and_modify(|e| *e = Service::Empty)
            .or_insert_with(|| s.clone());
    }
    ServiceFamily(out)
}

/// Encapsulation `∂_F(u)`: drop the services named in `foci`.
pub fn fam_encapsulate(foci: &BTreeSet<String>, u: &ServiceFamily) -> ServiceFamily {
    ServiceFamily(
        u.0.iter()
            .filter(|(k, _)| !foci.contains(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Counter,
    BoolReg,
}

impl Algebra {
    /// Services a focus ranges over when states are enumerated. Counter
    /// contents are cut off at `bound`.
    pub fn domain(self, bound: u64) -> Vec<Service> {
        match self {
            Algebra::Counter => (0..=bound).map(Service::Counter).collect(),
            Algebra::BoolReg => vec![Service::BoolReg(false), Service::BoolReg(true)],
        }
    }

    /// Whether `domain` lists every proper service of the algebra.
    pub fn is_finite(self) -> bool {
        matches!(self, Algebra::BoolReg)
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algebra::Counter => f.write_str("counter"),
            Algebra::BoolReg => f.write_str("boolreg"),
        }
    }
}

impl std::str::FromStr for Algebra {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counter" => Ok(Algebra::Counter),
            "boolreg" | "bool" => Ok(Algebra::BoolReg),
            _ => Err(format!(
                "unknown algebra `{s}` (expected counter or boolreg)"
            )),
        }
    }
}

pub const DEFAULT_BOUND: u64 = 100;
pub const DEFAULT_QBOUND: u64 = 32;

/// Which algebra states are drawn from and the enumeration cut-offs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlgebraConfig {
    pub algebra: Algebra,
    /// Largest counter content enumerated.
    pub bound: u64,
    /// Range of free naturals and of quantifiers nested too deeply to decide exactly.
    pub qbound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("enumeration bound must be at least 1")]
    ZeroBound,
    #[error("quantifier bound must be at least 1")]
    ZeroQBound,
}

impl AlgebraConfig {
    pub fn new(algebra: Algebra, bound: u64, qbound: u64) -> Result<Self, ConfigError> {
        if bound == 0 {
            return Err(ConfigError::ZeroBound);
        }
        if qbound == 0 {
            return Err(ConfigError::ZeroQBound);
        }
        Ok(AlgebraConfig {
            algebra,
            bound,
            qbound,
        })
    }

    pub fn counter() -> Self {
        AlgebraConfig {
            algebra: Algebra::Counter,
            bound: DEFAULT_BOUND,
            qbound: DEFAULT_QBOUND,
        }
    }

    pub fn boolreg() -> Self {
        AlgebraConfig {
            algebra: Algebra::BoolReg,
            bound: DEFAULT_BOUND,
            qbound: DEFAULT_QBOUND,
        }
    }

    pub fn with_bound(mut self, bound: u64) -> Self {
        self.bound = bound.max(1);
        self
    }

    pub fn with_qbound(mut self, qbound: u64) -> Self {
        self.qbound = qbound.max(1);
        self
    }

    pub fn domain(&self) -> Vec<Service> {
        self.algebra.domain(self.bound)
    }

    /// All states assigning a domain service to each of `foci`, in
    /// lexicographic order. A single empty state when `foci` is empty.
    pub fn states(&self, foci: &BTreeSet<String>) -> Vec<ServiceFamily> {
        let domain = self.domain();
        let mut states = vec![ServiceFamily::empty()];
        for focus in foci {
            let mut next = Vec::with_capacity(states.len() * domain.len());
            for st in &states {
                for s in &domain {
                    let mut st = st.clone();
                    st.set(focus.clone(), s.clone());
                    next.push(st);
                }
            }
            states = next;
        }
        states
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad family literal at position {pos}: {msg}")]
pub struct FamilyParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parse a family literal such as `{c = counter(3), r = bool(true), d = empty}`.
/// Repeated foci are composed, so they collapse to `empty`.
pub fn parse_family(text: &str) -> Result<ServiceFamily, FamilyParseError> {
    let src = text.as_bytes();
    let mut pos = 0;
    let err = |pos: usize, msg: &str| FamilyParseError {
        pos,
        msg: msg.to_string(),
    };
    let skip = |pos: &mut usize| {
        while *pos < src.len() && src[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let ident = |pos: &mut usize| -> Option<String> {
        skip(pos);
        let start = *pos;
        if *pos < src.len() && is_ident_start(src[*pos]) {
            while *pos < src.len() && is_ident_char(src[*pos]) {
                *pos += 1;
            }
            Some(text[start..*pos].to_string())
        } else {
            None
        }
    };
    let expect = |pos: &mut usize, c: u8| -> Result<(), FamilyParseError> {
        skip(pos);
        if *pos < src.len() && src[*pos] == c {
            *pos += 1;
            Ok(())
        } else {
            Err(err(*pos, &format!("expected '{}'", c as char)))
        }
    };

    expect(&mut pos, b'{')?;
    let mut fam = ServiceFamily::empty();
    skip(&mut pos);
    if pos < src.len() && src[pos] == b'}' {
        pos += 1;
    } else {
        loop {
            let focus = ident(&mut pos).ok_or_else(|| err(pos, "expected a focus name"))?;
            expect(&mut pos, b'=')?;
            let kind_pos = pos;
            let kind = ident(&mut pos).ok_or_else(|| err(pos, "expected a service"))?;
            let service = match kind.as_str() {
                "empty" => Service::Empty,
                "counter" | "nnc" => {
                    expect(&mut pos, b'(')?;
                    skip(&mut pos);
                    let start = pos;
                    while pos < src.len() && src[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let n = text[start..pos]
                        .parse()
                        .map_err(|_| err(start, "expected a counter content"))?;
                    expect(&mut pos, b')')?;
                    Service::Counter(n)
                }
                "bool" | "reg" => {
                    expect(&mut pos, b'(')?;
                    let v = match ident(&mut pos).as_deref() {
                        Some("true") => true,
                        Some("false") => false,
                        _ => return Err(err(pos, "expected true or false")),
                    };
                    expect(&mut pos, b')')?;
                    Service::BoolReg(v)
                }
                _ => return Err(err(kind_pos, "unknown service kind")),
            };
            fam = fam_compose(&fam, &ServiceFamily::singleton(focus, service));
            skip(&mut pos);
            match src.get(pos) {
                Some(b',') => pos += 1,
                Some(b'}') => {
                    pos += 1;
                    break;
                }
                _ => return Err(err(pos, "expected ',' or '}'")),
            }
        }
    }
    skip(&mut pos);
    if pos != src.len() {
        return Err(err(pos, "unexpected trailing input"));
    }
    Ok(fam)
}
