//! Regular threads: extraction from instruction sequences, the embedded
//! segment `⟨S⟩_{b,e}`, and application of threads to service families.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sequence::{
    normalize, BasicAction, CanonicalSequence, PrimitiveInstruction, SequenceTerm,
};
use crate::service::{Reply, ServiceFamily, DEFAULT_BOUND};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Node {
    Stop,
    Dead,
    /// Perform the action, continue at `then` on T and at `otherwise` on F.
    Branch {
        action: BasicAction,
        then: NodeId,
        otherwise: NodeId,
    },
}

/// A finite-state thread. Node 0 is the root and every node is reachable
/// from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegularThread {
    nodes: Vec<Node>,
}

impl RegularThread {
    pub fn stop() -> Self {
        RegularThread {
            nodes: vec![Node::Stop],
        }
    }

    pub fn dead() -> Self {
        RegularThread {
            nodes: vec![Node::Dead],
        }
    }

    /// Build from an arbitrary node table, keeping only nodes reachable from
    /// `root` and renumbering them breadth-first.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Self {
        let mut order = Vec::new();
        let mut index = HashMap::new();
        let mut queue = VecDeque::from([root]);
        index.insert(root, 0);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            if let Node::Branch {
                then, otherwise, ..
            } = &nodes[id]
            {
                for next in [*then, *otherwise] {
                    if !index.contains_key(&next) {
                        index.insert(next, index.len());
                        queue.push_back(next);
                    }
                }
            }
        }
        let nodes = order
            .iter()
            .map(|&id| match &nodes[id] {
                Node::Branch {
                    action,
                    then,
                    otherwise,
                } => Node::Branch {
                    action: action.clone(),
                    then: index[then],
                    otherwise: index[otherwise],
                },
                n => n.clone(),
            })
            .collect();
        RegularThread { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Smallest bisimilar thread, in canonical breadth-first numbering.
    pub fn minimize(&self) -> RegularThread {
        // partition refinement on (kind, action, block of successors)
        let mut block: Vec<usize> = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Stop => 0,
                Node::Dead => 1,
                Node::Branch { .. } => 2,
            })
            .collect();
        loop {
            let mut sigs: HashMap<(usize, Option<&BasicAction>, usize, usize), usize> =
                HashMap::new();
            let next: Vec<usize> = self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let sig = match n {
                        Node::Branch {
                            action,
                            then,
                            otherwise,
                        } => (block[i], Some(action), block[*then], block[*otherwise]),
                        _ => (block[i], None, 0, 0),
                    };
                    let fresh = sigs.len();
                    *sigs.entry(sig).or_insert(fresh)
                })
                .collect();
            let stable = sigs.len() == block.iter().collect::<HashSet<_>>().len();
            block = next;
            if stable {
                break;
            }
        }
        let nblocks = block.iter().max().map_or(0, |m| m + 1);
        let mut quotient: Vec<Option<Node>> = vec![None; nblocks];
        for (i, n) in self.nodes.iter().enumerate() {
            if quotient[block[i]].is_none() {
                quotient[block[i]] = Some(match n {
                    Node::Branch {
                        action,
                        then,
                        otherwise,
                    } => Node::Branch {
                        action: action.clone(),
                        then: block[*then],
                        otherwise: block[*otherwise],
                    },
                    n => n.clone(),
                });
            }
        }
        let nodes = quotient.into_iter().map(Option::unwrap).collect();
        RegularThread::from_nodes(nodes, block[0])
    }

    /// Do the two threads have the same behaviour?
    pub fn bisimilar(&self, other: &RegularThread) -> bool {
        self.minimize() == other.minimize()
    }
}

impl fmt::Display for RegularThread {
    /// One node per line: `n0: branch c.iszero -> n1 / n2`, `n1: stop`, `n2: dead`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Stop => writeln!(f, "n{i}: stop")?,
                Node::Dead => writeln!(f, "n{i}: dead")?,
                Node::Branch {
                    action,
                    then,
                    otherwise,
                } => writeln!(f, "n{i}: branch {action} -> n{then} / n{otherwise}")?,
            }
        }
        Ok(())
    }
}

/// Where execution continues from a position: an instruction performing an
/// action or halting, or nowhere (inaction).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    Dead,
    Pos(u64),
}

/// Follow jumps from `pos` until an instruction that is not a jump. Jumps
/// of length 0, jumps past the end of a finite sequence and jump chains
/// that revisit a position yield `Dead`.
fn resolve(seq: &CanonicalSequence, pos: u64) -> Target {
    let mut pos = match seq.representative(pos) {
        Some(p) => p,
        None => return Target::Dead,
    };
    // a chain of pure jumps visits each representative position at most once
    for _ in 0..=seq.positions() {
        match seq.get(pos) {
            None => return Target::Dead,
            Some(PrimitiveInstruction::Jump(0)) => return Target::Dead,
            Some(PrimitiveInstruction::Jump(l)) => match seq.representative(pos + l) {
                Some(p) => pos = p,
                None => return Target::Dead,
            },
            Some(_) => return Target::Pos(pos),
        }
    }
    Target::Dead
}

/// Thread extraction: the behaviour produced by executing the sequence from
/// its first instruction.
pub fn extract(seq: &CanonicalSequence) -> RegularThread {
    let n = seq.positions();
    // node table: 0 = Stop, 1 = Dead, 1 + p = position p (action positions only)
    let mut nodes = vec![Node::Stop, Node::Dead];
    nodes.extend((1..=n).map(|_| Node::Dead));
    let id = |t: Target| -> NodeId {
        match t {
            Target::Dead => 1,
            Target::Pos(p) => match seq.get(p) {
                Some(PrimitiveInstruction::Halt) => 0,
                _ => 1 + p as usize,
            },
        }
    };
    for p in 1..=n as u64 {
        let instr = seq.get(p).unwrap();
        let next = |d: u64| id(resolve(seq, p + d));
        let node = match instr {
            PrimitiveInstruction::Basic(a) => Node::Branch {
                action: a.clone(),
                then: next(1),
                otherwise: next(1),
            },
            PrimitiveInstruction::PosTest(a) => Node::Branch {
                action: a.clone(),
                then: next(1),
                otherwise: next(2),
            },
            PrimitiveInstruction::NegTest(a) => Node::Branch {
                action: a.clone(),
                then: next(2),
                otherwise: next(1),
            },
            PrimitiveInstruction::Jump(_) | PrimitiveInstruction::Halt => continue,
        };
        nodes[1 + p as usize] = node;
    }
    RegularThread::from_nodes(nodes, id(resolve(seq, 1)))
}

/// `σ(e)`: `e − 1` inaction jumps followed by termination.
pub fn sigma(e: u64) -> SequenceTerm {
    assert!(e >= 1);
    let mut instrs = vec![PrimitiveInstruction::Jump(0); (e - 1) as usize];
    instrs.push(PrimitiveInstruction::Halt);
    SequenceTerm::from_instrs(&instrs).unwrap()
}

/// The segment `S` entered at its `b`th instruction, with exit `e`
/// turned into termination: `#b ∘ S` for `e = 0`, `#b ∘ S ∘ σ(e)` otherwise.
pub fn embed(s: &SequenceTerm, b: u64, e: u64) -> CanonicalSequence {
    assert!(b >= 1, "entry points are positive");
    let entry = SequenceTerm::Instr(PrimitiveInstruction::Jump(b));
    let body = SequenceTerm::concat(entry, s.clone());
    if e == 0 {
        normalize(&body)
    } else {
        normalize(&SequenceTerm::concat(body, sigma(e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("step budget of {0} exhausted")]
pub struct BudgetExhausted(pub u64);

/// Steps granted to a run over a program with `size` positions or nodes:
/// enough to count any counter of the initial state, or one up to `bound`,
/// down to zero through every position.
pub fn step_budget(bound: u64, size: usize, state: &ServiceFamily) -> u64 {
    let reach = bound.saturating_add(state.max_counter()).saturating_add(1);
    reach
        .saturating_mul(size as u64 + 1)
        .saturating_mul(state.len() as u64 + 1)
}

/// Apply a thread to a service family with the default budget.
pub fn apply(t: &RegularThread, u: &ServiceFamily) -> Result<ServiceFamily, BudgetExhausted> {
    apply_bounded(t, u, DEFAULT_BOUND)
}

/// Apply a thread to a service family. Inaction, a missing focus, a D
/// reply and divergence all yield the empty family.
pub fn apply_bounded(
    t: &RegularThread,
    u: &ServiceFamily,
    bound: u64,
) -> Result<ServiceFamily, BudgetExhausted> {
    let budget = step_budget(bound, t.len(), u);
    let mut node: NodeId = 0;
    let mut family = u.clone();
    // Brent's cycle detection on the exact (node, family) pair
    let mut saved = (node, family.clone());
    let mut power = 1u64;
    let mut lambda = 0u64;
    for _ in 0..budget {
        let (action, then, otherwise) = match t.node(node) {
            Node::Stop => return Ok(family),
            Node::Dead => return Ok(ServiceFamily::empty()),
            Node::Branch {
                action,
                then,
                otherwise,
            } => (action, *then, *otherwise),
        };
        let Some(service) = family.get(&action.focus) else {
            return Ok(ServiceFamily::empty());
        };
        let (reply, derived) = service.step(&action.method);
        node = match reply {
            Reply::T => then,
            Reply::F => otherwise,
            Reply::D => return Ok(ServiceFamily::empty()),
        };
        family.set(action.focus.clone(), derived);

        lambda += 1;
        if saved.0 == node && saved.1 == family {
            return Ok(ServiceFamily::empty());
        }
        if lambda == power {
            saved = (node, family.clone());
            power *= 2;
            lambda = 0;
        }
    }
    Err(BudgetExhausted(budget))
}
