//! The labelled rooted tree of a tree-like presentation, and the ultrametric
//! space of its ends.
//!
//! Every vertex carries a generator: the root carries the base, and a vertex
//! labelled `y` with relation `y -> y1 … yk` has ordered children labelled
//! `y1 … yk`. Vertices without a relation are leaves. A *ball* is the set of
//! ends through one vertex, named by that vertex's address — the child-index
//! path from the root. Two distinct ends sit at distance e^(-m) where m
//! counts their shared edges, so balls of address length m have diameter at
//! most e^(-m).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentation::{Generator, Presentation, Word};

/// Child-index path from the root. The derived order (lexicographic on
/// components, prefixes first) restricted to any antichain is the *ball
/// order*: left to right across the tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(Vec<u32>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn from_components(components: Vec<u32>) -> Self {
        Address(components)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: u32) -> Address {
        let mut c = self.0.clone();
        c.push(index);
        Address(c)
    }

    /// Parent address and the index this address has under it.
    pub fn parent(&self) -> Option<(Address, u32)> {
        let (&last, rest) = self.0.split_last()?;
        Some((Address(rest.to_vec()), last))
    }

    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn common_prefix_len(&self, other: &Address) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Address {
    type Err = Error;

    /// `eps` for the root, else dot-separated child indices like `0.2.1`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "eps" {
            return Ok(Address::root());
        }
        if s.is_empty() {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: "empty address (use `eps` for the root)".into(),
            });
        }
        let mut components = Vec::new();
        for piece in s.split('.') {
            let c: u32 = piece.parse().map_err(|_| Error::Parse {
                line: 0,
                column: 0,
                message: format!("bad address component `{piece}` in `{s}`"),
            })?;
            components.push(c);
        }
        Ok(Address(components))
    }
}

/// Ball order on two disjoint balls: the child order at the first index
/// where their addresses part ways. Nested (or equal) balls have no order.
pub fn compare_balls(b1: &Address, b2: &Address) -> Result<std::cmp::Ordering> {
    if b1.is_prefix_of(b2) || b2.is_prefix_of(b1) {
        let (outer, inner) = if b1.len() <= b2.len() { (b1, b2) } else { (b2, b1) };
        return Err(Error::NestedBalls {
            outer: outer.to_string(),
            inner: inner.to_string(),
        });
    }
    Ok(b1.cmp(b2))
}

/// The set of ends through one vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ball {
    address: Address,
    label: Generator,
    depth: usize,
}

impl Ball {
    pub fn address(&self) -> &Address {
        &self.address
    }

    pub fn label(&self) -> &Generator {
        &self.label
    }

    /// Vertices on the root path, root and this vertex included.
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Finite family of pairwise disjoint balls covering the whole space.
/// Always held in ball order; only [`TreeSpace::partition`] builds one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    addresses: Vec<Address>,
}

impl Partition {
    pub fn addresses(&self) -> &[Address] {
        &self.addresses
    }

    pub fn len(&self) -> usize {
        self.addresses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.addresses.is_empty()
    }

    /// The one-ball partition `{X}`.
    pub fn is_trivial(&self) -> bool {
        self.addresses.len() == 1 && self.addresses[0].is_root()
    }

    pub fn contains(&self, a: &Address) -> bool {
        self.addresses.binary_search(a).is_ok()
    }

    pub fn position_of(&self, a: &Address) -> Option<usize> {
        self.addresses.binary_search(a).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Address> {
        self.addresses.iter()
    }

    pub fn into_addresses(self) -> Vec<Address> {
        self.addresses
    }
}

/// The end point of a walk down the tree, or a stop partway: `terminal`
/// marks a leaf vertex naming a whole end; otherwise the prefix stands for
/// some end passing through the vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointPrefix {
    address: Address,
    terminal: bool,
}

impl PointPrefix {
    pub fn address(&self) -> &Address {
        &self.address
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }
}

impl fmt::Display for PointPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.address)?;
        if self.terminal {
            f.write_str(" (terminal)")?;
        }
        Ok(())
    }
}

/// Exponent of a distance e^(-m) between ends; `Infinite` is the valuation
/// of the zero distance. Larger valuation means closer points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn metric_value(&self) -> f64 {
        match self {
            Valuation::Finite(m) => (-(*m as f64)).exp(),
            Valuation::Infinite => 0.0,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(m) => write!(f, "exp(-{m})"),
            Valuation::Infinite => f.write_str("0"),
        }
    }
}

/// A tree-like presentation together with a chosen base generator; the
/// geometry lives in the ends of the labelled tree grown from the base.
#[derive(Debug, Clone)]
pub struct TreeSpace {
    presentation: Arc<Presentation>,
    base: Generator,
}

impl TreeSpace {
    pub fn new(presentation: Arc<Presentation>, base: Generator) -> Result<Self> {
        let gate = presentation.validate_tree_like();
        if !gate.is_tree_like() {
            return Err(Error::NotTreeLike(gate.to_string()));
        }
        if !presentation.has_generator(&base) {
            return Err(Error::Presentation(format!(
                "base `{base}` is not a generator"
            )));
        }
        Ok(TreeSpace { presentation, base })
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn base(&self) -> &Generator {
        &self.base
    }

    /// Label of the vertex at `a`, by walking the child indices down from
    /// the base.
    pub fn label_of(&self, a: &Address) -> Result<Generator> {
        let mut current = self.base.clone();
        for (step, &index) in a.components().iter().enumerate() {
            let at = Address::from_components(a.components()[..step].to_vec());
            let (_, right) = self.presentation.relation_with_left(&current).ok_or_else(|| {
                Error::UnrealizableAddress {
                    address: a.to_string(),
                    detail: format!("vertex {at} (label `{current}`) is a leaf"),
                }
            })?;
            current = right
                .letters()
                .get(index as usize)
                .ok_or_else(|| Error::UnrealizableAddress {
                    address: a.to_string(),
                    detail: format!(
                        "vertex {at} has {} children, index {index} asked",
                        right.len()
                    ),
                })?
                .clone();
        }
        Ok(current)
    }

    /// Ordered child labels of the vertex at `a`; empty when it is a leaf.
    pub fn children(&self, a: &Address) -> Result<Vec<Generator>> {
        let label = self.label_of(a)?;
        Ok(match self.presentation.relation_with_left(&label) {
            Some((_, right)) => right.letters().to_vec(),
            None => Vec::new(),
        })
    }

    pub fn is_leaf(&self, a: &Address) -> Result<bool> {
        Ok(self.children(a)?.is_empty())
    }

    pub fn ball(&self, a: &Address) -> Result<Ball> {
        Ok(Ball {
            label: self.label_of(a)?,
            depth: a.len() + 1,
            address: a.clone(),
        })
    }

    /// The child balls of `a` in ball order; empty when `a` is a leaf.
    pub fn maximal_proper_subballs(&self, a: &Address) -> Result<Vec<Ball>> {
        let labels = self.children(a)?;
        labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| {
                Ok(Ball {
                    address: a.child(i as u32),
                    depth: a.len() + 2,
                    label,
                })
            })
            .collect()
    }

    /// Validates and sorts a family of ball addresses into a partition:
    /// all realizable, pairwise non-nested, jointly covering every end.
    pub fn partition(&self, addresses: Vec<Address>) -> Result<Partition> {
        let mut addresses = addresses;
        addresses.sort();
        if addresses.is_empty() {
            return Err(Error::NotAPartition("no balls given".into()));
        }
        for a in &addresses {
            self.label_of(a)?;
        }
        for pair in addresses.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::NotAPartition(format!("ball {} listed twice", pair[0])));
            }
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(Error::NestedBalls {
                    outer: pair[0].to_string(),
                    inner: pair[1].to_string(),
                });
            }
        }
        self.check_cover(&Address::root(), &addresses)?;
        Ok(Partition { addresses })
    }

    /// Every end below `prefix` must land in exactly one listed ball;
    /// `members` holds the sorted members extending `prefix`.
    fn check_cover(&self, prefix: &Address, members: &[Address]) -> Result<()> {
        if members.len() == 1 && &members[0] == prefix {
            return Ok(());
        }
        if members.is_empty() {
            return Err(Error::NotAPartition(format!("ball {prefix} is not covered")));
        }
        // members all lie strictly below `prefix`; antichain already checked.
        debug_assert!(members.iter().all(|m| prefix.is_prefix_of(m) && m != prefix));
        let arity = self.children(prefix)?.len();
        debug_assert!(arity > 0, "members below a leaf survived realizability");
        let mut cursor = 0usize;
        for i in 0..arity {
            let c = prefix.child(i as u32);
            let start = cursor;
            while cursor < members.len() && c.is_prefix_of(&members[cursor]) {
                cursor += 1;
            }
            self.check_cover(&c, &members[start..cursor])?;
        }
        debug_assert_eq!(cursor, members.len());
        Ok(())
    }

    pub fn is_partition(&self, addresses: &[Address]) -> bool {
        self.partition(addresses.to_vec()).is_ok()
    }

    /// Word read off the partition in ball order.
    pub fn partition_word(&self, p: &Partition) -> Word {
        let letters = p
            .addresses()
            .iter()
            .map(|a| self.label_of(a).expect("partition member realizable"))
            .collect();
        Word::new(letters).expect("partitions are nonempty")
    }

    /// Expansion moves rebuilding `p` from the one-ball partition `{X}`:
    /// each listed address is expanded into its children, in order. Found
    /// by merging the deepest complete sibling family (first in ball order
    /// on ties) until only the root remains, then reversing.
    pub fn standard_decomposition(&self, p: &Partition) -> Vec<Address> {
        let mut s: BTreeSet<Address> = p.addresses().iter().cloned().collect();
        let mut merges = Vec::new();
        while !(s.len() == 1 && s.contains(&Address::root())) {
            let deepest = s.iter().map(Address::len).max().unwrap();
            let target = s.iter().find(|a| a.len() == deepest).unwrap().clone();
            let (parent, _) = target.parent().expect("non-root member");
            let arity = self.children(&parent).expect("realizable").len();
            for i in 0..arity {
                let removed = s.remove(&parent.child(i as u32));
                debug_assert!(removed, "partition must hold the whole sibling family");
            }
            s.insert(parent.clone());
            merges.push(parent);
        }
        merges.reverse();
        merges
    }

    /// Coarsest partition refining both: keeps the deeper ball of every
    /// nested pair.
    pub fn common_refinement(&self, a: &Partition, b: &Partition) -> Partition {
        let mut out: BTreeSet<Address> = BTreeSet::new();
        for x in a.iter() {
            for y in b.iter() {
                if x.is_prefix_of(y) {
                    out.insert(y.clone());
                } else if y.is_prefix_of(x) {
                    out.insert(x.clone());
                }
            }
        }
        let addresses: Vec<Address> = out.into_iter().collect();
        debug_assert!(self.is_partition(&addresses));
        Partition { addresses }
    }

    /// A point designator: `terminal` names the end stopping at a leaf and
    /// must be set exactly when the vertex is a leaf.
    pub fn point(&self, address: Address, terminal: bool) -> Result<PointPrefix> {
        let leaf = self.is_leaf(&address)?;
        if terminal && !leaf {
            return Err(Error::TerminalMismatch {
                address: address.to_string(),
                detail: "the vertex has children, so no end stops here".into(),
            });
        }
        if !terminal && leaf {
            return Err(Error::TerminalMismatch {
                address: address.to_string(),
                detail: "the vertex is a leaf; the prefix names the full end".into(),
            });
        }
        Ok(PointPrefix { address, terminal })
    }

    /// Valuation of the distance between the designated ends, when the
    /// prefixes pin it down: diverging prefixes share exactly their common
    /// prefix of edges; equal terminal prefixes name one point. Comparable
    /// prefixes leave the distance open.
    pub fn distance(&self, p: &PointPrefix, q: &PointPrefix) -> Result<Valuation> {
        if p.address == q.address {
            return if p.terminal && q.terminal {
                Ok(Valuation::Infinite)
            } else {
                Err(Error::InsufficientDepth(format!(
                    "both points continue below {}",
                    p.address
                )))
            };
        }
        if p.address.is_prefix_of(&q.address) || q.address.is_prefix_of(&p.address) {
            return Err(Error::InsufficientDepth(format!(
                "{} and {} are comparable; deepen the shorter one",
                p.address, q.address
            )));
        }
        Ok(Valuation::Finite(p.address.common_prefix_len(&q.address)))
    }

    /// All realizable addresses with at most `max_len` components, in ball
    /// order within each length, shortest first.
    pub fn enumerate_addresses(&self, max_len: usize) -> Vec<Address> {
        let mut out = vec![Address::root()];
        let mut frontier = vec![Address::root()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for a in &frontier {
                let arity = self.children(a).expect("frontier realizable").len();
                for i in 0..arity {
                    next.push(a.child(i as u32));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}
