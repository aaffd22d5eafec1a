//! Homeomorphisms of the end space assembled from finitely many ball
//! similarities, presented as *defining triples*: a domain partition, a
//! range partition, and a label-preserving bijection between them. The ball
//! pairing extends to ends by copying the tail of the address: label
//! preservation makes the subtrees congruent, so the copy is an isometry up
//! to the scale factor fixed by the two depths.
//!
//! Triples translate to diagrams and back ([`psi`], [`triple_from_diagram`]);
//! reduction on the diagram side is sibling-family merging on the triple
//! side, which yields canonical representatives and a decidable group
//! structure ([`compose`], [`canonicalize`], [`FSSElement`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::calculus::{reduce, split_positive_negative};
use crate::diagram::{
    concatenate, invert as invert_diagram, permutation_diagram, Attachment, Diagram,
    DiagramBuilder, WireId,
};
use crate::error::{Error, Result};
use crate::presentation::{Generator, Presentation, Word};
use crate::treespace::{Address, Ball, Partition, PointPrefix, TreeSpace};

/// Same presentation content and same base: the two spaces have identical
/// trees.
pub fn same_space(a: &TreeSpace, b: &TreeSpace) -> bool {
    a.base() == b.base()
        && (Arc::ptr_eq(a.presentation(), b.presentation())
            || a.presentation().as_ref() == b.presentation().as_ref())
}

/// A map of the end space given ball-by-ball: domain ball i is sent to
/// range ball `image[i]` by the address-tail copy. Pairs always preserve
/// labels, so every restriction is a similarity.
#[derive(Debug, Clone)]
pub struct DefiningTriple {
    space: Arc<TreeSpace>,
    domain: Partition,
    range: Partition,
    image: Vec<usize>,
}

impl PartialEq for DefiningTriple {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space)
            && self.domain == other.domain
            && self.range == other.range
            && self.image == other.image
    }
}

impl Eq for DefiningTriple {}

impl DefiningTriple {
    /// Builds from (domain ball, range ball) pairs, in any order.
    pub fn from_pairs(space: Arc<TreeSpace>, pairs: &[(Address, Address)]) -> Result<Self> {
        let domain = space.partition(pairs.iter().map(|p| p.0.clone()).collect())?;
        let range = space.partition(pairs.iter().map(|p| p.1.clone()).collect())?;
        let mut image = vec![usize::MAX; pairs.len()];
        for (d, r) in pairs {
            let dl = space.label_of(d)?;
            let rl = space.label_of(r)?;
            if dl != rl {
                return Err(Error::InvalidTriple(format!(
                    "pair {d} -> {r} maps label `{dl}` onto `{rl}`"
                )));
            }
            let i = domain.position_of(d).expect("member of the domain partition");
            image[i] = range.position_of(r).expect("member of the range partition");
        }
        Ok(DefiningTriple {
            space,
            domain,
            range,
            image,
        })
    }

    pub fn identity(space: Arc<TreeSpace>) -> Self {
        let root = space
            .partition(vec![Address::root()])
            .expect("the one-ball partition");
        DefiningTriple {
            space,
            domain: root.clone(),
            range: root,
            image: vec![0],
        }
    }

    pub fn space(&self) -> &Arc<TreeSpace> {
        &self.space
    }

    pub fn domain(&self) -> &Partition {
        &self.domain
    }

    pub fn range(&self) -> &Partition {
        &self.range
    }

    /// (domain ball, range ball) pairs in domain ball order.
    pub fn pairs(&self) -> Vec<(Address, Address)> {
        self.domain
            .addresses()
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), self.range.addresses()[self.image[i]].clone()))
            .collect()
    }

    /// Range ball paired with the given domain ball.
    pub fn image_of(&self, domain_ball: &Address) -> Option<&Address> {
        let i = self.domain.position_of(domain_ball)?;
        Some(&self.range.addresses()[self.image[i]])
    }

    /// Applies the map to a point prefix. The prefix must reach into a
    /// domain ball; the image keeps the tail below that ball.
    pub fn evaluate(&self, p: &PointPrefix) -> Result<PointPrefix> {
        let (i, d) = self
            .domain
            .addresses()
            .iter()
            .enumerate()
            .find(|(_, d)| d.is_prefix_of(p.address()))
            .ok_or_else(|| {
                Error::TooShallow(format!(
                    "prefix {} does not reach into a domain ball; extend it",
                    p.address()
                ))
            })?;
        let r = &self.range.addresses()[self.image[i]];
        let mut out = r.components().to_vec();
        out.extend_from_slice(&p.address().components()[d.len()..]);
        self.space
            .point(Address::from_components(out), p.is_terminal())
    }

    /// Replaces one domain ball and its image by their child families,
    /// paired index to index. The represented map does not change.
    pub fn subdivide(&self, at: &Address) -> Result<DefiningTriple> {
        let i = self
            .domain
            .position_of(at)
            .ok_or_else(|| Error::InvalidTriple(format!("{at} is not a domain ball")))?;
        let arity = self.space.children(at)?.len();
        if arity == 0 {
            return Err(Error::InvalidTriple(format!(
                "domain ball {at} is a leaf and cannot be subdivided"
            )));
        }
        let r = self.range.addresses()[self.image[i]].clone();
        let mut pairs = self.pairs();
        pairs.remove(i);
        for k in 0..arity {
            pairs.push((at.child(k as u32), r.child(k as u32)));
        }
        DefiningTriple::from_pairs(Arc::clone(&self.space), &pairs)
    }

    /// One similarity per domain ball.
    pub fn similarity_maps(&self) -> Vec<SimilarityMap> {
        self.pairs()
            .into_iter()
            .map(|(d, r)| SimilarityMap {
                source: self.space.ball(&d).expect("domain member realizable"),
                target: self.space.ball(&r).expect("range member realizable"),
            })
            .collect()
    }

    /// The similarity the triple restricts to on one domain ball.
    pub fn restriction(&self, domain_ball: &Address) -> Result<SimilarityMap> {
        let r = self
            .image_of(domain_ball)
            .ok_or_else(|| Error::InvalidTriple(format!("{domain_ball} is not a domain ball")))?;
        Ok(SimilarityMap {
            source: self.space.ball(domain_ball)?,
            target: self.space.ball(r)?,
        })
    }
}

/// Restriction of a triple to one domain ball: an address-tail copy from
/// `source` onto `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityMap {
    source: Ball,
    target: Ball,
}

impl SimilarityMap {
    pub fn source(&self) -> &Ball {
        &self.source
    }

    pub fn target(&self) -> &Ball {
        &self.target
    }

    /// Distances between ends of the source multiply by e^(log_scale):
    /// valuations shift by depth(source) - depth(target).
    pub fn log_scale(&self) -> isize {
        self.source.depth() as isize - self.target.depth() as isize
    }
}

pub fn invert_triple(t: &DefiningTriple) -> DefiningTriple {
    let pairs: Vec<(Address, Address)> =
        t.pairs().into_iter().map(|(d, r)| (r, d)).collect();
    DefiningTriple::from_pairs(Arc::clone(&t.space), &pairs)
        .expect("a triple swapped is a triple")
}

/// Everything wrong with a candidate pairing, in one pass. An empty report
/// means [`DefiningTriple::from_pairs`] will accept the pairs.
#[derive(Debug, Clone)]
pub struct TripleReport {
    problems: Vec<String>,
}

impl TripleReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn problems(&self) -> &[String] {
        &self.problems
    }
}

/// Checks candidate (domain, range) pairs: both sides must be partitions
/// and every pair must join equally-labelled balls. Bijectivity comes free —
/// the sides are equally long and partitions cannot repeat a ball.
pub fn validate_triple(space: &TreeSpace, pairs: &[(Address, Address)]) -> TripleReport {
    let mut problems = Vec::new();
    let domain: Vec<Address> = pairs.iter().map(|(d, _)| d.clone()).collect();
    let range: Vec<Address> = pairs.iter().map(|(_, r)| r.clone()).collect();
    if let Err(e) = space.partition(domain) {
        problems.push(format!("domain side: {e}"));
    }
    if let Err(e) = space.partition(range) {
        problems.push(format!("range side: {e}"));
    }
    for (d, r) in pairs {
        let (Ok(ld), Ok(lr)) = (space.label_of(d), space.label_of(r)) else {
            continue; // unrealizable addresses already reported above
        };
        if ld != lr {
            problems.push(format!("pair {d} -> {r} joins labels `{ld}` and `{lr}`"));
        }
    }
    TripleReport { problems }
}

/// The presentation whose letters are the ball label classes of the space
/// `Ends(T_(p, base))`: `p` restricted to the generators reachable from the
/// base letter, keeping the ambient declaration order.
pub fn presentation_of_space(p: &Arc<Presentation>, base: &Generator) -> Result<Presentation> {
    TreeSpace::new(Arc::clone(p), base.clone())?;
    let mut reachable: BTreeSet<Generator> = BTreeSet::from([base.clone()]);
    let mut queue = VecDeque::from([base.clone()]);
    while let Some(g) = queue.pop_front() {
        if let Some((_, right)) = p.relation_with_left(&g) {
            for letter in right.letters() {
                if reachable.insert(letter.clone()) {
                    queue.push_back(letter.clone());
                }
            }
        }
    }
    let generators: Vec<Generator> = p
        .generators()
        .iter()
        .filter(|g| reachable.contains(g))
        .cloned()
        .collect();
    let relations: Vec<(Word, Word)> = p
        .relations()
        .iter()
        .filter(|(l, _)| reachable.contains(&l.letters()[0]))
        .cloned()
        .collect();
    Presentation::new(generators, relations)
}

/// Image of a refined ball `c` (lying inside some domain ball) under the
/// whole-triple map.
fn ball_image(t: &DefiningTriple, c: &Address) -> Address {
    let (i, d) = t
        .domain
        .addresses()
        .iter()
        .enumerate()
        .find(|(_, d)| d.is_prefix_of(c))
        .expect("ball inside the domain partition");
    let r = &t.range.addresses()[t.image[i]];
    let mut out = r.components().to_vec();
    out.extend_from_slice(&c.components()[d.len()..]);
    Address::from_components(out)
}

fn ball_preimage(t: &DefiningTriple, c: &Address) -> Address {
    ball_image(&invert_triple(t), c)
}

/// Group element: a triple in canonical form (no mergeable sibling family).
/// Produced by [`canonicalize`] and [`compose`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FSSElement {
    triple: DefiningTriple,
}

impl FSSElement {
    pub fn triple(&self) -> &DefiningTriple {
        &self.triple
    }

    pub fn into_triple(self) -> DefiningTriple {
        self.triple
    }

    /// The canonical identity is the one-ball triple.
    pub fn is_identity(&self) -> bool {
        self.triple.domain.is_trivial() && self.triple.range.is_trivial()
    }

    /// Swapping a canonical triple keeps it canonical: the merge condition
    /// is symmetric in domain and range.
    pub fn invert(&self) -> FSSElement {
        FSSElement {
            triple: invert_triple(&self.triple),
        }
    }

    pub fn evaluate(&self, p: &PointPrefix) -> Result<PointPrefix> {
        self.triple.evaluate(p)
    }
}

/// `outer ∘ inner` (apply `inner` first), canonicalized: both partitions
/// are refined to the common refinement of `inner`'s range and `outer`'s
/// domain, where the two ball maps literally compose.
pub fn compose(outer: &DefiningTriple, inner: &DefiningTriple) -> Result<FSSElement> {
    if !same_space(&outer.space, &inner.space) {
        return Err(Error::PresentationMismatch);
    }
    let mid = inner.space.common_refinement(outer.domain(), inner.range());
    let pairs: Vec<(Address, Address)> = mid
        .iter()
        .map(|c| (ball_preimage(inner, c), ball_image(outer, c)))
        .collect();
    let t = DefiningTriple::from_pairs(Arc::clone(&inner.space), &pairs)?;
    canonicalize(&t)
}

/// Canonical representative of the triple's map, found on the diagram side:
/// translate, reduce, translate back. Merging one sibling family in the
/// triple is removing one dipole in the diagram, so the reduced diagram
/// comes back as the fully merged triple.
pub fn canonicalize(t: &DefiningTriple) -> Result<FSSElement> {
    let d = reduce(&psi(t));
    let triple = triple_from_diagram(&t.space, &d)?;
    Ok(FSSElement { triple })
}

// ---------------------------------------------------------------------------
// Translation to diagrams and back

/// The tree of a partition, as a diagram: one wire per ball that is a member
/// or a prefix of one, one transistor per proper prefix, frame top at the
/// root ball, frame bottom reading the members in ball order.
pub fn partition_diagram(space: &TreeSpace, p: &Partition) -> Diagram {
    let mut vertices: BTreeSet<Address> = BTreeSet::new();
    for m in p.iter() {
        for l in 0..=m.len() {
            vertices.insert(Address::from_components(m.components()[..l].to_vec()));
        }
    }
    let mut b = DiagramBuilder::new(Arc::clone(space.presentation()));
    let mut wire_of: BTreeMap<&Address, WireId> = BTreeMap::new();
    for v in &vertices {
        let label = space.label_of(v).expect("prefix of a realizable address");
        wire_of.insert(v, b.wire(label));
    }
    for v in &vertices {
        if p.contains(v) {
            continue;
        }
        let arity = space.children(v).expect("realizable").len();
        let bottom: Vec<WireId> = (0..arity).map(|i| wire_of[&v.child(i as u32)]).collect();
        b.transistor(vec![wire_of[v]], bottom);
    }
    b.frame_top(vec![wire_of[&Address::root()]]);
    b.frame_bottom(p.iter().map(|m| wire_of[m]).collect());
    b.build().expect("partition trees are valid diagrams")
}

/// The transistor-free crossing layer of a triple: one wire per domain
/// ball, top contacts in domain ball order, bottom contacts in the order of
/// the balls' images.
pub fn bijection_diagram(t: &DefiningTriple) -> Diagram {
    let w_domain = t.space.partition_word(t.domain());
    permutation_diagram(t.space.presentation(), &w_domain, &t.image)
        .expect("image positions are a permutation")
}

/// The diagram of a triple: the range tree on top, the domain tree upside
/// down at the bottom, and the inverted crossing layer between them wiring
/// range ball i to its preimage. A `(base, base)`-diagram over the space's
/// presentation.
pub fn psi(t: &DefiningTriple) -> Diagram {
    let range_tree = partition_diagram(&t.space, t.range());
    let domain_tree = partition_diagram(&t.space, t.domain());
    let crossing = invert_diagram(&bijection_diagram(t));
    let upper = concatenate(&range_tree, &crossing).expect("crossing tops read the range word");
    concatenate(&upper, &invert_diagram(&domain_tree))
        .expect("crossing bottoms read the domain word")
}

/// Reads a diagram back as a triple: reduce, split into positive and
/// negative halves, then walk each half downward from its root wire,
/// handing address `a.i` to the i-th bottom-face wire under address `a`.
/// The two frame-bottom traces pair up slot by slot — the upper half gives
/// the range balls, the lower half the domain balls.
pub fn triple_from_diagram(space: &Arc<TreeSpace>, d: &Diagram) -> Result<DefiningTriple> {
    if !(Arc::ptr_eq(space.presentation(), d.presentation())
        || space.presentation().as_ref() == d.presentation().as_ref())
    {
        return Err(Error::PresentationMismatch);
    }
    let r = reduce(d);
    let base = space.base();
    for frame in [r.frame_top(), r.frame_bottom()] {
        let ok = frame.len() == 1 && r.wire_label(frame[0]) == Some(base);
        if !ok {
            return Err(Error::NotATripleDiagram(format!(
                "frame words must both be the base letter `{base}`"
            )));
        }
    }
    let (upper, lower) = split_positive_negative(&r)?;
    let range_addrs = trace_tree(&upper)?;
    let domain_addrs = trace_tree(&lower)?;
    let pairs: Vec<(Address, Address)> =
        domain_addrs.into_iter().zip(range_addrs).collect();
    DefiningTriple::from_pairs(Arc::clone(space), &pairs)
}

/// Addresses of the frame-bottom wires of a positive tree diagram rooted in
/// a single frame-top wire.
fn trace_tree(d: &Diagram) -> Result<Vec<Address>> {
    if d.frame_top().len() != 1 {
        return Err(Error::NotATripleDiagram(
            "each split half must hang from a single wire".into(),
        ));
    }
    let contacts = d.contacts();
    let root = d.frame_top()[0];
    let mut addr_of: HashMap<WireId, Address> = HashMap::new();
    addr_of.insert(root, Address::root());
    let mut queue = VecDeque::from([root]);
    while let Some(w) = queue.pop_front() {
        let a = addr_of[&w].clone();
        if let Attachment::TransistorTop { transistor, .. } = contacts.bottom_of(w) {
            let t = d.transistor(transistor).unwrap();
            if t.top_face().len() != 1 {
                return Err(Error::NotATripleDiagram(
                    "split half holds a transistor with a wide top face".into(),
                ));
            }
            for (i, w2) in t.bottom_face().iter().enumerate() {
                addr_of.insert(*w2, a.child(i as u32));
                queue.push_back(*w2);
            }
        }
    }
    d.frame_bottom()
        .iter()
        .map(|w| {
            addr_of
                .get(w)
                .cloned()
                .ok_or_else(|| Error::NotATripleDiagram("wire not reached from the root".into()))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Triple files

/// Presentation reference named in triple file text, for the caller to
/// resolve before [`parse_fst`].
pub fn fst_presentation_ref(text: &str) -> Result<String> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        return match line.strip_prefix("presentation:") {
            Some(rest) if !rest.trim().is_empty() => Ok(rest.trim().to_string()),
            _ => Err(Error::Parse {
                line: lineno + 1,
                column: 1,
                message: "triple files start with `presentation: <ref>`".into(),
            }),
        };
    }
    Err(Error::Parse {
        line: 1,
        column: 1,
        message: "empty triple file".into(),
    })
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses triple file text against an already-resolved presentation:
/// `presentation:` line, `base:` line, then one `map: <domain> -> <range>`
/// line per ball pair. `#` comments and blank lines are allowed anywhere.
pub fn parse_fst(text: &str, presentation: Arc<Presentation>) -> Result<DefiningTriple> {
    let mut base: Option<crate::presentation::Generator> = None;
    let mut pairs: Vec<(Address, Address)> = Vec::new();
    let mut saw_presentation = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            column: 1,
            message,
        };
        if !saw_presentation {
            if line.strip_prefix("presentation:").is_none() {
                return Err(err("triple files start with `presentation: <ref>`".into()));
            }
            saw_presentation = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("base:") {
            if base.is_some() {
                return Err(err("second `base:` line".into()));
            }
            let name = rest.trim();
            let g = presentation
                .generator(name)
                .ok_or_else(|| err(format!("base `{name}` is not a generator")))?
                .clone();
            base = Some(g);
        } else if let Some(rest) = line.strip_prefix("map:") {
            let (left, right) = rest.split_once("->").ok_or_else(|| {
                err("map lines read `map: <domain-address> -> <range-address>`".into())
            })?;
            let d: Address = left.trim().parse().map_err(|e| err(format!("{e}")))?;
            let r: Address = right.trim().parse().map_err(|e| err(format!("{e}")))?;
            pairs.push((d, r));
        } else {
            return Err(err(format!("unrecognized line `{line}`")));
        }
    }
    let base = base.ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing `base:` line".into(),
    })?;
    if pairs.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no `map:` lines".into(),
        });
    }
    let space = Arc::new(TreeSpace::new(presentation, base)?);
    DefiningTriple::from_pairs(space, &pairs)
}

pub fn serialize_fst(t: &DefiningTriple, presentation_ref: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("presentation: {presentation_ref}\n"));
    out.push_str(&format!("base: {}\n", t.space.base()));
    for (d, r) in t.pairs() {
        out.push_str(&format!("map: {d} -> {r}\n"));
    }
    out
}
