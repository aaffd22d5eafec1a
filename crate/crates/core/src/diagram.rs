//! Braided diagrams over a semigroup presentation, their validation, the
//! stacking and mirror operations, and the `.bdg` text format.
//!
//! A diagram is a frame, a finite set of transistors, and a finite nonempty
//! set of labelled wires. Every wire has a *top contact* on the bottom face
//! of a transistor or on the frame top, and a *bottom contact* on the top
//! face of a transistor or on the frame bottom: data enters at the frame top
//! and flows downward. Faces and frame edges order their contacts left to
//! right, and that order is the only geometry a braided diagram has — wires
//! may cross freely.
//!
//! Stored state is the face/frame incidence lists; wire attachments are
//! derived views, so a diagram can never hold contradictory copies of the
//! same contact.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::presentation::{Generator, Presentation, Word};

/// Identity of a wire within one diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(pub(crate) u32);

/// Identity of a transistor within one diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransistorId(pub(crate) u32);

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

impl fmt::Display for TransistorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// One contact point, with its 0-based slot in the left-to-right order of
/// the face or frame edge that carries it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attachment {
    FrameTop { slot: usize },
    FrameBottom { slot: usize },
    TransistorTop { transistor: TransistorId, slot: usize },
    TransistorBottom { transistor: TransistorId, slot: usize },
}

/// A transistor's two ordered faces.
///
/// `top_face` lists the wires whose bottom contact sits on this transistor's
/// top; `bottom_face` lists the wires whose top contact hangs from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transistor {
    pub(crate) top_face: Vec<WireId>,
    pub(crate) bottom_face: Vec<WireId>,
}

impl Transistor {
    pub fn top_face(&self) -> &[WireId] {
        &self.top_face
    }

    pub fn bottom_face(&self) -> &[WireId] {
        &self.bottom_face
    }
}

/// A braided diagram over a fixed presentation.
///
/// Construct through [`DiagramBuilder`], [`parse_bdg`], or the library
/// operations; all operations except [`Diagram::validate`] expect a valid
/// diagram. Diagrams are immutable: operations build new ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub(crate) presentation: Arc<Presentation>,
    pub(crate) wires: BTreeMap<WireId, Generator>,
    pub(crate) transistors: BTreeMap<TransistorId, Transistor>,
    pub(crate) frame_top: Vec<WireId>,
    pub(crate) frame_bottom: Vec<WireId>,
}

impl Diagram {
    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn wire_count(&self) -> usize {
        self.wires.len()
    }

    pub fn transistor_count(&self) -> usize {
        self.transistors.len()
    }

    pub fn wires(&self) -> impl Iterator<Item = (WireId, &Generator)> {
        self.wires.iter().map(|(id, g)| (*id, g))
    }

    pub fn wire_label(&self, id: WireId) -> Option<&Generator> {
        self.wires.get(&id)
    }

    pub fn transistors(&self) -> impl Iterator<Item = (TransistorId, &Transistor)> {
        self.transistors.iter().map(|(id, t)| (*id, t))
    }

    pub fn transistor(&self, id: TransistorId) -> Option<&Transistor> {
        self.transistors.get(&id)
    }

    pub fn frame_top(&self) -> &[WireId] {
        &self.frame_top
    }

    pub fn frame_bottom(&self) -> &[WireId] {
        &self.frame_bottom
    }

    /// Word read across the frame top, left to right.
    ///
    /// # Panics
    /// On an invalid diagram with an empty or dangling frame top.
    pub fn top_label(&self) -> Word {
        self.read_word(&self.frame_top)
    }

    /// Word read across the frame bottom, left to right.
    ///
    /// # Panics
    /// On an invalid diagram with an empty or dangling frame bottom.
    pub fn bottom_label(&self) -> Word {
        self.read_word(&self.frame_bottom)
    }

    fn read_word(&self, ids: &[WireId]) -> Word {
        let letters = ids
            .iter()
            .map(|id| self.wires.get(id).expect("dangling frame wire").clone())
            .collect();
        Word::new(letters).expect("empty frame edge")
    }

    /// Where the wire's top contact sits. `None` on an id this diagram does
    /// not reference (or references more than once; see [`Diagram::validate`]).
    pub fn top_attachment(&self, wire: WireId) -> Option<Attachment> {
        let contacts = self.contacts();
        match contacts.top.get(&wire) {
            Some(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    /// Where the wire's bottom contact sits.
    pub fn bottom_attachment(&self, wire: WireId) -> Option<Attachment> {
        let contacts = self.contacts();
        match contacts.bottom.get(&wire) {
            Some(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    /// Derived contact multimaps; a valid diagram has exactly one entry per
    /// wire on each side.
    pub(crate) fn contacts(&self) -> Contacts {
        let mut top: BTreeMap<WireId, Vec<Attachment>> = BTreeMap::new();
        let mut bottom: BTreeMap<WireId, Vec<Attachment>> = BTreeMap::new();
        for (slot, w) in self.frame_top.iter().enumerate() {
            top.entry(*w).or_default().push(Attachment::FrameTop { slot });
        }
        for (slot, w) in self.frame_bottom.iter().enumerate() {
            bottom
                .entry(*w)
                .or_default()
                .push(Attachment::FrameBottom { slot });
        }
        for (&tid, t) in &self.transistors {
            for (slot, w) in t.bottom_face.iter().enumerate() {
                top.entry(*w).or_default().push(Attachment::TransistorBottom {
                    transistor: tid,
                    slot,
                });
            }
            for (slot, w) in t.top_face.iter().enumerate() {
                bottom.entry(*w).or_default().push(Attachment::TransistorTop {
                    transistor: tid,
                    slot,
                });
            }
        }
        Contacts { top, bottom }
    }

    /// Checks every structural rule and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        if self.wires.is_empty() {
            violations.push(DiagramViolation::NoWires);
        }
        if self.frame_top.is_empty() {
            violations.push(DiagramViolation::EmptyFrameTop);
        }
        if self.frame_bottom.is_empty() {
            violations.push(DiagramViolation::EmptyFrameBottom);
        }

        // Dangling references anywhere in the incidence lists.
        let dangle = |ids: &[WireId], context: String, violations: &mut Vec<_>| {
            for id in ids {
                if !self.wires.contains_key(id) {
                    violations.push(DiagramViolation::DanglingWire {
                        wire: *id,
                        context: context.clone(),
                    });
                }
            }
        };
        dangle(&self.frame_top, "frame top".into(), &mut violations);
        dangle(&self.frame_bottom, "frame bottom".into(), &mut violations);
        for (&tid, t) in &self.transistors {
            if t.top_face.is_empty() {
                violations.push(DiagramViolation::EmptyFace {
                    transistor: tid,
                    face: FaceSide::Top,
                });
            }
            if t.bottom_face.is_empty() {
                violations.push(DiagramViolation::EmptyFace {
                    transistor: tid,
                    face: FaceSide::Bottom,
                });
            }
            dangle(&t.top_face, format!("{tid} top face"), &mut violations);
            dangle(&t.bottom_face, format!("{tid} bottom face"), &mut violations);
        }

        // Labels must come from the presentation's alphabet.
        for (&w, label) in &self.wires {
            if !self.presentation.has_generator(label) {
                violations.push(DiagramViolation::LabelOutsideAlphabet {
                    wire: w,
                    label: label.clone(),
                });
            }
        }

        // Each wire has exactly one top and one bottom contact.
        let contacts = self.contacts();
        for (&w, _) in &self.wires {
            match contacts.top.get(&w).map(Vec::len).unwrap_or(0) {
                0 => violations.push(DiagramViolation::MissingTopContact { wire: w }),
                1 => {}
                _ => violations.push(DiagramViolation::MultipleTopContacts { wire: w }),
            }
            match contacts.bottom.get(&w).map(Vec::len).unwrap_or(0) {
                0 => violations.push(DiagramViolation::MissingBottomContact { wire: w }),
                1 => {}
                _ => violations.push(DiagramViolation::MultipleBottomContacts { wire: w }),
            }
        }

        // Each transistor's face words must form a relation in one
        // orientation, read literally.
        for (&tid, t) in &self.transistors {
            let (Some(top), Some(bottom)) = (self.face_word(&t.top_face), self.face_word(&t.bottom_face))
            else {
                continue; // empty or dangling face, already reported
            };
            if !self.presentation.has_relation(&top, &bottom)
                && !self.presentation.has_relation(&bottom, &top)
            {
                violations.push(DiagramViolation::NotARelation {
                    transistor: tid,
                    top: top.to_string(),
                    bottom: bottom.to_string(),
                });
            }
        }

        // The below/above order must have an acyclic transitive closure.
        if let Some(cycle) = self.order_cycle(&contacts) {
            violations.push(DiagramViolation::OrderCycle { transistors: cycle });
        }

        ValidationReport { violations }
    }

    fn face_word(&self, ids: &[WireId]) -> Option<Word> {
        let letters: Option<Vec<Generator>> =
            ids.iter().map(|id| self.wires.get(id).cloned()).collect();
        Word::new(letters?).ok()
    }

    /// Finds a directed cycle in the below/above relation, if any.
    ///
    /// There is an edge `lower -> upper` whenever a wire descends from
    /// `upper`'s bottom face to `lower`'s top face.
    fn order_cycle(&self, contacts: &Contacts) -> Option<Vec<TransistorId>> {
        let mut above: BTreeMap<TransistorId, Vec<TransistorId>> = BTreeMap::new();
        for (&tid, _) in &self.transistors {
            above.entry(tid).or_default();
        }
        for (w, tops) in &contacts.top {
            let Some(bottoms) = contacts.bottom.get(w) else {
                continue;
            };
            for t in tops {
                let Attachment::TransistorBottom { transistor: up, .. } = t else {
                    continue;
                };
                for b in bottoms {
                    let Attachment::TransistorTop { transistor: low, .. } = b else {
                        continue;
                    };
                    above.entry(*low).or_default().push(*up);
                }
            }
        }
        // Iterative DFS with explicit stack; 0 = unseen, 1 = on stack, 2 = done.
        let mut state: BTreeMap<TransistorId, u8> = BTreeMap::new();
        let mut path: Vec<TransistorId> = Vec::new();
        for (&start, _) in &above {
            if state.get(&start).copied().unwrap_or(0) != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next == 0 {
                    state.insert(node, 1);
                    path.push(node);
                }
                let succs = &above[&node];
                if *next < succs.len() {
                    let succ = succs[*next];
                    *next += 1;
                    match state.get(&succ).copied().unwrap_or(0) {
                        0 => stack.push((succ, 0)),
                        1 => {
                            let pos = path.iter().position(|t| *t == succ).unwrap();
                            return Some(path[pos..].to_vec());
                        }
                        _ => {}
                    }
                } else {
                    state.insert(node, 2);
                    path.pop();
                    stack.pop();
                }
            }
        }
        None
    }
}

pub(crate) struct Contacts {
    /// For each wire, every place its top contact is claimed.
    pub(crate) top: BTreeMap<WireId, Vec<Attachment>>,
    /// For each wire, every place its bottom contact is claimed.
    pub(crate) bottom: BTreeMap<WireId, Vec<Attachment>>,
}

impl Contacts {
    /// Single top attachment; panics on invalid multiplicity.
    pub(crate) fn top_of(&self, w: WireId) -> Attachment {
        let v = &self.top[&w];
        debug_assert_eq!(v.len(), 1);
        v[0]
    }

    /// Single bottom attachment; panics on invalid multiplicity.
    pub(crate) fn bottom_of(&self, w: WireId) -> Attachment {
        let v = &self.bottom[&w];
        debug_assert_eq!(v.len(), 1);
        v[0]
    }
}

/// Side of a transistor, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSide {
    Top,
    Bottom,
}

impl fmt::Display for FaceSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceSide::Top => "top",
            FaceSide::Bottom => "bottom",
        })
    }
}

/// Everything [`Diagram::validate`] found, in one pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<DiagramViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[DiagramViolation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagramViolation {
    NoWires,
    EmptyFrameTop,
    EmptyFrameBottom,
    EmptyFace {
        transistor: TransistorId,
        face: FaceSide,
    },
    DanglingWire {
        wire: WireId,
        context: String,
    },
    MissingTopContact {
        wire: WireId,
    },
    MultipleTopContacts {
        wire: WireId,
    },
    MissingBottomContact {
        wire: WireId,
    },
    MultipleBottomContacts {
        wire: WireId,
    },
    LabelOutsideAlphabet {
        wire: WireId,
        label: Generator,
    },
    NotARelation {
        transistor: TransistorId,
        top: String,
        bottom: String,
    },
    OrderCycle {
        transistors: Vec<TransistorId>,
    },
}

impl fmt::Display for DiagramViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramViolation::NoWires => f.write_str("diagram has no wires"),
            DiagramViolation::EmptyFrameTop => f.write_str("frame top is empty"),
            DiagramViolation::EmptyFrameBottom => f.write_str("frame bottom is empty"),
            DiagramViolation::EmptyFace { transistor, face } => {
                write!(f, "{transistor}: {face} face is empty")
            }
            DiagramViolation::DanglingWire { wire, context } => {
                write!(f, "{context} references undeclared wire {wire}")
            }
            DiagramViolation::MissingTopContact { wire } => {
                write!(f, "{wire} has no top contact")
            }
            DiagramViolation::MultipleTopContacts { wire } => {
                write!(f, "{wire} has more than one top contact")
            }
            DiagramViolation::MissingBottomContact { wire } => {
                write!(f, "{wire} has no bottom contact")
            }
            DiagramViolation::MultipleBottomContacts { wire } => {
                write!(f, "{wire} has more than one bottom contact")
            }
            DiagramViolation::LabelOutsideAlphabet { wire, label } => {
                write!(f, "{wire}: label `{label}` is not in the alphabet")
            }
            DiagramViolation::NotARelation {
                transistor,
                top,
                bottom,
            } => write!(
                f,
                "{transistor}: face words `{top}` / `{bottom}` form no relation in either orientation"
            ),
            DiagramViolation::OrderCycle { transistors } => {
                write!(f, "below/above order has a cycle:")?;
                for t in transistors {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
        }
    }
}

/// Assembles a diagram piece by piece; ids are minted sequentially.
pub struct DiagramBuilder {
    presentation: Arc<Presentation>,
    wires: BTreeMap<WireId, Generator>,
    transistors: BTreeMap<TransistorId, Transistor>,
    frame_top: Vec<WireId>,
    frame_bottom: Vec<WireId>,
    next_wire: u32,
    next_transistor: u32,
}

impl DiagramBuilder {
    pub fn new(presentation: Arc<Presentation>) -> Self {
        DiagramBuilder {
            presentation,
            wires: BTreeMap::new(),
            transistors: BTreeMap::new(),
            frame_top: Vec::new(),
            frame_bottom: Vec::new(),
            next_wire: 0,
            next_transistor: 0,
        }
    }

    pub fn wire(&mut self, label: Generator) -> WireId {
        let id = WireId(self.next_wire);
        self.next_wire += 1;
        self.wires.insert(id, label);
        id
    }

    /// Wire with a caller-chosen id, used by the `.bdg` parser so that file
    /// ids survive parsing.
    pub(crate) fn wire_with_id(&mut self, raw: u32, label: Generator) -> WireId {
        let id = WireId(raw);
        self.next_wire = self.next_wire.max(raw + 1);
        self.wires.insert(id, label);
        id
    }

    pub fn transistor(&mut self, top_face: Vec<WireId>, bottom_face: Vec<WireId>) -> TransistorId {
        let id = TransistorId(self.next_transistor);
        self.next_transistor += 1;
        self.transistors.insert(
            id,
            Transistor {
                top_face,
                bottom_face,
            },
        );
        id
    }

    pub(crate) fn transistor_with_id(
        &mut self,
        raw: u32,
        top_face: Vec<WireId>,
        bottom_face: Vec<WireId>,
    ) -> TransistorId {
        let id = TransistorId(raw);
        self.next_transistor = self.next_transistor.max(raw + 1);
        self.transistors.insert(
            id,
            Transistor {
                top_face,
                bottom_face,
            },
        );
        id
    }

    pub fn frame_top(&mut self, wires: Vec<WireId>) {
        self.frame_top = wires;
    }

    pub fn frame_bottom(&mut self, wires: Vec<WireId>) {
        self.frame_bottom = wires;
    }

    /// Finishes without validating; pair with [`Diagram::validate`].
    pub fn into_diagram(self) -> Diagram {
        Diagram {
            presentation: self.presentation,
            wires: self.wires,
            transistors: self.transistors,
            frame_top: self.frame_top,
            frame_bottom: self.frame_bottom,
        }
    }

    /// Finishes and validates.
    pub fn build(self) -> Result<Diagram> {
        let d = self.into_diagram();
        let report = d.validate();
        if report.is_ok() {
            Ok(d)
        } else {
            Err(Error::InvalidDiagram(report.to_string()))
        }
    }
}

/// True when both diagrams are over the same presentation content.
pub fn same_presentation(d1: &Diagram, d2: &Diagram) -> bool {
    Arc::ptr_eq(&d1.presentation, &d2.presentation) || d1.presentation == d2.presentation
}

/// The transistor-free diagram on `w`: one wire per letter, frame top to
/// frame bottom, no crossings.
pub fn identity_diagram(presentation: &Arc<Presentation>, w: &Word) -> Result<Diagram> {
    permutation_diagram(presentation, w, &identity_permutation(w.len()))
}

fn identity_permutation(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// The transistor-free diagram on `w` whose wire at top slot `i` descends to
/// bottom slot `perm[i]`.
pub fn permutation_diagram(
    presentation: &Arc<Presentation>,
    w: &Word,
    perm: &[usize],
) -> Result<Diagram> {
    let n = w.len();
    if perm.len() != n {
        return Err(Error::BadPermutation {
            expected: n,
            detail: format!("got {} entries", perm.len()),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(Error::BadPermutation {
                expected: n,
                detail: format!("entry {p} out of range"),
            });
        }
        if seen[p] {
            return Err(Error::BadPermutation {
                expected: n,
                detail: format!("slot {p} hit twice"),
            });
        }
        seen[p] = true;
    }
    for g in w.letters() {
        if !presentation.has_generator(g) {
            return Err(Error::InvalidDiagram(format!(
                "label `{g}` is not in the alphabet"
            )));
        }
    }

    let mut b = DiagramBuilder::new(Arc::clone(presentation));
    let ids: Vec<WireId> = w.letters().iter().map(|g| b.wire(g.clone())).collect();
    let mut bottom = vec![ids[0]; n];
    for (i, &id) in ids.iter().enumerate() {
        bottom[perm[i]] = id;
    }
    b.frame_top(ids.clone());
    b.frame_bottom(bottom);
    Ok(b.into_diagram())
}

/// Stacks `d1` on top of `d2`, fusing `d1`'s frame-bottom wires slot by slot
/// with `d2`'s frame-top wires.
///
/// Requires the same presentation content and `bottom_label(d1)` equal to
/// `top_label(d2)` letter for letter.
pub fn concatenate(d1: &Diagram, d2: &Diagram) -> Result<Diagram> {
    if !same_presentation(d1, d2) {
        return Err(Error::PresentationMismatch);
    }
    let interface = d1.bottom_label();
    let top2 = d2.top_label();
    if interface != top2 {
        return Err(Error::LabelMismatch {
            bottom: interface.to_string(),
            top: top2.to_string(),
        });
    }

    let mut b = DiagramBuilder::new(Arc::clone(&d1.presentation));
    let mut m1: HashMap<WireId, WireId> = HashMap::new();
    let mut m2: HashMap<WireId, WireId> = HashMap::new();

    for (&id, label) in &d1.wires {
        m1.insert(id, b.wire(label.clone()));
    }
    let top2_set: HashSet<WireId> = d2.frame_top.iter().copied().collect();
    for (&id, label) in &d2.wires {
        if !top2_set.contains(&id) {
            m2.insert(id, b.wire(label.clone()));
        }
    }
    // The fused wire keeps d1's identity: its top contact is d1's, its
    // bottom contact is taken from d2's frame-top wire at the same slot.
    for (slot, &tw) in d2.frame_top.iter().enumerate() {
        m2.insert(tw, m1[&d1.frame_bottom[slot]]);
    }

    for (_, t) in &d1.transistors {
        b.transistor(
            t.top_face.iter().map(|w| m1[w]).collect(),
            t.bottom_face.iter().map(|w| m1[w]).collect(),
        );
    }
    for (_, t) in &d2.transistors {
        b.transistor(
            t.top_face.iter().map(|w| m2[w]).collect(),
            t.bottom_face.iter().map(|w| m2[w]).collect(),
        );
    }
    b.frame_top(d1.frame_top.iter().map(|w| m1[w]).collect());
    b.frame_bottom(d2.frame_bottom.iter().map(|w| m2[w]).collect());
    Ok(b.into_diagram())
}

/// Vertical mirror: swaps every top with its bottom, preserving all
/// left-to-right orders. An involution, and an anti-homomorphism for
/// [`concatenate`].
pub fn invert(d: &Diagram) -> Diagram {
    let transistors = d
        .transistors
        .iter()
        .map(|(&id, t)| {
            (
                id,
                Transistor {
                    top_face: t.bottom_face.clone(),
                    bottom_face: t.top_face.clone(),
                },
            )
        })
        .collect();
    Diagram {
        presentation: Arc::clone(&d.presentation),
        wires: d.wires.clone(),
        transistors,
        frame_top: d.frame_bottom.clone(),
        frame_bottom: d.frame_top.clone(),
    }
}

/// Rebuilds `d` with every id renamed through the two maps, which must be
/// total bijections on the diagram's wires and transistors.
pub(crate) fn rebuild_with_ids(
    d: &Diagram,
    wire_map: &HashMap<WireId, WireId>,
    tr_map: &HashMap<TransistorId, TransistorId>,
) -> Diagram {
    let rename = |ids: &[WireId]| ids.iter().map(|w| wire_map[w]).collect::<Vec<_>>();
    Diagram {
        presentation: Arc::clone(&d.presentation),
        wires: d
            .wires
            .iter()
            .map(|(w, g)| (wire_map[w], g.clone()))
            .collect(),
        transistors: d
            .transistors
            .iter()
            .map(|(t, tr)| {
                (
                    tr_map[t],
                    Transistor {
                        top_face: rename(&tr.top_face),
                        bottom_face: rename(&tr.bottom_face),
                    },
                )
            })
            .collect(),
        frame_top: rename(&d.frame_top),
        frame_bottom: rename(&d.frame_bottom),
    }
}

// ---------------------------------------------------------------------------
// .bdg text format

/// Extracts the `presentation:` reference from `.bdg` text without parsing
/// the rest; callers resolve it and then run [`parse_bdg`].
pub fn bdg_presentation_ref(text: &str) -> Result<String> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("presentation:") {
            return Ok(rest.trim().to_string());
        }
        if line == "diagram" {
            continue;
        }
        return Err(Error::parse(
            lineno + 1,
            1,
            "expected `presentation:` near the top",
        ));
    }
    Err(Error::parse(1, 1, "missing `presentation:` line"))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses `.bdg` text against an already-resolved presentation.
///
/// Checks grammar and id well-formedness only; run [`Diagram::validate`] on
/// the result before computing with it.
pub fn parse_bdg(text: &str, presentation: Arc<Presentation>) -> Result<Diagram> {
    let mut b = DiagramBuilder::new(presentation);
    let mut saw_header = false;
    let mut saw_presentation = false;
    let mut wire_count: Option<u32> = None;
    let mut declared: HashSet<u32> = HashSet::new();
    let mut transistor_ids: HashSet<u32> = HashSet::new();
    let mut frame_top: Option<Vec<WireId>> = None;
    let mut frame_bottom: Option<Vec<WireId>> = None;
    let mut pending_transistors: Vec<(u32, Vec<WireId>, Vec<WireId>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != "diagram" {
                return Err(Error::parse(lineno, 1, "expected `diagram` header"));
            }
            saw_header = true;
            continue;
        }
        if !saw_presentation {
            if line.strip_prefix("presentation:").is_none() {
                return Err(Error::parse(lineno, 1, "expected `presentation:` line"));
            }
            saw_presentation = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix("wires:") {
            if wire_count.is_some() {
                return Err(Error::parse(lineno, 1, "second `wires:` line"));
            }
            let n: u32 = rest
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, 1, "bad wire count"))?;
            wire_count = Some(n);
            continue;
        }
        let Some(n) = wire_count else {
            return Err(Error::parse(lineno, 1, "expected `wires:` line first"));
        };
        if let Some(rest) = line.strip_prefix("transistor ") {
            let (name, faces) = rest
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, 1, "expected `transistor t<j>: ...`"))?;
            let raw_id = parse_id(name.trim(), 't', lineno)?;
            if !transistor_ids.insert(raw_id) {
                return Err(Error::parse(lineno, 1, format!("duplicate transistor t{raw_id}")));
            }
            let faces = faces.trim();
            let top_tag = faces
                .strip_prefix("top=")
                .ok_or_else(|| Error::parse(lineno, 1, "expected `top=[...]`"))?;
            let (top, rest_after) = parse_list(top_tag, n, &declared, lineno)?;
            let bottom_tag = rest_after
                .trim()
                .strip_prefix("bottom=")
                .ok_or_else(|| Error::parse(lineno, 1, "expected `bottom=[...]`"))?;
            let (bottom, tail) = parse_list(bottom_tag, n, &declared, lineno)?;
            if !tail.trim().is_empty() {
                return Err(Error::parse(lineno, 1, "trailing junk after faces"));
            }
            pending_transistors.push((raw_id, top, bottom));
            continue;
        }
        if let Some(rest) = line.strip_prefix("frametop:") {
            if frame_top.is_some() {
                return Err(Error::parse(lineno, 1, "second `frametop:` line"));
            }
            let (ids, tail) = parse_list(rest.trim(), n, &declared, lineno)?;
            if !tail.trim().is_empty() {
                return Err(Error::parse(lineno, 1, "trailing junk after frametop"));
            }
            frame_top = Some(ids);
            continue;
        }
        if let Some(rest) = line.strip_prefix("framebottom:") {
            if frame_bottom.is_some() {
                return Err(Error::parse(lineno, 1, "second `framebottom:` line"));
            }
            let (ids, tail) = parse_list(rest.trim(), n, &declared, lineno)?;
            if !tail.trim().is_empty() {
                return Err(Error::parse(lineno, 1, "trailing junk after framebottom"));
            }
            frame_bottom = Some(ids);
            continue;
        }
        // A wire declaration: `w<i>: <label>`.
        if let Some((name, label)) = line.split_once(':') {
            let raw_id = parse_id(name.trim(), 'w', lineno)?;
            if raw_id >= n {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("wire index {raw_id} out of range (wires: {n})"),
                ));
            }
            if !declared.insert(raw_id) {
                return Err(Error::parse(lineno, 1, format!("duplicate wire w{raw_id}")));
            }
            let label = label.trim();
            let g = Generator::new(label).map_err(|e| Error::parse(lineno, 1, e.to_string()))?;
            b.wire_with_id(raw_id, g);
            continue;
        }
        return Err(Error::parse(lineno, 1, "unrecognized line"));
    }

    if !saw_header {
        return Err(Error::parse(1, 1, "missing `diagram` header"));
    }
    let n = wire_count.ok_or_else(|| Error::parse(1, 1, "missing `wires:` line"))?;
    if declared.len() as u32 != n {
        return Err(Error::parse(
            1,
            1,
            format!("declared {} wires, expected {}", declared.len(), n),
        ));
    }
    for (raw, top, bottom) in pending_transistors {
        b.transistor_with_id(raw, top, bottom);
    }
    b.frame_top(frame_top.ok_or_else(|| Error::parse(1, 1, "missing `frametop:` line"))?);
    b.frame_bottom(frame_bottom.ok_or_else(|| Error::parse(1, 1, "missing `framebottom:` line"))?);
    Ok(b.into_diagram())
}

fn parse_id(token: &str, prefix: char, lineno: usize) -> Result<u32> {
    let rest = token
        .strip_prefix(prefix)
        .ok_or_else(|| Error::parse(lineno, 1, format!("expected `{prefix}<number>`, got `{token}`")))?;
    rest.parse()
        .map_err(|_| Error::parse(lineno, 1, format!("bad id `{token}`")))
}

/// Parses `[w0 w1 ...]` returning the ids and the remainder of the line.
fn parse_list<'a>(
    s: &'a str,
    wire_count: u32,
    declared: &HashSet<u32>,
    lineno: usize,
) -> Result<(Vec<WireId>, &'a str)> {
    let s = s.trim_start();
    let inner_start = s
        .strip_prefix('[')
        .ok_or_else(|| Error::parse(lineno, 1, "expected `[`"))?;
    let close = inner_start
        .find(']')
        .ok_or_else(|| Error::parse(lineno, 1, "missing `]`"))?;
    let inner = &inner_start[..close];
    let mut ids = Vec::new();
    for tok in inner.split_whitespace() {
        let raw = parse_id(tok, 'w', lineno)?;
        if raw >= wire_count || !declared.contains(&raw) {
            return Err(Error::parse(
                lineno,
                1,
                format!("reference to undeclared wire w{raw}"),
            ));
        }
        ids.push(WireId(raw));
    }
    Ok((ids, &inner_start[close + 1..]))
}

/// Canonical `.bdg` serialization.
///
/// Ids are compacted to `0..n` in ascending original order, so output never
/// depends on how sparse the in-memory ids became.
pub fn serialize_bdg(d: &Diagram, presentation_ref: &str) -> String {
    let wire_index: BTreeMap<WireId, usize> = d
        .wires
        .keys()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let list = |ids: &[WireId]| -> String {
        let toks: Vec<String> = ids.iter().map(|w| format!("w{}", wire_index[w])).collect();
        format!("[{}]", toks.join(" "))
    };

    let mut out = String::from("diagram\n");
    out.push_str(&format!("presentation: {presentation_ref}\n"));
    out.push_str(&format!("wires: {}\n", d.wires.len()));
    for (i, (_, label)) in d.wires.iter().enumerate() {
        out.push_str(&format!("w{i}: {label}\n"));
    }
    for (i, (_, t)) in d.transistors.iter().enumerate() {
        out.push_str(&format!(
            "transistor t{i}: top={} bottom={}\n",
            list(&t.top_face),
            list(&t.bottom_face)
        ));
    }
    out.push_str(&format!("frametop: {}\n", list(&d.frame_top)));
    out.push_str(&format!("framebottom: {}\n", list(&d.frame_bottom)));
    out
}
