//! Seeded random generation: partitions, triples, diagrams with planted
//! dipoles, and point prefixes. Everything is driven by a caller-supplied
//! RNG so runs are reproducible; [`rng_from_env`] honors `DIPOLE_SEED`.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{find_dipoles, insert_dipole, reduce_dipole, DipoleInsertion};
use crate::diagram::{Diagram, WireId};
use crate::fss::{psi, DefiningTriple};
use crate::presentation::Generator;
use crate::treespace::{Address, Partition, PointPrefix, TreeSpace};

const DEFAULT_SEED: u64 = 0x5eed_ba11;

/// Seed from the `DIPOLE_SEED` environment variable, or a fixed default.
pub fn seed_from_env() -> u64 {
    std::env::var("DIPOLE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn rng_from_env() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_from_env())
}

/// Expands the one-ball partition `expansions` times at random non-leaf
/// members (fewer when leaves run out).
pub fn random_partition(
    space: &TreeSpace,
    rng: &mut impl Rng,
    expansions: usize,
) -> Partition {
    let mut members = vec![Address::root()];
    for _ in 0..expansions {
        let candidates: Vec<usize> = (0..members.len())
            .filter(|&i| !space.is_leaf(&members[i]).unwrap())
            .collect();
        let Some(&pick) = candidates.as_slice().choose(rng) else {
            break;
        };
        let a = members.swap_remove(pick);
        let arity = space.children(&a).unwrap().len();
        for i in 0..arity {
            members.push(a.child(i as u32));
        }
    }
    space.partition(members).expect("expansions keep a partition")
}

/// Random triple: subdivide the identity, scramble which same-labelled
/// range ball each domain ball hits, then subdivide some more so the two
/// partitions take different shapes.
pub fn random_triple(
    space: &Arc<TreeSpace>,
    rng: &mut impl Rng,
    expansions: usize,
) -> DefiningTriple {
    let first = rng.random_range(0..=expansions);
    let t = DefiningTriple::identity(Arc::clone(space));
    let t = subdivide_randomly(t, rng, first);
    let t = scramble_range(&t, rng);
    subdivide_randomly(t, rng, expansions - first)
}

fn subdivide_randomly(
    t: DefiningTriple,
    rng: &mut impl Rng,
    times: usize,
) -> DefiningTriple {
    let mut t = t;
    for _ in 0..times {
        let space = Arc::clone(t.space());
        let candidates: Vec<Address> = t
            .domain()
            .addresses()
            .iter()
            .filter(|a| !space.is_leaf(a).unwrap())
            .cloned()
            .collect();
        let Some(at) = candidates.as_slice().choose(rng) else {
            break;
        };
        t = t.subdivide(at).expect("non-leaf domain ball");
    }
    t
}

/// Permutes the range balls within each label class.
fn scramble_range(t: &DefiningTriple, rng: &mut impl Rng) -> DefiningTriple {
    let pairs = t.pairs();
    let mut groups: BTreeMap<Generator, Vec<usize>> = BTreeMap::new();
    for (i, (d, _)) in pairs.iter().enumerate() {
        groups
            .entry(t.space().label_of(d).unwrap())
            .or_default()
            .push(i);
    }
    let mut new_pairs = pairs.clone();
    for idxs in groups.values() {
        let mut shuffled = idxs.clone();
        shuffled.shuffle(rng);
        for (&slot, &source) in idxs.iter().zip(shuffled.iter()) {
            new_pairs[slot].1 = pairs[source].1.clone();
        }
    }
    DefiningTriple::from_pairs(Arc::clone(t.space()), &new_pairs)
        .expect("label classes were preserved")
}

/// Diagram of a random triple with up to `insertions` planted dipoles on
/// top — still one class with the clean translation.
pub fn random_diagram(
    space: &Arc<TreeSpace>,
    rng: &mut impl Rng,
    expansions: usize,
    insertions: usize,
) -> Diagram {
    let mut d = psi(&random_triple(space, rng, expansions));
    for _ in 0..insertions {
        if let Some(next) = try_random_insertion(&d, rng) {
            d = next;
        }
    }
    d
}

/// One random dipole insertion; `None` when no label pattern fits or every
/// attempt would close an order cycle.
fn try_random_insertion(d: &Diagram, rng: &mut impl Rng) -> Option<Diagram> {
    let p = Arc::clone(d.presentation());
    for _ in 0..8 {
        let relation = rng.random_range(0..p.relations().len());
        let (left, right) = &p.relations()[relation];
        let expand = rng.random_bool(0.5);
        let target = if expand { left } else { right };
        let mut wires: Vec<WireId> = Vec::with_capacity(target.len());
        let mut used: HashSet<WireId> = HashSet::new();
        let mut stuck = false;
        for letter in target.letters() {
            let candidates: Vec<WireId> = d
                .wires()
                .filter(|(w, g)| *g == letter && !used.contains(w))
                .map(|(w, _)| w)
                .collect();
            match candidates.as_slice().choose(rng) {
                Some(&w) => {
                    used.insert(w);
                    wires.push(w);
                }
                None => {
                    stuck = true;
                    break;
                }
            }
        }
        if stuck {
            continue;
        }
        let at = if expand {
            DipoleInsertion::Expand { wires, relation }
        } else {
            DipoleInsertion::Contract { wires, relation }
        };
        if let Ok(next) = insert_dipole(d, &at) {
            return Some(next);
        }
    }
    None
}

/// Renames all wire and transistor ids by random permutations: the same
/// diagram under different bookkeeping. Canonical forms must not move.
pub fn permute_ids(d: &Diagram, rng: &mut impl Rng) -> Diagram {
    let mut wire_new: Vec<WireId> = d.wires().map(|(w, _)| w).collect();
    wire_new.shuffle(rng);
    let wire_map: std::collections::HashMap<WireId, WireId> = d
        .wires()
        .map(|(w, _)| w)
        .zip(wire_new)
        .collect();
    let mut tr_new: Vec<crate::diagram::TransistorId> =
        d.transistors().map(|(t, _)| t).collect();
    tr_new.shuffle(rng);
    let tr_map: std::collections::HashMap<_, _> = d
        .transistors()
        .map(|(t, _)| t)
        .zip(tr_new)
        .collect();
    crate::diagram::rebuild_with_ids(d, &wire_map, &tr_map)
}

/// Reduces like [`crate::calculus::reduce`] but removes a random dipole
/// each step; the endpoint is the same by confluence.
pub fn reduce_random_order(d: &Diagram, rng: &mut impl Rng) -> Diagram {
    let mut cur = d.clone();
    loop {
        let dipoles = find_dipoles(&cur);
        if dipoles.is_empty() {
            return cur;
        }
        let occ = &dipoles[rng.random_range(0..dipoles.len())];
        cur = reduce_dipole(&cur, occ).expect("fresh occurrence");
    }
}

/// Random descent from the root: stops at a leaf (terminal) or after
/// `max_len` steps (non-terminal).
pub fn random_point(space: &TreeSpace, rng: &mut impl Rng, max_len: usize) -> PointPrefix {
    let mut a = Address::root();
    loop {
        let arity = space.children(&a).unwrap().len();
        if arity == 0 {
            return space.point(a, true).unwrap();
        }
        if a.len() >= max_len {
            return space.point(a, false).unwrap();
        }
        a = a.child(rng.random_range(0..arity) as u32);
    }
}
