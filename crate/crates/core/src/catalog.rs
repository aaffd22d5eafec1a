//! Stock presentations, eventually-translation maps on rays, and the
//! relabelling embedding.
//!
//! The catalog covers three families, each named by a short reference:
//!
//! - `thompson(d)`: one generator expanding into d copies of itself; the
//!   space of ends is the d-ary Cantor set.
//! - `houghton(n)`: a root splitting into n rays, each ray peeling one
//!   isolated end per step; the space is n rays of discrete points plus
//!   their limit ends. Elements act as translations near infinity, captured
//!   by [`HoughtonMap`].
//! - `qaut`: one generator expanding into `x a x`; ends mix branch and leaf
//!   steps.
//!
//! Renaming `a` to `x` turns every qaut relation instance into a
//! `thompson(3)` one, giving an injective, reduction-preserving map of
//! diagram groups ([`relabel_embed`]).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::fss::{canonicalize, triple_from_diagram, DefiningTriple, FSSElement};
use crate::presentation::{parse_sgp, Presentation};
use crate::treespace::{Address, TreeSpace};

/// A catalog entry, written `thompson(d)`, `houghton(n)`, or `qaut`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Thompson { arity: usize },
    Houghton { rays: usize },
    Qaut,
}

impl Builtin {
    pub fn presentation(&self) -> Presentation {
        let text = match self {
            Builtin::Thompson { arity } => {
                format!("gen: x\nrel: x ->{}\n", " x".repeat(*arity))
            }
            Builtin::Houghton { rays: 1 } => "gen: a r\nrel: r -> a r\n".to_string(),
            Builtin::Houghton { rays } => {
                let mut gens = String::from("gen: a r");
                let mut rels = String::from("rel: r ->");
                for i in 1..=*rays {
                    gens.push_str(&format!(" x{i}"));
                    rels.push_str(&format!(" x{i}"));
                }
                let mut text = format!("{gens}\n{rels}\n");
                for i in 1..=*rays {
                    text.push_str(&format!("rel: x{i} -> a x{i}\n"));
                }
                text
            }
            Builtin::Qaut => "gen: a x\nrel: x -> x a x\n".to_string(),
        };
        parse_sgp(&text).expect("catalog text is well-formed")
    }

    pub fn base_name(&self) -> &'static str {
        match self {
            Builtin::Thompson { .. } | Builtin::Qaut => "x",
            Builtin::Houghton { .. } => "r",
        }
    }

    pub fn space(&self) -> TreeSpace {
        let p = Arc::new(self.presentation());
        let base = p.generator(self.base_name()).unwrap().clone();
        TreeSpace::new(p, base).expect("catalog entries are tree-like")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Thompson { arity } => write!(f, "thompson({arity})"),
            Builtin::Houghton { rays } => write!(f, "houghton({rays})"),
            Builtin::Qaut => f.write_str("qaut"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadBuiltin(format!("unknown catalog reference `{s}`"));
        if s == "qaut" {
            return Ok(Builtin::Qaut);
        }
        let inner = |name: &str| -> Option<usize> {
            s.strip_prefix(name)?
                .strip_prefix('(')?
                .strip_suffix(')')?
                .parse()
                .ok()
        };
        if let Some(arity) = inner("thompson") {
            if arity < 2 {
                return Err(Error::BadBuiltin(format!(
                    "thompson needs arity at least 2, got {arity}"
                )));
            }
            return Ok(Builtin::Thompson { arity });
        }
        if let Some(rays) = inner("houghton") {
            if rays == 0 {
                return Err(Error::BadBuiltin("houghton needs at least one ray".into()));
            }
            return Ok(Builtin::Houghton { rays });
        }
        Err(bad())
    }
}

// ---------------------------------------------------------------------------
// Eventually-translation maps on the ray spaces

/// Ray-point addresses in the houghton(n) tree. Ray i (1-based) hangs under
/// the root's child i-1; with one ray the root itself starts the spine.
/// Spine vertices repeat child 1; child 0 is the isolated end (i, j).
pub fn spine_address(rays: usize, ray: usize, depth: usize) -> Address {
    let mut c = Vec::with_capacity(depth + 1);
    if rays > 1 {
        c.push((ray - 1) as u32);
    }
    c.extend(std::iter::repeat(1).take(depth));
    Address::from_components(c)
}

/// Address of the isolated end (ray, index).
pub fn point_address(rays: usize, ray: usize, index: usize) -> Address {
    let mut c = spine_address(rays, ray, index).components().to_vec();
    c.push(0);
    Address::from_components(c)
}

/// A bijection of the ray space that translates each ray near infinity:
/// past the cut `shifts[i].0`, ray i's points slide by
/// `shifts[i].1 - shifts[i].0`; the finitely many points before the cuts
/// map by the exception table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoughtonMap {
    rays: usize,
    /// (domain cut, range cut) per ray, 0-indexed by ray-1.
    shifts: Vec<(usize, usize)>,
    /// (ray, index) -> (ray, index), covering exactly the points before the
    /// cuts on each side.
    exceptions: BTreeMap<(usize, usize), (usize, usize)>,
}

impl HoughtonMap {
    pub fn new(
        rays: usize,
        shifts: Vec<(usize, usize)>,
        exceptions: Vec<((usize, usize), (usize, usize))>,
    ) -> Result<Self> {
        if rays == 0 {
            return Err(Error::BadTranslationSpec("no rays".into()));
        }
        if shifts.len() != rays {
            return Err(Error::BadTranslationSpec(format!(
                "{} shifts for {rays} rays",
                shifts.len()
            )));
        }
        let mut table: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for (from, to) in &exceptions {
            if table.insert(*from, *to).is_some() {
                return Err(Error::BadTranslationSpec(format!(
                    "point ({}, {}) mapped twice",
                    from.0, from.1
                )));
            }
        }
        let domain_peel: Vec<(usize, usize)> = (1..=rays)
            .flat_map(|i| (0..shifts[i - 1].0).map(move |j| (i, j)))
            .collect();
        let range_peel: Vec<(usize, usize)> = (1..=rays)
            .flat_map(|i| (0..shifts[i - 1].1).map(move |j| (i, j)))
            .collect();
        if table.len() != domain_peel.len() {
            return Err(Error::BadTranslationSpec(format!(
                "{} exceptions for {} points before the domain cuts",
                table.len(),
                domain_peel.len()
            )));
        }
        for p in &domain_peel {
            if !table.contains_key(p) {
                return Err(Error::BadTranslationSpec(format!(
                    "point ({}, {}) lies before its cut but has no exception",
                    p.0, p.1
                )));
            }
        }
        let mut targets: Vec<(usize, usize)> = table.values().copied().collect();
        targets.sort();
        let mut expected = range_peel;
        expected.sort();
        if targets != expected {
            return Err(Error::BadTranslationSpec(
                "exception targets must cover the points before the range cuts exactly".into(),
            ));
        }
        Ok(HoughtonMap {
            rays,
            shifts,
            exceptions: table,
        })
    }

    pub fn identity(rays: usize) -> Result<Self> {
        HoughtonMap::new(rays, vec![(0, 0); rays], Vec::new())
    }

    pub fn rays(&self) -> usize {
        self.rays
    }

    pub fn shifts(&self) -> &[(usize, usize)] {
        &self.shifts
    }

    pub fn exceptions(&self) -> &BTreeMap<(usize, usize), (usize, usize)> {
        &self.exceptions
    }

    /// Image of the point (ray, index).
    pub fn apply(&self, ray: usize, index: usize) -> Result<(usize, usize)> {
        if ray == 0 || ray > self.rays {
            return Err(Error::BadTranslationSpec(format!(
                "ray {ray} out of 1..={}",
                self.rays
            )));
        }
        let (d, e) = self.shifts[ray - 1];
        if index >= d {
            Ok((ray, index - d + e))
        } else {
            Ok(self.exceptions[&(ray, index)])
        }
    }

    /// Drops exceptions the translation formula already covers, pulling the
    /// cuts in as far as they go. Two maps are equal as bijections exactly
    /// when their normalized data match.
    pub fn normalize(&self) -> HoughtonMap {
        let mut shifts = self.shifts.clone();
        let mut exceptions = self.exceptions.clone();
        loop {
            let mut changed = false;
            for ray in 1..=self.rays {
                let (d, e) = shifts[ray - 1];
                if d > 0
                    && e > 0
                    && exceptions.get(&(ray, d - 1)) == Some(&(ray, e - 1))
                {
                    exceptions.remove(&(ray, d - 1));
                    shifts[ray - 1] = (d - 1, e - 1);
                    changed = true;
                }
            }
            if !changed {
                return HoughtonMap {
                    rays: self.rays,
                    shifts,
                    exceptions,
                };
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        let n = self.normalize();
        n.shifts.iter().all(|&(d, e)| d == 0 && e == 0) && n.exceptions.is_empty()
    }
}

/// Canonical triple of an eventually-translation map: each ray contributes
/// its tail ball past the cut, each peeled point its singleton ball.
pub fn houghton_build(map: &HoughtonMap) -> Result<FSSElement> {
    let map = map.normalize();
    let n = map.rays;
    let space = Arc::new(Builtin::Houghton { rays: n }.space());
    let mut pairs: Vec<(Address, Address)> = Vec::new();
    for ray in 1..=n {
        let (d, e) = map.shifts[ray - 1];
        pairs.push((spine_address(n, ray, d), spine_address(n, ray, e)));
        for j in 0..d {
            let (tr, tj) = map.exceptions[&(ray, j)];
            pairs.push((point_address(n, ray, j), point_address(n, tr, tj)));
        }
    }
    let t = DefiningTriple::from_pairs(space, &pairs)?;
    canonicalize(&t)
}

/// Reads a triple over a houghton presentation back as translation data.
/// The triple is canonicalized first; every ball of the ray tree is either
/// a spine tail or a single isolated end, so the canonical partitions
/// decode directly.
pub fn houghton_interpret(t: &DefiningTriple) -> Result<HoughtonMap> {
    let p = t.space().presentation();
    let gens = p.generators().len();
    let rays = if gens >= 3 { gens - 2 } else { 1 };
    let expected = Builtin::Houghton { rays };
    if p.as_ref() != &expected.presentation() || t.space().base().name() != "r" {
        return Err(Error::WrongPresentation {
            expected: "a houghton(n) presentation with base r".into(),
        });
    }

    let canon = canonicalize(t)?;
    if canon.is_identity() {
        return HoughtonMap::identity(rays);
    }
    let canon = canon.triple();

    let mut shifts = vec![(usize::MAX, usize::MAX); rays];
    let mut exceptions: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for (d, r) in canon.pairs() {
        let from = classify(rays, &d)?;
        let to = classify(rays, &r)?;
        match (from, to) {
            (RaySpot::Tail { ray, depth }, RaySpot::Tail { ray: ray2, depth: depth2 }) => {
                if ray != ray2 {
                    return Err(Error::BadTranslationSpec(format!(
                        "tail of ray {ray} maps onto ray {ray2}"
                    )));
                }
                shifts[ray - 1] = (depth, depth2);
            }
            (RaySpot::Point { ray, index }, RaySpot::Point { ray: r2, index: i2 }) => {
                exceptions.push(((ray, index), (r2, i2)));
            }
            _ => {
                return Err(Error::BadTranslationSpec(
                    "a tail ball is paired with a single end".into(),
                ))
            }
        }
    }
    for (i, s) in shifts.iter().enumerate() {
        if s.0 == usize::MAX {
            return Err(Error::BadTranslationSpec(format!(
                "ray {} has no tail ball in the domain",
                i + 1
            )));
        }
    }
    let map = HoughtonMap::new(rays, shifts, exceptions)?;
    debug_assert_eq!(map, map.normalize(), "canonical triples decode normalized");
    Ok(map)
}

/// The same reading for an `(r, r)`-diagram: extract the triple, then
/// decode. Dipole insertions never change the result — the triple comes
/// from the reduced diagram.
pub fn houghton_interpret_diagram(d: &Diagram) -> Result<HoughtonMap> {
    let gens = d.presentation().generators().len();
    let rays = if gens >= 3 { gens - 2 } else { 1 };
    let expected = Builtin::Houghton { rays };
    if d.presentation().as_ref() != &expected.presentation() {
        return Err(Error::WrongPresentation {
            expected: "a houghton(n) presentation with base r".into(),
        });
    }
    let space = Arc::new(expected.space());
    let t = triple_from_diagram(&space, d)?;
    houghton_interpret(&t)
}

enum RaySpot {
    Tail { ray: usize, depth: usize },
    Point { ray: usize, index: usize },
}

/// Splits a ball address of the ray tree into its ray and its role: spine
/// vertices (prefix then 1s) hold tails, a final 0 marks one isolated end.
fn classify(rays: usize, a: &Address) -> Result<RaySpot> {
    let comps = a.components();
    let (ray, rest) = if rays == 1 {
        (1, comps)
    } else {
        match comps.split_first() {
            Some((&first, rest)) => (first as usize + 1, rest),
            None => {
                return Err(Error::BadTranslationSpec(
                    "the root ball mixes all rays".into(),
                ))
            }
        }
    };
    match rest.split_last() {
        None => Ok(RaySpot::Tail { ray, depth: 0 }),
        Some((&last, spine)) if spine.iter().all(|&c| c == 1) => match last {
            1 => Ok(RaySpot::Tail {
                ray,
                depth: rest.len(),
            }),
            0 => Ok(RaySpot::Point {
                ray,
                index: spine.len(),
            }),
            _ => Err(Error::BadTranslationSpec(format!("stray ball {a}"))),
        },
        _ => Err(Error::BadTranslationSpec(format!("stray ball {a}"))),
    }
}

// ---------------------------------------------------------------------------
// The relabelling embedding

/// Renames every qaut label to `x`, turning a diagram over qaut into one
/// over thompson(3): each relation instance `x -> x a x` becomes
/// `x -> x x x`. Concatenation commutes with the renaming, and a renamed
/// diagram is reduced exactly when the original is, so distinct reduced
/// diagrams stay distinct.
pub fn relabel_embed(d: &Diagram) -> Result<Diagram> {
    let qaut = Builtin::Qaut.presentation();
    if d.presentation().as_ref() != &qaut {
        return Err(Error::WrongPresentation {
            expected: "qaut".into(),
        });
    }
    let target = Arc::new(Builtin::Thompson { arity: 3 }.presentation());
    let x = target.generator("x").unwrap().clone();
    let out = Diagram {
        wires: d.wires.keys().map(|w| (*w, x.clone())).collect(),
        transistors: d.transistors.clone(),
        frame_top: d.frame_top.clone(),
        frame_bottom: d.frame_bottom.clone(),
        presentation: target,
    };
    debug_assert!(out.validate().is_ok());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Translation map files

/// Parses `.hmap` text: an `n:` line, one `shift i: d -> e` line per ray,
/// and one `exc: ray,idx -> ray,idx` line per exception.
pub fn parse_hmap(text: &str) -> Result<HoughtonMap> {
    let mut rays: Option<usize> = None;
    let mut shifts: Vec<Option<(usize, usize)>> = Vec::new();
    let mut exceptions: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => raw[..i].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            column: 1,
            message,
        };
        if let Some(rest) = line.strip_prefix("n:") {
            if rays.is_some() {
                return Err(err("second `n:` line".into()));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(format!("bad ray count `{}`", rest.trim())))?;
            if n == 0 {
                return Err(err("ray count must be positive".into()));
            }
            rays = Some(n);
            shifts = vec![None; n];
        } else if let Some(rest) = line.strip_prefix("shift") {
            let n = rays.ok_or_else(|| err("`shift` before `n:`".into()))?;
            let (ray_part, rhs) = rest
                .split_once(':')
                .ok_or_else(|| err("shift lines read `shift <ray>: <d> -> <e>`".into()))?;
            let ray: usize = ray_part
                .trim()
                .parse()
                .map_err(|_| err(format!("bad ray number `{}`", ray_part.trim())))?;
            if ray == 0 || ray > n {
                return Err(err(format!("ray {ray} out of 1..={n}")));
            }
            if shifts[ray - 1].is_some() {
                return Err(err(format!("second shift for ray {ray}")));
            }
            let (d, e) = rhs
                .split_once("->")
                .ok_or_else(|| err("shift lines read `shift <ray>: <d> -> <e>`".into()))?;
            let d: usize = d
                .trim()
                .parse()
                .map_err(|_| err(format!("bad cut `{}`", d.trim())))?;
            let e: usize = e
                .trim()
                .parse()
                .map_err(|_| err(format!("bad cut `{}`", e.trim())))?;
            shifts[ray - 1] = Some((d, e));
        } else if let Some(rest) = line.strip_prefix("exc:") {
            if rays.is_none() {
                return Err(err("`exc:` before `n:`".into()));
            }
            let (from, to) = rest
                .split_once("->")
                .ok_or_else(|| err("exception lines read `exc: <ray>,<idx> -> <ray>,<idx>`".into()))?;
            let parse_pt = |s: &str| -> Result<(usize, usize)> {
                let (r, i) = s
                    .trim()
                    .split_once(',')
                    .ok_or_else(|| err(format!("bad point `{}`", s.trim())))?;
                let r = r.trim().parse().map_err(|_| err(format!("bad ray `{r}`")))?;
                let i = i
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad index `{i}`")))?;
                Ok((r, i))
            };
            exceptions.push((parse_pt(from)?, parse_pt(to)?));
        } else {
            return Err(err(format!("unrecognized line `{line}`")));
        }
    }
    let rays = rays.ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing `n:` line".into(),
    })?;
    let shifts: Vec<(usize, usize)> = shifts
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or(Error::Parse {
                line: 1,
                column: 1,
                message: format!("missing shift for ray {}", i + 1),
            })
        })
        .collect::<Result<_>>()?;
    HoughtonMap::new(rays, shifts, exceptions)
}

pub fn serialize_hmap(map: &HoughtonMap) -> String {
    let mut out = format!("n: {}\n", map.rays);
    for (i, (d, e)) in map.shifts.iter().enumerate() {
        out.push_str(&format!("shift {}: {d} -> {e}\n", i + 1));
    }
    for (from, to) in &map.exceptions {
        out.push_str(&format!("exc: {},{} -> {},{}\n", from.0, from.1, to.0, to.1));
    }
    out
}
