//! Semigroup presentations: alphabets, words, relations, the tree-like gate,
//! and the `.sgp` text format.
//!
//! A presentation is the ground data everything else builds on: diagrams
//! carry wire labels drawn from its alphabet, and tree spaces grow from its
//! relations. Presentations are immutable after construction and compared by
//! content.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Reserved address token; never a generator name.
pub const EPS: &str = "eps";

/// One letter of a presentation's alphabet.
///
/// Names are nonempty ASCII `[A-Za-z0-9_]+` and never the reserved token
/// `eps`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(String);

impl Generator {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        check_token(&name)?;
        Ok(Generator(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_token(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::Presentation("empty generator name".into()));
    }
    if name == EPS {
        return Err(Error::Presentation(format!(
            "`{EPS}` is reserved for the root address and cannot be a generator name"
        )));
    }
    if let Some(c) = name
        .chars()
        .find(|c| !(c.is_ascii_alphanumeric() || *c == '_'))
    {
        return Err(Error::Presentation(format!(
            "generator name `{name}` contains forbidden character `{c}`"
        )));
    }
    Ok(())
}

/// Nonempty sequence of generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(letters: Vec<Generator>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Presentation("empty word".into()));
        }
        Ok(Word(letters))
    }

    pub fn single(g: Generator) -> Self {
        Word(vec![g])
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: words are nonempty
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// A finite semigroup presentation: alphabet plus relation pairs.
///
/// Relations are ordered pairs of words; the pair set is kept duplicate-free
/// (two literally identical entries denote the same relation and are rejected
/// at construction). Both orientations of a pair are available to diagram
/// transistors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Presentation {
    generators: Vec<Generator>,
    relations: Vec<(Word, Word)>,
}

impl Presentation {
    pub fn new(generators: Vec<Generator>, relations: Vec<(Word, Word)>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Presentation("no generators".into()));
        }
        let mut seen = HashSet::new();
        for g in &generators {
            if !seen.insert(g.clone()) {
                return Err(Error::Presentation(format!("duplicate generator `{g}`")));
            }
        }
        let mut rel_seen = HashSet::new();
        for (l, r) in &relations {
            for g in l.letters().iter().chain(r.letters()) {
                if !seen.contains(g) {
                    return Err(Error::Presentation(format!(
                        "relation uses undeclared generator `{g}`"
                    )));
                }
            }
            if !rel_seen.insert((l.clone(), r.clone())) {
                return Err(Error::Presentation(format!(
                    "duplicate relation `{l} -> {r}`"
                )));
            }
        }
        Ok(Presentation {
            generators,
            relations,
        })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relations(&self) -> &[(Word, Word)] {
        &self.relations
    }

    pub fn has_generator(&self, g: &Generator) -> bool {
        self.generators.contains(g)
    }

    /// Looks a name up in the alphabet.
    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name() == name)
    }

    /// True when the pair appears among the relations, as given.
    pub fn has_relation(&self, left: &Word, right: &Word) -> bool {
        self.relations
            .iter()
            .any(|(l, r)| l == left && r == right)
    }

    /// First relation whose left side is the single letter `g`.
    ///
    /// Unique when the presentation is tree-like.
    pub fn relation_with_left(&self, g: &Generator) -> Option<(usize, &Word)> {
        self.relations
            .iter()
            .enumerate()
            .find(|(_, (l, _))| l.letters() == std::slice::from_ref(g))
            .map(|(i, (_, r))| (i, r))
    }

    /// Checks the shape that makes the presentation grow a tree: every
    /// relation rewrites a single letter into a longer word, and no letter
    /// heads two different relations.
    pub fn validate_tree_like(&self) -> TreeLikeReport {
        let mut violations = Vec::new();
        for (i, (l, r)) in self.relations.iter().enumerate() {
            if l.len() != 1 {
                violations.push(TreeLikeViolation::LeftNotSingle {
                    relation: i,
                    left: l.clone(),
                });
            }
            if r.len() < 2 {
                violations.push(TreeLikeViolation::RightNotLonger {
                    relation: i,
                    right: r.clone(),
                });
            }
        }
        for (i, (li, _)) in self.relations.iter().enumerate() {
            if li.len() != 1 {
                continue;
            }
            for (j, (lj, _)) in self.relations.iter().enumerate().skip(i + 1) {
                if li == lj {
                    violations.push(TreeLikeViolation::DuplicateLeft {
                        first: i,
                        second: j,
                        generator: li.letters()[0].clone(),
                    });
                }
            }
        }
        TreeLikeReport { violations }
    }

    pub fn is_tree_like(&self) -> bool {
        self.validate_tree_like().is_tree_like()
    }

    /// Canonical `.sgp` serialization: one `gen:` line, then one `rel:` line
    /// per relation in stored order, single spaces, trailing newline.
    pub fn to_sgp(&self) -> String {
        let mut out = String::from("gen:");
        for g in &self.generators {
            out.push(' ');
            out.push_str(g.name());
        }
        out.push('\n');
        for (l, r) in &self.relations {
            out.push_str(&format!("rel: {l} -> {r}\n"));
        }
        out
    }

    /// FNV-1a 64 over the canonical serialization. A fingerprint for

    /// canonical-form bytes and display; identity decisions always use full
    /// content equality.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_sgp().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

/// Outcome of the tree-like gate; empty means the presentation grows a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeLikeReport {
    violations: Vec<TreeLikeViolation>,
}

impl TreeLikeReport {
    pub fn is_tree_like(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[TreeLikeViolation] {
        &self.violations
    }
}

impl fmt::Display for TreeLikeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_tree_like() {
            return f.write_str("tree-like");
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
pub enum TreeLikeViolation {
    /// Left side is not a single letter.
    LeftNotSingle { relation: usize, left: Word },
    /// Right side does not have length at least two.
    RightNotLonger { relation: usize, right: Word },
    /// The same letter heads two different relations.
    DuplicateLeft {
        first: usize,
        second: usize,
        generator: Generator,
    },
}

impl fmt::Display for TreeLikeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeLikeViolation::LeftNotSingle { relation, left } => write!(
                f,
                "relation {relation}: left side `{left}` is not a single generator"
            ),
            TreeLikeViolation::RightNotLonger { relation, right } => write!(
                f,
                "relation {relation}: right side `{right}` is shorter than two letters"
            ),
            TreeLikeViolation::DuplicateLeft {
                first,
                second,
                generator,
            } => write!(
                f,
                "relations {first} and {second}: generator `{generator}` heads both"
            ),
        }
    }
}

/// Parses the `.sgp` text format.
///
/// Grammar, line oriented: `#` starts a comment anywhere; blank lines are
/// skipped; the first significant line is the single `gen:` line; every
/// following significant line is `rel: <word> -> <word>` with space-separated
/// generator tokens. Errors carry 1-based line and column.
pub fn parse_sgp(text: &str) -> Result<Presentation> {
    let mut generators: Vec<Generator> = Vec::new();
    let mut relations: Vec<(Word, Word)> = Vec::new();
    let mut saw_gen = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (keyword, rest, rest_col) = split_keyword(line, lineno)?;
        match keyword {
            "gen" => {
                if saw_gen {
                    return Err(Error::parse(lineno, 1, "second `gen:` line"));
                }
                saw_gen = true;
                for (tok, col) in tokens(rest, rest_col) {
                    let g = Generator::new(tok)
                        .map_err(|e| Error::parse(lineno, col, e.to_string()))?;
                    if generators.contains(&g) {
                        return Err(Error::parse(
                            lineno,
                            col,
                            format!("duplicate generator `{tok}`"),
                        ));
                    }
                    generators.push(g);
                }
                if generators.is_empty() {
                    return Err(Error::parse(lineno, rest_col, "empty generator list"));
                }
            }
            "rel" => {
                if !saw_gen {
                    return Err(Error::parse(lineno, 1, "`rel:` before `gen:` line"));
                }
                let arrow = rest.find("->").ok_or_else(|| {
                    Error::parse(lineno, rest_col, "missing `->` in relation")
                })?;
                let arrow_col = rest_col + arrow;
                let left = parse_word(&rest[..arrow], rest_col, &generators, lineno)?
                    .ok_or_else(|| Error::parse(lineno, arrow_col, "empty left side"))?;
                let right_start = arrow + 2;
                let right =
                    parse_word(&rest[right_start..], rest_col + right_start, &generators, lineno)?
                        .ok_or_else(|| Error::parse(lineno, arrow_col, "empty right side"))?;
                if relations.iter().any(|(l, r)| *l == left && *r == right) {
                    return Err(Error::parse(
                        lineno,
                        rest_col,
                        format!("duplicate relation `{left} -> {right}`"),
                    ));
                }
                relations.push((left, right));
            }
            other => {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("unknown line keyword `{other}:`"),
                ));
            }
        }
    }

    if !saw_gen {
        return Err(Error::parse(1, 1, "missing `gen:` line"));
    }
    Presentation::new(generators, relations)
}

/// Splits `keyword: rest`, returning the 1-based column where `rest` begins.
fn split_keyword(line: &str, lineno: usize) -> Result<(&str, &str, usize)> {
    let colon = line
        .find(':')
        .ok_or_else(|| Error::parse(lineno, 1, "expected `gen:` or `rel:` line"))?;
    let keyword = line[..colon].trim();
    Ok((keyword, &line[colon + 1..], colon + 2))
}

/// Whitespace-split tokens of `s` with their 1-based columns; `base_col` is
/// the column of `s`'s first byte in the original line.
fn tokens(s: &str, base_col: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push((&s[st..i], base_col + st));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push((&s[st..], base_col + st));
    }
    out
}

fn parse_word(
    s: &str,
    base_col: usize,
    generators: &[Generator],
    lineno: usize,
) -> Result<Option<Word>> {
    let mut letters = Vec::new();
    for (tok, col) in tokens(s, base_col) {
        let g = generators
            .iter()
            .find(|g| g.name() == tok)
            .cloned()
            .ok_or_else(|| {
                Error::parse(lineno, col, format!("undeclared generator `{tok}`"))
            })?;
        letters.push(g);
    }
    if letters.is_empty() {
        return Ok(None);
    }
    Ok(Some(Word::new(letters)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v2() -> Presentation {
        parse_sgp("gen: x\nrel: x -> x x\n").unwrap()
    }

    #[test]
    fn parse_serialize_round_trip() {
        let text = "gen: a r x1 x2\nrel: r -> x1 x2\nrel: x1 -> a x1\nrel: x2 -> a x2\n";
        let p = parse_sgp(text).unwrap();
        assert_eq!(p.to_sgp(), text);
        let p2 = parse_sgp(&p.to_sgp()).unwrap();
        assert_eq!(p, p2);
        assert_eq!(p.fingerprint(), p2.fingerprint());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let p = parse_sgp("# heading\n\ngen: x # alphabet\n  \nrel: x -> x x # doubles\n").unwrap();
        assert_eq!(p, v2());
    }

    #[test]
    fn rejects_eps_as_generator() {
        let err = parse_sgp("gen: eps\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 1);
                assert_eq!(column, 6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn undeclared_generator_has_position() {
        let err = parse_sgp("gen: x\nrel: x -> x y\n").unwrap_err();
        assert_eq!(
            err,
            Error::parse(2, 13, "undeclared generator `y`".to_string())
        );
    }

    #[test]
    fn empty_sides_rejected() {
        assert!(matches!(
            parse_sgp("gen: x\nrel: -> x x\n").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(
            parse_sgp("gen: x\nrel: x ->\n").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn duplicate_relation_entries_rejected() {
        let err = parse_sgp("gen: x\nrel: x -> x x\nrel: x -> x x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn gate_accepts_tree_like() {
        assert!(v2().is_tree_like());
    }

    #[test]
    fn gate_flags_left_length() {
        let p = parse_sgp("gen: x\nrel: x x -> x x x\n").unwrap();
        let report = p.validate_tree_like();
        assert!(!report.is_tree_like());
        assert!(matches!(
            report.violations()[0],
            TreeLikeViolation::LeftNotSingle { relation: 0, .. }
        ));
    }

    #[test]
    fn gate_flags_short_right() {
        let p = parse_sgp("gen: x y\nrel: x -> y\n").unwrap();
        let report = p.validate_tree_like();
        assert!(matches!(
            report.violations()[0],
            TreeLikeViolation::RightNotLonger { relation: 0, .. }
        ));
    }

    #[test]
    fn gate_flags_duplicate_left_sides() {
        let p = parse_sgp("gen: x y\nrel: x -> x x\nrel: x -> x y\n").unwrap();
        let report = p.validate_tree_like();
        assert_eq!(report.violations().len(), 1);
        assert!(matches!(
            report.violations()[0],
            TreeLikeViolation::DuplicateLeft {
                first: 0,
                second: 1,
                ..
            }
        ));
    }

    #[test]
    fn gate_verdict_ignores_relation_order() {
        let a = parse_sgp("gen: x y\nrel: x -> x y\nrel: y -> y y\n").unwrap();
        let b = parse_sgp("gen: x y\nrel: y -> y y\nrel: x -> x y\n").unwrap();
        assert_eq!(a.is_tree_like(), b.is_tree_like());
    }

    #[test]
    fn relation_lookup_by_left_letter() {
        let p = v2();
        let x = p.generator("x").unwrap().clone();
        let (idx, right) = p.relation_with_left(&x).unwrap();
        assert_eq!(idx, 0);
        assert_eq!(right.len(), 2);
    }

    #[test]
    fn fingerprint_separates_content() {
        let a = v2();
        let b = parse_sgp("gen: x\nrel: x -> x x x\n").unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
