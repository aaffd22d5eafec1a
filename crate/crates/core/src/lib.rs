//! Exact computation with braided diagram groups and tree-end similarity groups.
//!
//! The library has two halves that mirror each other:
//!
//! * the *diagram* half ([`presentation`], [`diagram`], [`calculus`]) builds
//!   braided diagrams over a semigroup presentation and computes in the
//!   diagram group: concatenation, inversion, dipole reduction, canonical
//!   forms and equality;
//! * the *space* half ([`treespace`], [`fss`]) works with the compact
//!   ultrametric space of ends of the tree grown from a tree-like
//!   presentation, its standard partitions into balls, and the group of
//!   finite-similarity bijections given by defining triples.
//!
//! [`fss::psi`] and [`fss::triple_from_diagram`] translate between the two
//! halves; [`catalog`] ships the stock presentations (Thompson, Houghton,
//! quasi-automorphism) together with the Houghton end-translation
//! interpretation and the relabelling embedding into the ternary Thompson
//! presentation. [`sampling`] provides seeded random elements for harnesses.
//!
//! Everything is exact: metric quantities are integer edge counts, and
//! `e^{-m}` is evaluated only on demand for display.

pub mod calculus;
pub mod catalog;
pub mod diagram;
pub mod error;
pub mod fss;
pub mod presentation;
pub mod sampling;
pub mod treespace;

pub use error::{Error, Result};
pub use presentation::{Generator, Presentation, Word};
