//! Polygons and knots in the semi-infinite lattice tube of cross-section 2x1.
//!
//! The ambient space is the cubic lattice restricted to the tube
//! `x >= 0`, `0 <= y <= 2`, `0 <= z <= 1`.  The crate provides:
//!
//! * [`lattice`] — tube geometry: polygons, sections, hinges, BFACF moves;
//! * [`enumerate`] — exhaustive polygon counting by size and span;
//! * [`patterns`] — the 1-pattern transfer system underlying the counts;
//! * [`spectral`] — growth rates and rigorous eigenvalue/norm bounds;
//! * [`braid`] — 4-plat braid words, Conway normal form, 2-bridge
//!   classification and unknotting insertions;
//! * [`diagram`] — from a polygon to a 4-plat diagram and its knot type;
//! * [`blocks`] — lattice surgery: braid blocks, pattern insertion,
//!   concatenation, and splitting at 2-sections;
//! * [`verify`] — the pinned reference-value checks used by the test suite
//!   and the `verify-paper` CLI subcommand.

pub mod braid;
pub mod diagram;
pub mod enumerate;
pub mod lattice;
pub mod patterns;
pub mod spectral;
