//! A laboratory for two-dimensional bootstrap percolation and kinetically
//! constrained models (KCM) with arbitrary finite update families.
//!
//! The crate computes the combinatorial invariants of an update family
//! exactly (stable directions, difficulties, universality class, refined
//! class), simulates both the monotone cellular automaton and the
//! stochastic KCM reproducibly, constructs the droplet geometry used in the
//! analysis of critical models (quasi-stable annuli, snails, trapezoids,
//! slices, good and super-good events), and verifies the associated
//! functional inequalities on small product spaces by exact enumeration.
//!
//! Modules map onto subsystems:
//!
//! - [`lattice`], [`family`]: exact integer primitives and update families;
//! - [`stable`], [`difficulty`], [`quasistable`]: family analysis;
//! - [`region`], [`config`], [`closure`], [`boottau`]: the bootstrap engine;
//! - [`rng`], [`kcm`], [`exact`]: stochastic KCM and exact small systems;
//! - [`geometry`]: droplet constructions and event checking;
//! - [`poincare`]: functional-inequality checkers;
//! - [`scaling`], [`report`]: fits and report rendering.

pub mod boottau;
pub mod closure;
pub mod config;
pub mod difficulty;
pub mod exact;
pub mod family;
pub mod geometry;
pub mod kcm;
pub mod lattice;
pub mod poincare;
pub mod quasistable;
pub mod region;
pub mod report;
pub mod rng;
pub mod scaling;
pub mod stable;

pub use family::{parse_family, UpdateFamily, UpdateRule};
pub use lattice::{v2, Direction, Vec2};
