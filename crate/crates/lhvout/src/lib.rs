//! Local hidden variable models augmented with outcome communication (LHV+Out).
//!
//! A bipartite behaviour `p(ab|xy)` is LHV+Out when it decomposes as
//! `Σ_λ p(λ) p_A(a|xλ) p_B(b|ayλ)`, i.e. Bob's response may depend on Alice's
//! communicated outcome. This crate provides:
//!
//! - behaviours, correlator tables and the conversions between them
//!   ([`behaviour`]),
//! - closed-form quantum behaviours for Bell-diagonal two-qubit states under
//!   projective measurements given as Bloch vectors ([`quantum`]),
//! - deterministic-strategy enumeration and LP membership certificates for
//!   the LHV and LHV+Out polytopes ([`polytope`]),
//! - full-correlator Bell bounds `L(M)`, `L_Out(M)` and the symmetrised
//!   witness construction ([`bounds`]),
//! - the constructive LHV+Out-to-LHV conversion for behaviours with a
//!   deterministic Alice input ([`conversion`]),
//! - a Frank-Wolfe solver building LHV+Out models in correlator space
//!   ([`fw`]),
//! - convex-hull shrinking radii and visibility certificates ([`geometry`]),
//! - an independent model verifier ([`verifier`]), and
//! - empirical tooling around antipodally symmetric behaviours ([`openq`]).
//!
//! All heavy loops are data-parallel via rayon when the default `parallel`
//! feature is enabled; disabling it yields a dependency-free sequential
//! build with identical results.

pub mod behaviour;
pub mod bounds;
pub mod conversion;
mod error;
pub(crate) mod exec;
pub mod fw;
pub mod geometry;
pub mod lp;
pub mod model;
pub mod openq;
pub mod polytope;
pub mod quantum;
pub mod verifier;

pub use behaviour::{Behaviour, CorrelatorTable, Scenario};
pub use bounds::BellCoefficients;
pub use error::{Error, Result};
pub use model::{CorrModel, CorrStrategy, LhvStrategy, Model, OutStrategy, Strategies};
pub use polytope::{MembershipResult, PolytopeKind};
pub use quantum::{CorrelatorState, MeasurementSet};

/// Default tolerance for nonsignalling, normalization and LP feasibility checks.
pub const DEFAULT_TOL: f64 = 1e-9;
