//! System-level safety filters for linear systems under bounded disturbances.
//!
//! This crate implements two safety-filter families for discrete-time linear
//! systems `x⁺ = Ax + Bu + B_w w` with polytopic state/input constraints and
//! a box-bounded disturbance:
//!
//! * an online filter ([`sl_mpsf`]) that solves a QP at every step,
//!   optimizing a nominal backup trajectory together with an affine
//!   error-feedback policy parameterized by system responses, and
//! * an offline-synthesized explicit filter ([`explicit`]) consisting of a
//!   box safe set and a periodic affine backup law, evaluated online with a
//!   handful of arithmetic operations.
//!
//! Supporting machinery: H-representation polytope algebra and invariant-set
//! computation ([`polytope`]), the stacked system-response parameterization
//! and exact 1-norm constraint tightening ([`sls`]), a dense ADMM QP/LP
//! solver ([`solver`]), tube/nominal predictive-filter baselines
//! ([`baseline`]) and a closed-loop simulation and study harness ([`sim`]).

pub mod baseline;
pub mod explicit;
pub mod polytope;
pub mod sim;
pub mod sl_mpsf;
pub mod sls;
pub mod solver;

pub use polytope::{BoxSet, Polytope};
pub use sls::SafetyProblem;
