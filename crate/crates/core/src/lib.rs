//! Electric location-routing with nonlinear charging and multiple station types.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`]: nodes, EV parameters and derived travel-time / energy matrices.
//! - [`charging`]: concave piecewise-linear charging functions.
//! - [`instanceio`]: canonical JSON format, EVRP-NL importer, ELRP extension and a
//!   synthetic generator.
//! - [`preprocess`]: escape-energy bounds, infeasible arcs, SoC floors and subtour
//!   cut separation.
//! - [`paths`]: recharge-path enumeration and dominance pruning.
//! - [`simulate`]: route tracing, fixed-route charging optimisation and solution
//!   validation.
//! - [`exact`]: brute-force and branch-and-bound search over route solutions.
//! - [`mip`]: solver-neutral models for the node, arc, recharge-arc and
//!   recharge-path formulations, with MPS/LP export and an external backend.
//! - [`study`]: the linear-versus-nonlinear charging comparison.

pub mod charging;
pub mod exact;
pub mod instance;
pub mod instanceio;
pub mod mip;
pub mod paths;
pub mod preprocess;
pub mod simulate;
pub mod study;

pub use charging::{ChargingError, ChargingFunction};
pub use instance::{EvParams, Instance, InstanceError, Matrix, Node, NodeKind, TechId, TOL};
pub use simulate::{Charge, RouteSolution};
