//! Immersed virtual element method (IVEM) for elliptic interface problems.
//!
//! The crate solves two model problems with piecewise-constant coefficients
//! on an unfitted triangular background mesh:
//!
//! * the H¹ problem `-div(β ∇u) = f` with continuity and flux jump conditions,
//! * the H(curl) problem `curl(α curl u) + β u = f` with tangential,
//!   α-curl and β-normal jump conditions.
//!
//! Interface elements carry conforming virtual element spaces (nodal DoFs at
//! vertices and cut points, edge DoFs on split sub-edges). Virtual functions
//! are never evaluated directly; they are projected onto explicit immersed
//! finite element (IFE) spaces computed from the DoFs alone.
//!
//! Module map:
//!
//! * [`mesh`], [`level_set`], [`cut`], [`quadrature`]: background mesh,
//!   interface description and cut-cell geometry.
//! * [`ife`]: explicit local IFE spaces and the jump matrix.
//! * [`dofs`]: global DoF numbering, interpolation, discrete gradient.
//! * [`projection`], [`standard`]: DoF-computable projections, curl from
//!   DoFs and the classical P1 / lowest-order Nédélec element matrices.
//! * [`scheme_h1`], [`scheme_hcurl`]: assembly and solution.
//! * [`solver`]: sparse storage, PCG and direct solvers.
//! * [`study`], [`manufactured`], [`verify`]: convergence studies,
//!   manufactured solutions and the structural property suite.

pub mod cut;
pub mod dofs;
pub mod error;
pub mod geometry;
pub mod ife;
pub mod level_set;
pub mod manufactured;
pub mod mesh;
pub mod projection;
pub mod quadrature;
pub mod scheme_h1;
pub mod scheme_hcurl;
pub mod solver;
pub mod standard;
pub mod study;
pub mod verify;

pub use error::{IvemError, Result};
pub use geometry::{Point, Side};
