//! Kepler billiards in planar strictly convex tables.
//!
//! A particle moves on Kepler conics of fixed energy `h` around an attracting
//! center `c` placed inside the table and reflects elastically at the boundary.
//! The crate provides boundary tables (ellipses, constant-width bodies and
//! their string constructions), exact Levi-Civita arcs with Jacobi lengths and
//! generating functions, the potential-free Birkhoff map, focal and index
//! diagnostics for the perimeter function `Psi`, the Kepler billiard map, and a
//! variational solver that realizes symbolic words as periodic orbits.

pub mod birkhoff;
pub mod error;
pub mod export;
pub mod focal;
pub mod kepler_arc;
pub mod kepler_billiard;
pub mod planar;
pub mod precise;
pub mod quad;
pub mod roots;
pub mod scene;
pub mod shadowing;
pub mod tables;

pub use error::{KbError, KbResult};
pub use num_complex::Complex64;
pub use scene::Scene;
pub use tables::BoundaryTable;
