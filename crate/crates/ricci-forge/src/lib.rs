//! Curvature toolkit for weighted warped-product metrics on cylinders,
//! together with the exact integer-matrix machinery used to plan surgeries
//! on highly-connected manifolds.
//!
//! The crate has two halves that meet in [`pipeline`]:
//!
//! * a numerical half ([`profiles`], [`curvature`], [`smoothing`],
//!   [`constructions`]) that evaluates weighted Bakry-Émery Ricci tensors of
//!   metrics `dt² + α(t)²ds_a² + β(t)²ds_b²` with weight `e^{-f}`, glues
//!   piecewise data with C¹ cubic splines, and builds the explicit
//!   neck/cap/collapse profiles with grid-certified positivity;
//! * an exact half ([`skewalg`], [`linking`]) that works over arbitrary
//!   precision integers and rationals: skew congruence normal forms with
//!   unimodular witnesses, the `A_{n,l}` / `B_{nu,l}` matrix families, their
//!   realization as intersection matrices of rational subspace families, and
//!   the clique-tree separation schedule.

pub mod constructions;
pub mod curvature;
pub mod exact;
pub mod linking;
pub mod pipeline;
pub mod profiles;
pub mod skewalg;
pub mod smoothing;

pub use curvature::{ATensorBounds, CurvatureReport, QValue, RicciValues, WeightedWarpedSpec};
pub use profiles::{Piece, PieceKind, Profile, Side};
