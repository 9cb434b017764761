//! Symbolic loop space decompositions of $(2n-2)$-connected $(4n-1)$-dimensional
//! Poincare Duality complexes with torsion-only middle cohomology.
//!
//! Given `n` and the prime-power torsion of $H^{2n}(M;\mathbb{Z})$, the
//! [`decomp`] engine produces the canonical product decomposition of
//! $\Omega M$ and certifies every claimed equivalence by exact mod-$p$
//! Poincare series equalities computed through independent routes:
//!
//! * [`series`] - truncated series with arbitrary-precision coefficients,
//!   the common currency of all verification;
//! * [`spaces`] - the space-expression tree and the rewrite calculus that
//!   normalizes suspensions to wedges of spheres and Moore spaces;
//! * [`dga`] - free differential graded algebras over $\mathbb{F}_p$ and
//!   their homology by linear algebra, for the three-cell Adams-Hilton model;
//! * [`hilton_milnor`] - loops on a wedge of suspensions as a product over
//!   Lyndon words, an independent series route;
//! * [`decomp`] - the decomposition engine and its certificates.
//!
//! Everything is exact integer arithmetic; there are no tolerances.

pub mod arith;
pub mod decomp;
pub mod dga;
pub mod hilton_milnor;
pub mod series;
pub mod spaces;

pub use decomp::{DecompositionResult, TorsionInput};
pub use series::PoincareSeries;
pub use spaces::SpaceExpr;
