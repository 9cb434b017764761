//! Space expressions and the rewrite calculus that normalizes them.
//!
//! The expression tree is built from a small set of atoms - spheres,
//! Moore spaces `P^d(m)`, fibres `S^d{p^r}` of degree maps on odd spheres,
//! loops `Om S^d` on odd spheres, and opaque loop spaces - closed under
//! wedge, product, smash, suspension and loop.
//!
//! Every expression has a canonical form: wedges and products are flattened,
//! point summands and factors removed, children sorted by a fixed total order
//! on (connectivity, dimension, torsion order). Two expressions denoting the
//! same canonical form compare equal structurally, which is what makes the
//! decomposition results comparable across runs and input orderings.
//!
//! The normalization rules live in [`rules`]; mod-p and rational series
//! evaluation in [`eval`]; the stable text rendering and its parser in
//! [`render`].

mod eval;
mod render;
mod rules;

pub use eval::{
    mod_p_series, mod_p_series_with, rational_series, rational_series_with, series_of,
    Coefficients, OpaqueBindings,
};
pub use render::{parse_expr, ParseError};
pub use rules::{localize, moore_split, smash_normalize, suspend_normalize, Localization};

use std::cmp::Ordering;
use std::fmt;

use crate::series::SeriesError;

/// Errors from normalization and series evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceError {
    /// Moore spaces below dimension 3 are outside the simply-connected calculus.
    DimTooLow { dim: u32 },
    /// The smash rule for two Moore spaces needs the smaller order to differ
    /// from 2; there is no wedge splitting for `P^a(2) ^ P^b(2^s)`.
    Mod2SmashUnsupported,
    /// The expression contains a node the requested rewrite cannot handle.
    UnsupportedShape(String),
    /// An opaque loop atom was evaluated without a series binding.
    UnboundOpaqueLoop { tag: String },
    /// A loop node wraps a space whose loop series has no defined rule.
    UnsupportedLoopShape(String),
    Series(SeriesError),
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceError::DimTooLow { dim } => write!(f, "Moore space dimension {dim} is below 3"),
            SpaceError::Mod2SmashUnsupported => {
                write!(f, "smash of Moore spaces with minimum order exactly 2 has no wedge splitting")
            }
            SpaceError::UnsupportedShape(what) => write!(f, "unsupported expression shape: {what}"),
            SpaceError::UnboundOpaqueLoop { tag } => {
                write!(f, "no series binding for opaque loop space `Om {tag}`")
            }
            SpaceError::UnsupportedLoopShape(what) => {
                write!(f, "no loop series rule for: {what}")
            }
            SpaceError::Series(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SpaceError {}

impl From<SeriesError> for SpaceError {
    fn from(e: SeriesError) -> Self {
        SpaceError::Series(e)
    }
}

/// A value together with a flag recording whether summands above the working
/// degree bound were dropped while producing it. Consumers must propagate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncated<T> {
    pub value: T,
    pub truncated: bool,
}

impl<T> Truncated<T> {
    pub fn exact(value: T) -> Self {
        Truncated { value, truncated: false }
    }

    pub fn new(value: T, truncated: bool) -> Self {
        Truncated { value, truncated }
    }
}

/// Leaf spaces. Atoms carry no expression children.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpaceAtom {
    /// The one-point space.
    Point,
    /// `S^dim`, `dim >= 1`.
    Sphere { dim: u32 },
    /// The Moore space `P^dim(order)`: cofibre of the degree-`order` map on
    /// `S^{dim-1}`. Only simply-connected ones (`dim >= 3`) are admitted;
    /// the order may be composite.
    Moore { order: u64, dim: u32 },
    /// `S^dim{p^r}`: homotopy fibre of the degree-`p^r` map on `S^dim`,
    /// `dim` odd.
    FibSphere { dim: u32, prime: u64, exp: u32 },
    /// `Om S^dim` for `dim` odd, kept atomic since its homology is polynomial.
    LoopSphere { dim: u32 },
    /// A loop space the calculus does not decompose; series are supplied
    /// externally per prime.
    OpaqueLoop { tag: String },
}

impl SpaceAtom {
    pub fn sphere(dim: u32) -> Self {
        assert!(dim >= 1, "sphere dimension must be >= 1");
        SpaceAtom::Sphere { dim }
    }

    pub fn moore(order: u64, dim: u32) -> Self {
        assert!(order >= 2, "Moore space order must be >= 2");
        assert!(dim >= 3, "Moore space dimension must be >= 3");
        SpaceAtom::Moore { order, dim }
    }

    pub fn fib_sphere(dim: u32, prime: u64, exp: u32) -> Self {
        assert!(dim >= 3 && dim % 2 == 1, "fibre atom needs odd dimension >= 3");
        assert!(crate::arith::is_prime(prime), "fibre atom needs a prime");
        assert!(exp >= 1);
        SpaceAtom::FibSphere { dim, prime, exp }
    }

    pub fn loop_sphere(dim: u32) -> Self {
        assert!(dim >= 3 && dim % 2 == 1, "loop sphere atom needs odd dimension >= 3");
        SpaceAtom::LoopSphere { dim }
    }

    /// Connectivity: the largest `c` with trivial reduced homology up to
    /// degree `c`. The point is treated as infinitely connected.
    fn connectivity(&self) -> u32 {
        match self {
            SpaceAtom::Point => u32::MAX,
            SpaceAtom::Sphere { dim } => dim - 1,
            SpaceAtom::Moore { dim, .. } => dim - 2,
            SpaceAtom::FibSphere { dim, .. } => dim - 2,
            SpaceAtom::LoopSphere { dim } => dim - 2,
            SpaceAtom::OpaqueLoop { .. } => 0,
        }
    }

    /// Top cell dimension; `None` for infinite-dimensional atoms.
    fn dimension(&self) -> Option<u32> {
        match self {
            SpaceAtom::Point => Some(0),
            SpaceAtom::Sphere { dim } => Some(*dim),
            SpaceAtom::Moore { dim, .. } => Some(*dim),
            SpaceAtom::FibSphere { .. } | SpaceAtom::LoopSphere { .. } | SpaceAtom::OpaqueLoop { .. } => None,
        }
    }

    /// Torsion order used as the third sort key; torsion-free atoms use 0.
    fn torsion_order(&self) -> u64 {
        match self {
            SpaceAtom::Moore { order, .. } => *order,
            SpaceAtom::FibSphere { prime, exp, .. } => prime.pow(*exp),
            _ => 0,
        }
    }
}

/// A space expression over [`SpaceAtom`], closed under wedge, product,
/// smash, suspension and loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SpaceExpr {
    Atom(SpaceAtom),
    Wedge(Vec<SpaceExpr>),
    Product(Vec<SpaceExpr>),
    Smash(Box<SpaceExpr>, Box<SpaceExpr>),
    Susp(Box<SpaceExpr>),
    Loop(Box<SpaceExpr>),
}

impl SpaceExpr {
    pub fn point() -> Self {
        SpaceExpr::Atom(SpaceAtom::Point)
    }

    pub fn sphere(dim: u32) -> Self {
        SpaceExpr::Atom(SpaceAtom::sphere(dim))
    }

    pub fn moore(order: u64, dim: u32) -> Self {
        SpaceExpr::Atom(SpaceAtom::moore(order, dim))
    }

    pub fn fib_sphere(dim: u32, prime: u64, exp: u32) -> Self {
        SpaceExpr::Atom(SpaceAtom::fib_sphere(dim, prime, exp))
    }

    pub fn loop_sphere(dim: u32) -> Self {
        SpaceExpr::Atom(SpaceAtom::loop_sphere(dim))
    }

    pub fn opaque_loop(tag: impl Into<String>) -> Self {
        SpaceExpr::Atom(SpaceAtom::OpaqueLoop { tag: tag.into() })
    }

    pub fn wedge(children: Vec<SpaceExpr>) -> Self {
        SpaceExpr::Wedge(children).canonicalize()
    }

    pub fn product(children: Vec<SpaceExpr>) -> Self {
        SpaceExpr::Product(children).canonicalize()
    }

    pub fn smash(a: SpaceExpr, b: SpaceExpr) -> Self {
        SpaceExpr::Smash(Box::new(a), Box::new(b)).canonicalize()
    }

    pub fn susp(x: SpaceExpr) -> Self {
        SpaceExpr::Susp(Box::new(x)).canonicalize()
    }

    pub fn loops(x: SpaceExpr) -> Self {
        SpaceExpr::Loop(Box::new(x)).canonicalize()
    }

    pub fn is_point(&self) -> bool {
        matches!(self, SpaceExpr::Atom(SpaceAtom::Point))
    }

    /// Wedge summands of a canonical expression (a non-wedge is one summand).
    pub fn summands(&self) -> Vec<SpaceExpr> {
        match self {
            SpaceExpr::Wedge(children) => children.clone(),
            other => vec![other.clone()],
        }
    }

    /// Product factors of a canonical expression.
    pub fn factors(&self) -> Vec<SpaceExpr> {
        match self {
            SpaceExpr::Product(children) => children.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn connectivity(&self) -> u32 {
        match self {
            SpaceExpr::Atom(a) => a.connectivity(),
            SpaceExpr::Wedge(children) | SpaceExpr::Product(children) => {
                children.iter().map(|c| c.connectivity()).min().unwrap_or(u32::MAX)
            }
            SpaceExpr::Smash(a, b) => {
                let (ca, cb) = (a.connectivity(), b.connectivity());
                if ca == u32::MAX || cb == u32::MAX {
                    u32::MAX
                } else {
                    ca + cb + 1
                }
            }
            SpaceExpr::Susp(x) => x.connectivity().saturating_add(1),
            SpaceExpr::Loop(x) => {
                let c = x.connectivity();
                if c == u32::MAX {
                    u32::MAX
                } else {
                    c.saturating_sub(1)
                }
            }
        }
    }

    pub fn dimension(&self) -> Option<u32> {
        match self {
            SpaceExpr::Atom(a) => a.dimension(),
            SpaceExpr::Wedge(children) => {
                let mut top = 0;
                for c in children {
                    top = top.max(c.dimension()?);
                }
                Some(top)
            }
            SpaceExpr::Product(children) => {
                let mut total = 0u32;
                for c in children {
                    total += c.dimension()?;
                }
                Some(total)
            }
            SpaceExpr::Smash(a, b) => Some(a.dimension()? + b.dimension()?),
            SpaceExpr::Susp(x) => x.dimension().map(|d| d + 1),
            SpaceExpr::Loop(x) => {
                if x.is_point() {
                    Some(0)
                } else {
                    None
                }
            }
        }
    }

    fn torsion_order(&self) -> u64 {
        match self {
            SpaceExpr::Atom(a) => a.torsion_order(),
            _ => 0,
        }
    }

    /// Rank used as a structural tie-break after the numeric sort keys.
    fn variant_rank(&self) -> u8 {
        match self {
            SpaceExpr::Atom(SpaceAtom::Point) => 0,
            SpaceExpr::Atom(SpaceAtom::Sphere { .. }) => 1,
            SpaceExpr::Atom(SpaceAtom::Moore { .. }) => 2,
            SpaceExpr::Atom(SpaceAtom::LoopSphere { .. }) => 3,
            SpaceExpr::Atom(SpaceAtom::FibSphere { .. }) => 4,
            SpaceExpr::Atom(SpaceAtom::OpaqueLoop { .. }) => 5,
            SpaceExpr::Susp(_) => 6,
            SpaceExpr::Smash(..) => 7,
            SpaceExpr::Wedge(_) => 8,
            SpaceExpr::Product(_) => 9,
            SpaceExpr::Loop(_) => 10,
        }
    }

    /// The fixed total order canonical forms are sorted by: connectivity,
    /// then dimension (finite before infinite), then shape (atoms before
    /// composites), then torsion order, then a structural comparison to
    /// break remaining ties.
    pub fn canon_cmp(&self, other: &SpaceExpr) -> Ordering {
        self.connectivity()
            .cmp(&other.connectivity())
            .then_with(|| match (self.dimension(), other.dimension()) {
                (Some(a), Some(b)) => a.cmp(&b),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| self.variant_rank().cmp(&other.variant_rank()))
            .then_with(|| self.torsion_order().cmp(&other.torsion_order()))
            .then_with(|| self.structural_cmp(other))
    }

    fn structural_cmp(&self, other: &SpaceExpr) -> Ordering {
        self.variant_rank().cmp(&other.variant_rank()).then_with(|| match (self, other) {
            (SpaceExpr::Atom(a), SpaceExpr::Atom(b)) => atom_cmp(a, b),
            (SpaceExpr::Susp(a), SpaceExpr::Susp(b)) | (SpaceExpr::Loop(a), SpaceExpr::Loop(b)) => {
                a.canon_cmp(b)
            }
            (SpaceExpr::Smash(a1, a2), SpaceExpr::Smash(b1, b2)) => {
                a1.canon_cmp(b1).then_with(|| a2.canon_cmp(b2))
            }
            (SpaceExpr::Wedge(xs), SpaceExpr::Wedge(ys))
            | (SpaceExpr::Product(xs), SpaceExpr::Product(ys)) => {
                for (x, y) in xs.iter().zip(ys.iter()) {
                    let c = x.canon_cmp(y);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                xs.len().cmp(&ys.len())
            }
            _ => Ordering::Equal,
        })
    }

    /// Rewrite to canonical form. Idempotent and insensitive to the order of
    /// wedge and product children. Beyond flattening and sorting this folds
    /// in only the rewrites that are homotopy equivalences for arbitrary
    /// arguments: point absorption, `Om(S^odd) = Om S^odd`,
    /// `Om(A x B) = Om A x Om B`, and distribution of `Si` over wedges.
    pub fn canonicalize(&self) -> SpaceExpr {
        match self {
            SpaceExpr::Atom(_) => self.clone(),
            SpaceExpr::Wedge(children) => {
                let mut flat = Vec::new();
                for c in children {
                    match c.canonicalize() {
                        SpaceExpr::Wedge(inner) => flat.extend(inner),
                        x if x.is_point() => {}
                        x => flat.push(x),
                    }
                }
                assemble(flat, SpaceExpr::Wedge)
            }
            SpaceExpr::Product(children) => {
                let mut flat = Vec::new();
                for c in children {
                    match c.canonicalize() {
                        SpaceExpr::Product(inner) => flat.extend(inner),
                        x if x.is_point() => {}
                        x => flat.push(x),
                    }
                }
                assemble(flat, SpaceExpr::Product)
            }
            SpaceExpr::Smash(a, b) => {
                let (a, b) = (a.canonicalize(), b.canonicalize());
                if a.is_point() || b.is_point() {
                    return SpaceExpr::point();
                }
                let (a, b) = if a.canon_cmp(&b) == Ordering::Greater { (b, a) } else { (a, b) };
                SpaceExpr::Smash(Box::new(a), Box::new(b))
            }
            SpaceExpr::Susp(x) => match x.canonicalize() {
                p if p.is_point() => SpaceExpr::point(),
                SpaceExpr::Atom(SpaceAtom::Sphere { dim }) => SpaceExpr::sphere(dim + 1),
                SpaceExpr::Atom(SpaceAtom::Moore { order, dim }) => SpaceExpr::moore(order, dim + 1),
                SpaceExpr::Wedge(children) => SpaceExpr::Wedge(
                    children.into_iter().map(|c| SpaceExpr::Susp(Box::new(c))).collect(),
                )
                .canonicalize(),
                other => SpaceExpr::Susp(Box::new(other)),
            },
            SpaceExpr::Loop(x) => match x.canonicalize() {
                p if p.is_point() => SpaceExpr::point(),
                SpaceExpr::Atom(SpaceAtom::Sphere { dim }) if dim >= 3 && dim % 2 == 1 => {
                    SpaceExpr::Atom(SpaceAtom::loop_sphere(dim))
                }
                SpaceExpr::Product(children) => SpaceExpr::Product(
                    children.into_iter().map(|c| SpaceExpr::Loop(Box::new(c))).collect(),
                )
                .canonicalize(),
                other => SpaceExpr::Loop(Box::new(other)),
            },
        }
    }
}

fn atom_cmp(a: &SpaceAtom, b: &SpaceAtom) -> Ordering {
    use SpaceAtom::*;
    match (a, b) {
        (Sphere { dim: x }, Sphere { dim: y }) => x.cmp(y),
        (Moore { order: o1, dim: d1 }, Moore { order: o2, dim: d2 }) => {
            d1.cmp(d2).then(o1.cmp(o2))
        }
        (FibSphere { dim: d1, prime: p1, exp: e1 }, FibSphere { dim: d2, prime: p2, exp: e2 }) => {
            d1.cmp(d2).then(p1.cmp(p2)).then(e1.cmp(e2))
        }
        (LoopSphere { dim: x }, LoopSphere { dim: y }) => x.cmp(y),
        (OpaqueLoop { tag: x }, OpaqueLoop { tag: y }) => x.cmp(y),
        _ => Ordering::Equal,
    }
}

fn assemble(mut children: Vec<SpaceExpr>, make: fn(Vec<SpaceExpr>) -> SpaceExpr) -> SpaceExpr {
    match children.len() {
        0 => SpaceExpr::point(),
        1 => children.pop().unwrap(),
        _ => {
            children.sort_by(|a, b| a.canon_cmp(b));
            make(children)
        }
    }
}
