//! Mod-p and rational Poincare series of space expressions.
//!
//! The evaluation is unreduced (coefficient 1 in degree 0) and exact to the
//! requested bound: a loop node evaluates its argument one degree higher
//! before desuspending, so no truncation artefacts leak into the answer.
//!
//! Atom series: a sphere contributes `1 + t^d`; a Moore space `P^d(m)`
//! contributes `t^{d-1} + t^d` at primes dividing `m` and nothing elsewhere;
//! `S^d{p^r}` carries `(1 + t^d)/(1 - t^{d-1})` at `p` and vanishes at other
//! primes and rationally; `Om S^d` carries `1/(1 - t^{d-1})` everywhere.
//! Loops on wedges of spheres and Moore spaces are free tensor algebras on
//! the desuspended reduced homology.

use std::collections::BTreeMap;

use crate::series::PoincareSeries;

use super::{SpaceAtom, SpaceExpr, SpaceError};

/// Coefficient field for a series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coefficients {
    ModP(u64),
    Rational,
}

impl std::fmt::Display for Coefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficients::ModP(p) => write!(f, "mod {p}"),
            Coefficients::Rational => write!(f, "rational"),
        }
    }
}

impl Coefficients {
    /// Whether an order-`m` torsion group contributes over this field.
    fn sees_torsion(&self, order: u64) -> bool {
        match self {
            Coefficients::ModP(p) => order % p == 0,
            Coefficients::Rational => false,
        }
    }
}

/// Externally supplied series for opaque loop atoms, keyed by tag and field.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpaqueBindings {
    entries: BTreeMap<(String, Coefficients), PoincareSeries>,
}

impl OpaqueBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, tag: impl Into<String>, field: Coefficients, series: PoincareSeries) {
        self.entries.insert((tag.into(), field), series);
    }

    fn get(&self, tag: &str, field: Coefficients) -> Option<&PoincareSeries> {
        self.entries.get(&(tag.to_string(), field))
    }
}

/// Mod-p series of `x` up to degree `bound` (no opaque bindings).
pub fn mod_p_series(x: &SpaceExpr, p: u64, bound: usize) -> Result<PoincareSeries, SpaceError> {
    series_of(x, Coefficients::ModP(p), bound, &OpaqueBindings::new())
}

/// Mod-p series with series bindings for opaque loop atoms.
pub fn mod_p_series_with(
    x: &SpaceExpr,
    p: u64,
    bound: usize,
    bindings: &OpaqueBindings,
) -> Result<PoincareSeries, SpaceError> {
    series_of(x, Coefficients::ModP(p), bound, bindings)
}

/// Rational series of `x` up to degree `bound`.
pub fn rational_series(x: &SpaceExpr, bound: usize) -> Result<PoincareSeries, SpaceError> {
    series_of(x, Coefficients::Rational, bound, &OpaqueBindings::new())
}

pub fn rational_series_with(
    x: &SpaceExpr,
    bound: usize,
    bindings: &OpaqueBindings,
) -> Result<PoincareSeries, SpaceError> {
    series_of(x, Coefficients::Rational, bound, bindings)
}

/// Unreduced series over any admissible field.
pub fn series_of(
    x: &SpaceExpr,
    field: Coefficients,
    bound: usize,
    bindings: &OpaqueBindings,
) -> Result<PoincareSeries, SpaceError> {
    match x {
        SpaceExpr::Atom(atom) => atom_series(atom, field, bound, bindings),
        SpaceExpr::Wedge(children) => {
            let mut acc = PoincareSeries::one(bound);
            for c in children {
                acc = acc.add(&series_of(c, field, bound, bindings)?.reduced());
            }
            Ok(acc)
        }
        SpaceExpr::Product(children) => {
            let mut acc = PoincareSeries::one(bound);
            for c in children {
                acc = acc.mul(&series_of(c, field, bound, bindings)?);
            }
            Ok(acc)
        }
        SpaceExpr::Smash(a, b) => {
            let ra = series_of(a, field, bound, bindings)?.reduced();
            let rb = series_of(b, field, bound, bindings)?.reduced();
            Ok(PoincareSeries::one(bound).add(&ra.mul(&rb)))
        }
        SpaceExpr::Susp(c) => {
            let r = series_of(c, field, bound, bindings)?.reduced();
            Ok(PoincareSeries::one(bound).add(&r.shift_up(1)))
        }
        SpaceExpr::Loop(c) => loop_series(c, field, bound, bindings),
    }
}

fn atom_series(
    atom: &SpaceAtom,
    field: Coefficients,
    bound: usize,
    bindings: &OpaqueBindings,
) -> Result<PoincareSeries, SpaceError> {
    match atom {
        SpaceAtom::Point => Ok(PoincareSeries::one(bound)),
        SpaceAtom::Sphere { dim } => {
            Ok(PoincareSeries::one(bound).add(&PoincareSeries::monomial(*dim as usize, bound)))
        }
        SpaceAtom::Moore { order, dim } => {
            if field.sees_torsion(*order) {
                let d = *dim as usize;
                Ok(PoincareSeries::one(bound)
                    .add(&PoincareSeries::monomial(d - 1, bound))
                    .add(&PoincareSeries::monomial(d, bound)))
            } else {
                Ok(PoincareSeries::one(bound))
            }
        }
        SpaceAtom::FibSphere { dim, prime, exp } => {
            if field.sees_torsion(prime.pow(*exp)) {
                // Exterior(a) tensor polynomial(b): (1 + t^d)/(1 - t^{d-1}).
                let mut numer = vec![0i64; *dim as usize + 1];
                numer[0] = 1;
                numer[*dim as usize] = 1;
                let mut denom = vec![0i64; *dim as usize];
                denom[0] = 1;
                denom[*dim as usize - 1] = -1;
                Ok(PoincareSeries::from_rational(&numer, &denom, bound)?)
            } else {
                Ok(PoincareSeries::one(bound))
            }
        }
        SpaceAtom::LoopSphere { dim } => {
            let mut denom = vec![0i64; *dim as usize];
            denom[0] = 1;
            denom[*dim as usize - 1] = -1;
            Ok(PoincareSeries::from_rational(&[1], &denom, bound)?)
        }
        SpaceAtom::OpaqueLoop { tag } => match bindings.get(tag, field) {
            Some(s) => {
                assert!(
                    s.bound() >= bound,
                    "binding for `Om {tag}` ({}) covers degrees <= {} but {bound} were requested",
                    field,
                    s.bound()
                );
                Ok(s.truncate(bound))
            }
            None => Err(SpaceError::UnboundOpaqueLoop { tag: tag.clone() }),
        },
    }
}

/// Series of `Om c`. Handled shapes: the point, odd spheres, suspensions
/// (Moore spaces and wedges of spheres/Moore spaces, via the free tensor
/// algebra on the desuspended reduced homology), and products (loops split).
fn loop_series(
    c: &SpaceExpr,
    field: Coefficients,
    bound: usize,
    bindings: &OpaqueBindings,
) -> Result<PoincareSeries, SpaceError> {
    let c = c.canonicalize();
    match &c {
        x if x.is_point() => Ok(PoincareSeries::one(bound)),
        // Any sphere of dimension >= 2 is the suspension of the one below,
        // so Om S^d carries the tensor algebra on one degree-(d-1) class;
        // this agrees with the polynomial form for odd d.
        SpaceExpr::Atom(SpaceAtom::Sphere { dim }) if *dim >= 2 => {
            PoincareSeries::monomial(*dim as usize - 1, bound)
                .geometric()
                .map_err(SpaceError::from)
        }
        SpaceExpr::Atom(SpaceAtom::Moore { .. }) | SpaceExpr::Wedge(_) => {
            let summands = c.summands();
            for s in &summands {
                let ok = matches!(
                    s,
                    SpaceExpr::Atom(SpaceAtom::Sphere { dim }) if *dim >= 2
                ) || matches!(s, SpaceExpr::Atom(SpaceAtom::Moore { .. }));
                if !ok {
                    return Err(SpaceError::UnsupportedLoopShape(format!(
                        "loop on a wedge with summand {s}"
                    )));
                }
            }
            // Bott-Samelson: evaluate one degree higher, desuspend, take the
            // free tensor algebra series.
            let wedge = series_of(&c, field, bound + 1, bindings)?;
            Ok(wedge.reduced().shift_down(1).geometric()?)
        }
        SpaceExpr::Product(children) => {
            let mut acc = PoincareSeries::one(bound);
            for child in children {
                acc = acc.mul(&loop_series(child, field, bound, bindings)?);
            }
            Ok(acc)
        }
        other => Err(SpaceError::UnsupportedLoopShape(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(coeffs: &[u64]) -> PoincareSeries {
        PoincareSeries::from_ints(coeffs)
    }

    #[test]
    fn fibre_atom_series_at_its_prime() {
        let s = mod_p_series(&SpaceExpr::fib_sphere(3, 3, 2), 3, 8).unwrap();
        assert_eq!(s, ps(&[1, 0, 1, 1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn moore_space_away_from_its_prime_is_trivial() {
        let s = mod_p_series(&SpaceExpr::moore(3, 4), 5, 10).unwrap();
        assert_eq!(s, PoincareSeries::one(10));
    }

    #[test]
    fn loop_on_wedge_is_tensor_algebra() {
        // Om(P^4(3) v S^7) at p = 3: letters in degrees 2, 3, 6.
        let x = SpaceExpr::loops(SpaceExpr::wedge(vec![
            SpaceExpr::moore(3, 4),
            SpaceExpr::sphere(7),
        ]));
        let s = mod_p_series(&x, 3, 8).unwrap();
        let letters = ps(&[0, 0, 1, 1, 0, 0, 1, 0, 0]);
        assert_eq!(s, letters.geometric().unwrap());
        // Independent word enumeration oracle.
        fn words(d: i64) -> u64 {
            match d {
                d if d < 0 => 0,
                0 => 1,
                _ => words(d - 2) + words(d - 3) + words(d - 6),
            }
        }
        let expected: Vec<u64> = (0..=8).map(words).collect();
        assert_eq!(s, PoincareSeries::from_ints(&expected));
    }

    #[test]
    fn loop_series_is_exact_at_the_bound() {
        // The degree-N coefficient of Om(wedge) must include letters of
        // degree N, i.e. wedge summands of dimension N + 1.
        let x = SpaceExpr::loops(SpaceExpr::wedge(vec![
            SpaceExpr::sphere(3),
            SpaceExpr::sphere(5),
        ]));
        let s = mod_p_series(&x, 3, 4).unwrap();
        // Letters in degrees 2 and 4: degree-4 words are {22, 4}.
        assert_eq!(s, ps(&[1, 0, 1, 0, 2]));
    }

    #[test]
    fn product_and_rational_series() {
        let x = SpaceExpr::product(vec![SpaceExpr::fib_sphere(3, 3, 1), SpaceExpr::loop_sphere(7)]);
        let mod3 = mod_p_series(&x, 3, 12).unwrap();
        let poly = PoincareSeries::from_rational(&[1], &[1, 0, -1, -1, 0, 1], 12).unwrap();
        assert_eq!(mod3, poly);
        let rational = rational_series(&x, 12).unwrap();
        assert_eq!(
            rational,
            PoincareSeries::from_rational(&[1], &[1, 0, 0, 0, 0, 0, -1], 12).unwrap()
        );
    }

    #[test]
    fn opaque_loops_need_bindings() {
        let x = SpaceExpr::opaque_loop("V'");
        assert_eq!(
            mod_p_series(&x, 3, 5),
            Err(SpaceError::UnboundOpaqueLoop { tag: "V'".into() })
        );
        let mut b = OpaqueBindings::new();
        b.bind("V'", Coefficients::ModP(3), ps(&[1, 0, 1, 1, 1, 1]));
        assert_eq!(mod_p_series_with(&x, 3, 5, &b).unwrap(), ps(&[1, 0, 1, 1, 1, 1]));
    }

    #[test]
    fn unsupported_loop_shapes_error() {
        let x = SpaceExpr::Loop(Box::new(SpaceExpr::fib_sphere(3, 3, 1)));
        assert!(matches!(
            mod_p_series(&x, 3, 5),
            Err(SpaceError::UnsupportedLoopShape(_))
        ));
        // The circle is not simply connected.
        let circle = SpaceExpr::Loop(Box::new(SpaceExpr::sphere(1)));
        assert!(matches!(
            mod_p_series(&circle, 3, 5),
            Err(SpaceError::UnsupportedLoopShape(_))
        ));
    }

    #[test]
    fn loop_on_even_sphere_is_the_james_series() {
        let even = SpaceExpr::Loop(Box::new(SpaceExpr::sphere(4)));
        let s = mod_p_series(&even, 3, 9).unwrap();
        assert_eq!(s, ps(&[1, 0, 0, 1, 0, 0, 1, 0, 0, 1]));
    }

    #[test]
    fn susp_and_smash_series() {
        let sm = SpaceExpr::Smash(
            Box::new(SpaceExpr::moore(3, 4)),
            Box::new(SpaceExpr::moore(3, 3)),
        );
        let s = mod_p_series(&sm, 3, 8).unwrap();
        // (t^3 + t^4)(t^2 + t^3) = t^5 + 2 t^6 + t^7.
        assert_eq!(s, ps(&[1, 0, 0, 0, 0, 1, 2, 1, 0]));
        let su = SpaceExpr::Susp(Box::new(SpaceExpr::fib_sphere(3, 3, 1)));
        let s = mod_p_series(&su, 3, 6).unwrap();
        assert_eq!(s, ps(&[1, 0, 0, 1, 1, 1, 1]));
    }
}
