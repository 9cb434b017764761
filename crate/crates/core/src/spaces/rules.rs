//! Normalization rules: Moore space splitting by coprime order, smash
//! products of spheres and Moore spaces, splitting a suspended product of
//! atoms into a wedge, and localization.
//!
//! All infinite splittings (the sphere wedge for a suspended loop sphere,
//! the Moore wedge for a suspended fibre atom, the subset expansion of a
//! suspended product) are truncated at the requested dimension bound and
//! flagged as such. Summands only ever gain dimension under smashing and
//! suspension, so truncation at `n_max` is stable: no dropped summand can
//! influence any retained dimension.

use crate::arith;

use super::{SpaceAtom, SpaceExpr, SpaceError, Truncated};

/// Where to localize: at a single prime, or rationally (all primes inverted).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    AtPrime(u64),
    Rational,
}

/// Split `P^dim(order)` into a wedge of Moore spaces of prime-power order,
/// one per prime factor.
pub fn moore_split(dim: u32, order: u64) -> Result<SpaceExpr, SpaceError> {
    if dim < 3 {
        return Err(SpaceError::DimTooLow { dim });
    }
    assert!(order >= 2, "Moore space order must be >= 2");
    let parts = arith::factorize(order)
        .into_iter()
        .map(|(p, r)| SpaceExpr::moore(p.pow(r), dim))
        .collect();
    Ok(SpaceExpr::wedge(parts))
}

/// Smash product of two wedges of spheres and Moore spaces, normalized back
/// to a wedge of spheres and Moore spaces.
///
/// Sphere smashes add dimensions; a sphere smashed with a Moore space
/// suspends it; two Moore spaces at the same prime split into two Moore
/// spaces at the smaller exponent, provided that order is not exactly 2;
/// Moore spaces at distinct primes smash to a point.
pub fn smash_normalize(x: &SpaceExpr, y: &SpaceExpr) -> Result<SpaceExpr, SpaceError> {
    let left = wedge_atoms(x)?;
    let right = wedge_atoms(y)?;
    let mut out = Vec::new();
    for a in &left {
        for b in &right {
            out.extend(smash_atom_pair(a, b)?);
        }
    }
    Ok(SpaceExpr::wedge(out.into_iter().map(SpaceExpr::Atom).collect()))
}

/// Collect the sphere/Moore summands of a canonical wedge, splitting
/// composite Moore orders so every Moore summand has prime-power order.
fn wedge_atoms(x: &SpaceExpr) -> Result<Vec<SpaceAtom>, SpaceError> {
    let mut out = Vec::new();
    for summand in x.canonicalize().summands() {
        match summand {
            SpaceExpr::Atom(SpaceAtom::Point) => {}
            SpaceExpr::Atom(SpaceAtom::Sphere { dim }) => out.push(SpaceAtom::sphere(dim)),
            SpaceExpr::Atom(SpaceAtom::Moore { order, dim }) => {
                for (p, r) in arith::factorize(order) {
                    out.push(SpaceAtom::moore(p.pow(r), dim));
                }
            }
            other => {
                return Err(SpaceError::UnsupportedShape(format!(
                    "smash operand summand is not a sphere or Moore space: {other}"
                )))
            }
        }
    }
    Ok(out)
}

/// Smash of two sphere/Moore atoms with prime-power orders.
fn smash_atom_pair(a: &SpaceAtom, b: &SpaceAtom) -> Result<Vec<SpaceAtom>, SpaceError> {
    use SpaceAtom::*;
    match (a, b) {
        (Point, _) | (_, Point) => Ok(vec![]),
        (Sphere { dim: d1 }, Sphere { dim: d2 }) => Ok(vec![SpaceAtom::sphere(d1 + d2)]),
        (Sphere { dim: s }, Moore { order, dim }) | (Moore { order, dim }, Sphere { dim: s }) => {
            Ok(vec![SpaceAtom::moore(*order, dim + s)])
        }
        (Moore { order: o1, dim: d1 }, Moore { order: o2, dim: d2 }) => {
            let (p1, r1) = arith::prime_power(*o1).expect("prime-power order");
            let (p2, r2) = arith::prime_power(*o2).expect("prime-power order");
            if p1 != p2 {
                return Ok(vec![]);
            }
            let r = r1.min(r2);
            if p1.pow(r) == 2 {
                return Err(SpaceError::Mod2SmashUnsupported);
            }
            Ok(vec![
                SpaceAtom::moore(p1.pow(r), d1 + d2),
                SpaceAtom::moore(p1.pow(r), d1 + d2 - 1),
            ])
        }
        _ => Err(SpaceError::UnsupportedShape(format!(
            "smash of atoms {:?} and {:?}",
            a, b
        ))),
    }
}

/// The wedge splitting of `Si x`, keeping every summand of dimension at most
/// `n_max`. The input must be built from atoms by wedges and products only.
///
/// Rules applied: suspension distributes over wedges; a suspended product
/// splits as the wedge of suspended smashes over nonempty subsets of the
/// factors; `Si Om S^{t+1}` is a wedge of spheres `S^{kt+1}`; and
/// `Si S^{2n-1}{p^r}` is a wedge of Moore spaces `P^{(2n-2)k+2}(p^r)`,
/// the unique wedge of mod-`p^r` Moore spaces compatible with its mod-p
/// series and Bockstein pairing.
pub fn suspend_normalize(x: &SpaceExpr, n_max: u32) -> Result<Truncated<SpaceExpr>, SpaceError> {
    let canon = x.canonicalize();
    let mut atoms = Vec::new();
    let mut truncated = false;
    suspend_into(&canon, n_max, &mut atoms, &mut truncated)?;
    let expr = SpaceExpr::wedge(atoms.into_iter().map(SpaceExpr::Atom).collect());
    Ok(Truncated::new(expr, truncated))
}

fn suspend_into(
    x: &SpaceExpr,
    n_max: u32,
    out: &mut Vec<SpaceAtom>,
    truncated: &mut bool,
) -> Result<(), SpaceError> {
    match x {
        SpaceExpr::Atom(_) => {
            let pieces = desuspended_splitting(x, n_max.saturating_sub(1))?;
            *truncated |= pieces.truncated;
            for atom in pieces.value {
                push_suspended(atom, n_max, out, truncated);
            }
            Ok(())
        }
        SpaceExpr::Wedge(children) => {
            for c in children {
                suspend_into(c, n_max, out, truncated)?;
            }
            Ok(())
        }
        SpaceExpr::Product(factors) => {
            // Si(X1 x ... x Xk) = wedge over nonempty subsets S of Si(smash of S).
            let splits: Vec<Truncated<Vec<SpaceAtom>>> = factors
                .iter()
                .map(|f| desuspended_splitting(f, n_max.saturating_sub(1)))
                .collect::<Result<_, _>>()?;
            for s in &splits {
                *truncated |= s.truncated;
            }
            let k = factors.len();
            for mask in 1u32..(1 << k) {
                let members: Vec<&Vec<SpaceAtom>> = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| &splits[i].value)
                    .collect();
                smash_combinations(&members, n_max, out, truncated)?;
            }
            Ok(())
        }
        other => Err(SpaceError::UnsupportedShape(format!(
            "suspension splitting needs atoms combined by wedge and product, got: {other}"
        ))),
    }
}

/// Wedge of sphere/Moore atoms stably equivalent to the atom `x` through one
/// suspension: suspending every piece once gives the splitting of `Si x`.
/// Pieces above `dim_max` are dropped with the flag set.
fn desuspended_splitting(
    x: &SpaceExpr,
    dim_max: u32,
) -> Result<Truncated<Vec<SpaceAtom>>, SpaceError> {
    let atom = match x {
        SpaceExpr::Atom(a) => a,
        other => {
            return Err(SpaceError::UnsupportedShape(format!(
                "product factor is not an atom: {other}"
            )))
        }
    };
    match atom {
        SpaceAtom::Point => Ok(Truncated::exact(vec![])),
        SpaceAtom::Sphere { dim } => Ok(Truncated::exact(vec![SpaceAtom::sphere(*dim)])),
        SpaceAtom::Moore { order, dim } => Ok(Truncated::exact(
            arith::factorize(*order)
                .into_iter()
                .map(|(p, r)| SpaceAtom::moore(p.pow(r), *dim))
                .collect(),
        )),
        // James: Si Om S^{t+1} splits as spheres S^{kt+1}; desuspended: S^{kt}.
        SpaceAtom::LoopSphere { dim } => {
            let t = dim - 1;
            let mut pieces = Vec::new();
            let mut k = 1u32;
            while k * t <= dim_max {
                pieces.push(SpaceAtom::sphere(k * t));
                k += 1;
            }
            Ok(Truncated::new(pieces, true))
        }
        // Si S^{2n-1}{p^r} splits as P^{(2n-2)k+2}(p^r); desuspended:
        // P^{(2n-2)k+1}(p^r), whose lowest piece has dimension 2n-1 >= 3.
        SpaceAtom::FibSphere { dim, prime, exp } => {
            let step = dim - 1;
            let order = prime.pow(*exp);
            let mut pieces = Vec::new();
            let mut k = 1u32;
            while step * k + 1 <= dim_max {
                pieces.push(SpaceAtom::moore(order, step * k + 1));
                k += 1;
            }
            Ok(Truncated::new(pieces, true))
        }
        SpaceAtom::OpaqueLoop { tag } => Err(SpaceError::UnsupportedShape(format!(
            "opaque loop space `Om {tag}` cannot be suspension-split; keep it symbolic"
        ))),
    }
}

/// Push the suspension of every smash `w_1 ^ ... ^ w_m`, one `w_i` from each
/// member list, keeping suspended summands of dimension at most `n_max`.
fn smash_combinations(
    members: &[&Vec<SpaceAtom>],
    n_max: u32,
    out: &mut Vec<SpaceAtom>,
    truncated: &mut bool,
) -> Result<(), SpaceError> {
    if members.iter().any(|list| list.is_empty()) {
        return Ok(());
    }
    let mut choice = vec![0usize; members.len()];
    'outer: loop {
        let picked: Vec<&SpaceAtom> = members
            .iter()
            .zip(&choice)
            .map(|(list, &i)| &list[i])
            .collect();
        // Lower bound for any smash result dimension: each Moore/Moore step
        // can lose at most one dimension.
        let dim_sum: u32 = picked.iter().map(|a| a.dimension().unwrap_or(0)).sum();
        let lower = dim_sum.saturating_sub(picked.len() as u32 - 1) + 1;
        if lower <= n_max {
            let mut acc = vec![picked[0].clone()];
            for atom in picked.iter().skip(1) {
                let mut next = Vec::new();
                for a in &acc {
                    next.extend(smash_atom_pair(a, atom)?);
                }
                acc = next;
            }
            for atom in acc {
                push_suspended(atom, n_max, out, truncated);
            }
        } else {
            *truncated = true;
        }
        // Advance the mixed-radix choice vector.
        for i in 0..members.len() {
            choice[i] += 1;
            if choice[i] < members[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        return Ok(());
    }
}

fn push_suspended(atom: SpaceAtom, n_max: u32, out: &mut Vec<SpaceAtom>, truncated: &mut bool) {
    let suspended = match atom {
        SpaceAtom::Sphere { dim } => SpaceAtom::sphere(dim + 1),
        SpaceAtom::Moore { order, dim } => SpaceAtom::moore(order, dim + 1),
        other => unreachable!("only spheres and Moore spaces are suspended here: {other:?}"),
    };
    if suspended.dimension().unwrap() <= n_max {
        out.push(suspended);
    } else {
        *truncated = true;
    }
}

/// Localize at a prime or rationally: Moore spaces keep only their p-primary
/// part, fibre atoms at other primes become points, and everything torsion
/// vanishes rationally. Structure is otherwise preserved.
pub fn localize(x: &SpaceExpr, at: Localization) -> SpaceExpr {
    localize_raw(x, at).canonicalize()
}

fn localize_raw(x: &SpaceExpr, at: Localization) -> SpaceExpr {
    match x {
        SpaceExpr::Atom(atom) => match (atom, at) {
            (SpaceAtom::Moore { order, dim }, Localization::AtPrime(p)) => {
                let v = arith::valuation(*order, p);
                if v == 0 {
                    SpaceExpr::point()
                } else {
                    SpaceExpr::moore(p.pow(v), *dim)
                }
            }
            (SpaceAtom::Moore { .. }, Localization::Rational) => SpaceExpr::point(),
            (SpaceAtom::FibSphere { prime, .. }, Localization::AtPrime(p)) if *prime != p => {
                SpaceExpr::point()
            }
            (SpaceAtom::FibSphere { .. }, Localization::Rational) => SpaceExpr::point(),
            _ => x.clone(),
        },
        SpaceExpr::Wedge(children) => {
            SpaceExpr::Wedge(children.iter().map(|c| localize_raw(c, at)).collect())
        }
        SpaceExpr::Product(children) => {
            SpaceExpr::Product(children.iter().map(|c| localize_raw(c, at)).collect())
        }
        SpaceExpr::Smash(a, b) => SpaceExpr::Smash(
            Box::new(localize_raw(a, at)),
            Box::new(localize_raw(b, at)),
        ),
        SpaceExpr::Susp(c) => SpaceExpr::Susp(Box::new(localize_raw(c, at))),
        SpaceExpr::Loop(c) => SpaceExpr::Loop(Box::new(localize_raw(c, at))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moore_split_examples() {
        assert_eq!(
            moore_split(4, 45).unwrap(),
            SpaceExpr::wedge(vec![SpaceExpr::moore(9, 4), SpaceExpr::moore(5, 4)])
        );
        assert_eq!(moore_split(4, 7).unwrap(), SpaceExpr::moore(7, 4));
        assert_eq!(
            moore_split(5, 12).unwrap(),
            SpaceExpr::wedge(vec![SpaceExpr::moore(4, 5), SpaceExpr::moore(3, 5)])
        );
        assert_eq!(moore_split(2, 6), Err(SpaceError::DimTooLow { dim: 2 }));
    }

    #[test]
    fn smash_sphere_with_moore_suspends() {
        let s = smash_normalize(&SpaceExpr::sphere(3), &SpaceExpr::moore(3, 4)).unwrap();
        assert_eq!(s, SpaceExpr::moore(3, 7));
    }

    #[test]
    fn smash_same_prime_moore_spaces() {
        let s = smash_normalize(&SpaceExpr::moore(9, 4), &SpaceExpr::moore(3, 3)).unwrap();
        assert_eq!(s, SpaceExpr::wedge(vec![SpaceExpr::moore(3, 7), SpaceExpr::moore(3, 6)]));
    }

    #[test]
    fn smash_distinct_primes_is_contractible() {
        let s = smash_normalize(&SpaceExpr::moore(3, 4), &SpaceExpr::moore(5, 4)).unwrap();
        assert_eq!(s, SpaceExpr::point());
    }

    #[test]
    fn smash_mod_two_rejected_only_when_min_order_is_two() {
        assert_eq!(
            smash_normalize(&SpaceExpr::moore(2, 4), &SpaceExpr::moore(4, 4)),
            Err(SpaceError::Mod2SmashUnsupported)
        );
        // Minimum order 4: the odd-style rule applies.
        let s = smash_normalize(&SpaceExpr::moore(4, 4), &SpaceExpr::moore(8, 4)).unwrap();
        assert_eq!(s, SpaceExpr::wedge(vec![SpaceExpr::moore(4, 8), SpaceExpr::moore(4, 7)]));
    }

    #[test]
    fn smash_is_symmetric() {
        let a = SpaceExpr::wedge(vec![SpaceExpr::sphere(3), SpaceExpr::moore(9, 4)]);
        let b = SpaceExpr::wedge(vec![SpaceExpr::moore(3, 3), SpaceExpr::sphere(4)]);
        assert_eq!(
            smash_normalize(&a, &b).unwrap(),
            smash_normalize(&b, &a).unwrap()
        );
    }

    #[test]
    fn suspend_loop_sphere_is_james_wedge() {
        let s = suspend_normalize(&SpaceExpr::loop_sphere(7), 20).unwrap();
        assert!(s.truncated);
        assert_eq!(
            s.value,
            SpaceExpr::wedge(vec![SpaceExpr::sphere(7), SpaceExpr::sphere(13), SpaceExpr::sphere(19)])
        );
    }

    #[test]
    fn suspend_fib_sphere_is_moore_wedge() {
        let s = suspend_normalize(&SpaceExpr::fib_sphere(3, 3, 2), 9).unwrap();
        assert!(s.truncated);
        assert_eq!(
            s.value,
            SpaceExpr::wedge(vec![
                SpaceExpr::moore(9, 4),
                SpaceExpr::moore(9, 6),
                SpaceExpr::moore(9, 8),
            ])
        );
    }

    #[test]
    fn suspend_point_is_point() {
        let s = suspend_normalize(&SpaceExpr::point(), 10).unwrap();
        assert!(!s.truncated);
        assert_eq!(s.value, SpaceExpr::point());
    }

    #[test]
    fn suspend_finite_wedge_is_exact() {
        let x = SpaceExpr::wedge(vec![SpaceExpr::sphere(3), SpaceExpr::moore(5, 4)]);
        let s = suspend_normalize(&x, 10).unwrap();
        assert!(!s.truncated);
        assert_eq!(s.value, SpaceExpr::wedge(vec![SpaceExpr::moore(5, 5), SpaceExpr::sphere(4)]));
    }

    #[test]
    fn suspend_product_splits_into_subset_smashes() {
        // Si(S^3{3} x Om S^7) to dimension 12:
        //   Si S^3{3}            = P^4(3) v P^6(3) v P^8(3) v P^10(3) v P^12(3)
        //   Si Om S^7            = S^7 (S^13 is out of range)
        //   Si(S^3{3} ^ Om S^7)  = P^10(3) v P^12(3) v ... (from P^3(3)^S^6 etc.)
        let x = SpaceExpr::product(vec![SpaceExpr::fib_sphere(3, 3, 1), SpaceExpr::loop_sphere(7)]);
        let s = suspend_normalize(&x, 12).unwrap();
        assert!(s.truncated);
        let expected = SpaceExpr::wedge(vec![
            SpaceExpr::moore(3, 4),
            SpaceExpr::moore(3, 6),
            SpaceExpr::moore(3, 8),
            SpaceExpr::moore(3, 10),
            SpaceExpr::moore(3, 12),
            SpaceExpr::sphere(7),
            SpaceExpr::moore(3, 10),
            SpaceExpr::moore(3, 12),
        ]);
        assert_eq!(s.value, expected);
    }

    #[test]
    fn suspend_rejects_opaque_loops() {
        let x = SpaceExpr::opaque_loop("V'");
        assert!(matches!(
            suspend_normalize(&x, 10),
            Err(SpaceError::UnsupportedShape(_))
        ));
    }

    #[test]
    fn localize_examples() {
        assert_eq!(
            localize(&SpaceExpr::moore(45, 4), Localization::AtPrime(3)),
            SpaceExpr::moore(9, 4)
        );
        assert_eq!(
            localize(&SpaceExpr::fib_sphere(3, 5, 1), Localization::AtPrime(3)),
            SpaceExpr::point()
        );
        assert_eq!(
            localize(&SpaceExpr::sphere(7), Localization::Rational),
            SpaceExpr::sphere(7)
        );
        // Localization recanonicalizes: a product with a collapsed factor shrinks.
        let x = SpaceExpr::product(vec![SpaceExpr::fib_sphere(3, 5, 1), SpaceExpr::loop_sphere(7)]);
        assert_eq!(localize(&x, Localization::AtPrime(3)), SpaceExpr::loop_sphere(7));
    }
}
