//! Free differential graded algebras over F_p and their homology in a range
//! of degrees.
//!
//! A [`FreeDga`] is a free graded tensor algebra on finitely many generators
//! together with a degree-lowering differential given on generators and
//! extended as a derivation with Koszul signs:
//! `d(ab) = (da)b + (-1)^{|a|} a(db)`. Construction validates that the
//! differential lowers degree by exactly one and squares to zero.
//!
//! Homology dimensions are computed degree by degree: enumerate the word
//! basis, assemble the sparse matrix of the differential, and take
//! `dim ker - dim im` from ranks over F_p. The word basis grows exponentially
//! with degree, so a configurable cap guards against runaway bounds.
//!
//! The one model this crate ever builds is the three-cell model
//! `T(x, y, z; dz = xy - yx)` of a Moore space with a single top cell
//! attached, whose homology is the polynomial algebra on `x` and `y`;
//! [`poly_dims`] provides that count independently as the oracle.

mod linalg;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;

use crate::arith;
use crate::series::PoincareSeries;

/// Letters index into the generator list; words are letter strings.
pub type Word = Vec<u8>;

/// An F_p-linear combination of words, kept sorted and without zero terms.
pub type LinComb = BTreeMap<Word, u64>;

/// Default cap on the word-basis size in any single degree.
pub const DEFAULT_WORD_CAP: usize = 120_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DgaError {
    NotPrime(u64),
    /// A differential image is empty of meaning: wrong degree or unknown letter.
    InvalidDifferential { generator: String, reason: String },
    /// d^2 != 0 on some generator.
    NotSquareZero { generator: String },
    /// The word basis in some degree exceeds the configured cap.
    BasisTooLarge { degree: usize, count: usize, cap: usize },
}

impl fmt::Display for DgaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DgaError::NotPrime(p) => write!(f, "{p} is not prime"),
            DgaError::InvalidDifferential { generator, reason } => {
                write!(f, "invalid differential on {generator}: {reason}")
            }
            DgaError::NotSquareZero { generator } => {
                write!(f, "differential does not square to zero on {generator}")
            }
            DgaError::BasisTooLarge { degree, count, cap } => write!(
                f,
                "word basis in degree {degree} has {count} elements, over the cap of {cap}; \
                 lower the degree bound"
            ),
        }
    }
}

impl std::error::Error for DgaError {}

/// A generator with its degree and optional Bockstein height. The Bockstein
/// is bookkeeping for the Moore-space calculus; it plays no role in ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgaGenerator {
    pub name: String,
    pub degree: u32,
    pub bockstein: Option<u32>,
}

impl DgaGenerator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        assert!(degree >= 1, "generators must have positive degree");
        DgaGenerator { name: name.into(), degree, bockstein: None }
    }

    pub fn with_bockstein(mut self, r: u32) -> Self {
        self.bockstein = Some(r);
        self
    }
}

/// A validated free DGA over F_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeDga {
    prime: u64,
    generators: Vec<DgaGenerator>,
    diffs: Vec<LinComb>,
}

impl FreeDga {
    /// Validates degrees, letters, and `d . d = 0` on every generator.
    pub fn new(
        prime: u64,
        generators: Vec<DgaGenerator>,
        diffs: Vec<LinComb>,
    ) -> Result<Self, DgaError> {
        if !arith::is_prime(prime) {
            return Err(DgaError::NotPrime(prime));
        }
        assert_eq!(generators.len(), diffs.len(), "one differential per generator");
        assert!(generators.len() <= u8::MAX as usize, "too many generators");
        let dga = FreeDga { prime, generators, diffs };
        for (i, diff) in dga.diffs.iter().enumerate() {
            let gen = &dga.generators[i];
            for (word, &coeff) in diff {
                if coeff == 0 || coeff >= prime {
                    return Err(DgaError::InvalidDifferential {
                        generator: gen.name.clone(),
                        reason: format!("coefficient {coeff} out of range 1..{prime}"),
                    });
                }
                if word.iter().any(|&l| l as usize >= dga.generators.len()) {
                    return Err(DgaError::InvalidDifferential {
                        generator: gen.name.clone(),
                        reason: "word uses an undeclared generator".into(),
                    });
                }
                let word_degree: u32 = word.iter().map(|&l| dga.generators[l as usize].degree).sum();
                if word.is_empty() || word_degree + 1 != gen.degree {
                    return Err(DgaError::InvalidDifferential {
                        generator: gen.name.clone(),
                        reason: format!(
                            "image word has degree {word_degree}, expected {}",
                            gen.degree as i64 - 1
                        ),
                    });
                }
            }
        }
        for i in 0..dga.generators.len() {
            let once = dga.diffs[i].clone();
            let twice = dga.differentiate(&once);
            if !twice.is_empty() {
                return Err(DgaError::NotSquareZero {
                    generator: dga.generators[i].name.clone(),
                });
            }
        }
        Ok(dga)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn generators(&self) -> &[DgaGenerator] {
        &self.generators
    }

    pub fn differential(&self, generator: usize) -> &LinComb {
        &self.diffs[generator]
    }

    /// Derivation extension of the differential to a single word.
    pub fn d_word(&self, word: &[u8]) -> LinComb {
        let mut out = LinComb::new();
        let mut sign_degree = 0u32;
        for (j, &letter) in word.iter().enumerate() {
            let image = &self.diffs[letter as usize];
            if !image.is_empty() {
                // Koszul sign from the letters passed over.
                let negate = sign_degree % 2 == 1;
                for (piece, &coeff) in image {
                    let mut w = Vec::with_capacity(word.len() - 1 + piece.len());
                    w.extend_from_slice(&word[..j]);
                    w.extend_from_slice(piece);
                    w.extend_from_slice(&word[j + 1..]);
                    let signed = if negate { (self.prime - coeff) % self.prime } else { coeff };
                    add_term(&mut out, w, signed, self.prime);
                }
            }
            sign_degree += self.generators[letter as usize].degree;
        }
        out
    }

    /// Derivation extension to a linear combination.
    pub fn differentiate(&self, lc: &LinComb) -> LinComb {
        let mut out = LinComb::new();
        for (word, &coeff) in lc {
            for (w, c) in self.d_word(word) {
                add_term(&mut out, w, coeff * c % self.prime, self.prime);
            }
        }
        out
    }

    /// All words of each degree `0..=max_degree`, in a fixed order.
    pub fn word_basis(&self, max_degree: usize, cap: usize) -> Result<Vec<Vec<Word>>, DgaError> {
        let mut by_degree: Vec<Vec<Word>> = vec![vec![Vec::new()]];
        for d in 1..=max_degree {
            let mut words = Vec::new();
            for (i, gen) in self.generators.iter().enumerate() {
                let g = gen.degree as usize;
                if g <= d {
                    for tail in &by_degree[d - g] {
                        let mut w = Vec::with_capacity(tail.len() + 1);
                        w.push(i as u8);
                        w.extend_from_slice(tail);
                        words.push(w);
                    }
                }
            }
            if words.len() > cap {
                return Err(DgaError::BasisTooLarge { degree: d, count: words.len(), cap });
            }
            by_degree.push(words);
        }
        Ok(by_degree)
    }

    /// Homology dimensions in degrees `0..=bound` as a Poincare series,
    /// with the default basis cap.
    pub fn homology_dims(&self, bound: usize) -> Result<PoincareSeries, DgaError> {
        self.homology_dims_capped(bound, DEFAULT_WORD_CAP)
    }

    /// Homology dimensions with an explicit cap on per-degree basis size.
    ///
    /// For each degree the matrix of the differential into the next degree
    /// down is assembled over the word basis and its rank computed;
    /// `dim H_d = #words(d) - rank d_d - rank d_{d+1}`.
    pub fn homology_dims_capped(
        &self,
        bound: usize,
        cap: usize,
    ) -> Result<PoincareSeries, DgaError> {
        assert!(bound >= 1);
        let basis = self.word_basis(bound + 1, cap)?;
        let mut ranks = vec![0usize; bound + 3];
        for d in 1..=bound + 1 {
            ranks[d] = self.rank_of_differential(&basis, d);
        }
        let mut dims = Vec::with_capacity(bound + 1);
        for d in 0..=bound {
            let cycles = basis[d].len() - ranks[d];
            let boundaries = ranks[d + 1];
            dims.push(BigUint::from(cycles - boundaries));
        }
        Ok(PoincareSeries::new(dims))
    }

    /// Rank of `d : A_d -> A_{d-1}` over the word bases.
    fn rank_of_differential(&self, basis: &[Vec<Word>], d: usize) -> usize {
        let targets: HashMap<&Word, u32> =
            basis[d - 1].iter().enumerate().map(|(i, w)| (w, i as u32)).collect();
        let rows = basis[d].iter().map(|w| {
            let image = self.d_word(w);
            let mut row: Vec<(u32, u64)> =
                image.iter().map(|(word, &c)| (targets[word], c)).collect();
            row.sort_unstable_by_key(|&(col, _)| col);
            row
        });
        linalg::rank(self.prime, rows)
    }
}

fn add_term(lc: &mut LinComb, word: Word, coeff: u64, p: u64) {
    use std::collections::btree_map::Entry;
    let c = coeff % p;
    if c == 0 {
        return;
    }
    match lc.entry(word) {
        Entry::Occupied(mut e) => {
            let v = (*e.get() + c) % p;
            if v == 0 {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
        Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

/// The Adams-Hilton model of the three-cell complex `P^{2n}(p^r) u e^{4n-1}`:
/// `T(x, y, z)` with `|x| = 2n-2`, `|y| = 2n-1`, `|z| = 4n-2`, `dx = dy = 0`
/// and `dz = xy - yx`. The Bockstein `beta^r y = x` is carried as metadata.
pub fn ah_model(n: u32, p: u64, r: u32) -> FreeDga {
    assert!(n >= 2);
    assert!(r >= 1);
    let generators = vec![
        DgaGenerator::new("x", 2 * n - 2),
        DgaGenerator::new("y", 2 * n - 1).with_bockstein(r),
        DgaGenerator::new("z", 4 * n - 2),
    ];
    let mut dz = LinComb::new();
    dz.insert(vec![0, 1], 1);
    dz.insert(vec![1, 0], p - 1);
    let diffs = vec![LinComb::new(), LinComb::new(), dz];
    FreeDga::new(p, generators, diffs).expect("the three-cell model is valid")
}

/// Monomial counts of the commutative polynomial algebra on two generators:
/// `coeff[d] = #{(i, j) : i*deg_x + j*deg_y = d}`. Independent of any DGA
/// machinery; this is the oracle the Adams-Hilton homology is checked against.
pub fn poly_dims(deg_x: u32, deg_y: u32, bound: usize) -> PoincareSeries {
    assert!(deg_x >= 1 && deg_y >= 1);
    let mut dims = vec![BigUint::from(0u32); bound + 1];
    let mut i = 0usize;
    while i * deg_x as usize <= bound {
        let mut j = 0usize;
        loop {
            let d = i * deg_x as usize + j * deg_y as usize;
            if d > bound {
                break;
            }
            dims[d] += 1u32;
            j += 1;
        }
        i += 1;
    }
    PoincareSeries::new(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ah_model_shape() {
        let m = ah_model(2, 3, 1);
        let degs: Vec<u32> = m.generators().iter().map(|g| g.degree).collect();
        assert_eq!(degs, vec![2, 3, 6]);
        assert_eq!(m.generators()[1].bockstein, Some(1));
        let dz = m.differential(2);
        assert_eq!(dz.get(&vec![0u8, 1]), Some(&1));
        assert_eq!(dz.get(&vec![1u8, 0]), Some(&2));
        // Shifted degrees at n = 3, p = 5, r = 2.
        let m = ah_model(3, 5, 2);
        let degs: Vec<u32> = m.generators().iter().map(|g| g.degree).collect();
        assert_eq!(degs, vec![4, 5, 10]);
    }

    #[test]
    fn d_squared_vanishes_on_dz() {
        let m = ah_model(2, 3, 1);
        let ddz = m.differentiate(m.differential(2));
        assert!(ddz.is_empty());
    }

    #[test]
    fn invalid_differentials_are_rejected() {
        // d(y) = x lowers degree by 1 only if |y| = |x| + 1; here it is not.
        let gens = vec![DgaGenerator::new("x", 2), DgaGenerator::new("y", 4)];
        let mut dy = LinComb::new();
        dy.insert(vec![0], 1);
        let err = FreeDga::new(3, gens, vec![LinComb::new(), dy]).unwrap_err();
        assert!(matches!(err, DgaError::InvalidDifferential { .. }));
    }

    #[test]
    fn non_square_zero_is_rejected() {
        // T(a, b, c): da = 0, db = a^2 would need |b| = 2|a| + 1; pick
        // degrees so that db = aa and dc = ab, giving d(dc) = -a*aa != 0
        // ... in fact d(dc) = (da)b - a(db) = -a^3.
        let gens = vec![
            DgaGenerator::new("a", 2),
            DgaGenerator::new("b", 5),
            DgaGenerator::new("c", 8),
        ];
        let mut db = LinComb::new();
        db.insert(vec![0, 0], 1);
        let mut dc = LinComb::new();
        dc.insert(vec![0, 1], 1);
        let err = FreeDga::new(3, gens, vec![LinComb::new(), db, dc]).unwrap_err();
        assert_eq!(err, DgaError::NotSquareZero { generator: "c".into() });
    }

    #[test]
    fn homology_of_three_cell_model_matches_polynomial_oracle() {
        let m = ah_model(2, 3, 1);
        let h = m.homology_dims(8).unwrap();
        assert_eq!(h, PoincareSeries::from_ints(&[1, 0, 1, 1, 1, 1, 2, 1, 2]));
        assert_eq!(h, poly_dims(2, 3, 8));
        let m = ah_model(3, 3, 1);
        let h = m.homology_dims(12).unwrap();
        assert_eq!(h, PoincareSeries::from_ints(&[1, 0, 0, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1]));
        assert_eq!(h, poly_dims(4, 5, 12));
    }

    #[test]
    fn zero_differential_homology_is_the_whole_algebra() {
        let gens = vec![DgaGenerator::new("u", 2), DgaGenerator::new("v", 3)];
        let dga = FreeDga::new(5, gens, vec![LinComb::new(), LinComb::new()]).unwrap();
        let h = dga.homology_dims(10).unwrap();
        let letters = PoincareSeries::from_ints(&[0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(h, letters.geometric().unwrap());
    }

    #[test]
    fn homology_is_independent_of_bockstein_height() {
        let h1 = ah_model(2, 3, 1).homology_dims(10).unwrap();
        let h2 = ah_model(2, 3, 2).homology_dims(10).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn d_squared_vanishes_on_the_whole_word_basis() {
        for (n, p) in [(2u32, 3u64), (2, 5), (3, 3)] {
            let m = ah_model(n, p, 1);
            let basis = m.word_basis(16, DEFAULT_WORD_CAP).unwrap();
            for words in &basis {
                for w in words {
                    let once = m.d_word(w);
                    assert!(m.differentiate(&once).is_empty(), "d^2 != 0 on {w:?}");
                }
            }
        }
    }

    #[test]
    fn rank_nullity_per_degree() {
        // dim ker + rank = word count, with dim ker recovered from homology
        // plus the next rank: #words(d) = rank_d + (dim H_d + rank_{d+1}).
        let m = ah_model(2, 3, 1);
        let bound = 12;
        let basis = m.word_basis(bound + 1, DEFAULT_WORD_CAP).unwrap();
        let h = m.homology_dims(bound).unwrap();
        let ranks: Vec<usize> =
            (1..=bound + 1).map(|d| m.rank_of_differential(&basis, d)).collect();
        for d in 1..=bound {
            let words = basis[d].len();
            let h_d: usize = h.coeff(d).try_into().unwrap();
            assert_eq!(words, ranks[d - 1] + h_d + ranks[d]);
        }
    }

    #[test]
    fn poly_dims_examples() {
        assert_eq!(poly_dims(2, 3, 6), PoincareSeries::from_ints(&[1, 0, 1, 1, 1, 1, 2]));
        assert_eq!(*poly_dims(2, 3, 0).coeff(0), BigUint::from(1u32));
        assert_eq!(poly_dims(4, 5, 9), PoincareSeries::from_ints(&[1, 0, 0, 0, 1, 1, 0, 0, 1, 1]));
    }

    #[test]
    fn basis_cap_errors() {
        let m = ah_model(2, 3, 1);
        let err = m.homology_dims_capped(20, 10).unwrap_err();
        assert!(matches!(err, DgaError::BasisTooLarge { .. }));
    }
}
