//! Loops on a finite wedge of suspensions, expanded as a product of loops on
//! suspended smashes indexed by Lyndon words.
//!
//! For desuspended summands `A_1, ..., A_k`, the loop space of
//! `Si A_1 v ... v Si A_k` splits as a weak product with one factor
//! `Om Si (A_{i_1} ^ ... ^ A_{i_m})` per basic product of the free Lie
//! algebra, indexed here by Lyndon words over the alphabet `1..k`. Only the
//! multiset of letters in a word matters to series and canonical forms, so
//! multiplicities are what the verification routes track.
//!
//! Two independent series routes are compared by [`hm_series_check`]: the
//! free tensor algebra on the letters (one geometric series), against the
//! product over Lyndon words of the factor series, with word multiplicities
//! from the Witt formula. Explicit word enumeration ([`lyndon_words`]) backs
//! the expression-level expansion and cross-checks the counting formula on
//! small alphabets.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::series::PoincareSeries;
use crate::spaces::{mod_p_series, smash_normalize, SpaceError, SpaceExpr, Truncated};

/// A Lyndon word over letters `0..k`, with its total degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LyndonWord {
    pub letters: Vec<u8>,
    pub weight: u32,
}

impl LyndonWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letter multiplicities as a content vector of length `k`.
    pub fn content(&self, k: usize) -> Vec<u32> {
        let mut c = vec![0u32; k];
        for &l in &self.letters {
            c[l as usize] += 1;
        }
        c
    }
}

impl fmt::Display for LyndonWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// Check the Lyndon condition: strictly smaller than every proper rotation.
pub fn is_lyndon(word: &[u8]) -> bool {
    if word.is_empty() {
        return false;
    }
    for i in 1..word.len() {
        let rotation = word[i..].iter().chain(word[..i].iter());
        if word.iter().ge(rotation) {
            return false;
        }
    }
    true
}

/// All Lyndon words over the graded alphabet whose weight (sum of letter
/// degrees, i.e. smash dimension minus one) is at most `max_weight`, in
/// length-then-lex order. Complete below the cutoff.
pub fn lyndon_words(letter_degrees: &[u32], max_weight: u32) -> Vec<LyndonWord> {
    assert!(!letter_degrees.is_empty(), "alphabet must be nonempty");
    assert!(letter_degrees.iter().all(|&d| d >= 1));
    let k = letter_degrees.len();
    let min_degree = *letter_degrees.iter().min().unwrap();
    let max_len = (max_weight / min_degree) as usize;
    let mut words = Vec::new();
    if max_len == 0 {
        return words;
    }
    // Duval's generation: every emitted prefix is a Lyndon word, in lex order.
    let mut w: Vec<u8> = vec![0];
    loop {
        let weight: u32 = w.iter().map(|&l| letter_degrees[l as usize]).sum();
        if weight <= max_weight {
            words.push(LyndonWord { letters: w.clone(), weight });
        }
        let m = w.len();
        while w.len() < max_len {
            let c = w[w.len() - m];
            w.push(c);
        }
        while w.last() == Some(&(k as u8 - 1)) {
            w.pop();
        }
        if w.is_empty() {
            break;
        }
        *w.last_mut().unwrap() += 1;
    }
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.letters.cmp(&b.letters)));
    words
}

/// Number of Lyndon words of each weight `0..=max_weight` by the graded Witt
/// formula: with `H_m` defined by `H_m = m F_m + sum_j F_j H_{m-j}` for
/// `F` the letter counts by degree, `w L_w = sum_{d|w} mu(w/d) H_d`.
pub fn lyndon_counts(letter_degrees: &[u32], max_weight: u32) -> Vec<BigUint> {
    let mut letter_count = vec![BigInt::zero(); max_weight as usize + 1];
    for &d in letter_degrees {
        if d <= max_weight {
            letter_count[d as usize] += 1;
        }
    }
    let mut h = vec![BigInt::zero(); max_weight as usize + 1];
    for m in 1..=max_weight as usize {
        let mut acc = BigInt::from(m as u64) * &letter_count[m];
        for j in 1..m {
            if !letter_count[j].is_zero() {
                acc += &letter_count[j] * &h[m - j];
            }
        }
        h[m] = acc;
    }
    let mut counts = vec![BigUint::zero()];
    for w in 1..=max_weight as usize {
        let mut acc = BigInt::zero();
        for d in 1..=w {
            if w % d == 0 {
                acc += BigInt::from(mobius((w / d) as u64)) * &h[d];
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(w as u64));
        assert!(r.is_zero() && !q.is_negative(), "Witt formula must divide exactly");
        counts.push(q.to_biguint().unwrap());
    }
    counts
}

/// Number of Lyndon words with a given content (letter multiset), for every
/// content of weight at most `max_weight`:
/// `L(c) = (1/len) sum_{d | gcd(c)} mu(d) * multinomial(len/d; c/d)`.
pub fn lyndon_content_counts(
    letter_degrees: &[u32],
    max_weight: u32,
) -> Vec<(Vec<u32>, BigUint)> {
    let k = letter_degrees.len();
    let mut out = Vec::new();
    let mut content = vec![0u32; k];
    enumerate_contents(letter_degrees, max_weight, 0, &mut content, &mut out);
    out.sort();
    out.into_iter()
        .map(|c| {
            let n = content_count(&c);
            (c, n)
        })
        .collect()
}

fn enumerate_contents(
    degrees: &[u32],
    budget: u32,
    letter: usize,
    content: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if letter == degrees.len() {
        if content.iter().any(|&c| c > 0) {
            out.push(content.clone());
        }
        return;
    }
    let mut used = 0u32;
    let mut count = 0u32;
    while used <= budget {
        content[letter] = count;
        enumerate_contents(degrees, budget - used, letter + 1, content, out);
        count += 1;
        used = count * degrees[letter];
    }
    content[letter] = 0;
}

fn content_count(content: &[u32]) -> BigUint {
    let len: u32 = content.iter().sum();
    let g = content.iter().copied().filter(|&c| c > 0).fold(0u32, |a, b| a.gcd(&b));
    let mut acc = BigInt::zero();
    for d in 1..=g {
        if g % d == 0 {
            let scaled: Vec<u32> = content.iter().map(|&c| c / d).collect();
            acc += BigInt::from(mobius(d as u64)) * BigInt::from(multinomial(len / d, &scaled));
        }
    }
    let (q, r) = acc.div_rem(&BigInt::from(len));
    assert!(r.is_zero() && !q.is_negative(), "Witt content formula must divide exactly");
    q.to_biguint().unwrap()
}

fn multinomial(n: u32, parts: &[u32]) -> BigUint {
    debug_assert_eq!(n, parts.iter().sum::<u32>());
    let mut acc = BigUint::one();
    let mut i = 1u32;
    for &part in parts {
        for j in 1..=part {
            acc = acc * BigUint::from(i) / BigUint::from(j);
            i += 1;
        }
    }
    acc
}

fn mobius(n: u64) -> i64 {
    if n == 1 {
        return 1;
    }
    let factors = arith::factorize(n);
    if factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Bottom cell dimension of a desuspended summand, which is its letter degree.
fn letter_degree(letter: &SpaceExpr) -> Result<u32, SpaceError> {
    if letter.is_point() {
        return Err(SpaceError::UnsupportedShape("a point is not a wedge summand letter".into()));
    }
    Ok(letter.connectivity() + 1)
}

/// The truncated Hilton-Milnor expansion of `Om(Si A_1 v ... v Si A_k)`: a
/// product with one loop factor per Lyndon word of weight at most `n_max`,
/// each factor a loop on the suspended, normalized smash of its letters.
/// Mixed-prime smashes collapse and their factors are omitted.
pub fn hm_expansion(
    letters: &[SpaceExpr],
    n_max: u32,
) -> Result<Truncated<SpaceExpr>, SpaceError> {
    let degrees: Vec<u32> =
        letters.iter().map(letter_degree).collect::<Result<_, _>>()?;
    let words = lyndon_words(&degrees, n_max);
    // Words above the weight cutoff exist whenever the alphabet supports
    // arbitrarily long words, i.e. always except for a single letter.
    let truncated = letters.len() > 1;
    let mut factors = Vec::new();
    for word in &words {
        let mut smash = letters[word.letters[0] as usize].clone();
        for &l in &word.letters[1..] {
            smash = smash_normalize(&smash, &letters[l as usize])?;
        }
        if smash.is_point() {
            continue;
        }
        factors.push(SpaceExpr::loops(SpaceExpr::susp(smash)));
    }
    Ok(Truncated::new(SpaceExpr::product(factors), truncated))
}

/// Compare the two series routes for `Om(Si A_1 v ... v Si A_k)` mod `p` up
/// to degree `n_max`: the free tensor algebra on the reduced letter series
/// against the product over Lyndon word contents of the factor series raised
/// to their multiplicities. Factors with equal series are grouped so that
/// alphabets with huge word counts stay cheap.
pub fn hm_series_check(
    letters: &[SpaceExpr],
    p: u64,
    n_max: usize,
) -> Result<bool, SpaceError> {
    let degrees: Vec<u32> =
        letters.iter().map(letter_degree).collect::<Result<_, _>>()?;
    let reduced: Vec<PoincareSeries> = letters
        .iter()
        .map(|a| mod_p_series(a, p, n_max).map(|s| s.reduced()))
        .collect::<Result<_, _>>()?;

    // Route 1: Bott-Samelson on the whole wedge.
    let mut letter_sum = PoincareSeries::zero(n_max);
    for r in &reduced {
        letter_sum = letter_sum.add(r);
    }
    let direct = letter_sum.geometric()?;

    // Route 2: product over word contents of geometric(smash series)^count.
    let mut grouped: HashMap<PoincareSeries, BigUint> = HashMap::new();
    for (content, count) in lyndon_content_counts(&degrees, n_max as u32) {
        if count.is_zero() {
            continue;
        }
        let mut smash_reduced = PoincareSeries::one(n_max);
        for (i, &c) in content.iter().enumerate() {
            for _ in 0..c {
                smash_reduced = smash_reduced.mul(&reduced[i]);
            }
        }
        let factor = smash_reduced.geometric()?;
        *grouped.entry(factor).or_insert_with(BigUint::zero) += count;
    }
    let mut product = PoincareSeries::one(n_max);
    for (factor, multiplicity) in grouped {
        product = product.mul(&factor.pow(&multiplicity));
    }

    Ok(direct == product)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The classical necklace formula for an ungraded alphabet of size `k`.
    fn necklace_count(k: u64, len: u64) -> u64 {
        let mut acc: i64 = 0;
        for d in 1..=len {
            if len % d == 0 {
                acc += mobius(len / d) * (k.pow(d as u32) as i64);
            }
        }
        (acc / len as i64) as u64
    }

    #[test]
    fn two_letter_counts_match_the_necklace_formula() {
        let words = lyndon_words(&[1, 1], 5);
        let by_len = |l: usize| words.iter().filter(|w| w.len() == l).count() as u64;
        assert_eq!((1..=5).map(by_len).collect::<Vec<_>>(), vec![2, 1, 2, 3, 6]);
        for len in 1..=5u64 {
            assert_eq!(by_len(len as usize), necklace_count(2, len));
        }
    }

    #[test]
    fn single_letter_alphabet_has_one_word() {
        let words = lyndon_words(&[3], 30);
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].letters, vec![0]);
        assert_eq!(words[0].weight, 3);
    }

    #[test]
    fn graded_words_in_length_then_lex_order() {
        // Letters of degrees (2, 3): within the weight-6 cutoff only the
        // words 1, 2, 12 fit; the order continues 112, 122, ...
        let words = lyndon_words(&[2, 3], 6);
        let rendered: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(rendered, vec!["1", "2", "12"]);
        let more = lyndon_words(&[2, 3], 12);
        let rendered: Vec<String> = more.iter().map(|w| w.to_string()).collect();
        assert_eq!(
            rendered,
            vec!["1", "2", "12", "112", "122", "1112", "1122", "1222", "11112", "11122", "11212"]
        );
        for w in &more {
            assert!(is_lyndon(&w.letters));
            assert_eq!(w.weight, w.letters.iter().map(|&l| [2u32, 3][l as usize]).sum::<u32>());
        }
    }

    #[test]
    fn generation_agrees_with_exhaustive_search() {
        // Every Lyndon word is generated, and nothing else: brute-force all
        // words of length <= 7 over two letters.
        let generated = lyndon_words(&[1, 1], 7);
        let mut expected = Vec::new();
        for len in 1..=7usize {
            for code in 0..(1u32 << len) {
                let word: Vec<u8> = (0..len).map(|i| ((code >> i) & 1) as u8).collect();
                if is_lyndon(&word) {
                    expected.push(word);
                }
            }
        }
        expected.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        assert_eq!(generated.len(), expected.len());
        for (w, e) in generated.iter().zip(&expected) {
            assert_eq!(&w.letters, e);
        }
    }

    #[test]
    fn counting_formula_matches_enumeration() {
        for degrees in [vec![1u32, 1], vec![2, 3], vec![1, 2, 3], vec![2, 2]] {
            let counts = lyndon_counts(&degrees, 12);
            let words = lyndon_words(&degrees, 12);
            for w in 0..=12usize {
                let enumerated = words.iter().filter(|x| x.weight == w as u32).count();
                assert_eq!(
                    counts[w],
                    BigUint::from(enumerated),
                    "weight {w} of alphabet {degrees:?}"
                );
            }
        }
    }

    #[test]
    fn content_counts_match_enumeration() {
        let degrees = vec![2u32, 3];
        let by_content = lyndon_content_counts(&degrees, 14);
        let words = lyndon_words(&degrees, 14);
        for (content, count) in &by_content {
            let enumerated =
                words.iter().filter(|w| &w.content(degrees.len()) == content).count();
            assert_eq!(count, &BigUint::from(enumerated), "content {content:?}");
        }
    }

    #[test]
    fn expansion_of_two_suspensions() {
        // Om(P^4(3) v S^4) with letters P^3(3), S^3: words 1, 2, 12, ...
        let letters = vec![SpaceExpr::moore(3, 3), SpaceExpr::sphere(3)];
        let t = hm_expansion(&letters, 8).unwrap();
        assert!(t.truncated);
        let factors = t.value.factors();
        // Words of weight <= 8: 1 (w2), 2 (w3), 12 (w5), 112 (w7), 122 (w8).
        assert_eq!(factors.len(), 5);
        assert!(factors.contains(&SpaceExpr::loops(SpaceExpr::moore(3, 4))));
        assert!(factors.contains(&SpaceExpr::loops(SpaceExpr::sphere(4))));
        // The 12 factor: Om Si(P^3(3) ^ S^3) = Om P^7(3).
        assert!(factors.contains(&SpaceExpr::loops(SpaceExpr::moore(3, 7))));
    }

    #[test]
    fn single_summand_needs_no_splitting() {
        let letters = vec![SpaceExpr::moore(3, 3)];
        let t = hm_expansion(&letters, 20).unwrap();
        assert!(!t.truncated);
        assert_eq!(t.value, SpaceExpr::loops(SpaceExpr::moore(3, 4)));
    }

    #[test]
    fn coprime_moore_letters_leave_only_pure_factors() {
        let letters = vec![SpaceExpr::moore(3, 3), SpaceExpr::moore(5, 3)];
        let t = hm_expansion(&letters, 12).unwrap();
        assert_eq!(
            t.value,
            SpaceExpr::product(vec![
                SpaceExpr::loops(SpaceExpr::moore(3, 4)),
                SpaceExpr::loops(SpaceExpr::moore(5, 4)),
            ])
        );
        assert!(hm_series_check(&letters, 3, 12).unwrap());
    }

    #[test]
    fn series_check_on_degree_one_letters_is_the_necklace_identity() {
        let letters = vec![SpaceExpr::sphere(1), SpaceExpr::sphere(1)];
        assert!(hm_series_check(&letters, 3, 10).unwrap());
    }

    #[test]
    fn series_check_single_summand() {
        let letters = vec![SpaceExpr::sphere(2)];
        assert!(hm_series_check(&letters, 5, 10).unwrap());
    }

    #[test]
    fn grouped_product_matches_explicit_factor_product() {
        // The grouped Witt-count route must agree with multiplying the
        // series of the explicit hm_expansion factors.
        let letters = vec![SpaceExpr::moore(3, 3), SpaceExpr::sphere(3)];
        let bound = 14usize;
        let expansion = hm_expansion(&letters, bound as u32).unwrap();
        let mut explicit = PoincareSeries::one(bound);
        for f in expansion.value.factors() {
            explicit = explicit.mul(&mod_p_series(&f, 3, bound).unwrap());
        }
        let wedge = SpaceExpr::loops(SpaceExpr::wedge(vec![
            SpaceExpr::moore(3, 4),
            SpaceExpr::sphere(4),
        ]));
        let direct = mod_p_series(&wedge, 3, bound).unwrap();
        assert_eq!(explicit, direct);
        assert!(hm_series_check(&letters, 3, bound).unwrap());
    }

    #[test]
    fn expansion_is_truncation_monotone() {
        let letters = vec![SpaceExpr::moore(3, 3), SpaceExpr::sphere(3)];
        let small = hm_expansion(&letters, 10).unwrap().value.factors();
        let large = hm_expansion(&letters, 16).unwrap().value.factors();
        for f in &small {
            let in_small = small.iter().filter(|x| *x == f).count();
            let in_large = large.iter().filter(|x| *x == f).count();
            assert!(in_large >= in_small, "factor {f} disappeared when raising the bound");
        }
        assert!(large.len() > small.len());
    }

    #[test]
    fn mod2_smash_propagates_from_expansion() {
        let letters = vec![SpaceExpr::moore(2, 3), SpaceExpr::moore(4, 3)];
        assert_eq!(hm_expansion(&letters, 10), Err(SpaceError::Mod2SmashUnsupported));
    }
}
