//! Exact arithmetic on truncated Poincare series.
//!
//! A [`PoincareSeries`] records the graded dimensions of a space or algebra
//! as nonnegative integer coefficients `coeff[d] = dim H_d`, exact in every
//! degree up to an explicit `bound` and unknown above it. All operations
//! truncate to the smaller bound of their operands, so a coefficient is never
//! silently wrong: it is either exact or out of range.
//!
//! Coefficients are arbitrary-precision (`BigUint`). Word counts in tensor
//! algebras grow exponentially with degree and overflow fixed-width integers
//! well inside the default working bound.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

/// Errors from series constructions that have preconditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// `geometric` requires a vanishing constant term.
    NonzeroConstantTerm,
    /// `from_rational` requires the denominator's constant term to be a unit.
    NonUnitDenominator,
    /// A rational expansion produced a negative coefficient; the closed form
    /// does not describe a graded dimension count.
    NegativeCoefficient { degree: usize },
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesError::NonzeroConstantTerm => {
                write!(f, "geometric series requires zero constant term")
            }
            SeriesError::NonUnitDenominator => {
                write!(f, "denominator constant term must be 1 or -1")
            }
            SeriesError::NegativeCoefficient { degree } => {
                write!(f, "expansion has a negative coefficient in degree {degree}")
            }
        }
    }
}

impl std::error::Error for SeriesError {}

/// A power series with nonnegative integer coefficients, truncated at `bound`.
///
/// Holds exactly `bound + 1` coefficients for degrees `0..=bound`.
/// Structural equality (`==`) compares bounds and all coefficients; use
/// [`PoincareSeries::agrees_with`] for the domain notion of equality, which
/// compares coefficientwise over the common range of two series.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoincareSeries {
    coeffs: Vec<BigUint>,
}

impl PoincareSeries {
    /// Build a series from its coefficient list; the bound is `len - 1`.
    pub fn new(coeffs: Vec<BigUint>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least a degree-0 coefficient");
        PoincareSeries { coeffs }
    }

    /// Convenience constructor from machine integers.
    pub fn from_ints(coeffs: &[u64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigUint::from(c)).collect())
    }

    /// The zero series to the given bound.
    pub fn zero(bound: usize) -> Self {
        Self::new(vec![BigUint::zero(); bound + 1])
    }

    /// The constant series 1.
    pub fn one(bound: usize) -> Self {
        let mut s = Self::zero(bound);
        s.coeffs[0] = BigUint::one();
        s
    }

    /// The monomial `t^degree` (zero if `degree > bound`).
    pub fn monomial(degree: usize, bound: usize) -> Self {
        let mut s = Self::zero(bound);
        if degree <= bound {
            s.coeffs[degree] = BigUint::one();
        }
        s
    }

    /// Highest degree with a known coefficient.
    pub fn bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient in degree `d`; panics above the bound (the value is unknown).
    pub fn coeff(&self, d: usize) -> &BigUint {
        assert!(d <= self.bound(), "degree {d} exceeds series bound {}", self.bound());
        &self.coeffs[d]
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficientwise sum, truncated to the smaller bound.
    pub fn add(&self, other: &Self) -> Self {
        let bound = self.bound().min(other.bound());
        Self::new((0..=bound).map(|d| &self.coeffs[d] + &other.coeffs[d]).collect())
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        let bound = self.bound().min(other.bound());
        let mut out = vec![BigUint::zero(); bound + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(bound + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(bound + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::new(out)
    }

    /// Multiply by `t^k`: degrees above the bound fall off the end.
    pub fn shift_up(&self, k: usize) -> Self {
        let bound = self.bound();
        let mut out = vec![BigUint::zero(); bound + 1];
        for d in 0..=bound {
            if d + k <= bound {
                out[d + k] = self.coeffs[d].clone();
            }
        }
        Self::new(out)
    }

    /// Divide by `t^k`, discarding the (necessarily zero, checked) low part.
    /// The bound drops by `k` since top coefficients become unknown.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(k <= self.bound(), "cannot shift down past the bound");
        for d in 0..k {
            assert!(self.coeffs[d].is_zero(), "shift_down would drop a nonzero coefficient");
        }
        Self::new(self.coeffs[k..].to_vec())
    }

    /// Restrict to a smaller bound.
    pub fn truncate(&self, bound: usize) -> Self {
        assert!(bound <= self.bound());
        Self::new(self.coeffs[..=bound].to_vec())
    }

    /// Zero out the constant term (pass to the reduced part of a homology series).
    pub fn reduced(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = BigUint::zero();
        s
    }

    /// `1 / (1 - a)`, the series of the free tensor algebra on a graded set
    /// whose letter counts are the coefficients of `a`. Coefficient `d` counts
    /// the words of total degree `d`.
    pub fn geometric(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let bound = self.bound();
        let mut g = vec![BigUint::zero(); bound + 1];
        g[0] = BigUint::one();
        // g = 1 + a*g, solved degree by degree.
        for d in 1..=bound {
            let mut acc = BigUint::zero();
            for j in 1..=d {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &g[d - j];
                }
            }
            g[d] = acc;
        }
        Ok(Self::new(g))
    }

    /// Expand `numer / denom` to the given bound. The denominator must have
    /// constant term `1` or `-1`, and every coefficient of the expansion must
    /// come out nonnegative; a negative one signals a malformed closed form.
    pub fn from_rational(numer: &[i64], denom: &[i64], bound: usize) -> Result<Self, SeriesError> {
        let d0 = denom.first().copied().unwrap_or(0);
        if d0 != 1 && d0 != -1 {
            return Err(SeriesError::NonUnitDenominator);
        }
        let mut out: Vec<BigInt> = Vec::with_capacity(bound + 1);
        for d in 0..=bound {
            // d0 * c[d] = numer[d] - sum_{k>=1} denom[k] * c[d-k]
            let mut acc = BigInt::from(numer.get(d).copied().unwrap_or(0));
            for (k, &dk) in denom.iter().enumerate().skip(1).take(d) {
                if dk != 0 {
                    acc -= BigInt::from(dk) * &out[d - k];
                }
            }
            if d0 == -1 {
                acc = -acc;
            }
            if acc.sign() == Sign::Minus {
                return Err(SeriesError::NegativeCoefficient { degree: d });
            }
            out.push(acc);
        }
        Ok(Self::new(out.into_iter().map(|c| c.to_biguint().unwrap()).collect()))
    }

    /// Integer power by repeated squaring; the exponent may be huge
    /// (Lyndon word multiplicities are exponential in the weight).
    pub fn pow(&self, exp: &BigUint) -> Self {
        let mut result = Self::one(self.bound());
        let mut base = self.clone();
        let bits = exp.bits();
        for i in 0..bits {
            if exp.bit(i) {
                result = result.mul(&base);
            }
            if i + 1 < bits {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Coefficientwise equality over the common range `0..=min(bounds)`.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.first_mismatch(other).is_none()
    }

    /// First degree (within the common range) where two series differ.
    pub fn first_mismatch(&self, other: &Self) -> Option<(usize, BigUint, BigUint)> {
        let bound = self.bound().min(other.bound());
        (0..=bound)
            .find(|&d| self.coeffs[d] != other.coeffs[d])
            .map(|d| (d, self.coeffs[d].clone(), other.coeffs[d].clone()))
    }
}

impl fmt::Display for PoincareSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if d == 0 {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "t^{d}")?;
            } else {
                write!(f, "{c} t^{d}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
