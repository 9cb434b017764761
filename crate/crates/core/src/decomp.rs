//! The decomposition engine: from the torsion of the middle cohomology group
//! to the canonical product decomposition of the loop space, with a series
//! certificate for every claimed equivalence.
//!
//! For a (2n-2)-connected (4n-1)-dimensional Poincare Duality complex `M`
//! whose middle cohomology is the given torsion:
//!
//! * the 2n-skeleton splits as `P^{2n}(m) v Si A` with `m` the lcm of the
//!   odd prime powers and `A` the leftover Moore spaces, desuspended;
//! * `Om V` for the three-cell complex `V = P^{2n}(m) u e^{4n-1}` splits as
//!   a product of fibres `S^{2n-1}{p^r}` and `Om S^{4n-1}`;
//! * `Om M` splits as `Om V x Om W` where `W = (Si Om V ^ A) v Si A`
//!   normalizes to a wedge of spheres and Moore spaces;
//! * `Om(M_{2n} v S^{4n-1})` splits as `Om M x Om((P^{4n-1}(m) ^ Om M) v
//!   P^{4n-1}(m))`, which ties the two decompositions together through one
//!   series identity and is the strongest internal cross-check;
//! * with 2-torsion of exponent at least 2 present, the same shape holds
//!   with `V'` = (odd wedge v 2-primary wedge) u e^{4n-1} kept opaque;
//! * for `V = P^{2n}(2^r) u e^{4n-1}` with (n, r) in the proven range, the
//!   mod-2^r tangent bundle decomposition applies verbatim.
//!
//! Certificates are series-level evidence, not proofs: each records an exact
//! coefficientwise equality of two independently computed truncated series,
//! at every prime dividing the torsion, at a control prime, and rationally.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;

use crate::arith;
use crate::dga::poly_dims;
use crate::series::PoincareSeries;
use crate::spaces::{
    localize, series_of, smash_normalize, suspend_normalize, Coefficients, Localization,
    OpaqueBindings, SpaceError, SpaceExpr, Truncated,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompError {
    InvalidInput(String),
    /// The requested case is outside the proven hypotheses; no decomposition
    /// is emitted.
    HypothesisNotMet(String),
    Space(SpaceError),
}

impl fmt::Display for DecompError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            DecompError::HypothesisNotMet(msg) => write!(f, "hypothesis not met: {msg}"),
            DecompError::Space(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DecompError {}

impl From<SpaceError> for DecompError {
    fn from(e: SpaceError) -> Self {
        DecompError::Space(e)
    }
}

/// A torsion summand `Z/p^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimePower {
    pub prime: u64,
    pub exp: u32,
}

impl PrimePower {
    pub fn order(&self) -> u64 {
        self.prime.pow(self.exp)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exp)
        }
    }
}

/// `n` together with the torsion multiset of the middle cohomology,
/// separated into odd and 2-primary parts. Construction canonicalizes the
/// multiset order, so equal multisets give structurally equal inputs
/// regardless of how they were listed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsionInput {
    n: u32,
    odd: Vec<PrimePower>,
    even_exponents: Vec<u32>,
}

impl TorsionInput {
    pub fn new(
        n: u32,
        odd: Vec<(u64, u32)>,
        even_exponents: Vec<u32>,
    ) -> Result<Self, DecompError> {
        if n < 2 {
            return Err(DecompError::InvalidInput("n must be at least 2".into()));
        }
        let mut odd_pp = Vec::with_capacity(odd.len());
        for (p, r) in odd {
            if p == 2 {
                return Err(DecompError::InvalidInput(
                    "2-primary torsion goes in the even part".into(),
                ));
            }
            if !arith::is_prime(p) {
                return Err(DecompError::InvalidInput(format!("{p} is not prime")));
            }
            if r < 1 {
                return Err(DecompError::InvalidInput("exponents must be at least 1".into()));
            }
            odd_pp.push(PrimePower { prime: p, exp: r });
        }
        if odd_pp.is_empty() {
            return Err(DecompError::InvalidInput(
                "at least one odd prime power is required".into(),
            ));
        }
        for &r in &even_exponents {
            if r < 2 {
                return Err(DecompError::InvalidInput(
                    "2-primary exponents must be at least 2".into(),
                ));
            }
        }
        let mut even = even_exponents;
        odd_pp.sort();
        even.sort_unstable();
        Ok(TorsionInput { n, odd: odd_pp, even_exponents: even })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn odd(&self) -> &[PrimePower] {
        &self.odd
    }

    pub fn even_exponents(&self) -> &[u32] {
        &self.even_exponents
    }

    pub fn has_two_torsion(&self) -> bool {
        !self.even_exponents.is_empty()
    }

    /// Distinct primes of the whole torsion multiset.
    pub fn torsion_primes(&self) -> Vec<u64> {
        let mut primes: BTreeSet<u64> = self.odd.iter().map(|pp| pp.prime).collect();
        if self.has_two_torsion() {
            primes.insert(2);
        }
        primes.into_iter().collect()
    }

    /// Drop every summand at primes other than `p`.
    pub fn localized(&self, p: u64) -> Result<TorsionInput, DecompError> {
        let odd = self
            .odd
            .iter()
            .filter(|pp| pp.prime == p)
            .map(|pp| (pp.prime, pp.exp))
            .collect();
        let even =
            if p == 2 { self.even_exponents.clone() } else { Vec::new() };
        TorsionInput::new(self.n, odd, even)
    }
}

/// The skeleton data extracted from a torsion input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonData {
    /// lcm of the odd prime powers.
    pub m: u64,
    /// Its prime decomposition: one maximal exponent per distinct prime.
    pub m_factors: Vec<PrimePower>,
    /// Odd prime powers left over after the maximal ones went into `m`.
    pub leftover: Vec<PrimePower>,
    /// The wedge `A` of leftover Moore spaces, desuspended once (`Point` if none).
    pub desuspended_a: SpaceExpr,
    /// The full 2n-skeleton as a wedge of Moore spaces.
    pub skeleton: SpaceExpr,
    n: u32,
    even_exponents: Vec<u32>,
}

/// One certificate line: two series routes compared over one coefficient
/// field up to a degree bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesCheck {
    pub route: String,
    pub field: Coefficients,
    pub bound: usize,
    pub pass: bool,
    /// First failing degree with the two coefficients, when `pass` is false.
    pub mismatch: Option<(usize, BigUint, BigUint)>,
}

impl SeriesCheck {
    fn compare(route: &str, field: Coefficients, lhs: &PoincareSeries, rhs: &PoincareSeries) -> Self {
        let bound = lhs.bound().min(rhs.bound());
        let mismatch = lhs.first_mismatch(rhs);
        SeriesCheck { route: route.to_string(), field, bound, pass: mismatch.is_none(), mismatch }
    }
}

/// The fibration a decomposition came from, recorded symbolically. The
/// attaching map is an opaque label; no map-level computation is attempted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibrationRecord {
    pub fibre: String,
    pub total: String,
    pub base: String,
    pub attaching: String,
}

/// A verified loop space decomposition: the canonical product of factors,
/// the complementary wedge, the fibration it arose from, and the per-field
/// series certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionResult {
    pub n: u32,
    /// What was decomposed, e.g. `Om M`.
    pub loop_space: String,
    /// Canonical product of atoms and loop factors.
    pub factors: SpaceExpr,
    /// The wedge `W` complementing `Om V` (`Point` when `M = V`), with its
    /// truncation flag.
    pub complement: Truncated<SpaceExpr>,
    pub fibration: Option<FibrationRecord>,
    pub certificate: Vec<SeriesCheck>,
    pub bound: usize,
    pub notes: Vec<String>,
}

impl DecompositionResult {
    /// A decomposition counts as verified only if every check passed.
    pub fn verified(&self) -> bool {
        self.certificate.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&SeriesCheck> {
        self.certificate.iter().find(|c| !c.pass)
    }
}

/// Split the 2n-skeleton: maximal exponents per odd prime form `P^{2n}(m)`,
/// the remaining odd prime powers form `Si A`, and 2-primary summands are
/// listed separately.
pub fn skeleton_decomposition(input: &TorsionInput) -> SkeletonData {
    let n = input.n();
    let dim = 2 * n;
    let mut max_per_prime: std::collections::BTreeMap<u64, u32> = Default::default();
    for pp in input.odd() {
        let e = max_per_prime.entry(pp.prime).or_insert(0);
        *e = (*e).max(pp.exp);
    }
    let m_factors: Vec<PrimePower> =
        max_per_prime.iter().map(|(&prime, &exp)| PrimePower { prime, exp }).collect();
    let m = m_factors.iter().map(|pp| pp.order()).product();

    // One copy of the maximal exponent goes into m; everything else is A.
    let mut leftover: Vec<PrimePower> = Vec::new();
    let mut max_used: std::collections::BTreeMap<u64, bool> = Default::default();
    for pp in input.odd() {
        let is_max = pp.exp == max_per_prime[&pp.prime];
        if is_max && !max_used.get(&pp.prime).copied().unwrap_or(false) {
            max_used.insert(pp.prime, true);
        } else {
            leftover.push(*pp);
        }
    }
    leftover.sort();

    let desuspended_a = SpaceExpr::wedge(
        leftover.iter().map(|pp| SpaceExpr::moore(pp.order(), dim - 1)).collect(),
    );
    let mut skeleton_summands: Vec<SpaceExpr> =
        m_factors.iter().map(|pp| SpaceExpr::moore(pp.order(), dim)).collect();
    skeleton_summands.extend(leftover.iter().map(|pp| SpaceExpr::moore(pp.order(), dim)));
    skeleton_summands.extend(
        input.even_exponents().iter().map(|&r| SpaceExpr::moore(2u64.pow(r), dim)),
    );
    SkeletonData {
        m,
        m_factors,
        leftover,
        desuspended_a,
        skeleton: SpaceExpr::wedge(skeleton_summands),
        n,
        even_exponents: input.even_exponents().to_vec(),
    }
}

/// The factors of `Om V`: one fibre atom per prime of `m` and a loop sphere.
fn v_factors(n: u32, m_factors: &[PrimePower]) -> Vec<SpaceExpr> {
    let mut factors: Vec<SpaceExpr> = m_factors
        .iter()
        .map(|pp| SpaceExpr::fib_sphere(2 * n - 1, pp.prime, pp.exp))
        .collect();
    factors.push(SpaceExpr::loop_sphere(4 * n - 1));
    factors
}

/// Smallest odd prime dividing none of the torsion orders.
fn control_prime(torsion_primes: &[u64]) -> u64 {
    let mut q = 3u64;
    loop {
        if arith::is_prime(q) && !torsion_primes.contains(&q) {
            return q;
        }
        q += 2;
    }
}

fn loop_sphere_series(n: u32, bound: usize) -> PoincareSeries {
    let period = (4 * n - 2) as usize;
    let mut denom = vec![0i64; period + 1];
    denom[0] = 1;
    denom[period] = -1;
    PoincareSeries::from_rational(&[1], &denom, bound).expect("geometric closed form")
}

fn require_bound(n: u32, bound: usize) -> Result<(), DecompError> {
    let needed = (4 * n - 2) as usize;
    if bound < needed {
        return Err(DecompError::InvalidInput(format!(
            "the bound must reach the loop degree of the top cell: need at least {needed}"
        )));
    }
    Ok(())
}

/// Theorem-1(c) shape: `Om V = prod_j S^{2n-1}{p_j^{r_j}} x Om S^{4n-1}`,
/// certified against the polynomial algebra dimensions at every prime of `m`
/// and against the top loop sphere rationally and at a control prime.
pub fn loop_v_decomposition(
    n: u32,
    m_factors: &[PrimePower],
    bound: usize,
) -> Result<DecompositionResult, DecompError> {
    if n < 2 {
        return Err(DecompError::InvalidInput("n must be at least 2".into()));
    }
    require_bound(n, bound)?;
    if m_factors.iter().any(|pp| pp.prime == 2) {
        return Err(DecompError::InvalidInput(
            "2-primary fibres are only available through the tangent bundle cases".into(),
        ));
    }
    let factors = SpaceExpr::product(v_factors(n, m_factors));
    let mut certificate = Vec::new();
    let primes: Vec<u64> = m_factors.iter().map(|pp| pp.prime).collect();
    let polynomial = poly_dims(2 * n - 2, 2 * n - 1, bound);
    for &p in &primes {
        let series = series_of(&factors, Coefficients::ModP(p), bound, &OpaqueBindings::new())?;
        certificate.push(SeriesCheck::compare(
            "factors vs polynomial algebra",
            Coefficients::ModP(p),
            &series,
            &polynomial,
        ));
    }
    let sphere = loop_sphere_series(n, bound);
    let q = control_prime(&primes);
    let control = series_of(&factors, Coefficients::ModP(q), bound, &OpaqueBindings::new())?;
    certificate.push(SeriesCheck::compare(
        "factors vs top loop sphere",
        Coefficients::ModP(q),
        &control,
        &sphere,
    ));
    let rational = series_of(&factors, Coefficients::Rational, bound, &OpaqueBindings::new())?;
    certificate.push(SeriesCheck::compare(
        "factors vs top loop sphere",
        Coefficients::Rational,
        &rational,
        &sphere,
    ));
    Ok(DecompositionResult {
        n,
        loop_space: "Om V".into(),
        factors,
        complement: Truncated::exact(SpaceExpr::point()),
        fibration: None,
        certificate,
        bound,
        notes: Vec::new(),
    })
}

/// The pieces of the Theorem-1 decomposition of `Om M`, before certificates.
struct MParts {
    skeleton: SkeletonData,
    factors: SpaceExpr,
    complement: Truncated<SpaceExpr>,
}

fn m_parts(input: &TorsionInput, bound: usize) -> Result<MParts, DecompError> {
    let n = input.n();
    let skeleton = skeleton_decomposition(input);
    let v = v_factors(n, &skeleton.m_factors);
    let a = &skeleton.desuspended_a;

    let complement = if a.is_point() {
        Truncated::exact(SpaceExpr::point())
    } else {
        // W = (Si Om V ^ A) v Si A, normalized. A Moore summand of dimension
        // d carries homology down to degree d - 1, so keeping summands
        // through dimension bound + 2 makes the series of W exact to degree
        // bound + 1 and hence the series of Om W exact to bound.
        let cutoff = (bound + 2) as u32;
        let sigma_omega_v = suspend_normalize(&SpaceExpr::product(v.clone()), cutoff)?;
        let smashed = smash_normalize(&sigma_omega_v.value, a)?;
        let mut truncated = sigma_omega_v.truncated;
        let mut summands = Vec::new();
        for s in smashed.summands() {
            if s.is_point() {
                continue;
            }
            match s.dimension() {
                Some(d) if d <= cutoff => summands.push(s),
                _ => truncated = true,
            }
        }
        summands.extend(SpaceExpr::susp(a.clone()).summands().into_iter().filter(|s| !s.is_point()));
        Truncated::new(SpaceExpr::wedge(summands), truncated)
    };

    let mut all_factors = v;
    if !complement.value.is_point() {
        all_factors.push(SpaceExpr::Loop(Box::new(complement.value.clone())));
    }
    Ok(MParts { skeleton, factors: SpaceExpr::product(all_factors), complement })
}

fn omega_m_series(
    parts: &MParts,
    field: Coefficients,
    bound: usize,
) -> Result<PoincareSeries, SpaceError> {
    series_of(&parts.factors, field, bound, &OpaqueBindings::new())
}

/// The skeleton-wedge series identity relating `Om(M_{2n} v S^{4n-1})` to
/// `Om M x Om((P^{4n-1}(m) ^ Om M) v P^{4n-1}(m))`, checked over one field.
///
/// Left route: the free tensor algebra on the desuspended skeleton wedge
/// plus the top sphere. Right route: the given `Om M` series times the free
/// tensor algebra on the desuspended fibre, whose reduced series is
/// `red(P^{4n-1}(m)) * series(Om M)`.
fn skeleton_wedge_check(
    skeleton: &SkeletonData,
    omega_m: &PoincareSeries,
    field: Coefficients,
    bound: usize,
) -> Result<SeriesCheck, SpaceError> {
    let n = skeleton.n;
    let top = (4 * n - 1) as usize;
    let wedge = SpaceExpr::wedge(vec![
        skeleton.skeleton.clone(),
        SpaceExpr::sphere(top as u32),
    ]);
    let letters = series_of(&wedge, field, bound + 1, &OpaqueBindings::new())?
        .reduced()
        .shift_down(1);
    let left = letters.geometric()?;

    let moore_top = SpaceExpr::moore(skeleton.m, top as u32);
    let p_reduced = series_of(&moore_top, field, bound + 1, &OpaqueBindings::new())?.reduced();
    // red(P)*S is divisible by t, so desuspending commutes with the product.
    let fibre_letters = p_reduced.shift_down(1).mul(omega_m);
    let right = omega_m.mul(&fibre_letters.geometric()?);

    Ok(SeriesCheck::compare("skeleton wedge cross-check", field, &left, &right))
}

/// Theorem-1 shape: `Om M = Om V x Om W` with `W` an explicit wedge of
/// spheres and odd-primary Moore spaces.
pub fn loop_m_decomposition(
    input: &TorsionInput,
    bound: usize,
) -> Result<DecompositionResult, DecompError> {
    if input.has_two_torsion() {
        return Err(DecompError::InvalidInput(
            "odd torsion only; 2-torsion goes through the two-torsion decomposition".into(),
        ));
    }
    require_bound(input.n(), bound)?;
    let n = input.n();
    let parts = m_parts(input, bound)?;
    let mut certificate = Vec::new();

    let polynomial = poly_dims(2 * n - 2, 2 * n - 1, bound);
    let v_product = SpaceExpr::product(v_factors(n, &parts.skeleton.m_factors));
    let primes: Vec<u64> = parts.skeleton.m_factors.iter().map(|pp| pp.prime).collect();
    for &p in &primes {
        let field = Coefficients::ModP(p);
        let v_series = series_of(&v_product, field, bound, &OpaqueBindings::new())?;
        certificate.push(SeriesCheck::compare(
            "factors vs polynomial algebra",
            field,
            &v_series,
            &polynomial,
        ));

        // The normalized W must match the series it was rewritten from:
        // red(W) = t*red(Om V)*red(A) + t*red(A).
        let w_series =
            series_of(&parts.complement.value, field, bound, &OpaqueBindings::new())?;
        let a_reduced =
            series_of(&parts.skeleton.desuspended_a, field, bound, &OpaqueBindings::new())?
                .reduced();
        let expected = PoincareSeries::one(bound)
            .add(&v_series.reduced().mul(&a_reduced).shift_up(1))
            .add(&a_reduced.shift_up(1));
        certificate.push(SeriesCheck::compare(
            "fibre wedge normalization",
            field,
            &w_series,
            &expected,
        ));

        let omega_m = omega_m_series(&parts, field, bound)?;
        certificate.push(skeleton_wedge_check(&parts.skeleton, &omega_m, field, bound)?);
    }

    let sphere = loop_sphere_series(n, bound);
    let q = control_prime(&primes);
    for field in [Coefficients::ModP(q), Coefficients::Rational] {
        let series = omega_m_series(&parts, field, bound)?;
        certificate.push(SeriesCheck::compare(
            "factors vs top loop sphere",
            field,
            &series,
            &sphere,
        ));
    }

    let base = format!("V = P^{}({}) u e^{}", 2 * n, parts.skeleton.m, 4 * n - 1);
    let fibration = FibrationRecord {
        fibre: parts.complement.value.to_string(),
        total: "M".into(),
        base,
        attaching: "[gamma,f]+f".into(),
    };
    Ok(DecompositionResult {
        n,
        loop_space: "Om M".into(),
        factors: parts.factors,
        complement: parts.complement,
        fibration: Some(fibration),
        certificate,
        bound,
        notes: Vec::new(),
    })
}

/// Theorem-2 shape: `Om(M_{2n} v S^{4n-1}) = Om M x Om((P^{4n-1}(m) ^ Om M)
/// v P^{4n-1}(m))`, certified by the skeleton-wedge series identity at each
/// torsion prime, at a control prime, and rationally.
pub fn skeleton_wedge_decomposition(
    input: &TorsionInput,
    bound: usize,
) -> Result<DecompositionResult, DecompError> {
    if input.has_two_torsion() {
        return Err(DecompError::InvalidInput(
            "odd torsion only; 2-torsion goes through the two-torsion decomposition".into(),
        ));
    }
    require_bound(input.n(), bound)?;
    let n = input.n();
    let parts = m_parts(input, bound)?;
    let top = 4 * n - 1;
    let moore_top = SpaceExpr::moore(parts.skeleton.m, top);
    let fibre = SpaceExpr::wedge(vec![
        SpaceExpr::smash(moore_top.clone(), parts.factors.clone()),
        moore_top,
    ]);
    let factors = SpaceExpr::product(vec![
        parts.factors.clone(),
        SpaceExpr::Loop(Box::new(fibre.clone())),
    ]);

    let mut certificate = Vec::new();
    let primes: Vec<u64> = parts.skeleton.m_factors.iter().map(|pp| pp.prime).collect();
    let q = control_prime(&primes);
    let fields: Vec<Coefficients> = primes
        .iter()
        .map(|&p| Coefficients::ModP(p))
        .chain([Coefficients::ModP(q), Coefficients::Rational])
        .collect();
    for field in fields {
        let omega_m = omega_m_series(&parts, field, bound)?;
        certificate.push(skeleton_wedge_check(&parts.skeleton, &omega_m, field, bound)?);
    }

    let fibration = FibrationRecord {
        fibre: fibre.to_string(),
        total: format!("M_{} v S^{}", 2 * n, top),
        base: "M".into(),
        attaching: "[G,Gamma]+G".into(),
    };
    Ok(DecompositionResult {
        n,
        loop_space: format!("Om (M_{} v S^{})", 2 * n, top),
        factors,
        complement: Truncated::new(fibre, parts.complement.truncated),
        fibration: Some(fibration),
        certificate,
        bound,
        notes: Vec::new(),
    })
}

/// The two-torsion shape: `Om M = Om V' x Om W'` with `V'` kept opaque and
/// `W' = (Si Om V' ^ A) v Si A` kept symbolic. `Om V'` carries series
/// bindings at every odd prime (where `V'` agrees with `V`), rationally, and
/// at the control prime; its mod-2 series is not determined.
///
/// With no 2-torsion at all this reduces to the Theorem-1 decomposition and
/// returns exactly that result.
pub fn two_torsion_decomposition(
    input: &TorsionInput,
    bound: usize,
) -> Result<DecompositionResult, DecompError> {
    if !input.has_two_torsion() {
        return loop_m_decomposition(input, bound);
    }
    require_bound(input.n(), bound)?;
    let n = input.n();
    let skeleton = skeleton_decomposition(input);
    let a = skeleton.desuspended_a.clone();
    let opaque = SpaceExpr::opaque_loop("V'");

    let complement = if a.is_point() {
        SpaceExpr::point()
    } else {
        SpaceExpr::wedge(vec![
            SpaceExpr::smash(SpaceExpr::Susp(Box::new(opaque.clone())), a.clone()),
            SpaceExpr::susp(a.clone()),
        ])
    };
    let mut factor_list = vec![opaque.clone()];
    if !complement.is_point() {
        factor_list.push(SpaceExpr::Loop(Box::new(complement.clone())));
    }
    let factors = SpaceExpr::product(factor_list);

    // Series bindings for Om V': the polynomial dimensions at odd primes of
    // m (where V and V' agree), the loop sphere rationally and at primes
    // away from the torsion.
    let slack = bound + 2;
    let primes: Vec<u64> = skeleton.m_factors.iter().map(|pp| pp.prime).collect();
    let mut all_primes = primes.clone();
    all_primes.push(2);
    let q = control_prime(&all_primes);
    let mut bindings = OpaqueBindings::new();
    let polynomial_slack = poly_dims(2 * n - 2, 2 * n - 1, slack);
    for &p in &primes {
        bindings.bind("V'", Coefficients::ModP(p), polynomial_slack.clone());
    }
    bindings.bind("V'", Coefficients::Rational, loop_sphere_series(n, slack));
    bindings.bind("V'", Coefficients::ModP(q), loop_sphere_series(n, slack));

    let mut certificate = Vec::new();
    let omega_m_at = |field: Coefficients,
                      b: &OpaqueBindings|
     -> Result<PoincareSeries, SpaceError> {
        let v_series = series_of(&opaque, field, bound, b)?;
        if complement.is_point() {
            return Ok(v_series);
        }
        let w_reduced = series_of(&complement, field, bound + 1, b)?.reduced();
        let loop_w = w_reduced.shift_down(1).geometric()?;
        Ok(v_series.mul(&loop_w))
    };

    for &p in &primes {
        let field = Coefficients::ModP(p);
        let omega_m = omega_m_at(field, &bindings)?;

        // Localizing away the 2-torsion must reproduce the odd-primary engine.
        let odd_input = input.localized_odd()?;
        let odd_parts = m_parts(&odd_input, bound)?;
        let via_theorem_one = omega_m_series(&odd_parts, field, bound)?;
        certificate.push(SeriesCheck::compare(
            "odd localization vs odd-primary engine",
            field,
            &omega_m,
            &via_theorem_one,
        ));

        certificate.push(skeleton_wedge_check(&skeleton, &omega_m, field, bound)?);
    }

    // Mod 2 the paper determines only that W' is acyclic: its reduced series
    // vanishes for every possible series of Om V'. The reduced series is
    // affine in the binding, so vanishing at two bindings proves vanishing
    // identically.
    if !complement.is_point() {
        let zero = PoincareSeries::zero(bound + 1);
        let mut pass = true;
        let mut mismatch = None;
        for probe in [PoincareSeries::one(slack), all_ones(slack)] {
            let mut b = OpaqueBindings::new();
            b.bind("V'", Coefficients::ModP(2), probe);
            let reduced = series_of(&complement, Coefficients::ModP(2), bound + 1, &b)?.reduced();
            if let Some(m) = reduced.first_mismatch(&zero) {
                pass = false;
                mismatch = Some(m);
                break;
            }
        }
        certificate.push(SeriesCheck {
            route: "fibre mod-2 acyclicity".into(),
            field: Coefficients::ModP(2),
            bound,
            pass,
            mismatch,
        });
    }

    let sphere = loop_sphere_series(n, bound);
    for field in [Coefficients::ModP(q), Coefficients::Rational] {
        let series = omega_m_at(field, &bindings)?;
        certificate.push(SeriesCheck::compare(
            "factors vs top loop sphere",
            field,
            &series,
            &sphere,
        ));
    }

    let two_wedge: Vec<String> = skeleton
        .even_exponents
        .iter()
        .map(|&r| format!("P^{}({})", 2 * n, 2u64.pow(r)))
        .collect();
    let base = format!(
        "V' = (P^{}({}) v {}) u e^{}",
        2 * n,
        skeleton.m,
        two_wedge.join(" v "),
        4 * n - 1
    );
    let fibration = FibrationRecord {
        fibre: complement.to_string(),
        total: "M".into(),
        base,
        attaching: "[gamma,j']+j'".into(),
    };
    Ok(DecompositionResult {
        n,
        loop_space: "Om M".into(),
        factors,
        complement: Truncated::exact(complement),
        fibration: Some(fibration),
        certificate,
        bound,
        notes: vec![
            "mod-2 series of Om V' is not determined by the decomposition; the mod-2 \
             certificate checks only that the fibre W' is mod-2 acyclic"
                .into(),
        ],
    })
}

fn all_ones(bound: usize) -> PoincareSeries {
    PoincareSeries::from_ints(&vec![1u64; bound + 1])
}

/// Loop decomposition of the mod-2^r tangent bundle `tau_r(S^{2n})`, i.e.
/// `V = P^{2n}(2^r) u e^{4n-1}`, in the proven cases `(n, r) = (2, >=3)` and
/// `(4, >=4)`. Everything else is refused: `S^{2n-1}{2^r}` need not be an
/// H-space outside these ranges.
pub fn sphere_bundle_decomposition(
    n: u32,
    r: u32,
    bound: usize,
) -> Result<DecompositionResult, DecompError> {
    let admissible = matches!((n, r), (2, r) if r >= 3) || matches!((n, r), (4, r) if r >= 4);
    if !admissible {
        return Err(DecompError::HypothesisNotMet(format!(
            "no 2-primary decomposition is emitted for (n, r) = ({n}, {r}); \
             the proven cases are n = 2 with r >= 3 and n = 4 with r >= 4"
        )));
    }
    require_bound(n, bound)?;
    let factors = SpaceExpr::product(vec![
        SpaceExpr::fib_sphere(2 * n - 1, 2, r),
        SpaceExpr::loop_sphere(4 * n - 1),
    ]);
    let mut certificate = Vec::new();
    let mod2 = series_of(&factors, Coefficients::ModP(2), bound, &OpaqueBindings::new())?;
    certificate.push(SeriesCheck::compare(
        "factors vs polynomial algebra",
        Coefficients::ModP(2),
        &mod2,
        &poly_dims(2 * n - 2, 2 * n - 1, bound),
    ));
    let sphere = loop_sphere_series(n, bound);
    for field in [Coefficients::ModP(3), Coefficients::Rational] {
        let series = series_of(&factors, field, bound, &OpaqueBindings::new())?;
        certificate.push(SeriesCheck::compare(
            "factors vs top loop sphere",
            field,
            &series,
            &sphere,
        ));
    }
    let mut notes = Vec::new();
    if n == 2 {
        notes.push(
            "the n = 2 case assumes a map V -> S^4 inducing a mod-2 homology surjection; \
             the mod-2^r tangent bundle provides one"
                .into(),
        );
    }
    Ok(DecompositionResult {
        n,
        loop_space: format!("Om tau_{r}(S^{})", 2 * n),
        factors,
        complement: Truncated::exact(SpaceExpr::point()),
        fibration: None,
        certificate,
        bound,
        notes,
    })
}

impl TorsionInput {
    /// The odd part alone, for comparing the two-torsion path against the
    /// odd-primary engine.
    fn localized_odd(&self) -> Result<TorsionInput, DecompError> {
        TorsionInput::new(
            self.n,
            self.odd.iter().map(|pp| (pp.prime, pp.exp)).collect(),
            Vec::new(),
        )
    }
}

/// Localize a decomposition's factor expression; used by the localization
/// coherence tests and the report.
pub fn localize_factors(result: &DecompositionResult, p: u64) -> SpaceExpr {
    localize(&result.factors, Localization::AtPrime(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(n: u32, odd: &[(u64, u32)], even: &[u32]) -> TorsionInput {
        TorsionInput::new(n, odd.to_vec(), even.to_vec()).unwrap()
    }

    #[test]
    fn torsion_input_validation() {
        assert!(TorsionInput::new(1, vec![(3, 1)], vec![]).is_err());
        assert!(TorsionInput::new(2, vec![(9, 1)], vec![]).is_err());
        assert!(TorsionInput::new(2, vec![(2, 2)], vec![]).is_err());
        assert!(TorsionInput::new(2, vec![], vec![2]).is_err());
        assert!(TorsionInput::new(2, vec![(3, 1)], vec![1]).is_err());
        assert!(TorsionInput::new(2, vec![(3, 1)], vec![2]).is_ok());
    }

    #[test]
    fn skeleton_lcm_and_leftovers() {
        let s = skeleton_decomposition(&input(2, &[(3, 2), (5, 1), (3, 1)], &[]));
        assert_eq!(s.m, 45);
        assert_eq!(
            s.m_factors,
            vec![PrimePower { prime: 3, exp: 2 }, PrimePower { prime: 5, exp: 1 }]
        );
        assert_eq!(s.leftover, vec![PrimePower { prime: 3, exp: 1 }]);
        assert_eq!(s.desuspended_a, SpaceExpr::moore(3, 3));
        assert_eq!(
            s.skeleton,
            SpaceExpr::wedge(vec![
                SpaceExpr::moore(9, 4),
                SpaceExpr::moore(5, 4),
                SpaceExpr::moore(3, 4),
            ])
        );
    }

    #[test]
    fn skeleton_single_prime_power() {
        let s = skeleton_decomposition(&input(3, &[(7, 1)], &[]));
        assert_eq!(s.m, 7);
        assert!(s.desuspended_a.is_point());
    }

    #[test]
    fn skeleton_duplicate_prime_powers() {
        let s = skeleton_decomposition(&input(2, &[(3, 1), (3, 1)], &[]));
        assert_eq!(s.m, 3);
        assert_eq!(s.desuspended_a, SpaceExpr::moore(3, 3));
    }

    #[test]
    fn loop_v_examples() {
        let s = skeleton_decomposition(&input(2, &[(3, 2), (5, 1), (3, 1)], &[]));
        let r = loop_v_decomposition(2, &s.m_factors, 30).unwrap();
        assert!(r.verified());
        assert_eq!(
            r.factors,
            SpaceExpr::product(vec![
                SpaceExpr::fib_sphere(3, 3, 2),
                SpaceExpr::fib_sphere(3, 5, 1),
                SpaceExpr::loop_sphere(7),
            ])
        );
        let r = loop_v_decomposition(3, &[PrimePower { prime: 7, exp: 1 }], 30).unwrap();
        assert!(r.verified());
        assert_eq!(r.factors.to_string(), "S^5{7} x Om S^11");
    }

    #[test]
    fn loop_m_single_prime_power_is_v_alone() {
        let r = loop_m_decomposition(&input(3, &[(7, 1)], &[]), 30).unwrap();
        assert!(r.verified());
        assert!(r.complement.value.is_point());
        assert!(!r.complement.truncated);
        assert_eq!(r.factors.to_string(), "S^5{7} x Om S^11");
    }

    #[test]
    fn loop_m_with_leftover_torsion() {
        let r = loop_m_decomposition(&input(2, &[(3, 1), (3, 1)], &[]), 20).unwrap();
        assert!(r.verified());
        assert!(r.complement.truncated);
        // W contains Si A = P^4(3) and the smash pieces, all 3-primary.
        let summands = r.complement.value.summands();
        assert!(summands.contains(&SpaceExpr::moore(3, 4)));
        assert!(summands.iter().all(|s| matches!(
            s,
            SpaceExpr::Atom(crate::spaces::SpaceAtom::Moore { order, .. }) if order % 3 == 0
        )));
        let rendered = r.factors.to_string();
        assert!(rendered.starts_with("S^3{3} x Om (P^4(3)"), "got {rendered}");
        assert!(rendered.ends_with("x Om S^7"), "got {rendered}");
    }

    #[test]
    fn rigidity_under_permutation() {
        let a = loop_m_decomposition(&input(2, &[(3, 2), (5, 1), (3, 1)], &[]), 24).unwrap();
        let b = loop_m_decomposition(&input(2, &[(3, 1), (5, 1), (3, 2)], &[]), 24).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn skeleton_wedge_decomposition_verifies() {
        let r = skeleton_wedge_decomposition(&input(3, &[(7, 1)], &[]), 30).unwrap();
        assert!(r.verified(), "failed: {:?}", r.first_failure());
        assert_eq!(r.loop_space, "Om (M_6 v S^11)");
        let r = skeleton_wedge_decomposition(&input(2, &[(3, 1), (3, 1)], &[]), 20).unwrap();
        assert!(r.verified(), "failed: {:?}", r.first_failure());
    }

    #[test]
    fn two_torsion_no_leftover() {
        let r = two_torsion_decomposition(&input(2, &[(3, 1)], &[2]), 20).unwrap();
        assert!(r.verified(), "failed: {:?}", r.first_failure());
        assert_eq!(r.factors, SpaceExpr::opaque_loop("V'"));
        assert!(r.complement.value.is_point());
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn two_torsion_with_leftover() {
        let r = two_torsion_decomposition(&input(2, &[(3, 1), (3, 1)], &[2]), 20).unwrap();
        assert!(r.verified(), "failed: {:?}", r.first_failure());
        let rendered = r.factors.to_string();
        assert!(rendered.contains("Om V'"), "got {rendered}");
        assert!(
            r.certificate.iter().any(|c| c.route == "fibre mod-2 acyclicity" && c.pass),
            "mod-2 acyclicity check missing"
        );
    }

    #[test]
    fn two_torsion_mode_without_even_part_reduces_to_theorem_one() {
        let via_general = two_torsion_decomposition(&input(2, &[(3, 1), (3, 1)], &[]), 20).unwrap();
        let direct = loop_m_decomposition(&input(2, &[(3, 1), (3, 1)], &[]), 20).unwrap();
        assert_eq!(via_general, direct);
    }

    #[test]
    fn sphere_bundle_cases() {
        let r = sphere_bundle_decomposition(2, 3, 30).unwrap();
        assert!(r.verified());
        assert_eq!(r.factors.to_string(), "S^3{8} x Om S^7");
        assert_eq!(r.loop_space, "Om tau_3(S^4)");
        let r = sphere_bundle_decomposition(4, 4, 30).unwrap();
        assert!(r.verified());
        assert_eq!(r.factors.to_string(), "S^7{16} x Om S^15");
        assert!(matches!(
            sphere_bundle_decomposition(3, 5, 30),
            Err(DecompError::HypothesisNotMet(_))
        ));
        assert!(matches!(
            sphere_bundle_decomposition(2, 2, 30),
            Err(DecompError::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn localization_coherence() {
        // Decomposing the 3-local part of the input matches localizing the
        // full decomposition at 3.
        let full = loop_m_decomposition(&input(2, &[(3, 2), (5, 1), (3, 1)], &[]), 20).unwrap();
        let local = loop_m_decomposition(&input(2, &[(3, 2), (3, 1)], &[]), 20).unwrap();
        assert_eq!(localize_factors(&full, 3), local.factors);
    }

    #[test]
    fn bound_must_reach_the_top_loop_degree() {
        assert!(matches!(
            loop_m_decomposition(&input(3, &[(7, 1)], &[]), 8),
            Err(DecompError::InvalidInput(_))
        ));
    }
}
