//! Exact evaluation and sampling of the symmetric-function inequalities
//! behind the non-existence arguments.
//!
//! Each lemma comes with an "asserted impossible" conjunction of sign
//! conditions. [`sample_region`] draws exact rational samples from the
//! lemma's constraint region, evaluates the conjunction and reports how
//! many samples satisfy it (violations) together with the extremal margin:
//! the largest value of the quantity that would have to be positive for a
//! violation. Reports contain no floating-point values.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyalgebra::{format_rational, Rational};

/// Denominator of the sampling grid.
pub const GRID: i64 = 10_000;
const SHARD: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("lemma {lemma} needs n >= {min}, got {n}")]
    SmallN { lemma: LemmaId, n: usize, min: usize },
    #[error("expected {expected} values of gamma, got {found}")]
    GammaCount { expected: usize, found: usize },
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("unknown lemma {0:?} (expected 1, 6, 7 or 8)")]
    UnknownLemma(String),
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn ratio(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

/// `[e_0, ..., e_k]` computed over integers after clearing a common
/// denominator; much cheaper than rational accumulation for grid samples.
pub fn elementary_symmetric_exact(values: &[Rational]) -> Vec<Rational> {
    let lcm = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let numerators: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    let mut e = vec![BigInt::zero(); values.len() + 1];
    e[0] = BigInt::one();
    for (k, v) in numerators.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let term = &e[j - 1] * v;
            e[j] += term;
        }
    }
    let mut scale = BigInt::one();
    e.into_iter()
        .map(|ej| {
            let r = Rational::new(ej, scale.clone());
            scale *= &lcm;
            r
        })
        .collect()
}

/// `e_j` with `e_j = 0` outside `0..e.len()`.
fn at(e: &[Rational], j: isize) -> Rational {
    if j < 0 || j as usize >= e.len() {
        Rational::zero()
    } else {
        e[j as usize].clone()
    }
}

fn reciprocal_sum(values: &[Rational]) -> Rational {
    values.iter().map(|v| v.recip()).sum()
}

fn check_sorted(values: &[Rational], what: &str) -> Result<(), CertificateError> {
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(CertificateError::Constraint(format!("{} must be non-decreasing", what)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "6")]
    Six,
    #[serde(rename = "7")]
    Seven,
    #[serde(rename = "8")]
    Eight,
}

impl LemmaId {
    pub const ALL: [LemmaId; 4] = [LemmaId::One, LemmaId::Six, LemmaId::Seven, LemmaId::Eight];

    pub fn min_n(self) -> usize {
        match self {
            LemmaId::One => 2,
            LemmaId::Six => 5,
            LemmaId::Seven => 4,
            LemmaId::Eight => 5,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LemmaId::One => "1",
            LemmaId::Six => "6",
            LemmaId::Seven => "7",
            LemmaId::Eight => "8",
        })
    }
}

impl std::str::FromStr for LemmaId {
    type Err = CertificateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" => Ok(LemmaId::One),
            "6" => Ok(LemmaId::Six),
            "7" => Ok(LemmaId::Seven),
            "8" => Ok(LemmaId::Eight),
            other => Err(CertificateError::UnknownLemma(other.to_string())),
        }
    }
}

// ---------------------------------------------------------------- lemma 1

/// `0 < alpha_1`, `gamma_1 <= ... <= gamma_{2n-2}` in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Sample {
    pub n: usize,
    pub gammas: Vec<Rational>,
    pub alpha1: Rational,
}

impl Lemma1Sample {
    pub fn new(n: usize, gammas: Vec<Rational>, alpha1: Rational) -> Result<Self, CertificateError> {
        if n < 2 {
            return Err(CertificateError::SmallN { lemma: LemmaId::One, n, min: 2 });
        }
        if gammas.len() != 2 * n - 2 {
            return Err(CertificateError::GammaCount { expected: 2 * n - 2, found: gammas.len() });
        }
        if gammas.iter().any(|g| !g.is_positive() || *g > Rational::one()) {
            return Err(CertificateError::Constraint("gamma_j must lie in (0, 1]".into()));
        }
        if !alpha1.is_positive() {
            return Err(CertificateError::Constraint("alpha_1 must be positive".into()));
        }
        Ok(Lemma1Sample { n, gammas, alpha1 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Quantities {
    /// `e_0 ..= e_{2n-2}` of the gammas.
    pub e: Vec<Rational>,
    /// `t_{n+1} = -alpha_1 e_{n-1} + e_n + alpha_1 e_{n-3} - e_{n-2}`.
    pub t_next: Rational,
    /// `1/alpha_1 - sum 1/gamma_j`.
    pub slack: Rational,
    /// `sum 1/gamma_j`.
    pub g: Rational,
    /// `-e_{n-1} + e_{n-3} - G (e_{n-2} - e_n)`.
    pub tau: Rational,
}

impl Lemma1Quantities {
    /// `t_{n+1} > 0` together with positive slack.
    pub fn violation(&self) -> bool {
        self.t_next.is_positive() && self.slack.is_positive()
    }

    /// `t_{n+1} > 0` with zero slack.
    pub fn boundary_violation(&self) -> bool {
        self.t_next.is_positive() && self.slack.is_zero()
    }

    pub fn margin(&self) -> Rational {
        self.t_next.clone().min(self.slack.clone())
    }
}

pub fn eval_lemma1(sample: &Lemma1Sample) -> Lemma1Quantities {
    let n = sample.n as isize;
    let a = &sample.alpha1;
    let e = elementary_symmetric_exact(&sample.gammas);
    let t_next = -(a * at(&e, n - 1)) + at(&e, n) + a * at(&e, n - 3) - at(&e, n - 2);
    let g = reciprocal_sum(&sample.gammas);
    let slack = a.recip() - &g;
    let tau = -at(&e, n - 1) + at(&e, n - 3) - &g * (at(&e, n - 2) - at(&e, n));
    Lemma1Quantities { e, t_next, slack, g, tau }
}

// ---------------------------------------------------------------- lemma 6

/// Normalized data with `gamma_1 = alpha_2 = 1`: `gammas` are
/// `gamma_2, ..., gamma_{2n-3}` (so `2n - 4` values, each `>= 1`) and
/// `0 < alpha_1 < 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma6Sample {
    pub n: usize,
    pub gammas: Vec<Rational>,
    pub alpha1: Rational,
}

impl Lemma6Sample {
    pub fn new(n: usize, gammas: Vec<Rational>, alpha1: Rational) -> Result<Self, CertificateError> {
        if n < 5 {
            return Err(CertificateError::SmallN { lemma: LemmaId::Six, n, min: 5 });
        }
        if gammas.len() != 2 * n - 4 {
            return Err(CertificateError::GammaCount { expected: 2 * n - 4, found: gammas.len() });
        }
        if gammas.iter().any(|g| *g < Rational::one()) {
            return Err(CertificateError::Constraint("gamma_j must be >= 1".into()));
        }
        if !alpha1.is_positive() || alpha1 >= Rational::one() {
            return Err(CertificateError::Constraint("alpha_1 must lie in (0, 1)".into()));
        }
        Ok(Lemma6Sample { n, gammas, alpha1 })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma6Quantities {
    pub e: Vec<Rational>,
    /// `S_{-1} = sum 1/gamma_j`.
    pub s_minus1: Rational,
    /// `e_{n-1} - alpha_1 e_{n-2} - e_{n-3} + alpha_1 e_{n-4}`; equals the
    /// coefficient of `x^n` in `(x - alpha_1)(x^2 - 1) prod (x + gamma_j)`.
    pub lhs10: Rational,
    /// `S_{-1}(e_{n-1} - e_{n-3}) - e_{n-2} + e_{n-4}`.
    pub lhs13: Rational,
    /// `1/alpha_1 - S_{-1}`.
    pub slack: Rational,
}

impl Lemma6Quantities {
    pub fn violation(&self) -> bool {
        self.lhs10.is_negative() && self.slack.is_positive()
    }

    pub fn boundary_violation(&self) -> bool {
        self.lhs10.is_negative() && self.slack.is_zero()
    }

    pub fn margin(&self) -> Rational {
        (-self.lhs10.clone()).min(self.slack.clone())
    }
}

/// `S_{-1}(e_{n-1} - e_{n-3}) - e_{n-2} + e_{n-4}` for any list of values.
pub fn lemma6_lhs13(n: usize, gammas: &[Rational]) -> Rational {
    let e = elementary_symmetric_exact(gammas);
    let n = n as isize;
    reciprocal_sum(gammas) * (at(&e, n - 1) - at(&e, n - 3)) - at(&e, n - 2) + at(&e, n - 4)
}

pub fn eval_lemma6(sample: &Lemma6Sample) -> Lemma6Quantities {
    let n = sample.n as isize;
    let a = &sample.alpha1;
    let e = elementary_symmetric_exact(&sample.gammas);
    let s_minus1 = reciprocal_sum(&sample.gammas);
    let lhs10 = at(&e, n - 1) - a * at(&e, n - 2) - at(&e, n - 3) + a * at(&e, n - 4);
    let lhs13 = &s_minus1 * (at(&e, n - 1) - at(&e, n - 3)) - at(&e, n - 2) + at(&e, n - 4);
    let slack = a.recip() - &s_minus1;
    Lemma6Quantities { e, s_minus1, lhs10, lhs13, slack }
}

// ---------------------------------------------------------------- lemma 7

/// Quantities for `S(1,n,2)` data: positive roots `alpha_1 < alpha_2`,
/// negative moduli `gamma_1..gamma_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma7Quantities {
    pub a1: Rational,
    pub a_m1: Rational,
    pub a_m2: Rational,
    pub g1: Rational,
    pub g_m1: Rational,
    pub h1: Rational,
    pub h_m1: Rational,
    pub l_m2: Rational,
    pub delta: Rational,
    /// Coefficient of `x^{n+1}`: `-A_1 + G_1 + H_1`.
    pub c_next: Rational,
    /// Coefficient of `x^2`: `(-A_{-1}(G_{-1} + H_{-1}) + A_{-2} + L_{-2}) delta`.
    pub c2: Rational,
    pub c2_over_delta: Rational,
}

impl Lemma7Quantities {
    /// `c_{n+1} <= 0` and `c_2 < 0`.
    pub fn violation(&self) -> bool {
        !self.c_next.is_positive() && self.c2.is_negative()
    }

    pub fn margin(&self) -> Rational {
        (-self.c_next.clone()).min(-self.c2_over_delta.clone())
    }
}

/// Requires `gamma_1 <= gamma_2 <= gamma_3 <= alpha_1 <= gamma_j` for `j >= 4`.
pub fn eval_lemma7(
    alpha: (&Rational, &Rational),
    gammas: &[Rational],
) -> Result<Lemma7Quantities, CertificateError> {
    let n = gammas.len();
    if n < 4 {
        return Err(CertificateError::SmallN { lemma: LemmaId::Seven, n, min: 4 });
    }
    let (a1, a2) = alpha;
    if !a1.is_positive() || a1 > a2 {
        return Err(CertificateError::Constraint("need 0 < alpha_1 <= alpha_2".into()));
    }
    if gammas.iter().any(|g| !g.is_positive()) {
        return Err(CertificateError::Constraint("gamma_j must be positive".into()));
    }
    check_sorted(&gammas[..3], "gamma_1..gamma_3")?;
    if gammas[..3].iter().any(|g| g > a1) || gammas[3..].iter().any(|g| g < a1) {
        return Err(CertificateError::Constraint(
            "need gamma_i <= alpha_1 for i <= 3 and gamma_j >= alpha_1 for j >= 4".into(),
        ));
    }
    Ok(lemma7_raw(a1, a2, gammas))
}

fn lemma7_raw(a1: &Rational, a2: &Rational, gammas: &[Rational]) -> Lemma7Quantities {
    let (small, large) = gammas.split_at(3);
    let a_1 = a1 + a2;
    let a_m1 = a1.recip() + a2.recip();
    let a_m2 = (a1 * a2).recip();
    let g1: Rational = small.iter().sum();
    let g_m1 = reciprocal_sum(small);
    let h1: Rational = large.iter().sum();
    let h_m1 = reciprocal_sum(large);
    let inverses: Vec<Rational> = gammas.iter().map(|g| g.recip()).collect();
    let l_m2 = at(&elementary_symmetric_exact(&inverses), 2);
    let delta = a1 * a2 * gammas.iter().product::<Rational>();
    let c_next = -&a_1 + &g1 + &h1;
    let c2_over_delta = -&a_m1 * (&g_m1 + &h_m1) + &a_m2 + &l_m2;
    let c2 = &c2_over_delta * &delta;
    Lemma7Quantities {
        a1: a_1,
        a_m1,
        a_m2,
        g1,
        g_m1,
        h1,
        h_m1,
        l_m2,
        delta,
        c_next,
        c2,
        c2_over_delta,
    }
}

// ---------------------------------------------------------------- lemma 8

/// Quantities for `S(1,5,3)` data with `alpha_1 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma8Quantities {
    pub a1: Rational,
    pub a_m1: Rational,
    pub a_m2: Rational,
    pub h1: Rational,
    pub h_m1: Rational,
    pub h_m2: Rational,
    pub h_m3: Rational,
    pub delta: Rational,
    /// Coefficient of `x^7`: `-A_1 + H_1`.
    pub c7: Rational,
    /// Coefficient of `x^3`: `(-A_{-1} H_{-2} + A_{-2} H_{-1} + H_{-3}) delta`.
    pub c3: Rational,
    pub c3_over_delta: Rational,
    /// `1/gamma_4 - A_{-1} G_{-1} + A_{-2} + G_{-2}` with `G` over `gamma_3..gamma_6`.
    pub eq15: Rational,
}

impl Lemma8Quantities {
    /// `c_7 < 0` and `c_3 < 0`.
    pub fn violation(&self) -> bool {
        self.c7.is_negative() && self.c3.is_negative()
    }

    pub fn margin(&self) -> Rational {
        (-self.c7.clone()).min(-self.c3_over_delta.clone())
    }
}

/// Requires `gamma_1 <= ... <= gamma_5 <= 1 <= gamma_6 <= alpha_2`.
pub fn eval_lemma8(alpha2: &Rational, gammas: &[Rational]) -> Result<Lemma8Quantities, CertificateError> {
    if gammas.len() != 6 {
        return Err(CertificateError::GammaCount { expected: 6, found: gammas.len() });
    }
    if gammas.iter().any(|g| !g.is_positive()) {
        return Err(CertificateError::Constraint("gamma_j must be positive".into()));
    }
    check_sorted(&gammas[..5], "gamma_1..gamma_5")?;
    let one = Rational::one();
    if gammas[4] > one || gammas[5] < one || &gammas[5] > alpha2 {
        return Err(CertificateError::Constraint(
            "need gamma_5 <= 1 <= gamma_6 <= alpha_2".into(),
        ));
    }
    Ok(lemma8_raw(alpha2, gammas))
}

fn lemma8_raw(alpha2: &Rational, gammas: &[Rational]) -> Lemma8Quantities {
    let a1 = Rational::one() + alpha2;
    let a_m1 = Rational::one() + alpha2.recip();
    let a_m2 = alpha2.recip();
    let h1: Rational = gammas.iter().sum();
    let inverses: Vec<Rational> = gammas.iter().map(|g| g.recip()).collect();
    let e_inv = elementary_symmetric_exact(&inverses);
    let h_m1 = at(&e_inv, 1);
    let h_m2 = at(&e_inv, 2);
    let h_m3 = at(&e_inv, 3);
    let delta = alpha2 * gammas.iter().product::<Rational>();
    let c7 = -&a1 + &h1;
    let c3_over_delta = -&a_m1 * &h_m2 + &a_m2 * &h_m1 + &h_m3;
    let c3 = &c3_over_delta * &delta;
    let tail = elementary_symmetric_exact(&inverses[2..]);
    let eq15 = gammas[3].recip() - &a_m1 * at(&tail, 1) + &a_m2 + at(&tail, 2);
    Lemma8Quantities {
        a1,
        a_m1,
        a_m2,
        h1,
        h_m1,
        h_m2,
        h_m3,
        delta,
        c7,
        c3,
        c3_over_delta,
        eq15,
    }
}

/// `K = 12r^3 + 25r^2 w + 5r w^2 - 25r^2 - 30r w - 5w^2 + 5r + 5w`.
pub fn lemma8_k(r: &Rational, w: &Rational) -> Rational {
    let r2 = r * r;
    let w2 = w * w;
    q(12) * &r2 * r + q(25) * &r2 * w + q(5) * r * &w2 - q(25) * &r2 - q(30) * r * w - q(5) * &w2
        + q(5) * r
        + q(5) * w
}

/// `-(1 - r)(12r^2 + 25rw + 5w^2 - 5r - 5w) - 8r^2`.
pub fn lemma8_k_factored(r: &Rational, w: &Rational) -> Rational {
    let inner = q(12) * r * r + q(25) * r * w + q(5) * w * w - q(5) * r - q(5) * w;
    -(Rational::one() - r) * inner - q(8) * r * r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma8Corner {
    pub a: Rational,
    pub k: Rational,
    pub c3_over_delta: Rational,
    /// `a r^3 w (c_3/delta) == -2K`.
    pub identity_holds: bool,
    /// Closed and factored forms of `K` agree.
    pub factored_agrees: bool,
}

/// The reduced corner `gamma_1 = ... = gamma_5 = r`, `gamma_6 = w`,
/// `alpha_2 = a = 5r + w - 1`.
pub fn lemma8_corner(r: &Rational, w: &Rational) -> Lemma8Corner {
    let a = q(5) * r + w - Rational::one();
    let mut gammas = vec![r.clone(); 5];
    gammas.push(w.clone());
    let c3_over_delta = lemma8_raw(&a, &gammas).c3_over_delta;
    let k = lemma8_k(r, w);
    let lhs = &a * r * r * r * w * &c3_over_delta;
    Lemma8Corner {
        identity_holds: lhs == -q(2) * &k,
        factored_agrees: k == lemma8_k_factored(r, w),
        a,
        k,
        c3_over_delta,
    }
}

/// Largest `K` on the grid `r = k/steps` (`k = 1..=steps`),
/// `w = 1 + j/steps` (`j = 0..=w_steps`), with its location.
pub fn lemma8_grid_max(steps: i64, w_steps: i64) -> (Rational, Rational, Rational) {
    let mut best: Option<(Rational, Rational, Rational)> = None;
    for k in 1..=steps {
        let r = ratio(k, steps);
        for j in 0..=w_steps {
            let w = Rational::one() + ratio(j, steps);
            let value = lemma8_k(&r, &w);
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, r.clone(), w));
            }
        }
    }
    best.expect("non-empty grid")
}

// ---------------------------------------------------------------- sampling

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub alpha: Vec<String>,
    pub gamma: Vec<String>,
}

impl SampleRecord {
    fn new(alpha: &[Rational], gamma: &[Rational]) -> Self {
        SampleRecord {
            alpha: alpha.iter().map(format_rational).collect(),
            gamma: gamma.iter().map(format_rational).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCount {
    pub passed: u64,
    pub failed: u64,
}

impl CheckCount {
    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub lemma: LemmaId,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    /// Samples satisfying the asserted-impossible conjunction.
    pub violations: u64,
    /// Samples placed exactly on the equality boundary of the reciprocal-sum
    /// constraint (lemmas 1 and 6), and how many of those satisfy the other
    /// inequality.
    pub boundary_samples: u64,
    pub boundary_violations: u64,
    /// Largest margin seen; a violation needs margin > 0.
    pub extremal_margin: String,
    pub extremal_sample: SampleRecord,
    pub first_violation: Option<SampleRecord>,
    /// Auxiliary claims checked on every sample.
    pub checks: BTreeMap<String, CheckCount>,
}

struct Partial {
    samples: u64,
    violations: u64,
    boundary_samples: u64,
    boundary_violations: u64,
    extremal: Option<(Rational, SampleRecord)>,
    first_violation: Option<SampleRecord>,
    checks: BTreeMap<String, CheckCount>,
}

impl Partial {
    fn new() -> Self {
        Partial {
            samples: 0,
            violations: 0,
            boundary_samples: 0,
            boundary_violations: 0,
            extremal: None,
            first_violation: None,
            checks: BTreeMap::new(),
        }
    }

    fn observe(&mut self, margin: Rational, violation: bool, record: impl FnOnce() -> SampleRecord) {
        self.samples += 1;
        let better = self.extremal.as_ref().is_none_or(|(m, _)| margin > *m);
        if violation {
            self.violations += 1;
        }
        if better || (violation && self.first_violation.is_none()) {
            let r = record();
            if violation && self.first_violation.is_none() {
                self.first_violation = Some(r.clone());
            }
            if better {
                self.extremal = Some((margin, r));
            }
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.entry(name.to_string()).or_default().record(ok);
    }

    /// Later shards only win ties they strictly improve on.
    fn merge(mut self, other: Partial) -> Partial {
        self.samples += other.samples;
        self.violations += other.violations;
        self.boundary_samples += other.boundary_samples;
        self.boundary_violations += other.boundary_violations;
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        if let Some((m, r)) = other.extremal {
            if self.extremal.as_ref().is_none_or(|(best, _)| m > *best) {
                self.extremal = Some((m, r));
            }
        }
        for (k, v) in other.checks {
            let c = self.checks.entry(k).or_default();
            c.passed += v.passed;
            c.failed += v.failed;
        }
        self
    }
}

/// Value on the sampling grid in `(0, 1]`, with extra weight at 1 and just below.
fn unit_value<R: Rng>(rng: &mut R) -> Rational {
    match rng.gen_range(0..10) {
        0 => Rational::one(),
        1 => ratio(GRID - rng.gen_range(1..=10), GRID),
        _ => ratio(rng.gen_range(1..=GRID), GRID),
    }
}

/// Value on the sampling grid in `[1, top]`, clustered towards 1.
fn above_one<R: Rng>(rng: &mut R, top: i64) -> Rational {
    match rng.gen_range(0..10) {
        0 => Rational::one(),
        1 => ratio(GRID + rng.gen_range(1..=10), GRID),
        2..=5 => ratio(GRID + rng.gen_range(0..=GRID), GRID),
        _ => ratio(GRID + rng.gen_range(0..=(top - 1) * GRID), GRID),
    }
}

/// Sorted values, sometimes with deliberate ties.
fn sorted_with_ties<R: Rng>(rng: &mut R, k: usize, mut draw: impl FnMut(&mut R) -> Rational) -> Vec<Rational> {
    let mut v: Vec<Rational> = (0..k).map(|_| draw(rng)).collect();
    if k > 1 && rng.gen_bool(0.2) {
        let i = rng.gen_range(0..k - 1);
        v[i + 1] = v[i].clone();
    }
    v.sort();
    v
}

/// Fraction of the extreme value: exactly 1, just below, or uniform.
fn theta<R: Rng>(rng: &mut R) -> Rational {
    match rng.gen_range(0..5) {
        0 => Rational::one(),
        1 => ratio(GRID - rng.gen_range(1..=10), GRID),
        _ => ratio(rng.gen_range(1..=GRID), GRID),
    }
}

/// Non-negative offset: zero, tiny, or up to `top`.
fn offset<R: Rng>(rng: &mut R, top: i64) -> Rational {
    match rng.gen_range(0..10) {
        0..=2 => Rational::zero(),
        3..=5 => ratio(rng.gen_range(1..=10), GRID),
        _ => ratio(rng.gen_range(1..=top * GRID), GRID),
    }
}

fn shard_lemma1(n: usize, rng: &mut ChaCha8Rng, count: u64, part: &mut Partial) {
    for _ in 0..count {
        let gammas = sorted_with_ties(rng, 2 * n - 2, unit_value);
        let g = reciprocal_sum(&gammas);
        let alpha1 = theta(rng) / &g;
        let s = Lemma1Sample::new(n, gammas, alpha1).expect("sampled inside the region");
        let qn = eval_lemma1(&s);
        if qn.slack.is_zero() {
            part.boundary_samples += 1;
            if qn.boundary_violation() {
                part.boundary_violations += 1;
            }
        }
        let ni = n as isize;
        part.check("e[n-2] >= e[n]", at(&qn.e, ni - 2) >= at(&qn.e, ni));
        part.check("e[0] = 1", qn.e[0].is_one());
        part.observe(qn.margin(), qn.violation(), || {
            SampleRecord::new(std::slice::from_ref(&s.alpha1), &s.gammas)
        });
    }
}

fn shard_lemma6(n: usize, rng: &mut ChaCha8Rng, count: u64, part: &mut Partial) {
    for _ in 0..count {
        let gammas = sorted_with_ties(rng, 2 * n - 4, |r| above_one(r, 4));
        let s_minus1 = reciprocal_sum(&gammas);
        let alpha1 = theta(rng) / &s_minus1;
        let s = Lemma6Sample::new(n, gammas, alpha1).expect("sampled inside the region");
        let qn = eval_lemma6(&s);
        if qn.slack.is_zero() {
            part.boundary_samples += 1;
            if qn.boundary_violation() {
                part.boundary_violations += 1;
            }
        }
        part.check("lhs13 > 0", qn.lhs13.is_positive());
        let strict = s.gammas.iter().all(|g| *g > Rational::one());
        if strict {
            part.check("lhs13 > 0 (all gamma > 1)", qn.lhs13.is_positive());
        }
        part.observe(qn.margin(), qn.violation(), || {
            SampleRecord::new(&[s.alpha1.clone(), Rational::one()], &s.gammas)
        });
    }
}

fn shard_lemma7(n: usize, rng: &mut ChaCha8Rng, count: u64, part: &mut Partial) {
    let a1 = Rational::one();
    for _ in 0..count {
        let mut gammas = sorted_with_ties(rng, 3, unit_value);
        gammas.extend(sorted_with_ties(rng, n - 3, |r| above_one(r, 10)));
        let total: Rational = gammas.iter().sum();
        // c_{n+1} <= 0 means alpha_2 >= sum(gamma) - alpha_1
        let floor = (&total - &a1).max(a1.clone());
        let a2 = floor + offset(rng, 10);
        let qn = eval_lemma7((&a1, &a2), &gammas).expect("sampled inside the region");
        part.check("delta > 0", qn.delta.is_positive());
        part.observe(qn.margin(), qn.violation(), || {
            SampleRecord::new(&[a1.clone(), a2.clone()], &gammas)
        });
    }
}

fn shard_lemma8(rng: &mut ChaCha8Rng, count: u64, part: &mut Partial) {
    for _ in 0..count {
        let mut gammas = sorted_with_ties(rng, 5, unit_value);
        gammas.push(above_one(rng, 10));
        let h1: Rational = gammas.iter().sum();
        let floor = (&h1 - Rational::one()).max(gammas[5].clone());
        let a2 = floor + offset(rng, 10);
        let qn = eval_lemma8(&a2, &gammas).expect("sampled inside the region");
        part.check("eq15 >= 0", !qn.eq15.is_negative());
        let r = unit_value(rng);
        let w = above_one(rng, 10);
        let corner = lemma8_corner(&r, &w);
        part.check("corner identity", corner.identity_holds);
        part.check("corner K factored form", corner.factored_agrees);
        part.check("corner K < 0", corner.k.is_negative());
        part.observe(qn.margin(), qn.violation(), || {
            SampleRecord::new(&[Rational::one(), a2.clone()], &gammas)
        });
    }
}

/// Draws `count` samples from the lemma's region (lemma 8 ignores `n`).
/// Shards of 1000 samples use independent streams of one seeded generator
/// and merge in shard order, so the report does not depend on threading.
pub fn sample_region(lemma: LemmaId, n: usize, count: u64, seed: u64) -> Result<CertificateReport, CertificateError> {
    let n = if lemma == LemmaId::Eight { 5 } else { n };
    if n < lemma.min_n() {
        return Err(CertificateError::SmallN { lemma, n, min: lemma.min_n() });
    }
    let shards = count.div_ceil(SHARD);
    let merged = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let size = SHARD.min(count - shard * SHARD);
            let mut part = Partial::new();
            match lemma {
                LemmaId::One => shard_lemma1(n, &mut rng, size, &mut part),
                LemmaId::Six => shard_lemma6(n, &mut rng, size, &mut part),
                LemmaId::Seven => shard_lemma7(n, &mut rng, size, &mut part),
                LemmaId::Eight => shard_lemma8(&mut rng, size, &mut part),
            }
            part
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::new(), Partial::merge);
    let (margin, sample) = merged.extremal.unwrap_or_else(|| {
        (Rational::zero(), SampleRecord { alpha: vec![], gamma: vec![] })
    });
    Ok(CertificateReport {
        lemma,
        n,
        samples: merged.samples,
        seed,
        violations: merged.violations,
        boundary_samples: merged.boundary_samples,
        boundary_violations: merged.boundary_violations,
        extremal_margin: format_rational(&margin),
        extremal_sample: sample,
        first_violation: merged.first_violation,
        checks: merged.checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalgebra::{expand, parse_rational, Polynomial, RootConfiguration};

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn rs(xs: &[&str]) -> Vec<Rational> {
        xs.iter().map(|s| r(s)).collect()
    }

    fn binomial(n: i64, k: i64) -> Rational {
        let mut v = Rational::one();
        for i in 0..k {
            v = v * q(n - i) / q(i + 1);
        }
        v
    }

    /// Polynomial with positive roots `alpha` and negative roots `-gamma`.
    fn poly(alpha: &[Rational], gamma: &[Rational]) -> Polynomial {
        expand(&RootConfiguration::new(alpha.to_vec(), gamma.to_vec()).unwrap())
    }

    #[test]
    fn esym_matches_rational_recurrence() {
        let v = rs(&["1/3", "2/7", "5", "11/10", "1/3"]);
        assert_eq!(
            elementary_symmetric_exact(&v),
            crate::polyalgebra::elementary_symmetric_all(&v)
        );
        assert_eq!(elementary_symmetric_exact(&[]), vec![Rational::one()]);
    }

    #[test]
    fn lemma1_corner_values() {
        let s = Lemma1Sample::new(2, rs(&["1", "1"]), r("1/2")).unwrap();
        let qn = eval_lemma1(&s);
        assert_eq!(qn.e, rs(&["1", "2", "1"]));
        assert_eq!(qn.t_next, r("-1"));
        assert!(qn.slack.is_zero());
        assert!(!qn.violation() && !qn.boundary_violation());
        // slack > 0 needs alpha_1 < 1/2, and then t_3 = -2 alpha_1
        let s = Lemma1Sample::new(2, rs(&["1", "1"]), r("1/5")).unwrap();
        let qn = eval_lemma1(&s);
        assert!(qn.slack.is_positive());
        assert_eq!(qn.t_next, r("-2/5"));
    }

    #[test]
    fn lemma1_t_next_is_a_coefficient() {
        // t_{n+1} is the x^{n+1} coefficient of (x^2 - 1)(x - alpha_1) prod (x + gamma_j)
        let gammas = rs(&["1/5", "3/10", "1/2", "7/10", "9/10", "1"]);
        let alpha1 = r("1/20");
        let n = 4;
        let s = Lemma1Sample::new(n, gammas.clone(), alpha1.clone()).unwrap();
        let qn = eval_lemma1(&s);
        let mut g = gammas.clone();
        g.push(q(1));
        let p = poly(&[alpha1, q(1)], &g);
        assert_eq!(qn.t_next, p.coefficient(n + 1));
        // tau is t_{n+1} / alpha_1 with 1/alpha_1 replaced by G
        let expected_tau = -at(&qn.e, 3) + at(&qn.e, 1) - &qn.g * (at(&qn.e, 2) - at(&qn.e, 4));
        assert_eq!(qn.tau, expected_tau);
    }

    #[test]
    fn lemma1_rejects_bad_samples() {
        assert!(Lemma1Sample::new(2, rs(&["1", "2"]), r("1/2")).is_err());
        assert!(Lemma1Sample::new(2, rs(&["1"]), r("1/2")).is_err());
        assert!(Lemma1Sample::new(1, rs(&[]), r("1/2")).is_err());
    }

    #[test]
    fn lemma6_all_ones() {
        // six values for n = 5
        let s = Lemma6Sample::new(5, vec![q(1); 6], r("1/10")).unwrap();
        let qn = eval_lemma6(&s);
        for j in 0..=6 {
            assert_eq!(qn.e[j as usize], binomial(6, j));
        }
        assert_eq!(qn.lhs13, q(-14));
        assert_eq!(qn.lhs10, r("-14/10"));
        assert!(qn.violation());
        // the same expression over seven unit values
        assert_eq!(lemma6_lhs13(5, &vec![q(1); 7]), q(70));
        assert_eq!(
            lemma6_lhs13(5, &vec![q(1); 7]),
            q(7) * (binomial(7, 4) - binomial(7, 2)) - binomial(7, 3) + binomial(7, 1)
        );
    }

    #[test]
    fn lemma6_lhs10_is_a_coefficient() {
        let n = 5;
        let gammas = rs(&["1", "11/10", "6/5", "3/2", "2", "3"]);
        let alpha1 = r("1/30");
        let qn = eval_lemma6(&Lemma6Sample::new(n, gammas.clone(), alpha1.clone()).unwrap());
        let mut g = gammas.clone();
        g.push(q(1));
        let p = poly(&[alpha1, q(1)], &g);
        assert_eq!(qn.lhs10, p.coefficient(n));
    }

    #[test]
    fn lemma6_counterexample_polynomial() {
        // S(4,5,1) realized with alpha_2 below every gamma
        let tail: Vec<Rational> = (1..=6).map(|k| q(1) + ratio(k, 1_000_000)).collect();
        let mut gammas = tail.clone();
        gammas.push(q(1));
        let p = poly(&rs(&["1/100", "1"]), &gammas);
        assert_eq!(p.sign_pattern().unwrap().to_string(), "S(4,5,1)");
        let s = Lemma6Sample::new(5, tail, r("1/100")).unwrap();
        let qn = eval_lemma6(&s);
        assert!(qn.violation());
    }

    #[test]
    fn lemma7_coefficients() {
        let a = (r("1"), r("9"));
        let gammas = rs(&["1/4", "1/2", "1", "3/2", "2", "5"]);
        let qn = eval_lemma7((&a.0, &a.1), &gammas).unwrap();
        let p = poly(&[a.0.clone(), a.1.clone()], &gammas);
        let n = gammas.len();
        assert_eq!(qn.c_next, p.coefficient(n + 1));
        assert_eq!(qn.c2, p.coefficient(2));
        assert!(qn.delta.is_positive());
    }

    #[test]
    fn lemma7_n4_closed_form() {
        for (g1, g4) in [("1/2", "3"), ("1", "1"), ("2/7", "5/3")] {
            let (g1, g4) = (r(g1), r(g4));
            let a2 = &g4 + q(2) * &g1;
            let gammas = vec![g1.clone(), g1.clone(), g1.clone(), g4.clone()];
            let qn = eval_lemma7((&g1, &a2), &gammas).unwrap();
            assert!(qn.c_next.is_zero());
            assert_eq!(qn.c2_over_delta, q(3) / (&g4 * (&g4 + q(2) * &g1)));
        }
    }

    #[test]
    fn lemma7_rejects_outside_region() {
        let gammas = rs(&["1/4", "1/2", "2", "3"]);
        assert!(eval_lemma7((&r("1"), &r("9")), &gammas).is_err());
    }

    #[test]
    fn lemma8_coefficients() {
        let a2 = r("7");
        let gammas = rs(&["1/5", "1/3", "1/2", "3/4", "1", "3"]);
        let qn = eval_lemma8(&a2, &gammas).unwrap();
        let p = poly(&[q(1), a2.clone()], &gammas);
        assert_eq!(qn.c7, p.coefficient(7));
        assert_eq!(qn.c3, p.coefficient(3));
    }

    #[test]
    fn lemma8_corner_identity() {
        assert_eq!(lemma8_k(&q(1), &q(1)), q(-8));
        for (rr, ww) in [("1", "1"), ("1/3", "2"), ("7/10", "13/4"), ("1/100", "1")] {
            let c = lemma8_corner(&r(rr), &r(ww));
            assert!(c.identity_holds, "{} {}", rr, ww);
            assert!(c.factored_agrees);
            assert!(c.k.is_negative());
        }
    }

    #[test]
    fn lemma8_grid() {
        let (max, _, _) = lemma8_grid_max(20, 40);
        assert!(max.is_negative());
    }

    #[test]
    fn sampling_is_reproducible_and_exact() {
        let a = sample_region(LemmaId::One, 3, 1500, 7).unwrap();
        let b = sample_region(LemmaId::One, 3, 1500, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 1500);
        assert_eq!(a.violations, 0);
        let json = serde_json::to_string(&a).unwrap();
        let back: CertificateReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        let single = sample_region(LemmaId::Eight, 0, 1, 1).unwrap();
        assert_eq!(single.samples, 1);
        assert!(sample_region(LemmaId::Six, 4, 10, 1).is_err());
    }
}
