//! Explicit witnesses for realizable couples.
//!
//! A witness is a root configuration whose exact expansion has the couple's
//! sign pattern and whose moduli appear in the couple's order. Candidates
//! may come from cheap floating-point screening, but nothing is accepted
//! before an exact rational check.
//!
//! [`search`] tries, in order: the archive, a geometric ladder, the flat
//! extension `(x - alpha_1) Q_flat`, perturbation of multiple roots, and
//! annealed random search over log-gaps of the moduli.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decision::OrbitMap;
use crate::patterns::{Couple, OrderWord, RootSign, Sign, SignPattern};
use crate::polyalgebra::{
    classify, expand, format_rational, parse_rational, NonGeneric, Polynomial, Rational,
    RootConfiguration,
};

pub const ARCHIVE_SCHEMA_VERSION: u32 = 1;

const CHAIN_LENGTH: u64 = 2_000;
const CHAIN_BATCH: usize = 4;
const LOG_GAP_MIN: f64 = -16.0;
const LOG_GAP_MAX: f64 = 2.5;
const SCREEN_MARGIN: f64 = 1e-11;
const RATIONAL_DIGITS: [i32; 4] = [6, 10, 15, 17];
const FLAT_HALVINGS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_trials: u64,
    #[serde(with = "crate::polyalgebra::rational_vec")]
    pub ladder_ratios: Vec<Rational>,
    #[serde(
        serialize_with = "ser_rational",
        deserialize_with = "de_rational"
    )]
    pub perturbation_scale: Rational,
    pub seed: u64,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn de_rational<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    parse_rational(&text).map_err(serde::de::Error::custom)
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_trials: 100_000,
            ladder_ratios: ["2", "3/2", "11/10", "101/100"]
                .iter()
                .map(|s| parse_rational(s).expect("constant"))
                .collect(),
            perturbation_scale: Rational::new(1.into(), 1000.into()),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("max_trials must be at least 1")]
    NoTrials,
    #[error("ladder ratio {0} is not greater than 1")]
    BadRatio(String),
    #[error("perturbation scale must be positive")]
    BadScale,
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), BudgetError> {
        if self.max_trials == 0 {
            return Err(BudgetError::NoTrials);
        }
        if let Some(r) = self.ladder_ratios.iter().find(|r| **r <= Rational::one()) {
            return Err(BudgetError::BadRatio(format_rational(r)));
        }
        if !self.perturbation_scale.is_positive() {
            return Err(BudgetError::BadScale);
        }
        Ok(())
    }

    pub fn with_trials(mut self, max_trials: u64) -> Self {
        self.max_trials = max_trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Ladder,
    FlatExtension,
    PerturbedMultiple,
    Annealing,
    /// Supplied by the caller rather than found.
    Provided,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Ladder => "ladder",
            Strategy::FlatExtension => "flat-extension",
            Strategy::PerturbedMultiple => "perturbed-multiple",
            Strategy::Annealing => "annealing",
            Strategy::Provided => "provided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub couple: Couple,
    pub roots: RootConfiguration,
    pub poly: Polynomial,
    pub strategy: Strategy,
    pub verified: bool,
}

impl WitnessRecord {
    /// Builds and verifies a record from roots.
    pub fn from_roots(couple: Couple, roots: RootConfiguration, strategy: Strategy) -> Self {
        let poly = expand(&roots);
        let mut record = WitnessRecord {
            couple,
            roots,
            poly,
            strategy,
            verified: false,
        };
        verify(&mut record);
        record
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mismatch {
    /// The stored polynomial is not the expansion of the stored roots.
    PolynomialDiffers { power: usize },
    DegreeDiffers { couple: usize, roots: usize },
    CoefficientSign { power: usize, expected: char, found: char },
    /// 1-based position in the order word.
    OrderLetter { position: usize, expected: char, found: char },
    NonGeneric(NonGeneric),
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::PolynomialDiffers { power } => {
                write!(f, "stored coefficient of x^{} is not the expansion of the roots", power)
            }
            Mismatch::DegreeDiffers { couple, roots } => {
                write!(f, "couple has degree {} but there are {} roots", couple, roots)
            }
            Mismatch::CoefficientSign { power, expected, found } => write!(
                f,
                "coefficient of x^{} has sign {} (expected {})",
                power, found, expected
            ),
            Mismatch::OrderLetter { position, expected, found } => write!(
                f,
                "order letter {} is {} (expected {})",
                position, found, expected
            ),
            Mismatch::NonGeneric(ng) => write!(f, "{}", ng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub couple: Couple,
    pub ok: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Re-expands the roots exactly and compares with the claimed couple.
/// Sets `record.verified` to the outcome.
pub fn verify(record: &mut WitnessRecord) -> VerifyReport {
    let mut mismatches = Vec::new();
    let d = record.couple.degree();
    if record.roots.degree() != d {
        mismatches.push(Mismatch::DegreeDiffers {
            couple: d,
            roots: record.roots.degree(),
        });
    }
    let poly = expand(&record.roots);
    if poly != record.poly {
        let n = poly.degree().max(record.poly.degree());
        for power in (0..=n).rev() {
            if poly.coefficient(power) != record.poly.coefficient(power) {
                mismatches.push(Mismatch::PolynomialDiffers { power });
            }
        }
    }
    if mismatches.is_empty() {
        match classify(&poly, &record.roots) {
            Ok(found) => mismatches.extend(couple_differences(&record.couple, &found)),
            Err(ng) => mismatches.push(Mismatch::NonGeneric(ng)),
        }
    }
    record.verified = mismatches.is_empty();
    VerifyReport {
        couple: record.couple.clone(),
        ok: record.verified,
        mismatches,
    }
}

fn couple_differences(expected: &Couple, found: &Couple) -> Vec<Mismatch> {
    let d = expected.degree();
    let signs = expected
        .pattern()
        .signs()
        .iter()
        .zip(found.pattern().signs())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(k, (a, b))| Mismatch::CoefficientSign {
            power: d - k,
            expected: a.as_char(),
            found: b.as_char(),
        });
    let letters = expected
        .order()
        .letters()
        .iter()
        .zip(found.order().letters())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(k, (a, b))| Mismatch::OrderLetter {
            position: k + 1,
            expected: a.as_char(),
            found: b.as_char(),
        });
    signs.chain(letters).collect()
}

/// Exact check used by every strategy.
fn accept(couple: &Couple, roots: RootConfiguration, strategy: Strategy) -> Option<WitnessRecord> {
    if roots.degree() != couple.degree() {
        return None;
    }
    let record = WitnessRecord::from_roots(couple.clone(), roots, strategy);
    record.verified.then_some(record)
}

/// Roots for the moduli listed in increasing order, signed per the order word.
fn roots_from_moduli(order: &OrderWord, moduli: Vec<Rational>) -> Option<RootConfiguration> {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (letter, m) in order.letters().iter().zip(moduli) {
        match letter {
            RootSign::Positive => positive.push(m),
            RootSign::Negative => negative.push(m),
        }
    }
    RootConfiguration::new(positive, negative).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("alpha_1 = {alpha1} must be positive and below every modulus (smallest is {smallest})")]
    AlphaTooLarge { alpha1: String, smallest: String },
    #[error("configuration has no repeated negative modulus")]
    NoRepeatedModulus,
    #[error("spread must be positive")]
    NonPositiveSpread,
    #[error(transparent)]
    NonGeneric(#[from] NonGeneric),
    #[error("perturbed expansion has pattern {found}, base has {expected}")]
    PatternChanged { expected: String, found: String },
}

/// Adjoins `alpha1` as the new smallest root.
pub fn construct_flat_extension(
    q_flat: &RootConfiguration,
    alpha1: &Rational,
) -> Result<RootConfiguration, ConstructionError> {
    let smallest = q_flat.smallest_modulus();
    let ok = alpha1.is_positive() && smallest.is_none_or(|s| alpha1 < s);
    if !ok {
        return Err(ConstructionError::AlphaTooLarge {
            alpha1: format_rational(alpha1),
            smallest: smallest.map(format_rational).unwrap_or_default(),
        });
    }
    Ok(q_flat
        .with_positive(alpha1.clone())
        .expect("alpha1 is positive"))
}

/// Splits every repeated negative modulus `gamma` of multiplicity `k` into
/// `k` distinct values inside `(gamma - spread, gamma + spread)`.
pub fn construct_perturbed_multiple(
    base: &RootConfiguration,
    spread: &Rational,
) -> Result<RootConfiguration, ConstructionError> {
    let gammas = base.negative_moduli();
    let repeated = gammas.windows(2).any(|w| w[0] == w[1]);
    if !repeated {
        return Err(ConstructionError::NoRepeatedModulus);
    }
    let base_pattern = expand(base).sign_pattern().map_err(|zeros| {
        ConstructionError::NonGeneric(NonGeneric {
            zero_coefficients: zeros,
            ..NonGeneric::default()
        })
    })?;
    if spread.is_zero() {
        return Err(ConstructionError::NonGeneric(NonGeneric {
            tied_moduli: base.tied_moduli().iter().map(format_rational).collect(),
            ..NonGeneric::default()
        }));
    }
    if spread.is_negative() {
        return Err(ConstructionError::NonPositiveSpread);
    }
    let mut spread_out = Vec::with_capacity(gammas.len());
    let mut i = 0;
    while i < gammas.len() {
        let mut j = i;
        while j < gammas.len() && gammas[j] == gammas[i] {
            j += 1;
        }
        let k = (j - i) as i64;
        for t in 0..k {
            // offsets (2t - k + 1) / (k + 1) lie in (-1, 1)
            let offset = Rational::new((2 * t - k + 1).into(), (k + 1).into());
            spread_out.push(&gammas[i] + spread * offset);
        }
        i = j;
    }
    let perturbed = RootConfiguration::new(base.positive().to_vec(), spread_out)
        .map_err(|_| ConstructionError::NonPositiveSpread)?;
    let poly = expand(&perturbed);
    let found = poly.sign_pattern().map_err(|zeros| {
        ConstructionError::NonGeneric(NonGeneric {
            zero_coefficients: zeros,
            ..NonGeneric::default()
        })
    })?;
    if found != base_pattern {
        return Err(ConstructionError::PatternChanged {
            expected: base_pattern.to_string(),
            found: found.to_string(),
        });
    }
    let ties = perturbed.tied_moduli();
    if !ties.is_empty() {
        return Err(ConstructionError::NonGeneric(NonGeneric {
            tied_moduli: ties.iter().map(format_rational).collect(),
            ..NonGeneric::default()
        }));
    }
    Ok(perturbed)
}

/// Maps a configuration along an involution: `i_m` swaps root signs, `i_r`
/// inverts all moduli.
pub fn transform_roots(roots: &RootConfiguration, map: OrbitMap) -> RootConfiguration {
    let invert = |v: &[Rational]| v.iter().map(|r| r.recip()).collect::<Vec<_>>();
    let (p, n) = match map {
        OrbitMap::Identity => (roots.positive().to_vec(), roots.negative_moduli().to_vec()),
        OrbitMap::Mirror => (roots.negative_moduli().to_vec(), roots.positive().to_vec()),
        OrbitMap::Reverse => (invert(roots.positive()), invert(roots.negative_moduli())),
        OrbitMap::MirrorReverse => (invert(roots.negative_moduli()), invert(roots.positive())),
    };
    RootConfiguration::new(p, n).expect("moduli stay positive")
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Archive {
    pub schema_version: u32,
    pub witnesses: BTreeMap<String, WitnessRecord>,
}

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("cannot read or write archive: {0}")]
    Io(#[from] io::Error),
    #[error("malformed archive: {0}")]
    Json(#[from] serde_json::Error),
    #[error("archive schema version {found} is not supported (expected {expected})")]
    Schema { found: u32, expected: u32 },
}

impl Archive {
    pub fn new() -> Self {
        Archive {
            schema_version: ARCHIVE_SCHEMA_VERSION,
            witnesses: BTreeMap::new(),
        }
    }

    /// Missing files load as an empty archive.
    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        if !path.exists() {
            return Ok(Archive::new());
        }
        let archive: Archive = serde_json::from_str(&fs::read_to_string(path)?)?;
        if archive.schema_version != ARCHIVE_SCHEMA_VERSION {
            return Err(ArchiveError::Schema {
                found: archive.schema_version,
                expected: ARCHIVE_SCHEMA_VERSION,
            });
        }
        Ok(archive)
    }

    pub fn save(&self, path: &Path) -> Result<(), ArchiveError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Stored witness, re-verified; stale entries are ignored.
    pub fn lookup(&self, couple: &Couple) -> Option<WitnessRecord> {
        let mut record = self.witnesses.get(&couple.to_string())?.clone();
        if &record.couple != couple {
            return None;
        }
        verify(&mut record).ok.then_some(record)
    }

    /// Keeps the first verified witness per couple.
    pub fn insert(&mut self, record: WitnessRecord) -> bool {
        if !record.verified {
            return false;
        }
        let key = record.couple.to_string();
        if self.witnesses.contains_key(&key) {
            return false;
        }
        self.witnesses.insert(key, record);
        true
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found {
        witness: WitnessRecord,
        from_archive: bool,
    },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub couple: Couple,
    pub trials: u64,
    #[serde(flatten)]
    pub outcome: SearchOutcome,
}

impl SearchReport {
    pub fn witness(&self) -> Option<&WitnessRecord> {
        match &self.outcome {
            SearchOutcome::Found { witness, .. } => Some(witness),
            SearchOutcome::Exhausted => None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.witness().is_some()
    }
}

/// Looks for a witness within `budget.max_trials` candidate evaluations.
pub fn search(couple: &Couple, budget: &SearchBudget, archive: Option<&Archive>) -> SearchReport {
    if let Some(witness) = archive.and_then(|a| a.lookup(couple)) {
        return SearchReport {
            couple: couple.clone(),
            trials: 0,
            outcome: SearchOutcome::Found {
                witness,
                from_archive: true,
            },
        };
    }
    let mut trials = 0u64;
    let found = search_fresh(couple, budget, &mut trials);
    SearchReport {
        couple: couple.clone(),
        trials,
        outcome: match found {
            Some(witness) => SearchOutcome::Found {
                witness,
                from_archive: false,
            },
            None => SearchOutcome::Exhausted,
        },
    }
}

fn search_fresh(couple: &Couple, budget: &SearchBudget, trials: &mut u64) -> Option<WitnessRecord> {
    let limit = budget.max_trials;
    if let Some(w) = ladder(couple, budget, trials, limit) {
        return Some(w);
    }
    if let Some(w) = flat_extension(couple, budget, trials, limit) {
        return Some(w);
    }
    if let Some(w) = perturbed_multiple(couple, budget, trials, limit) {
        return Some(w);
    }
    anneal(couple, budget, trials, limit)
}

fn ladder(
    couple: &Couple,
    budget: &SearchBudget,
    trials: &mut u64,
    limit: u64,
) -> Option<WitnessRecord> {
    for ratio in &budget.ladder_ratios {
        if *trials >= limit {
            return None;
        }
        *trials += 1;
        let mut moduli = Vec::with_capacity(couple.degree());
        let mut m = Rational::one();
        for _ in 0..couple.degree() {
            moduli.push(m.clone());
            m *= ratio;
        }
        if let Some(w) = roots_from_moduli(couple.order(), moduli)
            .and_then(|r| accept(couple, r, Strategy::Ladder))
        {
            return Some(w);
        }
    }
    None
}

/// For an orbit element of shape `S(m,n,1)` with `alpha_1` smallest, solves
/// the degree `d-1` couple `S(m,n)` and adjoins a small `alpha_1`.
fn flat_extension(
    couple: &Couple,
    budget: &SearchBudget,
    trials: &mut u64,
    limit: u64,
) -> Option<WitnessRecord> {
    for map in OrbitMap::ALL {
        let image = map.apply(couple);
        let Some((m, n)) = image.pattern().two_change_shape() else {
            continue;
        };
        if image.order().letters()[0] != RootSign::Positive || image.degree() < 2 {
            continue;
        }
        let reduced_pattern = SignPattern::from_blocks(&[m, n]).ok()?;
        let reduced_order = OrderWord::new(image.order().letters()[1..].to_vec()).ok()?;
        let reduced = Couple::new(reduced_pattern, reduced_order).ok()?;
        let sub_limit = (*trials + (limit - (*trials).min(limit)) / 4).min(limit);
        let base = ladder(&reduced, budget, trials, sub_limit)
            .or_else(|| anneal(&reduced, budget, trials, sub_limit))?;
        let mut alpha1 = base.roots.smallest_modulus()?.clone() / Rational::from_integer(2.into());
        for _ in 0..FLAT_HALVINGS {
            if *trials >= limit {
                return None;
            }
            *trials += 1;
            let extended = construct_flat_extension(&base.roots, &alpha1).ok()?;
            let back = transform_roots(&extended, map);
            if let Some(w) = accept(couple, back, Strategy::FlatExtension) {
                return Some(w);
            }
            alpha1 /= Rational::from_integer(2.into());
        }
        return None;
    }
    None
}

/// Places each positive root and each maximal run of negative letters on its
/// own rung, the run as one multiple root, then splits the multiple roots.
fn perturbed_multiple(
    couple: &Couple,
    budget: &SearchBudget,
    trials: &mut u64,
    limit: u64,
) -> Option<WitnessRecord> {
    let letters = couple.order().letters();
    if !letters
        .windows(2)
        .any(|w| w[0] == RootSign::Negative && w[1] == RootSign::Negative)
    {
        return None;
    }
    let ten = Rational::from_integer(10.into());
    for ratio in &budget.ladder_ratios {
        for first_gap in [ratio.clone(), ten.clone()] {
            let mut positive = Vec::new();
            let mut negative = Vec::new();
            let mut modulus = Rational::one();
            let mut rung = 0usize;
            let mut k = 0;
            while k < letters.len() {
                if rung == 1 {
                    modulus *= &first_gap;
                } else if rung > 1 {
                    modulus *= ratio;
                }
                match letters[k] {
                    RootSign::Positive => {
                        positive.push(modulus.clone());
                        k += 1;
                    }
                    RootSign::Negative => {
                        while k < letters.len() && letters[k] == RootSign::Negative {
                            negative.push(modulus.clone());
                            k += 1;
                        }
                    }
                }
                rung += 1;
            }
            let Ok(base) = RootConfiguration::new(positive, negative) else {
                continue;
            };
            let mut spread = &budget.perturbation_scale * (ratio - Rational::one());
            for _ in 0..3 {
                if *trials >= limit {
                    return None;
                }
                *trials += 1;
                if let Ok(roots) = construct_perturbed_multiple(&base, &spread) {
                    if let Some(w) = accept(couple, roots, Strategy::PerturbedMultiple) {
                        return Some(w);
                    }
                }
                spread /= &ten;
            }
        }
    }
    None
}

/// Per-couple base seed: SHA-256 of the couple text, folded with the user seed.
pub fn couple_seed(couple: &Couple, seed: u64) -> u64 {
    let digest = Sha256::digest(couple.to_string().as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head) ^ seed
}

struct Screen {
    /// +1 / -1 per coefficient, leading first.
    signs: Vec<f64>,
    positive: Vec<bool>,
    coeffs: Vec<f64>,
    scale: Vec<f64>,
    moduli: Vec<f64>,
}

impl Screen {
    fn new(couple: &Couple) -> Self {
        let d = couple.degree();
        Screen {
            signs: couple
                .pattern()
                .signs()
                .iter()
                .map(|s| if *s == Sign::Plus { 1.0 } else { -1.0 })
                .collect(),
            positive: couple
                .order()
                .letters()
                .iter()
                .map(|l| *l == RootSign::Positive)
                .collect(),
            coeffs: vec![0.0; d + 1],
            scale: vec![0.0; d + 1],
            moduli: vec![0.0; d],
        }
    }

    /// Fills `moduli` from log-gaps, centred on 1 in log scale.
    fn set_moduli(&mut self, gaps: &[f64]) {
        let mut t = 0.0;
        let mut logs = Vec::with_capacity(gaps.len() + 1);
        logs.push(0.0);
        for u in gaps {
            t += u.exp();
            logs.push(t);
        }
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        for (m, l) in self.moduli.iter_mut().zip(&logs) {
            *m = (l - mean).exp();
        }
    }

    /// Total shortfall of the relative coefficients below the margin; 0 means
    /// every coefficient has the target sign in floating point.
    fn penalty(&mut self) -> f64 {
        let d = self.moduli.len();
        self.coeffs.iter_mut().for_each(|c| *c = 0.0);
        self.scale.iter_mut().for_each(|c| *c = 0.0);
        self.coeffs[0] = 1.0;
        self.scale[0] = 1.0;
        for (i, (&m, &pos)) in self.moduli.iter().zip(&self.positive).enumerate() {
            let r = if pos { m } else { -m };
            for k in (1..=i + 1).rev() {
                self.coeffs[k] -= r * self.coeffs[k - 1];
                self.scale[k] += m * self.scale[k - 1];
            }
        }
        let mut p = 0.0;
        for k in 1..=d {
            let v = self.signs[k] * self.coeffs[k] / self.scale[k];
            if v < SCREEN_MARGIN {
                p += SCREEN_MARGIN - v;
            }
        }
        p
    }
}

fn rationalize(x: f64, digits: i32) -> Option<Rational> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let exponent = x.log10().floor() as i32;
    let shift = digits - 1 - exponent;
    let scaled = if shift >= 0 {
        x * 10f64.powi(shift)
    } else {
        x / 10f64.powi(-shift)
    };
    let mantissa = BigInt::from(scaled.round().to_i128()?);
    let ten = BigInt::from(10u32);
    Some(if shift >= 0 {
        Rational::new(mantissa, num_traits::pow(ten, shift as usize))
    } else {
        Rational::from_integer(mantissa * num_traits::pow(ten, (-shift) as usize))
    })
}

fn exact_from_floats(couple: &Couple, moduli: &[f64]) -> Option<WitnessRecord> {
    for digits in RATIONAL_DIGITS {
        let rational: Option<Vec<Rational>> = moduli.iter().map(|m| rationalize(*m, digits)).collect();
        let Some(rational) = rational else { continue };
        if rational.windows(2).any(|w| w[0] >= w[1]) {
            continue;
        }
        if let Some(w) = roots_from_moduli(couple.order(), rational)
            .and_then(|r| accept(couple, r, Strategy::Annealing))
        {
            return Some(w);
        }
    }
    None
}

/// One annealing chain; returns (evaluations used, witness).
fn run_chain(couple: &Couple, base_seed: u64, index: u64, length: u64) -> (u64, Option<WitnessRecord>) {
    let d = couple.degree();
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    let mut screen = Screen::new(couple);
    if d == 1 {
        screen.set_moduli(&[]);
        let found = exact_from_floats(couple, &screen.moduli);
        return (1, found);
    }
    // starting gap profile: moderate, or with some near-collisions
    let near = rng.gen_bool(0.5);
    let mut gaps: Vec<f64> = (0..d - 1)
        .map(|_| {
            if near && rng.gen_bool(0.4) {
                rng.gen_range(LOG_GAP_MIN..-6.0)
            } else {
                rng.gen_range(-4.0..1.5)
            }
        })
        .collect();
    screen.set_moduli(&gaps);
    let mut current = screen.penalty();
    let mut used = 1;
    let (t0, t1) = (0.3f64, 1e-5f64);
    let mut candidate = gaps.clone();
    while used < length {
        if current == 0.0 {
            screen.set_moduli(&gaps);
            if let Some(w) = exact_from_floats(couple, &screen.moduli) {
                return (used, Some(w));
            }
            // float false positive; nudge away and continue
            let k = rng.gen_range(0..d - 1);
            gaps[k] = (gaps[k] + rng.gen_range(-1.0..1.0)).clamp(LOG_GAP_MIN, LOG_GAP_MAX);
            screen.set_moduli(&gaps);
            current = screen.penalty();
            used += 1;
            continue;
        }
        let temperature = t0 * (t1 / t0).powf(used as f64 / length as f64);
        candidate.copy_from_slice(&gaps);
        if rng.gen_bool(0.8) {
            let k = rng.gen_range(0..d - 1);
            let step = 10f64.powf(rng.gen_range(-1.5..0.6));
            candidate[k] += step * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        } else {
            let step = 10f64.powf(rng.gen_range(-2.0..-0.3));
            for c in candidate.iter_mut() {
                *c += step * rng.gen_range(-1.0..1.0);
            }
        }
        for c in candidate.iter_mut() {
            *c = c.clamp(LOG_GAP_MIN, LOG_GAP_MAX);
        }
        screen.set_moduli(&candidate);
        let next = screen.penalty();
        used += 1;
        let accept_move = next <= current
            || rng.gen_bool(((current - next) / temperature).exp().clamp(0.0, 1.0));
        if accept_move {
            gaps.copy_from_slice(&candidate);
            current = next;
        }
    }
    if current == 0.0 {
        screen.set_moduli(&gaps);
        return (used, exact_from_floats(couple, &screen.moduli));
    }
    (used, None)
}

/// Deterministic batches of independent chains; the lowest successful chain
/// index wins regardless of scheduling.
fn anneal(
    couple: &Couple,
    budget: &SearchBudget,
    trials: &mut u64,
    limit: u64,
) -> Option<WitnessRecord> {
    let base_seed = couple_seed(couple, budget.seed);
    let mut index = 0u64;
    while *trials < limit {
        let remaining = limit - *trials;
        let mut lengths = Vec::new();
        let mut left = remaining;
        while lengths.len() < CHAIN_BATCH && left > 0 {
            let l = left.min(CHAIN_LENGTH);
            lengths.push(l);
            left -= l;
        }
        let results: Vec<(u64, Option<WitnessRecord>)> = lengths
            .par_iter()
            .enumerate()
            .map(|(k, &len)| run_chain(couple, base_seed, index + k as u64, len))
            .collect();
        for (used, found) in results {
            *trials += used;
            if let Some(w) = found {
                return Some(w);
            }
        }
        index += lengths.len() as u64;
    }
    None
}

/// Random generic configurations with the given numbers of positive and
/// negative roots; moduli are log-uniform, rounded to six significant digits.
pub fn random_configuration<R: Rng>(rng: &mut R, positives: usize, negatives: usize) -> RootConfiguration {
    let mut draw = |k: usize| -> Vec<Rational> {
        (0..k)
            .map(|_| {
                let x: f64 = rng.gen_range(-3.0f64..3.0).exp();
                rationalize(x, 6).expect("finite positive")
            })
            .collect()
    };
    let p = draw(positives);
    let n = draw(negatives);
    RootConfiguration::new(p, n).expect("positive moduli")
}

/// `count` random verified witnesses whose couple passes `keep`, drawn with
/// `positives` positive roots and total degree in `degrees`.
pub fn random_witnesses(
    count: usize,
    degrees: std::ops::RangeInclusive<usize>,
    positives: usize,
    seed: u64,
    keep: impl Fn(&Couple) -> bool,
) -> Vec<WitnessRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees: Vec<usize> = degrees.filter(|d| *d >= positives).collect();
    let mut out = Vec::with_capacity(count);
    if degrees.is_empty() {
        return out;
    }
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 1000 {
        attempts += 1;
        let d = degrees[rng.gen_range(0..degrees.len())];
        let roots = random_configuration(&mut rng, positives, d - positives);
        let poly = expand(&roots);
        let Ok(couple) = classify(&poly, &roots) else {
            continue;
        };
        if keep(&couple) {
            out.push(WitnessRecord {
                couple,
                roots,
                poly,
                strategy: Strategy::Provided,
                verified: true,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn couple(p: &str, o: &str) -> Couple {
        Couple::parse(p, o).unwrap()
    }

    fn quick() -> SearchBudget {
        SearchBudget::default().with_trials(20_000)
    }

    #[test]
    fn budget_defaults_and_validation() {
        let b = SearchBudget::default();
        assert_eq!(b.max_trials, 100_000);
        assert_eq!(b.ladder_ratios.len(), 4);
        assert!(b.validate().is_ok());
        assert_eq!(b.clone().with_trials(0).validate(), Err(BudgetError::NoTrials));
        let mut bad = b.clone();
        bad.ladder_ratios.push(q("1"));
        assert!(matches!(bad.validate(), Err(BudgetError::BadRatio(_))));
        let json = serde_json::to_string(&b).unwrap();
        let back: SearchBudget = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn example_record_verifies() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let r = WitnessRecord::from_roots(couple("S(2,3,1)", "PPNNN"), roots, Strategy::Provided);
        assert!(r.verified);
    }

    #[test]
    fn swapped_order_letter_is_diagnosed() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let mut r = WitnessRecord::from_roots(couple("S(2,3,1)", "PNPNN"), roots, Strategy::Provided);
        let report = verify(&mut r);
        assert!(!report.ok && !r.verified);
        assert_eq!(
            report.mismatches,
            vec![
                Mismatch::OrderLetter { position: 2, expected: 'N', found: 'P' },
                Mismatch::OrderLetter { position: 3, expected: 'P', found: 'N' },
            ]
        );
    }

    #[test]
    fn non_generic_record_is_diagnosed() {
        // x^2 - 1: tied moduli and a vanishing coefficient
        let roots = RootConfiguration::from_decimals(&["1"], &["1"]).unwrap();
        let mut r = WitnessRecord::from_roots(couple("++-", "PN"), roots, Strategy::Provided);
        let report = verify(&mut r);
        assert!(!report.ok);
        assert!(matches!(report.mismatches[0], Mismatch::NonGeneric(_)));
    }

    #[test]
    fn tampered_polynomial_is_diagnosed() {
        let roots = RootConfiguration::from_decimals(&["1"], &["2"]).unwrap();
        let mut r = WitnessRecord::from_roots(couple("++-", "PN"), roots, Strategy::Provided);
        r.poly = Polynomial::from_decimals(&["1", "1", "-3"]).unwrap();
        let report = verify(&mut r);
        assert_eq!(report.mismatches, vec![Mismatch::PolynomialDiffers { power: 0 }]);
    }

    #[test]
    fn flat_extension_examples() {
        // S(2,2) = (+,+,-,-) with order NPN
        let q_flat = RootConfiguration::from_decimals(&["1.1"], &["1", "1.2"]).unwrap();
        let c = crate::polyalgebra::classify_roots(&q_flat).unwrap();
        assert_eq!(c.to_string(), "S(2,2)/NPN");
        let ext = construct_flat_extension(&q_flat, &q("0.001")).unwrap();
        let poly = expand(&ext);
        assert_eq!(poly.sign_pattern().unwrap().to_string(), "S(2,2,1)");
        assert_eq!(poly.deflate_root(&q("0.001")).unwrap(), expand(&q_flat));
        assert!(matches!(
            construct_flat_extension(&q_flat, &q("1")),
            Err(ConstructionError::AlphaTooLarge { .. })
        ));
    }

    #[test]
    fn perturbed_multiple_examples() {
        let base = RootConfiguration::from_decimals(
            &["0.1", "1"],
            &["1.01", "1.01", "1.01", "1.01", "1.01"],
        )
        .unwrap();
        let roots = construct_perturbed_multiple(&base, &q("1/100000")).unwrap();
        let r = WitnessRecord::from_roots(couple("S(3,4,1)", "PPNNNNN"), roots, Strategy::PerturbedMultiple);
        assert!(r.verified);
        assert!(matches!(
            construct_perturbed_multiple(&base, &q("0")),
            Err(ConstructionError::NonGeneric(_))
        ));
        let distinct = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        assert!(matches!(
            construct_perturbed_multiple(&distinct, &q("0.01")),
            Err(ConstructionError::NoRepeatedModulus)
        ));
    }

    #[test]
    fn involutions_act_on_roots() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let c = couple("S(2,3,1)", "PPNNN");
        for map in OrbitMap::ALL {
            let image = transform_roots(&roots, map);
            let r = WitnessRecord::from_roots(map.apply(&c), image, Strategy::Provided);
            assert!(r.verified, "{}", map);
        }
    }

    #[test]
    fn search_finds_small_case_witness() {
        let c = couple("S(2,3,1)", "PNNNP");
        let report = search(&c, &quick(), None);
        let w = report.witness().expect("witness");
        assert!(w.verified);
        let mut again = w.clone();
        assert!(verify(&mut again).ok);
    }

    #[test]
    fn search_exhausts_on_nonrealizable() {
        let c = couple("S(2,3,1)", "NPNPN");
        let report = search(&c, &SearchBudget::default().with_trials(5_000), None);
        assert!(!report.is_found());
        assert_eq!(report.trials, 5_000);
    }

    #[test]
    fn degree_one() {
        let c = couple("+-", "P");
        let w = search(&c, &quick(), None).witness().unwrap().clone();
        assert_eq!(w.poly, Polynomial::from_decimals(&["1", "-1"]).unwrap());
    }

    #[test]
    fn search_is_reproducible() {
        let c = couple("S(3,4,1)", "PPNNNNN");
        let a = search(&c, &quick(), None);
        let b = search(&c, &quick(), None);
        assert!(a.is_found());
        assert_eq!(a, b);
    }

    #[test]
    fn archive_roundtrip() {
        let c = couple("S(2,3,1)", "PPNNN");
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let mut archive = Archive::new();
        assert!(archive.insert(WitnessRecord::from_roots(c.clone(), roots, Strategy::Provided)));
        let dir = std::env::temp_dir().join(format!("hsigns-archive-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("witnesses.json");
        archive.save(&path).unwrap();
        let loaded = Archive::load(&path).unwrap();
        assert_eq!(loaded, archive);
        let report = search(&c, &quick(), Some(&loaded));
        assert_eq!(report.trials, 0);
        assert!(matches!(report.outcome, SearchOutcome::Found { from_archive: true, .. }));
        fs::remove_dir_all(&dir).unwrap();
        assert!(Archive::load(&dir.join("missing.json")).unwrap().is_empty());
    }

    #[test]
    fn rationalize_keeps_digits() {
        assert_eq!(rationalize(1.23456789, 6), Some(q("1.23457")));
        assert_eq!(rationalize(123456.7, 3), Some(q("123000")));
        assert_eq!(rationalize(0.000123456, 2), Some(q("0.00012")));
        assert_eq!(rationalize(-1.0, 3), None);
    }
}
