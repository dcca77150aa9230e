//! Realizability decisions for couples.
//!
//! Supported shapes are one sign change (`S(m,n)`) and `S(m,n,1)`, plus
//! everything reachable from them under the two involutions. Rigid orders
//! and canonical patterns are answered before any shape analysis.
//!
//! Two rule sets are available. [`RuleSet::Literal`] applies the published
//! statements word for word. [`RuleSet::Revised`] (the default) corrects
//! two boundaries that exact witnesses and impossibility arguments show to be
//! misstated:
//!
//! * one sign change, `m <= n`: the first positive root must exceed
//!   `gamma_{d-2m+1}`, i.e. the `P` letter sits at position `>= d-2m+2`.
//!   The literal bound `d-2m+1` is not invariant under reversal.
//! * `S(m,n,1)` with `2 <= m < n`, `n >= 5`: realizable iff `alpha_1 < gamma_1`
//!   and either `nu >= n-m` or `m = n-1`.
//!
//! Verdicts decided under the revised rules carry an `amendment` note
//! whenever the literal rules would have answered differently.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::patterns::{
    all_patterns, compatible_couples, Couple, OrderWord, SignPattern,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Realizable,
    NonRealizable,
    OutOfScope,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Realizable => "Realizable",
            Status::NonRealizable => "NonRealizable",
            Status::OutOfScope => "OutOfScope",
        })
    }
}

/// Which statement settled a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    /// Canonical pattern: realizable only with its canonical order.
    CanonicalPattern,
    /// Rigid order: realizable only with the pattern it is canonical for.
    RigidOrder,
    /// One sign change.
    OneChange,
    /// Part `k` (1..=8) of the two-change classification.
    TwoChange(u8),
}

impl Clause {
    pub fn tag(&self) -> String {
        match self {
            Clause::CanonicalPattern => "Rem1(1)".to_string(),
            Clause::RigidOrder => "Rem1(2)".to_string(),
            Clause::OneChange => "Thm1".to_string(),
            Clause::TwoChange(k) => format!("Thm2({})", k),
        }
    }

    pub fn from_tag(tag: &str) -> Option<Clause> {
        match tag {
            "Rem1(1)" => Some(Clause::CanonicalPattern),
            "Rem1(2)" => Some(Clause::RigidOrder),
            "Thm1" => Some(Clause::OneChange),
            _ => {
                let k = tag.strip_prefix("Thm2(")?.strip_suffix(')')?.parse().ok()?;
                (1..=8).contains(&k).then_some(Clause::TwoChange(k))
            }
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl Serialize for Clause {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for Clause {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tag = String::deserialize(d)?;
        Clause::from_tag(&tag)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown clause tag {:?}", tag)))
    }
}

/// An element of the Klein four-group generated by `i_m` and `i_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitMap {
    #[serde(rename = "id")]
    Identity,
    #[serde(rename = "i_r")]
    Reverse,
    #[serde(rename = "i_m")]
    Mirror,
    #[serde(rename = "i_m*i_r")]
    MirrorReverse,
}

impl OrbitMap {
    /// Search order used by [`decide`].
    pub const ALL: [OrbitMap; 4] = [
        OrbitMap::Identity,
        OrbitMap::Reverse,
        OrbitMap::Mirror,
        OrbitMap::MirrorReverse,
    ];

    pub fn apply(self, couple: &Couple) -> Couple {
        match self {
            OrbitMap::Identity => couple.clone(),
            OrbitMap::Reverse => couple.reverse(),
            OrbitMap::Mirror => couple.mirror(),
            OrbitMap::MirrorReverse => couple.reverse().mirror(),
        }
    }
}

impl fmt::Display for OrbitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitMap::Identity => "id",
            OrbitMap::Reverse => "i_r",
            OrbitMap::Mirror => "i_m",
            OrbitMap::MirrorReverse => "i_m*i_r",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub map: OrbitMap,
    /// The orbit element that was actually decided, as `S(..)/ORDER`.
    pub couple: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clause: Option<Clause>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduction: Option<Reduction>,
    /// Set when the revised rules disagree with the literal statement.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amendment: Option<String>,
}

impl Verdict {
    fn decided(realizable: bool, clause: Clause) -> Self {
        Verdict {
            status: if realizable {
                Status::Realizable
            } else {
                Status::NonRealizable
            },
            clause: Some(clause),
            reduction: None,
            amendment: None,
        }
    }

    pub fn out_of_scope() -> Self {
        Verdict {
            status: Status::OutOfScope,
            clause: None,
            reduction: None,
            amendment: None,
        }
    }

    pub fn is_realizable(&self) -> bool {
        self.status == Status::Realizable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleSet {
    #[default]
    Revised,
    Literal,
}

impl std::str::FromStr for RuleSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "revised" => Ok(RuleSet::Revised),
            "literal" => Ok(RuleSet::Literal),
            other => Err(format!("unknown rule set {:?} (expected revised or literal)", other)),
        }
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleSet::Revised => "revised",
            RuleSet::Literal => "literal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecisionError {
    #[error("pattern {0} does not have the expected block shape {1}")]
    WrongShape(String, &'static str),
}

/// Couples whose pattern is `S(m,n)`.
pub fn decide_one_change(couple: &Couple, rules: RuleSet) -> Result<Verdict, DecisionError> {
    let (m, n) = couple
        .pattern()
        .one_change_shape()
        .ok_or_else(|| DecisionError::WrongShape(couple.pattern().to_string(), "S(m,n)"))?;
    let d = couple.degree();
    // compatibility guarantees exactly one P
    let p = couple.order().positive_positions()[0];
    let verdict = |lower_offset: usize| -> bool {
        if n <= m && p > 2 * n - 1 {
            return false;
        }
        if m <= n && p + 2 * m < d + lower_offset {
            return false;
        }
        true
    };
    let literal = verdict(1);
    let revised = verdict(2);
    let mut out = Verdict::decided(
        if rules == RuleSet::Literal { literal } else { revised },
        Clause::OneChange,
    );
    if rules == RuleSet::Revised && literal != revised {
        out.amendment = Some(format!(
            "requires the P letter at position >= d-2m+2 = {}, one later than the literal rule",
            d + 2 - 2 * m
        ));
    }
    Ok(out)
}

fn small_case_table(m: usize, n: usize) -> Option<&'static [&'static str]> {
    match (m, n) {
        (1, 1) => Some(&["PP"]),
        (1, 2) => Some(&["NPP", "PNP", "PPN"]),
        (2, 3) => Some(&["NPPNN", "PPNNN", "PNPNN", "PNNPN", "PNNNP"]),
        (2, 4) => Some(&["PNNPNN", "PNNNPN", "PNNNNP"]),
        (3, 4) => Some(&["PPNNNNN", "PNPNNNN", "PNNPNNN", "PNNNPNN", "PNNNNPN", "PNNNNNP"]),
        _ => None,
    }
}

/// Couples whose pattern is `S(m,n,1)`.
pub fn decide_two_change(couple: &Couple, rules: RuleSet) -> Result<Verdict, DecisionError> {
    let (m, n) = couple
        .pattern()
        .two_change_shape()
        .ok_or_else(|| DecisionError::WrongShape(couple.pattern().to_string(), "S(m,n,1)"))?;
    let d = couple.degree();
    let order = couple.order();
    let positions = order.positive_positions();
    let (p1, p2) = (positions[0], positions[1]);
    let nu = p2 - 2;
    let canonical = couple.is_canonical_order();
    let exceptional = OrderWord::exceptional_npp(d).as_ref() == Some(order);
    let alpha_first = p1 == 1;

    if let Some(table) = small_case_table(m, n) {
        let text = order.to_string();
        return Ok(Verdict::decided(table.contains(&text.as_str()), Clause::TwoChange(8)));
    }
    let verdict = if m > n {
        match n {
            1 => Verdict::decided(canonical, Clause::TwoChange(1)),
            2 | 3 => Verdict::decided(
                (alpha_first && nu <= 2 * n - 2) || exceptional,
                Clause::TwoChange(3),
            ),
            _ => Verdict::decided(alpha_first && nu <= 2 * n - 2, Clause::TwoChange(2)),
        }
    } else if m == n {
        if n >= 4 {
            Verdict::decided(alpha_first, Clause::TwoChange(4))
        } else {
            Verdict::decided(alpha_first || exceptional, Clause::TwoChange(5))
        }
    } else if m == 1 {
        Verdict::decided(canonical, Clause::TwoChange(6))
    } else {
        // m >= 2, n >= 5 (smaller cases are tabulated)
        let literal = nu >= n - m;
        let revised = alpha_first && (nu >= n - m || m + 1 == n);
        let mut v = Verdict::decided(
            if rules == RuleSet::Literal { literal } else { revised },
            Clause::TwoChange(7),
        );
        if rules == RuleSet::Revised && literal != revised {
            v.amendment = Some(if !alpha_first {
                "requires alpha_1 < gamma_1 (P in first position)".to_string()
            } else {
                format!("nu = 0 is realizable for S({},{},1)", m, n)
            });
        }
        v
    };
    Ok(verdict)
}

/// Whether the pattern is one that [`decide`] handles without orbit search.
fn direct_shape(pattern: &SignPattern) -> bool {
    pattern.one_change_shape().is_some() || pattern.two_change_shape().is_some()
}

/// Decides any compatible couple, or reports it out of scope.
pub fn decide(couple: &Couple, rules: RuleSet) -> Verdict {
    if couple.order().is_rigid() {
        return Verdict::decided(couple.is_canonical_order(), Clause::RigidOrder);
    }
    if couple.pattern().is_canonical() {
        return Verdict::decided(couple.is_canonical_order(), Clause::CanonicalPattern);
    }
    for map in OrbitMap::ALL {
        let image = map.apply(couple);
        let pattern = image.pattern();
        let decided = if pattern.one_change_shape().is_some() {
            decide_one_change(&image, rules)
        } else if pattern.two_change_shape().is_some() {
            decide_two_change(&image, rules)
        } else {
            continue;
        };
        let mut verdict = decided.expect("shape checked above");
        verdict.reduction = Some(Reduction {
            map,
            couple: image.to_string(),
        });
        return verdict;
    }
    Verdict::out_of_scope()
}

/// Whether some orbit element has a supported shape (or a fast path applies).
pub fn is_supported(couple: &Couple) -> bool {
    couple.order().is_rigid()
        || couple.pattern().is_canonical()
        || OrbitMap::ALL
            .iter()
            .any(|m| direct_shape(m.apply(couple).pattern()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeFilter {
    /// `S(m,n)`
    Mn,
    /// `S(m,n,1)`
    Mn1,
    /// Patterns with a supported orbit element.
    Supported,
    All,
}

impl ShapeFilter {
    pub fn accepts(self, pattern: &SignPattern) -> bool {
        match self {
            ShapeFilter::Mn => pattern.one_change_shape().is_some(),
            ShapeFilter::Mn1 => pattern.two_change_shape().is_some(),
            ShapeFilter::Supported => {
                pattern.is_canonical()
                    || [pattern.clone(), pattern.to_cp().flipped().to_signs()]
                        .iter()
                        .flat_map(|p| [p.clone(), p.to_cp().reversed().to_signs()])
                        .any(|p| direct_shape(&p))
            }
            ShapeFilter::All => true,
        }
    }
}

impl std::str::FromStr for ShapeFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mn" => Ok(ShapeFilter::Mn),
            "mn1" => Ok(ShapeFilter::Mn1),
            "supported" => Ok(ShapeFilter::Supported),
            "all" => Ok(ShapeFilter::All),
            other => Err(format!("unknown shape {:?} (expected mn, mn1, supported, all)", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub couple: String,
    pub degree: usize,
    pub pattern: String,
    pub order: String,
    pub verdict: Verdict,
    /// Present when the order has exactly two `P` letters.
    pub nu: Option<usize>,
    pub p1: Option<usize>,
    pub p2: Option<usize>,
}

impl Row {
    pub fn new(couple: &Couple, verdict: Verdict) -> Self {
        let positions = couple.order().positive_positions();
        let (p1, p2) = match positions.as_slice() {
            [a, b] => (Some(*a), Some(*b)),
            _ => (None, None),
        };
        Row {
            couple: couple.to_string(),
            degree: couple.degree(),
            pattern: couple.pattern().to_string(),
            order: couple.order().to_string(),
            verdict,
            nu: couple.order().nu().ok(),
            p1,
            p2,
        }
    }
}

/// All compatible couples of degree `d` whose pattern passes `filter`, decided.
/// Rows are ordered by pattern enumeration order, then order enumeration order.
pub fn enumerate(d: usize, filter: ShapeFilter, rules: RuleSet) -> Vec<Row> {
    all_patterns(d)
        .into_iter()
        .filter(|p| filter.accepts(p))
        .flat_map(|p| compatible_couples(&p))
        .map(|c| {
            let v = decide(&c, rules);
            Row::new(&c, v)
        })
        .collect()
}

/// Realizable orders of one pattern, in enumeration order.
pub fn realizable_orders(pattern: &SignPattern, rules: RuleSet) -> Vec<OrderWord> {
    compatible_couples(pattern)
        .into_iter()
        .filter(|c| decide(c, rules).is_realizable())
        .map(|c| c.order().clone())
        .collect()
}
