//! Sign patterns, change-preservation patterns, orders of root moduli and
//! the couples formed from them.
//!
//! A [`SignPattern`] is the sequence of coefficient signs of a monic
//! polynomial, leading coefficient first. Its change-preservation form and
//! its block form `S(i1,...,is)` are derived views. An [`OrderWord`] lists,
//! in increasing modulus, whether each root is positive (`P`) or negative
//! (`N`). A [`Couple`] pairs a pattern with a compatible order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("empty input")]
    Empty,
    #[error("a sign pattern needs at least two signs, got {0}")]
    TooShort(usize),
    #[error("a sign pattern of a monic polynomial must start with '+'")]
    LeadingMinus,
    #[error("unexpected character {found:?} at position {position} (expected {expected})")]
    UnexpectedChar {
        position: usize,
        found: char,
        expected: &'static str,
    },
    #[error("malformed block notation at position {position}: {reason}")]
    BadBlocks { position: usize, reason: &'static str },
    #[error("pattern has degree {pattern} but order has length {order}")]
    LengthMismatch { pattern: usize, order: usize },
    #[error("pattern has {changes} sign changes but order has {positives} positive roots")]
    Incompatible { changes: usize, positives: usize },
    #[error("order must contain exactly two positive roots, found {0}")]
    NotTwoPositive(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Letter of a change-preservation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CpLetter {
    Change,
    Preservation,
}

impl CpLetter {
    pub fn flip(self) -> CpLetter {
        match self {
            CpLetter::Change => CpLetter::Preservation,
            CpLetter::Preservation => CpLetter::Change,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            CpLetter::Change => 'c',
            CpLetter::Preservation => 'p',
        }
    }
}

/// Letter of an order word: the modulus belongs to a positive or a negative root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootSign {
    Positive,
    Negative,
}

impl RootSign {
    pub fn flip(self) -> RootSign {
        match self {
            RootSign::Positive => RootSign::Negative,
            RootSign::Negative => RootSign::Positive,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            RootSign::Positive => 'P',
            RootSign::Negative => 'N',
        }
    }
}

/// Coefficient signs of a monic polynomial, leading coefficient first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern {
    signs: Vec<Sign>,
}

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Result<Self, PatternError> {
        if signs.len() < 2 {
            return Err(PatternError::TooShort(signs.len()));
        }
        if signs[0] != Sign::Plus {
            return Err(PatternError::LeadingMinus);
        }
        Ok(SignPattern { signs })
    }

    /// Builds `S(i1,...,is)`: `i1` pluses, then `i2` minuses, and so on.
    pub fn from_blocks(blocks: &[usize]) -> Result<Self, PatternError> {
        if blocks.is_empty() {
            return Err(PatternError::Empty);
        }
        if blocks.contains(&0) {
            return Err(PatternError::BadBlocks {
                position: 1,
                reason: "block lengths must be positive",
            });
        }
        let mut signs = Vec::with_capacity(blocks.iter().sum());
        let mut sign = Sign::Plus;
        for &len in blocks {
            signs.extend(std::iter::repeat_n(sign, len));
            sign = sign.flip();
        }
        SignPattern::new(signs)
    }

    /// The pattern whose change-preservation form is `cp`.
    pub fn from_cp(cp: &ChangePreservationPattern) -> Self {
        let mut signs = Vec::with_capacity(cp.len() + 1);
        let mut sign = Sign::Plus;
        signs.push(sign);
        for letter in cp.letters() {
            if *letter == CpLetter::Change {
                sign = sign.flip();
            }
            signs.push(sign);
        }
        SignPattern { signs }
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn degree(&self) -> usize {
        self.signs.len() - 1
    }

    /// Lengths of the maximal runs of equal signs.
    pub fn blocks(&self) -> Vec<usize> {
        let mut blocks = Vec::new();
        let mut run = 1;
        for pair in self.signs.windows(2) {
            if pair[0] == pair[1] {
                run += 1;
            } else {
                blocks.push(run);
                run = 1;
            }
        }
        blocks.push(run);
        blocks
    }

    pub fn sign_changes(&self) -> usize {
        self.signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn sign_preservations(&self) -> usize {
        self.degree() - self.sign_changes()
    }

    pub fn to_cp(&self) -> ChangePreservationPattern {
        let letters = self
            .signs
            .windows(2)
            .map(|w| {
                if w[0] != w[1] {
                    CpLetter::Change
                } else {
                    CpLetter::Preservation
                }
            })
            .collect();
        ChangePreservationPattern { letters }
    }

    /// Reads the change-preservation pattern from the right, `c -> P`, `p -> N`.
    pub fn canonical_order(&self) -> OrderWord {
        let letters = self
            .to_cp()
            .letters
            .iter()
            .rev()
            .map(|l| match l {
                CpLetter::Change => RootSign::Positive,
                CpLetter::Preservation => RootSign::Negative,
            })
            .collect();
        OrderWord { letters }
    }

    /// True iff no window of four consecutive signs reads `++--`, `--++`,
    /// `+--+` or `-++-`.
    pub fn is_canonical(&self) -> bool {
        use Sign::{Minus as M, Plus as P};
        const FORBIDDEN: [[Sign; 4]; 4] = [[P, P, M, M], [M, M, P, P], [P, M, M, P], [M, P, P, M]];
        !self
            .signs
            .windows(4)
            .any(|w| FORBIDDEN.iter().any(|f| f[..] == *w))
    }

    /// Raw form, e.g. `++---+`.
    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|s| s.as_char()).collect()
    }

    /// `(m, n)` when the pattern is `S(m,n)`.
    pub fn one_change_shape(&self) -> Option<(usize, usize)> {
        match self.blocks()[..] {
            [m, n] => Some((m, n)),
            _ => None,
        }
    }

    /// `(m, n)` when the pattern is `S(m,n,1)`.
    pub fn two_change_shape(&self) -> Option<(usize, usize)> {
        match self.blocks()[..] {
            [m, n, 1] => Some((m, n)),
            _ => None,
        }
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self.blocks().iter().map(|b| b.to_string()).collect();
        write!(f, "S({})", blocks.join(","))
    }
}

impl FromStr for SignPattern {
    type Err = PatternError;

    /// Accepts raw signs (`++---+`) or block notation (`S(2,3,1)`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(PatternError::Empty);
        }
        if s.starts_with('S') {
            return parse_blocks(s);
        }
        let signs = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                _ => Err(PatternError::UnexpectedChar {
                    position: i + 1,
                    found: c,
                    expected: "'+' or '-'",
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SignPattern::new(signs)
    }
}

fn parse_blocks(s: &str) -> Result<SignPattern, PatternError> {
    let chars: Vec<char> = s.chars().collect();
    let expect = |pos: usize, want: char, expected: &'static str| -> Result<(), PatternError> {
        match chars.get(pos) {
            Some(&c) if c == want => Ok(()),
            Some(&c) => Err(PatternError::UnexpectedChar {
                position: pos + 1,
                found: c,
                expected,
            }),
            None => Err(PatternError::BadBlocks {
                position: pos + 1,
                reason: "unexpected end of input",
            }),
        }
    };
    expect(0, 'S', "'S'")?;
    expect(1, '(', "'('")?;
    let mut blocks = Vec::new();
    let mut pos = 2;
    loop {
        let start = pos;
        while pos < chars.len() && chars[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return match chars.get(pos) {
                Some(&c) => Err(PatternError::UnexpectedChar {
                    position: pos + 1,
                    found: c,
                    expected: "a digit",
                }),
                None => Err(PatternError::BadBlocks {
                    position: pos + 1,
                    reason: "unexpected end of input",
                }),
            };
        }
        let digits: String = chars[start..pos].iter().collect();
        let value: usize = digits.parse().map_err(|_| PatternError::BadBlocks {
            position: start + 1,
            reason: "block length out of range",
        })?;
        if value == 0 {
            return Err(PatternError::BadBlocks {
                position: start + 1,
                reason: "block lengths must be positive",
            });
        }
        blocks.push(value);
        match chars.get(pos) {
            Some(',') => pos += 1,
            Some(')') => {
                pos += 1;
                break;
            }
            Some(&c) => {
                return Err(PatternError::UnexpectedChar {
                    position: pos + 1,
                    found: c,
                    expected: "',' or ')'",
                })
            }
            None => {
                return Err(PatternError::BadBlocks {
                    position: pos + 1,
                    reason: "missing ')'",
                })
            }
        }
    }
    if let Some(&c) = chars.get(pos) {
        return Err(PatternError::UnexpectedChar {
            position: pos + 1,
            found: c,
            expected: "end of input",
        });
    }
    SignPattern::from_blocks(&blocks)
}

/// Word over `{c, p}` of length `d`: letter `j` is `c` iff the `j`-th and
/// `(j+1)`-th coefficients (from the leading one) differ in sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChangePreservationPattern {
    letters: Vec<CpLetter>,
}

impl ChangePreservationPattern {
    pub fn new(letters: Vec<CpLetter>) -> Result<Self, PatternError> {
        if letters.is_empty() {
            return Err(PatternError::Empty);
        }
        Ok(ChangePreservationPattern { letters })
    }

    pub fn letters(&self) -> &[CpLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn changes(&self) -> usize {
        self.letters.iter().filter(|&&l| l == CpLetter::Change).count()
    }

    pub fn preservations(&self) -> usize {
        self.len() - self.changes()
    }

    pub fn flipped(&self) -> Self {
        ChangePreservationPattern {
            letters: self.letters.iter().map(|l| l.flip()).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        ChangePreservationPattern {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    /// An interior letter whose two neighbours are both of the other kind.
    pub fn has_isolated_letter(&self) -> bool {
        self.letters
            .windows(3)
            .any(|w| w[0] == w[2] && w[0] != w[1])
    }

    pub fn to_signs(&self) -> SignPattern {
        SignPattern::from_cp(self)
    }
}

impl fmt::Display for ChangePreservationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|l| l.as_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for ChangePreservationPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                'c' => Ok(CpLetter::Change),
                'p' => Ok(CpLetter::Preservation),
                _ => Err(PatternError::UnexpectedChar {
                    position: i + 1,
                    found: c,
                    expected: "'c' or 'p'",
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        ChangePreservationPattern::new(letters)
    }
}

/// Positions of positive and negative roots along the positive half-axis,
/// in increasing order of modulus. Moduli are assumed pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderWord {
    letters: Vec<RootSign>,
}

impl OrderWord {
    pub fn new(letters: Vec<RootSign>) -> Result<Self, PatternError> {
        if letters.is_empty() {
            return Err(PatternError::Empty);
        }
        Ok(OrderWord { letters })
    }

    /// Word of length `len` with `P` exactly at the given 1-based positions.
    pub fn with_positives(len: usize, positions: &[usize]) -> Result<Self, PatternError> {
        let mut letters = vec![RootSign::Negative; len];
        for &p in positions {
            if p == 0 || p > len {
                return Err(PatternError::LengthMismatch {
                    pattern: len,
                    order: p,
                });
            }
            letters[p - 1] = RootSign::Positive;
        }
        OrderWord::new(letters)
    }

    pub fn letters(&self) -> &[RootSign] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.letters
            .iter()
            .filter(|&&l| l == RootSign::Positive)
            .count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// 1-based positions of the `P` letters.
    pub fn positive_positions(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == RootSign::Positive)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Number of negative-root moduli below the second positive root.
    pub fn nu(&self) -> Result<usize, PatternError> {
        match self.positive_positions()[..] {
            [_, p2] => Ok(p2 - 2),
            _ => Err(PatternError::NotTwoPositive(self.positives())),
        }
    }

    /// All roots of one sign, or strictly alternating signs.
    pub fn is_rigid(&self) -> bool {
        let trivial = self.positives() == 0 || self.negatives() == 0;
        trivial || self.letters.windows(2).all(|w| w[0] != w[1])
    }

    pub fn swapped(&self) -> Self {
        OrderWord {
            letters: self.letters.iter().map(|l| l.flip()).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        OrderWord {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    /// `N P P N ... N` of length `len`.
    pub fn exceptional_npp(len: usize) -> Option<Self> {
        if len < 3 {
            return None;
        }
        OrderWord::with_positives(len, &[2, 3]).ok()
    }
}

impl fmt::Display for OrderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.letters.iter().map(|l| l.as_char()).collect();
        f.write_str(&s)
    }
}

impl FromStr for OrderWord {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                'P' => Ok(RootSign::Positive),
                'N' => Ok(RootSign::Negative),
                _ => Err(PatternError::UnexpectedChar {
                    position: i + 1,
                    found: c,
                    expected: "'P' or 'N'",
                }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        OrderWord::new(letters)
    }
}

/// A compatible (sign pattern, order) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Couple {
    pattern: SignPattern,
    order: OrderWord,
}

impl Couple {
    pub fn new(pattern: SignPattern, order: OrderWord) -> Result<Self, PatternError> {
        if pattern.degree() != order.len() {
            return Err(PatternError::LengthMismatch {
                pattern: pattern.degree(),
                order: order.len(),
            });
        }
        if pattern.sign_changes() != order.positives() {
            return Err(PatternError::Incompatible {
                changes: pattern.sign_changes(),
                positives: order.positives(),
            });
        }
        Ok(Couple { pattern, order })
    }

    /// Parses `pattern/order`, e.g. `S(2,3,1)/PPNNN` or `++---+/PPNNN`.
    pub fn parse(pattern: &str, order: &str) -> Result<Self, PatternError> {
        Couple::new(pattern.parse()?, order.parse()?)
    }

    pub fn pattern(&self) -> &SignPattern {
        &self.pattern
    }

    pub fn order(&self) -> &OrderWord {
        &self.order
    }

    pub fn degree(&self) -> usize {
        self.order.len()
    }

    /// The action of `Q(x) -> (-1)^d Q(-x)`: swaps `c`/`p` and `P`/`N`.
    pub fn mirror(&self) -> Couple {
        Couple {
            pattern: self.pattern.to_cp().flipped().to_signs(),
            order: self.order.swapped(),
        }
    }

    /// The action of `Q(x) -> x^d Q(1/x) / Q(0)`: reads both words from the right.
    pub fn reverse(&self) -> Couple {
        Couple {
            pattern: self.pattern.to_cp().reversed().to_signs(),
            order: self.order.reversed(),
        }
    }

    /// Orbit under the group generated by [`Couple::mirror`] and [`Couple::reverse`].
    pub fn orbit(&self) -> BTreeSet<Couple> {
        let reversed = self.reverse();
        [
            self.clone(),
            self.mirror(),
            reversed.mirror(),
            reversed,
        ]
        .into_iter()
        .collect()
    }

    pub fn is_canonical_order(&self) -> bool {
        self.pattern.canonical_order() == self.order
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pattern, self.order)
    }
}

impl FromStr for Couple {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.rfind('/') {
            Some(i) => Couple::parse(&s[..i], &s[i + 1..]),
            None => Err(PatternError::BadBlocks {
                position: s.chars().count() + 1,
                reason: "expected 'pattern/order'",
            }),
        }
    }
}

/// All sign patterns of degree `d` (monic, so `2^d` of them), in
/// lexicographic order of their change-preservation words.
pub fn all_patterns(d: usize) -> Vec<SignPattern> {
    (0..1usize << d)
        .map(|bits| {
            let letters = (0..d)
                .map(|i| {
                    if bits >> (d - 1 - i) & 1 == 1 {
                        CpLetter::Preservation
                    } else {
                        CpLetter::Change
                    }
                })
                .collect();
            SignPattern::from_cp(&ChangePreservationPattern { letters })
        })
        .collect()
}

/// All orders of length `len` with exactly `positives` letters `P`, in
/// lexicographic order of the `P` positions.
pub fn orders_with_positives(len: usize, positives: usize) -> Vec<OrderWord> {
    let mut out = Vec::new();
    let mut positions: Vec<usize> = (1..=positives).collect();
    if positives > len {
        return out;
    }
    loop {
        out.push(OrderWord::with_positives(len, &positions).expect("positions in range"));
        // next combination
        let mut i = positives;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if positions[i] < len - (positives - 1 - i) {
                positions[i] += 1;
                for j in i + 1..positives {
                    positions[j] = positions[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Every couple compatible with `pattern`.
pub fn compatible_couples(pattern: &SignPattern) -> Vec<Couple> {
    orders_with_positives(pattern.degree(), pattern.sign_changes())
        .into_iter()
        .map(|order| Couple {
            pattern: pattern.clone(),
            order,
        })
        .collect()
}

macro_rules! serde_as_text {
    ($($ty:ty),*) => {$(
        impl serde::Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> serde::Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = <String as serde::Deserialize>::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

serde_as_text!(SignPattern, ChangePreservationPattern, OrderWord, Couple);
