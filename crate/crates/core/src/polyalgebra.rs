//! Exact rational polynomial algebra over root configurations.
//!
//! Polynomials are monic and stored leading coefficient first, the same
//! orientation as sign patterns, so `coefficients()[k]` multiplies
//! `x^(d-k)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::patterns::{Couple, OrderWord, RootSign, Sign, SignPattern};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("cannot parse {0:?} as a rational number")]
    BadRational(String),
    #[error("root moduli must be positive, got {0}")]
    NonPositiveModulus(String),
    #[error("polynomial must be monic with at least one coefficient")]
    NotMonic,
    #[error("{root} is not a root: division leaves remainder {remainder}")]
    NotARoot { root: String, remainder: String },
}

/// Parses `"3"`, `"-7/4"`, `"1.01"` or `"-0.5"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, AlgebraError> {
    let bad = || AlgebraError::BadRational(s.to_string());
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if frac.is_empty() && int_digits.is_empty() {
            return Err(bad());
        }
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits = format!("{}{}", int_digits, frac);
        let mantissa: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        let value = Rational::new(mantissa, den);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Always `num/den`, e.g. `"21/10"`, `"1/1"`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Finite decimal expansion when the denominator is `2^a 5^b`, e.g. `"-2.949"`.
pub fn decimal_string(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scale = num_traits::pow(BigInt::from(10u32), places);
    let scaled = (r * Rational::from_integer(scale.clone())).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    if places == 0 {
        return Some(if negative { format!("-{}", digits) } else { digits });
    }
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    Some(format!("{}{}.{}", if negative { "-" } else { "" }, int, frac))
}

/// Decimal when finite, `num/den` otherwise.
pub fn display_rational(r: &Rational) -> String {
    decimal_string(r).unwrap_or_else(|| format_rational(r))
}

pub(crate) mod rational_vec {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect()
    }
}

/// `e_j(values)`; `e_0 = 1`, and `0` for `j < 0` or `j > values.len()`.
pub fn elementary_symmetric(values: &[Rational], j: isize) -> Rational {
    if j < 0 || j as usize > values.len() {
        return Rational::zero();
    }
    elementary_symmetric_all(values).swap_remove(j as usize)
}

/// `[e_0, e_1, ..., e_k]` by multiplying out `prod (1 + v t)` one factor at a time.
pub fn elementary_symmetric_all(values: &[Rational]) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); values.len() + 1];
    e[0] = Rational::one();
    for (k, v) in values.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let term = &e[j - 1] * v;
            e[j] += term;
        }
    }
    e
}

/// Signed roots `alpha_1 < ... ` and moduli of negative roots `gamma_1 < ...`.
/// Repeated entries are allowed and represent multiple roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootConfiguration {
    #[serde(rename = "alpha", with = "rational_vec")]
    positive: Vec<Rational>,
    #[serde(rename = "gamma", with = "rational_vec")]
    negative_moduli: Vec<Rational>,
}

impl RootConfiguration {
    pub fn new(
        mut positive: Vec<Rational>,
        mut negative_moduli: Vec<Rational>,
    ) -> Result<Self, AlgebraError> {
        if let Some(bad) = positive
            .iter()
            .chain(negative_moduli.iter())
            .find(|r| !r.is_positive())
        {
            return Err(AlgebraError::NonPositiveModulus(format_rational(bad)));
        }
        positive.sort();
        negative_moduli.sort();
        Ok(RootConfiguration {
            positive,
            negative_moduli,
        })
    }

    /// Convenience for decimal literals such as `["0.5", "1"]`.
    pub fn from_decimals(positive: &[&str], negative_moduli: &[&str]) -> Result<Self, AlgebraError> {
        let parse = |xs: &[&str]| xs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>();
        RootConfiguration::new(parse(positive)?, parse(negative_moduli)?)
    }

    pub fn positive(&self) -> &[Rational] {
        &self.positive
    }

    pub fn negative_moduli(&self) -> &[Rational] {
        &self.negative_moduli
    }

    pub fn degree(&self) -> usize {
        self.positive.len() + self.negative_moduli.len()
    }

    /// Signed roots: `alpha_i` and `-gamma_j`.
    pub fn roots(&self) -> Vec<Rational> {
        self.positive
            .iter()
            .cloned()
            .chain(self.negative_moduli.iter().map(|g| -g))
            .collect()
    }

    pub fn smallest_modulus(&self) -> Option<&Rational> {
        match (self.positive.first(), self.negative_moduli.first()) {
            (Some(a), Some(g)) => Some(a.min(g)),
            (a, g) => a.or(g),
        }
    }

    /// Adds a positive root.
    pub fn with_positive(&self, alpha: Rational) -> Result<Self, AlgebraError> {
        let mut positive = self.positive.clone();
        positive.push(alpha);
        RootConfiguration::new(positive, self.negative_moduli.clone())
    }

    /// Moduli that occur more than once (among all roots, either sign).
    pub fn tied_moduli(&self) -> Vec<Rational> {
        let mut all: Vec<&Rational> = self.positive.iter().chain(&self.negative_moduli).collect();
        all.sort();
        let mut ties: Vec<Rational> = all
            .windows(2)
            .filter(|w| w[0] == w[1])
            .map(|w| w[0].clone())
            .collect();
        ties.dedup();
        ties
    }

    /// The order word of the moduli, or `None` when two moduli coincide.
    pub fn order_word(&self) -> Option<OrderWord> {
        if !self.tied_moduli().is_empty() || self.degree() == 0 {
            return None;
        }
        let mut tagged: Vec<(&Rational, RootSign)> = self
            .positive
            .iter()
            .map(|a| (a, RootSign::Positive))
            .chain(self.negative_moduli.iter().map(|g| (g, RootSign::Negative)))
            .collect();
        tagged.sort_by(|a, b| a.0.cmp(b.0));
        OrderWord::new(tagged.into_iter().map(|(_, s)| s).collect()).ok()
    }
}

impl fmt::Display for RootConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.positive.iter().map(display_rational).collect();
        let g: Vec<String> = self.negative_moduli.iter().map(display_rational).collect();
        write!(f, "alpha=({}) gamma=({})", a.join(", "), g.join(", "))
    }
}

/// Monic polynomial with rational coefficients, leading coefficient first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    #[serde(with = "rational_vec")]
    coefficients: Vec<Rational>,
}

impl Polynomial {
    pub fn one() -> Self {
        Polynomial {
            coefficients: vec![Rational::one()],
        }
    }

    pub fn from_coefficients(coefficients: Vec<Rational>) -> Result<Self, AlgebraError> {
        match coefficients.first() {
            Some(lead) if lead.is_one() => Ok(Polynomial { coefficients }),
            _ => Err(AlgebraError::NotMonic),
        }
    }

    pub fn from_decimals(coefficients: &[&str]) -> Result<Self, AlgebraError> {
        let parsed = coefficients
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        Polynomial::from_coefficients(parsed)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Leading coefficient first.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// Coefficient of `x^power`.
    pub fn coefficient(&self, power: usize) -> Rational {
        let d = self.degree();
        if power > d {
            Rational::zero()
        } else {
            self.coefficients[d - power].clone()
        }
    }

    /// Multiplies in place by `(x - root)`.
    pub fn mul_linear(&mut self, root: &Rational) {
        self.coefficients.push(Rational::zero());
        for k in (1..self.coefficients.len()).rev() {
            let term = &self.coefficients[k - 1] * root;
            self.coefficients[k] -= term;
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![Rational::zero(); self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coefficients: out }
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        self.coefficients
            .iter()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Powers of `x` whose coefficient vanishes.
    pub fn zero_coefficients(&self) -> Vec<usize> {
        let d = self.degree();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_zero())
            .map(|(k, _)| d - k)
            .collect()
    }

    /// Sign pattern, or the powers with zero coefficient.
    pub fn sign_pattern(&self) -> Result<SignPattern, Vec<usize>> {
        let zeros = self.zero_coefficients();
        if !zeros.is_empty() || self.degree() == 0 {
            return Err(zeros);
        }
        let signs = self
            .coefficients
            .iter()
            .map(|c| if c.is_positive() { Sign::Plus } else { Sign::Minus })
            .collect();
        SignPattern::new(signs).map_err(|_| Vec::new())
    }

    /// Returns `Q1` with `self = (x + gamma) Q1`.
    pub fn deflate_negative_root(&self, gamma: &Rational) -> Result<Polynomial, AlgebraError> {
        self.deflate_root(&-gamma)
    }

    /// Returns `Q1` with `self = (x - root) Q1`.
    pub fn deflate_root(&self, root: &Rational) -> Result<Polynomial, AlgebraError> {
        let root = root.clone();
        let mut quotient = Vec::with_capacity(self.coefficients.len());
        let mut acc = Rational::zero();
        for c in &self.coefficients {
            acc = acc * &root + c;
            quotient.push(acc.clone());
        }
        let remainder = quotient.pop().unwrap_or_else(Rational::zero);
        if !remainder.is_zero() || quotient.is_empty() {
            return Err(AlgebraError::NotARoot {
                root: format_rational(&root),
                remainder: format_rational(&remainder),
            });
        }
        Ok(Polynomial {
            coefficients: quotient,
        })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut out = String::new();
        for (k, c) in self.coefficients.iter().enumerate() {
            let power = d - k;
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            let text = display_rational(&magnitude);
            let show_coef = !(magnitude.is_one() && power > 0);
            if show_coef {
                out.push_str(&text);
            }
            match power {
                0 => {}
                1 => out.push('x'),
                p => out.push_str(&format!("x^{}", p)),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Monic polynomial with the given roots (`alpha_i` and `-gamma_j`).
pub fn expand(roots: &RootConfiguration) -> Polynomial {
    let mut poly = Polynomial::one();
    for r in roots.roots() {
        poly.mul_linear(&r);
    }
    poly
}

/// Why a polynomial/configuration fails to be generic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize, Error)]
#[error("non-generic: zero coefficients at powers {zero_coefficients:?}, tied moduli {tied_moduli:?}")]
pub struct NonGeneric {
    /// Powers of `x` whose coefficient is zero.
    pub zero_coefficients: Vec<usize>,
    /// Moduli shared by two or more roots, as `num/den`.
    pub tied_moduli: Vec<String>,
    /// `(polynomial degree, number of roots)` when they disagree.
    pub degree_mismatch: Option<(usize, usize)>,
}

/// The couple realized by `poly = expand(roots)`, or a report of what is not generic.
pub fn classify(poly: &Polynomial, roots: &RootConfiguration) -> Result<Couple, NonGeneric> {
    let mut report = NonGeneric::default();
    if poly.degree() != roots.degree() {
        report.degree_mismatch = Some((poly.degree(), roots.degree()));
    }
    report.zero_coefficients = poly.zero_coefficients();
    report.tied_moduli = roots.tied_moduli().iter().map(format_rational).collect();
    if report != NonGeneric::default() {
        return Err(report);
    }
    let pattern = poly.sign_pattern().map_err(|zeros| NonGeneric {
        zero_coefficients: zeros,
        ..NonGeneric::default()
    })?;
    let order = roots.order_word().ok_or_else(NonGeneric::default)?;
    Couple::new(pattern, order).map_err(|_| NonGeneric::default())
}

/// `classify(expand(roots), roots)`.
pub fn classify_roots(roots: &RootConfiguration) -> Result<Couple, NonGeneric> {
    classify(&expand(roots), roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn qs(xs: &[&str]) -> Vec<Rational> {
        xs.iter().map(|s| q(s)).collect()
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(q("1.01"), Rational::new(101.into(), 100.into()));
        assert_eq!(q("-0.5"), Rational::new((-1).into(), 2.into()));
        assert_eq!(q("-7/4"), Rational::new((-7).into(), 4.into()));
        assert_eq!(q("12"), Rational::from_integer(12.into()));
        assert_eq!(q(".25"), Rational::new(1.into(), 4.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_rationals() {
        assert_eq!(format_rational(&q("2.1")), "21/10");
        assert_eq!(format_rational(&q("1")), "1/1");
        assert_eq!(decimal_string(&q("-2.949")).unwrap(), "-2.949");
        assert_eq!(decimal_string(&q("0.105101005")).unwrap(), "0.105101005");
        assert_eq!(decimal_string(&q("3")).unwrap(), "3");
        assert_eq!(decimal_string(&q("1/3")), None);
        assert_eq!(display_rational(&q("1/3")), "1/3");
    }

    #[test]
    fn elementary_symmetric_examples() {
        let v = qs(&["1", "2", "3"]);
        assert_eq!(elementary_symmetric(&v, 1), q("6"));
        assert_eq!(elementary_symmetric(&v, 2), q("11"));
        assert_eq!(elementary_symmetric(&v, 3), q("6"));
        assert_eq!(elementary_symmetric(&v, 0), q("1"));
        assert_eq!(elementary_symmetric(&v, -1), q("0"));
        assert_eq!(elementary_symmetric(&v, 4), q("0"));
        assert_eq!(elementary_symmetric(&qs(&["1", "1", "1", "1"]), 2), q("6"));
        assert_eq!(elementary_symmetric(&[], 0), q("1"));
    }

    #[test]
    fn expands_five_root_example() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let expected =
            Polynomial::from_decimals(&["1", "2.1", "-0.59", "-2.949", "-0.419", "0.858"]).unwrap();
        assert_eq!(expand(&roots), expected);
    }

    #[test]
    fn expands_quintuple_root_example() {
        let roots = RootConfiguration::from_decimals(
            &["0.1", "1"],
            &["1.01", "1.01", "1.01", "1.01", "1.01"],
        )
        .unwrap();
        let exact = Polynomial::from_decimals(&[
            "1",
            "3.95",
            "4.746",
            "-0.41309",
            "-5.11019095",
            "-3.6420110049",
            "-0.63580905011",
            "0.10510100501",
        ])
        .unwrap();
        let got = expand(&roots);
        assert_eq!(got, exact);
        // rounded to nine decimals
        let rounded = [
            "1", "3.95", "4.746", "-0.41309", "-5.11019095", "-3.642011005", "-0.63580905",
            "0.105101005",
        ];
        let tol = q("1/100000000");
        for (c, p) in got.coefficients().iter().zip(rounded) {
            assert!((c - q(p)).abs() < tol, "{} vs {}", display_rational(c), p);
        }
    }

    #[test]
    fn expands_single_root() {
        let roots = RootConfiguration::from_decimals(&["1"], &[]).unwrap();
        assert_eq!(expand(&roots), Polynomial::from_decimals(&["1", "-1"]).unwrap());
        assert_eq!(expand(&roots).to_string(), "x - 1");
    }

    #[test]
    fn classify_examples() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let c = classify_roots(&roots).unwrap();
        assert_eq!(c.to_string(), "S(2,3,1)/PPNNN");

        let roots = RootConfiguration::from_decimals(&["1"], &["2"]).unwrap();
        let poly = expand(&roots);
        assert_eq!(poly, Polynomial::from_decimals(&["1", "1", "-2"]).unwrap());
        let c = classify(&poly, &roots).unwrap();
        assert_eq!(c.pattern().sign_string(), "++-");
        assert_eq!(c.order().to_string(), "PN");

        let roots = RootConfiguration::from_decimals(&["1", "1"], &[]).unwrap();
        let err = classify_roots(&roots).unwrap_err();
        assert_eq!(err.tied_moduli, vec!["1/1".to_string()]);

        // (x-1)(x+1) = x^2 - 1: zero x coefficient and tied moduli
        let roots = RootConfiguration::from_decimals(&["1"], &["1"]).unwrap();
        let err = classify_roots(&roots).unwrap_err();
        assert_eq!(err.zero_coefficients, vec![1]);
        assert_eq!(err.tied_moduli.len(), 1);

        // distinct moduli but a vanishing coefficient: (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let roots = RootConfiguration::from_decimals(&["1", "2"], &["3"]).unwrap();
        let err = classify_roots(&roots).unwrap_err();
        assert_eq!(err.zero_coefficients, vec![2]);
        assert!(err.tied_moduli.is_empty());
    }

    #[test]
    fn deflation() {
        let poly = Polynomial::from_decimals(&["1", "1", "-2"]).unwrap();
        let q1 = poly.deflate_negative_root(&q("2")).unwrap();
        assert_eq!(q1, Polynomial::from_decimals(&["1", "-1"]).unwrap());
        assert!(matches!(
            poly.deflate_negative_root(&q("3")),
            Err(AlgebraError::NotARoot { .. })
        ));

        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1", "1.2", "1.3"]).unwrap();
        let poly = expand(&roots);
        let q1 = poly.deflate_negative_root(&q("1.1")).unwrap();
        assert_eq!(q1.degree(), 4);
        let mut back = q1.clone();
        back.mul_linear(&q("-1.1"));
        assert_eq!(back, poly);
    }

    #[test]
    fn root_configuration_rejects_non_positive() {
        assert!(RootConfiguration::from_decimals(&["0"], &[]).is_err());
        assert!(RootConfiguration::from_decimals(&[], &["-1"]).is_err());
    }

    #[test]
    fn json_shapes() {
        let roots = RootConfiguration::from_decimals(&["0.5", "1"], &["1.1"]).unwrap();
        let json = serde_json::to_string(&roots).unwrap();
        assert_eq!(json, r#"{"alpha":["1/2","1/1"],"gamma":["11/10"]}"#);
        let back: RootConfiguration = serde_json::from_str(&json).unwrap();
        assert_eq!(back, roots);
        let poly = expand(&roots);
        let json = serde_json::to_string(&poly).unwrap();
        let back: Polynomial = serde_json::from_str(&json).unwrap();
        assert_eq!(back, poly);
        // decimal inputs are accepted on the way in
        let parsed: RootConfiguration =
            serde_json::from_str(r#"{"alpha":["0.5"],"gamma":["1.01","3"]}"#).unwrap();
        assert_eq!(parsed.negative_moduli()[0], q("101/100"));
    }
}
