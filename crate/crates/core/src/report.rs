//! Markdown reproduction report. Output depends only on [`ReportOptions`].

use std::fmt::Write;

use crate::certificates::{sample_region, LemmaId};
use crate::decision::{decide, realizable_orders, RuleSet};
use crate::patterns::{all_patterns, compatible_couples, SignPattern};
use crate::polyalgebra::{display_rational, expand, Polynomial, Rational, RootConfiguration};
use crate::witness::{search, SearchBudget};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportOptions {
    pub seed: u64,
    pub rules: RuleSet,
    pub budget: SearchBudget,
    pub max_degree: usize,
    /// Samples per lemma region in the certificate summary.
    pub certificate_samples: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            seed: 0,
            rules: RuleSet::Revised,
            budget: SearchBudget::default(),
            max_degree: 8,
            certificate_samples: 2_000,
        }
    }
}

/// Regions sampled for each lemma.
pub fn certificate_regions() -> Vec<(LemmaId, usize)> {
    let mut out = Vec::new();
    out.extend((2..=6).map(|n| (LemmaId::One, n)));
    out.extend((5..=8).map(|n| (LemmaId::Six, n)));
    out.extend((4..=8).map(|n| (LemmaId::Seven, n)));
    out.push((LemmaId::Eight, 5));
    out
}

/// Patterns whose realizable orders are listed in the gallery.
const GALLERY: [&str; 4] = ["S(1,2,1)", "S(2,3,1)", "S(2,4,1)", "S(3,4,1)"];

fn coefficient_line(p: &Polynomial) -> String {
    p.coefficients()
        .iter()
        .map(|c| format!("`{}`", display_rational(c)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn roots_of(positive: &[&str], negative: &[&str]) -> RootConfiguration {
    RootConfiguration::from_decimals(positive, negative).expect("constant roots")
}

fn shape_tables(out: &mut String, opts: &ReportOptions, two_change: bool) {
    writeln!(out, "| pattern | realizable | compatible | realizable orders |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for d in 1..=opts.max_degree {
        for p in all_patterns(d) {
            let shaped = if two_change {
                p.two_change_shape().is_some()
            } else {
                p.one_change_shape().is_some()
            };
            if !shaped {
                continue;
            }
            let total = compatible_couples(&p).len();
            let orders: Vec<String> = realizable_orders(&p, opts.rules)
                .iter()
                .map(|o| o.to_string())
                .collect();
            writeln!(
                out,
                "| {} | {} | {} | {} |",
                p,
                orders.len(),
                total,
                orders.join(" ")
            )
            .unwrap();
        }
    }
}

fn rule_differences(out: &mut String, opts: &ReportOptions) {
    let mut rows = Vec::new();
    for d in 1..=opts.max_degree {
        for p in all_patterns(d) {
            if p.one_change_shape().is_none() && p.two_change_shape().is_none() {
                continue;
            }
            for c in compatible_couples(&p) {
                let revised = decide(&c, RuleSet::Revised);
                let literal = decide(&c, RuleSet::Literal);
                if revised.status != literal.status {
                    rows.push((c, revised, literal));
                }
            }
        }
    }
    writeln!(out, "{} couples decided differently by the two rule sets.", rows.len()).unwrap();
    writeln!(out).unwrap();
    if rows.is_empty() {
        return;
    }
    writeln!(out, "| couple | revised | literal | clause |").unwrap();
    writeln!(out, "|---|---|---|---|").unwrap();
    for (c, revised, literal) in rows {
        let clause = revised
            .clause
            .map(|k| k.tag())
            .unwrap_or_else(|| "-".to_string());
        writeln!(out, "| {} | {} | {} | {} |", c, revised.status, literal.status, clause).unwrap();
    }
}

fn gallery(out: &mut String, opts: &ReportOptions) {
    let budget = opts.budget.clone().with_seed(opts.seed);
    writeln!(out, "| couple | strategy | trials | positive roots | negative moduli | verified |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|").unwrap();
    for text in GALLERY {
        let pattern: SignPattern = text.parse().expect("constant pattern");
        for order in realizable_orders(&pattern, opts.rules) {
            let couple = crate::patterns::Couple::new(pattern.clone(), order).expect("compatible");
            let report = search(&couple, &budget, None);
            match report.witness() {
                Some(w) => {
                    let list = |v: &[Rational]| v.iter().map(display_rational).collect::<Vec<_>>().join(", ");
                    writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} |",
                        couple,
                        w.strategy,
                        report.trials,
                        list(w.roots.positive()),
                        list(w.roots.negative_moduli()),
                        w.verified
                    )
                    .unwrap();
                }
                None => {
                    writeln!(out, "| {} | exhausted | {} | - | - | false |", couple, report.trials).unwrap();
                }
            }
        }
    }
}

fn certificates(out: &mut String, opts: &ReportOptions) {
    writeln!(
        out,
        "{} exact samples per region, seed {}.",
        opts.certificate_samples, opts.seed
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(out, "| lemma | n | violations | boundary violations | extremal margin | failed checks |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|").unwrap();
    for (lemma, n) in certificate_regions() {
        let r = sample_region(lemma, n, opts.certificate_samples, opts.seed).expect("valid region");
        let failed: Vec<String> = r
            .checks
            .iter()
            .filter(|(_, c)| c.failed > 0)
            .map(|(k, c)| format!("{}: {}", k, c.failed))
            .collect();
        writeln!(
            out,
            "| {} | {} | {} | {}/{} | `{}` | {} |",
            lemma,
            r.n,
            r.violations,
            r.boundary_violations,
            r.boundary_samples,
            r.extremal_margin,
            if failed.is_empty() { "none".to_string() } else { failed.join("; ") }
        )
        .unwrap();
    }
}

/// Renders the full report.
pub fn render(opts: &ReportOptions) -> String {
    let mut out = String::new();
    writeln!(out, "# Sign patterns and root orders: reproduction report").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "schema_version {}, seed {}, rules {}, max degree {}, search budget {} trials.",
        REPORT_SCHEMA_VERSION, opts.seed, opts.rules, opts.max_degree, opts.budget.max_trials
    )
    .unwrap();
    writeln!(out).unwrap();

    writeln!(out, "## Example polynomials").unwrap();
    writeln!(out).unwrap();
    let small = roots_of(&["0.5", "1"], &["1.1", "1.2", "1.3"]);
    writeln!(out, "Roots 0.5, 1, -1.1, -1.2, -1.3 give coefficients {}.", coefficient_line(&expand(&small))).unwrap();
    writeln!(out).unwrap();
    let tied = roots_of(&["0.1", "1"], &["1.01"; 5]);
    writeln!(
        out,
        "Roots 0.1, 1 and -1.01 (multiplicity 5) give coefficients {}.",
        coefficient_line(&expand(&tied))
    )
    .unwrap();
    writeln!(out).unwrap();

    writeln!(out, "## Two sign changes").unwrap();
    writeln!(out).unwrap();
    shape_tables(&mut out, opts, true);
    writeln!(out).unwrap();

    writeln!(out, "## One sign change").unwrap();
    writeln!(out).unwrap();
    shape_tables(&mut out, opts, false);
    writeln!(out).unwrap();

    writeln!(out, "## Revised and literal rules").unwrap();
    writeln!(out).unwrap();
    rule_differences(&mut out, opts);
    writeln!(out).unwrap();

    writeln!(out, "## Witness gallery").unwrap();
    writeln!(out).unwrap();
    gallery(&mut out, opts);
    writeln!(out).unwrap();

    writeln!(out, "## Certificates").unwrap();
    writeln!(out).unwrap();
    certificates(&mut out, opts);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReportOptions {
        ReportOptions {
            max_degree: 5,
            certificate_samples: 20,
            ..ReportOptions::default()
        }
    }

    #[test]
    fn lists_small_patterns() {
        let text = render(&small());
        assert!(text.contains("| S(1,2,1) | 3 | 3 |"));
        assert!(text.contains("| S(2,3,1) | 5 | 10 |"));
        assert!(text.contains("-0.63580905011"));
        assert_eq!(text, render(&small()));
    }
}
