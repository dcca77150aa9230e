//! `hsigns`: decide, search, verify and certify realizability of sign patterns
//! with root orders.
//!
//! Exit status: 0 on success, 1 when the input is rejected on domain
//! grounds (bad pattern, incompatible couple, failed verification),
//! 2 on internal errors.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use config::RunConfig;
use hyperbolic_signs::certificates::{sample_region, CertificateReport, LemmaId};
use hyperbolic_signs::decision::{decide, enumerate, Row, ShapeFilter, Verdict};
use hyperbolic_signs::patterns::Couple;
use hyperbolic_signs::polyalgebra::{display_rational, parse_rational, RootConfiguration};
use hyperbolic_signs::report::{render, ReportOptions};
use hyperbolic_signs::witness::{search, verify, Archive, SearchReport, Strategy, WitnessRecord};

/// Version stamped on every JSON document this tool prints.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "hsigns", version, about = "Realizability of sign patterns by hyperbolic polynomials")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Random seed (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum witness-search trials.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Witness archive (JSON).
    #[arg(long, global = true, env = "HSIGNS_ARCHIVE")]
    archive: Option<PathBuf>,
    /// File of key=value defaults, overridden by flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `revised` (default) or `literal`.
    #[arg(long, global = true)]
    rules: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide one couple.
    Decide {
        /// Raw signs (`++---+`) or blocks (`S(2,3,1)`).
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        order: String,
    },
    /// Search for an exact witness.
    Witness {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        order: String,
        /// Store a found witness in the archive.
        #[arg(long)]
        save: bool,
    },
    /// Decide every compatible couple of one degree.
    Enumerate {
        #[arg(long)]
        degree: usize,
        /// mn, mn1, supported or all.
        #[arg(long, default_value = "supported")]
        shape: String,
    },
    /// Check a witness exactly.
    Verify {
        /// Witness record or witness search report (JSON).
        #[arg(long, conflicts_with_all = ["pattern", "order"])]
        file: Option<PathBuf>,
        #[arg(long, requires = "order")]
        pattern: Option<String>,
        #[arg(long, requires = "pattern")]
        order: Option<String>,
        /// Positive roots, comma separated.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<String>,
        /// Moduli of the negative roots, comma separated.
        #[arg(long, value_delimiter = ',')]
        gamma: Vec<String>,
    },
    /// Sample a lemma region with exact arithmetic.
    Certify {
        /// 1, 6, 7 or 8.
        #[arg(long)]
        lemma: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        count: u64,
    },
    /// Print the markdown reproduction report.
    Report {
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        /// Samples per certificate region.
        #[arg(long)]
        samples: Option<u64>,
        /// Write to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Domain(anyhow::Error),
    Internal(anyhow::Error),
}

trait Classify<T> {
    fn domain(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn domain(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Domain(e.into()))
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

/// What a command produced: a document for stdout, plus whether the
/// result itself is a domain rejection (e.g. a witness that fails to verify).
struct Output {
    text: String,
    rejected: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, rejected: false }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path).domain()?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(budget) = cli.budget {
        config.budget.max_trials = budget;
    }
    if let Some(rules) = &cli.rules {
        config.rules = rules.parse().map_err(|e: String| Failure::Domain(anyhow!(e)))?;
    }
    if let Some(archive) = &cli.archive {
        config.archive = Some(archive.clone());
    }
    config.budget.seed = config.seed;
    config.budget.validate().domain()?;
    Ok(config)
}

fn json_doc<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut v = serde_json::to_value(value).internal()?;
    if let Value::Object(map) = &mut v {
        map.insert("schema_version".into(), json!(OUTPUT_SCHEMA_VERSION));
    }
    let mut text = serde_json::to_string_pretty(&v).internal()?;
    text.push('\n');
    Ok(text)
}

fn unsupported(format: Format, command: &str) -> Failure {
    Failure::Domain(anyhow!("{:?} output is not available for {}", format, command).context("format"))
}

fn load_archive(config: &RunConfig) -> Result<Option<Archive>, Failure> {
    config
        .archive
        .as_ref()
        .map(|p| Archive::load(p).with_context(|| format!("loading {}", p.display())))
        .transpose()
        .internal()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    degree: usize,
    pattern: &'a str,
    order: &'a str,
    status: String,
    clause: String,
    nu: Option<usize>,
    p1: Option<usize>,
    p2: Option<usize>,
    witness_ref: String,
}

fn csv_table(rows: &[Row], archive: Option<&Archive>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(CsvRow {
            degree: row.degree,
            pattern: &row.pattern,
            order: &row.order,
            status: row.verdict.status.to_string(),
            clause: row.verdict.clause.map(|c| c.tag()).unwrap_or_default(),
            nu: row.nu,
            p1: row.p1,
            p2: row.p2,
            witness_ref: witness_ref(&row.couple, archive),
        })
        .internal()?;
    }
    String::from_utf8(w.into_inner().map_err(|e| anyhow!(e.to_string())).internal()?).internal()
}

fn witness_ref(couple: &str, archive: Option<&Archive>) -> String {
    archive
        .filter(|a| a.witnesses.contains_key(couple))
        .map(|_| couple.to_string())
        .unwrap_or_default()
}

fn verdict_text(couple: &Couple, v: &Verdict) -> String {
    let mut line = format!("{} {}", couple, v.status);
    if let Some(c) = v.clause {
        line.push_str(&format!(" {}", c.tag()));
    }
    if let Some(r) = &v.reduction {
        line.push_str(&format!(" via {} -> {}", r.map, r.couple));
    }
    if let Some(a) = &v.amendment {
        line.push_str(&format!(" [{}]", a));
    }
    line.push('\n');
    line
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let config = build_config(&cli)?;
    match &cli.command {
        Command::Decide { pattern, order } => {
            let couple = Couple::parse(pattern, order).domain()?;
            let verdict = decide(&couple, config.rules);
            let text = match cli.format {
                Format::Json => {
                    let mut v = serde_json::to_value(&verdict).internal()?;
                    v["couple"] = json!(couple.to_string());
                    json_doc(&v)?
                }
                Format::Csv => csv_table(&[Row::new(&couple, verdict)], load_archive(&config)?.as_ref())?,
                Format::Text => verdict_text(&couple, &verdict),
            };
            Ok(Output::ok(text))
        }
        Command::Witness { pattern, order, save } => {
            let couple = Couple::parse(pattern, order).domain()?;
            let mut archive = load_archive(&config)?;
            let report = search(&couple, &config.budget, archive.as_ref());
            if *save {
                let (Some(a), Some(path)) = (archive.as_mut(), config.archive.as_ref()) else {
                    return Err(Failure::Domain(anyhow!("--save needs --archive or HSIGNS_ARCHIVE")));
                };
                if let Some(w) = report.witness() {
                    if a.insert(w.clone()) {
                        a.save(path).internal()?;
                    }
                }
            }
            let text = match cli.format {
                Format::Json => json_doc(&report)?,
                Format::Text => search_text(&report),
                Format::Csv => return Err(unsupported(cli.format, "witness")),
            };
            Ok(Output::ok(text))
        }
        Command::Enumerate { degree, shape } => {
            let filter: ShapeFilter = shape.parse().map_err(|e: String| Failure::Domain(anyhow!(e)))?;
            if *degree < 2 {
                return Err(Failure::Domain(anyhow!("degree must be at least 2")));
            }
            let rows = enumerate(*degree, filter, config.rules);
            let archive = load_archive(&config)?;
            let text = match cli.format {
                Format::Csv => csv_table(&rows, archive.as_ref())?,
                Format::Json => {
                    let rows: Vec<Value> = rows
                        .iter()
                        .map(|r| {
                            let mut v = serde_json::to_value(r)?;
                            v["witness_ref"] = json!(witness_ref(&r.couple, archive.as_ref()));
                            Ok(v)
                        })
                        .collect::<Result<_, serde_json::Error>>()
                        .internal()?;
                    json_doc(&json!({
                        "degree": degree,
                        "shape": shape,
                        "rules": config.rules.to_string(),
                        "rows": rows,
                    }))?
                }
                Format::Text => rows
                    .iter()
                    .map(|r| {
                        let c: Couple = r.couple.parse().expect("couple text parses");
                        verdict_text(&c, &r.verdict)
                    })
                    .collect(),
            };
            Ok(Output::ok(text))
        }
        Command::Verify { file, pattern, order, alpha, gamma } => {
            let mut record = match (file, pattern, order) {
                (Some(path), _, _) => read_record(path)?,
                (None, Some(p), Some(o)) => {
                    let couple = Couple::parse(p, o).domain()?;
                    let parse = |v: &[String]| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>();
                    let roots = RootConfiguration::new(parse(alpha).domain()?, parse(gamma).domain()?).domain()?;
                    WitnessRecord::from_roots(couple, roots, Strategy::Provided)
                }
                _ => return Err(Failure::Domain(anyhow!("give --file, or --pattern and --order with roots"))),
            };
            let report = verify(&mut record);
            let text = match cli.format {
                Format::Json => json_doc(&report)?,
                Format::Text => {
                    let mut s = format!("{} {}\n", report.couple, if report.ok { "ok" } else { "mismatch" });
                    for m in &report.mismatches {
                        s.push_str(&format!("  {}\n", m));
                    }
                    s
                }
                Format::Csv => return Err(unsupported(cli.format, "verify")),
            };
            Ok(Output { text, rejected: !report.ok })
        }
        Command::Certify { lemma, n, count } => {
            let lemma: LemmaId = lemma.parse().domain()?;
            if *count == 0 {
                return Err(Failure::Domain(anyhow!("--count must be at least 1")));
            }
            let report = sample_region(lemma, *n, *count, config.seed).domain()?;
            let text = match cli.format {
                Format::Json => json_doc(&report)?,
                Format::Text => certificate_text(&report),
                Format::Csv => return Err(unsupported(cli.format, "certify")),
            };
            Ok(Output::ok(text))
        }
        Command::Report { max_degree, samples, output } => {
            let opts = ReportOptions {
                seed: config.seed,
                rules: config.rules,
                budget: config.budget.clone(),
                max_degree: *max_degree,
                certificate_samples: samples.unwrap_or(config.certificate_samples),
            };
            if opts.certificate_samples == 0 {
                return Err(Failure::Domain(anyhow!("--samples must be at least 1")));
            }
            let text = render(&opts);
            match output {
                Some(path) => {
                    fs::write(path, &text).with_context(|| format!("writing {}", path.display())).internal()?;
                    Ok(Output::ok(String::new()))
                }
                None => Ok(Output::ok(text)),
            }
        }
    }
}

fn read_record(path: &PathBuf) -> Result<WitnessRecord, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .internal()?;
    if let Ok(record) = serde_json::from_str::<WitnessRecord>(&text) {
        return Ok(record);
    }
    let report: SearchReport = serde_json::from_str(&text)
        .with_context(|| format!("{} is neither a witness record nor a search report", path.display()))
        .domain()?;
    report
        .witness()
        .cloned()
        .ok_or_else(|| Failure::Domain(anyhow!("search report contains no witness")))
}

fn search_text(report: &SearchReport) -> String {
    match report.witness() {
        Some(w) => {
            let list = |v: &[_]| v.iter().map(display_rational).collect::<Vec<_>>().join(", ");
            format!(
                "{} found by {} after {} trials\n  positive roots: {}\n  negative moduli: {}\n  polynomial: {}\n",
                report.couple,
                w.strategy,
                report.trials,
                list(w.roots.positive()),
                list(w.roots.negative_moduli()),
                w.poly
            )
        }
        None => format!("{} exhausted after {} trials\n", report.couple, report.trials),
    }
}

fn certificate_text(r: &CertificateReport) -> String {
    let mut s = format!(
        "lemma {} n={} samples={} seed={}\nviolations: {}\nboundary: {} violations in {} samples\nextremal margin: {}\n",
        r.lemma, r.n, r.samples, r.seed, r.violations, r.boundary_violations, r.boundary_samples, r.extremal_margin
    );
    for (name, c) in &r.checks {
        s.push_str(&format!("check {}: {} passed, {} failed\n", name, c.passed, c.failed));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if out.rejected { 1 } else { 0 })
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
