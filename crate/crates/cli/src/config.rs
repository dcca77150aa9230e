//! Run settings: built-in defaults, then an optional `key=value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hyperbolic_signs::decision::RuleSet;
use hyperbolic_signs::polyalgebra::parse_rational;
use hyperbolic_signs::witness::SearchBudget;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CERTIFICATE_SAMPLES: u64 = 2_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub rules: RuleSet,
    pub budget: SearchBudget,
    pub archive: Option<PathBuf>,
    pub certificate_samples: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            rules: RuleSet::Revised,
            budget: SearchBudget::default(),
            archive: None,
            certificate_samples: DEFAULT_CERTIFICATE_SAMPLES,
        }
    }
}

impl RunConfig {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = value.parse()?,
            "rules" => self.rules = value.parse().map_err(|e: String| anyhow!(e))?,
            "budget" | "max_trials" => self.budget.max_trials = value.parse()?,
            "ladder_ratios" => {
                self.budget.ladder_ratios = value
                    .split(',')
                    .map(|s| parse_rational(s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "perturbation_scale" => self.budget.perturbation_scale = parse_rational(value)?,
            "archive" => self.archive = Some(PathBuf::from(value)),
            "certificate_samples" => self.certificate_samples = value.parse()?,
            other => bail!("unknown configuration key {:?}", other),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# defaults\nseed = 9\nbudget=500\nladder_ratios = 2, 3/2\nrules=literal\n").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&path).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.budget.max_trials, 500);
        assert_eq!(c.budget.ladder_ratios.len(), 2);
        assert_eq!(c.rules, RuleSet::Literal);
        fs::write(&path, "colour = red\n").unwrap();
        assert!(RunConfig::default().apply_file(&path).is_err());
    }
}
