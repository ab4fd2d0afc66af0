//! Comparison configurations such as `sz(8)` or `sz-pm(16)`.

use anyhow::{anyhow, bail, Result};
use szpm::Predictor;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub label: String,
    pub predictor: Predictor,
    /// Segment / look-ahead size; `None` keeps the command-line value.
    pub n: Option<usize>,
}

pub const DEFAULT_CONFIGS: &str = "sz(8),sz-pm(8),sz(16),sz-pm(16),sz(32),sz-pm(32)";

pub fn parse_config(s: &str) -> Result<Config> {
    let s = s.trim();
    let (name, n) = match s.find('(') {
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| anyhow!("config '{s}': missing ')'"))?;
            let n: usize = inner
                .trim()
                .parse()
                .map_err(|_| anyhow!("config '{s}': '{inner}' is not a segment size"))?;
            (&s[..open], Some(n))
        }
        None => (s, None),
    };
    if name.is_empty() {
        bail!("empty config");
    }
    let predictor: Predictor = name.parse().map_err(|e| anyhow!("config '{s}': {e}"))?;
    Ok(Config {
        label: s.to_string(),
        predictor,
        n,
    })
}

/// Splits on commas outside parentheses.
pub fn parse_configs(list: &str) -> Result<Vec<Config>> {
    list.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_config)
        .collect()
}
