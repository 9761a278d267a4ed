//! Run configuration: a JSON file whose values are overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tw_core::rules::RuleId;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disabled_rules: Vec<RuleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pq_bound: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pairs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("malformed config {}: {e}", path.display()))
    }
}

/// Parse `a..b` (inclusive on both ends).
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("malformed range {s:?}, expected a..b");
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: i64 = a.trim().parse().map_err(|_| bad())?;
    let b: i64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-5..5"), Ok((-5, 5)));
        assert_eq!(parse_range("3..3"), Ok((3, 3)));
        assert!(parse_range("5..-5").is_err());
        assert!(parse_range("1-5").is_err());
    }

    #[test]
    fn config_round_trip() {
        let c = RunConfig {
            s: Some(2),
            disabled_rules: vec![RuleId::L2_4],
            ..Default::default()
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        assert!(serde_json::from_str::<RunConfig>("{\"bogus\": 1}").is_err());
    }
}
