//! Flat key=value config with one section per subcommand. The whole
//! document is kept as a TOML table so a load/save cycle is lossless.

use std::path::Path;

use anyhow::{Context, Result};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub format: Option<String>,
    pub table: toml::Table,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().context("parsing config")?;
        let get_str = |key: &str| {
            table
                .get(key)
                .and_then(|v| v.as_str())
                .map(|s| s.to_string())
        };
        Ok(ExperimentConfig {
            seed: table.get("seed").and_then(|v| v.as_integer()).map(|v| v as u64),
            output: get_str("output"),
            format: get_str("format"),
            table,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.table).expect("tables serialize")
    }

    /// Per-subcommand defaults, e.g. `[count]` / `[verify]`.
    #[allow(dead_code)]
    pub fn section(&self, name: &str) -> Option<&toml::Table> {
        self.table.get(name).and_then(|v| v.as_table())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 42
format = "csv"

[count]
X = 100.0
mod_pm1 = false

[verify]
suite = "all"
"#;

    #[test]
    fn round_trip_is_lossless() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.format.as_deref(), Some("csv"));
        assert_eq!(
            cfg.section("count").unwrap().get("X").unwrap().as_float(),
            Some(100.0)
        );
        let rendered = cfg.to_toml_string();
        let again = ExperimentConfig::parse(&rendered).unwrap();
        assert_eq!(cfg, again);
    }
}
