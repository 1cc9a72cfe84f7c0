//! Run configuration and the factor-spec mini-language.
//!
//! Factor specs are comma-separated tokens `C<k>` (cyclic) and `S<k>`
//! (symmetric), e.g. `C2,C2,C2,C2` or `S3,C2,C2,C2`, or a path to a JSON
//! factors file.

use crate::groups::{cyclic, symmetric, FactorSystem};
use crate::io::{self, FactorsJson};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("bad factor token {token:?}")]
    BadToken { token: String },
    #[error("{0}")]
    Io(String),
}

/// Parses a factor spec string or JSON file path into a factor system.
pub fn parse_factors(spec: &str) -> Result<FactorSystem, ConfigError> {
    if spec.ends_with(".json") || spec.contains('/') {
        let text = std::fs::read_to_string(spec).map_err(|e| ConfigError::Io(e.to_string()))?;
        let j: FactorsJson =
            serde_json::from_str(&text).map_err(|e| ConfigError::Io(e.to_string()))?;
        return io::system_from_json(&j).map_err(|e| ConfigError::Io(e.to_string()));
    }
    let mut factors = Vec::new();
    for token in spec.split(',') {
        let token = token.trim();
        let (kind, num) = token.split_at(1.min(token.len()));
        let k: usize = num
            .parse()
            .map_err(|_| ConfigError::BadToken {
                token: token.to_string(),
            })?;
        let g = match kind {
            "C" | "c" => cyclic(k),
            "S" | "s" => symmetric(k),
            _ => {
                return Err(ConfigError::BadToken {
                    token: token.to_string(),
                })
            }
        }
        .map_err(|e| ConfigError::Io(e.to_string()))?;
        factors.push(g);
    }
    FactorSystem::new(factors).map_err(|e| ConfigError::Io(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub factors: String,
    pub radius: u32,
    pub max_vertices: usize,
    pub cap: u32,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Dot,
    Csv,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            factors: "C2,C2,C2,C2".into(),
            radius: 6,
            max_vertices: 200_000,
            cap: 12,
            seed: 0,
            format: OutputFormat::Json,
            out: None,
        }
    }
}
