//! Experiment configuration.
//!
//! Config files are TOML. Every key is optional; missing keys take the
//! defaults of [`ExperimentConfig::default`]. Command-line flags override
//! file values.
//!
//! ```toml
//! example = "ex1"            # ex1 | ex2 | ex3 | ex5 | ex6 | custom
//! n = [64, 128]              # points per axis, or a single integer
//! eps = 1e-6
//! schemes = ["rskelf", "hifie"]
//! seed = 1
//! skip = ["1/2"]             # level tags to skip (hifie only)
//! oracle = "fft"             # dense | fft | none
//! format = "csv"             # csv | json
//! out = "ex1.csv"
//! threads = 1
//! precond_side = "left"      # left | right
//! occupancy = 64             # target leaf occupancy
//! kappa = 4.0                # ex3 only
//! gmres_tol = 1e-12
//! gmres_maxit = 100
//!
//! [custom]                   # example = "custom": a + b K c on the grid
//! dim = 2
//! a = 1.0
//! b = 0.0
//! c = 0.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hifie::analysis::PrecondSide;
use hifie::{FactorScheme, LevelTag};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Ex1,
    Ex2,
    Ex3,
    Ex5,
    Ex6,
    Custom,
}

impl Example {
    pub fn dim(&self, custom: &CustomConfig) -> usize {
        match self {
            Example::Ex5 | Example::Ex6 => 3,
            Example::Custom => custom.dim,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    Dense,
    Fft,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

impl From<Side> for PrecondSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Left => PrecondSide::Left,
            Side::Right => PrecondSide::Right,
        }
    }
}

macro_rules! lowercase_from_str {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = CliError;

            fn from_str(s: &str) -> Result<Self, CliError> {
                let quoted = format!("{:?}", s.trim().to_ascii_lowercase());
                serde_json::from_str(&quoted).map_err(|_| CliError::Config(format!("unknown value {s:?}")))
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = serde_json::to_string(self).map_err(|_| fmt::Error)?;
                f.write_str(s.trim_matches('"'))
            }
        }
    )*};
}

lowercase_from_str!(Example, Oracle, Format, Side);

/// Constant coefficients for `example = "custom"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CustomConfig {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for CustomConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            a: 1.0,
            b: 1.0,
            c: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub example: Example,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    pub eps: f64,
    #[serde(alias = "scheme", with = "scheme_list")]
    pub schemes: Vec<FactorScheme>,
    pub seed: u64,
    pub skip: Vec<String>,
    pub oracle: Oracle,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub precond_side: Side,
    pub occupancy: Option<usize>,
    pub kappa: f64,
    pub gmres_tol: f64,
    pub gmres_maxit: usize,
    pub custom: CustomConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            example: Example::Ex1,
            n: vec![32],
            eps: 1e-6,
            schemes: vec![FactorScheme::Hifie],
            seed: 0,
            skip: Vec::new(),
            oracle: Oracle::Fft,
            format: Format::Csv,
            out: None,
            threads: None,
            precond_side: Side::Left,
            occupancy: None,
            kappa: 4.0,
            gmres_tol: 1e-12,
            gmres_maxit: 100,
            custom: CustomConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable in TOML")
    }

    pub fn skip_tags(&self) -> Result<Vec<LevelTag>, CliError> {
        self.skip
            .iter()
            .map(|s| LevelTag::parse(s).map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n must list at least one positive size".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        if !(self.gmres_tol > 0.0) || self.gmres_maxit == 0 {
            return bad("gmres_tol and gmres_maxit must be positive".into());
        }
        if self.example == Example::Custom && !(2..=3).contains(&self.custom.dim) {
            return bad(format!("custom.dim must be 2 or 3, got {}", self.custom.dim));
        }
        if self.example == Example::Ex3 && !(self.kappa > 0.0) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        self.skip_tags()?;
        Ok(())
    }

    /// Output location: `out` if set, else `$HIFIE_OUT_DIR/<example>.<ext>`,
    /// else standard output (`None`).
    pub fn output_path(&self) -> Option<PathBuf> {
        if let Some(p) = &self.out {
            return Some(p.clone());
        }
        std::env::var_os(crate::OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{}", self.example, self.format.extension())))
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(n) => vec![n],
        OneOrMany::Many(v) => v,
    })
}

mod scheme_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[FactorScheme], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<FactorScheme>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(String),
            Many(Vec<String>),
        }
        let names = match OneOrMany::deserialize(d)? {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
        names
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
