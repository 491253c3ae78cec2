//! Study configuration files (TOML).
//!
//! ```toml
//! r = 0
//! n_list = [2, 4, 8, 16]
//! methods = ["collocation", "iterated", "modified", "iterated_modified"]
//!
//! [kernel]
//! builtin = "exp_st"        # or: expr = "exp(s*t)"
//!
//! [quad]
//! g = 10                    # optional, default max(2r+6, 10)
//!
//! [reference]
//! N = 128                   # optional
//! target = "largest_modulus" # or a number: the eigenvalue nearest to it
//!
//! [output]
//! format = "text"           # csv | json | text
//! path = "table.txt"        # optional, standard output otherwise
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::discretization::Method;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, BUILTIN_NAMES};
use crate::quadrature::{default_order, MAX_GLOBAL_POINTS, MAX_RULE_POINTS};
use crate::reference::{Target, DEFAULT_NYSTROM_POINTS, MIN_NYSTROM_POINTS};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Builtin(String),
    Expr(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::config(
                "output.format",
                format!("unknown format `{other}` (expected csv, json or text)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub kernel: KernelSpec,
    pub r: usize,
    pub n_list: Vec<usize>,
    pub methods: Vec<Method>,
    /// Per-subinterval Gauss order; `None` means [`default_order`].
    pub quad_g: Option<usize>,
    pub reference_points: usize,
    pub target: Target,
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    r: usize,
    n_list: Vec<usize>,
    methods: Vec<String>,
    kernel: RawKernel,
    #[serde(default)]
    quad: RawQuad,
    #[serde(default)]
    reference: RawReference,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    builtin: Option<String>,
    expr: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuad {
    g: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    #[serde(rename = "N")]
    n: Option<usize>,
    target: Option<RawTarget>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawTarget {
    Named(String),
    Value(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<OutputFormat>,
    path: Option<PathBuf>,
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<StudyConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let key = match e.span() {
                Some(span) if e.message().starts_with("missing field") => {
                    missing_field_owner(&text[span.start..])
                }
                Some(span) => locate_key(text, span.start),
                None => "<root>".into(),
            };
            Error::config(key, e.message().trim().to_string())
        })?;

        let kernel = match (raw.kernel.builtin, raw.kernel.expr) {
            (Some(name), None) => KernelSpec::Builtin(name),
            (None, Some(expr)) => KernelSpec::Expr(expr),
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "kernel",
                    "`kernel.builtin` and `kernel.expr` are mutually exclusive",
                ))
            }
            (None, None) => {
                return Err(Error::config(
                    "kernel",
                    "one of `kernel.builtin` or `kernel.expr` is required",
                ))
            }
        };
        let methods = raw
            .methods
            .iter()
            .map(|name| {
                Method::from_name(name).ok_or_else(|| {
                    Error::config(
                        "methods",
                        format!(
                            "unknown method `{name}` (expected collocation, iterated, modified or iterated_modified)"
                        ),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let target = match raw.reference.target {
            None => Target::LargestModulus,
            Some(RawTarget::Named(s)) if s == "largest_modulus" => Target::LargestModulus,
            Some(RawTarget::Named(s)) => {
                return Err(Error::config(
                    "reference.target",
                    format!("unknown target `{s}` (expected \"largest_modulus\" or a number)"),
                ))
            }
            Some(RawTarget::Value(v)) => Target::Near(v),
        };
        let config = StudyConfig {
            kernel,
            r: raw.r,
            n_list: raw.n_list,
            methods,
            quad_g: raw.quad.g,
            reference_points: raw.reference.n.unwrap_or(DEFAULT_NYSTROM_POINTS),
            target,
            output: OutputConfig {
                format: raw.output.format.unwrap_or_default(),
                path: raw.output.path,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<StudyConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn quadrature_order(&self) -> usize {
        self.quad_g.unwrap_or_else(|| default_order(self.r))
    }

    pub fn kernel(&self) -> Result<Kernel> {
        match &self.kernel {
            KernelSpec::Builtin(name) => {
                Kernel::builtin(name).map_err(|e| Error::config("kernel.builtin", e.to_string()))
            }
            KernelSpec::Expr(src) => {
                Kernel::parse(src).map_err(|e| Error::config("kernel.expr", e.to_string()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Builtin(name) = &self.kernel {
            if !BUILTIN_NAMES.contains(&name.as_str()) {
                return Err(Error::config(
                    "kernel.builtin",
                    format!(
                        "unknown builtin `{name}` (expected one of {})",
                        BUILTIN_NAMES.join(", ")
                    ),
                ));
            }
        }
        self.kernel()?;
        if self.r > 12 {
            return Err(Error::config("r", "r must be at most 12"));
        }
        if self.n_list.is_empty() {
            return Err(Error::config("n_list", "n_list must not be empty"));
        }
        if self.n_list[0] == 0 {
            return Err(Error::config("n_list", "n must be positive"));
        }
        if self.n_list.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(Error::config("n_list", "n_list must double"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "methods must not be empty"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::config(
                    "methods",
                    format!("duplicate method `{}`", m.name()),
                ));
            }
        }
        if let Some(g) = self.quad_g {
            if g == 0 || g > MAX_RULE_POINTS {
                return Err(Error::config(
                    "quad.g",
                    format!("g must lie in 1..={MAX_RULE_POINTS}"),
                ));
            }
        }
        if self.reference_points < MIN_NYSTROM_POINTS || self.reference_points > MAX_GLOBAL_POINTS {
            return Err(Error::config(
                "reference.N",
                format!("N must lie in {MIN_NYSTROM_POINTS}..={MAX_GLOBAL_POINTS}"),
            ));
        }
        Ok(())
    }
}

fn missing_field_owner(spanned: &str) -> String {
    let head = spanned.trim_start();
    match head.strip_prefix('[').and_then(|rest| rest.split_once(']')) {
        Some((table, _)) => table.trim().to_string(),
        None => "<root>".into(),
    }
}

/// Dotted key path of the entry containing byte `offset`, best effort.
fn locate_key(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        pos += line.len();
        if pos > offset {
            break;
        }
    }
    match (table.is_empty(), key.is_empty()) {
        (true, true) => "<root>".into(),
        (true, false) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}
