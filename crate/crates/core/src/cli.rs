//! Command-line front end. `main.rs` only parses arguments and forwards here
//! so the commands can be exercised in-process.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{OutputFormat, StudyConfig};
use crate::error::{Error, Result};
use crate::expr;
use crate::kernel::Kernel;
use crate::metrics::{proposition_order_checks, run_study};
use crate::quadrature::default_order;
use crate::reference::{SpectralReference, Target, DEFAULT_NYSTROM_POINTS};

#[derive(Debug, Parser)]
#[command(
    name = "fredholm-colloc",
    version,
    about = "Collocation eigenvalue studies for smooth Fredholm kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mesh-refinement study described by a TOML config.
    Study {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `output.format` (csv, json or text).
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Print the Nyström reference eigenvalue of largest modulus.
    Reference {
        /// Builtin kernel name or an expression in s and t.
        #[arg(long)]
        kernel: String,
        #[arg(long = "N", default_value_t = DEFAULT_NYSTROM_POINTS)]
        points: usize,
    },
    /// Measure the orders of K(I-Q)x, (I-Q)K(I-Q)x and K(I-Q)K(I-Q)x.
    Props {
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value_t = 0)]
        r: usize,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
        n_list: Vec<usize>,
        /// Test function x as an expression in t.
        #[arg(long = "x", default_value = "cos(pi*t)")]
        test_fn: String,
        /// Per-subinterval Gauss order, default max(2r+6, 10).
        #[arg(long)]
        g: Option<usize>,
    },
}

/// Run a parsed command; returns the process exit code. Errors are
/// reported on `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Study {
            config,
            out: path,
            format,
        } => cmd_study(&config, path, format, out),
        Command::Reference { kernel, points } => cmd_reference(&kernel, points, out),
        Command::Props {
            kernel,
            r,
            n_list,
            test_fn,
            g,
        } => cmd_props(&kernel, r, &n_list, &test_fn, g, out),
    };
    match result {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

pub fn cmd_study(
    config_path: &std::path::Path,
    out_path: Option<PathBuf>,
    format: Option<OutputFormat>,
    out: &mut dyn Write,
) -> Result<i32> {
    let mut config = StudyConfig::from_path(config_path)?;
    if let Some(p) = out_path {
        config.output.path = Some(p);
    }
    if let Some(f) = format {
        config.output.format = f;
    }
    let table = run_study(&config)?;
    let rendered = match config.output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
        OutputFormat::Text => table.to_text(),
    };
    match &config.output.path {
        Some(path) => std::fs::write(path, rendered)?,
        None => out.write_all(rendered.as_bytes())?,
    }
    let cells = table.rows.len() * table.methods.len();
    Ok(if table.failures() == cells { 1 } else { 0 })
}

pub fn cmd_reference(kernel: &str, points: usize, out: &mut dyn Write) -> Result<i32> {
    let kernel = Kernel::from_spec(kernel)?;
    let reference = SpectralReference::nystrom(&kernel, points, Target::LargestModulus)?;
    writeln!(out, "{:.16}", reference.lambda())?;
    writeln!(out, "kernel          {}", kernel.name())?;
    writeln!(out, "nystrom points  {points}")?;
    writeln!(out, "imaginary part  {:e}", reference.lambda_imag())?;
    writeln!(out, "residual        {:e}", reference.residual()?)?;
    writeln!(out, "pairing         {:e}", reference.pairing())?;
    Ok(0)
}

pub fn cmd_props(
    kernel: &str,
    r: usize,
    n_list: &[usize],
    test_fn: &str,
    g: Option<usize>,
    out: &mut dyn Write,
) -> Result<i32> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidArgument(
            "--n needs positive mesh sizes".into(),
        ));
    }
    let kernel = Kernel::from_spec(kernel)?;
    let ast = expr::parse(test_fn)?;
    let x = move |t: f64| ast.eval(t, t).unwrap_or(f64::NAN);
    let report = proposition_order_checks(
        &kernel,
        r,
        n_list,
        &x,
        g.unwrap_or_else(|| default_order(r)),
    )?;
    out.write_all(report.to_text().as_bytes())?;
    Ok(if report.passed() { 0 } else { 1 })
}
