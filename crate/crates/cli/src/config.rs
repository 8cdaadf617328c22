//! Run configuration: config-file values overridden by command-line flags.

use std::path::Path;

use serde::Deserialize;

use momenta::moment::MomentConfig;
use momenta::povm::CellGrid;
use momenta::{Error, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    Json,
    Csv,
    Table,
}

pub fn parse_output(s: &str) -> Result<OutputKind, String> {
    match s {
        "json" => Ok(OutputKind::Json),
        "csv" => Ok(OutputKind::Csv),
        "table" => Ok(OutputKind::Table),
        other => Err(format!("unknown output {other:?} (expected json, csv or table)")),
    }
}

/// Momentum-grid policy for the half-line command.
#[derive(Debug, Clone, Deserialize)]
pub struct GridPolicy {
    pub extent: f64,
    pub width: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { extent: 8.3, width: 0.5 }
    }
}

impl GridPolicy {
    pub fn build(&self) -> Result<CellGrid, Error> {
        CellGrid::symmetric(self.extent, self.width)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
struct ConfigFile {
    precision_digits: Option<u32>,
    tolerances: Option<PartialTolerances>,
    grid: Option<GridPolicy>,
    output: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
struct PartialTolerances {
    psd: Option<f64>,
    sum: Option<f64>,
    krein: Option<f64>,
    tail: Option<f64>,
    reconstruction: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub precision_digits: u32,
    pub tolerances: Tolerances,
    pub grid: GridPolicy,
    pub output: OutputKind,
}

impl RunConfig {
    pub fn assemble(
        config_path: Option<&Path>,
        output: Option<OutputKind>,
        precision: Option<u32>,
        tol_flags: &[String],
    ) -> Result<Self, Error> {
        let file: ConfigFile = match config_path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::InvalidInput(format!("cannot read {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::InvalidInput(format!("malformed config {}: {e}", p.display()))
                })?
            }
            None => ConfigFile::default(),
        };
        let mut tolerances = Tolerances::default();
        if let Some(pt) = &file.tolerances {
            for (name, value) in [
                ("psd", pt.psd),
                ("sum", pt.sum),
                ("krein", pt.krein),
                ("tail", pt.tail),
                ("reconstruction", pt.reconstruction),
            ] {
                if let Some(v) = value {
                    tolerances.set(name, v)?;
                }
            }
        }
        for flag in tol_flags {
            let (name, value) = flag.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("--tol expects NAME=VALUE, got {flag:?}"))
            })?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::InvalidInput(format!("not a number: {value:?}")))?;
            tolerances.set(name, value)?;
        }
        let precision_digits = precision
            .or(file.precision_digits)
            .unwrap_or(momenta::config::DEFAULT_PRECISION_DIGITS);
        if precision_digits < 16 {
            return Err(Error::InvalidInput(format!(
                "precision_digits must be at least 16, got {precision_digits}"
            )));
        }
        let output = match output {
            Some(o) => o,
            None => match file.output.as_deref() {
                Some(s) => parse_output(s).map_err(Error::InvalidInput)?,
                None => OutputKind::Table,
            },
        };
        Ok(RunConfig {
            precision_digits,
            tolerances,
            grid: file.grid.unwrap_or_default(),
            output,
        })
    }

    pub fn moment_config(&self) -> MomentConfig {
        MomentConfig {
            tolerances: self.tolerances.clone(),
            precision_digits: self.precision_digits,
        }
    }
}
