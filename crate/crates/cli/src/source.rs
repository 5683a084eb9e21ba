//! Turns a [`RunConfig`] into the boundary function and target law.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;

use skorokhod_core::quantile::{koebe_exit_cdf, BoundaryFunction, QuantileSpec, QuantileTable};

use crate::config::{Dist, RunConfig};
use crate::CliError;

/// Grid used to validate quantile specs before anything else runs.
pub const VALIDATION_GRID: usize = 4096;

pub enum Source {
    Quantile(QuantileSpec),
    /// Boundary functions given directly, with no quantile behind them.
    Boundary(BoundaryFunction),
}

impl Source {
    pub fn from_config(c: &RunConfig) -> Result<Self, CliError> {
        let spec = match c.dist {
            Dist::Uniform => QuantileSpec::uniform(c.a)?,
            Dist::TwoPoint => QuantileSpec::two_point(c.lower, c.upper)?,
            Dist::PaperHeavyTail => QuantileSpec::heavy_tail(),
            Dist::Table => {
                let path = c.table.as_ref().ok_or_else(|| CliError::usage("no table path"))?;
                let file = File::open(path)
                    .map_err(|e| CliError::usage(format!("cannot open table {}: {e}", path.display())))?;
                let table = QuantileTable::from_csv(BufReader::new(file), c.interpolation.into())?;
                QuantileSpec::from_table(table)?
            }
            Dist::Koebe => return Ok(Source::Boundary(BoundaryFunction::koebe())),
            Dist::Cos => return Ok(Source::Boundary(BoundaryFunction::cosine())),
        };
        Ok(Source::Quantile(spec.into_validated(VALIDATION_GRID, None)?))
    }

    pub fn boundary(&self) -> Result<BoundaryFunction, CliError> {
        match self {
            Source::Quantile(spec) => Ok(spec.fold_to_boundary()?),
            Source::Boundary(phi) => Ok(phi.clone()),
        }
    }

    /// CDF of the law the real exit coordinate should follow.
    pub fn target_cdf(&self) -> Box<dyn Fn(f64) -> f64 + Sync + '_> {
        match self {
            Source::Quantile(spec) => Box::new(|x| spec.cdf(x)),
            Source::Boundary(phi) if phi.label() == "koebe" => Box::new(koebe_exit_cdf),
            // cos(theta) with theta uniform: the arcsine law on [-1, 1]
            Source::Boundary(_) => Box::new(|x: f64| 1.0 - x.clamp(-1.0, 1.0).acos() / PI),
        }
    }

    pub fn is_koebe(&self) -> bool {
        matches!(self, Source::Boundary(phi) if phi.label() == "koebe")
    }
}
