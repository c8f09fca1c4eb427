use std::fmt;
use std::path::{Path, PathBuf};

use dyadic_bumps::cells::Layout;
use dyadic_bumps::grid::DyadicGrid;
use dyadic_bumps::step::StepFunction;
use dyadic_bumps::Error;
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// An error with its exit code: 1 for a failed check, 2 for bad input.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) | Error::Convergence(_) => Self::failed(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{what} {}: {e}", path.display())))
}

/// A function on the line, or one value per point of a finite space.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Data {
    Step(StepFunction),
    Points(Vec<f64>),
}

impl Data {
    /// The grid's atoms and the function's value on each.
    pub fn on_atoms(&self, grid: &DyadicGrid) -> Result<(Layout, Vec<f64>), CliError> {
        match self {
            Data::Step(f) => {
                if !grid.is_line() {
                    return Err(CliError::input("a step function needs a line grid"));
                }
                let layout = Layout::new(grid, &[f])?;
                let values = layout.sample(f);
                Ok((layout, values))
            }
            Data::Points(v) => {
                if grid.is_line() {
                    return Err(CliError::input("per-point values need a finite-space grid"));
                }
                let layout = Layout::new(grid, &[])?;
                if v.len() != layout.len() {
                    return Err(CliError::input(format!("{} values for {} points", v.len(), layout.len())));
                }
                if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(CliError::input("point values must be finite and nonnegative"));
                }
                Ok((layout.clone(), layout.from_points(v)))
            }
        }
    }
}

/// Where artifacts go: files in `dir`, or stdout for data and stderr for
/// summaries.
pub struct Output {
    pub dir: Option<PathBuf>,
}

impl Output {
    fn write(&self, name: &str, content: &str) -> Result<(), CliError> {
        let dir = self.dir.as_ref().expect("called with a directory");
        std::fs::create_dir_all(dir).map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
    }

    pub fn data(&self, name: &str, content: &str) -> Result<(), CliError> {
        match self.dir {
            Some(_) => self.write(name, content),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }

    pub fn summary(&self, name: &str, content: &str) -> Result<(), CliError> {
        eprint!("{content}");
        match self.dir {
            Some(_) => self.write(name, content),
            None => Ok(()),
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
