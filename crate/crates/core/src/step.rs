//! Nonnegative step functions on the real line and half-open intervals.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || !(lo < hi) {
            return Err(Error::DegenerateSet(format!("[{lo}, {hi}) is not a proper interval")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    pub fn translate(&self, by: f64) -> Interval {
        Interval {
            lo: self.lo + by,
            hi: self.hi + by,
        }
    }
}

/// Nonnegative step function: `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// zero outside `[first, last)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::Input(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(domain("breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Input("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(domain("step values must be finite and nonnegative"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn constant_on(iv: Interval, c: f64) -> Result<Self> {
        Self::new(vec![iv.lo, iv.hi], vec![c])
    }

    pub fn indicator(iv: Interval) -> Self {
        Self {
            breakpoints: vec![iv.lo, iv.hi],
            values: vec![1.0],
        }
    }

    /// Builds a step function from cell edges, dropping no cells.
    pub fn from_cells(edges: &[f64], values: &[f64]) -> Result<Self> {
        Self::new(edges.to_vec(), values.to_vec())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(cell, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (Interval, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| {
            (
                Interval {
                    lo: w[0],
                    hi: w[1],
                },
                v,
            )
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Smallest interval outside of which the function vanishes.
    pub fn support(&self) -> Option<Interval> {
        let mut cells = self.cells().filter(|(_, v)| *v > 0.0);
        let first = cells.next()?.0;
        let last = cells.last().map_or(first, |c| c.0);
        Some(Interval {
            lo: first.lo,
            hi: last.hi,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.breakpoints.is_empty() || x < self.breakpoints[0] {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x);
        if i >= self.breakpoints.len() {
            0.0
        } else {
            self.values[i - 1]
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_on(&self, iv: &Interval) -> f64 {
        self.pieces(iv).into_iter().map(|(_, v)| v).fold(0.0, f64::max)
    }

    /// `(length, value)` pieces covering `iv`, including zero pieces where
    /// `iv` sticks out of the breakpoint range.
    pub fn pieces(&self, iv: &Interval) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.breakpoints.is_empty() {
            out.push((iv.len(), 0.0));
            return out;
        }
        let first = self.breakpoints[0];
        let last = *self.breakpoints.last().unwrap();
        if iv.lo < first {
            out.push((iv.hi.min(first) - iv.lo, 0.0));
        }
        if iv.hi > first && iv.lo < last {
            let start = self.breakpoints.partition_point(|&b| b <= iv.lo).max(1) - 1;
            for i in start..self.values.len() {
                let lo = self.breakpoints[i].max(iv.lo);
                let hi = self.breakpoints[i + 1].min(iv.hi);
                if lo >= iv.hi {
                    break;
                }
                if hi > lo {
                    out.push((hi - lo, self.values[i]));
                }
            }
        }
        if iv.hi > last {
            out.push((iv.hi - iv.lo.max(last), 0.0));
        }
        out
    }

    pub fn integral(&self, iv: &Interval) -> f64 {
        self.pieces(iv).iter().map(|(m, v)| m * v).sum()
    }

    pub fn total_integral(&self) -> f64 {
        self.cells().map(|(c, v)| c.len() * v).sum()
    }

    /// `∫ |f|^p` over the whole line.
    pub fn lp_integral(&self, p: f64) -> f64 {
        self.cells().map(|(c, v)| c.len() * v.powf(p)).sum()
    }

    /// Applies `g` to each value; `g(0)` must be `0` so that the function
    /// still vanishes outside its breakpoints.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|&v| g(v)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn powf(&self, e: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self
                .values
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { v.powf(e) })
                .collect(),
        }
    }

    pub fn translate(&self, by: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|b| b + by).collect(),
            values: self.values.clone(),
        }
    }

    /// Same function with extra breakpoints inserted.
    pub fn refined(&self, extra: &[f64]) -> Self {
        let edges = merge_edges(&self.breakpoints, extra);
        let values = edges
            .windows(2)
            .map(|w| self.eval(0.5 * (w[0] + w[1])))
            .collect();
        Self {
            breakpoints: edges,
            values,
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let edges = merge_edges(&self.breakpoints, &other.breakpoints);
        let values = edges
            .windows(2)
            .map(|w| {
                let x = 0.5 * (w[0] + w[1]);
                op(self.eval(x), other.eval(x))
            })
            .collect();
        Self {
            breakpoints: edges,
            values,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max(&self, other: &Self) -> Self {
        self.zip_with(other, f64::max)
    }

    /// `max(f, τ)` on `window`, `f` elsewhere.
    pub fn floored(&self, tau: f64, window: &Interval) -> Self {
        let floor = Self {
            breakpoints: vec![window.lo, window.hi],
            values: vec![tau],
        };
        self.max(&floor)
    }

    /// Merges adjacent cells carrying the same value.
    pub fn simplified(&self) -> Self {
        if self.values.is_empty() {
            return Self::zero();
        }
        let mut edges = vec![self.breakpoints[0]];
        let mut values: Vec<f64> = Vec::new();
        for (cell, v) in self.cells() {
            if values.last() == Some(&v) {
                *edges.last_mut().unwrap() = cell.hi;
            } else {
                values.push(v);
                edges.push(cell.hi);
            }
        }
        Self {
            breakpoints: edges,
            values,
        }
    }
}

/// Sorted union of two edge lists with duplicates removed.
pub fn merge_edges(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}
