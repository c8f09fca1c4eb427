//! Experiment reports: per-instance rows, named sub-checks, CSV and a
//! plain-text summary.

use serde::{Deserialize, Serialize};

/// Shown at the top of every summary: the theorems only assert the
/// existence of constants, so the harness checks boundedness and trends.
pub const HEADER: &str =
    "constants in these inequalities are not explicit; checks are boundedness and trend assertions over instance suites";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub instance: usize,
    pub seed: u64,
    pub size: usize,
    /// Sweep parameter (a level `λ`, a scale `n`), when the row has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Row {
    pub fn new(instance: usize, seed: u64, size: usize, param: Option<f64>, lhs: f64, rhs: f64) -> Self {
        Self {
            instance,
            seed,
            size,
            param,
            lhs,
            rhs,
            ratio: lhs / rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub tag: String,
    pub instances: usize,
    pub rows: Vec<Row>,
    pub max_ratio: f64,
    /// Least-squares slope of log(max ratio per size) against log(size).
    pub size_slope: Option<f64>,
    /// Least-squares slope of log(ratio) against log(param), when swept.
    pub param_slope: Option<f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl NormReport {
    pub fn new(tag: &str, instances: usize, rows: Vec<Row>, checks: Vec<Check>) -> Self {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let size_slope = size_trend(&rows);
        let swept: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.param.map(|p| (p, r.ratio)))
            .filter(|(p, r)| *p > 0.0 && *r > 0.0)
            .map(|(p, r)| (p.ln(), r.ln()))
            .collect();
        Self {
            tag: tag.into(),
            instances,
            rows,
            max_ratio,
            size_slope,
            param_slope: slope(&swept),
            checks,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub const CSV_HEADER: &'static str = "instance,seed,size,param,lhs,rhs,ratio";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let param = r.param.map(|p| format!("{p:.16e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{:.16e},{:.16e}\n",
                r.instance, r.seed, r.size, param, r.lhs, r.rhs, r.ratio
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = format!("# {}\n# {HEADER}\n", self.tag);
        out.push_str(&format!("instances: {}\nrows: {}\n", self.instances, self.rows.len()));
        out.push_str(&format!("max ratio: {:.16e}\n", self.max_ratio));
        if let Some(s) = self.size_slope {
            out.push_str(&format!("slope vs size: {s:.16e}\n"));
        }
        if let Some(s) = self.param_slope {
            out.push_str(&format!("slope vs parameter: {s:.16e}\n"));
        }
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two
/// distinct abscissae.
pub fn slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn size_trend(rows: &[Row]) -> Option<f64> {
    let mut by_size: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    for r in rows.iter().filter(|r| r.ratio > 0.0 && r.ratio.is_finite()) {
        let e = by_size.entry(r.size).or_insert(0.0);
        *e = e.max(r.ratio);
    }
    let pts: Vec<(f64, f64)> = by_size
        .into_iter()
        .map(|(s, m)| ((s as f64).ln(), m.ln()))
        .collect();
    slope(&pts)
}
