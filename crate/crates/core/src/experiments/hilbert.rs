//! The Hilbert kernel `1/(x−y)` on step functions, averaged exactly over
//! the cells of a uniform grid.
//!
//! For `f = Σ c_k χ_(a_k,b_k)`, `Hf(x) = p.v.∫ f(y)/(x−y) dy =
//! Σ c_k ln|(x−a_k)/(x−b_k)|`, with no `1/π` factor. Its average over a
//! cell is a combination of `∫ ln|x−a| dx = G(x−a)`, `G(z) = z ln|z| − z`.

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::step::{Interval, StepFunction};

/// A step function that may change sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedStep {
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
}

impl SignedStep {
    pub fn cells(&self) -> impl Iterator<Item = (Interval, f64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (Interval { lo: w[0], hi: w[1] }, v))
    }

    /// Value on the cell containing `x`, 0 outside.
    pub fn eval(&self, x: f64) -> f64 {
        match self.edges.partition_point(|&e| e <= x) {
            0 => 0.0,
            i if i >= self.edges.len() => 0.0,
            i => self.values[i - 1],
        }
    }

    /// `(∫ |F|^p w)^{1/p}` for a step weight `w`.
    pub fn lp_norm(&self, weight: &StepFunction, p: f64) -> f64 {
        self.cells()
            .map(|(iv, v)| v.abs().powf(p) * weight.integral(&iv))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertOutput {
    /// Cell averages of `Hf`.
    pub transform: SignedStep,
    /// Cells within one cell width of a jump of `f`, where `Hf` has a log
    /// singularity. Their averages are exact but they are left out of
    /// pointwise comparisons.
    pub collar: Vec<bool>,
}

/// `G(z) = z ln|z| − z`, with `G(0) = 0`.
fn g(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z * z.abs().ln() - z
    }
}

/// `(β−α)⁻¹ ∫_α^β ln|x−a| dx`. Away from `a` this is evaluated as
/// `ln|z₁| + (z₀/h)·ln(1 + h/z₀) − 1` with `z₀ = α−a`, `z₁ = β−a`,
/// `h = β−α`, which keeps full relative accuracy when `|z₀| ≫ h`.
fn mean_log(alpha: f64, beta: f64, a: f64) -> f64 {
    let (z0, z1) = (alpha - a, beta - a);
    let h = beta - alpha;
    if z0 != 0.0 && z1 != 0.0 && (z0 > 0.0) == (z1 > 0.0) {
        z1.abs().ln() + (z0 / h) * (h / z0).ln_1p() - 1.0
    } else {
        (g(z1) - g(z0)) / h
    }
}

/// Cell averages of `Hf` on the cells `[j·h, (j+1)·h)` that meet `window`
/// (by default the support of `f` widened by its length on both sides).
pub fn hilbert_apply(f: &StepFunction, h: f64, window: Option<Interval>) -> Result<HilbertOutput> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(parameter(format!("cell width must be positive, got {h}")));
    }
    let support = f
        .support()
        .ok_or_else(|| Error::DegenerateSet("f vanishes identically".into()))?;
    let window = window.unwrap_or(Interval {
        lo: support.lo - support.len(),
        hi: support.hi + support.len(),
    });
    let first = (window.lo / h).floor() as i64;
    let last = (window.hi / h).ceil() as i64;
    if last - first > 1 << 26 {
        return Err(parameter("too many cells for this window and width"));
    }
    let edges: Vec<f64> = (first..=last).map(|j| j as f64 * h).collect();
    let pieces: Vec<(Interval, f64)> = f.cells().filter(|(_, c)| *c != 0.0).collect();
    let values: Vec<f64> = edges
        .windows(2)
        .map(|w| {
            pieces
                .iter()
                .map(|(iv, c)| c * (mean_log(w[0], w[1], iv.lo) - mean_log(w[0], w[1], iv.hi)))
                .sum()
        })
        .collect();
    let jumps = f.breakpoints();
    let collar = edges
        .windows(2)
        .map(|w| jumps.iter().any(|&b| b > w[0] - h && b < w[1] + h))
        .collect();
    Ok(HilbertOutput {
        transform: SignedStep { edges, values },
        collar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_log_matches_the_antiderivative() {
        for (alpha, beta, a) in [(2.0, 2.5, 0.0), (-3.0, -2.75, 1.0), (0.1, 0.2, 0.15)] {
            let direct = (g(beta - a) - g(alpha - a)) / (beta - alpha);
            assert!((mean_log(alpha, beta, a) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn signed_step_evaluates_by_cell() {
        let s = SignedStep {
            edges: vec![0.0, 1.0, 2.0],
            values: vec![-1.0, 2.0],
        };
        assert_eq!(s.eval(0.5), -1.0);
        assert_eq!(s.eval(1.0), 2.0);
        assert_eq!(s.eval(2.0), 0.0);
        assert_eq!(s.eval(-0.1), 0.0);
    }
}
