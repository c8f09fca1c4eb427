//! Luxemburg norms and averages over sets of finite positive measure.
//!
//! Everything reduces to a list of `(mass, value)` pieces, so the same
//! routine serves step functions on the line and functions on finite
//! point sets.

use crate::error::{domain, Error, Result};
use crate::step::{Interval, StepFunction};
use crate::young::YoungFunction;

fn total_mass(pieces: &[(f64, f64)]) -> Result<f64> {
    let m: f64 = pieces.iter().map(|p| p.0).sum();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::DegenerateSet(format!("set has measure {m}")));
    }
    Ok(m)
}

fn check_values(pieces: &[(f64, f64)]) -> Result<()> {
    if pieces.iter().any(|p| !p.1.is_finite()) {
        return Err(domain("function values must be finite"));
    }
    Ok(())
}

/// `μ(E)⁻¹ Σ mass·value`.
pub fn average_pieces(pieces: &[(f64, f64)]) -> Result<f64> {
    let m = total_mass(pieces)?;
    check_values(pieces)?;
    Ok(pieces.iter().map(|(w, v)| w * v).sum::<f64>() / m)
}

/// `inf{λ > 0 : μ(E)⁻¹ Σ mass·A(|value|/λ) ≤ 1}`.
///
/// Linear functions `c·t` have the closed form `c·average`. Otherwise the
/// admissible endpoint of a root bracket is returned once the bracket has
/// shrunk to adjacent floating-point numbers.
pub fn luxemburg(pieces: &[(f64, f64)], a: &YoungFunction) -> Result<f64> {
    let m = total_mass(pieces)?;
    check_values(pieces)?;
    let top = pieces.iter().filter(|p| p.0 > 0.0).map(|p| p.1.abs()).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    if let YoungFunction::ScaledPower { p, c } = a {
        if *p == 1.0 {
            return Ok(c * pieces.iter().map(|(w, v)| w * v.abs()).sum::<f64>() / m);
        }
    }
    let modular = |lambda: f64| {
        pieces
            .iter()
            .filter(|p| p.1 != 0.0)
            .map(|(w, v)| w * a.value(v.abs() / lambda))
            .sum::<f64>()
            / m
    };
    // convexity with A(0) = 0 gives modular(λ/c) ≥ c·modular(λ) for c ≥ 1,
    // which brackets the norm between top·m/2 and 2·top·m, m = modular(top)
    let (mut lo, mut hi);
    let m0 = modular(top);
    if m0 <= 1.0 {
        hi = top;
        lo = 0.5 * top * m0;
        while modular(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            if lo == 0.0 {
                return Err(Error::Convergence("norm bracket collapsed to zero".into()));
            }
        }
    } else {
        lo = top;
        hi = 2.0 * top * m0;
        while !(modular(hi) <= 1.0) {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Convergence("norm bracket overflowed".into()));
            }
        }
    }
    // Illinois steps on ln modular(λ) against ln λ, which is close to a
    // line; a bisection step whenever two steps in a row fail to halve the
    // bracket
    let h = |lambda: f64| modular(lambda).ln();
    let (mut flo, mut fhi) = (h(lo), h(hi));
    let mut side = 0i8;
    let mut width = hi - lo;
    let mut slow = 0;
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let (xlo, xhi) = (lo.ln(), hi.ln());
        let mut x = (xhi - fhi * (xhi - xlo) / (fhi - flo)).exp();
        // keep a few ulps from the ends so the far side closes in too
        let t = 4.0 * f64::EPSILON * x;
        x = x.max(lo + t).min(hi - t);
        if slow >= 2 || !(x > lo && x < hi) {
            x = mid;
            slow = 0;
        }
        let fx = h(x);
        if fx <= 0.0 {
            hi = x;
            fhi = fx;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            slow += 1;
        } else {
            slow = 0;
        }
        width = hi - lo;
    }
    Ok(hi)
}

/// `(⨍_E |f|^p)^(1/p)`.
pub fn lp_average(pieces: &[(f64, f64)], p: f64) -> Result<f64> {
    let m = total_mass(pieces)?;
    check_values(pieces)?;
    let s: f64 = pieces.iter().map(|(w, v)| w * v.abs().powf(p)).sum();
    Ok((s / m).powf(1.0 / p))
}

/// Pieces of `f` over a union of disjoint intervals.
pub fn step_pieces(f: &StepFunction, set: &[Interval]) -> Vec<(f64, f64)> {
    set.iter().flat_map(|iv| f.pieces(iv)).collect()
}

/// Pieces of a function on a finite point set restricted to `members`.
pub fn point_pieces(values: &[f64], masses: &[f64], members: &[usize]) -> Vec<(f64, f64)> {
    members.iter().map(|&i| (masses[i], values[i])).collect()
}

/// Average of a step function over a union of intervals (Lebesgue measure).
pub fn average(f: &StepFunction, set: &[Interval]) -> Result<f64> {
    average_pieces(&step_pieces(f, set))
}

/// Luxemburg norm of a step function over a union of intervals.
pub fn orlicz_norm(f: &StepFunction, set: &[Interval], a: &YoungFunction) -> Result<f64> {
    luxemburg(&step_pieces(f, set), a)
}

/// `(⨍_E f·g, 2‖f‖_{A,E}‖g‖_{Ā,E})`: both sides of the generalized Hölder
/// inequality.
pub fn holder_product(
    f: &StepFunction,
    g: &StepFunction,
    set: &[Interval],
    a: &YoungFunction,
) -> Result<(f64, f64)> {
    let abar = a.complementary()?;
    let lhs = average(&f.mul(g), set)?;
    let rhs = 2.0 * orlicz_norm(f, set, a)? * orlicz_norm(g, set, &abar)?;
    Ok((lhs, rhs))
}
