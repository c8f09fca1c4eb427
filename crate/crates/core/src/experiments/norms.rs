//! Strong and weak type norms of `T^S(·σ) : L^p(σ) → L^p(u)` and the
//! testing constants.
//!
//! `T^S(fσ)` depends on `f` only through its integrals over cubes, and
//! averaging `f` over atoms keeps those integrals while lowering
//! `‖f‖_{L^p(σ)}`. So the operator norm is that of a nonnegative matrix
//! acting on atom values, with no discretization error.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instances::TwoWeight;
use crate::error::{domain, Result};

const MAX_ITER: usize = 10_000;
const TOLERANCE: f64 = 1e-10;
const RANDOM_TRIALS: usize = 200;

/// `out_i = w_out_i · Σ_{Q∋i} μ(Q)⁻¹ Σ_{j∈Q} w_in_j x_j`.
fn cube_apply(view: &TwoWeight, w_in: &[f64], x: &[f64], w_out: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; x.len()];
    for m in &view.family.members {
        let r = view.layout.range(m.cube);
        let mass = view.layout.mass(r.clone());
        let s: f64 = r.clone().map(|j| w_in[j] * x[j]).sum::<f64>() / mass;
        for v in &mut acc[r] {
            *v += s;
        }
    }
    acc.iter_mut().zip(w_out).for_each(|(a, w)| *a *= w);
    acc
}

/// `T^S(fσ)` on atoms.
pub fn apply(view: &TwoWeight, f: &[f64]) -> Vec<f64> {
    let w_in: Vec<f64> = view
        .layout
        .masses()
        .iter()
        .zip(view.sigma)
        .map(|(m, s)| m * s)
        .collect();
    cube_apply(view, &w_in, f, &vec![1.0; f.len()])
}

/// `(Σ w_i m_i |x_i|^p)^{1/p}`.
pub fn weighted_norm(view: &TwoWeight, w: &[f64], x: &[f64], p: f64) -> f64 {
    view.layout
        .masses()
        .iter()
        .zip(w)
        .zip(x)
        .map(|((m, w), x)| m * w * x.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

fn check_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("p must exceed 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// The normalized matrix `M` with `‖M‖_{ℓ^p→ℓ^p} = ‖T^S(·σ)‖`, applied
/// through the cube structure.
struct Normalized<'a> {
    view: TwoWeight<'a>,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl<'a> Normalized<'a> {
    fn new(view: TwoWeight<'a>, p: f64, pp: f64) -> Self {
        let m = view.layout.masses();
        let row = m.iter().zip(view.u).map(|(m, u)| (m * u).powf(1.0 / p)).collect();
        let col = m.iter().zip(view.sigma).map(|(m, s)| (m * s).powf(1.0 / pp)).collect();
        Self { view, row, col }
    }

    fn forward(&self, y: &[f64]) -> Vec<f64> {
        cube_apply(&self.view, &self.col, y, &self.row)
    }

    fn backward(&self, z: &[f64]) -> Vec<f64> {
        cube_apply(&self.view, &self.row, z, &self.col)
    }

    /// `f` with `y_j = (σ_j m_j)^{1/p} f_j`.
    fn to_function(&self, y: &[f64], p: f64) -> Vec<f64> {
        let m = self.view.layout.masses();
        y.iter()
            .zip(m)
            .zip(self.view.sigma)
            .map(|((y, m), s)| {
                let w = (m * s).powf(1.0 / p);
                if w > 0.0 {
                    y / w
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn lp(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongNorm {
    /// `‖T^S(fσ)‖/‖f‖` at the iteration's final `f`.
    pub estimate: f64,
    /// Schur-test bound certified by the final iterate.
    pub upper: f64,
    /// Best ratio among random test functions.
    pub random_lower: f64,
    /// `(estimate − random_lower)/estimate`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Extremal function, per atom.
    pub extremal: Vec<f64>,
}

/// Operator norm of `T^S(·σ) : L^p(σ) → L^p(u)` by Boyd's nonlinear power
/// iteration `y ← (Mᵀ(My)^{p−1})^{p'−1}`. At any positive `y`, Hölder's
/// inequality gives `‖M‖^p ≤ max_j (Mᵀ(My)^{p−1})_j / y_j^{p−1}`, which
/// is tight at the fixed point.
pub fn strong_norm(view: &TwoWeight, p: f64, seed: u64) -> Result<StrongNorm> {
    let pp = check_p(p)?;
    let n = view.layout.len();
    let op = Normalized::new(*view, p, pp);
    let random_lower = random_search(&op, p, seed);
    if view.family.is_empty() || n == 0 {
        return Ok(StrongNorm {
            estimate: 0.0,
            upper: 0.0,
            random_lower,
            gap: 0.0,
            iterations: 0,
            converged: true,
            extremal: vec![0.0; n],
        });
    }
    let mut y: Vec<f64> = op.col.iter().map(|&c| if c > 0.0 { 1.0 } else { 0.0 }).collect();
    let s = lp(&y, p);
    y.iter_mut().for_each(|v| *v /= s);
    let (mut estimate, mut upper) = (0.0, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    let mut best_y = y.clone();
    while iterations < MAX_ITER {
        iterations += 1;
        let z = op.forward(&y);
        let value = lp(&z, p);
        let zp: Vec<f64> = z.iter().map(|v| v.powf(p - 1.0)).collect();
        let back = op.backward(&zp);
        let bound = back
            .iter()
            .zip(&y)
            .filter(|(b, _)| **b > 0.0)
            .map(|(b, y)| b / y.powf(p - 1.0))
            .fold(0.0, f64::max)
            .powf(1.0 / p);
        if value > estimate {
            estimate = value;
            best_y.clone_from(&y);
        }
        upper = upper.min(bound);
        if upper - estimate <= TOLERANCE * estimate {
            converged = true;
            break;
        }
        let mut next: Vec<f64> = back.iter().map(|v| v.powf(pp - 1.0)).collect();
        let s = lp(&next, p);
        if !(s > 0.0) {
            break;
        }
        next.iter_mut().for_each(|v| *v /= s);
        y = next;
    }
    let gap = if estimate > 0.0 {
        (estimate - random_lower) / estimate
    } else {
        0.0
    };
    Ok(StrongNorm {
        estimate,
        upper,
        random_lower,
        gap,
        iterations,
        converged,
        extremal: op.to_function(&best_y, p),
    })
}

/// Random nonnegative test vectors: dense, sparse, and indicators of
/// family cubes.
fn random_tests(n: usize, view: &TwoWeight, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        let v: Vec<f64> = match t % 3 {
            0 => (0..n).map(|_| rng.gen::<f64>()).collect(),
            1 => (0..n)
                .map(|_| if rng.gen_bool(0.2) { rng.gen::<f64>() } else { 0.0 })
                .collect(),
            _ => {
                let mut v = vec![0.0; n];
                if let Some(m) = view.family.members.choose(rng) {
                    v[view.layout.range(m.cube)].fill(1.0);
                }
                v
            }
        };
        out.push(v);
    }
    out
}

fn random_search(op: &Normalized, p: f64, seed: u64) -> f64 {
    let n = op.row.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tests(n, &op.view, &mut rng, RANDOM_TRIALS)
        .into_iter()
        .map(|y| {
            let d = lp(&y, p);
            if d > 0.0 {
                lp(&op.forward(&y), p) / d
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakNorm {
    /// `sup_f sup_λ λ·u{T^S(fσ) > λ}^{1/p} / ‖f‖_{L^p(σ)}` over the test set.
    pub value: f64,
    /// The strong-type ratio over the same test set.
    pub strong_on_tests: f64,
    pub tests: usize,
}

/// `sup_λ λ·u{z > λ}^{1/p}`; with finitely many levels the supremum is the
/// limit from below at some level `v`, where it equals `v·u{z ≥ v}^{1/p}`.
pub fn weak_functional(view: &TwoWeight, z: &[f64], p: f64) -> f64 {
    let mut order: Vec<usize> = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
    let masses = view.layout.masses();
    let mut mass = 0.0;
    let mut best = 0.0f64;
    let mut k = 0;
    while k < order.len() {
        let level = z[order[k]];
        while k < order.len() && z[order[k]] == level {
            mass += view.u[order[k]] * masses[order[k]];
            k += 1;
        }
        best = best.max(level * mass.powf(1.0 / p));
    }
    best
}

/// Weak-type norm over random functions, indicators of random unions of
/// atoms and of family cubes, and any `extra` functions supplied.
pub fn weak_norm(view: &TwoWeight, p: f64, seed: u64, extra: &[Vec<f64>]) -> Result<WeakNorm> {
    check_p(p)?;
    let n = view.layout.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests = random_tests(n, view, &mut rng, RANDOM_TRIALS);
    for _ in 0..RANDOM_TRIALS / 4 {
        let keep = rng.gen_range(0.05..0.6);
        tests.push((0..n).map(|_| if rng.gen_bool(keep) { 1.0 } else { 0.0 }).collect());
    }
    tests.extend(extra.iter().cloned());
    let (mut value, mut strong) = (0.0f64, 0.0f64);
    for f in &tests {
        let norm = weighted_norm(view, view.sigma, f, p);
        if !(norm > 0.0) {
            continue;
        }
        let z = apply(view, f);
        value = value.max(weak_functional(view, &z, p) / norm);
        strong = strong.max(weighted_norm(view, view.u, &z, p) / norm);
    }
    Ok(WeakNorm {
        value,
        strong_on_tests: strong,
        tests: tests.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Testing {
    pub forward: f64,
    pub dual: f64,
}

fn testing_one(view: &TwoWeight, p: f64) -> f64 {
    let n = view.layout.len();
    let mut best = 0.0f64;
    for m in &view.family.members {
        let r = view.layout.range(m.cube);
        let mut chi = vec![0.0; n];
        chi[r.clone()].fill(1.0);
        let sigma_q = view.layout.integral(view.sigma, r.clone());
        if !(sigma_q > 0.0) {
            continue;
        }
        let mut z = apply(view, &chi);
        for (i, v) in z.iter_mut().enumerate() {
            if !r.contains(&i) {
                *v = 0.0;
            }
        }
        best = best.max(weighted_norm(view, view.u, &z, p) / sigma_q.powf(1.0 / p));
    }
    best
}

/// `sup_{Q∈S} ‖χ_Q T^S(χ_Q σ)‖_{L^p(u)} / σ(Q)^{1/p}` and the same with
/// `(u, p)` and `(σ, p')` exchanged.
pub fn testing_constants(view: &TwoWeight, p: f64) -> Result<Testing> {
    let pp = check_p(p)?;
    Ok(Testing {
        forward: testing_one(view, p),
        dual: testing_one(&view.swapped(), pp),
    })
}
