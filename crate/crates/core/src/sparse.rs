//! Stopping cubes, sparse families, the good/bad decomposition and sparse
//! operators over a dyadic grid.
//!
//! Every routine works on atom values over a [`Layout`]; the `StepFunction`
//! entry points build the layout and convert back.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::Layout;
use crate::error::{parameter, Error, Result};
use crate::grid::{DyadicGrid, MeasurableSet};
use crate::step::{merge_edges, Interval, StepFunction};
use crate::young::YoungFunction;

/// Relative slack for comparisons that hold exactly in real arithmetic.
const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMember {
    pub cube: usize,
    pub generation: i32,
    /// Exponent `k` of the level `a^k` that selected the cube, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i32>,
    pub witness: MeasurableSet,
}

/// A family of cubes with pairwise disjoint witnesses `E(Q) ⊆ Q` and
/// `μ(Q) ≤ 2μ(E(Q))`. The invariants are checked when the family is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub members: Vec<SparseMember>,
}

impl SparseFamily {
    pub fn new(grid: &DyadicGrid, members: Vec<SparseMember>) -> Result<Self> {
        let family = Self { members };
        family.check(grid)?;
        Ok(family)
    }

    pub fn empty() -> Self {
        Self { members: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cubes(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.cube).collect()
    }

    /// `min μ(E(Q))/μ(Q)` over the family (1 when empty).
    pub fn sparseness(&self, grid: &DyadicGrid) -> f64 {
        self.members
            .iter()
            .map(|m| grid.measure(&m.witness) / grid.cube_measure(m.cube))
            .fold(1.0, f64::min)
    }

    pub fn check(&self, grid: &DyadicGrid) -> Result<()> {
        let mut seen_cube = vec![false; grid.cubes.len()];
        let mut intervals: Vec<(Interval, usize)> = Vec::new();
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for m in &self.members {
            if m.cube >= grid.cubes.len() {
                return Err(Error::Invariant(format!("unknown cube {}", m.cube)));
            }
            if std::mem::replace(&mut seen_cube[m.cube], true) {
                return Err(Error::Invariant(format!("cube {} listed twice", m.cube)));
            }
            let cube = grid.cube(m.cube);
            match (&m.witness, cube.interval(), cube.points()) {
                (MeasurableSet::Intervals { intervals: ws }, Some(q), _) => {
                    for w in ws {
                        if !(w.lo < w.hi) || !q.contains_interval(w) {
                            return Err(Error::Invariant(format!(
                                "witness [{}, {}) is not inside cube {}",
                                w.lo, w.hi, m.cube
                            )));
                        }
                        intervals.push((*w, m.cube));
                    }
                }
                (MeasurableSet::Points { indices }, None, Some(pts)) => {
                    let mut sorted = pts.to_vec();
                    sorted.sort_unstable();
                    for i in indices {
                        if sorted.binary_search(i).is_err() {
                            return Err(Error::Invariant(format!(
                                "witness point {i} is not in cube {}",
                                m.cube
                            )));
                        }
                        if let Some(other) = owner.insert(*i, m.cube) {
                            return Err(Error::Invariant(format!(
                                "witnesses of cubes {other} and {} share point {i}",
                                m.cube
                            )));
                        }
                    }
                }
                _ => return Err(Error::Invariant("witness kind does not match the grid".into())),
            }
            let (mq, me) = (grid.cube_measure(m.cube), grid.measure(&m.witness));
            if mq > 2.0 * me * (1.0 + SLACK) {
                return Err(Error::Invariant(format!(
                    "cube {} is not 2-sparse: μ(Q) = {mq}, μ(E) = {me}",
                    m.cube
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.lo.total_cmp(&b.0.lo));
        for w in intervals.windows(2) {
            if w[1].0.lo < w[0].0.hi {
                return Err(Error::Invariant(format!(
                    "witnesses of cubes {} and {} overlap",
                    w[0].1, w[1].1
                )));
            }
        }
        Ok(())
    }
}

/// `‖f‖_{Φ,Q}` for every cube, indexed by cube id.
pub fn cube_norms(layout: &Layout, grid: &DyadicGrid, values: &[f64], phi: &YoungFunction) -> Result<Vec<f64>> {
    (0..grid.cubes.len())
        .into_par_iter()
        .map(|id| layout.norm(values, id, phi))
        .collect()
}

/// `sup_{Q ∋ x} norm(Q)` on atoms.
pub fn maximal_from_norms(layout: &Layout, grid: &DyadicGrid, norms: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; layout.len()];
    for c in &grid.cubes {
        for v in &mut out[layout.range(c.id)] {
            *v = v.max(norms[c.id]);
        }
    }
    out
}

/// `M_Φ^D f` as a step function on the grid's extent.
pub fn dyadic_maximal(f: &StepFunction, grid: &DyadicGrid, phi: &YoungFunction) -> Result<StepFunction> {
    let layout = Layout::new(grid, &[f])?;
    let values = layout.sample(f);
    let norms = cube_norms(&layout, grid, &values, phi)?;
    layout.to_step(&maximal_from_norms(&layout, grid, &norms))
}

/// `M_Φ^D f` on a finite space, per point.
pub fn dyadic_maximal_points(values: &[f64], grid: &DyadicGrid, phi: &YoungFunction) -> Result<Vec<f64>> {
    let layout = Layout::new(grid, &[])?;
    let atoms = layout.from_points(values);
    let norms = cube_norms(&layout, grid, &atoms, phi)?;
    Ok(layout.to_points(&maximal_from_norms(&layout, grid, &norms)))
}

/// Maximal cubes with `norm > λ` below `root` (the root itself included).
fn maximal_above(grid: &DyadicGrid, norms: &[f64], root: usize, lambda: f64, out: &mut Vec<usize>) {
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if norms[id] > lambda {
            out.push(id);
        } else {
            stack.extend(grid.cube(id).children.iter().rev());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingCubes {
    pub lambda: f64,
    pub cubes: Vec<usize>,
    /// `max ‖f‖_{Φ,Q_j}/λ`, 0 when there are no cubes.
    pub achieved: f64,
    /// The constant `1/ε` that bounds `achieved`.
    pub bound: f64,
}

/// Largest top-cube norm: the level below which stopping cubes are not
/// defined on a finite window.
pub fn threshold(grid: &DyadicGrid, norms: &[f64]) -> f64 {
    grid.top().iter().map(|&t| norms[t]).fold(0.0, f64::max)
}

pub fn stopping_cubes(grid: &DyadicGrid, norms: &[f64], lambda: f64) -> Result<StoppingCubes> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(parameter(format!("lambda must be positive and finite, got {lambda}")));
    }
    let t = threshold(grid, norms);
    if lambda < t {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} is below the window threshold {t}"
        )));
    }
    let mut cubes = Vec::new();
    for &top in grid.top() {
        maximal_above(grid, norms, top, lambda, &mut cubes);
    }
    let achieved = cubes.iter().map(|&q| norms[q] / lambda).fold(0.0, f64::max);
    let bound = 1.0 / grid.constants.epsilon;
    if achieved > bound * (1.0 + SLACK) {
        return Err(Error::Invariant(format!(
            "stopping cube norm ratio {achieved} exceeds 1/epsilon = {bound}"
        )));
    }
    Ok(StoppingCubes {
        lambda,
        cubes,
        achieved,
        bound,
    })
}

/// The maximal cubes with `‖f‖_{Φ,Q} > λ`.
pub fn cz_cubes(f: &StepFunction, grid: &DyadicGrid, phi: &YoungFunction, lambda: f64) -> Result<StoppingCubes> {
    let layout = Layout::new(grid, &[f])?;
    let norms = cube_norms(&layout, grid, &layout.sample(f), phi)?;
    stopping_cubes(grid, &norms, lambda)
}

/// Smallest `k` with `a^k ≥ t`.
fn first_level(a: f64, t: f64) -> i32 {
    let mut k = (t.ln() / a.ln()).ceil() as i32;
    while a.powi(k) < t {
        k += 1;
    }
    while a.powi(k - 1) >= t {
        k -= 1;
    }
    k
}

/// Sparse family from the stopping cubes at levels `a^k`, run separately in
/// each top cube `T` from the first level `a^k ≥ ‖f‖_{Φ,T}`. A cube selected
/// at several levels is kept once, with its witness taken at the highest.
pub fn levels_family(
    layout: &Layout,
    grid: &DyadicGrid,
    norms: &[f64],
    a: f64,
) -> Result<SparseFamily> {
    let eps = grid.constants.epsilon;
    if !(a > 2.0 / eps) || !a.is_finite() {
        return Err(parameter(format!("level base must exceed 2/epsilon = {}, got {a}", 2.0 / eps)));
    }
    let mut members = Vec::new();
    for &top in grid.top() {
        let t = norms[top];
        if t == 0.0 {
            continue;
        }
        let mut level_of: BTreeMap<usize, i32> = BTreeMap::new();
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let k0 = first_level(a, t);
        loop {
            let k = k0 + levels.len() as i32;
            let mut found = Vec::new();
            maximal_above(grid, norms, top, a.powi(k), &mut found);
            if found.is_empty() {
                break;
            }
            for &q in &found {
                level_of.insert(q, k);
            }
            levels.push(found);
        }
        // atoms of Ω_k, per level
        let range = layout.range(top);
        let mut depth = vec![i32::MIN; range.len()];
        for (j, cubes) in levels.iter().enumerate() {
            for &q in cubes {
                for d in &mut depth[shift_range(layout.range(q), range.start)] {
                    *d = k0 + j as i32;
                }
            }
        }
        for (&q, &k) in &level_of {
            let atoms: Vec<usize> = layout
                .range(q)
                .filter(|&i| depth[i - range.start] <= k)
                .collect();
            members.push(SparseMember {
                cube: q,
                generation: grid.cube(q).generation,
                level: Some(k),
                witness: layout.atom_set(&atoms),
            });
        }
    }
    SparseFamily::new(grid, members)
}

fn shift_range(r: std::ops::Range<usize>, by: usize) -> std::ops::Range<usize> {
    (r.start - by)..(r.end - by)
}

/// Default level base `4/ε`.
pub fn default_base(grid: &DyadicGrid) -> f64 {
    4.0 / grid.constants.epsilon
}

pub fn sparse_from_levels(f: &StepFunction, grid: &DyadicGrid, phi: &YoungFunction, a: f64) -> Result<SparseFamily> {
    let layout = Layout::new(grid, &[f])?;
    let norms = cube_norms(&layout, grid, &layout.sample(f), phi)?;
    levels_family(&layout, grid, &norms, a)
}

/// The bad part on one stopping cube: `(f − f_Q)χ_Q` over the cube's atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadPart {
    pub cube: usize,
    pub average: f64,
    /// Index of the cube's first atom.
    pub first_atom: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzDecomposition {
    pub lambda: f64,
    pub stopping: StoppingCubes,
    /// Atom edges on the line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub bad: Vec<BadPart>,
}

impl CzDecomposition {
    pub fn g_step(&self) -> Result<StepFunction> {
        let edges = self
            .edges
            .as_ref()
            .ok_or_else(|| Error::Input("not a line decomposition".into()))?;
        Ok(StepFunction::new(edges.clone(), self.g.clone())?.simplified())
    }

    /// Signed cells `(interval, value)` of one bad part (line only).
    pub fn bad_cells(&self, j: usize) -> Vec<(Interval, f64)> {
        let (Some(e), Some(b)) = (&self.edges, self.bad.get(j)) else {
            return Vec::new();
        };
        b.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let a = b.first_atom + i;
                (Interval { lo: e[a], hi: e[a + 1] }, v)
            })
            .collect()
    }
}

/// `f = g + Σ b_j` with `g = f` off the stopping cubes and `g = f_{Q_j}` on
/// them. The finest generation must resolve `f` so that `f ≤ λ` off the cubes.
pub fn decompose(layout: &Layout, grid: &DyadicGrid, values: &[f64], lambda: f64) -> Result<CzDecomposition> {
    if !layout.resolves(grid, values) {
        return Err(Error::Coverage("the finest generation does not resolve f".into()));
    }
    let norms = cube_norms(layout, grid, values, &YoungFunction::identity())?;
    let stopping = stopping_cubes(grid, &norms, lambda)?;
    let mut g = values.to_vec();
    let mut bad = Vec::with_capacity(stopping.cubes.len());
    for &q in &stopping.cubes {
        let r = layout.range(q);
        let avg = layout.average(values, q);
        bad.push(BadPart {
            cube: q,
            average: avg,
            first_atom: r.start,
            values: values[r.clone()].iter().map(|v| v - avg).collect(),
        });
        g[r].fill(avg);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut sum = g.clone();
    for b in &bad {
        for (i, v) in b.values.iter().enumerate() {
            sum[b.first_atom + i] += v;
        }
        let mean = b
            .values
            .iter()
            .zip(&layout.masses()[b.first_atom..])
            .map(|(v, m)| v * m)
            .sum::<f64>()
            / layout.cube_mass(b.cube);
        if mean.abs() > SLACK * scale {
            return Err(Error::Invariant(format!("bad part on cube {} has mean {mean}", b.cube)));
        }
    }
    if let Some(i) = (0..values.len()).find(|&i| (sum[i] - values[i]).abs() > SLACK * scale) {
        return Err(Error::Invariant(format!("g + Σb differs from f on atom {i}")));
    }
    let cap = stopping.bound * lambda * (1.0 + SLACK);
    if let Some(i) = g.iter().position(|v| v.abs() > cap) {
        return Err(Error::Invariant(format!("|g| = {} exceeds {cap} on atom {i}", g[i])));
    }
    Ok(CzDecomposition {
        lambda,
        stopping,
        edges: layout.edges().map(<[f64]>::to_vec),
        f: values.to_vec(),
        g,
        bad,
    })
}

pub fn cz_decompose(f: &StepFunction, grid: &DyadicGrid, lambda: f64) -> Result<CzDecomposition> {
    let layout = Layout::new(grid, &[f])?;
    decompose(&layout, grid, &layout.sample(f), lambda)
}

/// `T^S f = Σ_{Q∈S} ⨍_Q f · χ_Q` on atoms.
pub fn sparse_apply_atoms(layout: &Layout, family: &SparseFamily, values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; layout.len()];
    for m in &family.members {
        let avg = layout.average(values, m.cube);
        for v in &mut out[layout.range(m.cube)] {
            *v += avg;
        }
    }
    out
}

/// `T^S f` exactly, with breakpoints at `f`'s breakpoints and the cubes'
/// endpoints.
pub fn sparse_apply(grid: &DyadicGrid, family: &SparseFamily, f: &StepFunction) -> Result<StepFunction> {
    let mut cube_edges = Vec::with_capacity(2 * family.len());
    let mut terms = Vec::with_capacity(family.len());
    for m in &family.members {
        let q = grid
            .cube(m.cube)
            .interval()
            .ok_or_else(|| Error::Input("sparse_apply on a step function needs a line grid".into()))?;
        cube_edges.push(q.lo);
        cube_edges.push(q.hi);
        terms.push((q, f.integral(&q) / q.len()));
    }
    let edges = merge_edges(&cube_edges, f.breakpoints());
    if edges.len() < 2 {
        return Ok(StepFunction::zero());
    }
    // summed cell by cell, so cells outside every cube stay exactly zero
    let mut values = vec![0.0; edges.len() - 1];
    let at = |x: f64| edges.binary_search_by(|e| e.total_cmp(&x)).unwrap();
    for (q, avg) in terms {
        for v in &mut values[at(q.lo)..at(q.hi)] {
            *v += avg;
        }
    }
    Ok(StepFunction::new(edges, values)?.simplified())
}

/// `T^S` on a finite space, per point.
pub fn sparse_apply_points(grid: &DyadicGrid, family: &SparseFamily, values: &[f64]) -> Result<Vec<f64>> {
    let layout = Layout::new(grid, &[])?;
    Ok(layout.to_points(&sparse_apply_atoms(&layout, family, &layout.from_points(values))))
}

/// Pointwise comparison of `M^D f` with `a·(T^S f + Σ_T ⨍_T f·χ_T)`, where
/// `S` is the level family and the second sum runs over the top cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub base: f64,
    pub family: SparseFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Atoms where `lhs > rhs`.
    pub violations: Vec<usize>,
    /// `max lhs/rhs` over atoms with `rhs > 0`.
    pub worst_ratio: f64,
}

pub fn dominate(layout: &Layout, grid: &DyadicGrid, values: &[f64], a: f64) -> Result<Domination> {
    let norms = cube_norms(layout, grid, values, &YoungFunction::identity())?;
    let family = levels_family(layout, grid, &norms, a)?;
    let lhs = maximal_from_norms(layout, grid, &norms);
    let mut rhs = sparse_apply_atoms(layout, &family, values);
    for &t in grid.top() {
        for v in &mut rhs[layout.range(t)] {
            *v += norms[t];
        }
    }
    rhs.iter_mut().for_each(|v| *v *= a);
    let violations: Vec<usize> = (0..lhs.len())
        .filter(|&i| lhs[i] > rhs[i] * (1.0 + SLACK))
        .collect();
    let worst_ratio = lhs
        .iter()
        .zip(&rhs)
        .filter(|(_, r)| **r > 0.0)
        .map(|(l, r)| l / r)
        .fold(0.0, f64::max);
    Ok(Domination {
        base: a,
        family,
        edges: layout.edges().map(<[f64]>::to_vec),
        lhs,
        rhs,
        violations,
        worst_ratio,
    })
}

pub fn maximal_dominated_by_sparse(f: &StepFunction, grid: &DyadicGrid, a: f64) -> Result<Domination> {
    let layout = Layout::new(grid, &[f])?;
    dominate(&layout, grid, &layout.sample(f), a)
}

/// A random sparse family: each chosen cube picks disjoint descendants up
/// to `depth` generations down, of total measure at most half its own, and
/// recurses into them. Witnesses are the cubes minus the picked descendants.
pub fn random_family(grid: &DyadicGrid, seed: u64, keep: f64, depth: i32) -> Result<SparseFamily> {
    if !(0.0..=1.0).contains(&keep) || depth < 1 {
        return Err(parameter("keep must lie in [0, 1] and depth must be at least 1"));
    }
    let layout = Layout::new(grid, &[])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::new();
    let mut stack: Vec<usize> = grid.top().to_vec();
    while let Some(q) = stack.pop() {
        let gq = grid.cube(q).generation;
        let mut candidates = Vec::new();
        let mut frontier = vec![q];
        for _ in 0..depth {
            frontier = frontier
                .iter()
                .flat_map(|&c| grid.cube(c).children.iter().copied())
                .collect();
            candidates.extend_from_slice(&frontier);
        }
        candidates.shuffle(&mut rng);
        let r = layout.range(q);
        let mut budget = 0.5 * layout.mass(r.clone());
        let mut taken = vec![false; r.len()];
        let mut picked = Vec::new();
        for c in candidates {
            let rc = shift_range(layout.range(c), r.start);
            let mc = layout.mass(layout.range(c));
            if mc == 0.0 || mc > budget || taken[rc.clone()].iter().any(|&t| t) || rng.gen::<f64>() >= keep {
                continue;
            }
            taken[rc].fill(true);
            budget -= mc;
            picked.push(c);
        }
        let atoms: Vec<usize> = r.clone().filter(|&i| !taken[i - r.start]).collect();
        members.push(SparseMember {
            cube: q,
            generation: gq,
            level: None,
            witness: layout.atom_set(&atoms),
        });
        stack.extend(picked);
    }
    SparseFamily::new(grid, members)
}
