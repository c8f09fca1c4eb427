//! Dyadic grids: shifted dyadic intervals on the line and net-based grids on
//! finite spaces, with a checker for the five grid axioms.
//!
//! Generation `k` has side length `η^k`; larger `k` is finer. On the line a
//! generation-`k` cube is `[shift + m·2^-k, shift + (m+1)·2^-k)`, so `[0,1)`
//! is a generation-0 cube.
//!
//! The sandwich axiom is measured in the scale-free form
//! `B(x_c, c_in·η^k) ⊆ Q ⊆ B(x_c, c_out·η^k)`; the grid's declared `C` must
//! dominate `c_out`, and the ratio `c_out/c_in` is what the experiments use.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::space::FiniteSpace;
use crate::step::Interval;

const MAX_LINE_DEPTH: i32 = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Center {
    Line { x: f64 },
    Point { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Members {
    Interval { lo: f64, hi: f64 },
    Points { indices: Vec<usize> },
}

/// A finite union of half-open intervals, or a subset of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasurableSet {
    Intervals { intervals: Vec<Interval> },
    Points { indices: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub id: usize,
    pub generation: i32,
    pub center: Center,
    pub members: Members,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Cube {
    pub fn interval(&self) -> Option<Interval> {
        match self.members {
            Members::Interval { lo, hi } => Some(Interval { lo, hi }),
            Members::Points { .. } => None,
        }
    }

    pub fn points(&self) -> Option<&[usize]> {
        match &self.members {
            Members::Points { indices } => Some(indices),
            Members::Interval { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConstants {
    pub c: f64,
    pub eta: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Line { window: Interval },
    Finite { space: Arc<FiniteSpace> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub space: Space,
    pub shift: Option<f64>,
    pub k_min: i32,
    pub k_max: i32,
    pub constants: GridConstants,
    pub generations: Vec<Vec<usize>>,
    pub cubes: Vec<Cube>,
}

impl DyadicGrid {
    pub fn cube(&self, id: usize) -> &Cube {
        &self.cubes[id]
    }

    /// Cube ids of generation `k`.
    pub fn generation(&self, k: i32) -> &[usize] {
        if k < self.k_min || k > self.k_max {
            return &[];
        }
        &self.generations[(k - self.k_min) as usize]
    }

    pub fn top(&self) -> &[usize] {
        self.generation(self.k_min)
    }

    pub fn finest(&self) -> &[usize] {
        self.generation(self.k_max)
    }

    pub fn is_line(&self) -> bool {
        matches!(self.space, Space::Line { .. })
    }

    pub fn finite_space(&self) -> Option<&FiniteSpace> {
        match &self.space {
            Space::Finite { space } => Some(space),
            Space::Line { .. } => None,
        }
    }

    /// `η^k`.
    pub fn scale(&self, k: i32) -> f64 {
        self.constants.eta.powi(k)
    }

    pub fn cube_measure(&self, id: usize) -> f64 {
        match &self.cubes[id].members {
            Members::Interval { lo, hi } => hi - lo,
            Members::Points { indices } => self.finite_space().map_or(0.0, |s| s.measure(indices)),
        }
    }

    pub fn measure(&self, set: &MeasurableSet) -> f64 {
        match set {
            MeasurableSet::Intervals { intervals } => intervals.iter().map(Interval::len).sum(),
            MeasurableSet::Points { indices } => {
                self.finite_space().map_or(0.0, |s| s.measure(indices))
            }
        }
    }

    /// Union of the top-generation cubes on the line.
    pub fn line_extent(&self) -> Option<Interval> {
        let tops: Vec<Interval> = self.top().iter().filter_map(|&i| self.cubes[i].interval()).collect();
        let lo = tops.iter().map(|c| c.lo).fold(f64::INFINITY, f64::min);
        let hi = tops.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
        (lo < hi).then_some(Interval { lo, hi })
    }

    /// The finest-generation cube containing `x` (line grids).
    pub fn locate(&self, x: f64) -> Option<usize> {
        let fine = self.finest();
        let i = fine.partition_point(|&id| self.cubes[id].interval().map_or(false, |c| c.hi <= x));
        fine.get(i)
            .copied()
            .filter(|&id| self.cubes[id].interval().map_or(false, |c| c.contains(x)))
    }

    /// Chain of ancestors from `id` up to the top, starting with `id`.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(p) = self.cubes[cur].parent {
            chain.push(p);
            cur = p;
        }
        chain
    }

    /// `λQ = B(x_c(Q), λ·C·η^k)`: an interval on the line, a point set on a
    /// finite space. The line ball is returned half-open, which differs from
    /// the open ball by a null set.
    pub fn dilate(&self, id: usize, lambda: f64) -> Result<MeasurableSet> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(parameter(format!("dilation factor must be >= 1, got {lambda}")));
        }
        let cube = &self.cubes[id];
        let r = lambda * self.constants.c * self.scale(cube.generation);
        match (&cube.center, &self.space) {
            (Center::Line { x }, _) => Ok(MeasurableSet::Intervals {
                intervals: vec![Interval {
                    lo: x - r,
                    hi: x + r,
                }],
            }),
            (Center::Point { index }, Space::Finite { space }) => Ok(MeasurableSet::Points {
                indices: space.ball(*index, r),
            }),
            (Center::Point { .. }, Space::Line { .. }) => {
                Err(Error::Input("point center in a line grid".into()))
            }
        }
    }
}

/// Shifted dyadic intervals over generations `k_min..=k_max`; the top
/// generation is the set of cubes meeting `window`.
pub fn line_grid(shift: f64, k_min: i32, k_max: i32, window: Interval) -> Result<DyadicGrid> {
    if k_min > k_max {
        return Err(parameter(format!("k_min = {k_min} exceeds k_max = {k_max}")));
    }
    if k_max - k_min > MAX_LINE_DEPTH {
        return Err(parameter(format!("at most {MAX_LINE_DEPTH} generations below the top")));
    }
    if !shift.is_finite() {
        return Err(parameter("shift must be finite"));
    }
    if !(window.lo < window.hi) || !window.lo.is_finite() || !window.hi.is_finite() {
        return Err(Error::DegenerateSet("grid window is empty".into()));
    }
    let h = 0.5f64.powi(k_min);
    let m_lo = ((window.lo - shift) / h).floor() as i64;
    let m_hi = ((window.hi - shift) / h).ceil() as i64;
    let mut cubes: Vec<Cube> = Vec::new();
    let mut generations: Vec<Vec<usize>> = Vec::new();
    let mut top = Vec::new();
    for m in m_lo..m_hi {
        let lo = shift + m as f64 * h;
        let hi = shift + (m + 1) as f64 * h;
        if hi <= window.lo || lo >= window.hi {
            continue;
        }
        top.push(push_line_cube(&mut cubes, k_min, m, h, shift, None));
    }
    generations.push(top);
    for k in (k_min + 1)..=k_max {
        let hk = 0.5f64.powi(k);
        let mut next = Vec::new();
        for &pid in generations.last().unwrap() {
            let Members::Interval { lo, .. } = cubes[pid].members else { unreachable!() };
            // index of the first child: lo = shift + m_parent·2h
            let m_parent = ((lo - shift) / (2.0 * hk)).round() as i64;
            for j in 0..2 {
                let id = push_line_cube(&mut cubes, k, 2 * m_parent + j, hk, shift, Some(pid));
                cubes[pid].children.push(id);
                next.push(id);
            }
        }
        generations.push(next);
    }
    Ok(DyadicGrid {
        space: Space::Line { window },
        shift: Some(shift),
        k_min,
        k_max,
        constants: GridConstants {
            c: 1.0,
            eta: 0.5,
            epsilon: 0.5,
        },
        generations,
        cubes,
    })
}

fn push_line_cube(
    cubes: &mut Vec<Cube>,
    k: i32,
    m: i64,
    h: f64,
    shift: f64,
    parent: Option<usize>,
) -> usize {
    let lo = shift + m as f64 * h;
    let hi = shift + (m + 1) as f64 * h;
    let id = cubes.len();
    cubes.push(Cube {
        id,
        generation: k,
        center: Center::Line { x: 0.5 * (lo + hi) },
        members: Members::Interval { lo, hi },
        parent,
        children: Vec::new(),
    });
    id
}

/// The three shifts `{0, 1/3, 2/3}` used as an adjacent family on the line.
pub fn line_shift_family(k_min: i32, k_max: i32, window: Interval) -> Result<Vec<DyadicGrid>> {
    [0.0, 1.0 / 3.0, 2.0 / 3.0]
        .iter()
        .map(|&s| line_grid(s, k_min, k_max, window))
        .collect()
}

/// Smallest `k ≥ k_min` such that every point of `edges` is an endpoint of a
/// generation-`k` cube of the grid with this shift, or `None` if there is
/// none within the depth limit.
pub fn resolving_depth(shift: f64, k_min: i32, edges: &[f64]) -> Option<i32> {
    (k_min..=k_min + MAX_LINE_DEPTH).find(|&k| {
        let h = 0.5f64.powi(k);
        edges.iter().all(|&e| shift + ((e - shift) / h).round() * h == e)
    })
}

/// Net-based grid on a finite space.
///
/// Nets are nested and built greedily in a seeded random order. Generation
/// `k_min` is the whole space; generation `k_max` consists of singletons.
/// Every point of a parent cube goes to the nearest child center lying in
/// that parent (ties to the lowest index). The declared `C` is the measured
/// outer factor, inflated by `1e-9` so the outer ball is strict.
pub fn finite_grid(space: Arc<FiniteSpace>, eta: Option<f64>, seed: u64) -> Result<DyadicGrid> {
    let k = space.quasi_constant();
    let max_eta = 1.0 / (8.0 * k * k);
    let eta = eta.unwrap_or(1.0 / (12.0 * k * k * k));
    if !(eta > 0.0 && eta <= max_eta) {
        return Err(parameter(format!("eta must lie in (0, {max_eta}], got {eta}")));
    }
    let n = space.len();
    let (k_min, k_max) = if n == 1 {
        (0, 1)
    } else {
        let diam = space.diameter();
        let sep = space.min_separation();
        let mut k_min = 0;
        while eta.powi(k_min) <= diam {
            k_min -= 1;
        }
        while eta.powi(k_min + 1) > diam {
            k_min += 1;
        }
        let mut k_max = k_min;
        while eta.powi(k_max) > sep {
            k_max += 1;
        }
        (k_min, k_max)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut cubes: Vec<Cube> = Vec::new();
    let mut generations: Vec<Vec<usize>> = Vec::new();
    let mut net: BTreeSet<usize> = BTreeSet::new();
    for k in k_min..=k_max {
        let r = eta.powi(k);
        for &x in &order {
            if !net.contains(&x) && net.iter().all(|&c| space.dist(x, c) >= r) {
                net.insert(x);
            }
        }
        let mut gen_ids = Vec::new();
        if k == k_min {
            let center = *net.iter().next().unwrap();
            let id = cubes.len();
            cubes.push(Cube {
                id,
                generation: k,
                center: Center::Point { index: center },
                members: Members::Points {
                    indices: (0..n).collect(),
                },
                parent: None,
                children: Vec::new(),
            });
            gen_ids.push(id);
        } else {
            for &pid in generations.last().unwrap() {
                let members: Vec<usize> = cubes[pid].points().unwrap().to_vec();
                let centers: Vec<usize> = members.iter().copied().filter(|x| net.contains(x)).collect();
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
                for &y in &members {
                    let mut best = 0;
                    for (ci, &c) in centers.iter().enumerate() {
                        if space.dist(y, c) < space.dist(y, centers[best]) {
                            best = ci;
                        }
                    }
                    groups[best].push(y);
                }
                for (ci, group) in groups.into_iter().enumerate() {
                    let id = cubes.len();
                    cubes.push(Cube {
                        id,
                        generation: k,
                        center: Center::Point { index: centers[ci] },
                        members: Members::Points { indices: group },
                        parent: Some(pid),
                        children: Vec::new(),
                    });
                    cubes[pid].children.push(id);
                    gen_ids.push(id);
                }
            }
        }
        generations.push(gen_ids);
    }

    let mut grid = DyadicGrid {
        space: Space::Finite { space },
        shift: None,
        k_min,
        k_max,
        constants: GridConstants {
            c: f64::INFINITY,
            eta,
            epsilon: 0.0,
        },
        generations,
        cubes,
    };
    let report = verify_grid(&grid);
    grid.constants.c = if report.c_outer > 0.0 {
        report.c_outer * (1.0 + 1e-9)
    } else {
        1.0
    };
    grid.constants.epsilon = report.epsilon;
    Ok(grid)
}

/// Outcome of one grid axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: u8,
    pub name: String,
    pub holds: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub properties: Vec<PropertyCheck>,
    /// Smallest child-to-parent mass ratio.
    pub epsilon: f64,
    pub eta: f64,
    /// Largest inner-ball factor that works for every cube.
    pub c_inner: f64,
    /// Smallest outer-ball factor that works for every cube.
    pub c_outer: f64,
    /// `c_outer / c_inner`.
    pub sandwich: f64,
    pub declared: GridConstants,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.holds)
    }

    pub fn first_failure(&self) -> Option<&PropertyCheck> {
        self.properties.iter().find(|p| !p.holds)
    }
}

struct Checker {
    checks: Vec<PropertyCheck>,
}

impl Checker {
    fn new() -> Self {
        let names = [
            "generations partition the space",
            "cubes are nested or disjoint",
            "children exist and parents are unique",
            "child mass ratio at least epsilon",
            "inner and outer ball sandwich",
        ];
        Self {
            checks: names
                .iter()
                .enumerate()
                .map(|(i, n)| PropertyCheck {
                    property: i as u8 + 1,
                    name: n.to_string(),
                    holds: true,
                    witness: None,
                })
                .collect(),
        }
    }

    fn fail(&mut self, property: usize, witness: String) {
        let c = &mut self.checks[property - 1];
        if c.holds {
            c.holds = false;
            c.witness = Some(witness);
        }
    }
}

/// Checks the five grid axioms, reporting achieved constants and the first
/// witness of each violated property.
pub fn verify_grid(grid: &DyadicGrid) -> GridReport {
    let mut chk = Checker::new();
    let mut epsilon = f64::INFINITY;
    let mut c_inner = f64::INFINITY;
    let mut c_outer = 0.0f64;

    if grid.generations.is_empty() || grid.cubes.is_empty() {
        chk.fail(1, "grid has no cubes".into());
        return finish(grid, chk, 0.0, 0.0, f64::INFINITY);
    }
    if grid.generations.len() as i64 != (grid.k_max - grid.k_min + 1) as i64 {
        chk.fail(1, "generation table does not match k_min..=k_max".into());
    }

    // owner[g][atom] = cube id containing that atom in generation g
    let owners: Vec<Owner> = grid
        .generations
        .iter()
        .enumerate()
        .map(|(g, ids)| Owner::build(grid, g, ids, &mut chk))
        .collect();

    for (g, ids) in grid.generations.iter().enumerate() {
        let k = grid.k_min + g as i32;
        for &id in ids {
            let cube = &grid.cubes[id];
            if cube.generation != k {
                chk.fail(3, format!("cube {id} is listed in generation {k} but records {}", cube.generation));
            }
            // (2)/(3): containment in a unique parent
            if g > 0 {
                match owners[g - 1].container(grid, id) {
                    Ok(parent) => {
                        if cube.parent != Some(parent) {
                            chk.fail(3, format!("cube {id} lies in {parent} but records parent {:?}", cube.parent));
                        }
                        let mp = grid.cube_measure(parent);
                        if mp > 0.0 {
                            epsilon = epsilon.min(grid.cube_measure(id) / mp);
                        }
                    }
                    Err(w) => chk.fail(2, w),
                }
            } else if cube.parent.is_some() {
                chk.fail(3, format!("top cube {id} records a parent"));
            }
            if g + 1 < grid.generations.len() {
                let kids = &cube.children;
                if kids.is_empty() {
                    chk.fail(3, format!("cube {id} has no child"));
                }
                for &kid in kids {
                    if grid.cubes.get(kid).and_then(|c| c.parent) != Some(id) {
                        chk.fail(3, format!("child {kid} of cube {id} does not point back"));
                    }
                }
            }
            // (5)
            match sandwich(grid, cube) {
                Ok((inner, outer)) => {
                    let s = grid.scale(k);
                    c_inner = c_inner.min(inner / s);
                    c_outer = c_outer.max(outer / s);
                    if !(inner > 0.0) {
                        chk.fail(5, format!("cube {id} contains no ball around its center"));
                    }
                }
                Err(w) => chk.fail(5, w),
            }
        }
    }

    if epsilon == f64::INFINITY {
        epsilon = 1.0;
    }
    if !(epsilon > 0.0) || epsilon < grid.constants.epsilon * (1.0 - 1e-12) {
        chk.fail(4, format!("measured epsilon {epsilon} is below the declared {}", grid.constants.epsilon));
    }
    // strict outer inclusion: every member lies at distance < C·η^k
    if !(c_outer < grid.constants.c) {
        chk.fail(5, format!("outer factor {c_outer} is not below the declared C = {}", grid.constants.c));
    }
    finish(grid, chk, epsilon, c_inner, c_outer)
}

fn finish(grid: &DyadicGrid, chk: Checker, epsilon: f64, c_inner: f64, c_outer: f64) -> GridReport {
    GridReport {
        properties: chk.checks,
        epsilon,
        eta: grid.constants.eta,
        c_inner,
        c_outer,
        sandwich: c_outer / c_inner,
        declared: grid.constants,
    }
}

/// Per-generation ownership map used to test partition and nesting.
enum Owner {
    Line(Vec<(f64, f64, usize)>),
    Points(Vec<Option<usize>>),
}

impl Owner {
    fn build(grid: &DyadicGrid, g: usize, ids: &[usize], chk: &mut Checker) -> Owner {
        let k = grid.k_min + g as i32;
        match &grid.space {
            Space::Line { .. } => {
                let mut spans: Vec<(f64, f64, usize)> = ids
                    .iter()
                    .filter_map(|&id| grid.cubes[id].interval().map(|c| (c.lo, c.hi, id)))
                    .collect();
                spans.sort_by(|a, b| a.0.total_cmp(&b.0));
                for w in spans.windows(2) {
                    if w[0].1 != w[1].0 {
                        chk.fail(
                            1,
                            format!(
                                "generation {k}: cubes {} and {} leave a gap or overlap at {}",
                                w[0].2, w[1].2, w[0].1
                            ),
                        );
                    }
                }
                if g > 0 {
                    if let Some(extent) = grid.line_extent() {
                        let lo = spans.first().map_or(f64::NAN, |s| s.0);
                        let hi = spans.last().map_or(f64::NAN, |s| s.1);
                        if lo != extent.lo || hi != extent.hi {
                            chk.fail(1, format!("generation {k} covers [{lo}, {hi}) instead of the top extent"));
                        }
                    }
                }
                Owner::Line(spans)
            }
            Space::Finite { space } => {
                let mut owner = vec![None; space.len()];
                for &id in ids {
                    for &x in grid.cubes[id].points().unwrap_or(&[]) {
                        if let Some(prev) = owner[x] {
                            chk.fail(1, format!("generation {k}: point {x} lies in cubes {prev} and {id}"));
                        }
                        owner[x] = Some(id);
                    }
                }
                if let Some(x) = owner.iter().position(Option::is_none) {
                    chk.fail(1, format!("generation {k}: point {x} lies in no cube"));
                }
                Owner::Points(owner)
            }
        }
    }

    /// The unique cube of this generation containing cube `id`.
    fn container(&self, grid: &DyadicGrid, id: usize) -> std::result::Result<usize, String> {
        let cube = &grid.cubes[id];
        match (self, &cube.members) {
            (Owner::Line(spans), Members::Interval { lo, hi }) => {
                let i = spans.partition_point(|s| s.1 <= *lo);
                match spans.get(i) {
                    Some(&(a, b, pid)) if a <= *lo && *hi <= b => Ok(pid),
                    Some(&(_, _, pid)) => Err(format!("cube {id} = [{lo}, {hi}) straddles cube {pid}")),
                    None => Err(format!("cube {id} = [{lo}, {hi}) lies outside the coarser generation")),
                }
            }
            (Owner::Points(owner), Members::Points { indices }) => {
                let mut found: Option<usize> = None;
                for &x in indices {
                    match (owner.get(x).copied().flatten(), found) {
                        (None, _) => return Err(format!("point {x} of cube {id} has no coarser cube")),
                        (Some(o), None) => found = Some(o),
                        (Some(o), Some(f)) if o != f => {
                            return Err(format!("cube {id} meets both cube {f} and cube {o} (point {x})"))
                        }
                        _ => {}
                    }
                }
                found.ok_or_else(|| format!("cube {id} is empty"))
            }
            _ => Err(format!("cube {id} has members of the wrong kind")),
        }
    }
}

/// `(r_in, r_out)`: largest open ball around the center inside the cube and
/// the largest center-to-member distance.
fn sandwich(grid: &DyadicGrid, cube: &Cube) -> std::result::Result<(f64, f64), String> {
    match (&cube.center, &cube.members, &grid.space) {
        (Center::Line { x }, Members::Interval { lo, hi }, _) => {
            if !(lo <= x && x < hi) {
                return Err(format!("center {x} of cube {} lies outside it", cube.id));
            }
            Ok(((x - lo).min(hi - x), (x - lo).max(hi - x)))
        }
        (Center::Point { index }, Members::Points { indices }, Space::Finite { space }) => {
            if !indices.contains(index) {
                return Err(format!("center {index} of cube {} lies outside it", cube.id));
            }
            let inside: BTreeSet<usize> = indices.iter().copied().collect();
            let outer = indices.iter().map(|&y| space.dist(*index, y)).fold(0.0, f64::max);
            let inner = (0..space.len())
                .filter(|y| !inside.contains(y))
                .map(|y| space.dist(*index, y))
                .fold(f64::INFINITY, f64::min);
            Ok((inner, outer))
        }
        _ => Err(format!("cube {} mixes line and point data", cube.id)),
    }
}

/// Largest over `balls` of the best `μ(Q)/μ(B)` achievable with a cube
/// `Q ⊇ B` from one of `grids` (line grids). `None` if some ball is not
/// contained in any cube.
pub fn line_ball_cover_constant(grids: &[DyadicGrid], balls: &[Interval]) -> Option<f64> {
    let mut worst = 1.0f64;
    for b in balls {
        let mut best = f64::INFINITY;
        for g in grids {
            for c in &g.cubes {
                if let Some(iv) = c.interval() {
                    if iv.contains_interval(b) {
                        best = best.min(iv.len() / b.len());
                    }
                }
            }
        }
        if !best.is_finite() {
            return None;
        }
        worst = worst.max(best);
    }
    Some(worst)
}

/// Multi-seed family of finite grids and the resulting ball-cover constant:
/// the largest over balls `B(x, r)` of the best ratio `μ(Q)/μ(B)` with
/// `B ⊆ Q` over the family.
pub fn finite_grid_family(
    space: Arc<FiniteSpace>,
    eta: Option<f64>,
    seeds: &[u64],
) -> Result<(Vec<DyadicGrid>, f64)> {
    let grids: Vec<DyadicGrid> = seeds
        .iter()
        .map(|&s| finite_grid(space.clone(), eta, s))
        .collect::<Result<_>>()?;
    let n = space.len();
    let mut worst = 1.0f64;
    for x in 0..n {
        let mut radii: Vec<f64> = (0..n).map(|y| space.dist(x, y)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for w in radii.windows(2) {
            // every distinct open ball around x: radius just above w[0]
            let ball = space.ball(x, w[1]);
            let mb = space.measure(&ball);
            let mut best = f64::INFINITY;
            for g in &grids {
                for c in &g.cubes {
                    let pts = c.points().unwrap_or(&[]);
                    if ball.iter().all(|y| pts.binary_search(y).is_ok()) {
                        best = best.min(space.measure(pts) / mb);
                    }
                }
            }
            worst = worst.max(best);
        }
    }
    Ok((grids, worst))
}
