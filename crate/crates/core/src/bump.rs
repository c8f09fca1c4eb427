//! Double and separated bump constants over interval and dyadic families,
//! and the comparison between ball and dyadic suprema.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::Layout;
use crate::error::{domain, Error, Result};
use crate::grid::{DyadicGrid, Space};
use crate::orlicz::{lp_average, luxemburg};
use crate::step::{merge_edges, Interval, StepFunction};
use crate::young::YoungFunction;

pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Weights `u, σ` on a window, floored at `τ` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub u: StepFunction,
    pub sigma: StepFunction,
    pub window: Interval,
    pub tau: f64,
}

impl WeightPair {
    pub fn new(u: StepFunction, sigma: StepFunction, window: Interval, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(domain(format!("weight floor must be positive, got {tau}")));
        }
        for (name, w) in [("u", &u), ("sigma", &sigma)] {
            if !w.max_value().is_finite() {
                return Err(Error::Input(format!("weight {name} is not bounded")));
            }
            if w.is_zero() {
                return Err(Error::DegenerateSet(format!("weight {name} vanishes identically")));
            }
        }
        Ok(Self {
            u: u.floored(tau, &window).simplified(),
            sigma: sigma.floored(tau, &window).simplified(),
            window,
            tau,
        })
    }

    pub fn constant(window: Interval, u: f64, sigma: f64) -> Result<Self> {
        Self::new(
            StepFunction::constant_on(window, u)?,
            StepFunction::constant_on(window, sigma)?,
            window,
            DEFAULT_FLOOR,
        )
    }

    /// Roles of `u` and `σ` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u: self.sigma.clone(),
            sigma: self.u.clone(),
            window: self.window,
            tau: self.tau,
        }
    }

    pub fn translate(&self, by: f64) -> Self {
        Self {
            u: self.u.translate(by),
            sigma: self.sigma.translate(by),
            window: self.window.translate(by),
            tau: self.tau,
        }
    }

    pub fn scale_u(&self, c: f64) -> Result<Self> {
        Ok(Self {
            u: self.u.scale(c)?,
            ..self.clone()
        })
    }

    /// All breakpoints of both weights inside the window, plus its ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let inside = |b: &&f64| self.window.lo <= **b && **b <= self.window.hi;
        let a: Vec<f64> = self.u.breakpoints().iter().filter(inside).copied().collect();
        let b: Vec<f64> = self.sigma.breakpoints().iter().filter(inside).copied().collect();
        merge_edges(&merge_edges(&a, &b), &[self.window.lo, self.window.hi])
    }
}

/// The sets a bump constant is maximized over.
#[derive(Debug, Clone)]
pub enum ScanFamily<'a> {
    /// Every cube of a line grid.
    Grid(&'a DyadicGrid),
    /// Every interval whose endpoints lie on the weights' breakpoints after
    /// `m` dyadic refinements of each gap.
    Intervals { m: u32 },
    Explicit(Vec<Interval>),
}

impl ScanFamily<'_> {
    pub fn describe(&self) -> String {
        match self {
            ScanFamily::Grid(g) => format!("grid shift={} k={}..{}", g.shift.unwrap_or(f64::NAN), g.k_min, g.k_max),
            ScanFamily::Intervals { m } => format!("breakpoint intervals m={m}"),
            ScanFamily::Explicit(v) => format!("{} explicit intervals", v.len()),
        }
    }

    pub fn intervals(&self, pair: &WeightPair) -> Result<Vec<Interval>> {
        match self {
            ScanFamily::Grid(g) => {
                if !matches!(g.space, Space::Line { .. }) {
                    return Err(Error::Input("interval scans need a line grid".into()));
                }
                Ok(g.cubes.iter().filter_map(|c| c.interval()).collect())
            }
            ScanFamily::Intervals { m } => Ok(breakpoint_intervals(&pair.breakpoints(), *m)),
            ScanFamily::Explicit(v) => Ok(v.clone()),
        }
    }
}

/// Endpoints refined `m` times, then every pair.
pub fn breakpoint_intervals(breakpoints: &[f64], m: u32) -> Vec<Interval> {
    let mut ends = Vec::new();
    let parts = 1u32 << m;
    for w in breakpoints.windows(2) {
        for j in 0..parts {
            ends.push(w[0] + (w[1] - w[0]) * j as f64 / parts as f64);
        }
    }
    if let Some(&last) = breakpoints.last() {
        ends.push(last);
    }
    ends.dedup();
    let mut out = Vec::with_capacity(ends.len() * ends.len() / 2);
    for i in 0..ends.len() {
        for j in (i + 1)..ends.len() {
            out.push(Interval {
                lo: ends[i],
                hi: ends[j],
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpKind {
    Double,
    SeparatedA,
    SeparatedB,
}

impl BumpKind {
    pub fn name(self) -> &'static str {
        match self {
            BumpKind::Double => "double",
            BumpKind::SeparatedA => "separated-A",
            BumpKind::SeparatedB => "separated-B",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Extremal {
    Interval { lo: f64, hi: f64 },
    Cube { id: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpReport {
    pub kind: BumpKind,
    pub value: f64,
    pub divergent: bool,
    pub extremal: Option<Extremal>,
    pub family: String,
    /// Members scanned, excluding null sets.
    pub count: usize,
}

impl BumpReport {
    pub const CSV_HEADER: &'static str = "kind,value,divergent,extremal_lo,extremal_hi,family,count";

    pub fn csv_row(&self) -> String {
        let (lo, hi) = match &self.extremal {
            Some(Extremal::Interval { lo, hi }) => (format!("{lo:.16e}"), format!("{hi:.16e}")),
            Some(Extremal::Cube { id }) => (format!("cube:{id}"), String::new()),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{:.16e},{},{},{},\"{}\",{}",
            self.kind.name(),
            self.value,
            self.divergent,
            lo,
            hi,
            self.family,
            self.count
        )
    }
}

/// How one weight is measured on a set: a Luxemburg norm of `w^e`, or a
/// plain `L^r` average of `w^e`.
#[derive(Debug, Clone)]
pub enum Gauge {
    Orlicz { a: YoungFunction, exponent: f64 },
    Average { r: f64, exponent: f64 },
}

impl Gauge {
    fn measure(&self, pieces: &[(f64, f64)]) -> Result<f64> {
        let (Gauge::Orlicz { exponent: e, .. } | Gauge::Average { exponent: e, .. }) = self;
        let raised: Vec<(f64, f64)> = pieces
            .iter()
            .map(|&(m, v)| (m, if v == 0.0 { 0.0 } else { v.powf(*e) }))
            .collect();
        match self {
            Gauge::Orlicz { a, .. } => luxemburg(&raised, a),
            Gauge::Average { r, .. } => lp_average(&raised, *r),
        }
    }
}

fn check_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("p must exceed 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `max_Q G_u(u, Q)·G_σ(σ, Q)` over the interval family.
pub fn scan(
    pair: &WeightPair,
    gu: &Gauge,
    gs: &Gauge,
    family: &ScanFamily,
    kind: BumpKind,
) -> Result<BumpReport> {
    let sets = family.intervals(pair)?;
    let values: Vec<Option<(f64, Interval)>> = sets
        .par_iter()
        .map(|q| {
            if !(q.len() > 0.0) {
                return Ok(None);
            }
            let a = gu.measure(&pair.u.pieces(q))?;
            let b = gs.measure(&pair.sigma.pieces(q))?;
            Ok(Some((a * b, *q)))
        })
        .collect::<Result<_>>()?;
    summarize(values.into_iter().flatten(), kind, family.describe(), |q| Extremal::Interval {
        lo: q.lo,
        hi: q.hi,
    })
}

fn summarize<T>(
    values: impl Iterator<Item = (f64, T)>,
    kind: BumpKind,
    family: String,
    extremal: impl Fn(T) -> Extremal,
) -> Result<BumpReport> {
    let mut best: Option<(f64, T)> = None;
    let mut count = 0;
    for (v, q) in values {
        count += 1;
        // the first maximizer in family order wins ties
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, q));
        }
    }
    let Some((value, q)) = best else {
        return Err(Error::DegenerateSet("scan family has no set of positive measure".into()));
    };
    Ok(BumpReport {
        kind,
        value,
        divergent: !value.is_finite(),
        extremal: Some(extremal(q)),
        family,
        count,
    })
}

/// `max_Q ‖u^{1/p}‖_{A,Q}·‖σ^{1/p'}‖_{B,Q}`.
pub fn bump_double(
    pair: &WeightPair,
    a: &YoungFunction,
    b: &YoungFunction,
    p: f64,
    family: &ScanFamily,
) -> Result<BumpReport> {
    let pp = check_p(p)?;
    scan(
        pair,
        &Gauge::Orlicz { a: a.clone(), exponent: 1.0 / p },
        &Gauge::Orlicz { a: b.clone(), exponent: 1.0 / pp },
        family,
        BumpKind::Double,
    )
}

/// `max_Q ‖u^{1/p}‖_{A,Q}·‖σ^{1/p'}‖_{p',Q}`. The dual constant
/// `[σ,u]_{B,p'}` is `bump_separated(&pair.swapped(), B, p', family)`.
pub fn bump_separated(pair: &WeightPair, a: &YoungFunction, p: f64, family: &ScanFamily) -> Result<BumpReport> {
    let pp = check_p(p)?;
    scan(
        pair,
        &Gauge::Orlicz { a: a.clone(), exponent: 1.0 / p },
        &Gauge::Average { r: pp, exponent: 1.0 / pp },
        family,
        BumpKind::SeparatedA,
    )
}

/// Weights given per atom of a grid layout (finite spaces or resolved line
/// data).
#[derive(Debug, Clone)]
pub struct AtomWeights<'a> {
    pub layout: &'a Layout,
    pub u: &'a [f64],
    pub sigma: &'a [f64],
}

/// Bump scan over the cubes of `grid` with atom weights.
pub fn scan_cubes(
    w: &AtomWeights,
    grid: &DyadicGrid,
    gu: &Gauge,
    gs: &Gauge,
    kind: BumpKind,
) -> Result<BumpReport> {
    let values: Vec<(f64, usize)> = (0..grid.cubes.len())
        .into_par_iter()
        .map(|id| {
            let r = w.layout.range(id);
            let a = gu.measure(&w.layout.pieces(w.u, r.clone()))?;
            let b = gs.measure(&w.layout.pieces(w.sigma, r))?;
            Ok((a * b, id))
        })
        .collect::<Result<_>>()?;
    summarize(values.into_iter(), kind, format!("{} grid cubes", grid.cubes.len()), |id| {
        Extremal::Cube { id }
    })
}

/// A series flagged divergent: the last value at least twice the first,
/// reached by a nondecreasing trend.
pub fn divergence_trend(values: &[f64]) -> bool {
    let (Some(first), Some(last)) = (values.first(), values.last()) else {
        return false;
    };
    last >= &(2.0 * first) && values.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub ball_sup: f64,
    pub dyadic_sup: f64,
    /// `ball_sup / dyadic_sup`.
    pub ball_over_dyadic: f64,
    /// `dyadic_sup / ball_sup`.
    pub dyadic_over_ball: f64,
    /// Worst `|Q|/|B|` over balls `B`, for the best cube `Q ⊇ B` in any grid.
    pub cube_over_ball: f64,
    /// Worst `|B|/|Q|` over cubes `Q`, for the smallest family ball `B ⊇ Q`.
    pub ball_over_cube: f64,
    /// Band `C*` predicted for both ratios.
    pub c_star: f64,
}

/// Separated bump over balls against its supremum over the cubes of a
/// grid family.
///
/// A ball inside a cube `Q` with `|Q| ≤ c|B|` has `‖f‖_{A,B} ≤ c‖f‖_{A,Q}`
/// by convexity and `‖g‖_{p',B} ≤ c^{1/p'}‖g‖_{p',Q}`, so each ratio is at
/// most `c^{1+1/p'}` for the corresponding containment constant `c`.
pub fn ball_dyadic_equivalence(
    pair: &WeightPair,
    a: &YoungFunction,
    p: f64,
    grids: &[DyadicGrid],
    balls: &[Interval],
) -> Result<Equivalence> {
    let pp = check_p(p)?;
    if balls.is_empty() || grids.is_empty() {
        return Err(Error::DegenerateSet("need at least one ball and one grid".into()));
    }
    let ball_sup = bump_separated(pair, a, p, &ScanFamily::Explicit(balls.to_vec()))?.value;
    let mut dyadic_sup = 0.0f64;
    for g in grids {
        dyadic_sup = dyadic_sup.max(bump_separated(pair, a, p, &ScanFamily::Grid(g))?.value);
    }
    let mut cube_over_ball = 0.0f64;
    for b in balls {
        let best = grids
            .iter()
            .filter_map(|g| smallest_cube_containing(g, b))
            .fold(f64::INFINITY, f64::min);
        cube_over_ball = cube_over_ball.max(best / b.len());
    }
    let mut ball_over_cube = 0.0f64;
    for g in grids {
        for c in &g.cubes {
            let q = c.interval().unwrap();
            let best = balls
                .iter()
                .filter(|b| b.contains_interval(&q))
                .map(|b| b.len())
                .fold(f64::INFINITY, f64::min);
            ball_over_cube = ball_over_cube.max(best / q.len());
        }
    }
    let c_star = cube_over_ball.max(ball_over_cube).powf(1.0 + 1.0 / pp);
    Ok(Equivalence {
        ball_sup,
        dyadic_sup,
        ball_over_dyadic: ball_sup / dyadic_sup,
        dyadic_over_ball: dyadic_sup / ball_sup,
        cube_over_ball,
        ball_over_cube,
        c_star,
    })
}

/// Length of the smallest cube of a line grid containing `b`.
fn smallest_cube_containing(g: &DyadicGrid, b: &Interval) -> Option<f64> {
    let mut best = None;
    let mut level: Vec<usize> = g.top().to_vec();
    while let Some(&id) = level
        .iter()
        .find(|&&id| g.cube(id).interval().map_or(false, |q| q.contains_interval(b)))
    {
        best = Some(g.cube_measure(id));
        level = g.cube(id).children.clone();
    }
    best
}
