//! Instance suites for the norm inequalities. The constants in these
//! inequalities are not explicit, so every check is a boundedness or trend
//! assertion over a suite, plus the exact identities the proofs rely on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::instances::{random_weight, Instance, TwoWeight};
use super::norms::{apply, strong_norm, testing_constants, weak_norm, weighted_norm};
use super::report::{slope, Check, NormReport, Row};
use crate::bump::{scan_cubes, AtomWeights, BumpKind, Gauge};
use crate::cells::Layout;
use crate::error::{domain, parameter, Error, Result};
use crate::grid::{line_grid, DyadicGrid};
use crate::sparse::{
    cube_norms, decompose, default_base, dominate, levels_family, maximal_from_norms, threshold, SparseFamily,
};
use crate::step::Interval;
use crate::young::YoungFunction;

/// Ceiling for ratios whose constant is not explicit. The theorems only
/// promise some finite bound, so a pinned value makes "bounded" testable.
pub const CEILING: f64 = 100.0;

const REL: f64 = 1e-9;

fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(domain(format!("p must exceed 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// `M_Φ^D` on atoms.
pub fn maximal(layout: &Layout, grid: &DyadicGrid, values: &[f64], phi: &YoungFunction) -> Result<Vec<f64>> {
    let norms = cube_norms(layout, grid, values, phi)?;
    Ok(maximal_from_norms(layout, grid, &norms))
}

fn dot(layout: &Layout, a: &[f64], b: &[f64]) -> f64 {
    layout.masses().iter().zip(a).zip(b).map(|((m, a), b)| m * a * b).sum()
}

fn finite_bp(a: &YoungFunction, p: f64, what: &str) -> Result<f64> {
    let r = a.bp_constant(p)?;
    if !r.is_finite() {
        return Err(Error::Precondition(format!("{what} is not in B_{p}")));
    }
    Ok(r.value)
}

/// Seeded line instances with depth cycling through `3..=8`.
pub fn random_suite(count: usize, seed: u64, osc: f64) -> Result<Vec<Instance>> {
    (0..count)
        .into_par_iter()
        .map(|i| Instance::random(seed + i as u64, 3 + (i / 3 % 6) as i32, osc))
        .collect()
}

/// Bump pair for the double-bump theorem: `A = t^p log(e+t)^{p−1+δ}` and
/// `B` the same with `p'`.
#[derive(Debug, Clone)]
pub struct BumpPair {
    pub a: YoungFunction,
    pub b: YoungFunction,
    pub p: f64,
}

impl BumpPair {
    pub fn log(p: f64, delta: f64) -> Result<Self> {
        let pp = conjugate_exponent(p)?;
        Ok(Self {
            a: YoungFunction::log_bump(p, delta)?,
            b: YoungFunction::log_bump(pp, delta)?,
            p,
        })
    }
}

/// Everything the double-bump bound needs that does not depend on the
/// instance.
struct DoubleSetup {
    pair: BumpPair,
    pp: f64,
    abar: YoungFunction,
    bbar: YoungFunction,
    /// `[Ā]_{B_{p'}}^{1/p'}·[B̄]_{B_p}^{1/p}`.
    factor: f64,
}

impl DoubleSetup {
    fn new(pair: BumpPair) -> Result<Self> {
        let p = pair.p;
        let pp = conjugate_exponent(p)?;
        let abar = pair.a.complementary()?;
        let bbar = pair.b.complementary()?;
        let ca = finite_bp(&abar, pp, "the complement of A")?;
        let cb = finite_bp(&bbar, p, "the complement of B")?;
        Ok(Self {
            pair,
            pp,
            abar,
            bbar,
            factor: ca.powf(1.0 / pp) * cb.powf(1.0 / p),
        })
    }
}

/// Dyadic double bump `sup_Q ‖u^{1/p}‖_{A,Q}‖σ^{1/p'}‖_{B,Q}` over all grid cubes.
pub fn dyadic_double_bump(inst: &Instance, pair: &BumpPair) -> Result<f64> {
    let pp = conjugate_exponent(pair.p)?;
    let w = AtomWeights {
        layout: &inst.layout,
        u: &inst.u,
        sigma: &inst.sigma,
    };
    Ok(scan_cubes(
        &w,
        &inst.grid,
        &Gauge::Orlicz { a: pair.a.clone(), exponent: 1.0 / pair.p },
        &Gauge::Orlicz { a: pair.b.clone(), exponent: 1.0 / pp },
        BumpKind::Double,
    )?
    .value)
}

/// Dyadic separated bump `sup_Q ‖u^{1/p}‖_{A,Q}‖σ^{1/p'}‖_{p',Q}`.
pub fn dyadic_separated_bump(view: &TwoWeight, grid: &DyadicGrid, a: &YoungFunction, p: f64) -> Result<f64> {
    let pp = conjugate_exponent(p)?;
    let w = AtomWeights {
        layout: view.layout,
        u: view.u,
        sigma: view.sigma,
    };
    Ok(scan_cubes(
        &w,
        grid,
        &Gauge::Orlicz { a: a.clone(), exponent: 1.0 / p },
        &Gauge::Average { r: pp, exponent: 1.0 / pp },
        BumpKind::SeparatedA,
    )?
    .value)
}

/// The steps of the duality argument, evaluated at the extremal `f` and
/// the dual `g = (T^S(fσ))^{p−1}/‖T^S(fσ)‖^{p−1}` with `‖g‖_{L^{p'}(u)} = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityChain {
    /// `∫ T^S(fσ)·u·g`.
    pub pairing: f64,
    /// `2 Σ_Q ⨍_Q fσ·⨍_Q ug·μ(E(Q))`.
    pub middle: f64,
    /// `8·bump·∫ M_{B̄}(fσ^{1/p})·M_{Ā}(gu^{1/p'})`.
    pub bound: f64,
}

impl DualityChain {
    pub fn holds(&self) -> bool {
        self.pairing <= self.middle * (1.0 + REL) && self.middle <= self.bound * (1.0 + REL)
    }
}

fn duality_chain(inst: &Instance, setup: &DoubleSetup, f: &[f64], bump: f64) -> Result<DualityChain> {
    let (p, pp) = (setup.pair.p, setup.pp);
    let view = inst.view();
    let l = &inst.layout;
    let z = apply(&view, f);
    let nz = weighted_norm(&view, &inst.u, &z, p);
    let g: Vec<f64> = z.iter().map(|v| (v / nz).powf(p - 1.0)).collect();
    let ug: Vec<f64> = inst.u.iter().zip(&g).map(|(u, g)| u * g).collect();
    let fs: Vec<f64> = f.iter().zip(&inst.sigma).map(|(f, s)| f * s).collect();
    let pairing = dot(l, &z, &ug);
    let middle = 2.0
        * inst
            .family
            .members
            .iter()
            .map(|m| l.average(&fs, m.cube) * l.average(&ug, m.cube) * inst.grid.measure(&m.witness))
            .sum::<f64>();
    let left: Vec<f64> = f.iter().zip(&inst.sigma).map(|(f, s)| f * s.powf(1.0 / p)).collect();
    let right: Vec<f64> = g.iter().zip(&inst.u).map(|(g, u)| g * u.powf(1.0 / pp)).collect();
    let m1 = maximal(l, &inst.grid, &left, &setup.bbar)?;
    let m2 = maximal(l, &inst.grid, &right, &setup.abar)?;
    Ok(DualityChain {
        pairing,
        middle,
        bound: 8.0 * bump * dot(l, &m1, &m2),
    })
}

/// `‖M_Φ^D f‖_p / ([Φ]_{B_p}^{1/p}‖f‖_p)` for `Φ = t^q`, against the bound
/// `(p/(p−q))^{1/q}(p−q)^{1/p}` that Doob's inequality for `M^D` on
/// `L^{p/q}` gives through `M_Φ f = (M(f^q))^{1/q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczMaximal {
    pub ratio: f64,
    pub bound: f64,
}

pub fn orlicz_maximal_ratio(layout: &Layout, grid: &DyadicGrid, f: &[f64], p: f64, q: f64) -> Result<OrliczMaximal> {
    if !(q > 1.0 && q < p) {
        return Err(parameter(format!("need 1 < q < p, got q = {q}, p = {p}")));
    }
    let phi = YoungFunction::power(q)?;
    let bp = phi.bp_constant(p)?.value;
    let m = maximal(layout, grid, f, &phi)?;
    Ok(OrliczMaximal {
        ratio: layout.lp_norm(&m, p) / (bp.powf(1.0 / p) * layout.lp_norm(f, p)),
        bound: (p / (p - q)).powf(1.0 / q) * (p - q).powf(1.0 / p),
    })
}

struct DoubleOutcome {
    row: Row,
    chain: DualityChain,
    lemma: OrliczMaximal,
    converged: bool,
}

fn double_one(index: usize, inst: &Instance, setup: &DoubleSetup) -> Result<Option<DoubleOutcome>> {
    let p = setup.pair.p;
    let bump = dyadic_double_bump(inst, &setup.pair)?;
    if !bump.is_finite() {
        return Ok(None);
    }
    let s = strong_norm(&inst.view(), p, inst.seed)?;
    let row = Row::new(index, inst.seed, inst.size(), Some(p), s.estimate, bump * setup.factor);
    let chain = duality_chain(inst, setup, &s.extremal, bump)?;
    let q = (1.0 + p) / 2.0;
    let mut lemma = OrliczMaximal { ratio: 0.0, bound: 0.0 };
    for f in [&inst.u, &inst.sigma] {
        let r = orlicz_maximal_ratio(&inst.layout, &inst.grid, f, p, q)?;
        if r.ratio / r.bound >= lemma.ratio / lemma.bound.max(f64::MIN_POSITIVE) {
            lemma = r;
        }
    }
    Ok(Some(DoubleOutcome {
        row,
        chain,
        lemma,
        converged: s.converged,
    }))
}

/// Strong norm of `T^S(·σ)` against `[u,σ]^D_{A,B,p}[Ā]_{B_{p'}}^{1/p'}[B̄]_{B_p}^{1/p}`,
/// with the duality chain and the Orlicz maximal bound checked per instance.
pub fn check_thm_double(cases: &[(Instance, BumpPair)]) -> Result<NormReport> {
    let outcomes: Vec<Option<DoubleOutcome>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (inst, pair))| double_one(i, inst, &DoubleSetup::new(pair.clone())?))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let (mut chain_ok, mut chain_worst) = (true, 0.0f64);
    let (mut lemma_ok, mut lemma_worst) = (true, 0.0f64);
    let mut unconverged = 0;
    for (i, o) in outcomes.into_iter().enumerate() {
        let Some(o) = o else {
            notes.push(format!("instance {i}: infinite double bump, skipped"));
            continue;
        };
        chain_ok &= o.chain.holds();
        chain_worst = chain_worst.max(o.chain.middle / o.chain.bound).max(o.chain.pairing / o.chain.middle);
        lemma_ok &= o.lemma.ratio <= o.lemma.bound * (1.0 + REL);
        lemma_worst = lemma_worst.max(o.lemma.ratio);
        unconverged += usize::from(!o.converged);
        rows.push(o.row);
    }
    if unconverged > 0 {
        notes.push(format!("{unconverged} strong-norm iterations stopped before the bounds met"));
    }
    let finite = rows.iter().all(|r| r.ratio.is_finite() && r.rhs > 0.0);
    let mut report = NormReport::new("double", cases.len(), rows, Vec::new());
    let trend = report.size_slope.unwrap_or(0.0);
    report.checks = vec![
        Check::new("finite ratio", finite, format!("max ratio {:.6e}", report.max_ratio)),
        Check::new("no growth with size", trend <= 0.05, format!("slope {trend:.4}")),
        Check::new("duality chain", chain_ok, format!("worst step ratio {chain_worst:.6e}")),
        Check::new("orlicz maximal bound", lemma_ok, format!("worst ratio {lemma_worst:.6e}")),
    ];
    report.notes = notes;
    Ok(report)
}

/// 50-style suite for the double-bump theorem: `p` cycles through
/// 1.5, 2, 3 and the depth through `3..=8`.
pub fn double_suite(count: usize, seed: u64, delta: f64) -> Result<Vec<(Instance, BumpPair)>> {
    const PS: [f64; 3] = [1.5, 2.0, 3.0];
    let instances = random_suite(count, seed, 1.0)?;
    instances
        .into_iter()
        .enumerate()
        .map(|(i, inst)| Ok((inst, BumpPair::log(PS[i % 3], delta)?)))
        .collect()
}

/// Largest `|T^S b_j|` off `Ω = ∪ Q_j`, over all bad parts of the
/// decomposition at `λ`. The average of `b_j` over a cube `Q` is computed
/// as `(∫_{Q∩Q_j} f − f_{Q_j}μ(Q∩Q_j))/μ(Q)`; for `Q ⊇ Q_j` this is
/// `∫_{Q_j} f − (∫_{Q_j} f/μ(Q_j))·μ(Q_j)`, which vanishes exactly whenever
/// `μ(Q_j)` is a power of two.
pub fn bad_part_leak(layout: &Layout, grid: &DyadicGrid, family: &SparseFamily, f: &[f64], lambda: f64) -> Result<f64> {
    let cz = decompose(layout, grid, f, lambda)?;
    let mut inside = vec![false; layout.len()];
    for b in &cz.bad {
        inside[layout.range(b.cube)].fill(true);
    }
    let mut worst = 0.0f64;
    for b in &cz.bad {
        let rj = layout.range(b.cube);
        let mass_j = layout.mass(rj.clone());
        let avg = layout.integral(f, rj.clone()) / mass_j;
        let mut out = vec![0.0; layout.len()];
        for m in &family.members {
            let rq = layout.range(m.cube);
            let lo = rq.start.max(rj.start);
            let hi = rq.end.min(rj.end);
            if lo >= hi {
                continue;
            }
            let c = (layout.integral(f, lo..hi) - avg * layout.mass(lo..hi)) / layout.mass(rq.clone());
            for v in &mut out[rq] {
                *v += c;
            }
        }
        for (i, v) in out.iter().enumerate() {
            if !inside[i] {
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

struct WeakOutcome {
    rows: Vec<Row>,
    /// `(ln(λ/λ*), ln ratio)` for the levels at or above the maximizing one.
    tail: Vec<(f64, f64)>,
    leak: f64,
    exact: bool,
    scale: f64,
}

fn weak11_one(index: usize, inst: &Instance, phi: &YoungFunction) -> Result<WeakOutcome> {
    let l = &inst.layout;
    let f = &inst.sigma;
    let mu = maximal(l, &inst.grid, &inst.u, phi)?;
    let denom = dot(l, f, &mu);
    let z = crate::sparse::sparse_apply_atoms(l, &inst.family, f);
    let mut order: Vec<usize> = (0..z.len()).filter(|&i| z[i] > 0.0).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]));
    let mut rows = Vec::new();
    let mut mass = 0.0;
    let mut k = 0;
    while k < order.len() {
        let level = z[order[k]];
        while k < order.len() && z[order[k]] == level {
            mass += inst.u[order[k]] * l.masses()[order[k]];
            k += 1;
        }
        rows.push(Row::new(index, inst.seed, inst.size(), Some(level), level * mass, denom));
    }
    let best = rows
        .iter()
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .map_or(0.0, |r| r.param.unwrap());
    let tail = rows
        .iter()
        .filter(|r| r.param.unwrap() >= best && r.ratio > 0.0)
        .map(|r| ((r.param.unwrap() / best).ln(), r.ratio.ln()))
        .collect();
    let norms = cube_norms(l, &inst.grid, f, &YoungFunction::identity())?;
    let t = threshold(&inst.grid, &norms);
    let levels = levels_family(l, &inst.grid, &norms, default_base(&inst.grid))?;
    let mut leak = 0.0f64;
    for family in [&inst.family, &levels] {
        for c in [1.0, 2.0, 4.0, 8.0] {
            leak = leak.max(bad_part_leak(l, &inst.grid, family, f, c * t)?);
        }
    }
    Ok(WeakOutcome {
        rows,
        tail,
        leak,
        exact: inst.grid.is_line(),
        scale: f.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

/// `λ·u{T^S f > λ} / ∫ f·M_Φ^D u` over the level sweep of each instance,
/// and the cancellation `T^S b_j = 0` off `Ω` for the bad parts of `f`.
pub fn check_thm_weak11(instances: &[Instance], phi: &YoungFunction, q: f64) -> Result<NormReport> {
    let qq = conjugate_exponent(q)?;
    let composed = YoungFunction::composed(phi.clone(), q)?;
    finite_bp(&composed.complementary()?, qq, "the complement of Φ(t^q)")?;
    let outcomes: Vec<WeakOutcome> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| weak11_one(i, inst, phi))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut tail = Vec::new();
    let (mut cancel_ok, mut leak) = (true, 0.0f64);
    for o in outcomes {
        // exact zero on line grids, where cube masses are powers of two
        cancel_ok &= if o.exact { o.leak == 0.0 } else { o.leak <= 1e-12 * o.scale };
        leak = leak.max(o.leak);
        tail.extend(o.tail);
        rows.extend(o.rows);
    }
    let mut report = NormReport::new("weak11", instances.len(), rows, Vec::new());
    let trend = slope(&tail).unwrap_or(0.0);
    report.checks = vec![
        Check::new(
            "bounded over the level sweep",
            report.max_ratio <= CEILING,
            format!("max ratio {:.6e}, ceiling {CEILING}", report.max_ratio),
        ),
        Check::new(
            "no growth above the maximizing level",
            trend <= 0.05,
            format!("slope {trend:.4}"),
        ),
        Check::new("bad parts cancel off the stopping cubes", cancel_ok, format!("largest leak {leak:e}")),
    ];
    Ok(report)
}

/// The parameters of the bump-weighted maximal bound: `ε`, `q = 1 + ε/2`,
/// `η = δ − εp` and the functions `A`, `C`, `Φ`.
#[derive(Debug, Clone)]
pub struct Lemma61 {
    pub p: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub q: f64,
    pub eta: f64,
    pub a: YoungFunction,
    pub c: YoungFunction,
    pub phi: YoungFunction,
}

impl Lemma61 {
    /// `epsilon` defaults to `δ/(2p)`.
    pub fn new(p: f64, delta: f64, epsilon: Option<f64>) -> Result<Self> {
        let pp = conjugate_exponent(p)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(parameter(format!("delta must be positive, got {delta}")));
        }
        let epsilon = epsilon.unwrap_or(delta / (2.0 * p));
        if !(epsilon > 0.0 && epsilon < delta / p) {
            return Err(parameter(format!("epsilon must lie in (0, delta/p) = (0, {}), got {epsilon}", delta / p)));
        }
        let eta = delta - epsilon * p;
        Ok(Self {
            p,
            delta,
            epsilon,
            q: 1.0 + epsilon / 2.0,
            eta,
            a: YoungFunction::log_bump(p, delta)?,
            c: YoungFunction::power_log(pp, -1.0 - (pp - 1.0) * eta)?,
            phi: YoungFunction::power_log(1.0, epsilon)?,
        })
    }

    pub fn pp(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// `t = 10^{k/4}` for `k = 0..=1200`.
pub fn holder_grid() -> Vec<f64> {
    (0..=1200).map(|k| 10f64.powf(k as f64 / 4.0)).collect()
}

/// `max A⁻¹(t)C⁻¹(t)/Φ⁻¹(t)` over the first and second halves of `grid`.
pub fn holder_halves(l: &Lemma61, grid: &[f64]) -> Result<(f64, f64)> {
    let mid = grid.len() / 2;
    let head = crate::young::holder_compatible(&l.phi, &l.a, &l.c, &grid[..mid])?;
    let tail = crate::young::holder_compatible(&l.phi, &l.a, &l.c, &grid[mid..])?;
    Ok((head, tail))
}

/// One instance of the maximal bound, for a given `f`.
pub fn lemma61_ratio(inst: &Instance, l: &Lemma61, f: &[f64], c_factor: f64) -> Result<Row> {
    let pp = l.pp();
    let view = inst.view();
    let fu: Vec<f64> = f.iter().zip(&inst.u).map(|(f, u)| f * u).collect();
    let m = maximal(&inst.layout, &inst.grid, &fu, &l.phi)?;
    let lhs = weighted_norm(&view, &inst.sigma, &m, pp);
    let sep = dyadic_separated_bump(&view, &inst.grid, &l.a, l.p)?;
    let rhs = sep * c_factor * weighted_norm(&view, &inst.u, f, pp);
    Ok(Row::new(0, inst.seed, inst.size(), None, lhs, rhs))
}

/// `‖M_Φ^D(fu)‖_{L^{p'}(σ)} / ([u,σ]^D_{A,p}[C]_{B_{p'}}^{1/p'}‖f‖_{L^{p'}(u)})`
/// over the suite, after the parameter checks.
pub fn check_lemma61(instances: &[Instance], p: f64, delta: f64, epsilon: Option<f64>) -> Result<NormReport> {
    let l = Lemma61::new(p, delta, epsilon)?;
    let pp = l.pp();
    let c_bp = finite_bp(&l.c, pp, "C")?;
    let c_factor = c_bp.powf(1.0 / pp);
    let (head, tail) = holder_halves(&l, &holder_grid())?;
    let composed = YoungFunction::composed(l.phi.clone(), l.q)?;
    let q_ok = finite_bp(&composed.complementary()?, l.q / (l.q - 1.0), "the complement of Φ(t^q)").is_ok();
    let rows: Vec<Row> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x61);
            let f: Vec<f64> = (0..inst.size()).map(|_| rng.gen_range(-1.0..=1.0f64).exp()).collect();
            let mut row = lemma61_ratio(inst, &l, &f, c_factor)?;
            row.instance = i;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut report = NormReport::new("lemma61", instances.len(), rows, Vec::new());
    report.checks = vec![
        Check::new(
            "Hölder compatibility bounded",
            head.is_finite() && tail <= head * (1.0 + 1e-6),
            format!("max {head:.6e} on t ≤ 1e150, {tail:.6e} beyond"),
        ),
        Check::new("C in B_p'", c_bp.is_finite(), format!("[C] = {c_bp:.6e}")),
        Check::new("complement of Φ(t^q) in B_q'", q_ok, format!("q = {}", l.q)),
        Check::new(
            "maximal bound",
            report.max_ratio <= CEILING,
            format!("max ratio {:.6e}, ceiling {CEILING}", report.max_ratio),
        ),
    ];
    report.notes.push(format!(
        "p = {p}, delta = {delta}, epsilon = {}, q = {}, eta = {}",
        l.epsilon, l.q, l.eta
    ));
    Ok(report)
}

/// Strong norm against weak plus dual weak norm, and the testing constants
/// against the strong norm.
pub fn check_lsut(instances: &[Instance], p: f64) -> Result<NormReport> {
    let pp = conjugate_exponent(p)?;
    let outcomes: Vec<(Row, bool, bool)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let view = inst.view();
            let s = strong_norm(&view, p, inst.seed)?;
            let d = strong_norm(&view.swapped(), pp, inst.seed)?;
            let w = weak_norm(&view, p, inst.seed, &[s.extremal.clone()])?;
            let dw = weak_norm(&view.swapped(), pp, inst.seed, &[d.extremal.clone()])?;
            let t = testing_constants(&view, p)?;
            let top = s.upper.max(s.estimate);
            let testing_ok = t.forward <= top * (1.0 + REL) && t.dual <= top * (1.0 + REL);
            let converged = (s.upper - s.estimate) <= 1e-6 * s.estimate;
            Ok((
                Row::new(i, inst.seed, inst.size(), None, s.estimate, w.value + dw.value),
                testing_ok,
                converged,
            ))
        })
        .collect::<Result<_>>()?;
    let testing_ok = outcomes.iter().all(|o| o.1);
    let converged = outcomes.iter().all(|o| o.2);
    let rows: Vec<Row> = outcomes.into_iter().map(|o| o.0).collect();
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mut report = NormReport::new("lsut", instances.len(), rows, Vec::new());
    report.checks = vec![
        Check::new("band", hi / lo <= 20.0, format!("ratios in [{lo:.6e}, {hi:.6e}], max/min {:.4}", hi / lo)),
        Check::new("testing constants below the strong norm", testing_ok, ""),
        Check::new("strong norm bounds agree", converged, "upper and lower within 1e-6"),
    ];
    Ok(report)
}

/// Random step function on `[0, 1)` on the dyadic grid of the given depth,
/// with some cells zeroed to make spikes.
fn random_step(rng: &mut ChaCha8Rng, depth: i32, osc: f64) -> Result<Vec<f64>> {
    let f = random_weight(rng, depth, osc)?;
    Ok(f.values()
        .iter()
        .map(|&v| if rng.gen_bool(0.25) { 0.0 } else { v })
        .collect())
}

fn unit_grid(depth: i32) -> Result<(DyadicGrid, Layout)> {
    let grid = line_grid(0.0, 0, depth, Interval { lo: 0.0, hi: 1.0 })?;
    let layout = Layout::new(&grid, &[])?;
    Ok((grid, layout))
}

/// Pointwise domination of `M^D f` by `a·(T^S f + Σ_T ⨍_T f·χ_T)` with the
/// level family, over `count` random `f`.
pub fn check_maximal(count: usize, seed: u64) -> Result<NormReport> {
    let rows: Vec<(Row, usize)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = seed + i as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let depth = 4 + (i % 5) as i32;
            let (grid, layout) = unit_grid(depth)?;
            let f = random_step(&mut rng, depth, 2.0)?;
            let d = dominate(&layout, &grid, &f, default_base(&grid))?;
            Ok((Row::new(i, s, layout.len(), None, d.worst_ratio, 1.0), d.violations.len()))
        })
        .collect::<Result<_>>()?;
    let violations: usize = rows.iter().map(|r| r.1).sum();
    let mut report = NormReport::new("maximal", count, rows.into_iter().map(|r| r.0).collect(), Vec::new());
    report.checks = vec![Check::new(
        "pointwise domination",
        violations == 0,
        format!("{violations} violating cells, worst lhs/rhs {:.6e}", report.max_ratio),
    )];
    Ok(report)
}

/// Calderón–Zygmund decompositions of random `(f, λ)`: reconstruction,
/// zero means, `|g| ≤ λ/ε`, and sparseness of the level families.
pub fn check_cz(count: usize, seed: u64) -> Result<NormReport> {
    struct Out {
        row: Row,
        recon: f64,
        mean: f64,
        cap_ok: bool,
        sparse_ok: bool,
    }
    let outs: Vec<Out> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = seed + i as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let depth = 4 + (i % 5) as i32;
            let (grid, layout) = unit_grid(depth)?;
            let f = random_step(&mut rng, depth, 3.0)?;
            let norms = cube_norms(&layout, &grid, &f, &YoungFunction::identity())?;
            let lambda = threshold(&grid, &norms) * rng.gen_range(1.0..8.0);
            let cz = decompose(&layout, &grid, &f, lambda)?;
            let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let mut sum = cz.g.clone();
            let mut mean = 0.0f64;
            for b in &cz.bad {
                let r = layout.range(b.cube);
                for (k, v) in b.values.iter().enumerate() {
                    sum[b.first_atom + k] += v;
                }
                let m = layout.masses()[r.clone()].iter().zip(&b.values).map(|(m, v)| m * v).sum::<f64>()
                    / layout.mass(r);
                mean = mean.max(m.abs());
            }
            let recon = sum.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            let gmax = cz.g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let family = levels_family(&layout, &grid, &norms, default_base(&grid))?;
            let sparse_ok = family.check(&grid).is_ok() && family.sparseness(&grid) >= 0.5;
            Ok(Out {
                row: Row::new(i, s, layout.len(), Some(lambda), gmax / lambda, cz.stopping.bound),
                recon,
                mean,
                cap_ok: gmax <= cz.stopping.bound * lambda * (1.0 + 1e-12),
                sparse_ok,
            })
        })
        .collect::<Result<_>>()?;
    let recon = outs.iter().map(|o| o.recon).fold(0.0, f64::max);
    let mean = outs.iter().map(|o| o.mean).fold(0.0, f64::max);
    let cap_ok = outs.iter().all(|o| o.cap_ok);
    let sparse_ok = outs.iter().all(|o| o.sparse_ok);
    let mut report = NormReport::new("cz", count, outs.into_iter().map(|o| o.row).collect(), Vec::new());
    report.checks = vec![
        Check::new("reconstruction", recon <= 1e-12, format!("max |f − g − Σb|/‖f‖∞ = {recon:e}")),
        Check::new("bad parts have mean zero", mean <= 1e-12, format!("max |mean| = {mean:e}")),
        Check::new("|g| ≤ λ/ε", cap_ok, format!("max |g|/(λ/ε) = {:.6e}", report.max_ratio)),
        Check::new("level families are 2-sparse", sparse_ok, ""),
    ];
    Ok(report)
}
