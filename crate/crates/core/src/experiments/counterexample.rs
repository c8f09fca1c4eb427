//! Weights on the line that satisfy both separated bump conditions for
//! `A = B = t² log(e+t)²` but not the double bump condition.
//!
//! Block `n ≥ 2` sits at offset `e^n`: `σ = 1` on `(e^n, e^n+1)` and
//! `u = K_n` on `(e^n+n−1, e^n+n)` with `K_n = n² log(e+n)^{-3}`. Offsets
//! are kept symbolic, as the block index, and every computation runs in the
//! block's local coordinates: past `n ≈ 36` a unit interval at `e^n` is no
//! longer resolved by 64-bit floats.
//!
//! With `p = 2` the bumps reduce to `‖u‖_Φ‖σ‖_Φ` (double), `‖u‖_Φ‖σ‖_1` and
//! `‖u‖_1‖σ‖_Φ` (separated), for `Φ(t) = t log(e+t)²`.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::orlicz::{average_pieces, luxemburg, orlicz_norm};
use crate::step::{Interval, StepFunction};
use crate::young::YoungFunction;

/// Largest block index placed at a global float offset in the cross-check.
pub const GLOBAL_MAX: u32 = 30;
/// Largest right block for cross-block intervals scanned piece by piece;
/// beyond it a closed-form bound is used.
pub const CROSS_MAX: u32 = 40;

pub fn k_n(n: u32) -> f64 {
    let n = n as f64;
    n * n / (E + n).ln().powi(3)
}

/// `Φ(t) = t log(e+t)²`.
pub fn phi() -> YoungFunction {
    YoungFunction::power_log(1.0, 2.0).expect("valid Young function")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub n: u32,
    pub k: f64,
}

impl Block {
    /// `σ`-support in local coordinates.
    pub fn sigma_support(&self) -> Interval {
        Interval { lo: 0.0, hi: 1.0 }
    }

    /// `u`-support in local coordinates.
    pub fn u_support(&self) -> Interval {
        let n = self.n as f64;
        Interval { lo: n - 1.0, hi: n }
    }

    /// `Q_n = (0, n)` in local coordinates.
    pub fn window(&self) -> Interval {
        Interval {
            lo: 0.0,
            hi: self.n as f64,
        }
    }

    pub fn u(&self) -> StepFunction {
        StepFunction::constant_on(self.u_support(), self.k).expect("positive block height")
    }

    pub fn sigma(&self) -> StepFunction {
        StepFunction::indicator(self.sigma_support())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n_max: u32,
    /// Blocks `2..=n_max`; block `n` has global offset `e^n`.
    pub blocks: Vec<Block>,
}

/// `e^{n+1} − e^n − n`, the empty stretch between the end of block `n` and
/// the start of block `n+1`.
pub fn gap(n: u32) -> f64 {
    let n = n as f64;
    n.exp() * (E - 1.0) - n
}

pub fn build(n_max: u32) -> Result<Counterexample> {
    if n_max < 2 {
        return Err(parameter(format!("n_max must be at least 2, got {n_max}")));
    }
    let blocks: Vec<Block> = (2..=n_max).map(|n| Block { n, k: k_n(n) }).collect();
    if let Some(n) = (2..=n_max).find(|&n| !(gap(n) > 0.0)) {
        return Err(Error::Invariant(format!("blocks {n} and {} overlap", n + 1)));
    }
    Ok(Counterexample { n_max, blocks })
}

impl Counterexample {
    pub fn block(&self, n: u32) -> Option<&Block> {
        n.checked_sub(2).and_then(|i| self.blocks.get(i as usize))
    }

    /// `u` and `σ` at global float offsets, for blocks up to `n_hi`.
    pub fn global(&self, n_hi: u32) -> Result<(StepFunction, StepFunction)> {
        if n_hi > GLOBAL_MAX.min(self.n_max) {
            return Err(parameter(format!(
                "global coordinates are limited to n <= {}",
                GLOBAL_MAX.min(self.n_max)
            )));
        }
        let mut u = StepFunction::zero();
        let mut s = StepFunction::zero();
        for b in self.blocks.iter().filter(|b| b.n <= n_hi) {
            let off = (b.n as f64).exp();
            u = u.add(&b.u().translate(off));
            s = s.add(&b.sigma().translate(off));
        }
        Ok((u, s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoublePoint {
    pub n: u32,
    pub u_norm: f64,
    pub sigma_norm: f64,
    /// `‖u‖_{Φ,Q_n}‖σ‖_{Φ,Q_n}`.
    pub product: f64,
    /// `product / log(e+n)`.
    pub normalized: f64,
    /// Same product with the blocks at global float offsets (`n ≤ 30`).
    pub global: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleScan {
    pub points: Vec<DoublePoint>,
    /// `max/min` of the normalized series.
    pub band: f64,
    /// Product at the largest `n` over the product at `n = 4`.
    pub growth: f64,
    /// Largest relative gap between local and global products.
    pub global_gap: f64,
}

impl DoubleScan {
    pub const CSV_HEADER: &'static str = "n,product,product_over_log,global_product";

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for p in &self.points {
            let g = p.global.map(|g| format!("{g:.16e}")).unwrap_or_default();
            out.push_str(&format!("{},{:.16e},{:.16e},{g}\n", p.n, p.product, p.normalized));
        }
        out
    }
}

/// The double-bump product on `Q_n` for every block, and for `n ≤ 30` the
/// same product with the blocks placed at their global offsets.
pub fn scan_double(ce: &Counterexample) -> Result<DoubleScan> {
    let phi = phi();
    let global = if ce.n_max >= 2 {
        Some(ce.global(GLOBAL_MAX.min(ce.n_max))?)
    } else {
        None
    };
    let points: Vec<DoublePoint> = ce
        .blocks
        .par_iter()
        .map(|b| {
            let q = b.window();
            let u_norm = orlicz_norm(&b.u(), &[q], &phi)?;
            let sigma_norm = orlicz_norm(&b.sigma(), &[q], &phi)?;
            let product = u_norm * sigma_norm;
            let global = match &global {
                Some((u, s)) if b.n <= GLOBAL_MAX => {
                    let q = q.translate((b.n as f64).exp());
                    Some(orlicz_norm(u, &[q], &phi)? * orlicz_norm(s, &[q], &phi)?)
                }
                _ => None,
            };
            Ok(DoublePoint {
                n: b.n,
                u_norm,
                sigma_norm,
                product,
                normalized: product / (E + b.n as f64).ln(),
                global,
            })
        })
        .collect::<Result<_>>()?;
    let mut normalized: Vec<f64> = points.iter().map(|p| p.normalized).collect();
    normalized.extend(points.iter().filter_map(|p| p.global.map(|g| g / (E + p.n as f64).ln())));
    let lo = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = normalized.iter().copied().fold(0.0, f64::max);
    let at4 = points.iter().find(|p| p.n == 4).map(|p| p.product);
    let last = points.last().map(|p| p.product);
    let growth = match (at4, last) {
        (Some(a), Some(b)) => b / a,
        _ => f64::NAN,
    };
    let global_gap = points
        .iter()
        .filter_map(|p| p.global.map(|g| (g - p.product).abs() / p.product))
        .fold(0.0, f64::max);
    Ok(DoubleScan {
        points,
        band: hi / lo,
        growth,
        global_gap,
    })
}

/// `Q_n` in closed form: `‖σ₀‖_{Φ,(0,n)} = 1/s` and `‖u₀‖_{Φ,(0,n)} = K_n/s`
/// where `Φ(s) = n`, so the product is `K_n/s²`.
pub fn double_closed_form(n: u32) -> Result<f64> {
    let s = phi().inverse(n as f64)?;
    Ok(k_n(n) / (s * s))
}

/// The three cases of the boundedness argument, for an interval `Q` with
/// `N = ⌈|Q|⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Only one block is touched, and it has index below `N + 2`.
    Single,
    /// Some touched block has index `≥ N + 2`.
    Far,
    /// Several blocks, all with index below `N + 2`.
    Long,
}

/// An interval from local point `lo` of block `first` to local point `hi`
/// of block `last`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub first: u32,
    pub lo: f64,
    pub last: u32,
    pub hi: f64,
}

impl Span {
    pub fn len(&self) -> f64 {
        if self.first == self.last {
            self.hi - self.lo
        } else {
            ((self.last as f64).exp() - (self.first as f64).exp()) + (self.hi - self.lo)
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.len() > 0.0)
    }

    pub fn regime(&self) -> Regime {
        let big_n = self.len().ceil();
        if self.last as f64 >= big_n + 2.0 {
            Regime::Far
        } else if self.first == self.last {
            Regime::Single
        } else {
            Regime::Long
        }
    }

    /// Lengths of `u`- and `σ`-support inside the span, per block.
    fn overlaps(&self, ce: &Counterexample) -> (Vec<(f64, f64)>, f64) {
        let mut u = Vec::new();
        let mut s = 0.0;
        for n in self.first..=self.last {
            let b = ce.block(n).expect("span within the layout");
            let lo = if n == self.first { self.lo } else { f64::NEG_INFINITY };
            let hi = if n == self.last { self.hi } else { f64::INFINITY };
            let clip = |iv: Interval| (iv.hi.min(hi) - iv.lo.max(lo)).max(0.0);
            let lu = clip(b.u_support());
            if lu > 0.0 {
                u.push((lu, b.k));
            }
            s += clip(b.sigma_support());
        }
        (u, s)
    }
}

/// `(‖u‖_{Φ,Q}, ‖u‖_{1,Q}, ‖σ‖_{Φ,Q}, ‖σ‖_{1,Q})`.
pub fn span_norms(ce: &Counterexample, span: &Span, phi: &YoungFunction) -> Result<[f64; 4]> {
    let len = span.len();
    let (u, s) = span.overlaps(ce);
    let mut u_pieces = u.clone();
    let covered: f64 = u.iter().map(|p| p.0).sum();
    if len > covered {
        u_pieces.push((len - covered, 0.0));
    }
    let s_pieces: Vec<(f64, f64)> = [(s, 1.0), ((len - s).max(0.0), 0.0)]
        .into_iter()
        .filter(|p| p.0 > 0.0)
        .collect();
    Ok([
        luxemburg(&u_pieces, phi)?,
        average_pieces(&u_pieces)?,
        luxemburg(&s_pieces, phi)?,
        average_pieces(&s_pieces)?,
    ])
}

/// Per right block `n`: the largest separated products over spans ending in
/// block `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatedPoint {
    pub n: u32,
    /// `sup ‖u‖_{Φ,Q}‖σ‖_{1,Q}`.
    pub a: f64,
    /// `sup ‖u‖_{1,Q}‖σ‖_{Φ,Q}`.
    pub b: f64,
    /// Sup over spans inside block `n` alone.
    pub single_a: f64,
    pub single_b: f64,
    /// Whether `a`, `b` include the closed-form bound for long spans.
    pub bounded_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatedScan {
    pub points: Vec<SeparatedPoint>,
    /// `(regime, spans scanned)`.
    pub regimes: Vec<(Regime, usize)>,
    /// Largest `‖u‖_{Φ,Q}/(log(N)^{5/2}/N^{1/2})` over long spans.
    pub long_u_ratio: f64,
    /// Largest `‖σ‖_{1,Q}/(log(N)/N)` over long spans.
    pub long_sigma_ratio: f64,
    /// Largest product over far spans (zero by the support argument).
    pub far_max: f64,
    /// Closed-form bound `K_e·e/(0.6·e^e)` at the first unscanned `e`.
    pub tail_bound: f64,
    /// Overall sup of each mode for refinement levels `1..=m`.
    pub refinement: Vec<(u32, f64, f64)>,
}

impl SeparatedScan {
    pub const CSV_HEADER: &'static str = "n,separated_a,separated_b,single_a,single_b,running_a,running_b";

    /// `max_{k ≤ n}` of each series.
    pub fn running(&self) -> Vec<(u32, f64, f64)> {
        let (mut ra, mut rb) = (0.0f64, 0.0f64);
        self.points
            .iter()
            .map(|p| {
                ra = ra.max(p.a);
                rb = rb.max(p.b);
                (p.n, ra, rb)
            })
            .collect()
    }

    /// `sup_{k ≥ n}` of each series.
    pub fn tail_sup(&self, n: u32) -> (f64, f64) {
        self.points
            .iter()
            .filter(|p| p.n >= n)
            .fold((0.0f64, 0.0f64), |(a, b), p| (a.max(p.a), b.max(p.b)))
    }

    /// Running sup at `n` (or the last point below it).
    pub fn running_at(&self, n: u32) -> (f64, f64) {
        self.running()
            .into_iter()
            .take_while(|r| r.0 <= n)
            .last()
            .map_or((0.0, 0.0), |r| (r.1, r.2))
    }

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (p, r) in self.points.iter().zip(self.running()) {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                p.n, p.a, p.b, p.single_a, p.single_b, r.1, r.2
            ));
        }
        out
    }
}

/// Closed-form bound on both separated products for spans whose last block
/// is `e > CROSS_MAX`: the `Φ`-norms are at most the sup norms (`Φ(1) > 1`),
/// `u ≤ K_e`, each weight has support at most `e` inside the span, and the
/// span is longer than `e^e − e^{e−1} − e > 0.6·e^e`.
pub fn long_span_bound(e: u32) -> f64 {
    k_n(e) * e as f64 / (0.6 * (e as f64).exp())
}

/// Left endpoints of spans starting in block `n`: the support starts and
/// `2^m − 1` interior points of each support. Moving an endpoint across a
/// stretch where both weights vanish only changes `|Q|`, and shrinking `Q`
/// raises every norm involved, so endpoints in the empty stretches are never
/// needed.
fn starts(n: u32, m: u32) -> Vec<f64> {
    let parts = 1u32 << m;
    let nf = n as f64;
    let mut v: Vec<f64> = (0..parts).map(|j| j as f64 / parts as f64).collect();
    v.extend((0..parts).map(|j| nf - 1.0 + j as f64 / parts as f64));
    v
}

/// Right endpoints of spans ending in block `n`, as in [`starts`].
fn ends(n: u32, m: u32) -> Vec<f64> {
    let parts = 1u32 << m;
    let nf = n as f64;
    let mut v: Vec<f64> = (1..=parts).map(|j| j as f64 / parts as f64).collect();
    v.extend((1..=parts).map(|j| nf - 1.0 + j as f64 / parts as f64));
    v
}

/// Scans spans inside one block (endpoints refined `m_single` times) and
/// spans across blocks (refined `m_cross` times) with last block up to
/// `CROSS_MAX`.
pub fn scan_separated(ce: &Counterexample, m_single: u32, m_cross: u32) -> Result<SeparatedScan> {
    let phi = phi();
    let eval = |span: &Span| -> Result<(f64, f64, Regime, [f64; 4])> {
        let v = span_norms(ce, span, &phi)?;
        Ok((v[0] * v[3], v[1] * v[2], span.regime(), v))
    };
    // single-block spans, per refinement level
    let mut refinement = Vec::new();
    let mut single = Vec::new();
    for m in 1..=m_single {
        let per_block: Vec<(f64, f64, Vec<(Regime, f64)>)> = ce
            .blocks
            .par_iter()
            .map(|b| {
                let (mut sa, mut sb) = (0.0f64, 0.0f64);
                let mut regimes = Vec::new();
                for lo in starts(b.n, m) {
                    for hi in ends(b.n, m).into_iter().filter(|&hi| hi > lo) {
                        let span = Span { first: b.n, lo, last: b.n, hi };
                        let (a, bb, r, _) = eval(&span)?;
                        sa = sa.max(a);
                        sb = sb.max(bb);
                        regimes.push((r, a.max(bb)));
                    }
                }
                Ok((sa, sb, regimes))
            })
            .collect::<Result<_>>()?;
        let sa = per_block.iter().map(|x| x.0).fold(0.0, f64::max);
        let sb = per_block.iter().map(|x| x.1).fold(0.0, f64::max);
        refinement.push((m, sa, sb));
        if m == m_single {
            single = per_block;
        }
    }
    let mut counts = std::collections::BTreeMap::new();
    let mut far_max = 0.0f64;
    for (_, _, regs) in &single {
        for &(r, v) in regs {
            *counts.entry(r).or_insert(0usize) += 1;
            if r == Regime::Far {
                far_max = far_max.max(v);
            }
        }
    }
    // cross-block spans
    let last_cross = CROSS_MAX.min(ce.n_max);
    let pairs: Vec<(u32, u32)> = (3..=last_cross)
        .flat_map(|e| (2..e).map(move |s| (s, e)))
        .collect();
    struct Cross {
        e: u32,
        a: f64,
        b: f64,
        regimes: Vec<Regime>,
        far: f64,
        long_u: f64,
        long_s: f64,
    }
    let cross: Vec<Cross> = pairs
        .par_iter()
        .map(|&(s, e)| {
            let mut c = Cross { e, a: 0.0, b: 0.0, regimes: Vec::new(), far: 0.0, long_u: 0.0, long_s: 0.0 };
            for lo in starts(s, m_cross) {
                for hi in ends(e, m_cross) {
                    let span = Span { first: s, lo, last: e, hi };
                    let (a, b, r, v) = eval(&span)?;
                    c.a = c.a.max(a);
                    c.b = c.b.max(b);
                    c.regimes.push(r);
                    match r {
                        Regime::Far => c.far = c.far.max(a.max(b)),
                        Regime::Long => {
                            let big_n = span.len().ceil();
                            let l = big_n.ln();
                            c.long_u = c.long_u.max(v[0] / (l.powf(2.5) / big_n.sqrt()));
                            c.long_s = c.long_s.max(v[3] / (l / big_n));
                        }
                        Regime::Single => {}
                    }
                }
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let (mut long_u, mut long_s) = (0.0f64, 0.0f64);
    let mut points: Vec<SeparatedPoint> = ce
        .blocks
        .iter()
        .zip(&single)
        .map(|(b, s)| SeparatedPoint {
            n: b.n,
            a: s.0,
            b: s.1,
            single_a: s.0,
            single_b: s.1,
            bounded_tail: false,
        })
        .collect();
    for c in cross {
        let p = &mut points[(c.e - 2) as usize];
        p.a = p.a.max(c.a);
        p.b = p.b.max(c.b);
        for r in c.regimes {
            *counts.entry(r).or_insert(0) += 1;
        }
        far_max = far_max.max(c.far);
        long_u = long_u.max(c.long_u);
        long_s = long_s.max(c.long_s);
    }
    for p in points.iter_mut().filter(|p| p.n > CROSS_MAX) {
        let bound = long_span_bound(p.n);
        p.a = p.a.max(bound);
        p.b = p.b.max(bound);
        p.bounded_tail = true;
    }
    Ok(SeparatedScan {
        points,
        regimes: counts.into_iter().collect(),
        long_u_ratio: long_u,
        long_sigma_ratio: long_s,
        far_max,
        tail_bound: long_span_bound(CROSS_MAX + 1),
        refinement,
    })
}

/// Default refinement levels: `2^3` parts per support inside one block,
/// `2^2` for spans across blocks.
pub const M_SINGLE: u32 = 3;
pub const M_CROSS: u32 = 2;
