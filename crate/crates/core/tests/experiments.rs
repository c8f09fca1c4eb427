use std::f64::consts::E;

use dyadic_bumps::bump::{bump_double, ScanFamily, WeightPair};
use dyadic_bumps::cells::Layout;
use dyadic_bumps::experiments::counterexample::*;
use dyadic_bumps::experiments::hilbert::hilbert_apply;
use dyadic_bumps::experiments::instances::Instance;
use dyadic_bumps::experiments::norms::{apply, strong_norm, testing_constants, weak_norm, weighted_norm};
use dyadic_bumps::experiments::theorems::*;
use dyadic_bumps::grid::{line_grid, DyadicGrid, MeasurableSet};
use dyadic_bumps::sparse::{cube_norms, default_base, levels_family, random_family, SparseFamily, SparseMember};
use dyadic_bumps::step::{Interval, StepFunction};
use dyadic_bumps::{Error, YoungFunction};
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn top_family(grid: &DyadicGrid) -> SparseFamily {
    let id = grid.top()[0];
    let member = SparseMember {
        cube: id,
        generation: grid.cube(id).generation,
        level: None,
        witness: MeasurableSet::Intervals {
            intervals: vec![iv(0.5, 1.0)],
        },
    };
    SparseFamily::new(grid, vec![member]).unwrap()
}

/// `u = σ ≡ 1` on `[0, 1)` with the family `{[0, 1)}`.
fn unit_instance() -> Instance {
    let grid = line_grid(0.0, 0, 3, iv(0.0, 1.0)).unwrap();
    let family = top_family(&grid);
    let pair = WeightPair::constant(iv(0.0, 1.0), 1.0, 1.0).unwrap();
    Instance::line(0, grid, pair, family).unwrap()
}

#[test]
fn averaging_projection_norms() {
    let inst = unit_instance();
    let view = inst.view();
    for p in [1.5, 2.0, 3.0] {
        let s = strong_norm(&view, p, 1).unwrap();
        assert!(rel(s.estimate, 1.0) < 1e-9, "{s:?}");
        let ones = vec![1.0; inst.size()];
        let w = weak_norm(&view, p, 1, &[ones]).unwrap();
        assert!(rel(w.value, 1.0) < 1e-12);
        let t = testing_constants(&view, p).unwrap();
        assert!(rel(t.forward, 1.0) < 1e-12 && rel(t.dual, 1.0) < 1e-12);
    }
}

#[test]
fn weak_norms_are_reproducible() {
    for inst in random_suite(20, 40, 1.0).unwrap() {
        let view = inst.view();
        let a = weak_norm(&view, 2.0, inst.seed, &[]).unwrap();
        let b = weak_norm(&view, 2.0, inst.seed, &[]).unwrap();
        assert_eq!(a, b);
        assert!(a.value <= a.strong_on_tests * (1.0 + 1e-12));
    }
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let run = || check_thm_double(&double_suite(6, 9, 1.0).unwrap()).unwrap().csv();
    assert_eq!(run(), run());
    let inst = random_suite(6, 9, 1.0).unwrap();
    let run = || check_lsut(&inst, 2.0).unwrap().csv();
    assert_eq!(run(), run());
}

#[test]
fn double_pipeline_on_constant_weights() {
    let r = check_thm_double(&[(unit_instance(), BumpPair::log(2.0, 1.0).unwrap())]).unwrap();
    assert!(r.passed(), "{}", r.summary());
    assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
}

#[test]
fn weak_type_pipeline_on_the_unit_interval() {
    let phi = YoungFunction::power_log(1.0, 2.0).unwrap();
    let r = check_thm_weak11(&[unit_instance()], &phi, 1.5).unwrap();
    assert!(r.passed(), "{}", r.summary());
    assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
}

#[test]
fn weak_type_ratio_is_homogeneous() {
    // the level family uses levels 8^k, so scaling by 8 maps it to itself
    let phi = YoungFunction::power_log(1.0, 2.0).unwrap();
    let inst = random_suite(6, 70, 1.0).unwrap();
    let scaled: Vec<Instance> = inst
        .iter()
        .map(|i| {
            let mut j = i.clone();
            j.sigma.iter_mut().for_each(|v| *v *= 8.0);
            j
        })
        .collect();
    let a = check_thm_weak11(&inst, &phi, 1.5).unwrap();
    let b = check_thm_weak11(&scaled, &phi, 1.5).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(rel(y.ratio, x.ratio) < 1e-12);
    }
    assert!(b.passed());
}

#[test]
fn bad_parts_of_a_spike_vanish_off_the_stopping_cube() {
    let grid = line_grid(0.0, 0, 4, iv(0.0, 1.0)).unwrap();
    let layout = Layout::new(&grid, &[]).unwrap();
    let spike = StepFunction::constant_on(iv(0.0, 0.125), 8.0).unwrap();
    let f = layout.sample(&spike);
    let norms = cube_norms(&layout, &grid, &f, &YoungFunction::identity()).unwrap();
    let levels = levels_family(&layout, &grid, &norms, default_base(&grid)).unwrap();
    for family in [levels, random_family(&grid, 3, 0.7, 2).unwrap(), top_family(&grid)] {
        assert_eq!(bad_part_leak(&layout, &grid, &family, &f, 2.0).unwrap(), 0.0);
    }
}

#[test]
fn bump_parameters() {
    let l = Lemma61::new(2.0, 1.0, None).unwrap();
    assert_eq!((l.epsilon, l.q, l.eta), (0.25, 1.125, 0.5));
    assert!(matches!(Lemma61::new(2.0, 1.0, Some(0.5)), Err(Error::Parameter(_))));
    assert!(matches!(Lemma61::new(2.0, 1.0, Some(0.0)), Err(Error::Parameter(_))));
    let r = check_lemma61(&[unit_instance()], 2.0, 1.0, None).unwrap();
    assert!(r.passed(), "{}", r.summary());
}

#[test]
fn maximal_bound_is_invariant_under_scaling_u() {
    let l = Lemma61::new(1.5, 1.0, None).unwrap();
    let c_factor = l.c.bp_constant(l.pp()).unwrap().value.powf(1.0 / l.pp());
    for inst in random_suite(6, 50, 1.0).unwrap() {
        let f: Vec<f64> = (0..inst.size()).map(|i| 1.0 + (i % 3) as f64).collect();
        let mut scaled = inst.clone();
        scaled.u.iter_mut().for_each(|v| *v *= 4.0);
        let a = lemma61_ratio(&inst, &l, &f, c_factor).unwrap();
        let b = lemma61_ratio(&scaled, &l, &f, c_factor).unwrap();
        assert!(rel(b.ratio, a.ratio) < 1e-9, "{} vs {}", a.ratio, b.ratio);
    }
}

#[test]
fn counterexample_layout() {
    assert!(rel(k_n(2), 4.0 / (E + 2.0).ln().powi(3)) < 1e-15);
    assert!(matches!(build(1), Err(Error::Parameter(_))));
    let ce = build(1000).unwrap();
    assert_eq!(ce.blocks.len(), 999);
    assert!((2..1000).all(|n| gap(n) > 1.0));
    let b = ce.block(7).unwrap();
    assert_eq!(b.sigma_support().len(), 1.0);
    assert_eq!(b.u_support().len(), 1.0);
    assert_eq!(b.u_support().lo - b.sigma_support().hi, 5.0);
}

#[test]
fn double_products_match_the_closed_form() {
    let ce = build(200).unwrap();
    let d = scan_double(&ce).unwrap();
    for p in &d.points {
        assert!(rel(p.product, double_closed_form(p.n).unwrap()) < 1e-12, "n = {}", p.n);
        if let Some(g) = p.global {
            assert!(rel(g, p.product) < 1e-12);
        }
    }
    assert!(d.band <= 10.0);
}

#[test]
fn single_block_products_decay_like_the_inverse_log() {
    let ce = build(200).unwrap();
    let s = scan_separated(&ce, 2, 1).unwrap();
    let tail: Vec<_> = s.points.iter().filter(|p| p.n >= 10).collect();
    assert!(tail.windows(2).all(|w| w[1].single_a <= w[0].single_a));
    let scaled: Vec<f64> = tail.iter().map(|p| p.single_a * (E + p.n as f64).ln()).collect();
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo <= 10.0, "{lo} {hi}");
    // the block is symmetric under reflection, so the two products agree
    for p in &s.points {
        assert!(rel(p.single_b, p.single_a) < 1e-9, "n = {}", p.n);
    }
    assert_eq!(s.far_max, 0.0);
}

#[test]
fn regimes_are_exclusive() {
    let single = Span { first: 5, lo: 0.0, last: 5, hi: 5.0 };
    assert_eq!(single.regime(), Regime::Single);
    let far = Span { first: 10, lo: 8.5, last: 10, hi: 9.5 };
    assert_eq!(far.regime(), Regime::Far);
    let long = Span { first: 2, lo: 0.0, last: 3, hi: 3.0 };
    assert_eq!(long.regime(), Regime::Long);
}

#[test]
fn hilbert_matches_quadrature() {
    let f = StepFunction::from_cells(&[-1.0, 0.0, 0.5, 1.0], &[2.0, 0.0, 1.0]).unwrap();
    let h = 0.3;
    let out = hilbert_apply(&f, h, Some(iv(-3.0, 3.0))).unwrap();
    let exact = |x: f64| {
        f.cells()
            .map(|(q, c)| c * ((x - q.lo).abs().ln() - (x - q.hi).abs().ln()))
            .sum::<f64>()
    };
    let mut checked = 0;
    for ((cell, v), collar) in out.transform.cells().zip(&out.collar) {
        let interior = f.breakpoints().iter().all(|&b| b <= cell.lo || b >= cell.hi);
        if !interior {
            continue;
        }
        let q = quadrature::integrate(exact, cell.lo, cell.hi, 1e-13).integral / h;
        assert!((q - v).abs() <= 1e-9, "cell {cell:?}: {v} vs {q}");
        checked += usize::from(!collar);
    }
    assert!(checked > 5);
}

#[test]
fn hilbert_rejects_degenerate_input() {
    let f = StepFunction::indicator(iv(0.0, 1.0));
    assert!(hilbert_apply(&f, 0.0, None).is_err());
    assert!(hilbert_apply(&StepFunction::zero(), 0.1, None).is_err());
}

#[test]
fn hilbert_of_weighted_functions_is_bounded_by_the_bump() {
    let p = 2.0;
    let pair = BumpPair::log(p, 1.0).unwrap();
    for inst in random_suite(5, 80, 1.0).unwrap().iter().filter(|i| i.size() >= 8) {
        let w = inst.pair.as_ref().unwrap();
        let f = StepFunction::indicator(iv(0.25, 0.75));
        let out = hilbert_apply(&f.mul(&w.sigma), 2f64.powi(-8), Some(iv(0.0, 1.0))).unwrap();
        let lhs = out.transform.lp_norm(&w.u, p);
        let bump = bump_double(w, &pair.a, &pair.b, p, &ScanFamily::Intervals { m: 0 }).unwrap().value;
        let norm_f = f.mul(&w.sigma).lp_integral(p).powf(1.0 / p);
        let ratio = lhs / (bump * norm_f);
        assert!(ratio.is_finite() && ratio > 0.0 && ratio < CEILING, "{ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn strong_norm_dominates_everything_it_should(seed in 0u64..10_000, pi in 0usize..3) {
        let p = [1.5, 2.0, 3.0][pi];
        let inst = Instance::random(seed, 3 + (seed % 4) as i32, 1.0).unwrap();
        let view = inst.view();
        let s = strong_norm(&view, p, seed).unwrap();
        prop_assert!(s.random_lower <= s.upper * (1.0 + 1e-9));
        prop_assert!(s.estimate <= s.upper * (1.0 + 1e-9));
        let w = weak_norm(&view, p, seed, &[]).unwrap();
        prop_assert!(w.value <= s.upper * (1.0 + 1e-9));
        let t = testing_constants(&view, p).unwrap();
        prop_assert!(t.forward <= s.upper * (1.0 + 1e-9));
        let z = apply(&view, &s.extremal);
        let ratio = weighted_norm(&view, &inst.u, &z, p) / weighted_norm(&view, &inst.sigma, &s.extremal, p);
        prop_assert!(rel(ratio, s.estimate) < 1e-9);
    }
}
