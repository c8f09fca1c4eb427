//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantities. Exits with status 1 if any criterion fails.

use std::f64::consts::E;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dyadic_bumps::experiments::counterexample::{build, scan_double, scan_separated, M_CROSS, M_SINGLE};
use dyadic_bumps::experiments::hilbert::hilbert_apply;
use dyadic_bumps::experiments::report::NormReport;
use dyadic_bumps::experiments::theorems::{
    check_cz, check_lemma61, check_lsut, check_maximal, check_thm_double, check_thm_weak11, double_suite,
    random_suite,
};
use dyadic_bumps::grid::{finite_grid, line_shift_family, verify_grid};
use dyadic_bumps::orlicz::{lp_average, orlicz_norm, step_pieces};
use dyadic_bumps::space::FiniteSpace;
use dyadic_bumps::step::{Interval, StepFunction};
use dyadic_bumps::YoungFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn report_outcome(r: NormReport) -> (bool, String) {
    let detail = r
        .checks
        .iter()
        .map(|c| format!("[{}] {}: {}", if c.passed { "ok" } else { "x" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    (r.passed(), format!("max ratio {:.4e}; {detail}", r.max_ratio))
}

fn orlicz_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cells = rng.gen_range(1..40);
        let mut edges = vec![rng.gen_range(-5.0..5.0)];
        for _ in 0..cells {
            let last = *edges.last().unwrap();
            edges.push(last + rng.gen_range(0.01..2.0));
        }
        let values: Vec<f64> = (0..cells)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-3.0..3.0f64).exp() })
            .collect();
        let f = StepFunction::from_cells(&edges, &values).map_err(|e| e.to_string())?;
        let (lo, hi) = (edges[0], *edges.last().unwrap());
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(a..hi);
        let set = [Interval { lo, hi: a.max(lo + 1e-3) }, Interval { lo: b, hi }]
            .into_iter()
            .filter(|iv| iv.len() > 0.0)
            .collect::<Vec<_>>();
        if set.iter().all(|iv| f.integral(iv) == 0.0) {
            continue;
        }
        for p in [1.5, 2.0, 3.0] {
            let a = YoungFunction::power(p).map_err(|e| e.to_string())?;
            let norm = orlicz_norm(&f, &set, &a).map_err(|e| e.to_string())?;
            let oracle = lp_average(&step_pieces(&f, &set), p).map_err(|e| e.to_string())?;
            worst = worst.max(rel(norm, oracle));
        }
    }
    let t = start.elapsed();
    Ok((
        worst <= 1e-9 && t < Duration::from_secs(5),
        format!("max relative error {worst:.3e}, {:.3} s", t.as_secs_f64()),
    ))
}

fn conjugate_closed_forms() -> Outcome {
    let err = |e: dyadic_bumps::Error| e.to_string();
    let sq = YoungFunction::power(2.0).map_err(err)?;
    let mut conj = 0.0f64;
    for k in -1..=6 {
        let t = 10f64.powi(k);
        conj = conj.max(rel(sq.conjugate(t).map_err(err)?, t * t / 4.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bp = 0.0f64;
    for _ in 0..20 {
        let p = rng.gen_range(1.2..4.0);
        let q = rng.gen_range(1.05..p - 0.05);
        let r = YoungFunction::power(q).map_err(err)?.bp_constant(p).map_err(err)?;
        bp = bp.max(rel(r.value, 1.0 / (p - q)));
    }
    let lb = YoungFunction::log_bump(2.0, 1.0).map_err(err)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..=70 {
        let t = 10f64.powf(1.0 + k as f64 / 10.0);
        let r = lb.conjugate(t).map_err(err)? / (t * t * (E + t).ln().powi(-2));
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((
        conj <= 1e-6 && bp <= 1e-6 && hi / lo <= 10.0,
        format!(
            "conjugate t²/4 error {conj:.3e}; B_p error {bp:.3e}; log-bump conjugate band {:.4} ([{lo:.4}, {hi:.4}])",
            hi / lo
        ),
    ))
}

fn grid_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let (mut eps, mut eta, mut c_max) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    let mut record = |label: String, r: dyadic_bumps::grid::GridReport, failures: &mut Vec<String>| {
        if let Some(f) = r.first_failure() {
            failures.push(format!("{label}: property {} ({})", f.property, f.name));
        }
        eps = eps.min(r.epsilon);
        eta = eta.min(r.eta);
        c_max = c_max.max(r.sandwich);
    };
    for i in 0..20 {
        let n = rng.gen_range(16..=512);
        let space = FiniteSpace::random_plane(n, rng.gen()).map_err(|e| e.to_string())?;
        let grid = finite_grid(Arc::new(space), None, i).map_err(|e| e.to_string())?;
        record(format!("space {i} (n = {n})"), verify_grid(&grid), &mut failures);
    }
    let window = Interval { lo: 0.0, hi: 1.0 };
    for (i, g) in line_shift_family(0, 8, window).map_err(|e| e.to_string())?.iter().enumerate() {
        record(format!("line shift {i}"), verify_grid(g), &mut failures);
    }
    let t = start.elapsed();
    Ok((
        failures.is_empty() && eps > 0.0 && t < Duration::from_secs(30),
        format!(
            "C (outer/inner) ≤ {c_max:.4}, η ≥ {eta:.4}, ε ≥ {eps:.4e}, {:.2} s{}",
            t.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(", ")) }
        ),
    ))
}

fn cz_exactness() -> Outcome {
    Ok(report_outcome(check_cz(50, 4).map_err(|e| e.to_string())?))
}

fn maximal_domination() -> Outcome {
    Ok(report_outcome(check_maximal(50, 5).map_err(|e| e.to_string())?))
}

fn counterexample() -> Outcome {
    let start = Instant::now();
    let ce = build(1000).map_err(|e| e.to_string())?;
    let d = scan_double(&ce).map_err(|e| e.to_string())?;
    let s = scan_separated(&ce, M_SINGLE, M_CROSS).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let (a10, b10) = s.tail_sup(10);
    let (a100, b100) = s.tail_sup(100);
    let plateau = a100 <= 1.2 * a10 && b100 <= 1.2 * b10;
    let pass = d.band <= 10.0 && d.growth > 2.0 && d.global_gap <= 1e-9 && plateau && t < Duration::from_secs(60);
    Ok((
        pass,
        format!(
            "double band {:.4} (≤ 10), growth n=1000 over n=4 {:.4} (> 2), local/global gap {:.2e}; \
             separated sup n≥10 ({a10:.4}, {b10:.4}), n≥100 ({a100:.4}, {b100:.4}), overall ({:.4}, {:.4}); {:.2} s",
            d.band,
            d.growth,
            d.global_gap,
            s.running_at(1000).0,
            s.running_at(1000).1,
            t.as_secs_f64()
        ),
    ))
}

fn double_bump_theorem() -> Outcome {
    let cases = double_suite(50, 100, 1.0).map_err(|e| e.to_string())?;
    Ok(report_outcome(check_thm_double(&cases).map_err(|e| e.to_string())?))
}

fn weak_type() -> Outcome {
    let inst = random_suite(50, 200, 1.0).map_err(|e| e.to_string())?;
    let phi = YoungFunction::power_log(1.0, 2.0).map_err(|e| e.to_string())?;
    Ok(report_outcome(check_thm_weak11(&inst, &phi, 1.5).map_err(|e| e.to_string())?))
}

fn lemma_parameters() -> Outcome {
    let inst = random_suite(50, 200, 1.0).map_err(|e| e.to_string())?;
    let mut pass = true;
    let mut details = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let (ok, d) = report_outcome(check_lemma61(&inst, p, 1.0, None).map_err(|e| e.to_string())?);
        pass &= ok;
        details.push(format!("p = {p}: {d}"));
    }
    Ok((pass, details.join(" | ")))
}

fn testing_band() -> Outcome {
    let inst = random_suite(20, 300, 1.0).map_err(|e| e.to_string())?;
    Ok(report_outcome(check_lsut(&inst, 2.0).map_err(|e| e.to_string())?))
}

fn hilbert_sanity() -> Outcome {
    let h = 2f64.powi(-12);
    let f = StepFunction::indicator(Interval { lo: -1.0, hi: 1.0 });
    let out = hilbert_apply(&f, h, Some(Interval { lo: -3.0, hi: 3.0 })).map_err(|e| e.to_string())?;
    let mut closed = 0.0f64;
    for (iv, v) in out.transform.cells() {
        let x = iv.center();
        if (x.abs() - 1.0).abs() >= 0.1 {
            closed = closed.max((v - ((x + 1.0) / (x - 1.0)).abs().ln()).abs());
        }
    }
    // even about c = 3/8, so the transform is odd about c
    let c = 0.375;
    let g = StepFunction::from_cells(&[c - 1.0, c - 0.25, c + 0.25, c + 1.0], &[1.0, 3.0, 1.0])
        .map_err(|e| e.to_string())?;
    let out = hilbert_apply(&g, h, Some(Interval { lo: c - 2.0, hi: c + 2.0 })).map_err(|e| e.to_string())?;
    let cells: Vec<(Interval, f64)> = out.transform.cells().collect();
    let mut odd = 0.0f64;
    for (iv, v) in &cells {
        let mirror = 2.0 * c - iv.center();
        let w = out.transform.eval(mirror);
        odd = odd.max((v + w).abs());
    }
    Ok((
        closed <= 1e-6 && odd <= 1e-12,
        format!("closed-form error {closed:.3e} (h = 2^-12), antisymmetry defect {odd:.3e}"),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Orlicz norm oracle", orlicz_oracle),
        ("conjugate and B_p closed forms", conjugate_closed_forms),
        ("grid axioms", grid_axioms),
        ("Calderón–Zygmund exactness", cz_exactness),
        ("sparse domination of the maximal function", maximal_domination),
        ("counterexample: double bump diverges, separated bumps stay bounded", counterexample),
        ("double-bump strong-type suite", double_bump_theorem),
        ("weak-type suite", weak_type),
        ("bump parameter plumbing", lemma_parameters),
        ("strong norm against weak norms and testing", testing_band),
        ("Hilbert kernel sanity", hilbert_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} ({:.2} s) :: {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
