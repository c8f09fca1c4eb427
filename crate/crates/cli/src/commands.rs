use std::path::PathBuf;
use std::sync::Arc;

use dyadic_bumps::bump::{bump_double, bump_separated, BumpKind, BumpReport, ScanFamily, WeightPair, DEFAULT_FLOOR};
use dyadic_bumps::experiments::counterexample::{self as ce, M_CROSS, M_SINGLE};
use dyadic_bumps::experiments::hilbert::hilbert_apply;
use dyadic_bumps::experiments::report::NormReport;
use dyadic_bumps::experiments::theorems::{self as thm, BumpPair};
use dyadic_bumps::grid::{finite_grid, line_grid, verify_grid, DyadicGrid};
use dyadic_bumps::orlicz::orlicz_norm as luxemburg_norm;
use dyadic_bumps::space::{FiniteSpace, SpaceFile};
use dyadic_bumps::sparse::{cube_norms, decompose, default_base, levels_family, sparse_apply_atoms, SparseFamily};
use dyadic_bumps::step::{Interval, StepFunction};
use dyadic_bumps::YoungFunction;
use serde::Deserialize;

use crate::config::Settings;
use crate::io::{num, read_json, CliError, Data, Output};
use crate::{Kind, Mode, Tag};

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_grid(s: &Settings, flag: Option<PathBuf>) -> Result<DyadicGrid, CliError> {
    let path = s.required_path("grid", flag)?;
    read_json(&path, "grid")
}

fn load_data(s: &Settings, flag: Option<PathBuf>) -> Result<Data, CliError> {
    let path = s.required_path("input", flag)?;
    read_json(&path, "input")
}

fn atom_bounds(layout: &dyadic_bumps::cells::Layout, i: usize) -> (String, String) {
    match layout.atom_interval(i) {
        Some(iv) => (num(iv.lo), num(iv.hi)),
        None => (String::new(), String::new()),
    }
}

pub fn orlicz_norm(
    s: &Settings,
    out: &Output,
    input: Option<PathBuf>,
    young: Option<String>,
    mut sets: Vec<Interval>,
) -> Result<(), CliError> {
    let path = s.required_path("input", input)?;
    let a = s.young("young", young)?.unwrap_or(YoungFunction::power(2.0)?);
    let from_file = s.interval("set", None)?;
    s.finish()?;
    let f: StepFunction = read_json(&path, "step function")?;
    if sets.is_empty() {
        sets.extend(from_file.or(f.support()));
    }
    if sets.is_empty() {
        return Err(CliError::input("the function vanishes and no --set was given"));
    }
    let norm = luxemburg_norm(&f, &sets, &a)?;
    out.data("norm.csv", &format!("norm\n{}\n", num(norm)))
}

pub struct BumpArgs {
    pub weights: Option<PathBuf>,
    pub kind: Option<Kind>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub young: Option<String>,
    pub young_b: Option<String>,
    pub m: Option<u32>,
    pub grid: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    u: StepFunction,
    sigma: StepFunction,
    window: Option<Interval>,
    tau: Option<f64>,
}

fn hull(a: Option<Interval>, b: Option<Interval>) -> Option<Interval> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Interval {
            lo: a.lo.min(b.lo),
            hi: a.hi.max(b.hi),
        }),
        (a, b) => a.or(b),
    }
}

pub fn bump_scan(s: &Settings, out: &Output, args: BumpArgs) -> Result<(), CliError> {
    let path = s.required_path("weights", args.weights)?;
    let kind = match s.string("kind", None)? {
        _ if args.kind.is_some() => args.kind.unwrap(),
        None => Kind::Double,
        Some(k) => match k.as_str() {
            "double" => Kind::Double,
            "separated-a" => Kind::SeparatedA,
            "separated-b" => Kind::SeparatedB,
            _ => return Err(CliError::input(format!("unknown kind {k:?}"))),
        },
    };
    let p = s.f64("p", args.p)?.unwrap_or(2.0);
    if !(p > 1.0 && p.is_finite()) {
        return Err(CliError::input(format!("p must exceed 1, got {p}")));
    }
    let pp = p / (p - 1.0);
    let delta = s.f64("delta", args.delta)?.unwrap_or(1.0);
    let a = match s.young("young", args.young)? {
        Some(a) => a,
        None => YoungFunction::log_bump(p, delta)?,
    };
    let b = match s.young("young-b", args.young_b)? {
        Some(b) => b,
        None => YoungFunction::log_bump(pp, delta)?,
    };
    let m = s.int("m", args.m)?.unwrap_or(2);
    let grid_path = s.path("grid", args.grid)?;
    s.finish()?;

    let w: WeightsFile = read_json(&path, "weights")?;
    let window = w
        .window
        .or_else(|| hull(w.u.support(), w.sigma.support()))
        .ok_or_else(|| CliError::input("both weights vanish"))?;
    let pair = WeightPair::new(w.u, w.sigma, window, w.tau.unwrap_or(DEFAULT_FLOOR))?;
    let grid: Option<DyadicGrid> = grid_path.map(|g| read_json(&g, "grid")).transpose()?;
    let family = match &grid {
        Some(g) => ScanFamily::Grid(g),
        None => ScanFamily::Intervals { m },
    };
    let report: BumpReport = match kind {
        Kind::Double => bump_double(&pair, &a, &b, p, &family)?,
        Kind::SeparatedA => bump_separated(&pair, &a, p, &family)?,
        Kind::SeparatedB => BumpReport {
            kind: BumpKind::SeparatedB,
            ..bump_separated(&pair.swapped(), &b, pp, &family)?
        },
    };
    out.data("bump.csv", &format!("{}\n{}\n", BumpReport::CSV_HEADER, report.csv_row()))?;
    out.summary("bump.summary.txt", &format!("{} = {}{}\n", report.kind.name(), report.value, if report.divergent { " (divergent)" } else { "" }))
}

pub fn cz_decompose(
    s: &Settings,
    out: &Output,
    input: Option<PathBuf>,
    grid: Option<PathBuf>,
    lambda: Option<f64>,
) -> Result<(), CliError> {
    let data = load_data(s, input)?;
    let grid = load_grid(s, grid)?;
    let lambda = s
        .f64("lambda", lambda)?
        .ok_or_else(|| CliError::input("--lambda is required (flag or config key)"))?;
    s.finish()?;
    let (layout, values) = data.on_atoms(&grid)?;
    let cz = decompose(&layout, &grid, &values, lambda)?;
    let mut b = vec![0.0; layout.len()];
    for part in &cz.bad {
        for (k, v) in part.values.iter().enumerate() {
            b[part.first_atom + k] = *v;
        }
    }
    let mut csv = String::from("atom,lo,hi,f,g,b\n");
    for i in 0..layout.len() {
        let (lo, hi) = atom_bounds(&layout, i);
        csv.push_str(&format!("{i},{lo},{hi},{},{},{}\n", num(cz.f[i]), num(cz.g[i]), num(b[i])));
    }
    out.data("cz.csv", &csv)?;
    let st = &cz.stopping;
    out.summary(
        "cz.summary.txt",
        &format!(
            "lambda = {}\nstopping cubes = {:?}\nmax norm/lambda = {} (bound 1/epsilon = {})\nmax |g| = {}\n",
            st.lambda,
            st.cubes,
            st.achieved,
            st.bound,
            cz.g.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        ),
    )
}

pub fn sparse_build(
    s: &Settings,
    out: &Output,
    input: Option<PathBuf>,
    grid: Option<PathBuf>,
    young: Option<String>,
    a: Option<f64>,
) -> Result<(), CliError> {
    let data = load_data(s, input)?;
    let grid = load_grid(s, grid)?;
    let phi = s.young("young", young)?.unwrap_or_else(YoungFunction::identity);
    let a = s.f64("a", a)?.unwrap_or_else(|| default_base(&grid));
    s.finish()?;
    let (layout, values) = data.on_atoms(&grid)?;
    let norms = cube_norms(&layout, &grid, &values, &phi)?;
    let family = levels_family(&layout, &grid, &norms, a)?;
    out.data("family.json", &json(&family))?;
    out.summary(
        "family.summary.txt",
        &format!("members = {}\nlevel base = {a}\nsparseness = {}\n", family.len(), family.sparseness(&grid)),
    )
}

pub fn sparse_apply(
    s: &Settings,
    out: &Output,
    family: Option<PathBuf>,
    grid: Option<PathBuf>,
    input: Option<PathBuf>,
) -> Result<(), CliError> {
    let family_path = s.required_path("family", family)?;
    let grid = load_grid(s, grid)?;
    let data = load_data(s, input)?;
    s.finish()?;
    let family: SparseFamily = read_json(&family_path, "sparse family")?;
    family.check(&grid)?;
    let (layout, values) = data.on_atoms(&grid)?;
    let t = sparse_apply_atoms(&layout, &family, &values);
    let mut csv = String::from("atom,lo,hi,value\n");
    for (i, v) in t.iter().enumerate() {
        let (lo, hi) = atom_bounds(&layout, i);
        csv.push_str(&format!("{i},{lo},{hi},{}\n", num(*v)));
    }
    out.data("sparse.csv", &csv)
}

pub struct GridArgs {
    pub space: Option<PathBuf>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub shift: Option<f64>,
    pub k_min: Option<i32>,
    pub k_max: Option<i32>,
    pub window: Option<Interval>,
}

pub fn grid_build(s: &Settings, out: &Output, args: GridArgs) -> Result<(), CliError> {
    let space = s.path("space", args.space)?;
    let eta = s.f64("eta", args.eta)?;
    let seed = s.int("seed", args.seed.map(|x| x as i64))?.unwrap_or(0);
    let shift = s.f64("shift", args.shift)?;
    let k_min = s.int("k-min", args.k_min)?;
    let k_max = s.int("k-max", args.k_max)?;
    let window = s.interval("window", args.window)?;
    s.finish()?;
    let grid = match space {
        Some(path) => {
            if shift.is_some() || k_min.is_some() || k_max.is_some() || window.is_some() {
                return Err(CliError::input("--shift, --k-min, --k-max and --window apply to line grids only"));
            }
            let file: SpaceFile = read_json(&path, "space")?;
            let space = FiniteSpace::try_from(file)?;
            let seed = u64::try_from(seed).map_err(|_| CliError::input("--seed must be nonnegative"))?;
            finite_grid(Arc::new(space), eta, seed)?
        }
        None => {
            if eta.is_some() {
                return Err(CliError::input("--eta applies to finite spaces only"));
            }
            let window = window.unwrap_or(Interval { lo: 0.0, hi: 1.0 });
            line_grid(shift.unwrap_or(0.0), k_min.unwrap_or(0), k_max.unwrap_or(6), window)?
        }
    };
    let c = grid.constants;
    out.data("grid.json", &json(&grid))?;
    out.summary(
        "grid.summary.txt",
        &format!(
            "cubes = {}\ngenerations = {}..={}\nC = {}\neta = {}\nepsilon = {}\n",
            grid.cubes.len(),
            grid.k_min,
            grid.k_max,
            c.c,
            c.eta,
            c.epsilon
        ),
    )
}

fn csv_field(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn grid_verify(s: &Settings, out: &Output, grid: Option<PathBuf>) -> Result<(), CliError> {
    let grid = load_grid(s, grid)?;
    s.finish()?;
    let r = verify_grid(&grid);
    let mut csv = String::from("property,name,holds,witness\n");
    for p in &r.properties {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.property,
            csv_field(&p.name),
            p.holds,
            p.witness.as_deref().map(csv_field).unwrap_or_default()
        ));
    }
    out.data("verify.csv", &csv)?;
    out.summary(
        "verify.summary.txt",
        &format!(
            "epsilon = {}\neta = {}\ninner ball factor = {}\nouter ball factor = {}\nsandwich = {}\ndeclared C = {}, eta = {}, epsilon = {}\n{}\n",
            r.epsilon,
            r.eta,
            r.c_inner,
            r.c_outer,
            r.sandwich,
            r.declared.c,
            r.declared.eta,
            r.declared.epsilon,
            if r.passed() { "PASS" } else { "FAIL" }
        ),
    )?;
    match r.first_failure() {
        None => Ok(()),
        Some(p) => Err(CliError::failed(format!(
            "property {} ({}) fails: {}",
            p.property,
            p.name,
            p.witness.as_deref().unwrap_or("no witness")
        ))),
    }
}

pub struct SuiteArgs {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub osc: Option<f64>,
    pub young: Option<String>,
    pub q: Option<f64>,
}

pub fn verify_thm(s: &Settings, out: &Output, tag: Tag, args: SuiteArgs) -> Result<(), CliError> {
    let count = s.int("count", args.count.map(|c| c as i64))?;
    let seed = s.int("seed", args.seed.map(|x| x as i64))?.unwrap_or(1);
    let seed = u64::try_from(seed).map_err(|_| CliError::input("--seed must be nonnegative"))?;
    let p = s.f64("p", args.p)?;
    let delta = s.f64("delta", args.delta)?.unwrap_or(1.0);
    let epsilon = s.f64("epsilon", args.epsilon)?;
    let osc = s.f64("osc", args.osc)?.unwrap_or(1.0);
    let young = s.young("young", args.young)?;
    let q = s.f64("q", args.q)?;
    s.finish()?;
    let count = match count {
        Some(c) if c < 1 => return Err(CliError::input("--count must be positive")),
        Some(c) => c as usize,
        None if tag == Tag::Lsut => 20,
        None => 50,
    };
    let unused = |name: &str, given: bool| -> Result<(), CliError> {
        if given {
            Err(CliError::input(format!("--{name} does not apply to this suite")))
        } else {
            Ok(())
        }
    };
    let report: NormReport = match tag {
        Tag::Double => {
            unused("epsilon", epsilon.is_some())?;
            unused("young", young.is_some())?;
            unused("q", q.is_some())?;
            let cases = match p {
                None => thm::double_suite(count, seed, delta)?,
                Some(p) => thm::random_suite(count, seed, osc)?
                    .into_iter()
                    .map(|inst| Ok((inst, BumpPair::log(p, delta)?)))
                    .collect::<Result<Vec<_>, dyadic_bumps::Error>>()?,
            };
            thm::check_thm_double(&cases)?
        }
        Tag::Weak11 => {
            unused("p", p.is_some())?;
            unused("epsilon", epsilon.is_some())?;
            let phi = match young {
                Some(phi) => phi,
                None => YoungFunction::power_log(1.0, 2.0)?,
            };
            let instances = thm::random_suite(count, seed, osc)?;
            thm::check_thm_weak11(&instances, &phi, q.unwrap_or(1.5))?
        }
        Tag::Lemma61 => {
            unused("young", young.is_some())?;
            unused("q", q.is_some())?;
            let instances = thm::random_suite(count, seed, osc)?;
            thm::check_lemma61(&instances, p.unwrap_or(2.0), delta, epsilon)?
        }
        Tag::Lsut => {
            unused("young", young.is_some())?;
            unused("q", q.is_some())?;
            unused("epsilon", epsilon.is_some())?;
            let instances = thm::random_suite(count, seed, osc)?;
            thm::check_lsut(&instances, p.unwrap_or(2.0))?
        }
        Tag::Maximal | Tag::Cz => {
            unused("p", p.is_some())?;
            unused("young", young.is_some())?;
            unused("q", q.is_some())?;
            unused("epsilon", epsilon.is_some())?;
            if tag == Tag::Maximal {
                thm::check_maximal(count, seed)?
            } else {
                thm::check_cz(count, seed)?
            }
        }
    };
    let name = format!("{tag:?}").to_lowercase();
    out.data(&format!("{name}.csv"), &report.csv())?;
    out.summary(&format!("{name}.summary.txt"), &report.summary())?;
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::failed(format!("{name}: failed checks: {}", names.join(", "))))
    }
}

pub fn counterexample(
    s: &Settings,
    out: &Output,
    mode: Option<Mode>,
    n_max: Option<u32>,
    m_single: Option<u32>,
    m_cross: Option<u32>,
) -> Result<(), CliError> {
    let mode = match (mode, s.string("mode", None)?) {
        (Some(m), _) => m,
        (None, None) => Mode::Double,
        (None, Some(m)) => match m.as_str() {
            "build" => Mode::Build,
            "double" => Mode::Double,
            "separated" => Mode::Separated,
            _ => return Err(CliError::input(format!("unknown mode {m:?}"))),
        },
    };
    let n_max = s.int("n-max", n_max)?.unwrap_or(1000);
    let m_single = s.int("m-single", m_single)?.unwrap_or(M_SINGLE);
    let m_cross = s.int("m-cross", m_cross)?.unwrap_or(M_CROSS);
    s.finish()?;
    let example = ce::build(n_max)?;
    match mode {
        Mode::Build => {
            let mut csv = String::from("n,k_n,gap\n");
            for b in &example.blocks {
                csv.push_str(&format!("{},{},{}\n", b.n, num(b.k), num(ce::gap(b.n))));
            }
            out.data("build.csv", &csv)?;
            out.summary("build.summary.txt", &format!("blocks = {}\n", example.blocks.len()))
        }
        Mode::Double => {
            let d = ce::scan_double(&example)?;
            out.data("double.csv", &d.csv())?;
            out.summary(
                "double.summary.txt",
                &format!(
                    "band (max/min of product/log(e+n)) = {}\ngrowth (product at n_max over n = 4) = {}\nlocal/global gap = {}\n",
                    d.band, d.growth, d.global_gap
                ),
            )
        }
        Mode::Separated => {
            let sep = ce::scan_separated(&example, m_single, m_cross)?;
            out.data("separated.csv", &sep.csv())?;
            let (a, b) = sep.tail_sup(0);
            let mut text = format!(
                "sup separated A = {a}\nsup separated B = {b}\nfar-span max = {}\nlong-span ratios: u {} sigma {}\ntail bound = {}\n",
                sep.far_max, sep.long_u_ratio, sep.long_sigma_ratio, sep.tail_bound
            );
            for (regime, count) in &sep.regimes {
                text.push_str(&format!("spans {regime:?} = {count}\n"));
            }
            for (m, ra, rb) in &sep.refinement {
                text.push_str(&format!("refinement {m}: A {ra} B {rb}\n"));
            }
            out.summary("separated.summary.txt", &text)
        }
    }
}

pub fn hilbert(
    s: &Settings,
    out: &Output,
    input: Option<PathBuf>,
    h: Option<f64>,
    window: Option<Interval>,
) -> Result<(), CliError> {
    let path = s.required_path("input", input)?;
    let h = s.f64("h", h)?.unwrap_or(1.0 / 1024.0);
    let window = s.interval("window", window)?;
    s.finish()?;
    let f: StepFunction = read_json(&path, "step function")?;
    let r = hilbert_apply(&f, h, window)?;
    let mut csv = String::from("lo,hi,value,collar\n");
    for ((iv, v), collar) in r.transform.cells().zip(&r.collar) {
        csv.push_str(&format!("{},{},{},{collar}\n", num(iv.lo), num(iv.hi), num(v)));
    }
    out.data("hilbert.csv", &csv)
}
