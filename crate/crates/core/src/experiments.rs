//! Named experiments over δ/ε/k/h sweeps. Each experiment yields tables
//! (written as CSV with a provenance block), measured constants and a list
//! of pass/fail checks. Rows are computed in parallel and collected in
//! sweep order, so output files depend only on the configuration.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Experiment, ExperimentConfig, Params};
use crate::error::{LabError, Result};
use crate::generators::{gen_random, generate, GeneratorKind, GeneratorSpec};
use crate::heisenberg::{
    core_projection_check, proj_x, proj_y, tube_inclusion_check, HPoint, Plane, VerticalPlanePoint, DEFAULT_A,
    DEFAULT_A1,
};
use crate::incidence::{count, count_naive, Engine};
use crate::measure::{
    boundary, boundary_projection_inclusion, box_lw_ratio, box_projection_area, h3_surrogate, lw_measure,
    random_box_union, select_shapes, tube_intersection_volume, weak_isoperimetric_ratio, DEFAULT_OVERSAMPLE,
};
use crate::planar::{
    dual_line_to_point, dual_point_to_line, is_incident, line_metric, LineAB, LineFamily, Point2, Scale,
};
use crate::reduction::reduce_shape;
use crate::rich::{greedy_concurrent_family, k_rich_points, max_concurrency};
use crate::rng::{tag, SplitMix64};
use crate::sobolev::{field_X, field_Y, gns_check, levelset_checks_all, select_functions, GridFunction};
use crate::tolerances::{self as tol, ls_slope, spread};
use crate::voxel::{voxelize, voxelize_aniso, Aabb, Shape};

pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    /// Provenance: the generator or zoo the rows come from.
    pub generator: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, generator: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            generator: generator.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: Experiment,
    pub tables: Vec<Table>,
    /// Measured constants and other scalar results.
    pub measured: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            tables: Vec::new(),
            measured: Map::new(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn measure(&mut self, key: &str, v: impl Serialize) {
        self.measured
            .insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Result of a run: outcomes plus the files written.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcomes: Vec<Outcome>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(Outcome::passed)
    }

    /// 0 if every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Cell formatting: shortest round-trip form for floats.
fn c(v: impl Display) -> String {
    v.to_string()
}

macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$(c(&$v)),*] };
}

fn row_seed(seed: u64, exp: Experiment, parts: &[u64]) -> u64 {
    let mut rng = SplitMix64::new(seed).fork(tag(exp.name()));
    for &p in parts {
        rng = rng.fork(p);
    }
    rng.next_u64()
}

fn fmt_err(e: &LabError) -> String {
    e.to_string().replace(['\n', ','], ";")
}

/// Runs one experiment (or all of them for `verify-all`) and returns the outcomes.
pub fn run_experiments(cfg: &ExperimentConfig) -> Result<Vec<Outcome>> {
    cfg.validate()?;
    let list: Vec<Experiment> = match cfg.experiment {
        Experiment::VerifyAll => Experiment::SWEEPS.to_vec(),
        e => vec![e],
    };
    list.into_iter().map(|e| run_one(cfg, e)).collect()
}

pub fn run_one(cfg: &ExperimentConfig, exp: Experiment) -> Result<Outcome> {
    let p = cfg.params(exp);
    match exp {
        Experiment::IncidenceSweep => incidence_sweep(cfg, p),
        Experiment::RichPoints => rich_points(cfg, p),
        Experiment::DualityCheck => duality_check(cfg, p),
        Experiment::StarBound => star_bound(cfg, p),
        Experiment::LwSweep => lw_sweep(p),
        Experiment::TubeVolume => tube_volume(cfg, p),
        Experiment::SobolevCheck => sobolev_check(p),
        Experiment::Isoperimetric => isoperimetric(cfg, p),
        Experiment::ReducePipeline => reduce_pipeline(p),
        Experiment::VerifyAll => Err(LabError::Config("verify-all is not a single experiment".into())),
    }
}

/// Runs the configured experiment(s) and writes CSVs, `summary.json` and `report.txt`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let outcomes = run_experiments(cfg)?;
    let files = write_artifacts(cfg, &outcomes)?;
    Ok(RunReport { outcomes, files })
}

pub fn write_artifacts(cfg: &ExperimentConfig, outcomes: &[Outcome]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut files = Vec::new();
    for o in outcomes {
        for t in &o.tables {
            let path = cfg.out_dir.join(format!("{}_{}.csv", o.experiment, t.name));
            write_table(&path, cfg, o.experiment, t)?;
            files.push(path);
        }
    }
    let summary = summary_json(cfg, outcomes);
    let path = cfg.out_dir.join("summary.json");
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.write_all(b"\n")?;
    w.flush()?;
    files.push(path);
    let path = cfg.out_dir.join("report.txt");
    std::fs::write(&path, report_text(cfg, outcomes))?;
    files.push(path);
    Ok(files)
}

fn write_table(path: &Path, cfg: &ExperimentConfig, exp: Experiment, t: &Table) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# experiment: {exp}")?;
    writeln!(f, "# table: {}", t.name)?;
    writeln!(f, "# generator: {}", t.generator)?;
    writeln!(f, "# seed: {}", cfg.seed)?;
    writeln!(f, "# engine: {}", engine_name(cfg.engine))?;
    writeln!(f, "# engine_version: {ENGINE_VERSION}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(&t.header)?;
    for r in &t.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Naive => "naive",
        Engine::Bucketed => "bucketed",
    }
}

pub fn summary_json(cfg: &ExperimentConfig, outcomes: &[Outcome]) -> Value {
    let mut experiments = Map::new();
    for o in outcomes {
        experiments.insert(
            o.experiment.name().into(),
            json!({
                "passed": o.passed(),
                "measured": o.measured,
                "checks": o.checks,
            }),
        );
    }
    json!({
        "engine_version": ENGINE_VERSION,
        "seed": cfg.seed,
        "engine": engine_name(cfg.engine),
        "passed": outcomes.iter().all(Outcome::passed),
        "experiments": experiments,
    })
}

pub fn report_text(cfg: &ExperimentConfig, outcomes: &[Outcome]) -> String {
    let mut s = format!(
        "{ENGINE_VERSION}  seed={}  engine={}\n",
        cfg.seed,
        engine_name(cfg.engine)
    );
    for o in outcomes {
        s.push_str(&format!(
            "\n== {} : {}\n",
            o.experiment,
            if o.passed() { "PASS" } else { "FAIL" }
        ));
        for ch in &o.checks {
            s.push_str(&format!(
                "  [{}] {}: {}\n",
                if ch.passed { "pass" } else { "FAIL" },
                ch.name,
                ch.detail
            ));
        }
        for (k, v) in &o.measured {
            s.push_str(&format!("  {k} = {v}\n"));
        }
    }
    s
}

// ---------------------------------------------------------------------------
// incidence-sweep

#[allow(clippy::too_many_arguments)]
fn instance_spec(
    cfg: &ExperimentConfig,
    exp: Experiment,
    p: &Params,
    kind: GeneratorKind,
    delta: f64,
    epsilon: f64,
    k: u32,
    idx: u64,
) -> GeneratorSpec {
    let mut spec = GeneratorSpec::new(kind, delta);
    spec.epsilon = epsilon;
    spec.r = 0.5;
    spec.s = 0.5;
    spec.k = k as usize;
    spec.m = p.m;
    spec.n_points = p.n_points;
    spec.n_lines = p.n_lines;
    spec.seed = row_seed(cfg.seed, exp, &[tag(kind.name()), idx]);
    spec
}

fn incidence_sweep(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::IncidenceSweep;
    let mut out = Outcome::new(exp);
    let jobs: Vec<(GeneratorKind, usize, f64)> = p
        .families
        .iter()
        .flat_map(|&f| p.deltas.iter().enumerate().map(move |(i, &d)| (f, i, d)))
        .collect();
    struct R {
        family: GeneratorKind,
        delta: f64,
        res: Result<(usize, usize, u64, f64, Option<bool>)>,
    }
    let rows: Vec<R> = jobs
        .par_iter()
        .map(|&(family, i, delta)| {
            let res = (|| {
                let spec = instance_spec(cfg, exp, p, family, delta, delta, p.ks[0], i as u64);
                let inst = generate(&spec)?;
                let s = Scale::delta(delta)?;
                let rep = count(&inst.points, &inst.lines, &s, cfg.engine);
                let verified = cfg.verify.then(|| {
                    let naive = count_naive(&inst.points, &inst.lines, &s);
                    naive.count == rep.count && naive.richness == rep.richness
                });
                Ok((
                    inst.points.len(),
                    inst.lines.len(),
                    rep.count,
                    rep.normalized_ratio,
                    verified,
                ))
            })();
            R { family, delta, res }
        })
        .collect();
    let gens: Vec<&str> = p.families.iter().map(|f| f.name()).collect();
    let mut t = Table::new(
        "rows",
        gens.join(" "),
        &[
            "family", "delta", "n_points", "n_lines", "count", "ratio", "verified", "error",
        ],
    );
    for r in &rows {
        match &r.res {
            Ok((np, nl, cnt, ratio, v)) => t.push(row![
                r.family.name(),
                r.delta,
                np,
                nl,
                cnt,
                ratio,
                v.map_or("-".to_string(), |b| b.to_string()),
                ""
            ]),
            Err(e) => t.push(row![r.family.name(), r.delta, "", "", "", "", "", fmt_err(e)]),
        }
    }
    out.tables.push(t);
    let mut ratios_json = Map::new();
    for &family in &p.families {
        let ok: Vec<(f64, u64, f64)> = rows
            .iter()
            .filter(|r| r.family == family)
            .filter_map(|r| r.res.as_ref().ok().map(|v| (r.delta, v.2, v.3)))
            .collect();
        let name = family.name();
        ratios_json.insert(name.into(), json!(ok.iter().map(|v| v.2).collect::<Vec<_>>()));
        if ok.is_empty() {
            out.check(format!("{name}: rows"), false, "no feasible rows");
            continue;
        }
        let ratios: Vec<f64> = ok.iter().map(|v| v.2).collect();
        let band = spread(&ratios);
        out.check(
            format!("{name}: ratio band"),
            band <= tol::RATIO_BAND_WIDTH,
            format!("max/min normalized ratio = {band:.3} (limit {})", tol::RATIO_BAND_WIDTH),
        );
        if family == GeneratorKind::Tube && ok.len() >= 2 && ok.iter().all(|v| v.1 > 0) {
            let xs: Vec<f64> = ok.iter().map(|v| (1.0 / v.0).log2()).collect();
            let ys: Vec<f64> = ok.iter().map(|v| (v.1 as f64).log2()).collect();
            let slope = ls_slope(&xs, &ys);
            out.measure("tube_slope", slope);
            out.check(
                "tube: log-log slope",
                (slope - tol::TUBE_SLOPE).abs() <= tol::TUBE_SLOPE_TOL,
                format!(
                    "slope = {slope:.4} (target {} ± {})",
                    tol::TUBE_SLOPE,
                    tol::TUBE_SLOPE_TOL
                ),
            );
        }
    }
    out.measure("normalized_ratios", ratios_json);
    if cfg.verify {
        let bad = rows
            .iter()
            .filter(|r| matches!(r.res, Ok((_, _, _, _, Some(false)))))
            .count();
        out.check(
            "engine agreement",
            bad == 0,
            format!("{bad} rows disagree with the naive engine"),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// rich-points

fn rich_points(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::RichPoints;
    let mut out = Outcome::new(exp);
    let pairs = p.delta_epsilon_pairs();
    let jobs: Vec<(GeneratorKind, usize, f64, f64, u32)> = p
        .families
        .iter()
        .flat_map(|&f| {
            pairs
                .iter()
                .enumerate()
                .flat_map(move |(i, &(d, e))| p.ks.iter().map(move |&k| (f, i, d, e, k)))
        })
        .collect();
    struct R {
        family: GeneratorKind,
        delta: f64,
        epsilon: f64,
        k: u32,
        res: Result<(usize, usize, f64)>,
    }
    let rows: Vec<R> = jobs
        .par_iter()
        .map(|&(family, i, delta, epsilon, k)| {
            let res = (|| {
                let spec = instance_spec(cfg, exp, p, family, delta, epsilon, k, i as u64);
                let inst = generate(&spec)?;
                let s = Scale::new(delta, epsilon, 1.0)?;
                let rich = k_rich_points(&inst.lines, k, &s)?;
                Ok((inst.lines.len(), rich.points.len(), rich.bound_constant))
            })();
            R {
                family,
                delta,
                epsilon,
                k,
                res,
            }
        })
        .collect();
    let gens: Vec<&str> = p.families.iter().map(|f| f.name()).collect();
    let mut t = Table::new(
        "rows",
        gens.join(" "),
        &[
            "family",
            "delta",
            "epsilon",
            "k",
            "n_lines",
            "n_rich",
            "bound_constant",
            "error",
        ],
    );
    for r in &rows {
        match &r.res {
            Ok((nl, nr, bc)) => t.push(row![r.family.name(), r.delta, r.epsilon, r.k, nl, nr, bc, ""]),
            Err(e) => t.push(row![r.family.name(), r.delta, r.epsilon, r.k, "", "", "", fmt_err(e)]),
        }
    }
    out.tables.push(t);
    // ceiling per δ over all families, ε and k
    let mut deltas: Vec<f64> = p.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();
    let per_delta: Vec<(f64, f64)> = deltas
        .iter()
        .filter_map(|&d| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.delta == d)
                .filter_map(|r| r.res.as_ref().ok().map(|v| v.2))
                .collect();
            (!v.is_empty()).then(|| (d, v.into_iter().fold(0.0, f64::max)))
        })
        .collect();
    let ceiling = per_delta.iter().map(|v| v.1).fold(0.0, f64::max);
    out.measure("bound_ceiling", ceiling);
    out.measure(
        "ceiling_per_delta",
        per_delta
            .iter()
            .map(|v| json!({"delta": v.0, "ceiling": v.1}))
            .collect::<Vec<_>>(),
    );
    match per_delta.first() {
        Some(&(d0, c0)) if c0 > 0.0 => {
            let growth = per_delta.iter().map(|v| v.1 / c0).fold(0.0, f64::max);
            out.measure("ceiling_growth", growth);
            out.check(
                "bound constant growth",
                growth <= tol::RICH_GROWTH_MAX,
                format!(
                    "max ceiling / ceiling at delta={d0} is {growth:.3} (limit {})",
                    tol::RICH_GROWTH_MAX
                ),
            );
        }
        _ => out.check("bound constant growth", false, "no feasible rows at the coarsest delta"),
    }
    let missed: Vec<String> = rows
        .iter()
        .filter(|r| r.family == GeneratorKind::KStar)
        .filter_map(|r| match r.res {
            Ok((_, n_rich, _)) if n_rich < p.m => Some(format!("delta={} eps={} k={}", r.delta, r.epsilon, r.k)),
            _ => None,
        })
        .collect();
    if p.families.contains(&GeneratorKind::KStar) {
        out.check(
            "k-star centers recovered",
            missed.is_empty(),
            if missed.is_empty() {
                format!("every feasible k-star row has >= {} k-rich points", p.m)
            } else {
                format!("too few k-rich points at {}", missed.join("; "))
            },
        );
    }
    let infeasible = rows.iter().filter(|r| r.res.is_err()).count();
    out.measure("infeasible_rows", infeasible);
    Ok(out)
}

// ---------------------------------------------------------------------------
// duality-check

/// A point of `Q0` and a line of `𝒬0` that are δ-incident.
fn incident_pair(rng: &mut SplitMix64, delta: f64) -> (Point2, LineAB) {
    loop {
        let p = Point2::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        let a = rng.uniform(-1.0, 1.0);
        let off = rng.uniform(-delta, delta) * (1.0 + a * a).sqrt();
        let l = LineAB::new(a, p.y - a * p.x + off);
        if l.in_parameter_square() {
            return (p, l);
        }
    }
}

fn duality_check(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::DualityCheck;
    let mut out = Outcome::new(exp);
    let rows: Vec<[u64; 5]> = p
        .deltas
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            let mut rng = SplitMix64::new(row_seed(cfg.seed, exp, &[i as u64]));
            let s = Scale::delta(delta).expect("validated delta");
            let s2 = s.with_multiplier(tol::DUAL_MULTIPLIER).expect("positive multiplier");
            let (mut incident, mut dual_ok, mut sep_pairs, mut sep_ok) = (0u64, 0u64, 0u64, 0u64);
            for _ in 0..p.samples {
                let (pt, l) = incident_pair(&mut rng, delta);
                if !is_incident(&pt, &l, &s) {
                    continue;
                }
                incident += 1;
                let lp = dual_point_to_line(&pt).expect("point in Q0");
                if is_incident(&dual_line_to_point(&l), &lp, &s2) {
                    dual_ok += 1;
                }
                // a second point at distance in [0, 2δ] from the first
                let theta = rng.uniform(0.0, std::f64::consts::TAU);
                let rho = rng.uniform(0.0, 2.0 * delta);
                let q = Point2::new(pt.x + rho * theta.cos(), pt.y + rho * theta.sin());
                if q.in_square() {
                    sep_pairs += 1;
                    let lq = dual_point_to_line(&q).expect("point in Q0");
                    if (pt.dist(&q) >= delta) == (line_metric(&lp, &lq) >= delta) {
                        sep_ok += 1;
                    }
                }
            }
            [p.samples as u64, incident, dual_ok, sep_pairs, sep_ok]
        })
        .collect();
    let mut t = Table::new(
        "rows",
        "random incident pairs",
        &[
            "delta",
            "samples",
            "incident",
            "dual_incident",
            "separation_pairs",
            "separation_preserved",
        ],
    );
    for (d, r) in p.deltas.iter().zip(&rows) {
        t.push(row![d, r[0], r[1], r[2], r[3], r[4]]);
    }
    out.tables.push(t);
    let incident: u64 = rows.iter().map(|r| r[1]).sum();
    let dual: u64 = rows.iter().map(|r| r[2]).sum();
    let pairs: u64 = rows.iter().map(|r| r[3]).sum();
    let sep: u64 = rows.iter().map(|r| r[4]).sum();
    out.check(
        "dual incidence",
        incident > 0 && dual == incident,
        format!(
            "{dual}/{incident} incidences map to {}δ-incidences",
            tol::DUAL_MULTIPLIER
        ),
    );
    out.check(
        "separation classes",
        pairs > 0 && sep == pairs,
        format!("{sep}/{pairs} pairs keep their separation class"),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// star-bound

fn star_bound(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::StarBound;
    let mut out = Outcome::new(exp);
    let eps: Vec<(f64, f64)> = if p.epsilons.is_empty() {
        p.deltas.iter().map(|&d| (d, d)).collect()
    } else {
        p.deltas.iter().copied().zip(p.epsilons.iter().copied()).collect()
    };
    struct R {
        delta: f64,
        epsilon: f64,
        family: &'static str,
        center: Point2,
        size: usize,
        concurrency: usize,
    }
    let rows: Vec<Result<Vec<R>>> = eps
        .par_iter()
        .enumerate()
        .map(|(i, &(delta, epsilon))| {
            let mut rng = SplitMix64::new(row_seed(cfg.seed, exp, &[i as u64]));
            let s = Scale::new(delta, epsilon, 1.0)?;
            let mut centers = vec![Point2::new(0.0, 0.0)];
            while centers.len() < p.samples {
                centers.push(Point2::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
            }
            let mut rs = Vec::new();
            for &c0 in &centers {
                let fam = greedy_concurrent_family(&c0, epsilon)?;
                rs.push(R {
                    delta,
                    epsilon,
                    family: "greedy_concurrent",
                    center: c0,
                    size: fam.len(),
                    concurrency: max_concurrency(&fam, &c0, &s),
                });
            }
            // half of the sites of the 2ε-lattice, probed at the same centers
            let side = (1.0 / epsilon).floor() as usize + 1;
            let (_, random) = gen_random(0, side * side / 2, epsilon, rng.next_u64())?;
            for &c0 in &centers {
                rs.push(R {
                    delta,
                    epsilon,
                    family: "random",
                    center: c0,
                    size: random.len(),
                    concurrency: max_concurrency(&random, &c0, &s),
                });
            }
            // the full ε-lattice of 𝒬0, reported only
            let lattice = lattice_family(epsilon)?;
            rs.push(R {
                delta,
                epsilon,
                family: "lattice",
                center: centers[0],
                size: lattice.len(),
                concurrency: max_concurrency(&lattice, &centers[0], &s),
            });
            Ok(rs)
        })
        .collect();
    let mut t = Table::new(
        "rows",
        "greedy_concurrent random lattice",
        &[
            "delta",
            "epsilon",
            "family",
            "center_x",
            "center_y",
            "size",
            "concurrency",
            "concurrency_x_epsilon",
        ],
    );
    let (mut lower_fail, mut upper_fail, mut checked) = (Vec::new(), Vec::new(), 0usize);
    let mut worst_upper: f64 = 0.0;
    let mut worst_lower = f64::INFINITY;
    let mut lattice_max: f64 = 0.0;
    for rs in &rows {
        let rs = rs.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        for r in rs {
            let scaled = r.concurrency as f64 * r.epsilon;
            t.push(row![
                r.delta,
                r.epsilon,
                r.family,
                r.center.x,
                r.center.y,
                r.size,
                r.concurrency,
                scaled
            ]);
            if r.family == "lattice" {
                lattice_max = lattice_max.max(scaled);
                continue;
            }
            checked += 1;
            worst_upper = worst_upper.max(scaled);
            if r.concurrency as f64 > tol::STAR_UPPER / r.epsilon {
                upper_fail.push(format!(
                    "{} eps={} at ({}, {})",
                    r.family, r.epsilon, r.center.x, r.center.y
                ));
            }
            if r.family == "greedy_concurrent" {
                worst_lower = worst_lower.min(scaled);
                if (r.concurrency as f64) < tol::STAR_LOWER / r.epsilon {
                    lower_fail.push(format!("eps={} at ({}, {})", r.epsilon, r.center.x, r.center.y));
                }
            }
        }
    }
    out.tables.push(t);
    out.measure("min_greedy_concurrency_x_epsilon", worst_lower);
    out.measure("max_concurrency_x_epsilon", worst_upper);
    out.measure("lattice_concurrency_x_epsilon", lattice_max);
    out.check(
        "greedy lower bound",
        lower_fail.is_empty(),
        format!(
            "min concurrency·ε = {worst_lower:.3} (need >= {}) {}",
            tol::STAR_LOWER,
            lower_fail.join("; ")
        ),
    );
    out.check(
        "concurrency upper bound",
        checked > 0 && upper_fail.is_empty(),
        format!(
            "max concurrency·ε = {worst_upper:.3} (need <= {}) {}",
            tol::STAR_UPPER,
            upper_fail.join("; ")
        ),
    );
    Ok(out)
}

/// All lines `(iε, jε)` of `𝒬0`.
pub fn lattice_family(epsilon: f64) -> Result<LineFamily> {
    let n = (1.0 / epsilon).floor() as i64;
    let mut lines = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            lines.push(LineAB::new(i as f64 * epsilon, j as f64 * epsilon));
        }
    }
    LineFamily::new(lines, epsilon)
}

// ---------------------------------------------------------------------------
// lw-sweep

fn lw_sweep(p: &Params) -> Result<Outcome> {
    let mut out = Outcome::new(Experiment::LwSweep);
    // closed-form box rows at h = r/64 and a refinement check at h = r/32
    let box_jobs: Vec<(f64, f64)> = p.radii.iter().flat_map(|&r| [(r, r / 32.0), (r, r / 64.0)]).collect();
    let box_rows: Vec<Result<_>> = box_jobs
        .par_iter()
        .map(|&(r, h)| lw_measure(&voxelize(&Shape::heisenberg_box(r), h)?, DEFAULT_OVERSAMPLE))
        .collect();
    let mut t = Table::new(
        "box",
        "heisenberg box [-r,r]^2 x [-r^2,r^2]",
        &[
            "r",
            "h",
            "volume",
            "area_x",
            "area_y",
            "ratio",
            "exact_volume",
            "exact_area",
            "exact_ratio",
            "rel_err",
        ],
    );
    let exact = box_lw_ratio();
    let mut box_fail = Vec::new();
    for (&(r, h), m) in box_jobs.iter().zip(&box_rows) {
        let m = m.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        let rel = (m.ratio - exact).abs() / exact;
        t.push(row![
            r,
            h,
            m.volume,
            m.area_x,
            m.area_y,
            m.ratio,
            8.0 * r.powi(4),
            box_projection_area(r),
            exact,
            rel
        ]);
        if h == r / 64.0 && rel > tol::LW_BOX_REL_TOL {
            box_fail.push(format!("r={r}: rel err {rel:.4}"));
        }
    }
    out.tables.push(t);
    out.measure("box_ratio_exact", exact);
    out.check(
        "box ratio",
        box_fail.is_empty(),
        format!(
            "|ratio - 8·5^(-4/3)| / 8·5^(-4/3) <= {} at h = r/64 {}",
            tol::LW_BOX_REL_TOL,
            box_fail.join("; ")
        ),
    );

    // Shape zoo with dilations. `scaled` rows voxelize δ_λK on the grid
    // (λh, λ²h), which is where the scaling laws are asserted; `fixed` rows
    // reuse (h, h) and show the first-order discretization drift.
    let shapes = select_shapes(&p.shapes)?;
    let lams: Vec<f64> = p.lambdas.iter().copied().filter(|&l| l != 1.0).collect();
    let mut jobs: Vec<(usize, f64, f64, bool)> = Vec::new();
    for i in 0..shapes.len() {
        for &h in &p.hs {
            jobs.push((i, h, 1.0, true));
            for &l in &lams {
                jobs.push((i, h, l, true));
                jobs.push((i, h, l, false));
            }
        }
    }
    let res: Vec<Result<_>> = jobs
        .par_iter()
        .map(|&(i, h, lam, scaled)| {
            let shape = shapes[i].1.clone().dilated(lam);
            let k = if scaled {
                voxelize_aniso(&shape, lam * h, lam * lam * h)?
            } else {
                voxelize(&shape, h)?
            };
            lw_measure(&k, DEFAULT_OVERSAMPLE)
        })
        .collect();
    let mut t = Table::new(
        "zoo",
        "shape zoo",
        &[
            "shape",
            "h",
            "lambda",
            "grid",
            "volume",
            "area_x",
            "area_y",
            "ratio",
            "volume_scale_err",
            "area_scale_err",
        ],
    );
    let mut ceiling: f64 = 0.0;
    let mut dil_fail = Vec::new();
    let (mut worst_dil, mut worst_fixed): (f64, f64) = (0.0, 0.0);
    for (idx, &(i, h, lam, scaled)) in jobs.iter().enumerate() {
        let m = res[idx].as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        ceiling = ceiling.max(m.ratio);
        let base = jobs
            .iter()
            .position(|&(j, hh, l, _)| j == i && hh == h && l == 1.0)
            .and_then(|b| res[b].as_ref().ok())
            .expect("base row precedes dilations");
        let ve = (m.volume / base.volume / lam.powi(4) - 1.0).abs();
        let ae = [m.area_x / base.area_x, m.area_y / base.area_y]
            .iter()
            .map(|r| (r / lam.powi(3) - 1.0).abs())
            .fold(0.0, f64::max);
        if scaled {
            worst_dil = worst_dil.max(ve).max(ae);
            if ve > tol::DILATION_REL_TOL || ae > tol::DILATION_REL_TOL {
                dil_fail.push(format!(
                    "{} h={h} lambda={lam}: volume {ve:.4} area {ae:.4}",
                    shapes[i].0
                ));
            }
        } else {
            worst_fixed = worst_fixed.max(ve).max(ae);
        }
        let grid = if scaled { "scaled" } else { "fixed" };
        t.push(row![
            shapes[i].0,
            h,
            lam,
            grid,
            m.volume,
            m.area_x,
            m.area_y,
            m.ratio,
            ve,
            ae
        ]);
    }
    out.tables.push(t);
    out.measure("lw_ceiling", ceiling);
    out.measure("worst_dilation_rel_err", worst_dil);
    out.measure("fixed_grid_dilation_rel_err", worst_fixed);
    out.check(
        "LW ceiling",
        ceiling <= tol::LW_CEILING,
        format!("max ratio over the zoo = {ceiling:.4} (limit {})", tol::LW_CEILING),
    );
    out.check(
        "dilation scaling",
        dil_fail.is_empty(),
        format!(
            "worst relative error {worst_dil:.4} (limit {}) {}",
            tol::DILATION_REL_TOL,
            dil_fail.join("; ")
        ),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// tube-volume

fn tube_volume(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::TubeVolume;
    let mut out = Outcome::new(exp);
    let mut rng = SplitMix64::new(row_seed(cfg.seed, exp, &[0]));
    let mut qs = vec![HPoint::ORIGIN];
    while qs.len() < p.samples {
        qs.push(HPoint::new(
            rng.uniform(-0.5, 0.5),
            rng.uniform(-0.5, 0.5),
            rng.uniform(-0.25, 0.25),
        ));
    }
    let jobs: Vec<(usize, f64)> = (0..qs.len())
        .flat_map(|i| p.deltas.iter().map(move |&d| (i, d)))
        .collect();
    let vols: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, d)| tube_intersection_volume(&proj_x(&qs[i]), &proj_y(&qs[i]), &Scale::delta(d)?, DEFAULT_A1))
        .collect();
    let mut t = Table::new(
        "rows",
        "fibers through random points",
        &["pair", "q_x", "q_y", "q_t", "delta", "volume", "volume_over_delta3"],
    );
    let mut per_pair: Vec<Vec<f64>> = vec![Vec::new(); qs.len()];
    for (&(i, d), v) in jobs.iter().zip(&vols) {
        let v = *v.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        let n = v / d.powi(3);
        per_pair[i].push(n);
        t.push(row![i, qs[i].x, qs[i].y, qs[i].t, d, v, n]);
    }
    out.tables.push(t);
    let all: Vec<f64> = per_pair.iter().flatten().copied().collect();
    let ceiling = all.iter().copied().fold(0.0, f64::max);
    let worst_spread = per_pair.iter().map(|v| spread(v)).fold(0.0, f64::max);
    out.measure("tube_volume_ceiling", ceiling);
    out.measure("tube_volume_spread", worst_spread);
    out.check(
        "tube volume ceiling",
        ceiling <= tol::TUBE_VOLUME_CEILING,
        format!("max |T_x ∩ T_y|/δ³ = {ceiling:.3} (limit {})", tol::TUBE_VOLUME_CEILING),
    );
    out.check(
        "tube volume stability",
        worst_spread <= tol::TUBE_VOLUME_SPREAD,
        format!(
            "worst max/min across delta = {worst_spread:.3} (limit {})",
            tol::TUBE_VOLUME_SPREAD
        ),
    );

    // measured A₁ and A
    let consts: Vec<Result<(f64, f64)>> = p
        .deltas
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let s = Scale::delta(d)?;
            let mut rng = SplitMix64::new(row_seed(cfg.seed, exp, &[1, i as u64]));
            let (mut a1, mut a): (f64, f64) = (0.0, 0.0);
            for j in 0..64u64 {
                let (u, tt) = (rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
                for w in [VerticalPlanePoint::wx(u, tt), VerticalPlanePoint::wy(u, tt)] {
                    let seed = rng.next_u64() ^ j;
                    a1 = a1.max(tube_inclusion_check(&w, &s, 256, seed));
                    a = a.max(core_projection_check(&w, &s, 256, seed)?);
                }
            }
            Ok((a1, a))
        })
        .collect();
    let mut t = Table::new("constants", "random fibers in W_x and W_y", &["delta", "a1", "a"]);
    let (mut a1max, mut amax): (f64, f64) = (0.0, 0.0);
    for (d, r) in p.deltas.iter().zip(&consts) {
        let (a1, a) = *r.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        a1max = a1max.max(a1);
        amax = amax.max(a);
        t.push(row![d, a1, a]);
    }
    out.tables.push(t);
    out.measure("A1", a1max);
    out.measure("A", amax);
    out.check(
        "A1 within default",
        a1max <= DEFAULT_A1,
        format!("measured A1 = {a1max:.4} (default {DEFAULT_A1})"),
    );
    out.check(
        "A within default",
        amax <= DEFAULT_A,
        format!("measured A = {amax:.4} (default {DEFAULT_A})"),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// sobolev-check

/// `(1 - |p|²/w²)₊⁴`, a `C³` bump, and its exact `X` and `Y` derivatives.
fn c3_bump(w: f64, p: &HPoint) -> (f64, f64, f64) {
    let s = 1.0 - (p.x * p.x + p.y * p.y + p.t * p.t) / (w * w);
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = -8.0 * s * s * s / (w * w);
    let (fx, fy, ft) = (d * p.x, d * p.y, d * p.t);
    (s.powi(4), fx - 0.5 * p.y * ft, fy + 0.5 * p.x * ft)
}

/// Max-norm errors of the `X` and `Y` stencils on the `C³` bump at spacing `h`.
pub fn stencil_errors(h: f64) -> Result<(f64, f64)> {
    let w = 0.5;
    let f = GridFunction::sample(h, &Aabb::cube(w), |p| c3_bump(w, p).0)?;
    let (gx, gy) = (field_X(&f)?, field_Y(&f)?);
    let [nx, ny, nz] = f.dims();
    let (mut ex, mut ey): (f64, f64) = (0.0, 0.0);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let idx = i + nx * (j + ny * k);
                let (_, xf, yf) = c3_bump(w, &f.center(i, j, k));
                ex = ex.max((gx.values()[idx] - xf).abs());
                ey = ey.max((gy.values()[idx] - yf).abs());
            }
        }
    }
    Ok((ex, ey))
}

fn sobolev_check(p: &Params) -> Result<Outcome> {
    let mut out = Outcome::new(Experiment::SobolevCheck);
    let funcs = select_functions(&p.functions)?;
    let jobs: Vec<(usize, f64)> = (0..funcs.len())
        .flat_map(|i| p.hs.iter().map(move |&h| (i, h)))
        .collect();
    struct R {
        gns: crate::sobolev::GnsCheck,
        levels: Vec<crate::sobolev::LevelSetCheck>,
    }
    let res: Vec<Result<R>> = jobs
        .par_iter()
        .map(|&(i, h)| {
            let f = funcs[i].1.sample(h)?;
            Ok(R {
                gns: gns_check(&f)?,
                levels: levelset_checks_all(&f)?,
            })
        })
        .collect();
    let mut tg = Table::new(
        "gns",
        "function zoo",
        &["function", "h", "lambda", "lhs", "rhs", "ratio"],
    );
    let mut tl = Table::new(
        "levelsets",
        "function zoo",
        &["function", "h", "plane", "k", "lhs", "rhs_cells", "rhs_fiber", "holds"],
    );
    let mut gns_ceiling: f64 = 0.0;
    let mut level_fail = Vec::new();
    let mut worst_level: f64 = 0.0;
    let mut base_ratio = vec![f64::NAN; funcs.len()];
    for (&(i, h), r) in jobs.iter().zip(&res) {
        let r = r.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        gns_ceiling = gns_ceiling.max(r.gns.ratio);
        if h == p.hs[0] {
            base_ratio[i] = r.gns.ratio;
        }
        tg.push(row![funcs[i].0, h, 1.0, r.gns.lhs, r.gns.rhs, r.gns.ratio]);
        for l in &r.levels {
            let plane = match l.plane {
                Plane::Wx => "x",
                Plane::Wy => "y",
            };
            if l.rhs_fiber > 0.0 {
                worst_level = worst_level.max(l.lhs / l.rhs_fiber);
            }
            if !l.holds {
                level_fail.push(format!("{} h={h} plane={plane} k={}", funcs[i].0, l.k));
            }
            tl.push(row![
                funcs[i].0,
                h,
                plane,
                l.k,
                l.lhs,
                l.rhs_cells,
                l.rhs_fiber,
                l.holds
            ]);
        }
    }
    // dilation invariance: f∘δ_{1/λ} sampled at λh has the same x and y resolution
    let h0 = p.hs[0];
    let djobs: Vec<(usize, f64)> = (0..funcs.len())
        .flat_map(|i| p.lambdas.iter().map(move |&l| (i, l)))
        .collect();
    let dres: Vec<Result<crate::sobolev::GnsCheck>> = djobs
        .par_iter()
        .map(|&(i, lam)| gns_check(&funcs[i].1.clone().dilated(lam).sample(lam * h0)?))
        .collect();
    let mut dil_fail = Vec::new();
    let mut worst_dil: f64 = 0.0;
    for (&(i, lam), r) in djobs.iter().zip(&dres) {
        let r = r.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        gns_ceiling = gns_ceiling.max(r.ratio);
        let rel = (r.ratio / base_ratio[i] - 1.0).abs();
        worst_dil = worst_dil.max(rel);
        if rel > tol::GNS_DILATION_REL_TOL {
            dil_fail.push(format!("{} lambda={lam}: {rel:.4}", funcs[i].0));
        }
        tg.push(row![funcs[i].0, lam * h0, lam, r.lhs, r.rhs, r.ratio]);
    }
    out.tables.push(tg);
    out.tables.push(tl);

    let hs = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let errs: Vec<(f64, f64)> = hs.par_iter().map(|&h| stencil_errors(h)).collect::<Result<_>>()?;
    let mut ts = Table::new(
        "stencil",
        "C3 bump (1-|p|^2/w^2)^4, w=1/2",
        &["h", "err_x", "err_y", "ratio_x", "ratio_y"],
    );
    let mut min_ratio = f64::INFINITY;
    for (i, (&h, e)) in hs.iter().zip(&errs).enumerate() {
        let (rx, ry) = if i == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (errs[i - 1].0 / e.0, errs[i - 1].1 / e.1)
        };
        if i > 0 {
            min_ratio = min_ratio.min(rx).min(ry);
        }
        ts.push(row![h, e.0, e.1, rx, ry]);
    }
    out.tables.push(ts);

    out.measure("gns_ceiling", gns_ceiling);
    out.measure("worst_levelset_ratio", worst_level);
    out.measure("worst_gns_dilation_rel_err", worst_dil);
    out.measure("min_stencil_convergence", min_ratio);
    out.check(
        "level-set lemma",
        level_fail.is_empty(),
        format!(
            "worst lhs/rhs = {worst_level:.4} (slack {}) {}",
            tol::LEVELSET_SLACK,
            level_fail.join("; ")
        ),
    );
    out.check(
        "GNS ceiling",
        gns_ceiling <= tol::GNS_CEILING,
        format!("max ratio = {gns_ceiling:.4} (limit {})", tol::GNS_CEILING),
    );
    out.check(
        "GNS dilation invariance",
        dil_fail.is_empty(),
        format!(
            "worst relative change {worst_dil:.4} (limit {}) {}",
            tol::GNS_DILATION_REL_TOL,
            dil_fail.join("; ")
        ),
    );
    out.check(
        "stencil convergence",
        min_ratio >= tol::STENCIL_CONVERGENCE_MIN,
        format!(
            "min error ratio on h-halving = {min_ratio:.3} (need >= {})",
            tol::STENCIL_CONVERGENCE_MIN
        ),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// isoperimetric

fn isoperimetric(cfg: &ExperimentConfig, p: &Params) -> Result<Outcome> {
    let exp = Experiment::Isoperimetric;
    let mut out = Outcome::new(exp);
    let h0 = p.hs[0];
    let res: Vec<Result<Vec<[String; 8]>>> = (0..p.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::new(row_seed(cfg.seed, exp, &[i as u64]));
            let e = voxelize(&random_box_union(&mut rng, 4), h0)?;
            let nb = boundary(&e).count();
            let mut rows = Vec::new();
            for plane in [Plane::Wx, Plane::Wy] {
                let rep = boundary_projection_inclusion(&e, plane, DEFAULT_OVERSAMPLE)?;
                rows.push([
                    c(i),
                    c(if plane == Plane::Wx { "x" } else { "y" }),
                    c(h0),
                    c(e.count()),
                    c(nb),
                    c(rep.projected_cells),
                    c(rep.missing.len()),
                    c(rep.holds),
                ]);
            }
            Ok(rows)
        })
        .collect();
    let mut t = Table::new(
        "inclusion",
        "random box unions",
        &[
            "instance",
            "plane",
            "h",
            "voxels",
            "boundary_voxels",
            "projected_cells",
            "missing",
            "holds",
        ],
    );
    let mut fails = 0;
    let mut checked = 0;
    for r in res {
        for row in r.map_err(|e| LabError::Infeasible(e.to_string()))? {
            checked += 1;
            if row[7] != "true" {
                fails += 1;
            }
            t.push(row.to_vec());
        }
    }
    out.tables.push(t);
    out.check(
        "boundary projection inclusion",
        fails == 0,
        format!("{}/{checked} projections contain the projection of E", checked - fails),
    );

    // λ = 1 rows over all h; dilations at h0 on the scaled grid (λh0, λ²h0)
    // (asserted) and on the fixed grid (h0, h0) (reported)
    let shapes = select_shapes(&p.shapes)?;
    let lams: Vec<f64> = p.lambdas.iter().copied().filter(|&l| l != 1.0).collect();
    let mut jobs: Vec<(usize, f64, f64, bool)> = Vec::new();
    for i in 0..shapes.len() {
        for &h in &p.hs {
            jobs.push((i, h, 1.0, true));
        }
        for &l in &lams {
            jobs.push((i, h0, l, true));
            jobs.push((i, h0, l, false));
        }
    }
    let vals: Vec<Result<(f64, f64, f64)>> = jobs
        .par_iter()
        .map(|&(i, h, lam, scaled)| {
            let shape = shapes[i].1.clone().dilated(lam);
            let e = if scaled {
                voxelize_aniso(&shape, lam * h, lam * lam * h)?
            } else {
                voxelize(&shape, h)?
            };
            let sur = h3_surrogate(&boundary(&e));
            Ok((e.volume(), sur, weak_isoperimetric_ratio(&e)?))
        })
        .collect();
    let mut t = Table::new(
        "ratios",
        "shape zoo",
        &["shape", "h", "lambda", "grid", "volume", "h3_surrogate", "ratio"],
    );
    let mut fail = Vec::new();
    let mut worst: f64 = 0.0;
    let mut per_shape: Vec<Vec<f64>> = vec![Vec::new(); shapes.len()];
    let mut per_shape_h: Vec<Vec<f64>> = vec![Vec::new(); shapes.len()];
    let mut fixed: Vec<Vec<f64>> = vec![Vec::new(); shapes.len()];
    for (&(i, h, lam, scaled), v) in jobs.iter().zip(&vals) {
        let (vol, sur, ratio) = *v.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        if lam == 1.0 {
            per_shape_h[i].push(ratio);
            if h == h0 {
                per_shape[i].push(ratio);
                fixed[i].push(ratio);
            }
        } else if scaled {
            per_shape[i].push(ratio);
        } else {
            fixed[i].push(ratio);
        }
        let grid = if scaled { "scaled" } else { "fixed" };
        t.push(row![shapes[i].0, h, lam, grid, vol, sur, ratio]);
    }
    out.tables.push(t);
    for (i, (name, _)) in shapes.iter().enumerate() {
        let sd = spread(&per_shape[i]);
        let sh = spread(&per_shape_h[i]);
        worst = worst.max(sd).max(sh);
        if sd > tol::ISO_SPREAD {
            fail.push(format!("{name}: dilation spread {sd:.3}"));
        }
        if sh > tol::ISO_SPREAD {
            fail.push(format!("{name}: refinement spread {sh:.3}"));
        }
    }
    let worst_fixed = fixed.iter().map(|v| spread(v)).fold(0.0, f64::max);
    out.measure("worst_isoperimetric_spread", worst);
    out.measure("fixed_grid_dilation_spread", worst_fixed);
    out.check(
        "isoperimetric stability",
        fail.is_empty(),
        format!(
            "worst max/min = {worst:.3} (limit {}) {}",
            tol::ISO_SPREAD,
            fail.join("; ")
        ),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// reduce-pipeline

fn reduce_pipeline(p: &Params) -> Result<Outcome> {
    let mut out = Outcome::new(Experiment::ReducePipeline);
    let jobs: Vec<(f64, f64)> = p
        .radii
        .iter()
        .flat_map(|&r| p.deltas.iter().map(move |&d| (r, d)))
        .collect();
    let res: Vec<Result<_>> = jobs
        .par_iter()
        .map(|&(r, d)| reduce_shape(&Shape::heisenberg_box(r), d, DEFAULT_A, DEFAULT_OVERSAMPLE))
        .collect();
    let mut t = Table::new(
        "rows",
        "heisenberg box [-r,r]^2 x [-r^2,r^2]",
        &[
            "r",
            "delta",
            "volume",
            "n_px",
            "n_py",
            "count",
            "multiplier",
            "overshoot",
        ],
    );
    let mut under = Vec::new();
    let mut per_r: Vec<(f64, Vec<f64>)> = Vec::new();
    for (&(r, d), row) in jobs.iter().zip(&res) {
        let row = row.as_ref().map_err(|e| LabError::Infeasible(e.to_string()))?;
        if row.overshoot < 1.0 {
            under.push(format!("r={r} delta={d}: {:.4}", row.overshoot));
        }
        match per_r.iter_mut().find(|v| v.0 == r) {
            Some(v) => v.1.push(row.overshoot),
            None => per_r.push((r, vec![row.overshoot])),
        }
        t.push(row![
            r,
            d,
            row.volume,
            row.n_px,
            row.n_py,
            row.count,
            row.multiplier,
            row.overshoot
        ]);
    }
    out.tables.push(t);
    let worst = per_r.iter().map(|v| spread(&v.1)).fold(0.0, f64::max);
    let all: Vec<f64> = per_r.iter().flat_map(|v| v.1.iter().copied()).collect();
    out.measure("overshoot_min", all.iter().copied().fold(f64::INFINITY, f64::min));
    out.measure("overshoot_max", all.iter().copied().fold(0.0, f64::max));
    out.measure("A", DEFAULT_A);
    out.check(
        "count dominates volume",
        under.is_empty(),
        format!("δ³·count >= |K| on every row {}", under.join("; ")),
    );
    out.check(
        "overshoot stability",
        worst <= tol::OVERSHOOT_SPREAD,
        format!("worst max/min overshoot = {worst:.3} (limit {})", tol::OVERSHOOT_SPREAD),
    );
    Ok(out)
}
