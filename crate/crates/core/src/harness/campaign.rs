use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::CampaignConfig;
use super::io::{csv_file, num};
use super::oracle::{order_statistic, rmt_oracle, Ensemble};
use super::reference::{bes3_cdf, pair_marginal_cdfs, pair_marginal_nodes, TabulatedCdf};
use super::stats::{ks_compare, linspace, sup_diff, EmpiricalCdf, MCReport};
use crate::diffusion1d::{
    bm, bm_halfline, bm_interval, catalog, classify_boundary, jacobi, kernel, laguerre, ou, spectrum, BoundaryClass, DualPair,
    Endpoint, KernelSource,
};
use crate::edgekernels::{build_edge_table, edge_max_cdf, edge_min_cdf, EdgeOperatorTable};
use crate::error::{Error, Result};
use crate::kmgroup::{
    build_eigenfunction_recursive, eigen_residual, eigenfunction_catalog, entrance_law, ground_state, h_transform_density,
    polynomial_ensemble_limit, ChainLevel, EigenChain, EigenFamily, Eigenfunction, EntranceFamily,
};
use crate::linalg::det_with;
use crate::reflectsde::{
    gt_ladder, run_paths, simulate_edge, skorokhod_map, EdgeSide, GtInit, GtSim, PathBundle, RngStreams, SimConfig, TwoLevelInit,
    TwoLevelSim,
};
use crate::twolevel::{chapman_residual, InterlacingConfig, InterlacingShape, ShapeTag, TestFunction, TwoLevel};

/// Campaign ids known to [`run_campaign`].
pub const CAMPAIGNS: [&str; 10] = [
    "duality-catalog",
    "boundary-table",
    "chapman",
    "master-intertwining",
    "warren-dyson",
    "entrance-gt",
    "edge-cdf",
    "eigen-structure",
    "polynomial-ensemble",
    "skorokhod",
];

/// One scalar compared against its tolerance; passes when `value ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub id: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub mc: Vec<(String, MCReport)>,
    pub notes: Vec<String>,
    pub runtime_s: f64,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest `value / tolerance` over the checks.
    pub fn worst_ratio(&self) -> f64 {
        self.checks.iter().map(|c| c.value / c.tolerance).fold(f64::NEG_INFINITY, f64::max)
    }

    fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        let pass = value.is_finite() && value <= tolerance;
        self.checks.push(Check { name: name.into(), value, tolerance, pass });
    }

    fn mc(&mut self, name: impl Into<String>, report: MCReport, tolerance: f64) {
        let name = name.into();
        self.push(format!("{name} KS"), report.ks, tolerance);
        self.mc.push((name, report));
    }
}

/// Acceptance-level parameters and tolerances for a campaign id.
pub fn default_config(id: &str) -> Result<CampaignConfig> {
    let c = CampaignConfig::new(id, "");
    let c = match id {
        "duality-catalog" => c
            .param("families", "bm_halfline:refl;bm_halfline:abs;bm;ou;besq:2.5;besq:3")
            .param("sign", 1)
            .tolerance("closed", 1e-8)
            .tolerance("quad", 1e-6),
        "boundary-table" => c.tolerance("mismatch", 0.5),
        "chapman" => c.param("s", 0.5).param("t", 0.5).tolerance("rel", 1e-3),
        "master-intertwining" => c.param("t", 0.5).tolerance("residual", 1e-4),
        "warren-dyson" => c
            .param("paths", 20_000)
            .param("dt", 5e-4)
            .param("cells", 800)
            .tolerance("ks", 0.02)
            .tolerance("mass", 1e-4)
            .tolerance("stopped", 1e-3),
        "entrance-gt" => c
            .param("paths", 20_000)
            .param("dt", 5e-4)
            .param("t0", 1e-3)
            .param("oracle", 400_000)
            .tolerance("ks", 0.02)
            .tolerance("stopped", 1e-3),
        "edge-cdf" => c
            .param("paths", 20_000)
            .param("dt", 1e-4)
            .param("oracle", 400_000)
            .param("grid", 81)
            .tolerance("sup", 0.02),
        "eigen-structure" => c.param("t", 0.5).tolerance("residual", 1e-6).tolerance("rate", 1e-12).tolerance("ratio", 1e-8),
        "polynomial-ensemble" => c.tolerance("pointwise", 1e-8),
        "skorokhod" => c
            .param("trials", 500)
            .param("paths", 20_000)
            .param("dts", "4e-3,2e-3,1e-3")
            .param("cells", 800)
            .tolerance("mismatch", 0.5)
            .tolerance("lipschitz", 4.0)
            .tolerance("band", 0.0096),
        _ => return Err(Error::Config(format!("unknown campaign '{id}'; known: {}", CAMPAIGNS.join(", ")))),
    };
    Ok(c)
}

/// Runs a campaign without touching the file system.
pub fn execute(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let run = || {
        let clock = Instant::now();
        let mut rep = CampaignReport { id: cfg.id.clone(), seed: cfg.seed, checks: vec![], mc: vec![], notes: vec![], runtime_s: 0.0 };
        match cfg.id.as_str() {
            "duality-catalog" => duality_catalog(cfg, &mut rep),
            "boundary-table" => boundary_table(cfg, &mut rep),
            "chapman" => chapman(cfg, &mut rep),
            "master-intertwining" => master_intertwining(cfg, &mut rep),
            "warren-dyson" => warren_dyson(cfg, &mut rep),
            "entrance-gt" => entrance_gt(cfg, &mut rep),
            "edge-cdf" => edge_cdf(cfg, &mut rep),
            "eigen-structure" => eigen_structure(cfg, &mut rep),
            "polynomial-ensemble" => polynomial_ensemble(cfg, &mut rep),
            "skorokhod" => skorokhod(cfg, &mut rep),
            other => Err(Error::Config(format!("unknown campaign '{other}'"))),
        }
        .map_err(|e| context(&cfg.id, e))?;
        rep.runtime_s = clock.elapsed().as_secs_f64();
        Ok(rep)
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn context(id: &str, e: Error) -> Error {
    match e {
        Error::Budget(m) => Error::Budget(format!("campaign {id}: {m}")),
        Error::Config(m) => Error::Config(format!("campaign {id}: {m}")),
        other => other,
    }
}

/// Runs a campaign and writes `<out>/<id>.csv` and `<out>/<id>.summary.json`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let rep = execute(cfg)?;
    let mut w = csv_file(&cfg.out_dir.join(format!("{}.csv", cfg.id)), &["check", "value", "tolerance", "pass"])?;
    for c in &rep.checks {
        w.row([c.name.clone(), num(c.value), num(c.tolerance), c.pass.to_string()])?;
    }
    w.finish()?;
    let summary = serde_json::to_string_pretty(&rep).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(cfg.out_dir.join(format!("{}.summary.json", cfg.id)), summary)?;
    Ok(rep)
}

fn oracle_rng(seed: u64) -> ChaCha8Rng {
    // Stream id outside the range used by the simulation streams.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

fn stopped_fraction(bundles: &[PathBundle]) -> f64 {
    bundles.iter().filter(|b| b.stopped()).count() as f64 / bundles.len().max(1) as f64
}

fn duality_catalog(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let families = cfg.get_str("families").unwrap_or("bm;ou").to_string();
    let sign = cfg.get_f64("sign", 1.0)?;
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Config(format!("sign must be ±1, got {sign}")));
    }
    let (closed_tol, quad_tol) = (cfg.tol("closed")?, cfg.tol("quad")?);
    for id in families.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let spec = catalog(id)?;
        let pair = DualPair::new(&spec)?;
        let closed = pair.kernel.source == KernelSource::ClosedForm && pair.dual.source == KernelSource::ClosedForm;
        let pts = spec.probe_points(5);
        let mut worst: f64 = 0.0;
        for &t in &[0.25, 0.5, 1.0] {
            for &x in &pts {
                for &y in &pts {
                    let lhs = pair.kernel.cdf(t, x, y);
                    let rhs = pair.dual.sf(t, y, x);
                    // sign = −1 flips the orientation of the dual indicator.
                    let rhs = if sign > 0.0 { rhs } else { 1.0 - rhs };
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        let tol = if closed { closed_tol } else { quad_tol };
        rep.push(format!("duality {id}"), worst, tol);
    }
    Ok(())
}

/// Feller classes of `(left, right)` for a catalog id and for its conjugate.
type BoundaryRow = (&'static str, [BoundaryClass; 2], [BoundaryClass; 2]);

fn boundary_expectations() -> Vec<BoundaryRow> {
    use BoundaryClass::*;
    vec![
        ("bm", [Natural, Natural], [Natural, Natural]),
        ("ou", [Natural, Natural], [Natural, Natural]),
        ("besq:0.5", [Regular, Natural], [Regular, Natural]),
        ("besq:1", [Regular, Natural], [Regular, Natural]),
        ("besq:2", [Entrance, Natural], [Exit, Natural]),
        ("besq:3", [Entrance, Natural], [Exit, Natural]),
        ("jac:1,1", [Entrance, Entrance], [Exit, Exit]),
        ("gbm:0.25", [Natural, Natural], [Natural, Natural]),
    ]
}

fn boundary_table(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let tol = cfg.tol("mismatch")?;
    let mut mismatches = 0usize;
    for (id, want, want_conj) in boundary_expectations() {
        let spec = catalog(id)?;
        let conj = spec.conjugate()?;
        for (k, e) in [Endpoint::Left, Endpoint::Right].into_iter().enumerate() {
            for (s, expect, tag) in [(&spec, want[k], ""), (&conj, want_conj[k], "conjugate of ")] {
                let got = classify_boundary(s, e);
                let ok = matches!(got, Ok(c) if c == expect);
                if !ok {
                    mismatches += 1;
                }
                rep.notes.push(format!("{tag}{id} at {e}: expected {expect}, got {}", got.map_or_else(|e| e.to_string(), |c| c.to_string())));
            }
        }
    }
    rep.push("classification mismatches", mismatches as f64, tol);
    Ok(())
}

/// Probe pairs `(z, z′)` on `W^{1,2}` with the X level listed first.
const CHAPMAN_PROBES: [([f64; 2], f64, [f64; 2], f64); 5] = [
    ([-1.0, 1.0], 0.0, [-0.5, 1.2], 0.3),
    ([-0.3, 0.8], 0.1, [0.0, 1.5], 0.9),
    ([0.0, 2.0], 1.0, [-0.4, 0.6], 0.2),
    ([-1.5, -0.2], -0.7, [-1.0, 0.4], -0.5),
    ([0.5, 1.0], 0.7, [-0.2, 1.8], 1.1),
];

fn chapman(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let (s, t) = (cfg.get_f64("s", 0.5)?, cfg.get_f64("t", 0.5)?);
    let tol = cfg.tol("rel")?;
    let shape = InterlacingShape::new(ShapeTag::NNplus1, 1);
    let spec = bm();
    let rels: Vec<f64> = CHAPMAN_PROBES
        .par_iter()
        .map(|(x, y, xp, yp)| {
            let z = InterlacingConfig::new(shape, x.to_vec(), vec![*y])?;
            let z2 = InterlacingConfig::new(shape, xp.to_vec(), vec![*yp])?;
            Ok(chapman_residual(&spec, shape, s, t, &z, &z2)?.rel())
        })
        .collect::<Result<_>>()?;
    for (i, r) in rels.into_iter().enumerate() {
        rep.push(format!("chapman probe {}", i + 1), r, tol);
    }
    Ok(())
}

const TEST_BASIS: [&str; 5] = ["one", "xsum", "ysum", "sum", "bump:0.7"];

fn master_intertwining(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let t = cfg.get_f64("t", 0.5)?;
    let tol = cfg.tol("residual")?;
    let cases: Vec<(&str, TwoLevel, Eigenfunction, Vec<f64>, Vec<f64>)> = vec![
        (
            "dyson 1->2",
            TwoLevel::new(&bm(), InterlacingShape::new(ShapeTag::NNplus1, 1))?,
            eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 1)?,
            vec![-1.0, 1.0],
            vec![0.0],
        ),
        (
            "half-line W11",
            TwoLevel::new(&bm_halfline(false), InterlacingShape::new(ShapeTag::NN, 1))?,
            Eigenfunction::constant(0.0, f64::INFINITY),
            vec![1.0],
            vec![0.5],
        ),
        (
            "besq3 W12",
            TwoLevel::new(&catalog("besq:3")?, InterlacingShape::new(ShapeTag::NNplus1, 1))?,
            eigenfunction_catalog(&EigenFamily::ConjugateVandermonde(catalog("besq:3")?), 1)?,
            vec![0.5, 2.0],
            vec![1.0],
        ),
    ];
    let jobs: Vec<(usize, &str)> = (0..cases.len()).flat_map(|c| TEST_BASIS.iter().map(move |f| (c, *f))).collect();
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, fid)| {
            let (_, tl, h, x, y) = &cases[c];
            let f = TestFunction::from_id(fid, x, y)?;
            let r = tl.master_intertwining_residual(h, t, &f, x)?;
            Ok(r.abs() / r.lhs.abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    for (c, case) in cases.iter().enumerate() {
        let worst = jobs.iter().zip(&vals).filter(|((k, _), _)| *k == c).map(|(_, v)| *v).fold(0.0, f64::max);
        rep.push(format!("master {}", case.0), worst, tol);
    }
    Ok(())
}

/// Reference marginals of `X(1)` for the two-level Brownian system started
/// from `Λ((−1, 1), ·)`: Dyson Brownian motion from (−1, 1).
pub struct WarrenReference {
    pub lower: TabulatedCdf,
    pub upper: TabulatedCdf,
}

pub const WARREN_START: [f64; 2] = [-1.0, 1.0];
pub const BES3_START: f64 = 1.0;

impl WarrenReference {
    pub fn build(cfg: &CampaignConfig) -> Result<Self> {
        let cells = cfg.get_u64("cells", 800)? as usize;
        cfg.charge_nodes(pair_marginal_nodes(cells))?;
        let k = kernel(&bm())?;
        let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2)?;
        let (lower, upper) =
            pair_marginal_cdfs(|u, v| h_transform_density(&k, &h, 1.0, &WARREN_START, &[u, v]).unwrap_or(0.0), -8.0, 8.0, cells)?;
        Ok(Self { lower, upper })
    }
}

/// KS reports `(dyson lower, dyson upper, bes3)` and the stopped fraction
/// at one step size.
pub fn warren_runs(reference: &WarrenReference, seed: u64, paths: u64, dt: f64) -> Result<([MCReport; 3], f64)> {
    let streams = RngStreams::new(seed);
    let sim_cfg = SimConfig::new(1.0, dt);
    let clock = Instant::now();
    let dyson = TwoLevelSim::new(&bm(), InterlacingShape::new(ShapeTag::NNplus1, 1), None)?;
    let init = TwoLevelInit::Lambda(WARREN_START.to_vec());
    let bs = run_paths(paths, |p| dyson.run(&init, &sim_cfg, &streams, p))?;
    let stop_d = stopped_fraction(&bs);
    let lo: Vec<f64> = bs.iter().map(|b| b.terminal(1)[0]).collect();
    let hi: Vec<f64> = bs.iter().map(|b| b.terminal(1)[1]).collect();
    drop(bs);
    let secs = clock.elapsed().as_secs_f64();
    let r_lo = ks_compare(&lo, |z| reference.lower.eval(z))?.with_seed(seed).with_runtime(secs);
    let r_hi = ks_compare(&hi, |z| reference.upper.eval(z))?.with_seed(seed).with_runtime(secs);

    let clock = Instant::now();
    let half = TwoLevelSim::new(&bm_halfline(false), InterlacingShape::new(ShapeTag::NN, 1), None)?;
    let init = TwoLevelInit::Lambda(vec![BES3_START]);
    let bs = run_paths(paths, |p| half.run(&init, &sim_cfg, &streams, p))?;
    let stop_h = stopped_fraction(&bs);
    let x: Vec<f64> = bs.iter().map(|b| b.terminal(1)[0]).collect();
    let r_b = ks_compare(&x, |z| bes3_cdf(1.0, BES3_START, z))?.with_seed(seed).with_runtime(clock.elapsed().as_secs_f64());
    Ok(([r_lo, r_hi, r_b], stop_d.max(stop_h)))
}

fn warren_dyson(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let paths = cfg.paths(20_000)?;
    let dt = cfg.dt(5e-4)?;
    let ks = cfg.tol("ks")?;
    let reference = WarrenReference::build(cfg)?;
    rep.push("dyson reference mass lower", (reference.lower.mass() - 1.0).abs(), cfg.tol("mass")?);
    rep.push("dyson reference mass upper", (reference.upper.mass() - 1.0).abs(), cfg.tol("mass")?);
    let ([lo, hi, b3], stopped) = warren_runs(&reference, cfg.seed, paths, dt)?;
    rep.mc("dyson W12 lower", lo, ks);
    rep.mc("dyson W12 upper", hi, ks);
    rep.mc("half-line W11 vs BES(3)", b3, ks);
    rep.push("stopped fraction", stopped, cfg.tol("stopped")?);
    Ok(())
}

fn entrance_gt(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let paths = cfg.paths(20_000)?;
    let dt = cfg.dt(5e-4)?;
    let t0 = cfg.get_f64("t0", 1e-3)?;
    let count = cfg.get_u64("oracle", 400_000)? as usize;
    let ks = cfg.tol("ks")?;
    let streams = RngStreams::new(cfg.seed);
    let sim_cfg = SimConfig::new(1.0, dt).from(t0);
    let mut rng = oracle_rng(cfg.seed);

    let cases: [(&str, EntranceFamily, crate::diffusion1d::DiffusionSpec, Ensemble, f64); 2] = [
        ("gt dyson level 2 vs GUE(2)", EntranceFamily::Gue, bm(), Ensemble::Gue(2), 1.0),
        ("gt besq d=2 level 2 vs 2 x Wishart(2,2)", EntranceFamily::Besq { d: 2.0 }, catalog("besq:2")?, Ensemble::ComplexWishart(2, 2), 2.0),
    ];
    let mut stopped: f64 = 0.0;
    for (name, fam, top, ens, scale) in cases {
        let oracle = rmt_oracle(&ens, count, &mut rng)?;
        let law = entrance_law(&fam, 2, t0)?;
        let gt = GtSim::new(gt_ladder(&top, 2)?)?;
        let init = GtInit::Entrance(law);
        let clock = Instant::now();
        let bs = run_paths(paths, |p| gt.run(&init, &sim_cfg, &streams, p))?;
        let secs = clock.elapsed().as_secs_f64();
        stopped = stopped.max(stopped_fraction(&bs));
        let pinches: u64 = bs.iter().map(|b| b.pinch_steps as u64).sum();
        let steps: u64 = bs.iter().map(|b| b.steps as u64).sum();
        rep.notes.push(format!(
            "{name}: {} stopped of {paths}, pinch steps {pinches} of {steps}",
            bs.iter().filter(|b| b.stopped()).count()
        ));
        for (i, side) in ["lower", "upper"].into_iter().enumerate() {
            let emp = EmpiricalCdf::new(order_statistic(&oracle, i).into_iter().map(|v| scale * v).collect())?;
            let sim: Vec<f64> = bs.iter().map(|b| b.terminal(1)[i]).collect();
            let r = ks_compare(&sim, |z| emp.eval(z))?.with_seed(cfg.seed).with_runtime(secs);
            rep.mc(format!("{name} {side}"), r, ks);
        }
    }
    rep.push("stopped fraction", stopped, cfg.tol("stopped")?);
    Ok(())
}

fn edge_cdf(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let paths = cfg.paths(20_000)?;
    // Pushed particles from a coincident start carry an O(√dt) bias.
    let dt = cfg.dt(1e-4)?;
    let count = cfg.get_u64("oracle", 400_000)? as usize;
    let points = cfg.get_u64("grid", 81)? as usize;
    let tol = cfg.tol("sup")?;
    let streams = RngStreams::new(cfg.seed);
    let sim_cfg = SimConfig::new(1.0, dt);
    let mut rng = oracle_rng(cfg.seed);

    let sim_extreme = |spec: &crate::diffusion1d::DiffusionSpec, n: usize, side: EdgeSide| -> Result<EmpiricalCdf> {
        let start = vec![0.0; n];
        let bs = run_paths(paths, |p| simulate_edge(spec, n, side, &start, &sim_cfg, &streams, p))?;
        EmpiricalCdf::new(bs.iter().map(|b| b.terminal(n - 1)[0]).collect())
    };

    for n in [2usize, 3] {
        let table = build_edge_table(&bm(), n, 1.0)?;
        let grid = linspace(-3.0, 5.0, points);
        let oracle = EmpiricalCdf::new(order_statistic(&rmt_oracle(&Ensemble::Gue(n), count, &mut rng)?, n - 1))?;
        let sim = sim_extreme(&bm(), n, EdgeSide::Right)?;
        rep.push(format!("bm n={n} max vs GUE({n})"), sup_diff(&grid, formula(&table, true), |z| oracle.eval(z))?, tol);
        rep.push(format!("bm n={n} max vs simulation"), sup_diff(&grid, formula(&table, true), |z| sim.eval(z))?, tol);
    }

    let spec = catalog("besq:2")?;
    let table = build_edge_table(&spec, 2, 1.0)?;
    let grid = linspace(0.02, 16.0, points);
    let lue = rmt_oracle(&Ensemble::ComplexWishart(2, 2), count, &mut rng)?;
    for (i, (label, side)) in [("min", EdgeSide::Left), ("max", EdgeSide::Right)].into_iter().enumerate() {
        let max = i == 1;
        let oracle = EmpiricalCdf::new(order_statistic(&lue, i).into_iter().map(|v| 2.0 * v).collect())?;
        let sim = sim_extreme(&spec, 2, side)?;
        rep.push(format!("besq n=2 {label} vs 2 x LUE"), sup_diff(&grid, formula(&table, max), |z| oracle.eval(z))?, tol);
        rep.push(format!("besq n=2 {label} vs simulation"), sup_diff(&grid, formula(&table, max), |z| sim.eval(z))?, tol);
    }
    Ok(())
}

/// Edge extreme CDF from the coincident start at the origin.
fn formula(table: &EdgeOperatorTable, max: bool) -> impl Fn(f64) -> Result<f64> + '_ {
    let x0 = vec![0.0; table.n];
    move |z| if max { edge_max_cdf(table, &x0, z) } else { edge_min_cdf(table, &x0, z) }
}

/// `max |rᵢ/r̄ − 1|` over the ratios `rᵢ = aᵢ/bᵢ`.
pub fn ratio_spread(pairs: &[(f64, f64)]) -> f64 {
    let r: Vec<f64> = pairs.iter().map(|(a, b)| a / b).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max)
}

fn chain_level(h: impl Fn(f64) -> f64 + Send + Sync + 'static, s: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ChainLevel {
    ChainLevel { h: Arc::new(h), s_prime: Arc::new(s) }
}

fn eigen_structure(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let t = cfg.get_f64("t", 0.5)?;
    let (res_tol, rate_tol, ratio_tol) = (cfg.tol("residual")?, cfg.tol("rate")?, cfg.tol("ratio")?);
    let line = vec![vec![-1.0, 0.5], vec![0.2, 1.7], vec![-2.0, -0.3]];
    let box_pts = vec![vec![0.4, 1.2], vec![1.0, 2.5], vec![2.0, 2.9]];
    let cases = [
        ("vandermonde bm", EigenFamily::Vandermonde(bm()), &line),
        ("vandermonde ou", EigenFamily::Vandermonde(ou(1.0)), &line),
        ("det sin(k x) killed interval", EigenFamily::GroundState(bm_interval(false, false)), &box_pts),
        ("det cos((k-1) x) reflecting interval", EigenFamily::GroundState(bm_interval(true, true)), &box_pts),
    ];
    for (name, fam, probes) in cases {
        let h = eigenfunction_catalog(&fam, 2)?;
        let k = kernel(&fam.spec()?)?;
        rep.push(format!("eigen residual {name}"), eigen_residual(&k, &h, t, probes)?, res_tol);
    }
    // The interval ground states are the classical determinants.
    let sin_h = eigenfunction_catalog(&EigenFamily::GroundState(bm_interval(false, false)), 2)?;
    let cos_h = eigenfunction_catalog(&EigenFamily::GroundState(bm_interval(true, true)), 2)?;
    let sin_pairs: Vec<(f64, f64)> =
        box_pts.iter().map(|x| (sin_h.eval(x), det_with(2, |i, j| ((i + 1) as f64 * x[j]).sin()))).collect();
    let cos_pairs: Vec<(f64, f64)> = box_pts.iter().map(|x| (cos_h.eval(x), det_with(2, |i, j| (i as f64 * x[j]).cos()))).collect();
    rep.push("ground state is det sin(k x)", ratio_spread(&sin_pairs), ratio_tol);
    rep.push("ground state is det cos((k-1) x)", ratio_spread(&cos_pairs), ratio_tol);

    for (spec, n) in [(bm_interval(false, false), 2), (bm_interval(true, true), 3), (ou(2.0), 3), (laguerre(3.0), 3), (jacobi(1.5, 2.0), 2)] {
        let sp = spectrum(&spec)?;
        let mut rates: Vec<f64> = (0..n + 4).map(|k| sp.rate(k)).collect();
        rates.sort_by(f64::total_cmp);
        let g = ground_state(&spec, n)?;
        rep.push(format!("ground state rate {} n={n}", spec.name), (g.rate + rates[..n].iter().sum::<f64>()).abs(), rate_tol);
    }

    // Half-line: levels (1, 1), (x, 1) give ½(x₂² − x₁²).
    let half = EigenChain {
        levels: vec![chain_level(|_| 1.0, |_| 1.0), chain_level(|x| x, |_| 1.0)],
        c: 0.0,
        l: 0.0,
        r: f64::INFINITY,
        rate: 0.0,
    };
    let h = build_eigenfunction_recursive(&half, 2)?;
    let pairs: Vec<(f64, f64)> =
        [[0.5, 1.0], [0.1, 3.0], [2.0, 2.2]].iter().map(|x| (h.eval(x), 0.5 * (x[1] * x[1] - x[0] * x[0]))).collect();
    rep.push("recursion half-line", ratio_spread(&pairs), ratio_tol);

    // BESQ(d): h_k = x^{ν+1+k}, s′_k = x^{ν+k} give det(x_j^{i+ν+1}).
    for d in [1.0f64, 3.0] {
        let nu = 0.5 * d - 1.0;
        let levels = (0..3)
            .map(|k| {
                let kf = k as f64;
                chain_level(move |x: f64| x.powf(nu + 1.0 + kf), move |x: f64| x.powf(nu + kf))
            })
            .collect();
        let chain = EigenChain { levels, c: 1.0, l: 0.0, r: f64::INFINITY, rate: 0.0 };
        let h = build_eigenfunction_recursive(&chain, 3)?;
        let pairs: Vec<(f64, f64)> = [[0.2, 0.9, 1.5], [1.0, 2.0, 3.5], [0.5, 0.6, 4.0]]
            .iter()
            .map(|x| (h.eval(x), det_with(3, |i, j| x[j].powf(i as f64 + 1.0 + nu))))
            .collect();
        rep.push(format!("recursion besq d={d}"), ratio_spread(&pairs), ratio_tol);
    }
    Ok(())
}

/// GUE(2) eigenvalue density at unit time on `y₁ < y₂`.
pub fn gue2_density(y: &[f64]) -> f64 {
    let d = y[1] - y[0];
    d * d * (-0.5 * (y[0] * y[0] + y[1] * y[1])).exp() / (2.0 * PI)
}

fn polynomial_ensemble(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let tol = cfg.tol("pointwise")?;
    let k = kernel(&bm())?;
    let h = eigenfunction_catalog(&EigenFamily::Vandermonde(bm()), 2)?;
    let ens = polynomial_ensemble_limit(&k, &h, 0.0, 1.0)?;
    let grid = linspace(-3.0, 3.0, 7);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let y = [grid[i], grid[j]];
            worst = worst.max((ens.density(&y)? - gue2_density(&y)).abs());
        }
    }
    rep.push("bm x=0 n=2 t=1 vs GUE formula", worst, tol);
    Ok(())
}

fn skorokhod(cfg: &CampaignConfig, rep: &mut CampaignReport) -> Result<()> {
    let trials = cfg.get_u64("trials", 500)?;
    let mut rng = oracle_rng(cfg.seed);

    // Dyadic increments: every partial sum is exact.
    let mut mismatches = 0usize;
    for _ in 0..trials {
        let len = rng.random_range(1..200);
        let mut acc = 0.0;
        let z: Vec<f64> = (0..len)
            .map(|_| {
                acc += rng.random_range(-64i32..=64) as f64 / 32.0;
                acc
            })
            .collect();
        let s = skorokhod_map(&z, Some(&vec![0.0; len]), None);
        let mut run = f64::NEG_INFINITY;
        for (i, &zi) in z.iter().enumerate() {
            run = run.max(-zi);
            if s.x[i] != zi + run.max(0.0) || s.k_lower[i] != run.max(0.0) {
                mismatches += 1;
            }
        }
    }
    rep.push("explicit one-sided formula mismatches", mismatches as f64, cfg.tol("mismatch")?);

    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let n = 100;
        let moving = trial % 2 == 1;
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let eps = rng.random_range(1e-4..0.3);
        let zt: Vec<f64> = z.iter().map(|v| v + eps * rng.random_range(-1.0..1.0)).collect();
        let lo: Vec<f64> = (0..n).map(|i| if moving { -1.0 + 0.5 * (i as f64 * 0.2).sin() } else { -1.0 }).collect();
        let hi: Vec<f64> = (0..n).map(|i| if moving { 1.0 + 0.5 * (i as f64 * 0.3).cos() } else { 1.0 }).collect();
        let a = skorokhod_map(&z, Some(&lo), Some(&hi));
        let b = skorokhod_map(&zt, Some(&lo), Some(&hi));
        let sup = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let dz = sup(&z, &zt);
        if dz > 0.0 {
            worst = worst.max(sup(&a.x, &b.x) / dz);
        }
    }
    rep.push("observed Lipschitz constant", worst, cfg.tol("lipschitz")?);

    let paths = cfg.paths(20_000)?;
    let dts: Vec<f64> = cfg
        .get_str("dts")
        .unwrap_or("4e-3,2e-3,1e-3")
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad dt '{s}'"))))
        .collect::<Result<_>>()?;
    if dts.len() < 2 {
        return Err(Error::Config("dt refinement needs at least two step sizes".into()));
    }
    for &dt in &dts {
        cfg.charge_dt(dt)?;
    }
    let reference = WarrenReference::build(cfg)?;
    let mut series = Vec::new();
    for &dt in &dts {
        let (reports, _) = warren_runs(&reference, cfg.seed, paths, dt)?;
        let worst = reports.iter().map(|r| r.ks).fold(0.0, f64::max);
        rep.notes.push(format!("dt = {dt}: KS dyson lower {:.4}, upper {:.4}, bes3 {:.4}", reports[0].ks, reports[1].ks, reports[2].ks));
        for (label, r) in ["dyson lower", "dyson upper", "bes3"].into_iter().zip(reports) {
            rep.mc.push((format!("dt={dt} {label}"), r));
        }
        series.push(worst);
    }
    let rise = series.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    rep.push("KS rise under dt refinement", rise, cfg.tol("band")?);
    Ok(())
}
