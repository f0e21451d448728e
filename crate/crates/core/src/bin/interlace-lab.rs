use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ini::Ini;
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use interlace::diffusion1d::{catalog, classify_boundary, conjugate_density_residual, duality_residual, kernel, DiffusionSpec, Endpoint, Family};
use interlace::edgekernels::{build_edge_table, edge_max_cdf, edge_min_cdf};
use interlace::harness::{
    csv_file, default_config, num, order_statistic, rmt_oracle, run_campaign, CampaignConfig, EmpiricalCdf, Ensemble,
};
use interlace::kmgroup::{
    canonical_probe, eigen_residual, eigenfunction_catalog, entrance_law, h_transform_density, km_density, EigenFamily,
    Eigenfunction, EntranceFamily,
};
use interlace::reflectsde::{gt_ladder, run_paths, simulate_edge, EdgeSide, GtInit, GtSim, PathBundle, RngStreams, SimConfig, TwoLevelInit, TwoLevelSim};
use interlace::twolevel::{InterlacingConfig, InterlacingShape, ShapeTag, TestFunction, TwoLevel};
use interlace::{Error, Result};

/// Numerical laboratory for interlacing diffusions.
#[derive(Parser, Debug)]
#[command(name = "interlace-lab", version)]
struct Cli {
    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// INI configuration file (`campaign` and `simulate`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Feller class of both endpoints of each family and of its conjugate.
    Classify {
        /// Catalog ids, e.g. `bm`, `besq:3`, `jac:1,1`.
        #[arg(required = true)]
        families: Vec<String>,
    },
    /// Siegmund duality residuals on a grid.
    DualityCheck(DualityArgs),
    /// Karlin–McGregor density, optionally Doob-transformed.
    Density(DensityArgs),
    /// Eigenfunction residual `|P_t h − e^{λt} h|`.
    EigenCheck(EigenArgs),
    /// Entrance-law density at points, or samples from it.
    EntranceLaw(EntranceArgs),
    /// Master intertwining residuals over the test-function basis.
    IntertwineCheck(IntertwineArgs),
    /// Reflected-SDE simulation of two-level, pattern or edge systems.
    Simulate(SimulateArgs),
    /// Distribution function of the edge extreme.
    EdgeCdf(EdgeArgs),
    /// Verification campaign by id.
    Campaign {
        /// One of the ids listed by `--list`.
        #[arg(required_unless_present = "list")]
        id: Option<String>,
        /// List the known campaign ids.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug)]
struct DualityArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    x: String,
    #[arg(long, default_value = "1.0", allow_hyphen_values = true)]
    y: String,
    #[arg(long, default_value = "1.0", allow_hyphen_values = true)]
    t: String,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// Starting configuration, comma separated and strictly increasing.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// End configurations, `;` between points.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    /// Eigenfunction id for a Doob transform, e.g. `vdm:bm`.
    #[arg(long)]
    h: Option<String>,
}

#[derive(Args, Debug)]
struct EigenArgs {
    /// Eigenfunction family id: `vdm:<spec>`, `cvdm:<spec>`, `ground:<spec>`, `halfline:refl|abs`, `exp:...`.
    #[arg(long)]
    eigen: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    t: f64,
    /// Probe points, `;` between points. Defaults to a spread-out probe.
    #[arg(long, allow_hyphen_values = true)]
    probes: Option<String>,
}

#[derive(Args, Debug)]
struct EntranceArgs {
    /// `gue`, `besq:<d>`, `halfline:refl|abs` or `drift:<mu,...>`.
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// Evaluation points, `;` between points.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Number of samples to draw instead.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args, Debug)]
struct IntertwineArgs {
    #[arg(long)]
    family: String,
    /// `n,n+1`, `n,n` or `n+1,n`.
    #[arg(long, default_value = "n,n+1")]
    shape: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// X configuration.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Y configuration, used to centre the bump test functions.
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    /// Eigenfunction id for `ĥ`; defaults to the conjugate Vandermonde for
    /// `n,n+1` and to 1 otherwise.
    #[arg(long)]
    h_hat: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    TwoLevel,
    Gt,
    Edge,
}

/// Every field may also come from the `[simulate]` section of `--config`;
/// flags win.
#[derive(Args, Debug, Default)]
struct SimulateArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_enum)]
    system: Option<SystemKind>,
    /// Two-level shape.
    #[arg(long)]
    shape: Option<String>,
    /// Two-level n, pattern depth N, or edge particle count.
    #[arg(long)]
    n: Option<usize>,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    paths: Option<u64>,
    /// `lambda:<x>`, `config:<x>|<y>`, `entrance:<family>@<t0>`, `pattern:<level1>|<level2>|...`
    /// or `point:<x>`.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Edge side, `right` or `left`.
    #[arg(long)]
    side: Option<String>,
    /// Terminal CSV name inside `--out`.
    #[arg(long)]
    output: Option<String>,
    /// Also write every grid time to `<output>.trajectory.csv`.
    #[arg(long)]
    trajectories: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    None,
    /// GUE for `bm`, twice a square complex Wishart for `besq:2` (n = 2).
    Rmt,
    /// Empirical CDF of simulated edge systems.
    Sim,
}

#[derive(Args, Debug)]
struct EdgeArgs {
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// `max` (right-pushed) or `min` (left-pushed).
    #[arg(long, default_value = "max")]
    side: String,
    /// Start vector; defaults to all zeros.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// `lo:hi:count` or a comma-separated list.
    #[arg(long, default_value = "-3:5:81", allow_hyphen_values = true)]
    z: String,
    #[arg(long, value_enum, default_value = "none")]
    oracle: OracleKind,
    /// Samples for the oracle.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Time step for `--oracle sim`.
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
}

fn list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Config(format!("not a number: '{p}'"))))
        .collect()
}

fn points(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(list).collect()
}

fn grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi) = (list(parts[0])?[0], list(parts[1])?[0]);
        let n: usize = parts[2].trim().parse().map_err(|_| Error::Config(format!("bad grid count in '{s}'")))?;
        return Ok(interlace::harness::linspace(lo, hi, n));
    }
    list(s)
}

fn joined(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

struct Globals {
    seed: u64,
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || dispatch(&cli);
    let res = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
        },
        None => run(),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a check ran but failed.
fn dispatch(cli: &Cli) -> Result<bool> {
    let g = Globals { seed: cli.seed.unwrap_or(1), out: cli.out.clone().unwrap_or_else(|| PathBuf::from("results")) };
    match &cli.cmd {
        Cmd::Classify { families } => classify(&g, families),
        Cmd::DualityCheck(a) => duality(&g, a),
        Cmd::Density(a) => density(&g, a),
        Cmd::EigenCheck(a) => eigen_check(&g, a),
        Cmd::EntranceLaw(a) => entrance(&g, a),
        Cmd::IntertwineCheck(a) => intertwine(&g, a),
        Cmd::Simulate(a) => simulate_cmd(cli, &g, a),
        Cmd::EdgeCdf(a) => edge(&g, a),
        Cmd::Campaign { id, list } => campaign(cli, id.as_deref(), *list),
    }
}

fn out_file(g: &Globals, name: &str) -> PathBuf {
    g.out.join(name)
}

fn classify(g: &Globals, families: &[String]) -> Result<bool> {
    let path = out_file(g, "classify.csv");
    let mut w = csv_file(&path, &["spec", "role", "endpoint", "class"])?;
    for id in families {
        let spec = catalog(id)?;
        let conj = spec.conjugate()?;
        for (role, s) in [("original", &spec), ("conjugate", &conj)] {
            for e in [Endpoint::Left, Endpoint::Right] {
                let class = classify_boundary(s, e)?;
                w.row([id.clone(), role.to_string(), e.to_string(), class.to_string()])?;
            }
        }
    }
    w.finish()?;
    info!("wrote {}", path.display());
    Ok(true)
}

fn duality(g: &Globals, a: &DualityArgs) -> Result<bool> {
    let spec = catalog(&a.family)?;
    let path = out_file(g, "duality.csv");
    let mut w = csv_file(&path, &["spec", "t", "x", "y", "duality_residual", "conjugate_density_residual"])?;
    for &t in &list(&a.t)? {
        for &x in &list(&a.x)? {
            for &y in &list(&a.y)? {
                let d = duality_residual(&spec, t, x, y)?;
                let c = conjugate_density_residual(&spec, t, x, y)?;
                w.row([a.family.clone(), num(t), num(x), num(y), num(d), num(c)])?;
            }
        }
    }
    w.finish()?;
    Ok(true)
}

fn density(g: &Globals, a: &DensityArgs) -> Result<bool> {
    let spec = catalog(&a.family)?;
    let k = kernel(&spec)?;
    let x = list(&a.x)?;
    let h = a.h.as_deref().map(|id| eigenfunction_catalog(&EigenFamily::from_id(id)?, x.len())).transpose()?;
    let path = out_file(g, "density.csv");
    let mut w = csv_file(&path, &["spec", "h", "t", "x", "y", "value"])?;
    for y in points(&a.y)? {
        let v = match &h {
            Some(h) => h_transform_density(&k, h, a.t, &x, &y)?,
            None => km_density(&k, a.t, &x, &y)?,
        };
        w.row([a.family.clone(), a.h.clone().unwrap_or_default(), num(a.t), joined(&x), joined(&y), num(v)])?;
    }
    w.finish()?;
    Ok(true)
}

fn eigen_check(g: &Globals, a: &EigenArgs) -> Result<bool> {
    let fam = EigenFamily::from_id(&a.eigen)?;
    let h = eigenfunction_catalog(&fam, a.n)?;
    let k = kernel(&fam.spec()?)?;
    let probes = match &a.probes {
        Some(p) => points(p)?,
        None => vec![canonical_probe(h.l, h.r, a.n)],
    };
    let path = out_file(g, "eigen_check.csv");
    let mut w = csv_file(&path, &["family", "n", "t", "rate", "probe", "residual"])?;
    for p in &probes {
        let r = eigen_residual(&k, &h, a.t, std::slice::from_ref(p))?;
        w.row([a.eigen.clone(), a.n.to_string(), num(a.t), num(h.rate), joined(p), num(r)])?;
    }
    w.finish()?;
    Ok(true)
}

fn entrance(g: &Globals, a: &EntranceArgs) -> Result<bool> {
    let law = entrance_law(&EntranceFamily::from_id(&a.family)?, a.n, a.t)?;
    if let Some(count) = a.samples {
        let streams = RngStreams::new(g.seed);
        let path = out_file(g, "entrance_samples.csv");
        let mut w = csv_file(&path, &["sample", "index", "value"])?;
        for s in 0..count {
            let mut rng = streams.stream(s, u32::MAX - 1, 0);
            for (i, v) in law.sample(&mut rng)?.into_iter().enumerate() {
                w.row([s.to_string(), i.to_string(), num(v)])?;
            }
        }
        w.finish()?;
    }
    if let Some(y) = &a.y {
        let path = out_file(g, "entrance_density.csv");
        let mut w = csv_file(&path, &["family", "n", "t", "y", "density"])?;
        for p in points(y)? {
            if p.len() != a.n {
                return Err(Error::Domain(format!("point {p:?} has {} coordinates, the law has {}", p.len(), a.n)));
            }
            w.row([a.family.clone(), a.n.to_string(), num(a.t), joined(&p), num(law.density(&p))])?;
        }
        w.finish()?;
    }
    if a.samples.is_none() && a.y.is_none() {
        return Err(Error::Config("entrance-law needs --y or --samples".into()));
    }
    Ok(true)
}

const TEST_BASIS: [&str; 5] = ["one", "xsum", "ysum", "sum", "bump:0.7"];

fn intertwine(g: &Globals, a: &IntertwineArgs) -> Result<bool> {
    let spec = catalog(&a.family)?;
    let shape = InterlacingShape::parse(&a.shape, a.n)?;
    let tl = TwoLevel::new(&spec, shape)?;
    let (x, y) = (list(&a.x)?, list(&a.y)?);
    InterlacingConfig::new(shape, x.clone(), y.clone())?;
    let h = match (&a.h_hat, shape.tag) {
        (Some(id), _) => eigenfunction_catalog(&EigenFamily::from_id(id)?, shape.y_len())?,
        (None, ShapeTag::NNplus1) => eigenfunction_catalog(&EigenFamily::ConjugateVandermonde(spec.clone()), shape.y_len())?,
        (None, _) => Eigenfunction::constant(tl.pair.dual_spec.l, tl.pair.dual_spec.r),
    };
    let path = out_file(g, "intertwine.csv");
    let mut w = csv_file(&path, &["spec", "shape", "n", "t", "test_function", "lhs", "rhs", "residual", "scaled", "pass"])?;
    let mut ok = true;
    for fid in TEST_BASIS {
        let f = TestFunction::from_id(fid, &x, &y)?;
        let r = tl.master_intertwining_residual(&h, a.t, &f, &x)?;
        // Scaled by max(|lhs|, 1): absolute for small values, relative for large.
        let scaled = r.abs() / r.lhs.abs().max(1.0);
        let pass = scaled <= a.tolerance;
        ok &= pass;
        w.row([
            a.family.clone(),
            shape.tag.to_string(),
            a.n.to_string(),
            num(a.t),
            fid.to_string(),
            num(r.lhs),
            num(r.rhs),
            num(r.abs()),
            num(scaled),
            pass.to_string(),
        ])?;
    }
    w.finish()?;
    Ok(ok)
}

/// Simulation settings after merging `--config` and flags.
struct SimPlan {
    family: String,
    system: SystemKind,
    shape: String,
    n: usize,
    horizon: f64,
    dt: f64,
    paths: u64,
    init: Option<String>,
    side: EdgeSide,
    output: String,
    trajectories: bool,
    seed: u64,
}

fn sim_plan(cli: &Cli, g: &Globals, a: &SimulateArgs) -> Result<SimPlan> {
    let ini = match &cli.config {
        Some(p) => Some(Ini::load_from_file(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let sec = ini.as_ref().and_then(|i| i.section(Some("simulate")));
    let from_ini = |k: &str| sec.and_then(|s| s.get(k)).map(|v| v.trim().to_string());
    fn parse<T: std::str::FromStr>(k: &str, v: String) -> Result<T> {
        v.parse().map_err(|_| Error::Config(format!("cannot parse {k} = '{v}'")))
    }
    let system = match (a.system, from_ini("system")) {
        (Some(s), _) => s,
        (None, Some(v)) => SystemKind::from_str(&v, true).map_err(|_| Error::Config(format!("unknown system '{v}'")))?,
        (None, None) => SystemKind::TwoLevel,
    };
    let side = match a.side.clone().or_else(|| from_ini("side")).as_deref() {
        None | Some("right") => EdgeSide::Right,
        Some("left") => EdgeSide::Left,
        Some(o) => return Err(Error::Config(format!("unknown side '{o}'"))),
    };
    let seed = match (cli.seed, from_ini("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => parse("seed", v)?,
        (None, None) => g.seed,
    };
    Ok(SimPlan {
        family: a.family.clone().or_else(|| from_ini("family")).unwrap_or_else(|| "bm".into()),
        system,
        shape: a.shape.clone().or_else(|| from_ini("shape")).unwrap_or_else(|| "n,n+1".into()),
        n: a.n.map_or_else(|| from_ini("n").map_or(Ok(1), |v| parse("n", v)), Ok)?,
        horizon: a.horizon.map_or_else(|| from_ini("T").map_or(Ok(1.0), |v| parse("T", v)), Ok)?,
        dt: a.dt.map_or_else(|| from_ini("dt").map_or(Ok(1e-3), |v| parse("dt", v)), Ok)?,
        paths: a.paths.map_or_else(|| from_ini("paths").map_or(Ok(1000), |v| parse("paths", v)), Ok)?,
        init: a.init.clone().or_else(|| from_ini("init")),
        side,
        output: a.output.clone().or_else(|| from_ini("output")).unwrap_or_else(|| "simulate".into()),
        trajectories: a.trajectories || from_ini("trajectories").is_some_and(|v| v == "true" || v == "1"),
        seed,
    })
}

fn split_init(init: &str) -> (&str, &str) {
    init.split_once(':').unwrap_or((init, ""))
}

fn entrance_at(arg: &str, n: usize) -> Result<(interlace::kmgroup::EntranceLaw, f64)> {
    let (fam, t0) = arg.split_once('@').unwrap_or((arg, "1e-3"));
    let t0: f64 = t0.trim().parse().map_err(|_| Error::Config(format!("bad entrance time in '{arg}'")))?;
    Ok((entrance_law(&EntranceFamily::from_id(fam)?, n, t0)?, t0))
}

fn simulate_cmd(cli: &Cli, g: &Globals, a: &SimulateArgs) -> Result<bool> {
    let plan = sim_plan(cli, g, a)?;
    let spec = catalog(&plan.family)?;
    let streams = RngStreams::new(plan.seed);
    let mut cfg = SimConfig::new(plan.horizon, plan.dt);
    if plan.trajectories {
        cfg = cfg.full();
    }
    let bundles: Vec<PathBundle> = match plan.system {
        SystemKind::TwoLevel => {
            let shape = InterlacingShape::parse(&plan.shape, plan.n)?;
            let h = match shape.tag {
                ShapeTag::NNplus1 => Some(eigenfunction_catalog(&EigenFamily::ConjugateVandermonde(spec.clone()), shape.y_len())?),
                _ => None,
            };
            let sim = TwoLevelSim::new(&spec, shape, h)?;
            let init = match plan.init.as_deref().map(split_init) {
                None => TwoLevelInit::Lambda(canonical_probe(spec.l, spec.r, shape.x_len())),
                Some(("lambda", x)) => TwoLevelInit::Lambda(list(x)?),
                Some(("config", xy)) => {
                    let (x, y) = xy.split_once('|').ok_or_else(|| Error::Config("config init is '<x>|<y>'".into()))?;
                    TwoLevelInit::Config(InterlacingConfig::new(shape, list(x)?, list(y)?)?)
                }
                Some(("entrance", arg)) => {
                    let (law, t0) = entrance_at(arg, shape.x_len())?;
                    cfg = cfg.from(t0);
                    TwoLevelInit::Entrance(law)
                }
                Some((other, _)) => return Err(Error::Config(format!("unknown two-level init '{other}'"))),
            };
            run_paths(plan.paths, |p| sim.run(&init, &cfg, &streams, p))?
        }
        SystemKind::Gt => {
            let sim = GtSim::new(gt_ladder(&spec, plan.n)?)?;
            let init = match plan.init.as_deref().map(split_init) {
                None => {
                    let (law, t0) = entrance_at("gue", plan.n)?;
                    cfg = cfg.from(t0);
                    GtInit::Entrance(law)
                }
                Some(("entrance", arg)) => {
                    let (law, t0) = entrance_at(arg, plan.n)?;
                    cfg = cfg.from(t0);
                    GtInit::Entrance(law)
                }
                Some(("pattern", levels)) => GtInit::Pattern(levels.split('|').map(list).collect::<Result<_>>()?),
                Some((other, _)) => return Err(Error::Config(format!("unknown pattern init '{other}'"))),
            };
            run_paths(plan.paths, |p| sim.run(&init, &cfg, &streams, p))?
        }
        SystemKind::Edge => {
            let start = match plan.init.as_deref().map(split_init) {
                None => vec![if spec.l.is_finite() { spec.l } else { 0.0 }; plan.n],
                Some(("point", x)) => list(x)?,
                Some((other, _)) => return Err(Error::Config(format!("unknown edge init '{other}'"))),
            };
            run_paths(plan.paths, |p| simulate_edge(&spec, plan.n, plan.side, &start, &cfg, &streams, p))?
        }
    };
    write_bundles(&g.out, &plan, &bundles)?;
    let stopped = bundles.iter().filter(|b| b.stopped()).count();
    info!("{} paths, {stopped} stopped", bundles.len());
    Ok(true)
}

fn write_bundles(out: &Path, plan: &SimPlan, bundles: &[PathBundle]) -> Result<()> {
    let mut w = csv_file(&out.join(format!("{}.csv", plan.output)), &["path_id", "level", "index", "value", "tau", "event"])?;
    for b in bundles {
        let event = b.event.map(|e| format!("{e:?}")).unwrap_or_default();
        for (lvl, path) in b.levels.iter().enumerate() {
            for (i, &v) in path.positions.last().expect("a bundle records its start").iter().enumerate() {
                w.row([b.path.to_string(), lvl.to_string(), i.to_string(), num(v), num(b.tau), event.clone()])?;
            }
        }
    }
    w.finish()?;
    if plan.trajectories {
        let mut w = csv_file(&out.join(format!("{}.trajectory.csv", plan.output)), &["path_id", "time", "level", "index", "value"])?;
        for b in bundles {
            for (lvl, path) in b.levels.iter().enumerate() {
                for (k, row) in path.positions.iter().enumerate() {
                    for (i, &v) in row.iter().enumerate() {
                        w.row([b.path.to_string(), num(b.grid[k]), lvl.to_string(), i.to_string(), num(v)])?;
                    }
                }
            }
        }
        w.finish()?;
    }
    Ok(())
}

fn edge(g: &Globals, a: &EdgeArgs) -> Result<bool> {
    let spec = catalog(&a.family)?;
    let max = match a.side.as_str() {
        "max" => true,
        "min" => false,
        o => return Err(Error::Config(format!("side must be max or min, got '{o}'"))),
    };
    let table = build_edge_table(&spec, a.n, a.t)?;
    let x0 = match &a.x0 {
        Some(s) => list(s)?,
        None => vec![0.0; a.n],
    };
    let zs = grid(&a.z)?;
    let oracle = edge_oracle(g, a, &spec, max, &x0)?;
    let path = g.out.join("edge_cdf.csv");
    let mut w = csv_file(&path, &["z", "cdf", "oracle_cdf", "diff"])?;
    for z in zs {
        let f = if max { edge_max_cdf(&table, &x0, z)? } else { edge_min_cdf(&table, &x0, z)? };
        match &oracle {
            Some(o) => {
                let v = o.eval(z);
                w.row([num(z), num(f), num(v), num((f - v).abs())])?;
            }
            None => w.row([num(z), num(f), String::new(), String::new()])?,
        }
    }
    w.finish()?;
    Ok(true)
}

fn edge_oracle(g: &Globals, a: &EdgeArgs, spec: &DiffusionSpec, max: bool, x0: &[f64]) -> Result<Option<EmpiricalCdf>> {
    let idx = if max { a.n - 1 } else { 0 };
    match a.oracle {
        OracleKind::None => Ok(None),
        OracleKind::Rmt => {
            if x0.iter().any(|&v| v != 0.0) {
                return Err(Error::Domain("the matrix oracle needs a start at the origin".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            rng.set_stream(u64::MAX);
            let (ens, scale) = match spec.family {
                Family::Bm { mu } if mu == 0.0 => (Ensemble::Gue(a.n), a.t.sqrt()),
                Family::Cir { delta, kappa } if delta == 2.0 && kappa == 0.0 && a.n == 2 => (Ensemble::ComplexWishart(2, 2), 2.0 * a.t),
                _ => return Err(Error::Domain(format!("no matrix oracle for {} with n = {}", spec.name, a.n))),
            };
            let spectra = rmt_oracle(&ens, a.samples as usize, &mut rng)?;
            Ok(Some(EmpiricalCdf::new(order_statistic(&spectra, idx).into_iter().map(|v| scale * v).collect())?))
        }
        OracleKind::Sim => {
            let side = if max { EdgeSide::Right } else { EdgeSide::Left };
            let streams = RngStreams::new(g.seed);
            let cfg = SimConfig::new(a.t, a.dt);
            let bs = run_paths(a.samples, |p| simulate_edge(spec, a.n, side, x0, &cfg, &streams, p))?;
            Ok(Some(EmpiricalCdf::new(bs.iter().map(|b| b.terminal(a.n - 1)[0]).collect())?))
        }
    }
}

fn campaign(cli: &Cli, id: Option<&str>, list_ids: bool) -> Result<bool> {
    if list_ids {
        for id in interlace::harness::CAMPAIGNS {
            println!("{id}");
        }
        return Ok(true);
    }
    let id = id.expect("clap requires an id without --list");
    let mut cfg: CampaignConfig = match &cli.config {
        Some(p) => CampaignConfig::load(p)?,
        None => default_config(id)?,
    };
    if cfg.id != id {
        return Err(Error::Config(format!("config describes campaign '{}', not '{id}'", cfg.id)));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    } else if cli.config.is_none() {
        cfg.out_dir = PathBuf::from("results");
    }
    let rep = run_campaign(&cfg)?;
    for c in &rep.checks {
        println!("{:<5} {:<55} {:>12.4e} <= {:.1e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    println!("{} {} in {:.1}s", rep.id, if rep.passed() { "passed" } else { "FAILED" }, rep.runtime_s);
    Ok(rep.passed())
}
