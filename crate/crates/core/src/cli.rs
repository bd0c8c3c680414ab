//! The `dhl` command line.
//!
//! Every subcommand writes its artifacts into `--out` and a
//! `<command>.meta.json` sidecar. Options may also come from a `key=value`
//! file given with `--config`; flags on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::acceptance::{self, Scale};
use crate::dd::Precision;
use crate::dynamics::{self, MapKind, PixelClass};
use crate::error::Error;
use crate::geometry::{make_slice, LinearForm, ProjPoint, SliceKind};
use crate::green::{self, Rect};
use crate::io::{self, NumericTable, Sidecar};
use crate::renorm::CriticalCurve;
use crate::roots::{self, AberthOptions};
use crate::slice::partition_slice_with_form;

#[derive(Debug, Parser, Serialize)]
#[command(name = "dhl", version, about = "Renormalization dynamics of the diamond hierarchical lattice Ising model")]
pub struct Cli {
    /// Worker threads; 0 uses every hardware thread.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed for every random choice; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "double", value_parser = parse_precision)]
    pub precision: Precision,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// File of `key=value` lines supplying defaults for any long option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Coefficients of the level-n partition function on a slice.
    Partition(PartitionArgs),
    /// Lee-Yang zeros at fixed temperature.
    LyZeros(LyArgs),
    /// Fisher zeros on the zero-field line.
    FisherZeros(LevelArgs),
    /// Zeros of a linear form composed with the n-th iterate on a slice.
    SliceZeros(SliceZerosArgs),
    /// Green potential grid and Laplacian density on a slice.
    GreenGrid(GreenGridArgs),
    /// Distance between root potentials and the Green potential.
    Equidist(EquidistArgs),
    /// Hermitian-norm decay table.
    HermDecay(HermDecayArgs),
    /// Julia set of the one-dimensional Fisher map.
    Julia1d(Julia1dArgs),
    /// Basin raster on a slice, optionally with zeros overlaid.
    JuliaSlice(JuliaSliceArgs),
    /// Basin classification of the solid cylinders.
    Basins(BasinsArgs),
    /// Samples of the measure of maximal entropy.
    Mme(MmeArgs),
    /// Jacobian determinant on the critical curves.
    Critical(CriticalArgs),
    /// Vanishing order of the Jacobian across the critical curves.
    Folds(FoldsArgs),
    /// Monte-Carlo check of the power-map area inequality.
    VolumeMc(VolumeArgs),
    /// Algebraic stability of composed lifts on random lines.
    Stability(StabilityArgs),
    /// Run the acceptance suite.
    Report(ReportArgs),
}

/// Slice syntax: `t=<c>` (physical z-line), `fisher`, `l0`, or
/// `line=<u>,<v>,<w>/<du>,<dv>,<dw>`; complex entries like `0.3-0.2i`.
#[derive(Debug, Args, Serialize)]
pub struct SliceOpt {
    #[arg(long, default_value = "t=0.5")]
    pub slice: String,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub slice: SliceOpt,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Linear form `p,q,r`; defaults to `1,2,1`.
    #[arg(long)]
    pub form: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct LyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SliceZerosArgs {
    #[command(flatten)]
    pub slice: SliceOpt,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub form: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct GreenGridArgs {
    #[command(flatten)]
    pub slice: SliceOpt,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, default_value = "-3,3,-3,3", allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 256)]
    pub res: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EquidistArgs {
    #[command(flatten)]
    pub slice: SliceOpt,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub levels: Vec<usize>,
    #[arg(long, default_value_t = 40)]
    pub probes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HermDecayArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.05,0.1")]
    pub radii: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Julia1dArgs {
    #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 512)]
    pub res: usize,
    #[arg(long, default_value_t = dynamics::DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct JuliaSliceArgs {
    #[command(flatten)]
    pub slice: SliceOpt,
    #[arg(long, default_value = "-3,3,-3,3", allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 512)]
    pub res: usize,
    #[arg(long, default_value_t = dynamics::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Overlay the zeros of `U − W` at this level.
    #[arg(long)]
    pub overlay: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BasinsArgs {
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = dynamics::DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MmeArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub burn_in: usize,
    #[arg(long, default_value_t = dynamics::DEFAULT_MME_CHAINS)]
    pub chains: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CriticalArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FoldsArgs {
    /// Number of log-spaced radii in [1e-6, 1e-2].
    #[arg(long, default_value_t = 25)]
    pub radii: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct VolumeArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub d: Vec<u32>,
    /// Random disk unions per exponent.
    #[arg(long, default_value_t = 20)]
    pub sets: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    #[arg(long, default_value = "mig", value_parser = parse_map_kind)]
    pub map: MapKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub lines: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Reduced sample sizes; thresholds are unchanged.
    #[arg(long)]
    pub quick: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Partition(_) => "partition",
            Command::LyZeros(_) => "ly-zeros",
            Command::FisherZeros(_) => "fisher-zeros",
            Command::SliceZeros(_) => "slice-zeros",
            Command::GreenGrid(_) => "green-grid",
            Command::Equidist(_) => "equidist",
            Command::HermDecay(_) => "herm-decay",
            Command::Julia1d(_) => "julia1d",
            Command::JuliaSlice(_) => "julia-slice",
            Command::Basins(_) => "basins",
            Command::Mme(_) => "mme",
            Command::Critical(_) => "critical",
            Command::Folds(_) => "folds",
            Command::VolumeMc(_) => "volume-mc",
            Command::Stability(_) => "stability",
            Command::Report(_) => "report",
        }
    }

    /// Commands whose output depends on random choices.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Command::LyZeros(_)
                | Command::FisherZeros(_)
                | Command::SliceZeros(_)
                | Command::Equidist(_)
                | Command::HermDecay(_)
                | Command::Basins(_)
                | Command::Mme(_)
                | Command::Critical(_)
                | Command::VolumeMc(_)
                | Command::Stability(_)
        )
    }
}

/// Names of the stochastic subcommands.
pub const STOCHASTIC_COMMANDS: [&str; 10] = [
    "ly-zeros",
    "fisher-zeros",
    "slice-zeros",
    "equidist",
    "herm-decay",
    "basins",
    "mme",
    "critical",
    "volume-mc",
    "stability",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{contract} failed: {source}")]
    Numeric {
        contract: &'static str,
        #[source]
        source: Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric { .. } | CliError::Failed(_) => 1,
        }
    }
}

fn numeric(contract: &'static str) -> impl FnOnce(Error) -> CliError {
    move |source| match source {
        Error::InvalidArgument(m) => CliError::Usage(format!("{contract}: {m}")),
        source => CliError::Numeric { contract, source },
    }
}

fn io_err(e: Error) -> CliError {
    CliError::Numeric { contract: "artifact output", source: e }
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub command: String,
    pub artifacts: Vec<PathBuf>,
    pub sidecar: Option<PathBuf>,
    /// Text for standard output.
    pub stdout: String,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(args) {
        Ok(s) => {
            print!("{}", s.stdout);
            0
        }
        Err(e) => {
            eprintln!("dhl: {e}");
            e.exit_code()
        }
    }
}

pub fn execute<I, T>(args: I) -> Result<RunSummary, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut tokens: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let file_entries = match config_path(&tokens) {
        Some(p) => read_config_file(Path::new(&p))?,
        None => BTreeMap::new(),
    };
    merge_config(&mut tokens, &file_entries);
    let cli = match Cli::try_parse_from(&tokens) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(RunSummary {
                    stdout: e.render().to_string(),
                    ..Default::default()
                }),
                _ => Err(CliError::Usage(e.render().to_string())),
            };
        }
    };
    if cli.command.is_stochastic() && cli.seed.is_none() {
        return Err(CliError::Usage(format!("{} is stochastic and requires --seed", cli.command.name())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut ctx = Ctx {
        out: cli.out.clone(),
        name: cli.command.name(),
        artifacts: Vec::new(),
        tolerances: BTreeMap::new(),
        stdout: String::new(),
    };
    fs::create_dir_all(&ctx.out).map_err(|e| io_err(e.into()))?;
    let result = pool.install(|| dispatch(&cli, &mut ctx));
    let config = serde_json::to_value(&cli).unwrap_or(serde_json::Value::Null);
    let mut sidecar = Sidecar::new(ctx.name, config, cli.seed, started);
    sidecar.config_file = file_entries;
    sidecar.tolerances = ctx.tolerances.clone();
    sidecar.artifacts = ctx
        .artifacts
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    sidecar.finish(clock.elapsed());
    let sidecar_path = sidecar.write(&ctx.out).map_err(io_err)?;
    result?;
    Ok(RunSummary {
        command: ctx.name.to_string(),
        artifacts: ctx.artifacts,
        sidecar: Some(sidecar_path),
        stdout: ctx.stdout,
    })
}

fn config_path(tokens: &[String]) -> Option<String> {
    let mut it = tokens.iter();
    while let Some(t) = it.next() {
        if t == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = t.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), k + 1)))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

fn merge_config(tokens: &mut Vec<String>, entries: &BTreeMap<String, String>) {
    for (key, value) in entries {
        let flag = format!("--{key}");
        let given = tokens.iter().any(|t| *t == flag || t.starts_with(&format!("{flag}=")));
        if given || key == "config" {
            continue;
        }
        match value.as_str() {
            "true" => tokens.push(flag),
            "false" => {}
            v => tokens.push(format!("{flag}={v}")),
        }
    }
}

struct Ctx {
    out: PathBuf,
    name: &'static str,
    artifacts: Vec<PathBuf>,
    tolerances: BTreeMap<String, f64>,
    stdout: String,
}

impl Ctx {
    fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.out.join(format!("{}{suffix}", self.name));
        self.artifacts.push(p.clone());
        p
    }

    fn table(&mut self, suffix: &str, t: &NumericTable) -> Result<(), CliError> {
        let p = self.path(suffix);
        t.write(&p).map_err(io_err)
    }

    fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, v: &T) -> Result<(), CliError> {
        let p = self.path(suffix);
        io::write_json(&p, v).map_err(io_err)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(0);
    let opts = AberthOptions { seed, ..AberthOptions::default() };
    match &cli.command {
        Command::Partition(a) => {
            let kind = parse_slice(&a.slice.slice)?;
            let form = parse_form(a.form.as_deref())?;
            let ps = partition_slice_with_form(&kind, a.n, &form).map_err(numeric("partition_slice"))?;
            let mut t = NumericTable::new(&["k", "re", "im"]);
            for (k, c) in ps.zhat.coeffs().iter().enumerate() {
                t.push(vec![k as f64, c.re, c.im]);
            }
            ctx.table(".csv", &t)?;
            ctx.json(".json", &json!({ "n": a.n, "degree": ps.zhat.degree(), "logScale": ps.log_scale }))?;
            ctx.say(format!("degree {} logScale {}", ps.zhat.degree(), ps.log_scale));
        }
        Command::LyZeros(a) => {
            let t = parse_complex(&a.t).map_err(CliError::Usage)?;
            let ly = roots::lee_yang_zeros(t, a.n, cli.precision, &opts).map_err(numeric("lee_yang_zeros"))?;
            let mut tab = NumericTable::new(&["re", "im", "modulus_dev", "residual"]);
            for (z, r) in ly.roots.roots.iter().zip(&ly.roots.residuals) {
                tab.push(vec![z.re, z.im, z.norm() - 1.0, *r]);
            }
            ctx.table(".csv", &tab)?;
            ctx.tolerances.insert("aberthTol".into(), opts.tol);
            let report = json!({
                "t": [t.re, t.im],
                "n": a.n,
                "roots": ly.roots.roots.len(),
                "maxCircleDeviation": ly.max_circle_deviation,
                "maxResidual": ly.roots.max_residual,
                "iterations": ly.roots.iterations,
            });
            ctx.json(".json", &report)?;
            ctx.say(format!("{} roots, max ||z|-1| = {:e}", ly.roots.roots.len(), ly.max_circle_deviation));
        }
        Command::FisherZeros(a) => {
            let fz = roots::fisher_zeros(a.n, cli.precision, &opts).map_err(numeric("fisher_zeros"))?;
            ctx.table(".csv", &NumericTable::from_complex(&fz.roots.roots))?;
            let report = json!({
                "n": a.n,
                "roots": fz.roots.roots.len(),
                "hausdorffToPreimages": fz.hausdorff_to_preimages,
                "maxResidual": fz.roots.max_residual,
            });
            ctx.json(".json", &report)?;
            ctx.say(format!("{} roots, Hausdorff distance to preimages {:e}", fz.roots.roots.len(), fz.hausdorff_to_preimages));
        }
        Command::SliceZeros(a) => {
            let kind = parse_slice(&a.slice.slice)?;
            let form = parse_form(a.form.as_deref())?;
            let rs = roots::slice_zeros(&kind, a.n, form, cli.precision, &opts).map_err(numeric("slice_zeros"))?;
            ctx.table(".csv", &NumericTable::from_complex(&rs.roots))?;
            let clusters: Vec<_> = rs.clusters.iter().map(|c| json!({"center": [c.center.re, c.center.im], "multiplicity": c.multiplicity})).collect();
            let report = json!({"n": a.n, "roots": rs.roots.len(), "maxResidual": rs.max_residual, "clusters": clusters});
            ctx.json(".json", &report)?;
            ctx.say(format!("{} roots, max residual {:e}", rs.roots.len(), rs.max_residual));
        }
        Command::GreenGrid(a) => {
            let slice = make_slice(&parse_slice(&a.slice.slice)?).map_err(numeric("make_slice"))?;
            let rect = parse_rect(&a.rect)?;
            check_res(a.res, 3)?;
            let grid = green::potential_grid(&slice, rect, a.res, a.tol);
            let dens = green::laplacian_density(&grid);
            let mut t = NumericTable::new(&["re", "im", "g", "tail_bound"]);
            let mut values = Vec::with_capacity(a.res * a.res);
            for i in 0..a.res {
                for j in 0..a.res {
                    let s = rect.pixel(a.res, i, j);
                    let g = grid.samples[i][j];
                    t.push(vec![s.re, s.im, g.map_or(f64::NAN, |g| g.value), g.map_or(f64::NAN, |g| g.tail_bound)]);
                    values.push(g.map(|g| g.value));
                }
            }
            ctx.table(".csv", &t)?;
            let mut d = NumericTable::new(&["re", "im", "density"]);
            for i in 0..a.res - 2 {
                for j in 0..a.res - 2 {
                    let s = dens.cell(i, j);
                    d.push(vec![s.re, s.im, dens.density[i][j]]);
                }
            }
            ctx.table("-density.csv", &d)?;
            let p = ctx.path(".pgm");
            io::write_scalar_pgm(&p, a.res, a.res, &values).map_err(io_err)?;
            ctx.tolerances.insert("tol".into(), a.tol);
            let report = json!({
                "rect": rect,
                "resolution": a.res,
                "flagged": grid.flagged,
                "header": grid.header,
                "negativeFraction": dens.negative_fraction,
            });
            ctx.json(".json", &report)?;
            ctx.say(format!("{} flagged cells, clipped negative mass {:.3e}", grid.flagged, dens.negative_fraction));
        }
        Command::Equidist(a) => {
            let kind = parse_slice(&a.slice.slice)?;
            let probes = green::default_probes(a.probes, seed);
            let mut rows = Vec::new();
            for &n in &a.levels {
                let r = green::equidistribution_distance(&kind, n, &probes, &opts).map_err(numeric("equidistribution_distance"))?;
                ctx.say(format!("n={n}: distance {:e} ({} probes dropped)", r.distance, r.probes_dropped));
                rows.push(r);
            }
            let mut t = NumericTable::new(&["n", "distance", "probes_used", "probes_dropped"]);
            for r in &rows {
                t.push(vec![r.n as f64, r.distance, r.probes_used as f64, r.probes_dropped as f64]);
            }
            ctx.table(".csv", &t)?;
            ctx.json(".json", &rows)?;
        }
        Command::HermDecay(a) => {
            let form = parse_form(a.form.as_deref())?;
            let table = green::herm_norm_decay(a.samples, a.n_max, &form, &a.radii, seed).map_err(numeric("herm_norm_decay"))?;
            let mut t = NumericTable::new(&["n", "mean_abs", "std_err", "max_abs", "max_signed", "upper_bound"]);
            for r in &table.rows {
                t.push(vec![r.n as f64, r.mean_abs, r.std_err, r.max_abs, r.max_signed, r.upper_bound]);
                ctx.say(format!("n={}: mean {:e} +- {:e}, max {:e}", r.n, r.mean_abs, r.std_err, r.max_abs));
            }
            ctx.table(".csv", &t)?;
            ctx.json(".json", &table)?;
        }
        Command::Julia1d(a) => {
            let rect = parse_rect(&a.rect)?;
            check_res(a.res, 1)?;
            let j = dynamics::julia_1d(rect, a.res, a.budget).map_err(numeric("julia_1d"))?;
            let p = ctx.path(".pgm");
            io::write_class_pgm(&p, &j.raster).map_err(io_err)?;
            let report = json!({
                "tCritical": j.t_critical,
                "bracket": j.bracket,
                "toBeta0": j.raster.count(PixelClass::ToBeta0),
                "toBeta1": j.raster.count(PixelClass::ToBeta1),
                "unresolved": j.raster.count(PixelClass::Unresolved),
            });
            ctx.json(".json", &report)?;
            ctx.say(format!("t_c = {}", j.t_critical));
        }
        Command::JuliaSlice(a) => {
            let slice = make_slice(&parse_slice(&a.slice.slice)?).map_err(numeric("make_slice"))?;
            let rect = parse_rect(&a.rect)?;
            check_res(a.res, 1)?;
            let js = dynamics::julia_slice_2d(&slice, rect, a.res, a.budget, a.overlay).map_err(numeric("julia_slice_2d"))?;
            let p = ctx.path(".pgm");
            io::write_class_pgm(&p, &js.raster).map_err(io_err)?;
            let counts = json!({
                "toE": js.raster.count(PixelClass::ToE),
                "toEPrime": js.raster.count(PixelClass::ToEPrime),
                "toBeta0": js.raster.count(PixelClass::ToBeta0),
                "toBeta1": js.raster.count(PixelClass::ToBeta1),
                "unresolved": js.raster.count(PixelClass::Unresolved),
            });
            let mut report = json!({ "counts": counts });
            if let Some(o) = &js.overlay {
                let p = ctx.path(".ppm");
                io::write_class_ppm(&p, &js.raster, &o.roots).map_err(io_err)?;
                ctx.table("-roots.csv", &NumericTable::from_complex(&o.roots))?;
                report["overlay"] = json!({
                    "level": o.level,
                    "rootsInWindow": o.roots_in_window,
                    "fractionNearJulia": o.fraction_near_julia,
                });
                ctx.say(format!("{} roots in window, {:.4} near the Julia proxy", o.roots_in_window, o.fraction_near_julia));
            }
            ctx.json(".json", &report)?;
        }
        Command::Basins(a) => {
            let r = dynamics::solid_cylinder_suite(a.samples, a.budget, seed).map_err(numeric("solid_cylinder_suite"))?;
            ctx.json(".json", &r)?;
            ctx.say(format!(
                "SC toE {}/{}, SC' toE' {}/{}",
                r.sc.to_e, r.sc.samples, r.sc_prime.to_e_prime, r.sc_prime.samples
            ));
        }
        Command::Mme(a) => {
            let cloud = dynamics::mme_sample(a.samples, a.burn_in, seed, a.chains).map_err(numeric("mme_sample"))?;
            let mut t = NumericTable::new(&["u_re", "u_im", "v_re", "v_im", "w_re", "w_im"]);
            for p in cloud.points() {
                let c = p.canonical();
                let x = c.coords();
                t.push(vec![x[0].re, x[0].im, x[1].re, x[1].im, x[2].re, x[2].im]);
            }
            ctx.table(".csv", &t)?;
            let report = dynamics::mme_report(&cloud);
            ctx.json(".json", &report)?;
            ctx.say(format!(
                "lyapunov {:.4}, unresolved {:.4}, drift {:.2e}",
                report.lyapunov_proxy, report.unresolved_fraction, report.tv_drift
            ));
        }
        Command::Critical(a) => {
            let r = dynamics::critical_locus_residuals(a.samples, seed).map_err(numeric("critical_locus_residuals"))?;
            ctx.json(".json", &r)?;
            for c in &r.curves {
                ctx.say(format!("{}: max on curve {:e}, min off curve {:e}", c.curve, c.max_on_curve, c.min_control));
            }
        }
        Command::Folds(a) => {
            let radii = dynamics::default_fold_radii(a.radii);
            let mut rows = Vec::new();
            for curve in CriticalCurve::ALL {
                let base = dynamics::generic_base_point(curve);
                let row = match dynamics::fold_exponent(curve, &base, &radii) {
                    Ok(f) => {
                        ctx.say(format!("{}: slope {:.4} (R^2 {:.6})", f.curve, f.slope, f.r_squared));
                        json!({"curve": curve.name(), "expected": dynamics::expected_fold_slope(curve), "fit": f})
                    }
                    Err(e) => {
                        ctx.say(format!("{}: {e}", curve.name()));
                        json!({"curve": curve.name(), "expected": dynamics::expected_fold_slope(curve), "error": e.to_string()})
                    }
                };
                rows.push(row);
            }
            ctx.json(".json", &rows)?;
        }
        Command::VolumeMc(a) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();
            let mut failures = 0;
            for &d in &a.d {
                for k in 0..a.sets {
                    let set = dynamics::random_disk_union(&mut rng);
                    let est = dynamics::power_map_area_mc(d, &set, a.samples, seed.wrapping_add(1 + k as u64))
                        .map_err(numeric("power_map_area_mc"))?;
                    failures += usize::from(!est.holds);
                    rows.push(json!({"disks": set, "estimate": est}));
                }
            }
            ctx.json(".json", &rows)?;
            ctx.say(format!("{} sets, {} violations at 3 sigma", rows.len(), failures));
        }
        Command::Stability(a) => {
            let v = dynamics::stability_check(a.map, a.n, a.lines, seed).map_err(numeric("stability_check"))?;
            ctx.json(".json", &v)?;
            for l in &v.lines {
                ctx.say(format!(
                    "formal degree {}, effective {}, {} common roots",
                    l.formal_degree,
                    l.effective_degree,
                    l.common_roots.len()
                ));
            }
        }
        Command::Report(a) => {
            let scale = if a.quick { Scale::Quick } else { Scale::Full };
            let results = acceptance::run_all(scale);
            let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.label()).collect();
            let report = json!({
                "scale": scale,
                "passed": failed.is_empty(),
                "criteria": results,
            });
            ctx.json(".json", &report)?;
            ctx.say(serde_json::to_string_pretty(&report).unwrap_or_default());
            if !failed.is_empty() {
                return Err(CliError::Failed(format!("acceptance criteria failed: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn check_res(res: usize, min: usize) -> Result<(), CliError> {
    if res < min {
        return Err(CliError::Usage(format!("--res must be at least {min}")));
    }
    Ok(())
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse()
}

fn parse_map_kind(s: &str) -> Result<MapKind, String> {
    s.parse()
}

/// Parses `1.5`, `-2i`, `0.3-0.2i`, `1e-3+4e2i` or `i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number '{s}'");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_complex_list(s: &str, len: usize) -> Result<Vec<Complex64>, CliError> {
    let v: Vec<Complex64> = s
        .split(',')
        .map(parse_complex)
        .collect::<Result<_, _>>()
        .map_err(CliError::Usage)?;
    if v.len() != len {
        return Err(CliError::Usage(format!("expected {len} comma-separated values in '{s}'")));
    }
    Ok(v)
}

pub fn parse_slice(s: &str) -> Result<SliceKind, CliError> {
    let usage = |m: String| CliError::Usage(format!("--slice {s}: {m}"));
    if s == "fisher" {
        return Ok(SliceKind::PhysicalZ1Line);
    }
    if s == "l0" {
        let x0 = ProjPoint::from_real(1.0, 0.0, 0.0).map_err(|e| usage(e.to_string()))?;
        let d = ProjPoint::from_real(0.0, 0.0, 1.0).map_err(|e| usage(e.to_string()))?;
        return Ok(SliceKind::Line { x0, d });
    }
    if let Some(t) = s.strip_prefix("t=") {
        return Ok(SliceKind::PhysicalTLine { t: parse_complex(t).map_err(usage)? });
    }
    if let Some(rest) = s.strip_prefix("line=") {
        let (a, b) = rest.split_once('/').ok_or_else(|| usage("expected base/direction".into()))?;
        let a = parse_complex_list(a, 3)?;
        let b = parse_complex_list(b, 3)?;
        let x0 = ProjPoint::new([a[0], a[1], a[2]]).map_err(|e| usage(e.to_string()))?;
        let d = ProjPoint::new([b[0], b[1], b[2]]).map_err(|e| usage(e.to_string()))?;
        return Ok(SliceKind::Line { x0, d });
    }
    Err(usage("expected fisher, l0, t=<c> or line=<u>,<v>,<w>/<du>,<dv>,<dw>".into()))
}

pub fn parse_form(s: Option<&str>) -> Result<LinearForm, CliError> {
    match s {
        None => Ok(LinearForm::y0()),
        Some(s) => {
            let v = parse_complex_list(s, 3)?;
            LinearForm::new(v[0], v[1], v[2]).map_err(|e| CliError::Usage(format!("--form {s}: {e}")))
        }
    }
}

pub fn parse_rect(s: &str) -> Result<Rect, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--rect {s}: expected four numbers")))?;
    if v.len() != 4 {
        return Err(CliError::Usage(format!("--rect {s}: expected four numbers")));
    }
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| CliError::Usage(format!("--rect {s}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn complex_syntax() {
        assert_eq!(parse_complex("0.5").unwrap(), c64(0.5, 0.0));
        assert_eq!(parse_complex("0.3-0.2i").unwrap(), c64(0.3, -0.2));
        assert_eq!(parse_complex("-2i").unwrap(), c64(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), c64(0.0, 1.0));
        assert_eq!(parse_complex("1e-3+4e2i").unwrap(), c64(1e-3, 400.0));
        assert_eq!(parse_complex("-1e-3-i").unwrap(), c64(-1e-3, -1.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn slice_syntax() {
        assert!(matches!(parse_slice("fisher").unwrap(), SliceKind::PhysicalZ1Line));
        assert!(matches!(parse_slice("t=0.5").unwrap(), SliceKind::PhysicalTLine { .. }));
        assert!(matches!(parse_slice("line=1,0.3+0.2i,0/0,1,1").unwrap(), SliceKind::Line { .. }));
        assert!(parse_slice("line=1,2/3").is_err());
        assert!(parse_rect("-2,2,-2,2").is_ok());
        assert!(parse_rect("1,2,3").is_err());
    }

    #[test]
    fn exit_codes() {
        let dir = std::env::temp_dir().join(format!("dhl-cli-codes-{}", std::process::id()));
        let out = dir.to_string_lossy().into_owned();
        assert_eq!(run(["dhl", "no-such-command"]), 2);
        assert_eq!(run(["dhl", "mme", "--out", &out]), 2, "stochastic without seed");
        assert_eq!(run(["dhl", "ly-zeros", "--t", "0.5", "--n", "1", "--precision", "quad", "--out", &out]), 2);
        assert_eq!(run(["dhl", "stability", "--map", "phys", "--n", "5", "--seed", "1", "--out", &out]), 2);
        // a line through a single point has no slice polynomial
        let e = execute(["dhl", "slice-zeros", "--slice", "line=1,0,0/2,0,0", "--seed", "1", "--out", &out]).unwrap_err();
        assert_eq!(e.exit_code(), 1, "{e}");
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn config_file_supplies_defaults() {
        let dir = std::env::temp_dir().join(format!("dhl-cli-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("run.cfg");
        fs::write(&cfg, "# Lee-Yang run\nt = 0.5\nn=1\nseed=7\n").unwrap();
        let out = dir.join("out");
        let s = execute([
            "dhl",
            "ly-zeros",
            "--n",
            "2",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let text = fs::read_to_string(&s.artifacts[0]).unwrap();
        // command-line n = 2 wins over the file: 2·4² roots plus a header
        assert_eq!(text.lines().count(), 33);
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(s.sidecar.unwrap()).unwrap()).unwrap();
        assert_eq!(meta["seed"], 7);
        assert_eq!(meta["configFile"]["t"], "0.5");
        assert_eq!(meta["config"]["command"]["n"], 2);
        let _ = fs::remove_dir_all(dir);
    }
}
