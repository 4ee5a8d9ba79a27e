//! Command-line surface: `census`, `count`, `sample`, `verify`,
//! `asymptotics` and `experiment`. Every artifact starts with the
//! [`RunConfig`] that produced it.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use locograph::asymptotics::{
    asymptotics_table, c_constant, census_growth_constant, k_constant, leading_term, write_asymptotics_csv,
};
use locograph::census::{build_census_with, write_census_jsonl, write_gamma_csv, CensusOptions, CensusTable};
use locograph::counting::{count_table, ln_big, write_counts_csv};
use locograph::lattice::DEFAULT_MAX_DIM;
use locograph::quotient::{failing_vertices, parse_edge_list, provenance_jsonl, write_edge_list};
use locograph::sampler::{batch_experiment, CensusSampler, SampleSpec};

pub const ARTIFACT_VERSION: &str = concat!("locograph ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] locograph::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 2 for usage and parameter errors, 3 for an empty support, 4 for
    /// internal-consistency failures.
    pub fn exit_code(&self) -> i32 {
        use locograph::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::EmptySupport { .. } => 3,
                E::Internal(_) | E::SaddleNotBracketed { .. } | E::Json(_) => 4,
                _ => 2,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Edges,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Edges => "edges",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "locograph", version, about = "Census, counts and uniform samples of graphs that locally look like Z^d")]
pub struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate connected graphs (lattice orbits) by order; writes census.jsonl and gamma.csv.
    Census(CensusArgs),
    /// Exact number of graphs of each order.
    Count(CountArgs),
    /// Uniformly random graph(s) of order n.
    Sample(SampleArgs),
    /// Check that every r-ball of a graph matches the lattice ball.
    Verify(VerifyArgs),
    /// Exact log-counts against the saddle-point bound and leading term.
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo statistics over many samples.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: u64,
    /// Largest accepted dimension.
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub max_index: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Reuse census shards from the cache directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest order counted.
    #[arg(long, conflicts_with = "n")]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Batch mode: this many samples as JSON lines.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Radius of the local-limit check (default r+1).
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Edges)]
    pub format: Format,
    /// Output directory (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Dimension; taken from the file header when omitted.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r: u32,
    /// Edge-list file.
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n_max: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long)]
    pub radius: Option<u32>,
    /// Directory for samples.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The validated parameters of a run, echoed into every artifact.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: String,
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub resume: bool,
}

impl RunConfig {
    fn new(subcommand: &str) -> Self {
        Self { version: ARTIFACT_VERSION.into(), subcommand: subcommand.into(), ..Self::default() }
    }

    fn model(mut self, m: &ModelArgs) -> Self {
        self.d = Some(m.d);
        self.r = Some(m.r);
        if m.max_dim != DEFAULT_MAX_DIM {
            self.max_dim = Some(m.max_dim);
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Command-line arguments that reproduce this run.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec!["locograph".to_string(), self.subcommand.clone()];
        let mut flag = |name: &str, v: Option<String>| {
            if let Some(v) = v {
                a.push(format!("--{name}"));
                a.push(v);
            }
        };
        flag("d", self.d.map(|x| x.to_string()));
        flag("r", self.r.map(|x| x.to_string()));
        flag("n", self.n.map(|x| x.to_string()));
        flag("n-max", self.n_max.map(|x| x.to_string()));
        flag("max-index", self.max_index.map(|x| x.to_string()));
        flag("seed", self.seed.map(|x| x.to_string()));
        flag("samples", self.samples.map(|x| x.to_string()));
        flag("radius", self.radius.map(|x| x.to_string()));
        flag("format", self.format.map(|f| f.as_str().to_string()));
        flag("out", self.out.clone());
        flag("max-dim", self.max_dim.map(|x| x.to_string()));
        if self.resume {
            a.push("--resume".into());
        }
        if let Some(input) = &self.input {
            a.push(input.clone());
        }
        a
    }
}

/// Reads the config line embedded at the top of an artifact: a `{"config":…}`
/// JSON line or object, or a `# config: …` comment line.
pub fn embedded_config(text: &str) -> Option<RunConfig> {
    #[derive(Deserialize)]
    struct Wrapper {
        config: RunConfig,
    }
    if let Ok(w) = serde_json::from_str::<Wrapper>(text) {
        return Some(w.config);
    }
    for line in text.lines().take(3) {
        if let Some(rest) = line.strip_prefix("# config: ") {
            return serde_json::from_str(rest).ok();
        }
        if let Ok(w) = serde_json::from_str::<Wrapper>(line) {
            return Some(w.config);
        }
    }
    None
}

fn census_options(model: &ModelArgs, resume: bool, out: Option<&Path>) -> CensusOptions {
    let mut opts = CensusOptions::from_env();
    opts.max_dim = Some(model.max_dim);
    opts.resume = resume;
    if resume && opts.cache_dir.is_none() {
        opts.cache_dir = Some(out.unwrap_or(Path::new(".")).join(".locograph-cache"));
    }
    opts
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(io_err(path))
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(locograph::Error::from)?;
    out.write_all(b"\n").map_err(locograph::Error::from)?;
    Ok(())
}

fn config_line(cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({ "config": cfg })
}

pub fn cmd_census(args: &CensusArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig {
        max_index: Some(args.max_index),
        out: Some(args.out.display().to_string()),
        resume: args.resume,
        ..RunConfig::new("census").model(&args.model)
    };
    let opts = census_options(&args.model, args.resume, Some(&args.out));
    let table = build_census_with(args.model.d, args.model.r, args.max_index, &opts)?;
    let jsonl = args.out.join("census.jsonl");
    let mut w = create(&jsonl)?;
    json_line(&mut w, &config_line(&cfg))?;
    write_census_jsonl(&table, &mut w)?;
    finish(w, &jsonl)?;
    let csv = args.out.join("gamma.csv");
    let mut w = create(&csv)?;
    writeln!(w, "# config: {}", cfg.to_json()).map_err(io_err(&csv))?;
    write_gamma_csv(&table, &mut w)?;
    finish(w, &csv)?;
    json_line(
        stdout,
        &serde_json::json!({
            "config": cfg,
            "files": [jsonl.display().to_string(), csv.display().to_string()],
            "first_nonzero": table.first_nonzero(),
            "total": table.gamma.iter().sum::<u64>(),
        }),
    )
}

fn census_for(model: &ModelArgs, n: u64, resume: bool) -> Result<CensusTable> {
    Ok(build_census_with(model.d, model.r, n, &census_options(model, resume, None))?)
}

pub fn cmd_count(args: &CountArgs, stdout: &mut dyn Write) -> Result<()> {
    let n_max = args
        .n_max
        .or(args.n)
        .ok_or_else(|| CliError::Usage("count needs --n or --n-max".into()))?;
    if !matches!(args.format, Format::Json | Format::Csv) {
        return Err(CliError::Usage("count writes json or csv".into()));
    }
    let cfg = RunConfig {
        n: args.n,
        n_max: args.n_max,
        format: Some(args.format),
        out: args.out.as_ref().map(|p| p.display().to_string()),
        resume: args.resume,
        ..RunConfig::new("count").model(&args.model)
    };
    let census = census_for(&args.model, n_max, args.resume)?;
    let table = count_table(&census, n_max)?;
    let mut buf = Vec::new();
    match args.format {
        Format::Csv => {
            writeln!(buf, "# config: {}", cfg.to_json()).map_err(locograph::Error::from)?;
            write_counts_csv(&table, &mut buf)?;
        }
        _ => {
            let counts: Vec<_> = table
                .b
                .iter()
                .enumerate()
                .map(|(n, b)| serde_json::json!({ "n": n, "b": b.to_string(), "log_b": ln_big(b) }))
                .collect();
            json_line(
                &mut buf,
                &serde_json::json!({ "config": cfg, "model": "pure-translation", "counts": counts }),
            )?;
        }
    }
    emit(args.out.as_deref(), &buf, stdout)
}

fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(bytes).map_err(io_err(p))?;
            finish(w, p)
        }
        None => stdout.write_all(bytes).map_err(|e| locograph::Error::from(e).into()),
    }
}

fn sample_spec(model: &ModelArgs, n: u64, seed: u64, radius: Option<u32>) -> Result<SampleSpec> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if radius == Some(0) {
        return Err(CliError::Usage("--radius must be at least 1".into()));
    }
    Ok(SampleSpec { radius, ..SampleSpec::new(model.d, model.r, n, seed) })
}

pub fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write) -> Result<()> {
    let spec = sample_spec(&args.model, args.n, args.seed, args.radius)?;
    if args.samples.is_none() && args.format == Format::Csv {
        return Err(CliError::Usage("sample writes edges or json".into()));
    }
    let cfg = RunConfig {
        n: Some(args.n),
        seed: Some(args.seed),
        samples: args.samples,
        radius: args.radius,
        format: Some(args.format),
        out: args.out.as_ref().map(|p| p.display().to_string()),
        ..RunConfig::new("sample").model(&args.model)
    };
    let census = census_for(&args.model, args.n, false)?;
    if let Some(k) = args.samples {
        let mut buf = Vec::new();
        json_line(&mut buf, &config_line(&cfg))?;
        let agg = batch_experiment(&census, spec, k, |rep| json_line(&mut buf, rep).map_err(|e| match e {
            CliError::Core(c) => c,
            other => locograph::Error::Internal(other.to_string()),
        }))?;
        json_line(&mut buf, &serde_json::json!({ "aggregate": agg }))?;
        return emit(args.out.as_ref().map(|d| d.join("samples.jsonl")).as_deref(), &buf, stdout);
    }
    let sampler = CensusSampler::new(&census, spec)?;
    let (g, report) = sampler.sample_range(0..1)?.pop().expect("one sample");
    let report_json = serde_json::to_string(&report).map_err(locograph::Error::from)?;
    let bytes = match args.format {
        Format::Json => {
            let edges: Vec<[u32; 2]> = g.edges().map(|(u, v)| [u, v]).collect();
            let mut b = Vec::new();
            json_line(&mut b, &serde_json::json!({ "config": cfg, "report": report, "edges": edges }))?;
            b
        }
        _ => write_edge_list(&g, args.model.d, &[format!("config: {}", cfg.to_json()), format!("report: {report_json}")])
            .into_bytes(),
    };
    match &args.out {
        Some(dir) => {
            let ext = if args.format == Format::Json { "json" } else { "edges" };
            emit(Some(&dir.join(format!("sample.{ext}"))), &bytes, stdout)?;
            let mut rep = Vec::new();
            json_line(&mut rep, &serde_json::json!({ "config": cfg, "report": report }))?;
            emit(Some(&dir.join("sample.report.json")), &rep, stdout)?;
            let mut prov = Vec::new();
            json_line(&mut prov, &config_line(&cfg))?;
            prov.extend_from_slice(provenance_jsonl(&g).as_bytes());
            emit(Some(&dir.join("sample.provenance.jsonl")), &prov, stdout)
        }
        None => emit(None, &bytes, stdout),
    }
}

/// Result of checking a graph file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub vertices: usize,
    pub ok: bool,
    /// At most ten.
    pub failing_vertices: Vec<usize>,
}

/// Checks edge-list `text` against radius `r` of `L^d` (`d` from the header
/// unless given).
pub fn verify_text(text: &str, d: Option<usize>, r: u32) -> Result<VerifyReport> {
    let (g, header_d) = parse_edge_list(text)?;
    let d = d.unwrap_or(header_d);
    if d == 0 || d > DEFAULT_MAX_DIM {
        return Err(CliError::Usage(format!("d must lie in 1..={DEFAULT_MAX_DIM}, got {d}")));
    }
    let failing = failing_vertices(&g, d, r, 10);
    Ok(VerifyReport { vertices: g.order(), ok: failing.is_empty(), failing_vertices: failing })
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig {
        d: args.d,
        r: Some(args.r as u64),
        input: Some(args.input.display().to_string()),
        ..RunConfig::new("verify")
    };
    let text = fs::read_to_string(&args.input).map_err(io_err(&args.input))?;
    let report = verify_text(&text, args.d, args.r)?;
    json_line(
        stdout,
        &serde_json::json!({
            "config": cfg,
            "vertices": report.vertices,
            "ok": report.ok,
            "failing_vertices": report.failing_vertices,
        }),
    )
}

pub fn cmd_asymptotics(args: &AsymptoticsArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.format == Format::Edges {
        return Err(CliError::Usage("asymptotics writes json or csv".into()));
    }
    let cfg = RunConfig {
        n_max: Some(args.n_max),
        format: Some(args.format),
        out: args.out.as_ref().map(|p| p.display().to_string()),
        ..RunConfig::new("asymptotics").model(&args.model)
    };
    let census = census_for(&args.model, args.n_max, false)?;
    let rows = asymptotics_table(&census, args.n_max)?;
    let mut buf = Vec::new();
    if args.format == Format::Csv {
        writeln!(buf, "# config: {}", cfg.to_json()).map_err(locograph::Error::from)?;
        write_asymptotics_csv(&rows, &mut buf)?;
    } else {
        let d = args.model.d;
        let constants = serde_json::json!({
            "c_d": c_constant(d)?,
            "k_d": if d >= 2 { Some(k_constant(d)?) } else { None },
            "growth_constant": if d >= 2 { census_growth_constant(d)? } else { leading_term(1.0, 1.0, 1.0)? },
        });
        json_line(&mut buf, &serde_json::json!({ "config": cfg, "constants": constants, "rows": rows }))?;
    }
    emit(args.out.as_deref(), &buf, stdout)
}

pub fn cmd_experiment(args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<()> {
    let spec = sample_spec(&args.model, args.n, args.seed, args.radius)?;
    let cfg = RunConfig {
        n: Some(args.n),
        seed: Some(args.seed),
        samples: Some(args.samples),
        radius: args.radius,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        ..RunConfig::new("experiment").model(&args.model)
    };
    let census = census_for(&args.model, args.n, false)?;
    let mut lines = Vec::new();
    if args.out.is_some() {
        json_line(&mut lines, &config_line(&cfg))?;
    }
    let keep = args.out.is_some();
    let agg = batch_experiment(&census, spec, args.samples, |rep| {
        if keep {
            serde_json::to_writer(&mut lines, rep)?;
            lines.push(b'\n');
        }
        Ok(())
    })?;
    if let Some(dir) = &args.out {
        emit(Some(&dir.join("samples.jsonl")), &lines, stdout)?;
    }
    json_line(stdout, &serde_json::json!({ "config": cfg, "aggregate": agg }))
}

pub fn run_command(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let go = |stdout: &mut dyn Write| match &cli.command {
        Command::Census(a) => cmd_census(a, stdout),
        Command::Count(a) => cmd_count(a, stdout),
        Command::Sample(a) => cmd_sample(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Asymptotics(a) => cmd_asymptotics(a, stdout),
        Command::Experiment(a) => cmd_experiment(a, stdout),
    };
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            let mut buf = Vec::new();
            let res = pool.install(|| go(&mut buf));
            stdout.write_all(&buf).map_err(locograph::Error::from)?;
            res
        }
        None => go(stdout),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run_command(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
