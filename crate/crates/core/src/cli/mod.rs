//! `phskew` command line.
//!
//! Exit codes: 0 when every certificate passes, 1 on a certificate failure,
//! 2 on usage, configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod render;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
pub use config::RunConfig;
pub use report::Report;

#[derive(Debug, Parser)]
#[command(name = "phskew", version, about = "Certificates for a partially hyperbolic skew product on the 3-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Derive and print the constants of the construction.
    Params,
    /// Partial hyperbolicity and the four fiber-map properties.
    Verify,
    /// Chain transitivity of the fiber over p and of the whole map.
    Chain,
    /// Trapping regions, attractor enclosures and the wandering band.
    Nontransitive,
    /// su-loop density search on the fiber over p.
    Access,
    /// Write SVG figures to out_dir.
    Render,
    /// Full pipeline with a three-claim summary.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Verify => "verify",
            Command::Chain => "chain",
            Command::Nontransitive => "nontransitive",
            Command::Access => "access",
            Command::Render => "render",
            Command::Report => "report",
        }
    }
}

/// Flags override the config file; names match the config keys.
#[derive(Debug, Default, Args)]
pub struct Options {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run the unperturbed system (rho = 0).
    #[arg(long, global = true)]
    pub unperturbed: bool,
    /// Skip the JSON copy of the report in out_dir.
    #[arg(long = "json-off", global = true)]
    pub json_off: bool,

    /// Flow time of theta [default: 0.05]
    #[arg(long, global = true, value_name = "F")]
    pub r: Option<String>,
    /// Width of the trapping bands [default: 0.1]
    #[arg(long, global = true, value_name = "F")]
    pub delta: Option<String>,
    /// Perturbation strength, shrunk automatically except in verify [default: 0.0005]
    #[arg(long, global = true, value_name = "F")]
    pub rho: Option<String>,
    /// Size of the central chart box [default: 0.005]
    #[arg(long = "chart_scale", global = true, value_name = "F")]
    pub chart_scale: Option<String>,
    /// Base squares per side of the chain partition [default: 64]
    #[arg(long = "n_b", global = true, value_name = "N")]
    pub n_b: Option<String>,
    /// Fiber arcs of the chain partition [default: 128]
    #[arg(long = "n_c", global = true, value_name = "N")]
    pub n_c: Option<String>,
    /// Chain jump in box diameters [default: 1.5]
    #[arg(long = "epsilon_factor", global = true, value_name = "F")]
    pub epsilon_factor: Option<String>,
    /// su-loops as `a:b,a:b,...` [default: the six ordered pairs from 0.15, 0.3, 0.45]
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    pub loops: Option<String>,
    /// Holonomy truncation tolerance [default: 1e-10]
    #[arg(long = "tol_holonomy", global = true, value_name = "F")]
    pub tol_holonomy: Option<String>,
    /// Breadth limit of the density search [default: 40]
    #[arg(long = "max_word_length", global = true, value_name = "N")]
    pub max_word_length: Option<String>,
    /// Seed of all random sampling [default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<String>,
    /// Directory for figures and exports [default: out]
    #[arg(long = "out_dir", global = true, value_name = "DIR")]
    pub out_dir: Option<String>,
    /// Verification grid per side [default: 200]
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<String>,
    /// Arcs of the fiber chain check [default: 4096]
    #[arg(long = "n_c_fiber", global = true, value_name = "N")]
    pub n_c_fiber: Option<String>,
    /// Arcs of the density search [default: 200]
    #[arg(long = "n_c_access", global = true, value_name = "N")]
    pub n_c_access: Option<String>,
    /// Fiber-dynamics generators G^(+-2^j), j below this [default: 12]
    #[arg(long = "fiber_powers", global = true, value_name = "N")]
    pub fiber_powers: Option<String>,
    /// Start of the density search [default: 0]
    #[arg(long, global = true, value_name = "F", allow_hyphen_values = true)]
    pub t0: Option<String>,
    /// Iterates per empirical sample [default: 200]
    #[arg(long, global = true, value_name = "N")]
    pub iterations: Option<String>,
    /// Empirical sample points [default: 10000]
    #[arg(long = "n_empirical", global = true, value_name = "N")]
    pub n_empirical: Option<String>,
    /// Orbit samples of the graph soundness check [default: 100000]
    #[arg(long = "soundness_samples", global = true, value_name = "N")]
    pub soundness_samples: Option<String>,
    /// Base squares per side of the attractor enclosures [default: 64]
    #[arg(long = "enclosure_n_b", global = true, value_name = "N")]
    pub enclosure_n_b: Option<String>,
    /// Iterations of the attractor enclosures [default: 20]
    #[arg(long = "enclosure_iterations", global = true, value_name = "N")]
    pub enclosure_iterations: Option<String>,
    /// Half-length of grown leaves [default: 50]
    #[arg(long = "leaf_length", global = true, value_name = "F")]
    pub leaf_length: Option<String>,
    /// Fiber refinement tolerance of grown leaves [default: 0.0001]
    #[arg(long = "leaf_tol", global = true, value_name = "F")]
    pub leaf_tol: Option<String>,
    /// SVG canvas side in pixels [default: 800]
    #[arg(long, global = true, value_name = "N")]
    pub canvas: Option<String>,
    /// Fiber interval U as `lo,hi` [default: -0.5,-0.2]
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Fiber interval V as `lo,hi` [default: 0.3,0.5]
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Centre of the wandering band [default: 0.4]
    #[arg(long = "wander_center", global = true, value_name = "F")]
    pub wander_center: Option<String>,
}

impl Options {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let all: [(&'static str, &Option<String>); 29] = [
            ("r", &self.r),
            ("delta", &self.delta),
            ("rho", &self.rho),
            ("chart_scale", &self.chart_scale),
            ("n_b", &self.n_b),
            ("n_c", &self.n_c),
            ("epsilon_factor", &self.epsilon_factor),
            ("loops", &self.loops),
            ("tol_holonomy", &self.tol_holonomy),
            ("max_word_length", &self.max_word_length),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out_dir", &self.out_dir),
            ("grid", &self.grid),
            ("n_c_fiber", &self.n_c_fiber),
            ("n_c_access", &self.n_c_access),
            ("fiber_powers", &self.fiber_powers),
            ("t0", &self.t0),
            ("iterations", &self.iterations),
            ("n_empirical", &self.n_empirical),
            ("soundness_samples", &self.soundness_samples),
            ("enclosure_n_b", &self.enclosure_n_b),
            ("enclosure_iterations", &self.enclosure_iterations),
            ("leaf_length", &self.leaf_length),
            ("leaf_tol", &self.leaf_tol),
            ("canvas", &self.canvas),
            ("u", &self.u),
            ("v", &self.v),
            ("wander_center", &self.wander_center),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.merge_str(&text)?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

pub fn execute(command: Command, cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    match command {
        Command::Params => commands::params(cfg),
        Command::Verify => commands::verify(cfg, unperturbed),
        Command::Chain => commands::chain(cfg, unperturbed),
        Command::Nontransitive => commands::nontransitive(cfg, unperturbed),
        Command::Access => commands::access(cfg, unperturbed),
        Command::Render => commands::render(cfg, unperturbed),
        Command::Report => commands::report(cfg, unperturbed),
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cfg = match cli.options.resolve() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return 2;
        }
    };
    let result = pool.install(|| execute(cli.command, &cfg, cli.options.unperturbed));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return commands::exit_code(&e);
        }
    };
    if !cli.options.json_off {
        let path = cfg.out_dir.join(format!("{}.json", cli.command.name()));
        let written = std::fs::create_dir_all(&cfg.out_dir).and_then(|_| std::fs::write(&path, report.to_json()));
        if let Err(e) = written {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    let _ = write!(out, "{}", report.to_text());
    if report.passed() {
        0
    } else {
        1
    }
}
