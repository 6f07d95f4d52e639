//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::access::LoopSpec;
use crate::error::{Error, Result};
use crate::system::BaseConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub r: f64,
    pub delta: f64,
    pub rho: f64,
    pub chart_scale: f64,
    /// Base squares per side of the chain partition.
    pub n_b: usize,
    /// Fiber arcs of the chain partition.
    pub n_c: usize,
    /// Chain jump size in units of the box diameter.
    pub epsilon_factor: f64,
    /// `(a, b)` pairs of the su-loops at `p`.
    pub loops: Vec<(f64, f64)>,
    pub tol_holonomy: f64,
    pub max_word_length: usize,
    pub seed: u64,
    /// Worker threads; 0 means all cores.
    pub threads: usize,
    pub out_dir: PathBuf,

    /// Base and fiber samples per side for the verification grids.
    pub grid: usize,
    /// Arcs for the fiber chain check over `p`.
    pub n_c_fiber: usize,
    /// Arcs for the accessibility density search.
    pub n_c_access: usize,
    /// Generators `G_p^{±2^j}`, `j < fiber_powers`, in the density search.
    pub fiber_powers: usize,
    /// Start of the density search.
    pub t0: f64,
    /// Iterates per sample point in the empirical non-transitivity check.
    pub iterations: usize,
    /// Sample points in the empirical non-transitivity check.
    pub n_empirical: usize,
    /// Orbit samples for the transition-graph soundness check.
    pub soundness_samples: usize,
    /// Base squares per side of the attractor enclosures.
    pub enclosure_n_b: usize,
    pub enclosure_iterations: usize,
    pub leaf_length: f64,
    pub leaf_tol: f64,
    /// SVG canvas side in pixels.
    pub canvas: usize,
    pub u: (f64, f64),
    pub v: (f64, f64),
    /// Center of the certified wandering band.
    pub wander_center: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = BaseConfig::default();
        RunConfig {
            r: base.r,
            delta: base.delta,
            rho: base.rho,
            chart_scale: base.chart_scale,
            n_b: 64,
            n_c: 128,
            epsilon_factor: 1.5,
            loops: crate::access::default_loops().iter().map(|l| (l.a, l.b)).collect(),
            tol_holonomy: 1e-10,
            max_word_length: 40,
            seed: 0,
            threads: 0,
            out_dir: PathBuf::from("out"),
            grid: 200,
            n_c_fiber: 4096,
            n_c_access: 200,
            fiber_powers: 12,
            t0: 0.0,
            iterations: 200,
            n_empirical: 10_000,
            soundness_samples: 100_000,
            enclosure_n_b: 64,
            enclosure_iterations: 20,
            leaf_length: 50.0,
            leaf_tol: 1e-4,
            canvas: 800,
            u: (-0.5, -0.2),
            v: (0.3, 0.5),
            wander_center: 0.4,
        }
    }
}

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "r",
    "delta",
    "rho",
    "chart_scale",
    "n_b",
    "n_c",
    "epsilon_factor",
    "loops",
    "tol_holonomy",
    "max_word_length",
    "seed",
    "threads",
    "out_dir",
    "grid",
    "n_c_fiber",
    "n_c_access",
    "fiber_powers",
    "t0",
    "iterations",
    "n_empirical",
    "soundness_samples",
    "enclosure_n_b",
    "enclosure_iterations",
    "leaf_length",
    "leaf_tol",
    "canvas",
    "u",
    "v",
    "wander_center",
];

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("bad value `{value}` for `{key}`"))
}

fn float(key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| bad(key, value))
}

fn uint<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse::<T>().map_err(|_| bad(key, value))
}

fn pair(key: &str, value: &str) -> Result<(f64, f64)> {
    let (a, b) = value.split_once(',').ok_or_else(|| bad(key, value))?;
    Ok((float(key, a.trim())?, float(key, b.trim())?))
}

/// `a:b` items separated by commas; an empty value is the empty list.
fn loop_list(value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| bad("loops", item))?;
            Ok((float("loops", a.trim())?, float("loops", b.trim())?))
        })
        .collect()
}

impl RunConfig {
    pub fn base(&self) -> BaseConfig {
        BaseConfig {
            r: self.r,
            delta: self.delta,
            rho: self.rho,
            chart_scale: self.chart_scale,
        }
    }

    pub fn loop_specs(&self) -> Vec<LoopSpec> {
        self.loops.iter().map(|&(a, b)| LoopSpec::at_p(a, b)).collect()
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "r" => self.r = float(key, value)?,
            "delta" => self.delta = float(key, value)?,
            "rho" => self.rho = float(key, value)?,
            "chart_scale" => self.chart_scale = float(key, value)?,
            "n_b" => self.n_b = uint(key, value)?,
            "n_c" => self.n_c = uint(key, value)?,
            "epsilon_factor" => self.epsilon_factor = float(key, value)?,
            "loops" => self.loops = loop_list(value)?,
            "tol_holonomy" => self.tol_holonomy = float(key, value)?,
            "max_word_length" => self.max_word_length = uint(key, value)?,
            "seed" => self.seed = uint(key, value)?,
            "threads" => self.threads = uint(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "grid" => self.grid = uint(key, value)?,
            "n_c_fiber" => self.n_c_fiber = uint(key, value)?,
            "n_c_access" => self.n_c_access = uint(key, value)?,
            "fiber_powers" => self.fiber_powers = uint(key, value)?,
            "t0" => self.t0 = float(key, value)?,
            "iterations" => self.iterations = uint(key, value)?,
            "n_empirical" => self.n_empirical = uint(key, value)?,
            "soundness_samples" => self.soundness_samples = uint(key, value)?,
            "enclosure_n_b" => self.enclosure_n_b = uint(key, value)?,
            "enclosure_iterations" => self.enclosure_iterations = uint(key, value)?,
            "leaf_length" => self.leaf_length = float(key, value)?,
            "leaf_tol" => self.leaf_tol = float(key, value)?,
            "canvas" => self.canvas = uint(key, value)?,
            "u" => self.u = pair(key, value)?,
            "v" => self.v = pair(key, value)?,
            "wander_center" => self.wander_center = float(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            self.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(())
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.merge_str(text)?;
        Ok(c)
    }

    /// Textual value of a key, as accepted by [`RunConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "r" => self.r.to_string(),
            "delta" => self.delta.to_string(),
            "rho" => self.rho.to_string(),
            "chart_scale" => self.chart_scale.to_string(),
            "n_b" => self.n_b.to_string(),
            "n_c" => self.n_c.to_string(),
            "epsilon_factor" => self.epsilon_factor.to_string(),
            "loops" => self
                .loops
                .iter()
                .map(|(a, b)| format!("{a}:{b}"))
                .collect::<Vec<_>>()
                .join(","),
            "tol_holonomy" => self.tol_holonomy.to_string(),
            "max_word_length" => self.max_word_length.to_string(),
            "seed" => self.seed.to_string(),
            "threads" => self.threads.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "grid" => self.grid.to_string(),
            "n_c_fiber" => self.n_c_fiber.to_string(),
            "n_c_access" => self.n_c_access.to_string(),
            "fiber_powers" => self.fiber_powers.to_string(),
            "t0" => self.t0.to_string(),
            "iterations" => self.iterations.to_string(),
            "n_empirical" => self.n_empirical.to_string(),
            "soundness_samples" => self.soundness_samples.to_string(),
            "enclosure_n_b" => self.enclosure_n_b.to_string(),
            "enclosure_iterations" => self.enclosure_iterations.to_string(),
            "leaf_length" => self.leaf_length.to_string(),
            "leaf_tol" => self.leaf_tol.to_string(),
            "canvas" => self.canvas.to_string(),
            "u" => format!("{},{}", self.u.0, self.u.1),
            "v" => format!("{},{}", self.v.0, self.v.1),
            "wander_center" => self.wander_center.to_string(),
            _ => return None,
        })
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).expect("listed key"));
        }
        s
    }
}
