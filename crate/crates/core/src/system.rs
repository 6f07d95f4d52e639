//! The skew product `f(x,t) = (Ax, ψ_{Ax}(φ(t)))` on T² × R/2Z.
//!
//! `φ` is the time-`r` map of θ∂/∂t and `ψ_y` the time-`ρα(y)` map of
//! −γ∂/∂t. With `ρ = 0` this is the unperturbed map `f_r`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::Certificate;
use crate::chainrec;
use crate::error::{Error, Result};
use crate::fiber::{flow_theta, AlphaBump, CirclePoint, Flow1D, GammaBump};
use crate::torus::{Chart, ChartPoint, HyperbolicMatrix, TorusPoint2};

/// Base choices from which [`Params`] are derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseConfig {
    pub r: f64,
    pub delta: f64,
    pub rho: f64,
    pub chart_scale: f64,
}

impl Default for BaseConfig {
    fn default() -> Self {
        BaseConfig {
            r: 0.05,
            delta: 0.1,
            rho: 5e-4,
            chart_scale: 0.005,
        }
    }
}

/// All constants of the construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub r: f64,
    pub delta: f64,
    pub tau: f64,
    pub rho: f64,
    pub chart_scale: f64,
    pub matrix: HyperbolicMatrix,
    pub integrator_tol: f64,
    pub certified: BTreeMap<String, f64>,
}

impl Params {
    /// Params with an explicit `tau`, bypassing derivation. Used for controls
    /// such as `A × id` (`r = ρ = 0`).
    pub fn explicit(base: BaseConfig, tau: f64) -> Self {
        Params {
            r: base.r,
            delta: base.delta,
            tau,
            rho: base.rho,
            chart_scale: base.chart_scale,
            matrix: HyperbolicMatrix::cat(),
            integrator_tol: 1e-12,
            certified: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> BaseConfig {
        BaseConfig {
            r: self.r,
            delta: self.delta,
            rho: self.rho,
            chart_scale: self.chart_scale,
        }
    }

    /// The same constants with the perturbation switched off (`f_r`).
    pub fn unperturbed(&self) -> Self {
        Params {
            rho: 0.0,
            certified: BTreeMap::new(),
            ..self.clone()
        }
    }

    /// `key = value` lines; floats use shortest round-trip formatting.
    pub fn to_config_string(&self) -> String {
        let m = self.matrix.entries();
        let mut s = String::new();
        let _ = writeln!(s, "r = {}", self.r);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "chart_scale = {}", self.chart_scale);
        let _ = writeln!(s, "matrix = {},{},{},{}", m[0][0], m[0][1], m[1][0], m[1][1]);
        let _ = writeln!(s, "integrator_tol = {}", self.integrator_tol);
        for (k, v) in &self.certified {
            let _ = writeln!(s, "certified.{k} = {v}");
        }
        s
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut p = Params::explicit(BaseConfig::default(), 0.0);
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("line {}: bad number `{v}`", lineno + 1)))
            };
            match key {
                "r" => p.r = num(value)?,
                "delta" => p.delta = num(value)?,
                "tau" => p.tau = num(value)?,
                "rho" => p.rho = num(value)?,
                "chart_scale" => p.chart_scale = num(value)?,
                "integrator_tol" => p.integrator_tol = num(value)?,
                "matrix" => {
                    let e: Vec<i64> = value
                        .split(',')
                        .map(|x| x.trim().parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Config(format!("line {}: bad matrix", lineno + 1)))?;
                    if e.len() != 4 {
                        return Err(Error::Config("matrix needs 4 entries".into()));
                    }
                    p.matrix = HyperbolicMatrix::new([[e[0], e[1]], [e[2], e[3]]])?;
                }
                k if k.starts_with("certified.") => {
                    p.certified.insert(k["certified.".len()..].to_string(), num(value)?);
                }
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
            if !key.starts_with("certified.") && !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }
        Ok(p)
    }
}

/// Result of [`derive_params`]; `certificate` tells whether `params` is valid.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub params: Params,
    pub certificate: Certificate,
}

/// Minimum log-scale gap required between the fiber exponent `K` and `log(1/|λ|)`.
pub const PH_MARGIN_REQUIRED: f64 = 0.1;

/// Fixes τ from the θ-flow displacement at `−δ` and searches ρ downward
/// (at most 10 halvings) until every constraint holds.
pub fn derive_params(base: BaseConfig) -> Derivation {
    derive_params_with(base, true)
}

pub fn derive_params_with(base: BaseConfig, auto_shrink: bool) -> Derivation {
    let matrix = HyperbolicMatrix::cat();
    let log_expansion = matrix.expansion().ln();
    let displacement = flow_theta(-base.delta, base.r).value + base.delta;
    let displacement_upper = flow_theta(1.0 - base.delta, base.r).value - (1.0 - base.delta);
    let tau = (0.5 * displacement).min(base.delta / 4.0);

    let attempts = if auto_shrink { 11 } else { 1 };
    let mut rho = base.rho;
    let mut last = None;
    for attempt in 0..attempts {
        let mut params = Params::explicit(BaseConfig { rho, ..base }, tau);
        params.matrix = matrix;
        let mut cert = Certificate::new("params");
        cert.param("r", base.r)
            .param("delta", base.delta)
            .param("rho_requested", base.rho)
            .param("chart_scale", base.chart_scale);
        cert.value("tau", tau)
            .value("rho", rho)
            .value("displacement", displacement)
            .value("rho_halvings", attempt as f64);
        cert.margin("tau_positive", tau)
            .margin("tau_below_half_delta", base.delta / 2.0 - tau)
            .margin("displacement_exceeds_tau", displacement - tau)
            .margin("trapping_slack", base.delta - tau - rho)
            .margin("chart_scale_positive", base.chart_scale)
            .slack("rho_nonnegative", rho);
        cert.check(
            "displacement_symmetric",
            (displacement_upper - displacement).abs() < 1e-12,
        );
        let e = 1.0 / matrix.lambda().abs();
        cert.check("expansion_normalized", e > 1.0 && e < 10.0);

        let gamma_bound = if tau > 0.0 {
            GammaBump::new(tau).derivative_bound()
        } else {
            f64::INFINITY
        };
        let k = 2.0 * PI * base.r.abs() + if rho > 0.0 { rho * gamma_bound } else { 0.0 };
        cert.value("exponent_k", k).value("log_expansion", log_expansion);
        cert.margin("ph_excess", log_expansion - k - PH_MARGIN_REQUIRED);

        let ph_ok = log_expansion - k - PH_MARGIN_REQUIRED > 0.0 && base.delta - tau - rho > 0.0;
        params.certified = cert.margins.clone();
        let done = cert.passed() || ph_ok || tau <= 0.0;
        last = Some(Derivation {
            params,
            certificate: cert,
        });
        if done {
            break;
        }
        rho /= 2.0;
    }
    let mut d = last.expect("at least one attempt");
    d.certificate
        .note("tau = min(displacement/2, delta/4) with displacement = phi_r(-delta) + delta");
    d
}

/// A point of T³ = T² × R/2Z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3 {
    pub base: TorusPoint2,
    pub t: CirclePoint,
}

impl Point3 {
    pub fn new(base: TorusPoint2, t: f64) -> Self {
        Point3 {
            base,
            t: CirclePoint::new(t),
        }
    }
}

/// Params together with everything derived from them.
#[derive(Clone, Debug)]
pub struct SkewSystem {
    params: Params,
    chart: Chart,
    alpha: AlphaBump,
    gamma: Option<GammaBump>,
    alpha_gradient_bound: f64,
    gamma_derivative_bound: f64,
}

impl SkewSystem {
    pub fn new(params: Params) -> Result<Self> {
        if params.rho < 0.0 || params.chart_scale <= 0.0 {
            return Err(Error::InvalidParams("rho must be >= 0 and chart_scale > 0".into()));
        }
        let gamma = if params.tau > 0.0 && params.tau < 0.5 {
            Some(GammaBump::new(params.tau))
        } else if params.rho > 0.0 {
            return Err(Error::InvalidParams(format!(
                "perturbation needs 0 < tau < 0.5, got {}",
                params.tau
            )));
        } else {
            None
        };
        let chart = Chart::new(params.matrix, params.chart_scale);
        let alpha = AlphaBump::new(chart);
        let alpha_gradient_bound = alpha.gradient_bound();
        let gamma_derivative_bound = gamma.map_or(0.0, |g| g.derivative_bound());
        Ok(SkewSystem {
            params,
            chart,
            alpha,
            gamma,
            alpha_gradient_bound,
            gamma_derivative_bound,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.params.matrix
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn alpha(&self) -> &AlphaBump {
        &self.alpha
    }

    pub fn gamma(&self) -> Option<&GammaBump> {
        self.gamma.as_ref()
    }

    pub fn is_perturbed(&self) -> bool {
        self.params.rho > 0.0
    }

    pub fn alpha_gradient_bound(&self) -> f64 {
        self.alpha_gradient_bound
    }

    /// `K = 2π|r| + ρ·max|γ'|`: bound on |log ∂_t G_x|.
    pub fn exponent(&self) -> f64 {
        2.0 * PI * self.params.r.abs() + self.params.rho * self.gamma_derivative_bound
    }

    /// Lipschitz bound of `y ↦ ψ_y(t)` in the evaluation point `y`.
    pub fn psi_sensitivity(&self) -> f64 {
        if self.is_perturbed() {
            self.params.rho * self.alpha_gradient_bound
        } else {
            0.0
        }
    }

    /// Lipschitz bound of `x ↦ G_x(t)` (α is evaluated at `Ax`).
    pub fn x_sensitivity(&self) -> f64 {
        self.psi_sensitivity() * self.params.matrix.norm()
    }

    /// Whether ψ acts non-trivially at fiber coordinate `t` for some base point.
    pub fn psi_active(&self, t: f64) -> bool {
        self.is_perturbed() && self.gamma.is_some_and(|g| g.in_support(t))
    }

    pub fn phi(&self, t: f64) -> Flow1D {
        flow_theta(t, self.params.r)
    }

    pub fn phi_inverse(&self, t: f64) -> Flow1D {
        flow_theta(t, -self.params.r)
    }

    /// ψ for a precomputed α value.
    pub fn psi_with_alpha(&self, alpha: f64, t: f64) -> Flow1D {
        match self.gamma {
            Some(g) if self.is_perturbed() && alpha != 0.0 => g.flow(t, -self.params.rho * alpha),
            _ => Flow1D {
                value: t,
                derivative: 1.0,
                method: crate::fiber::FlowMethod::Integrated,
            },
        }
    }

    pub fn psi_inverse_with_alpha(&self, alpha: f64, t: f64) -> Flow1D {
        match self.gamma {
            Some(g) if self.is_perturbed() && alpha != 0.0 => g.flow(t, self.params.rho * alpha),
            _ => Flow1D {
                value: t,
                derivative: 1.0,
                method: crate::fiber::FlowMethod::Integrated,
            },
        }
    }

    pub fn alpha_at(&self, y: &TorusPoint2) -> f64 {
        if self.is_perturbed() {
            self.alpha.value(y)
        } else {
            0.0
        }
    }

    /// Fiber part of `f` landing over `image`: `t ↦ ψ_image(φ(t))` on lifts.
    pub fn step_onto(&self, image: &TorusPoint2, t: f64) -> f64 {
        let a = self.alpha_at(image);
        self.psi_with_alpha(a, self.phi(t).value).value
    }

    /// Inverse of [`Self::step_onto`]: `s ↦ φ⁻¹(ψ_image⁻¹(s))`.
    pub fn step_back_from(&self, image: &TorusPoint2, s: f64) -> f64 {
        let a = self.alpha_at(image);
        self.phi_inverse(self.psi_inverse_with_alpha(a, s).value).value
    }

    /// `f(x,t) = (Ax, ψ_{Ax}(φ(t)))`.
    pub fn apply(&self, pt: Point3) -> Point3 {
        let image = self.params.matrix.apply(pt.base);
        Point3::new(image, self.step_onto(&image, pt.t.t()))
    }

    /// `f_r(x,t) = (Ax, φ(t))`, composed as `X_r ∘ (A × id)`.
    pub fn apply_unperturbed(&self, pt: Point3) -> Point3 {
        let moved = Point3::new(self.params.matrix.apply(pt.base), pt.t.t());
        Point3::new(moved.base, self.phi(moved.t.t()).value)
    }

    /// `f_r` composed the other way round, `(A × id) ∘ X_r`.
    pub fn apply_unperturbed_commuted(&self, pt: Point3) -> Point3 {
        let flowed = Point3::new(pt.base, self.phi(pt.t.t()).value);
        Point3::new(self.params.matrix.apply(flowed.base), flowed.t.t())
    }

    /// `f⁻¹(y,s) = (A⁻¹y, φ⁻¹(ψ_y⁻¹(s)))`.
    pub fn inverse(&self, pt: Point3) -> Point3 {
        Point3::new(
            self.params.matrix.apply_inverse(pt.base),
            self.step_back_from(&pt.base, pt.t.t()),
        )
    }

    pub fn fiber_map(&self, x: TorusPoint2) -> FiberMap<'_> {
        let image = self.params.matrix.apply(x);
        FiberMap {
            system: self,
            base: x,
            image,
            alpha: self.alpha_at(&image),
        }
    }
}

/// The circle diffeomorphism `G_x = ψ_{Ax} ∘ φ` over a fixed base point.
#[derive(Clone, Copy, Debug)]
pub struct FiberMap<'a> {
    system: &'a SkewSystem,
    base: TorusPoint2,
    image: TorusPoint2,
    alpha: f64,
}

impl FiberMap<'_> {
    pub fn base(&self) -> TorusPoint2 {
        self.base
    }

    pub fn image(&self) -> TorusPoint2 {
        self.image
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.system
            .psi_with_alpha(self.alpha, self.system.phi(t).value)
            .value
    }

    pub fn invert(&self, s: f64) -> f64 {
        let u = self.system.psi_inverse_with_alpha(self.alpha, s).value;
        self.system.phi_inverse(u).value
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let phi = self.system.phi(t);
        phi.derivative * self.system.psi_with_alpha(self.alpha, phi.value).derivative
    }

    pub fn x_sensitivity_bound(&self) -> f64 {
        self.system.x_sensitivity()
    }
}

/// Resolution of the verification grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyGrid {
    /// Base points per axis.
    pub n_x: usize,
    /// Fiber points.
    pub n_t: usize,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        VerifyGrid { n_x: 200, n_t: 200 }
    }
}

/// Partial hyperbolicity: fiber derivatives lie strictly inside `(|λ|, 1/|λ|)`.
pub fn center_derivative_bounds(system: &SkewSystem, grid: VerifyGrid) -> Certificate {
    let n_t = grid.n_t.max(1);
    let n_x = grid.n_x.max(1);
    let ts: Vec<f64> = (0..n_t).map(|i| -1.0 + 2.0 * i as f64 / n_t as f64).collect();
    let phis: Vec<Flow1D> = ts.iter().map(|&t| system.phi(t)).collect();

    let (lo, hi) = (0..n_x * n_x)
        .into_par_iter()
        .map(|idx| {
            let x = TorusPoint2::new((idx / n_x) as f64 / n_x as f64, (idx % n_x) as f64 / n_x as f64);
            let fm = system.fiber_map(x);
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for phi in &phis {
                let d = phi.derivative * system.psi_with_alpha(fm.alpha, phi.value).derivative;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)));

    let k = system.exponent();
    let log_band = system.matrix().expansion().ln();
    let mut cert = Certificate::new("center_derivative");
    cert.param("r", system.params().r)
        .param("rho", system.params().rho)
        .param("tau", system.params().tau);
    cert.value("grid_min", lo)
        .value("grid_max", hi)
        .value("padded_min", (-k).exp())
        .value("padded_max", k.exp())
        .value("exponent_k", k)
        .value("lambda", system.matrix().lambda().abs());
    cert.margin("lower_log", log_band - k)
        .margin("upper_log", log_band - k);
    cert.check("grid_within_padding", lo >= (-k).exp() * (1.0 - 1e-12) && hi <= k.exp() * (1.0 + 1e-12));
    cert.grid(format!(
        "{n_x}x{n_x} base grid x {n_t} fiber points; padded by |log D| <= K = 2*pi*r + rho*max|gamma'| for off-grid points"
    ));
    cert
}

/// The four items of the construction's main property list.
pub fn check_proposition(system: &SkewSystem, grid: VerifyGrid) -> Vec<Certificate> {
    vec![
        proposition_item1(system, grid),
        proposition_item2(system),
        proposition_item3(system, grid),
        proposition_item4(system, grid),
    ]
}

fn proposition_item1(system: &SkewSystem, grid: VerifyGrid) -> Certificate {
    let mut cert = center_derivative_bounds(system, grid);
    cert.name = "prop.item1_skew_product".into();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut skew = true;
    for _ in 0..2000 {
        let x = TorusPoint2::new(rng.gen(), rng.gen());
        let a = system.apply(Point3::new(x, rng.gen_range(-1.0..1.0)));
        let b = system.apply(Point3::new(x, rng.gen_range(-1.0..1.0)));
        skew &= a.base == b.base && a.base == system.matrix().apply(x);
    }
    cert.check("base_depends_on_base_only", skew);
    cert
}

/// Fiber spacing and jump size for the fiber chain check.
pub const FIBER_CHAIN_ARCS: usize = 4096;

fn proposition_item2(system: &SkewSystem) -> Certificate {
    let p = system.chart().center();
    let mut cert = chainrec::fiber_chain_check(system, FIBER_CHAIN_ARCS, 2.0 * 2.0 / FIBER_CHAIN_ARCS as f64);
    cert.name = "prop.item2_fixed_fiber".into();
    for (i, t) in [(0, 0.0), (1, 1.0)] {
        let img = system.apply(Point3::new(p, t));
        cert.check(&format!("p{i}_fixed"), img == Point3::new(p, t));
    }
    cert
}

/// Points `y = Ax` sampled on a chart-aware grid plus a coarse torus grid.
fn item3_samples(system: &SkewSystem, n: usize) -> Vec<TorusPoint2> {
    let chart = system.chart();
    let mut out = Vec::new();
    let m = (n / 2).max(20);
    for i in 0..=2 * m {
        for j in 0..=2 * m {
            let c = ChartPoint::new(-5.0 + 5.0 * i as f64 / m as f64, -5.0 + 5.0 * j as f64 / m as f64);
            out.push(chart.from_chart(c));
        }
    }
    let g = (n / 4).max(16);
    for i in 0..g {
        for j in 0..g {
            out.push(TorusPoint2::new((i as f64 + 0.5) / g as f64, (j as f64 + 0.5) / g as f64));
        }
    }
    out
}

fn proposition_item3(system: &SkewSystem, grid: VerifyGrid) -> Certificate {
    let chart = system.chart();
    let samples = item3_samples(system, grid.n_x);
    // (max |G - i| inside box, min (i - G) off box strict region, min (i - G) boundary zone, count strict)
    let stats = samples
        .par_iter()
        .map(|y| {
            let c = chart.coords_unchecked(y);
            let box_dist = (c.x_s.abs().max(c.x_u.abs()) - 1.0).max(0.0);
            let mut eq_err: f64 = 0.0;
            let mut strict = f64::INFINITY;
            let mut weak = f64::INFINITY;
            let mut n_strict = 0usize;
            for i in [0.0, 1.0] {
                let g = system.step_onto(y, i);
                if box_dist == 0.0 {
                    eq_err = eq_err.max((g - i).abs());
                } else if box_dist >= 0.1 {
                    strict = strict.min(i - g);
                    n_strict += 1;
                } else {
                    weak = weak.min(i - g);
                }
            }
            (eq_err, strict, weak, n_strict)
        })
        .reduce(
            || (0.0, f64::INFINITY, f64::INFINITY, 0),
            |a, b| (a.0.max(b.0), a.1.min(b.1), a.2.min(b.2), a.3 + b.3),
        );

    let mut cert = Certificate::new("prop.item3_invariant_circles");
    cert.param("rho", system.params().rho);
    cert.value("equality_error", stats.0)
        .value("strict_min_drop", stats.1)
        .value("strict_samples", stats.3 as f64);
    cert.slack("equality_on_central_box", 1e-12 - stats.0);
    if system.is_perturbed() {
        cert.margin("strict_below_off_box", stats.1 - 1e-15);
    } else {
        cert.note("unperturbed: the circles t = 0, 1 are invariant with equality everywhere");
        cert.slack("unperturbed_equality", 1e-12 - (-stats.1).max(0.0));
    }
    if stats.2.is_finite() {
        cert.slack("non_strict_near_box_boundary", stats.2);
    }
    cert.grid(format!(
        "{} samples of y = Ax (chart grid on [-5,5]^2 plus torus grid); strictness claimed at chart distance >= 0.1 from [-1,1]^2, non-strict inside that collar",
        samples.len()
    ));
    cert
}

fn proposition_item4(system: &SkewSystem, grid: VerifyGrid) -> Certificate {
    let p = system.params();
    let n = grid.n_x.max(1);
    let h = 1.0 / n as f64;
    let pad_radius = h * std::f64::consts::SQRT_2 / 2.0;
    let ts = [-p.delta, 1.0 - p.delta];
    let mins: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let pad = if system.psi_active(system.phi(t).value) {
                system.x_sensitivity() * pad_radius
            } else {
                0.0
            };
            let min = (0..n * n)
                .into_par_iter()
                .map(|idx| {
                    let x = TorusPoint2::new((idx / n) as f64 * h, (idx % n) as f64 * h);
                    system.fiber_map(x).eval(t) - t - p.tau
                })
                .reduce(|| f64::INFINITY, f64::min);
            min - pad
        })
        .collect();
    let mut cert = Certificate::new("prop.item4_band_push");
    cert.param("delta", p.delta).param("tau", p.tau);
    cert.margin("minus_delta", mins[0])
        .margin("one_minus_delta", mins[1])
        .margin("at_least_half_tau", mins[0].min(mins[1]) - 0.5 * p.tau);
    cert.grid(format!("{n}x{n} base grid, padded by x-sensitivity where psi acts"));
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_system() -> SkewSystem {
        SkewSystem::new(derive_params(BaseConfig::default()).params).unwrap()
    }

    #[test]
    fn default_derivation() {
        let d = derive_params(BaseConfig::default());
        assert!(d.certificate.passed(), "{}", d.certificate.to_text());
        let p = &d.params;
        // Frozen from the closed-form θ flow: φ_r(−0.1) + 0.1.
        let dstar = 0.008_739_811_644_388_626;
        assert!((d.certificate.values["displacement"] - dstar).abs() < 1e-15);
        assert!((p.tau - dstar / 2.0).abs() < 1e-15);
        assert!(p.tau > 0.0 && p.tau < p.delta / 2.0);
        assert_eq!(p.rho, 5e-4);
        assert!((d.certificate.values["exponent_k"] - 0.562_489).abs() < 1e-5);
    }

    #[test]
    fn zero_time_fails() {
        let d = derive_params(BaseConfig { r: 0.0, ..Default::default() });
        assert!(!d.certificate.passed());
        assert_eq!(d.params.tau, 0.0);
    }

    #[test]
    fn large_rho_is_shrunk() {
        let d = derive_params(BaseConfig { rho: 0.01, ..Default::default() });
        assert!(d.certificate.passed());
        assert!(d.params.rho < 0.01 && d.params.rho >= 0.01 / 1024.0);
        let strict = derive_params_with(BaseConfig { rho: 0.1, ..Default::default() }, false);
        assert!(!strict.certificate.passed());
        assert_eq!(strict.params.rho, 0.1);
    }

    #[test]
    fn params_round_trip() {
        let p = derive_params(BaseConfig::default()).params;
        let text = p.to_config_string();
        let back = Params::from_config_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_config_string(), text);
        assert!(Params::from_config_str("bogus = 1").is_err());
        assert!(Params::from_config_str("r = x").is_err());
    }

    #[test]
    fn fixed_points_and_invariant_circles() {
        let sys = default_system();
        let p = TorusPoint2::ORIGIN;
        for t in [0.0, 1.0] {
            assert_eq!(sys.apply(Point3::new(p, t)), Point3::new(p, t));
            assert_eq!(sys.apply_unperturbed(Point3::new(p, t)), Point3::new(p, t));
            assert_eq!(sys.inverse(Point3::new(p, t)), Point3::new(p, t));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = TorusPoint2::new(rng.gen(), rng.gen());
            for t in [0.0, 1.0] {
                let img = sys.apply_unperturbed(Point3::new(x, t));
                assert_eq!(img, Point3::new(sys.matrix().apply(x), t));
            }
        }
    }

    #[test]
    fn circle_drop_matches_central_box() {
        let sys = default_system();
        let chart = *sys.chart();
        let lam = sys.matrix().lambda();
        // x in [-1/λ, 1/λ]_s × [-λ, λ]_u  ⇔  Ax in the central box.
        for (xs, xu, inside) in [(2.5, 0.3, true), (-2.6, -0.38, true), (3.0, 0.0, false), (0.0, 0.5, false)] {
            let x = chart.from_chart(ChartPoint::new(xs, xu));
            let y = chart.coords_unchecked(&sys.matrix().apply(x));
            assert!((y.x_s - lam * xs).abs() < 1e-9);
            let g = sys.apply(Point3::new(x, 0.0)).t.t();
            if inside {
                assert_eq!(g, 0.0);
            } else {
                assert!(g < 0.0);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let sys = default_system();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chart = *sys.chart();
        let mut worst: f64 = 0.0;
        for i in 0..100_000 {
            let x = if i % 4 == 0 {
                chart.from_chart(ChartPoint::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)))
            } else {
                TorusPoint2::new(rng.gen(), rng.gen())
            };
            let t = if i % 2 == 0 {
                rng.gen_range(-0.01..0.01)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            let z = Point3::new(x, t);
            let back = sys.inverse(sys.apply(z));
            assert_eq!(back.base, z.base);
            worst = worst.max(back.t.distance(&z.t));
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn inverse_preserves_zero_circle_over_central_preimage() {
        let sys = default_system();
        let chart = *sys.chart();
        for c in [ChartPoint::new(0.5, 0.5), ChartPoint::new(-1.0, 1.0), ChartPoint::new(0.0, -0.9)] {
            let y = chart.from_chart(c);
            assert_eq!(sys.inverse(Point3::new(y, 0.0)).t.t(), 0.0);
        }
    }

    #[test]
    fn commutation_of_unperturbed_stage() {
        let sys = default_system();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100_000 {
            let z = Point3::new(TorusPoint2::new(rng.gen(), rng.gen()), rng.gen_range(-1.0..1.0));
            let a = sys.apply_unperturbed(z);
            let b = sys.apply_unperturbed_commuted(z);
            assert_eq!(a.base, b.base);
            assert!(a.t.distance(&b.t) < 1e-12);
        }
    }

    #[test]
    fn fiber_maps_are_increasing() {
        let sys = default_system();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chart = *sys.chart();
        for i in 0..100 {
            let x = if i % 2 == 0 {
                sys.matrix()
                    .apply_inverse(chart.from_chart(ChartPoint::new(rng.gen_range(-3.5..3.5), rng.gen_range(-3.5..3.5))))
            } else {
                TorusPoint2::new(rng.gen(), rng.gen())
            };
            let fm = sys.fiber_map(x);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..10_000 {
                let t = -1.0 + 2.0 * k as f64 / 10_000.0;
                assert!(fm.derivative(t) > 0.0);
                let g = fm.eval(t);
                if k % 5 == 0 {
                    assert!(g > prev);
                    prev = g;
                }
                assert!((fm.invert(g) - t).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn fiber_map_over_p_is_phi() {
        let sys = default_system();
        let fm = sys.fiber_map(TorusPoint2::ORIGIN);
        for k in 0..1000 {
            let t = -1.0 + 2.0 * k as f64 / 1000.0;
            assert!((fm.eval(t) - sys.phi(t).value).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_is_identity_off_gamma_support() {
        let sys = default_system();
        let tau = sys.params().tau;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let y = TorusPoint2::new(rng.gen(), rng.gen());
            let a = sys.alpha_at(&y);
            let t = if rng.gen::<bool>() {
                rng.gen_range(tau..1.0 - tau)
            } else {
                rng.gen_range(-1.0 + tau..=-tau)
            };
            assert_eq!(sys.psi_with_alpha(a, t).value, t);
            // G_x(t) = φ(t) whenever φ(t) stays off the support.
            let fm = sys.fiber_map(y);
            if !sys.psi_active(sys.phi(t).value) {
                assert_eq!(fm.eval(t), sys.phi(t).value);
            }
        }
    }

    #[test]
    fn skew_product_structure() {
        let sys = default_system();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let x = TorusPoint2::new(rng.gen(), rng.gen());
            let a = sys.apply(Point3::new(x, rng.gen_range(-1.0..1.0)));
            let b = sys.apply(Point3::new(x, rng.gen_range(-1.0..1.0)));
            assert_eq!(a.base, b.base);
        }
    }

    #[test]
    fn derivative_band_controls() {
        let id = SkewSystem::new(Params::explicit(
            BaseConfig { r: 0.0, rho: 0.0, ..Default::default() },
            0.0,
        ))
        .unwrap();
        let c = center_derivative_bounds(&id, VerifyGrid { n_x: 20, n_t: 50 });
        assert!(c.passed());
        assert_eq!(c.values["grid_min"], 1.0);
        assert_eq!(c.values["grid_max"], 1.0);
        assert!((c.margins["lower_log"] - 0.962_423_650_119_206_9).abs() < 1e-12);

        let sys = default_system();
        let c = center_derivative_bounds(&sys, VerifyGrid { n_x: 40, n_t: 400 });
        assert!(c.passed(), "{}", c.to_text());
        assert!(c.margins["lower_log"] > 0.3);

        let bad = derive_params_with(BaseConfig { rho: 0.1, ..Default::default() }, false);
        let sys = SkewSystem::new(bad.params).unwrap();
        let c = center_derivative_bounds(&sys, VerifyGrid { n_x: 20, n_t: 200 });
        assert!(!c.passed());
    }
}
