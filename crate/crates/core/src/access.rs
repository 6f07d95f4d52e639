//! Strong stable/unstable holonomies, su-loops on the fiber over `p`, and the
//! density search that certifies accessibility at a finite scale.
//!
//! Holonomies are truncated limits along offset orbits: for a stable leg the
//! companion orbit is `A^k x + aλ^k·e_s`, for an unstable leg it is
//! `A^{−k} x + bλ^k·e_u`. Offsets are applied to the exactly computed anchor
//! orbit, so rounding is never amplified by the hyperbolic base, and deep
//! levels carry only the fiber gap between the two orbits.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::fiber::{flow_theta, CirclePoint};
use crate::invariants::{grow_stable_leaf, grow_unstable_leaf};
use crate::system::SkewSystem;
use crate::torus::TorusPoint2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HolonomyKind {
    Stable,
    Unstable,
}

/// Transport of fiber coordinate `t` from `from` to `from + length·e`, with
/// `e = e_s` or `e_u` according to `kind`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolonomyRequest {
    pub from: TorusPoint2,
    pub length: f64,
    pub kind: HolonomyKind,
    pub t: f64,
    pub tol: f64,
}

impl HolonomyRequest {
    pub fn to(&self, system: &SkewSystem) -> TorusPoint2 {
        let e = direction(system, self.kind);
        self.from.translate([self.length * e[0], self.length * e[1]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Holonomy {
    /// Transported coordinate, as a lift near the input.
    pub value: f64,
    pub error_bound: f64,
    pub depth: usize,
}

impl Holonomy {
    pub fn point(&self) -> CirclePoint {
        CirclePoint::new(self.value)
    }
}

fn direction(system: &SkewSystem, kind: HolonomyKind) -> [f64; 2] {
    let e = system.matrix().eigen();
    match kind {
        HolonomyKind::Stable => e.e_s,
        HolonomyKind::Unstable => e.e_u,
    }
}

/// Contraction rate `q = |λ|·e^K` of the truncation tail.
pub fn tail_rate(system: &SkewSystem) -> f64 {
    system.matrix().lambda().abs() * system.exponent().exp()
}

/// `(C, q)` with tail bound `C·q^n/(1−q)` after `n` steps.
fn tail_constants(system: &SkewSystem, req: &HolonomyRequest) -> Result<(f64, f64)> {
    let q = tail_rate(system);
    if q >= 1.0 {
        return Err(Error::Divergent(q));
    }
    let lam = system.matrix().lambda().abs();
    let k = system.exponent();
    let base = system.psi_sensitivity() * req.length.abs();
    let c = match req.kind {
        HolonomyKind::Stable => base * lam * k.exp(),
        HolonomyKind::Unstable => base * (2.0 * k).exp(),
    };
    Ok((c, q))
}

/// Smallest depth whose tail bound is below `tol`, and that bound.
pub fn truncation_depth(system: &SkewSystem, req: &HolonomyRequest) -> Result<(usize, f64)> {
    let (c, q) = tail_constants(system, req)?;
    let mut n = 0;
    let mut bound = c / (1.0 - q);
    while bound >= req.tol && n < 10_000 {
        n += 1;
        bound *= q;
    }
    Ok((n, bound))
}

/// Offsets below this are handled in linearized gap form.
const LINEAR_OFFSET: f64 = 1e-8;

/// One return step of a truncated holonomy: from the anchor value `s_in` one
/// level deeper to `s_out`, evaluated over `anchor` and `companion`.
struct Level {
    anchor: TorusPoint2,
    companion: TorusPoint2,
    offset: f64,
    s_in: f64,
    s_out: f64,
}

/// Return map over a companion image and its derivative / anchor difference.
fn return_step(system: &SkewSystem, kind: HolonomyKind, y: &TorusPoint2, s: f64) -> f64 {
    match kind {
        HolonomyKind::Stable => system.step_back_from(y, s),
        HolonomyKind::Unstable => system.step_onto(y, s),
    }
}

/// `(J, δ)`: derivative of the companion return map at `s_in` and the
/// difference of the companion and anchor return maps there, both computed
/// without cancellation.
fn linearized(system: &SkewSystem, kind: HolonomyKind, l: &Level) -> (f64, f64) {
    let a_y = system.alpha_at(&l.companion);
    let d_alpha = a_y - system.alpha_at(&l.anchor);
    let a_x = a_y - d_alpha;
    let rho = system.params().rho;
    let shift = |u: f64, time: f64| match system.gamma() {
        Some(g) if time != 0.0 => g.displacement(u, time),
        _ => 0.0,
    };
    match kind {
        HolonomyKind::Stable => {
            let p = system.psi_inverse_with_alpha(a_y, l.s_in);
            let j = system.phi_inverse(p.value).derivative * p.derivative;
            let u = system.psi_inverse_with_alpha(a_x, l.s_in).value;
            let delta = system.phi_inverse(u).derivative * shift(u, rho * d_alpha);
            (j, delta)
        }
        HolonomyKind::Unstable => {
            let w = system.phi(l.s_in);
            let p = system.psi_with_alpha(a_y, w.value);
            let u = system.psi_with_alpha(a_x, w.value).value;
            (p.derivative * w.derivative, shift(u, -rho * d_alpha))
        }
    }
}

/// Truncated holonomy at an explicit depth.
///
/// The anchor orbit is followed `depth` steps (forward for stable, backward
/// for unstable legs) and the companion orbit brings it back. Returning
/// directly would amplify rounding by the inverse fiber contraction of the
/// anchor orbit, so deep levels propagate only the gap `g` between companion
/// and anchor values, `g ← J·g + δ`; the last levels, where offsets are
/// large, are evaluated exactly.
pub fn holonomy_at_depth(system: &SkewSystem, req: &HolonomyRequest, depth: usize) -> f64 {
    if req.length == 0.0 {
        return req.t;
    }
    let m = system.matrix();
    let lam = m.lambda().abs();
    let e = direction(system, req.kind);
    let companion = |x: TorusPoint2, k: usize| {
        let a = req.length * lam.powi(k as i32);
        (x.translate([a * e[0], a * e[1]]), a.abs())
    };
    let mut levels = Vec::with_capacity(depth);
    let mut s = req.t;
    match req.kind {
        HolonomyKind::Stable => {
            let mut x = req.from;
            for k in 1..=depth {
                x = m.apply(x);
                let next = system.step_onto(&x, s);
                let (y, offset) = companion(x, k);
                levels.push(Level { anchor: x, companion: y, offset, s_in: next, s_out: s });
                s = next;
            }
        }
        HolonomyKind::Unstable => {
            let mut x = req.from;
            for k in 0..depth {
                let next = system.step_back_from(&x, s);
                let (y, offset) = companion(x, k);
                levels.push(Level { anchor: x, companion: y, offset, s_in: next, s_out: s });
                s = next;
                x = m.apply_inverse(x);
            }
        }
    }
    let mut gap = 0.0;
    for l in levels.iter().rev() {
        gap = if l.offset <= LINEAR_OFFSET {
            let (j, delta) = linearized(system, req.kind, l);
            j * gap + delta
        } else {
            return_step(system, req.kind, &l.companion, l.s_in + gap) - l.s_out
        };
    }
    req.t + gap
}

pub fn holonomy(system: &SkewSystem, req: &HolonomyRequest) -> Result<Holonomy> {
    if req.length == 0.0 {
        return Ok(Holonomy {
            value: req.t,
            error_bound: 0.0,
            depth: 0,
        });
    }
    let (depth, error_bound) = truncation_depth(system, req)?;
    Ok(Holonomy {
        value: holonomy_at_depth(system, req, depth),
        error_bound,
        depth,
    })
}

pub fn stable_holonomy(system: &SkewSystem, from: TorusPoint2, length: f64, t: f64, tol: f64) -> Result<Holonomy> {
    holonomy(
        system,
        &HolonomyRequest {
            from,
            length,
            kind: HolonomyKind::Stable,
            t,
            tol,
        },
    )
}

pub fn unstable_holonomy(system: &SkewSystem, from: TorusPoint2, length: f64, t: f64, tol: f64) -> Result<Holonomy> {
    holonomy(
        system,
        &HolonomyRequest {
            from,
            length,
            kind: HolonomyKind::Unstable,
            t,
            tol,
        },
    )
}

/// Four-leg su-loop: `+a·e_s`, `+b·e_u`, `−a·e_s`, `−b·e_u` from `base`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopSpec {
    pub a: f64,
    pub b: f64,
    pub base: TorusPoint2,
}

impl LoopSpec {
    pub fn at_p(a: f64, b: f64) -> Self {
        LoopSpec {
            a,
            b,
            base: TorusPoint2::ORIGIN,
        }
    }

    fn legs(&self, inverse: bool) -> [(HolonomyKind, f64); 4] {
        use HolonomyKind::*;
        if inverse {
            [(Unstable, self.b), (Stable, self.a), (Unstable, -self.b), (Stable, -self.a)]
        } else {
            [(Stable, self.a), (Unstable, self.b), (Stable, -self.a), (Unstable, -self.b)]
        }
    }
}

/// `ordered pairs (a, b), a ≠ b`, from `{0.15, 0.3, 0.45}`.
pub fn default_loops() -> Vec<LoopSpec> {
    let v = [0.15, 0.3, 0.45];
    let mut out = Vec::new();
    for &a in &v {
        for &b in &v {
            if a != b {
                out.push(LoopSpec::at_p(a, b));
            }
        }
    }
    out
}

/// Holonomy around the loop (or its reverse), with accumulated error bound.
pub fn loop_holonomy(system: &SkewSystem, spec: &LoopSpec, t: f64, tol: f64, inverse: bool) -> Result<Holonomy> {
    let mut x = spec.base;
    let mut value = t;
    let mut error_bound = 0.0;
    let mut depth = 0;
    for (kind, length) in spec.legs(inverse) {
        let req = HolonomyRequest {
            from: x,
            length,
            kind,
            t: value,
            tol,
        };
        let h = holonomy(system, &req)?;
        // Sum of leg truncation bounds; amplification of an earlier error by
        // the later (near-identity) legs is not included.
        value = h.value;
        error_bound += h.error_bound;
        depth = depth.max(h.depth);
        x = req.to(system);
    }
    Ok(Holonomy {
        value,
        error_bound,
        depth,
    })
}

/// Fiber dynamics over `p` used by the search: `G_p^m = φ^m`, computed in
/// closed form as the θ-flow for time `m·r`.
fn fiber_power(system: &SkewSystem, t: f64, m: i64) -> f64 {
    flow_theta(t, m as f64 * system.params().r).value
}

/// Options for [`accessibility_explore`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExploreOptions {
    pub loops: Vec<LoopSpec>,
    pub t0: f64,
    pub n_c: usize,
    pub max_word_length: usize,
    pub tol: f64,
    /// Fiber dynamics generators `G_p^{±2^j}` for `j < fiber_powers`.
    pub fiber_powers: usize,
    /// Reached points are deduplicated in bins of `2 / (n_c · bin_factor)`.
    pub bin_factor: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            loops: default_loops(),
            t0: 0.0,
            n_c: 200,
            max_word_length: 40,
            tol: 1e-10,
            fiber_powers: 12,
            bin_factor: 1024,
        }
    }
}

/// Outcome of the density search on the fiber over `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessReport {
    pub loops: Vec<LoopSpec>,
    pub t0: f64,
    pub n_c: usize,
    /// Word length at which each arc was first reached.
    pub first_word_length: Vec<Option<usize>>,
    pub word_length_reached: usize,
    pub points_explored: usize,
    pub max_error_bound: f64,
    pub density_scale: f64,
    /// Some reached point lies on a different side of `t = 0, ±1` than `t0`.
    pub crossed_invariant_circles: bool,
}

impl AccessReport {
    pub fn visited(&self) -> Vec<bool> {
        self.first_word_length.iter().map(Option::is_some).collect()
    }

    pub fn visited_count(&self) -> usize {
        self.first_word_length.iter().filter(|v| v.is_some()).count()
    }

    pub fn all_visited(&self) -> bool {
        self.visited_count() == self.n_c
    }

    /// `arcIndex visited firstWordLength` per line (`-` when unvisited).
    pub fn export(&self) -> String {
        let mut s = String::new();
        for (k, w) in self.first_word_length.iter().enumerate() {
            match w {
                Some(w) => {
                    let _ = writeln!(s, "{k} 1 {w}");
                }
                None => {
                    let _ = writeln!(s, "{k} 0 -");
                }
            }
        }
        s
    }
}

fn arc_index(t: f64, n_c: usize) -> usize {
    let t = CirclePoint::new(t).t();
    (((t + 1.0) / 2.0 * n_c as f64).floor() as usize).min(n_c - 1)
}

/// Breadth-first search of the fiber over `p` under su-loop holonomies and
/// the fiber dynamics, stopping once every arc has been reached.
pub fn accessibility_explore(system: &SkewSystem, opts: &ExploreOptions) -> Result<(AccessReport, Certificate)> {
    if opts.n_c == 0 {
        return Err(Error::InvalidParams("n_c must be positive".into()));
    }
    let n_c = opts.n_c;
    let bins = (n_c * opts.bin_factor.max(1)) as f64;
    let bin = |t: f64| ((CirclePoint::new(t).t() + 1.0) / 2.0 * bins).floor() as i64;

    let mut first = vec![None; n_c];
    let mut seen: HashSet<i64> = HashSet::new();
    let start = CirclePoint::new(opts.t0).t();
    seen.insert(bin(start));
    first[arc_index(start, n_c)] = Some(0);
    let mut frontier = VecDeque::from([start]);
    let mut explored = 1;
    let mut max_err: f64 = 0.0;
    let mut depth = 0;
    let start_side = side(start);
    let mut crossed = false;

    while depth < opts.max_word_length && !frontier.is_empty() && first.iter().any(Option::is_none) {
        depth += 1;
        let layer: Vec<f64> = frontier.drain(..).collect();
        let children: Vec<Result<Vec<(f64, f64)>>> = layer
            .par_iter()
            .map(|&t| {
                let mut out = Vec::new();
                for spec in &opts.loops {
                    for inverse in [false, true] {
                        let h = loop_holonomy(system, spec, t, opts.tol, inverse)?;
                        out.push((h.value, h.error_bound));
                    }
                }
                for j in 0..opts.fiber_powers {
                    let m = 1i64 << j;
                    out.push((fiber_power(system, t, m), 0.0));
                    out.push((fiber_power(system, t, -m), 0.0));
                }
                Ok(out)
            })
            .collect();
        for c in children {
            for (t, err) in c? {
                max_err = max_err.max(err);
                let t = CirclePoint::new(t).t();
                crossed |= side(t) != start_side;
                if seen.insert(bin(t)) {
                    explored += 1;
                    let k = arc_index(t, n_c);
                    first[k].get_or_insert(depth);
                    frontier.push_back(t);
                }
            }
        }
    }

    let report = AccessReport {
        loops: opts.loops.clone(),
        t0: opts.t0,
        n_c,
        first_word_length: first,
        word_length_reached: depth,
        points_explored: explored,
        max_error_bound: max_err,
        density_scale: 2.0 / n_c as f64,
        crossed_invariant_circles: crossed,
    };
    let mut cert = Certificate::new("access.density");
    cert.param("n_c", n_c as f64)
        .param("t0", opts.t0)
        .param("loops", opts.loops.len() as f64)
        .param("max_word_length", opts.max_word_length as f64)
        .param("tol", opts.tol);
    cert.value("visited_arcs", report.visited_count() as f64)
        .value("word_length_reached", depth as f64)
        .value("points_explored", explored as f64)
        .value("max_error_bound", max_err)
        .value("density_scale", report.density_scale)
        .value("crossed_invariant_circles", crossed as u8 as f64);
    cert.check("all_arcs_visited", report.all_visited());
    cert.slack("error_below_bin_width", 2.0 / bins - max_err);
    cert.grid(format!(
        "{n_c} fiber arcs over p; reached points deduplicated in {bins} bins"
    ));
    cert.note("accessibility at scale 2/n_c over the fiber through p; a failed search does not prove non-accessibility");
    if !report.all_visited() {
        let missing: Vec<String> = report
            .first_word_length
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_none())
            .map(|(k, _)| k.to_string())
            .take(20)
            .collect();
        cert.note(format!("unvisited arcs (first 20): {}", missing.join(" ")));
    }
    Ok((report, cert))
}

/// Which piece of the fiber circle `t` lies on, with the invariant circles
/// `t = 0` and `t = ±1` as pieces of their own.
fn side(t: f64) -> i8 {
    let t = CirclePoint::new(t).t();
    if t == 0.0 {
        0
    } else if t == -1.0 {
        2
    } else if t > 0.0 {
        1
    } else {
        -1
    }
}

/// Fiber ranges of the strong leaves through `P₀`.
pub fn us_leaf_obstruction_scan(system: &SkewSystem, arclength: f64, tol: f64) -> Result<String> {
    let p = system.params();
    let wu = grow_unstable_leaf(system, 0.0, arclength, tol)?;
    let ws = grow_stable_leaf(system, 0.0, arclength, tol)?;
    let (ulo, uhi) = wu.fiber_range(0.0);
    let (slo, shi) = ws.fiber_range(0.0);
    let u_ok = ulo > -p.delta + p.tau && uhi <= 0.0;
    let s_ok = slo >= 0.0 && shi < 1.0 - p.delta;
    let degenerate = ulo == 0.0 && uhi == 0.0 && slo == 0.0 && shi == 0.0;
    let mut s = String::new();
    let _ = writeln!(s, "[report us_leaf_scan]");
    let _ = writeln!(s, "arclength = {arclength}");
    let _ = writeln!(s, "unstable.samples = {}", wu.len());
    let _ = writeln!(s, "unstable.fiber_range = [{ulo:.12e}, {uhi:.12e}]");
    let _ = writeln!(s, "unstable.within_band = {u_ok}");
    let _ = writeln!(s, "stable.samples = {}", ws.len());
    let _ = writeln!(s, "stable.fiber_range = [{slo:.12e}, {shi:.12e}]");
    let _ = writeln!(s, "stable.within_band = {s_ok}");
    let _ = writeln!(s, "ranges_meet_only_at_zero = {}", uhi <= 0.0 && slo >= 0.0);
    if degenerate {
        let _ = writeln!(s, "compact_us_leaf = T^2 x {{0}} (both leaves stay on the invariant torus)");
    } else {
        let _ = writeln!(s, "compact_us_leaf = none through P0 (no strong homoclinic intersection)");
    }
    Ok(s)
}
