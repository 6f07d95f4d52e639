//! Trapping arcs, attractor enclosures, strong leaves through the fixed
//! points, and the certificates showing `f` is not transitive.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::Certificate;
use crate::chainrec::{square_endpoint_bounds, BasePattern};
use crate::error::{Error, Result};
use crate::fiber::Arc;
use crate::system::{Point3, SkewSystem};
use crate::torus::TorusPoint2;

/// A fiber arc `J` with its verified endpoint inequalities.
#[derive(Clone, Debug)]
pub struct TrapArc {
    pub arc: Arc,
    /// `min_x G_x(lo) − lo`, padded; must be positive.
    pub lower_margin: f64,
    /// `hi − max_x G_x(hi)`, padded; must be non-negative.
    pub upper_margin: f64,
    pub grid_spec: String,
    pub certificate: Certificate,
}

impl TrapArc {
    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

fn base_grid(n: usize) -> impl IndexedParallelIterator<Item = TorusPoint2> {
    let h = 1.0 / n as f64;
    (0..n * n)
        .into_par_iter()
        .map(move |idx| TorusPoint2::new((idx / n) as f64 * h, (idx % n) as f64 * h))
}

/// Lipschitz padding for off-grid base points at fiber coordinate `t`.
fn grid_pad(system: &SkewSystem, n: usize, t: f64) -> f64 {
    if system.psi_active(system.phi(t).value) {
        system.x_sensitivity() * std::f64::consts::FRAC_1_SQRT_2 / n as f64
    } else {
        0.0
    }
}

/// Checks `G_x(J) ⊆ J` for all `x` via the two endpoint inequalities.
///
/// An upper endpoint on one of the invariant circles `t ∈ Z` needs no grid:
/// φ fixes it and ψ only moves it down, so `G_x(hi) ≤ hi` for every `x`.
pub fn trap_certificate(system: &SkewSystem, arc: Arc, grid_n: usize) -> TrapArc {
    let n = grid_n.max(1);
    let (lo, hi) = arc.lift();
    let name = format!("trap[{:.6},{:.6}]", arc.lo().t(), crate::fiber::CirclePoint::new(hi).t());
    let mut cert = Certificate::new(name);
    cert.param("lo", lo).param("hi", hi).param("grid_n", n as f64);
    let grid_spec = format!("{n}x{n} base grid; endpoint values padded by x-sensitivity where psi acts");

    if arc.is_full() {
        cert.note("full circle: invariant without computation");
        cert.grid("none");
        return TrapArc {
            arc,
            lower_margin: 0.0,
            upper_margin: 0.0,
            grid_spec: "none".into(),
            certificate: cert,
        };
    }

    let g_lo = base_grid(n)
        .map(|x| system.fiber_map(x).eval(lo))
        .reduce(|| f64::INFINITY, f64::min);
    let lower = g_lo - lo - grid_pad(system, n, lo);

    let hi_on_circle = hi == hi.round();
    let g_hi = base_grid(n)
        .map(|x| system.fiber_map(x).eval(hi))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let upper = if hi_on_circle {
        hi - g_hi
    } else {
        hi - g_hi - grid_pad(system, n, hi)
    };

    cert.margin("lower_endpoint", lower);
    cert.slack("upper_endpoint", upper);
    cert.check("upper_on_invariant_circle", hi_on_circle || upper > 0.0);
    cert.value("min_image_of_lo", g_lo).value("max_image_of_hi", g_hi);
    cert.grid(grid_spec.clone());
    TrapArc {
        arc,
        lower_margin: lower,
        upper_margin: upper,
        grid_spec,
        certificate: cert,
    }
}

/// The default arcs `R₀ = [−δ, 0]`, `R₁ = [1−δ, 1]` and `J* = [1−δ, 0]`.
pub fn default_trap_arcs(delta: f64) -> [Arc; 3] {
    [
        Arc::new(-delta, 0.0),
        Arc::new(1.0 - delta, 1.0),
        Arc::new(1.0 - delta, 0.0),
    ]
}

/// Per-base-square fiber bounds (lifts of the seed arc) of the maximal
/// invariant set inside `T² × J`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttractorEnclosure {
    pub seed: Arc,
    pub n_b: usize,
    pub bounds: Vec<(f64, f64)>,
    pub iterations: usize,
    /// Mean fiber width after each iteration, starting with the seed.
    pub mean_width: Vec<f64>,
}

impl AttractorEnclosure {
    /// Hull of all bounds, as a lift pair.
    pub fn hull(&self) -> (f64, f64) {
        self.bounds
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |h, b| (h.0.min(b.0), h.1.max(b.1)))
    }

    /// Every base square carries a nonempty fiber bound.
    pub fn full_base_support(&self) -> bool {
        self.bounds.iter().all(|b| b.0 <= b.1)
    }

    pub fn hull_arc(&self) -> Arc {
        let (lo, hi) = self.hull();
        if hi - lo >= 2.0 {
            Arc::full()
        } else if hi == lo {
            // Degenerate band; widen by one ulp so the arc is not read as full.
            Arc::new(lo, lo + f64::EPSILON)
        } else {
            Arc::new(lo, hi)
        }
    }
}

/// Iterates the box-level image of `T² × J` and intersects fiberwise.
pub fn attractor_enclosure(system: &SkewSystem, seed: Arc, n_b: usize, iterations: usize) -> AttractorEnclosure {
    let (s_lo, s_hi) = seed.lift();
    let cells = n_b * n_b;
    let mut bounds = vec![(s_lo, s_hi); cells];
    let pattern = BasePattern::new(system.matrix().entries(), n_b, 0.0);
    let m = system.matrix().entries();
    let mean = |b: &[(f64, f64)]| b.iter().map(|x| (x.1 - x.0).max(0.0)).sum::<f64>() / b.len() as f64;
    let mut widths = vec![mean(&bounds)];
    let mut done = 0;
    for _ in 0..iterations {
        let images: Vec<(f64, f64)> = (0..cells)
            .into_par_iter()
            .map(|sq| {
                let (lo, hi) = bounds[sq];
                if lo > hi {
                    return (f64::INFINITY, f64::NEG_INFINITY);
                }
                let e = square_endpoint_bounds(system, n_b, sq / n_b, sq % n_b, &[lo, hi]);
                (e[0].0, e[1].1)
            })
            .collect();
        let mut next = vec![(f64::INFINITY, f64::NEG_INFINITY); cells];
        for (sq, img) in images.iter().enumerate() {
            for (ti, tj, _) in pattern.cells(m, n_b, sq / n_b, sq % n_b) {
                let t = &mut next[ti * n_b + tj];
                t.0 = t.0.min(img.0);
                t.1 = t.1.max(img.1);
            }
        }
        let mut changed = false;
        for (b, n) in bounds.iter_mut().zip(&next) {
            let new = (b.0.max(n.0), b.1.min(n.1));
            changed |= new != *b;
            *b = new;
        }
        done += 1;
        widths.push(mean(&bounds));
        if !changed {
            break;
        }
    }
    AttractorEnclosure {
        seed,
        n_b,
        bounds,
        iterations: done,
        mean_width: widths,
    }
}

/// A sampled strong leaf through a fixed point `P_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafPolyline {
    /// Signed arclength along the base line through `p`.
    pub s: Vec<f64>,
    pub points: Vec<Point3>,
    pub tol: f64,
}

impl LeafPolyline {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Fiber coordinates as lifts near `i`.
    pub fn fiber_range(&self, i: f64) -> (f64, f64) {
        self.points
            .iter()
            .map(|p| i + crate::fiber::CirclePoint::new(p.t.t() - i).t())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |r, t| (r.0.min(t), r.1.max(t)))
    }

    /// `s u v t` per line, 17 significant digits.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (s, p) in self.s.iter().zip(&self.points) {
            let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e}", s, p.base.u(), p.base.v(), p.t.t());
        }
        out
    }
}

/// Which strong leaf to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeafKind {
    Unstable,
    Stable,
}

/// Default cap on leaf samples.
pub const LEAF_SAMPLE_BUDGET: usize = 4_000_000;

/// The point at signed arclength `s` on the strong leaf through `(p, i)`.
///
/// Over the central chart box `f = A × φ`, so the local leaf is the straight
/// segment `{p + s·e} × {i}` for `|s| ≤ c_u`. The global leaf is the image of
/// that segment under `f^n` (unstable) or `f^{−n}` (stable).
pub fn leaf_point(system: &SkewSystem, kind: LeafKind, i: f64, s: f64) -> Point3 {
    let e = system.matrix().eigen();
    let lambda = system.matrix().lambda().abs();
    let c = system.chart().scale();
    let mut n = 0;
    let mut local = s;
    while local.abs() > c {
        local *= lambda;
        n += 1;
    }
    let p = system.chart().center();
    let dir = match kind {
        LeafKind::Unstable => e.e_u,
        LeafKind::Stable => e.e_s,
    };
    let mut z = Point3::new(p.translate([local * dir[0], local * dir[1]]), i);
    for _ in 0..n {
        z = match kind {
            LeafKind::Unstable => system.apply(z),
            LeafKind::Stable => system.inverse(z),
        };
    }
    z
}

/// Samples the strong leaf on `[−max_arclength, max_arclength]`, bisecting
/// wherever consecutive fiber coordinates differ by more than `tol`.
pub fn grow_leaf(
    system: &SkewSystem,
    kind: LeafKind,
    i: f64,
    max_arclength: f64,
    tol: f64,
    budget: usize,
) -> Result<LeafPolyline> {
    let initial = ((2.0 * max_arclength / 0.01).ceil() as usize).max(2);
    let mut s: Vec<f64> = (0..=initial)
        .map(|k| -max_arclength + 2.0 * max_arclength * k as f64 / initial as f64)
        .collect();
    let mut pts: Vec<Point3> = s.par_iter().map(|&x| leaf_point(system, kind, i, x)).collect();
    let min_gap = 2.0 * max_arclength * f64::EPSILON * 16.0;
    loop {
        let split: Vec<usize> = (0..s.len() - 1)
            .filter(|&k| pts[k].t.distance(&pts[k + 1].t) > tol && s[k + 1] - s[k] > min_gap)
            .collect();
        if split.is_empty() {
            break;
        }
        if s.len() + split.len() > budget {
            return Err(Error::RefinementBudget(budget));
        }
        let mids: Vec<(f64, Point3)> = split
            .par_iter()
            .map(|&k| {
                let m = 0.5 * (s[k] + s[k + 1]);
                (m, leaf_point(system, kind, i, m))
            })
            .collect();
        let mut ns = Vec::with_capacity(s.len() + mids.len());
        let mut np = Vec::with_capacity(s.len() + mids.len());
        let mut it = split.iter().zip(mids).peekable();
        for k in 0..s.len() {
            ns.push(s[k]);
            np.push(pts[k]);
            if let Some((_, (m, p))) = it.next_if(|(&sk, _)| sk == k) {
                ns.push(m);
                np.push(p);
            }
        }
        s = ns;
        pts = np;
    }
    Ok(LeafPolyline { s, points: pts, tol })
}

pub fn grow_unstable_leaf(system: &SkewSystem, i: f64, max_arclength: f64, tol: f64) -> Result<LeafPolyline> {
    grow_leaf(system, LeafKind::Unstable, i, max_arclength, tol, LEAF_SAMPLE_BUDGET)
}

pub fn grow_stable_leaf(system: &SkewSystem, i: f64, max_arclength: f64, tol: f64) -> Result<LeafPolyline> {
    grow_leaf(system, LeafKind::Stable, i, max_arclength, tol, LEAF_SAMPLE_BUDGET)
}

/// Options for [`non_transitivity_cert`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonTransitivityOptions {
    pub grid_n: usize,
    pub samples: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for NonTransitivityOptions {
    fn default() -> Self {
        NonTransitivityOptions {
            grid_n: 200,
            samples: 10_000,
            iterations: 200,
            seed: 0,
        }
    }
}

/// Certifies `f^n(T²×U) ∩ (T²×V) = ∅` for all `n > 0`.
///
/// Part A: `U ⊂ J* = [1−δ, 0]`, `J*` traps, and `V` misses `J*`. Part B:
/// direct iteration of sample points.
pub fn non_transitivity_cert(
    system: &SkewSystem,
    u: (f64, f64),
    v: (f64, f64),
    opts: NonTransitivityOptions,
) -> Result<Certificate> {
    let delta = system.params().delta;
    if !(-1.0 <= u.0 && u.0 < u.1 && u.1 <= -delta) {
        return Err(Error::Precondition(format!(
            "U fiber interval ({}, {}) must lie in (-1, -delta)",
            u.0, u.1
        )));
    }
    if !(0.0 <= v.0 && v.0 < v.1 && v.1 <= 1.0 - delta) {
        return Err(Error::Precondition(format!(
            "V fiber interval ({}, {}) must lie in (0, 1 - delta)",
            v.0, v.1
        )));
    }
    let j_star = Arc::new(1.0 - delta, 0.0);
    let trap = trap_certificate(system, j_star, opts.grid_n);
    let u_inside = j_star.contains(u.0) && j_star.contains(u.1) && j_star.contains(0.5 * (u.0 + u.1));
    // V is open, so it may touch J* at an endpoint.
    let (a_lo, a_hi) = (j_star.lo().t(), crate::fiber::CirclePoint::new(j_star.lift().1).t());
    let v_clear = !j_star.contains(0.5 * (v.0 + v.1))
        && ![a_lo, a_hi].iter().any(|&e| v.0 < e && e < v.1);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Point3> = (0..opts.samples)
        .map(|_| {
            let t = u.0 + (u.1 - u.0) * rng.gen_range(0.0..1.0);
            Point3::new(TorusPoint2::new(rng.gen(), rng.gen()), t)
        })
        .collect();
    let hits: usize = starts
        .par_iter()
        .map(|z0| {
            let mut z = *z0;
            let mut hits = 0;
            for _ in 0..opts.iterations {
                z = system.apply(z);
                let t = z.t.t();
                if t > v.0 && t < v.1 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    let tau = system.params().tau;
    let mut cert = Certificate::new("nontransitive");
    cert.param("u_lo", u.0)
        .param("u_hi", u.1)
        .param("v_lo", v.0)
        .param("v_hi", v.1)
        .param("samples", opts.samples as f64)
        .param("iterations", opts.iterations as f64);
    cert.check("a.u_inside_trap", u_inside)
        .check("a.v_disjoint_from_trap", v_clear)
        .check("a.trap_passes", trap.passed())
        .check("b.no_hits", hits == 0);
    cert.margin("a.trap_lower_endpoint", trap.lower_margin)
        .margin("a.trap_margin_over_half_tau", trap.lower_margin - 0.5 * tau)
        .slack("a.trap_upper_endpoint", trap.upper_margin);
    cert.value("b.hits", hits as f64);
    cert.grid(format!(
        "part A: {}; part B: {} points x {} iterates",
        trap.grid_spec, opts.samples, opts.iterations
    ));
    cert.note("f^n(T^2 x U) stays in T^2 x J* for all n >= 0, and J* misses V");
    Ok(cert)
}

/// Lower bound of `G_x(t) − t` over the base grid and `t ∈ [a, b]`.
///
/// Between fiber samples `t_j ≤ t ≤ t_{j+1}` monotonicity gives
/// `G_x(t) − t ≥ G_x(t_j) − t_{j+1}`.
pub fn min_displacement(system: &SkewSystem, a: f64, b: f64, grid_n: usize, n_t: usize) -> f64 {
    let n_t = n_t.max(1);
    let ts: Vec<f64> = (0..=n_t).map(|j| a + (b - a) * j as f64 / n_t as f64).collect();
    let pad = ts.iter().map(|&t| grid_pad(system, grid_n, t)).fold(0.0, f64::max);
    let min = base_grid(grid_n.max(1))
        .map(|x| {
            let fm = system.fiber_map(x);
            (0..n_t).map(|j| fm.eval(ts[j]) - ts[j + 1]).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    min - pad
}

/// Certifies that `W = T² × (a, b)` is wandering.
pub fn wandering_cert(system: &SkewSystem, a: f64, b: f64, grid_n: usize) -> Result<Certificate> {
    let p = system.params();
    if !(p.tau < a && a < b && b < 1.0 - p.delta) {
        return Err(Error::Precondition(format!(
            "band [{a}, {b}] must lie in (tau, 1 - delta) = ({}, {})",
            p.tau,
            1.0 - p.delta
        )));
    }
    let m = min_displacement(system, a, b, grid_n, 64);
    let trap = trap_certificate(system, Arc::new(1.0 - p.delta, 0.0), grid_n);
    let mut cert = Certificate::new("wandering");
    cert.param("a", a).param("b", b).param("grid_n", grid_n as f64);
    cert.value("min_displacement", m);
    cert.margin("displacement_positive", m)
        .margin("one_step_escape", m - (b - a));
    cert.check("trap_j_star", trap.passed());
    cert.grid(format!("{grid_n}x{grid_n} base grid x 65 fiber samples"));
    cert.note("points of W leave W in one step, rise monotonically into T^2 x J*, and never return");
    Ok(cert)
}

/// Informational comparison of the two attractor enclosures.
pub fn minimal_u_saturated_report(system: &SkewSystem, n_b: usize, iterations: usize) -> String {
    let delta = system.params().delta;
    let [r0, r1, _] = default_trap_arcs(delta);
    let e0 = attractor_enclosure(system, r0, n_b, iterations);
    let e1 = attractor_enclosure(system, r1, n_b, iterations);
    let disjoint = !e0.hull_arc().intersects(&e1.hull_arc());
    let mut s = String::new();
    let _ = writeln!(s, "[report u_saturated]");
    for (name, e) in [("lambda0", &e0), ("lambda1", &e1)] {
        let (lo, hi) = e.hull();
        let _ = writeln!(s, "{name}.fiber_hull = [{lo:.12}, {hi:.12}]");
        let _ = writeln!(s, "{name}.iterations = {}", e.iterations);
        let _ = writeln!(s, "{name}.full_base_support = {}", e.full_base_support());
    }
    let _ = writeln!(s, "disjoint = {disjoint}");
    if !system.is_perturbed() {
        let n = n_b.max(1);
        for i in [0.0, 1.0] {
            let invariant = (0..n * n).all(|idx| {
                let x = TorusPoint2::new((idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64);
                system.fiber_map(x).eval(i) == i
            });
            let _ = writeln!(s, "invariant_torus.t{} = {invariant}", i as i32);
        }
    }
    let _ = writeln!(
        s,
        "criterion = two disjoint compact invariant u-saturated sets with orientation-preserving fiber maps rule out transitivity"
    );
    let _ = writeln!(s, "minimal_u_saturated_sets_at_least = {}", if disjoint { 2 } else { 1 });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{derive_params, BaseConfig, Params};

    fn default_system() -> SkewSystem {
        SkewSystem::new(derive_params(BaseConfig::default()).params).unwrap()
    }

    #[test]
    fn default_arcs_trap() {
        let sys = default_system();
        let d = sys.params();
        for arc in default_trap_arcs(d.delta) {
            let t = trap_certificate(&sys, arc, 64);
            assert!(t.passed(), "{}", t.certificate.to_text());
            assert!(t.lower_margin > d.tau / 2.0);
            assert_eq!(t.upper_margin, 0.0);
        }
        let full = trap_certificate(&sys, Arc::full(), 64);
        assert!(full.passed());
        let bad = trap_certificate(&sys, Arc::new(d.tau, 1.0 - d.delta), 64);
        assert!(!bad.passed());
    }

    #[test]
    fn trapping_is_sound_on_random_points() {
        let sys = default_system();
        let delta = sys.params().delta;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for arc in default_trap_arcs(delta) {
            let (lo, hi) = arc.lift();
            for _ in 0..20_000 {
                let z = Point3::new(TorusPoint2::new(rng.gen(), rng.gen()), rng.gen_range(lo..=hi));
                assert!(arc.contains(sys.apply(z).t.t()));
            }
        }
    }

    #[test]
    fn enclosures_nest_and_separate() {
        let sys = default_system();
        let p = sys.params().clone();
        let [r0, r1, _] = default_trap_arcs(p.delta);
        let zero = attractor_enclosure(&sys, r0, 16, 0);
        assert!(zero.bounds.iter().all(|b| *b == (-p.delta, 0.0)));
        let mut prev = zero.bounds.clone();
        for it in 1..=6 {
            let e = attractor_enclosure(&sys, r0, 16, it);
            for (a, b) in e.bounds.iter().zip(&prev) {
                assert!(a.0 >= b.0 && a.1 <= b.1);
            }
            prev = e.bounds;
        }
        let e0 = attractor_enclosure(&sys, r0, 32, 20);
        let e1 = attractor_enclosure(&sys, r1, 32, 20);
        assert!(e0.full_base_support() && e1.full_base_support());
        let (lo, hi) = e0.hull();
        assert!(lo > -p.delta + p.tau - 1e-3 && hi <= 0.0, "{lo} {hi}");
        let (lo1, hi1) = e1.hull();
        assert!(lo1 >= 1.0 - p.delta && hi1 <= 1.0);
        assert!(!e0.hull_arc().intersects(&e1.hull_arc()));
    }

    #[test]
    fn leaf_points_are_consistent() {
        let sys = default_system();
        let lam_u = sys.matrix().expansion();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = rng.gen_range(-10.0..10.0);
            let z = leaf_point(&sys, LeafKind::Unstable, 0.0, s);
            let w = leaf_point(&sys, LeafKind::Unstable, 0.0, s * lam_u);
            let fz = sys.apply(z);
            assert!(fz.base.distance(&w.base) < 1e-12);
            assert!(fz.t.distance(&w.t) < 1e-12);
        }
        let z = leaf_point(&sys, LeafKind::Unstable, 0.0, 0.004);
        assert_eq!(z.t.t(), 0.0);
    }

    #[test]
    fn unstable_leaf_ranges() {
        let sys = default_system();
        let p = sys.params().clone();
        let leaf = grow_unstable_leaf(&sys, 0.0, 5.0, 1e-4).unwrap();
        let (lo, hi) = leaf.fiber_range(0.0);
        assert!(lo > -p.delta + p.tau && hi <= 0.0, "{lo} {hi}");
        assert!(lo < -1e-6);
        for (s, z) in leaf.s.iter().zip(&leaf.points) {
            if s.abs() <= p.chart_scale {
                assert_eq!(z.t.t(), 0.0);
            }
        }
        let flat = SkewSystem::new(p.unperturbed()).unwrap();
        let leaf = grow_unstable_leaf(&flat, 0.0, 5.0, 1e-4).unwrap();
        assert_eq!(leaf.fiber_range(0.0), (0.0, 0.0));
        let stable = grow_stable_leaf(&sys, 0.0, 5.0, 1e-4).unwrap();
        let (lo, hi) = stable.fiber_range(0.0);
        assert!(lo >= 0.0 && hi < 1.0 - p.delta && hi > 1e-6, "{lo} {hi}");
    }

    #[test]
    fn refinement_budget_is_enforced() {
        let sys = default_system();
        assert!(matches!(
            grow_leaf(&sys, LeafKind::Unstable, 0.0, 5.0, 1e-9, 2000),
            Err(Error::RefinementBudget(2000))
        ));
    }

    #[test]
    fn leaf_export_format() {
        let sys = default_system();
        let leaf = grow_unstable_leaf(&sys, 0.0, 0.01, 1.0).unwrap();
        let line = leaf.export().lines().next().unwrap().to_string();
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0].parse::<f64>().unwrap(), -0.01);
    }

    #[test]
    fn non_transitivity() {
        let sys = default_system();
        let opts = NonTransitivityOptions {
            grid_n: 64,
            samples: 500,
            iterations: 50,
            seed: 1,
        };
        let c = non_transitivity_cert(&sys, (-0.5, -0.2), (0.3, 0.5), opts).unwrap();
        assert!(c.passed(), "{}", c.to_text());
        assert!(matches!(
            non_transitivity_cert(&sys, (-0.5, -0.2), (0.95, 1.0), opts),
            Err(Error::Precondition(_))
        ));
        let flat = SkewSystem::new(sys.params().unperturbed()).unwrap();
        assert!(non_transitivity_cert(&flat, (-0.5, -0.2), (0.3, 0.5), opts).unwrap().passed());
    }

    #[test]
    fn wandering_band() {
        let sys = default_system();
        let m = min_displacement(&sys, 0.4, 0.41, 32, 64);
        assert!((m - 0.0965).abs() < 2e-3, "{m}");
        assert!(wandering_cert(&sys, 0.4, 0.4 + m / 2.0, 32).unwrap().passed());
        assert!(!wandering_cert(&sys, 0.4, 0.6, 32).unwrap().passed());
        assert!(wandering_cert(&sys, 0.0, 0.1, 32).is_err());
    }

    #[test]
    fn report_lists_tori_without_perturbation() {
        let id = SkewSystem::new(Params::explicit(
            BaseConfig {
                r: 0.0,
                rho: 0.0,
                ..Default::default()
            },
            0.0,
        ))
        .unwrap();
        let r = minimal_u_saturated_report(&id, 8, 3);
        assert!(r.contains("invariant_torus.t0 = true"));
        assert!(r.contains("invariant_torus.t1 = true"));
        assert_eq!(r, minimal_u_saturated_report(&id, 8, 3));
        let sys = default_system();
        let r = minimal_u_saturated_report(&sys, 16, 10);
        assert!(r.contains("disjoint = true"), "{r}");
    }
}
