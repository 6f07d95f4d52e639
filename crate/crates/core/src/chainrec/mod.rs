//! Box partitions of T³, outer-approximation transition graphs and
//! chain transitivity at a fixed scale.
//!
//! An edge `b → b'` is present whenever the ε-neighbourhood (Euclidean product
//! metric on T² × R/2Z) of an enclosure of `f(b)` meets `b'`. The base part of
//! the enclosure is the exact parallelogram `A(square)`; the fiber part uses
//! monotonicity of `G_x` in `t` plus Lipschitz padding in `x`. Enclosures are
//! closed and boxes half-open, so touching counts as meeting.

mod scc;

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use scc::{scc, Csr, SccResult};

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::system::{Point3, SkewSystem};
use crate::torus::TorusPoint2;

/// Default cap on partition size.
pub const NODE_BUDGET: usize = 1 << 24;

/// Absorbs rounding in corner evaluations and distance comparisons.
const GUARD: f64 = 1e-12;

/// Uniform partition: base squares of side `1/n_b`, fiber arcs of length `2/n_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxPartition {
    pub n_b: usize,
    pub n_c: usize,
}

impl BoxPartition {
    pub fn new(n_b: usize, n_c: usize) -> Result<Self> {
        Self::with_budget(n_b, n_c, NODE_BUDGET)
    }

    pub fn with_budget(n_b: usize, n_c: usize, budget: usize) -> Result<Self> {
        if n_b == 0 || n_c == 0 {
            return Err(Error::InvalidParams("partition sizes must be positive".into()));
        }
        let nodes = n_b.saturating_mul(n_b).saturating_mul(n_c);
        if nodes > budget || nodes > u32::MAX as usize {
            return Err(Error::NodeBudget { nodes, budget });
        }
        Ok(BoxPartition { n_b, n_c })
    }

    pub fn node_count(&self) -> usize {
        self.n_b * self.n_b * self.n_c
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_b + j) * self.n_c + k
    }

    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.n_c;
        let b = idx / self.n_c;
        (b / self.n_b, b % self.n_b, k)
    }

    pub fn base_side(&self) -> f64 {
        1.0 / self.n_b as f64
    }

    pub fn arc_len(&self) -> f64 {
        2.0 / self.n_c as f64
    }

    pub fn diameter(&self) -> f64 {
        let h = self.base_side();
        (2.0 * h * h + self.arc_len().powi(2)).sqrt()
    }

    pub fn arc_start(&self, k: usize) -> f64 {
        -1.0 + 2.0 * k as f64 / self.n_c as f64
    }

    /// The box containing `z`.
    pub fn box_of(&self, z: &Point3) -> usize {
        let cell = |x: f64, n: usize| ((x * n as f64).floor() as usize).min(n - 1);
        let i = cell(z.base.u(), self.n_b);
        let j = cell(z.base.v(), self.n_b);
        let k = cell((z.t.t() + 1.0) / 2.0, self.n_c);
        self.index(i, j, k)
    }

    pub fn box_center(&self, idx: usize) -> Point3 {
        let (i, j, k) = self.coords(idx);
        let h = self.base_side();
        Point3::new(
            TorusPoint2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h),
            self.arc_start(k) + 0.5 * self.arc_len(),
        )
    }
}

type V2 = [f64; 2];

fn segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - s * ab[0]).hypot(p[1] - a[1] - s * ab[1])
}

fn separated_along_edges(p: &[V2], q: &[V2]) -> bool {
    let n = p.len();
    (0..n).any(|e| {
        let (a, b) = (p[e], p[(e + 1) % n]);
        let axis = [a[1] - b[1], b[0] - a[0]];
        let proj = |v: &V2| v[0] * axis[0] + v[1] * axis[1];
        let (pmin, pmax) = p.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |m, x| (m.0.min(x), m.1.max(x)));
        let (qmin, qmax) = q.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |m, x| (m.0.min(x), m.1.max(x)));
        pmax < qmin || qmax < pmin
    })
}

/// Euclidean distance between two closed convex polygons (0 when they meet).
fn polygon_distance(p: &[V2], q: &[V2]) -> f64 {
    if !separated_along_edges(p, q) && !separated_along_edges(q, p) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (a, b) in [(p, q), (q, p)] {
        for v in a {
            for e in 0..b.len() {
                best = best.min(segment_distance(*v, b[e], b[(e + 1) % b.len()]));
            }
        }
    }
    best
}

/// Base cells near `A(square)`, as offsets from the image of the square's
/// lower corner (an integer vertex in grid units), with their distances.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct BasePattern {
    entries: Vec<(i64, i64, f64)>,
}

impl BasePattern {
    pub(crate) fn new(m: [[i64; 2]; 2], n_b: usize, epsilon: f64) -> Self {
        let h = 1.0 / n_b as f64;
        let c1 = [m[0][0] as f64, m[1][0] as f64];
        let c2 = [m[0][1] as f64, m[1][1] as f64];
        let mut poly = vec![[0.0, 0.0], c1, [c1[0] + c2[0], c1[1] + c2[1]], c2];
        // Counter-clockwise orientation is not needed by the separating-axis test,
        // but keep vertices in boundary order.
        if c1[0] * c2[1] - c1[1] * c2[0] < 0.0 {
            poly.reverse();
        }
        let reach = (epsilon / h).ceil() as i64 + 1;
        let xs = poly.iter().map(|v| v[0]);
        let ys = poly.iter().map(|v| v[1]);
        let (x0, x1) = (xs.clone().fold(f64::INFINITY, f64::min) as i64, xs.fold(f64::NEG_INFINITY, f64::max) as i64);
        let (y0, y1) = (ys.clone().fold(f64::INFINITY, f64::min) as i64, ys.fold(f64::NEG_INFINITY, f64::max) as i64);
        let mut entries = Vec::new();
        for di in x0 - reach..=x1 + reach {
            for dj in y0 - reach..=y1 + reach {
                let (a, b) = (di as f64, dj as f64);
                let cell = [[a, b], [a + 1.0, b], [a + 1.0, b + 1.0], [a, b + 1.0]];
                let d = polygon_distance(&poly, &cell) * h;
                if d <= epsilon + GUARD {
                    entries.push((di, dj, d));
                }
            }
        }
        BasePattern { entries }
    }

    /// Base cells `(i', j')` within the pattern around `A(square (i, j))`.
    pub(crate) fn cells(&self, m: [[i64; 2]; 2], n_b: usize, i: usize, j: usize) -> Vec<(usize, usize, f64)> {
        let n = n_b as i64;
        let vi = m[0][0] * i as i64 + m[0][1] * j as i64;
        let vj = m[1][0] * i as i64 + m[1][1] * j as i64;
        self.entries
            .iter()
            .map(|&(di, dj, d)| ((vi + di).rem_euclid(n) as usize, (vj + dj).rem_euclid(n) as usize, d))
            .collect()
    }
}

/// Arc indices `k` (as lifts) whose closed arc meets `[lo, hi]`.
fn closed_arc_range(lo: f64, hi: f64, n_c: usize) -> (i64, i64) {
    let s = n_c as f64 / 2.0;
    (((lo + 1.0) * s).ceil() as i64 - 1, ((hi + 1.0) * s).floor() as i64)
}

/// Arc indices whose half-open arc meets the half-open `[lo, hi)`.
fn half_open_arc_range(lo: f64, hi: f64, n_c: usize) -> (i64, i64) {
    let s = n_c as f64 / 2.0;
    (((lo + 1.0) * s).floor() as i64, ((hi + 1.0) * s).ceil() as i64 - 1)
}

fn push_arcs(out: &mut Vec<u32>, offset: usize, (k0, k1): (i64, i64), n_c: usize) {
    if k1 < k0 {
        return;
    }
    if (k1 - k0 + 1) as usize >= n_c {
        out.extend((0..n_c).map(|k| (offset + k) as u32));
    } else {
        out.extend((k0..=k1).map(|k| (offset + k.rem_euclid(n_c as i64) as usize) as u32));
    }
}


/// `(min, max)` of `G_x(t)` over the closed base square `(i, j)` of side
/// `1/n_b`, for each `t`: corner values padded by the x-sensitivity wherever
/// ψ can vary, plus a rounding guard.
pub(crate) fn square_endpoint_bounds(system: &SkewSystem, n_b: usize, i: usize, j: usize, ts: &[f64]) -> Vec<(f64, f64)> {
    let n = n_b as f64;
    let (a, b) = (i as f64, j as f64);
    let corners = [
        TorusPoint2::new(a / n, b / n),
        TorusPoint2::new((a + 1.0) / n, b / n),
        TorusPoint2::new(a / n, (b + 1.0) / n),
        TorusPoint2::new((a + 1.0) / n, (b + 1.0) / n),
    ];
    let maps = corners.map(|c| system.fiber_map(c));
    let centre = TorusPoint2::new((a + 0.5) / n, (b + 0.5) / n);
    let image_radius = system.matrix().norm() / n * std::f64::consts::FRAC_1_SQRT_2;
    let alpha_flat = system
        .alpha()
        .constant_near(&system.matrix().apply(centre), image_radius);
    let pad = system.x_sensitivity() / n * std::f64::consts::FRAC_1_SQRT_2;
    ts.iter()
        .map(|&t| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for m in &maps {
                let g = m.eval(t);
                lo = lo.min(g);
                hi = hi.max(g);
            }
            let pad = if !alpha_flat && system.psi_active(system.phi(t).value) { pad } else { 0.0 };
            (lo - pad - GUARD, hi + pad + GUARD)
        })
        .collect()
}

struct Builder<'a> {
    system: &'a SkewSystem,
    partition: BoxPartition,
    epsilon: f64,
    pattern: BasePattern,
    pad: f64,
}

impl<'a> Builder<'a> {
    fn new(system: &'a SkewSystem, partition: BoxPartition, epsilon: f64) -> Self {
        let h = partition.base_side();
        Builder {
            system,
            partition,
            epsilon,
            pattern: BasePattern::new(system.matrix().entries(), partition.n_b, epsilon),
            pad: system.x_sensitivity() * h * std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    fn endpoint_bounds(&self, i: usize, j: usize, ks: std::ops::RangeInclusive<usize>) -> Vec<(f64, f64)> {
        let ts: Vec<f64> = ks.map(|k| self.partition.arc_start(k)).collect();
        square_endpoint_bounds(self.system, self.partition.n_b, i, j, &ts)
    }

    /// Fiber enclosure `[lo, hi]` (lifts) of the image of box `(i, j, k)`.
    fn fiber_enclosures(&self, i: usize, j: usize) -> Vec<(f64, f64)> {
        let n_c = self.partition.n_c;
        let ends = self.endpoint_bounds(i, j, 0..=n_c);
        (0..n_c).map(|k| (ends[k].0, ends[k + 1].1)).collect()
    }

    fn targets(&self, i: usize, j: usize, (lo, hi): (f64, f64)) -> Vec<u32> {
        let n_c = self.partition.n_c;
        let mut out = Vec::new();
        for (ti, tj, d) in self.pattern.cells(self.system.matrix().entries(), self.partition.n_b, i, j) {
            let slack = (self.epsilon * self.epsilon - d * d).max(0.0).sqrt() + GUARD;
            let offset = self.partition.index(ti, tj, 0);
            push_arcs(&mut out, offset, closed_arc_range(lo - slack, hi + slack, n_c), n_c);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Boxes met by the ε-fattened enclosure of `f(box)`.
pub fn box_image_enclosure(system: &SkewSystem, partition: BoxPartition, idx: usize, epsilon: f64) -> Vec<u32> {
    let b = Builder::new(system, partition, epsilon);
    let (i, j, k) = partition.coords(idx);
    let ends = b.endpoint_bounds(i, j, k..=k + 1);
    b.targets(i, j, (ends[0].0, ends[1].1))
}

/// Outer-approximation graph of `f` on a box partition.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionGraph {
    pub partition: BoxPartition,
    pub epsilon: f64,
    pub csr: Csr,
    /// Largest Lipschitz padding applied to a fiber endpoint.
    pub max_padding: f64,
}

impl TransitionGraph {
    pub fn node_count(&self) -> usize {
        self.csr.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.csr.edge_count()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        self.csr.neighbors(v)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.csr.has_edge(a, b)
    }

    /// Text dump: `boxgraph v1 n_b n_c epsilon`, then `node: neighbors`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "boxgraph v1 {} {} {:e}",
            self.partition.n_b, self.partition.n_c, self.epsilon
        )?;
        for v in 0..self.node_count() {
            write!(w, "{v}:")?;
            for t in self.neighbors(v) {
                write!(w, " {t}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn build_graph(system: &SkewSystem, partition: BoxPartition, epsilon: f64) -> Result<TransitionGraph> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let b = Builder::new(system, partition, epsilon);
    let n_b = partition.n_b;
    let chunks: Vec<(Vec<u32>, Vec<u32>)> = (0..n_b * n_b)
        .into_par_iter()
        .map(|sq| {
            let (i, j) = (sq / n_b, sq % n_b);
            let mut degrees = Vec::with_capacity(partition.n_c);
            let mut edges = Vec::new();
            for enc in b.fiber_enclosures(i, j) {
                let t = b.targets(i, j, enc);
                degrees.push(t.len() as u32);
                edges.extend_from_slice(&t);
            }
            (degrees, edges)
        })
        .collect();

    let total: usize = chunks.iter().map(|c| c.1.len()).sum();
    let mut offsets = Vec::with_capacity(partition.node_count() + 1);
    let mut targets = Vec::with_capacity(total);
    offsets.push(0);
    for (degrees, edges) in chunks {
        for d in degrees {
            offsets.push(offsets.last().copied().unwrap_or(0) + d as usize);
        }
        targets.extend_from_slice(&edges);
    }
    Ok(TransitionGraph {
        partition,
        epsilon,
        csr: Csr { offsets, targets },
        max_padding: if system.is_perturbed() { b.pad } else { 0.0 },
    })
}

/// Spot-check that true orbit pairs `(z, f(z))` are edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Soundness {
    pub checked: usize,
    pub missing: usize,
}

pub fn soundness_check(graph: &TransitionGraph, system: &SkewSystem, samples: usize, seed: u64) -> Soundness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point3> = (0..samples)
        .map(|_| Point3::new(TorusPoint2::new(rng.gen(), rng.gen()), rng.gen_range(-1.0..1.0)))
        .collect();
    let missing = points
        .par_iter()
        .filter(|z| {
            let a = graph.partition.box_of(z);
            let b = graph.partition.box_of(&system.apply(**z));
            !graph.has_edge(a, b)
        })
        .count();
    Soundness {
        checked: samples,
        missing,
    }
}

/// Summarizes the SCC structure of a built graph.
pub fn certify_graph(graph: &TransitionGraph, sccs: &SccResult) -> Certificate {
    let p = graph.partition;
    let mut cert = Certificate::new("chain.transitive_at_scale");
    cert.param("n_b", p.n_b as f64)
        .param("n_c", p.n_c as f64)
        .param("epsilon", graph.epsilon)
        .param("box_diameter", p.diameter());
    cert.value("nodes", graph.node_count() as f64)
        .value("edges", graph.edge_count() as f64)
        .value("components", sccs.count as f64)
        .value("largest_component", sccs.largest as f64)
        .value("max_fiber_padding", graph.max_padding)
        .value("epsilon_over_diameter", graph.epsilon / p.diameter());
    cert.check("single_component", sccs.count == 1);
    cert.grid(format!(
        "{}x{} base squares x {} fiber arcs; corner evaluation plus Lipschitz padding",
        p.n_b, p.n_b, p.n_c
    ));
    if sccs.count == 1 {
        cert.note(format!(
            "every point is ({:e} + padding)-chain attainable from every point at this resolution",
            graph.epsilon
        ));
    } else if let Some(other) = sccs.component.iter().position(|&c| c != 0) {
        let sink = sccs.component.iter().position(|&c| c == 0).unwrap_or(0);
        let (i, j, k) = p.coords(sink);
        let (oi, oj, ok) = p.coords(other);
        cert.note(format!(
            "box ({i},{j},{k}) lies in a sink component and cannot reach box ({oi},{oj},{ok})"
        ));
    }
    cert
}

pub fn chain_transitive_at_scale(system: &SkewSystem, n_b: usize, n_c: usize, epsilon: f64) -> Result<Certificate> {
    let graph = build_graph(system, BoxPartition::new(n_b, n_c)?, epsilon)?;
    Ok(certify_graph(&graph, &scc(&graph.csr)))
}

/// Box graph of a circle map given on lifts (`map(t + 2) = map(t) + 2`).
///
/// With `epsilon = 0` the graph is the exact image graph of half-open arcs
/// under an increasing map; otherwise images are closed and ε-fattened.
pub fn circle_graph(n_c: usize, epsilon: f64, map: impl Fn(f64) -> f64 + Sync) -> Csr {
    let h = 2.0 / n_c as f64;
    let ends: Vec<f64> = (0..=n_c).into_par_iter().map(|k| map(-1.0 + h * k as f64)).collect();
    let lists = (0..n_c)
        .map(|k| {
            let mut out = Vec::new();
            let range = if epsilon == 0.0 {
                half_open_arc_range(ends[k], ends[k + 1], n_c)
            } else {
                closed_arc_range(ends[k] - epsilon - GUARD, ends[k + 1] + epsilon + GUARD, n_c)
            };
            push_arcs(&mut out, 0, range, n_c);
            out
        })
        .collect();
    Csr::from_lists(lists)
}

/// Arcs containing an exact fixed point among 17 samples of `[t_k, t_{k+1})`.
pub fn fixed_arcs(n_c: usize, map: impl Fn(f64) -> f64 + Sync) -> Vec<usize> {
    let h = 2.0 / n_c as f64;
    (0..n_c)
        .into_par_iter()
        .filter(|&k| {
            (0..17).any(|s| {
                let t = -1.0 + h * (k as f64 + s as f64 / 17.0);
                map(t) == t
            })
        })
        .collect()
}

/// Chain transitivity of `f` restricted to the invariant fiber over `p`.
pub fn fiber_chain_check(system: &SkewSystem, n_c: usize, epsilon: f64) -> Certificate {
    let fm = system.fiber_map(system.chart().center());
    let graph = circle_graph(n_c, epsilon, |t| fm.eval(t));
    let sccs = scc(&graph);
    let fixed = fixed_arcs(n_c, |t| fm.eval(t));
    let expected: Vec<usize> = if n_c % 2 == 0 { vec![0, n_c / 2] } else { vec![0] };
    let self_loops = expected.iter().all(|&k| graph.has_edge(k, k));

    let mut cert = Certificate::new("chain.fiber_over_p");
    cert.param("n_c", n_c as f64).param("epsilon", epsilon);
    cert.value("components", sccs.count as f64)
        .value("largest_component", sccs.largest as f64)
        .value("fixed_arcs", fixed.len() as f64);
    cert.check("single_component", sccs.count == 1)
        .check("fixed_arcs_at_0_and_1", fixed == expected)
        .check("fixed_arcs_self_loop", self_loops);
    cert.grid(format!("{n_c} fiber arcs over p; G_p evaluated at arc endpoints"));
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{derive_params, BaseConfig, Params};

    fn default_system() -> SkewSystem {
        SkewSystem::new(derive_params(BaseConfig::default()).params).unwrap()
    }

    fn product_system() -> SkewSystem {
        SkewSystem::new(Params::explicit(
            BaseConfig {
                r: 0.0,
                rho: 0.0,
                ..Default::default()
            },
            0.0,
        ))
        .unwrap()
    }

    #[test]
    fn partition_indexing() {
        let p = BoxPartition::new(5, 7).unwrap();
        for idx in 0..p.node_count() {
            let (i, j, k) = p.coords(idx);
            assert_eq!(p.index(i, j, k), idx);
            assert_eq!(p.box_of(&p.box_center(idx)), idx);
        }
        assert!(matches!(
            BoxPartition::with_budget(100, 100, 1000),
            Err(Error::NodeBudget { nodes: 1_000_000, .. })
        ));
        assert!(BoxPartition::new(1 << 10, 1 << 10).is_err());
    }

    #[test]
    fn polygon_distance_cases() {
        let sq = |a: f64, b: f64| vec![[a, b], [a + 1.0, b], [a + 1.0, b + 1.0], [a, b + 1.0]];
        assert_eq!(polygon_distance(&sq(0.0, 0.0), &sq(1.0, 0.0)), 0.0);
        assert_eq!(polygon_distance(&sq(0.0, 0.0), &sq(3.0, 0.0)), 2.0);
        assert!((polygon_distance(&sq(0.0, 0.0), &sq(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
        let tilted = vec![[0.0, 0.0], [2.0, 1.0], [3.0, 2.0], [1.0, 1.0]];
        assert_eq!(polygon_distance(&tilted, &sq(1.0, 0.0)), 0.0);
        // Cell [0,1]x[1,2] touches only at the vertex (1,1).
        assert_eq!(polygon_distance(&tilted, &sq(0.0, 1.0)), 0.0);
        let d = polygon_distance(&tilted, &sq(-1.0, 1.0));
        assert!((d - 1.0 / 2f64.sqrt()).abs() < 1e-15, "{d}");
    }

    #[test]
    fn base_pattern_covers_exact_image() {
        let pat = BasePattern::new([[2, 1], [1, 1]], 8, 0.0);
        let cells: Vec<(i64, i64)> = pat.entries.iter().map(|e| (e.0, e.1)).collect();
        // The parallelogram with vertices (0,0),(2,1),(3,2),(1,1) meets these open cells.
        for c in [(0, 0), (1, 0), (1, 1), (2, 1)] {
            assert!(cells.contains(&c), "{c:?}");
        }
        assert!(!cells.contains(&(3, 0)));
        let wide = BasePattern::new([[2, 1], [1, 1]], 8, 0.2);
        assert!(wide.entries.len() > pat.entries.len());
    }

    #[test]
    fn arc_ranges() {
        assert_eq!(closed_arc_range(-1.0, -0.5, 8), (-1, 2));
        assert_eq!(half_open_arc_range(-1.0, -0.5, 8), (0, 1));
        let mut v = Vec::new();
        push_arcs(&mut v, 0, (-1, 0), 8);
        assert_eq!(v, vec![7, 0]);
        v.clear();
        push_arcs(&mut v, 0, (-3, 9), 8);
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn product_map_fiber_part_is_neighbouring_arcs() {
        let sys = product_system();
        let part = BoxPartition::new(2, 8).unwrap();
        let g = build_graph(&sys, part, 0.0).unwrap();
        for v in 0..g.node_count() {
            let (_, _, k) = part.coords(v);
            assert!(g.neighbors(v).iter().any(|&w| part.coords(w as usize).2 == k));
            for &w in g.neighbors(v) {
                let kw = part.coords(w as usize).2 as i64;
                assert!(matches!((kw - k as i64).rem_euclid(8), 0 | 1 | 7));
            }
        }
    }

    #[test]
    fn enclosure_contains_box_centre_image() {
        let sys = default_system();
        let part = BoxPartition::new(32, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base_cells = BasePattern::new(sys.matrix().entries(), 32, 0.0).entries.len();
        for _ in 0..10_000 {
            let idx = rng.gen_range(0..part.node_count());
            let enc = box_image_enclosure(&sys, part, idx, 0.0);
            let img = sys.apply(part.box_center(idx));
            assert!(enc.binary_search(&(part.box_of(&img) as u32)).is_ok());
            // One arc of length 2/64 maps onto at most ~1.8 arcs; plus 2 for closure.
            assert!(enc.len() <= base_cells * 4, "{}", enc.len());
        }
    }

    #[test]
    fn graph_is_sound_deterministic_and_monotone() {
        let sys = default_system();
        let part = BoxPartition::new(16, 32).unwrap();
        let d = part.diameter();
        let small = build_graph(&sys, part, 1.0 * d).unwrap();
        let large = build_graph(&sys, part, 1.5 * d).unwrap();
        assert!(small.csr.is_subgraph_of(&large.csr));
        assert!(!large.csr.is_subgraph_of(&small.csr));
        let again = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| build_graph(&sys, part, 1.0 * d).unwrap());
        assert_eq!(again, small);
        let s = soundness_check(&small, &sys, 20_000, 1);
        assert_eq!(s.missing, 0);
        assert_eq!(scc(&small.csr).count, 1);
        let node0 = box_image_enclosure(&sys, part, 77, d);
        assert_eq!(node0.as_slice(), small.neighbors(77));
    }

    #[test]
    fn product_map_is_chain_transitive_once_epsilon_covers_an_arc() {
        let sys = product_system();
        let part = BoxPartition::new(8, 16).unwrap();
        let c = chain_transitive_at_scale(&sys, part.n_b, part.n_c, part.arc_len()).unwrap();
        assert!(c.passed(), "{}", c.to_text());
    }

    #[test]
    fn fiber_chain_over_p() {
        let sys = default_system();
        let c = fiber_chain_check(&sys, 4096, 2.0 * 2.0 / 4096.0);
        assert!(c.passed(), "{}", c.to_text());
        let fm = sys.fiber_map(TorusPoint2::ORIGIN);
        let pure = circle_graph(4096, 0.0, |t| fm.eval(t));
        assert!(scc(&pure).count >= 2);
        assert!(pure.has_edge(0, 0) && pure.has_edge(2048, 2048));
        assert_eq!(fixed_arcs(4096, |t| fm.eval(t)), vec![0, 2048]);
    }

    #[test]
    fn north_south_control_splits() {
        // Repelling at 0, attracting at ±1; minimum displacement on [0.3, 0.7] is ~0.0809.
        let map = |t: f64| t + 0.1 * (std::f64::consts::PI * t).sin();
        let g = circle_graph(512, 0.01, map);
        assert!(scc(&g).count > 1);
        let g = circle_graph(512, 0.5, map);
        assert_eq!(scc(&g).count, 1);
    }

    #[test]
    fn dump_format() {
        let sys = product_system();
        let g = build_graph(&sys, BoxPartition::new(2, 2).unwrap(), 0.0).unwrap();
        let mut buf = Vec::new();
        g.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("boxgraph v1 2 2 0e0"));
        assert_eq!(lines.count(), 8);
        assert!(text.lines().nth(1).unwrap().starts_with("0:"));
    }
}
