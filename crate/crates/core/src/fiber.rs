//! The fiber circle R/2Z, the scalar profiles θ, γ, α, and the 1-D flows
//! built from them.
//!
//! Flows operate on real lifts of circle points. θ and γ have period 1, so
//! every flow commutes with integer translations of the lift; values are only
//! reduced into `[-1,1)` when a [`CirclePoint`] is requested.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::torus::{Chart, ChartPoint, TorusPoint2};

/// A point of R/2Z represented in `[-1, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn new(t: f64) -> Self {
        if (-1.0..1.0).contains(&t) {
            return CirclePoint(t);
        }
        let mut r = (t + 1.0).rem_euclid(2.0) - 1.0;
        if r >= 1.0 {
            r = -1.0;
        }
        CirclePoint(r)
    }

    pub fn t(&self) -> f64 {
        self.0
    }

    /// Arc-length distance on the circle of circumference 2.
    pub fn distance(&self, other: &CirclePoint) -> f64 {
        let d = (self.0 - other.0).rem_euclid(2.0);
        d.min(2.0 - d)
    }
}

impl From<f64> for CirclePoint {
    fn from(t: f64) -> Self {
        CirclePoint::new(t)
    }
}

/// Counter-clockwise arc from `lo` of length `len ∈ (0, 2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    lo: CirclePoint,
    len: f64,
}

impl Arc {
    /// The arc running counter-clockwise from `lo` to `hi`; `lo == hi` gives the full circle.
    pub fn new(lo: f64, hi: f64) -> Self {
        let lo = CirclePoint::new(lo);
        let mut len = (hi - lo.t()).rem_euclid(2.0);
        if len == 0.0 {
            len = 2.0;
        }
        Arc { lo, len }
    }

    pub fn full() -> Self {
        Arc {
            lo: CirclePoint::new(-1.0),
            len: 2.0,
        }
    }

    pub fn lo(&self) -> CirclePoint {
        self.lo
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn is_full(&self) -> bool {
        self.len >= 2.0
    }

    /// Lift endpoints `[lo, lo + len]`.
    pub fn lift(&self) -> (f64, f64) {
        (self.lo.t(), self.lo.t() + self.len)
    }

    pub fn contains(&self, t: f64) -> bool {
        (t - self.lo.t()).rem_euclid(2.0) <= self.len
    }

    /// Distance from `t` to the arc (0 inside).
    pub fn distance_to(&self, t: f64) -> f64 {
        if self.contains(t) {
            return 0.0;
        }
        let (lo, hi) = self.lift();
        CirclePoint::new(t)
            .distance(&CirclePoint::new(lo))
            .min(CirclePoint::new(t).distance(&CirclePoint::new(hi)))
    }

    /// Whether two arcs share a point.
    pub fn intersects(&self, other: &Arc) -> bool {
        self.contains(other.lo.t()) || other.contains(self.lo.t())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMethod {
    ClosedForm,
    Integrated,
}

/// Value (as a lift) and `t₀`-derivative of a 1-D time map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow1D {
    pub value: f64,
    pub derivative: f64,
    pub method: FlowMethod,
}

impl Flow1D {
    pub fn point(&self) -> CirclePoint {
        CirclePoint::new(self.value)
    }
}

/// θ(t) = 1 − cos(2πt), evaluated as 2 sin²(πt) to keep precision near the zeros.
pub fn theta(t: f64) -> f64 {
    let s = (PI * (t - t.round())).sin();
    2.0 * s * s
}

pub fn theta_prime(t: f64) -> f64 {
    2.0 * PI * (2.0 * PI * t).sin()
}

/// Time-`s` map of dt/ds = θ(t).
///
/// On each invariant interval `cot(πt)` decreases at rate 2π, so the flow is
/// `cot(π t(s)) = cot(π t₀) − 2πs`. Integers are fixed.
pub fn flow_theta(t0: f64, s: f64) -> Flow1D {
    let n0 = t0.round();
    let d0 = t0 - n0;
    if d0 == 0.0 || s == 0.0 {
        return Flow1D {
            value: t0,
            derivative: 1.0,
            method: FlowMethod::ClosedForm,
        };
    }
    let (sin0, cos0) = (PI * d0).sin_cos();
    let w = cos0 / sin0 - 2.0 * PI * s;
    let value = if d0 > 0.0 {
        n0 + 1.0f64.atan2(w) / PI
    } else {
        n0 + (-1.0f64).atan2(-w) / PI
    };
    let sin1 = (PI * (value - value.round())).sin();
    Flow1D {
        value,
        derivative: (sin1 * sin1) / (sin0 * sin0),
        method: FlowMethod::ClosedForm,
    }
}

/// Fixed-step RK4 for dt/ds = θ(t); kept as an independent cross-check.
pub fn flow_theta_rk4(t0: f64, s: f64, steps: usize) -> f64 {
    let h = s / steps as f64;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = theta(t);
        let k2 = theta(t + 0.5 * h * k1);
        let k3 = theta(t + 0.5 * h * k2);
        let k4 = theta(t + h * k3);
        t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    t
}

/// Standard bump `g(u) = exp(1 − 1/(1−u²))` on `|u| < 1`, normalized to `g(0) = 1`.
pub fn bump(u: f64) -> f64 {
    let q = 1.0 - u * u;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

pub fn bump_prime(u: f64) -> f64 {
    let q = 1.0 - u * u;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp() * (-2.0 * u / (q * q))
    }
}

/// Upper bound on `max |g'|` from dense sampling plus an absolute margin.
pub fn bump_prime_bound() -> f64 {
    static BOUND: OnceLock<f64> = OnceLock::new();
    *BOUND.get_or_init(|| {
        let n = 2_000_000;
        let mut best: f64 = 0.0;
        for i in 0..=n {
            let u = i as f64 / n as f64;
            best = best.max(bump_prime(u).abs());
        }
        // The sampling step is 5e-7 and |g''| < 20, so the sampled max is within 1e-5.
        best + 1e-5
    })
}

/// γ(t): bumps of half-width τ centred at the integers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaBump {
    tau: f64,
}

impl GammaBump {
    pub fn new(tau: f64) -> Self {
        assert!(tau > 0.0 && tau < 0.5, "gamma half-width out of range: {tau}");
        GammaBump { tau }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn value(&self, t: f64) -> f64 {
        bump((t - t.round()) / self.tau)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        bump_prime((t - t.round()) / self.tau) / self.tau
    }

    /// `(γ(t), γ'(t))` sharing one exponential; bitwise equal to the separate calls.
    fn value_and_derivative(&self, t: f64) -> (f64, f64) {
        let u = (t - t.round()) / self.tau;
        let q = 1.0 - u * u;
        if q <= 0.0 {
            return (0.0, 0.0);
        }
        let g = (1.0 - 1.0 / q).exp();
        (g, g * (-2.0 * u / (q * q)) / self.tau)
    }

    /// Open support `(n − τ, n + τ)` around the integers.
    pub fn in_support(&self, t: f64) -> bool {
        (t - t.round()).abs() < self.tau
    }

    /// Certified bound on `max |γ'|`.
    pub fn derivative_bound(&self) -> f64 {
        bump_prime_bound() / self.tau
    }

    /// Number of RK4 steps used for a flow of duration `s`.
    pub fn steps_for(&self, s: f64) -> usize {
        let work = s.abs() * self.derivative_bound() / 0.01;
        (work.ceil() as usize).max(8)
    }

    /// Time-`s` map of dt/ds = γ(t), with its variational derivative.
    pub fn flow(&self, t0: f64, s: f64) -> Flow1D {
        self.flow_with_steps(t0, s, self.steps_for(s))
    }

    /// `flow(t0, s) − t0`, accumulated as an increment so that short flows
    /// keep full relative precision.
    pub fn displacement(&self, t0: f64, s: f64) -> f64 {
        if s == 0.0 || !self.in_support(t0) {
            return 0.0;
        }
        let steps = self.steps_for(s);
        let h = s / steps as f64;
        let mut d = 0.0;
        for _ in 0..steps {
            let k1 = self.value(t0 + d);
            let k2 = self.value(t0 + (d + 0.5 * h * k1));
            let k3 = self.value(t0 + (d + 0.5 * h * k2));
            let k4 = self.value(t0 + (d + h * k3));
            d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        d
    }

    pub fn flow_with_steps(&self, t0: f64, s: f64, steps: usize) -> Flow1D {
        if s == 0.0 || !self.in_support(t0) {
            return Flow1D {
                value: t0,
                derivative: 1.0,
                method: FlowMethod::Integrated,
            };
        }
        let h = s / steps as f64;
        let (mut t, mut v) = (t0, 1.0);
        for _ in 0..steps {
            let (k1, d1) = self.value_and_derivative(t);
            let l1 = d1 * v;
            let (k2, d2) = self.value_and_derivative(t + 0.5 * h * k1);
            let l2 = d2 * (v + 0.5 * h * l1);
            let (k3, d3) = self.value_and_derivative(t + 0.5 * h * k2);
            let l3 = d3 * (v + 0.5 * h * l2);
            let (k4, d4) = self.value_and_derivative(t + h * k3);
            let l4 = d4 * (v + h * l3);
            t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            v += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        }
        Flow1D {
            value: t,
            derivative: v,
            method: FlowMethod::Integrated,
        }
    }
}

fn smooth_step_kernel(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

fn smooth_step_kernel_prime(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() / (u * u)
    }
}

/// σ(u) = B(u) / (B(u) + B(1−u)): 0 for u ≤ 0, 1 for u ≥ 1, smooth in between.
pub fn smooth_step(u: f64) -> f64 {
    let a = smooth_step_kernel(u);
    let b = smooth_step_kernel(1.0 - u);
    a / (a + b)
}

pub fn smooth_step_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let a = smooth_step_kernel(u);
    let b = smooth_step_kernel(1.0 - u);
    let da = smooth_step_kernel_prime(u);
    let db = smooth_step_kernel_prime(1.0 - u);
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Plateau profile in one chart coordinate: 1 on `|c| ≤ 1`, 0 on `|c| ≥ 3`.
pub fn plateau(c: f64) -> f64 {
    let a = c.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 3.0 {
        0.0
    } else {
        smooth_step((3.0 - a) / 2.0)
    }
}

pub fn plateau_prime(c: f64) -> f64 {
    let a = c.abs();
    if a <= 1.0 || a >= 3.0 {
        0.0
    } else {
        -c.signum() * smooth_step_prime((3.0 - a) / 2.0) / 2.0
    }
}

/// α: vanishes on the central chart box `[-1,1]²`, equals 1 off `[-3,3]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaBump {
    chart: Chart,
}

impl AlphaBump {
    pub fn new(chart: Chart) -> Self {
        AlphaBump { chart }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn value_at_chart(c: ChartPoint) -> f64 {
        if !c.in_domain() {
            return 1.0;
        }
        1.0 - plateau(c.x_s) * plateau(c.x_u)
    }

    pub fn value(&self, q: &TorusPoint2) -> f64 {
        Self::value_at_chart(self.chart.coords_unchecked(q))
    }

    /// Gradient with respect to torus coordinates.
    pub fn gradient(&self, q: &TorusPoint2) -> [f64; 2] {
        let c = self.chart.coords_unchecked(q);
        if !c.in_domain() {
            return [0.0, 0.0];
        }
        self.gradient_at_chart(c)
    }

    fn gradient_at_chart(&self, c: ChartPoint) -> [f64; 2] {
        let gs = -plateau_prime(c.x_s) * plateau(c.x_u);
        let gu = -plateau(c.x_s) * plateau_prime(c.x_u);
        let rows = self.chart.coordinate_gradients();
        [
            gs * rows[0][0] + gu * rows[1][0],
            gs * rows[0][1] + gu * rows[1][1],
        ]
    }

    /// Whether α is identically 1 on the disc of radius `radius` around `q`.
    pub fn constant_near(&self, q: &TorusPoint2, radius: f64) -> bool {
        q.distance(&self.chart.center()) > self.chart.enclosing_radius(3.0) + radius
    }

    /// Upper bound on ‖∇α‖: supremum over a 0.01-spaced chart grid on the
    /// transition square `[-3,3]²`, times a 1.1 safety factor.
    pub fn gradient_bound(&self) -> f64 {
        let n = 600;
        let mut best: f64 = 0.0;
        for i in 0..=n {
            let xs = -3.0 + 6.0 * i as f64 / n as f64;
            for j in 0..=n {
                let xu = -3.0 + 6.0 * j as f64 / n as f64;
                let g = self.gradient_at_chart(ChartPoint::new(xs, xu));
                best = best.max(g[0].hypot(g[1]));
            }
        }
        1.1 * best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::HyperbolicMatrix;

    #[test]
    fn fused_gamma_evaluation_is_exact() {
        let g = GammaBump::new(4.4e-3);
        for i in 0..=2000 {
            let t = -1.01 + 2.02 * i as f64 / 2000.0;
            assert_eq!(g.value_and_derivative(t), (g.value(t), g.derivative(t)), "{t}");
        }
    }

    #[test]
    fn gamma_displacement_matches_flow() {
        let g = GammaBump::new(0.004);
        for (t, time) in [(0.001, 1e-4), (-0.002, -3e-4), (0.999, 2e-4), (0.3, 1.0)] {
            let d = g.displacement(t, time);
            assert!((d - (g.flow(t, time).value - t)).abs() < 1e-15, "{t}");
        }
        let tiny = g.displacement(0.001, 1e-14);
        assert!((tiny / (1e-14 * g.value(0.001)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(0.0), 0.0);
        assert_eq!(theta(-1.0), 0.0);
        assert_eq!(theta(1.0), 0.0);
        assert!((theta(0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn theta_nonnegative_on_grid() {
        let n = 1_000_000;
        for i in 0..n {
            let t = -1.0 + 2.0 * i as f64 / n as f64;
            let v = theta(t);
            assert!(v >= 0.0);
            if v == 0.0 {
                assert!(t == 0.0 || t == -1.0, "unexpected zero at {t}");
            }
        }
    }

    #[test]
    fn flow_theta_examples() {
        assert_eq!(flow_theta(0.0, 3.0).value, 0.0);
        assert_eq!(flow_theta(-1.0, 0.7).value, -1.0);
        let id = flow_theta(0.37, 0.0);
        assert_eq!((id.value, id.derivative), (0.37, 1.0));

        // cot(π t) = 0 − 0.1π on the branch (0,1).
        let f = flow_theta(0.5, 0.05);
        let expected = 0.5 + (0.1 * PI).atan() / PI;
        assert!((f.value - expected).abs() < 1e-15);
        assert!((f.value - 0.596_892_191_613_955).abs() < 1e-12);
        let rk = flow_theta_rk4(0.5, 0.05, 5000);
        assert!((f.value - rk).abs() < 1e-10);
    }

    #[test]
    fn flow_theta_agrees_with_rk4_across_the_circle() {
        for i in 0..200 {
            let t = -1.0 + 0.01 * i as f64 + 0.003;
            for s in [0.05, -0.05, 0.3] {
                let exact = flow_theta(t, s).value;
                let rk = flow_theta_rk4(t, s, 20_000);
                assert!((exact - rk).abs() < 1e-10, "t={t} s={s}: {exact} vs {rk}");
            }
        }
    }

    #[test]
    fn flow_theta_derivative_matches_finite_difference() {
        for t in [-0.93, -0.4, 0.01, 0.33, 0.77] {
            let h = 1e-6;
            let fd = (flow_theta(t + h, 0.05).value - flow_theta(t - h, 0.05).value) / (2.0 * h);
            let d = flow_theta(t, 0.05).derivative;
            assert!((fd - d).abs() < 1e-7 * d, "t={t}");
        }
    }

    #[test]
    fn flow_theta_moves_points_up_near_the_bands() {
        let (r, delta) = (0.05, 0.1);
        for i in 0..1000 {
            let u = i as f64 / 1000.0 * delta;
            for t in [-delta + u, 1.0 - delta + u] {
                if t == 0.0 || t == 1.0 {
                    continue;
                }
                assert!(flow_theta(t, r).value > t);
            }
        }
    }

    #[test]
    fn flow_theta_semigroup() {
        for i in 0..100 {
            let t = -1.0 + 0.02 * i as f64 + 0.001;
            let a = flow_theta(flow_theta(t, 0.02).value, 0.03).value;
            let b = flow_theta(t, 0.05).value;
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn flow_theta_lift_periodicity() {
        for t in [-0.7, 0.2, 0.9] {
            let a = flow_theta(t, 0.05).value;
            let b = flow_theta(t + 2.0, 0.05).value;
            assert!((a + 2.0 - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_profile() {
        let g = GammaBump::new(0.004);
        assert_eq!(g.value(0.5), 0.0);
        assert_eq!(g.value(0.0), 1.0);
        assert_eq!(g.value(1.0), 1.0);
        assert_eq!(g.value(-1.0), 1.0);
        assert_eq!(g.value(0.004), 0.0);
        assert_eq!(g.derivative(0.004), 0.0);
        assert!(g.value(0.0039) > 0.0);
        assert!(g.value(-0.0039) > 0.0);
        assert!(g.value(0.9961) > 0.0);
        assert_eq!(g.value(0.996), 0.0);
        for i in 0..10_000 {
            let t = -1.0 + 2.0 * i as f64 / 10_000.0;
            assert!(g.value(t) >= 0.0 && g.value(t) <= 1.0);
        }
    }

    #[test]
    fn bump_derivative_bound() {
        let b = bump_prime_bound();
        assert!(b > 2.17 && b < 2.171, "{b}");
    }

    #[test]
    fn gamma_flow_fixed_and_identity() {
        let g = GammaBump::new(0.004);
        for s in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            let f = g.flow(0.5, s);
            assert_eq!((f.value, f.derivative), (0.5, 1.0));
        }
        let f = g.flow(0.001, 0.0);
        assert_eq!((f.value, f.derivative), (0.001, 1.0));
    }

    #[test]
    fn gamma_flow_derivative_matches_finite_difference() {
        let g = GammaBump::new(0.0043699);
        let t = 0.1 * g.tau();
        let s = 0.01;
        let h = 1e-7;
        let fd = (g.flow(t + h, s).value - g.flow(t - h, s).value) / (2.0 * h);
        let d = g.flow(t, s).derivative;
        assert!(((fd - d) / d).abs() < 1e-6, "fd={fd} d={d}");
    }

    #[test]
    fn gamma_flow_step_halving() {
        let g = GammaBump::new(0.0043699);
        for s in [5e-4, -5e-4, 1e-4, -2e-3] {
            for i in 0..40 {
                let t = -g.tau() + 2.0 * g.tau() * (i as f64 + 0.5) / 40.0;
                let n = g.steps_for(s);
                let a = g.flow_with_steps(t, s, n).value;
                let b = g.flow_with_steps(t, s, 2 * n).value;
                assert!((a - b).abs() < 1e-12, "t={t} s={s}: {}", (a - b).abs());
            }
        }
    }

    #[test]
    fn gamma_flow_semigroup_and_direction() {
        let g = GammaBump::new(0.0043699);
        for i in 0..50 {
            let t = -g.tau() + 2.0 * g.tau() * (i as f64 + 0.5) / 50.0;
            let a = g.flow(g.flow(t, -2e-4).value, -3e-4).value;
            let b = g.flow(t, -5e-4).value;
            assert!((a - b).abs() < 1e-11);
            assert!(g.flow(t, 5e-4).value > t);
            assert!(g.flow(t, -5e-4).value < t);
            let back = g.flow(g.flow(t, 5e-4).value, -5e-4).value;
            assert!((back - t).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_cases() {
        let chart = Chart::new(HyperbolicMatrix::cat(), 0.005);
        let alpha = AlphaBump::new(chart);
        assert_eq!(alpha.value(&TorusPoint2::ORIGIN), 0.0);
        assert_eq!(alpha.value(&chart.from_chart(ChartPoint::new(5.0, 0.0))), 1.0);
        let mid = alpha.value(&chart.from_chart(ChartPoint::new(2.0, 0.0)));
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(alpha.value(&chart.from_chart(ChartPoint::new(0.9, -0.95))), 0.0);
        assert_eq!(alpha.value(&TorusPoint2::new(0.5, 0.5)), 1.0);
        assert_eq!(alpha.gradient(&TorusPoint2::ORIGIN), [0.0, 0.0]);
    }

    #[test]
    fn alpha_gradient_bound_dominates_fine_grid() {
        let chart = Chart::new(HyperbolicMatrix::cat(), 0.005);
        let alpha = AlphaBump::new(chart);
        let bound = alpha.gradient_bound();
        assert!(bound.is_finite() && bound > 0.0);
        let n = 2000;
        let mut observed: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let c = ChartPoint::new(-10.0 + 20.0 * i as f64 / n as f64, -10.0 + 20.0 * j as f64 / n as f64);
                let g = alpha.gradient(&chart.from_chart(c));
                observed = observed.max(g[0].hypot(g[1]));
            }
        }
        assert!(bound >= observed, "{bound} < {observed}");
        // Analytic: ‖∇α‖ ≤ √2 · max|m'| / c_u with max|σ'| = 2 at u = 1/2.
        assert!(bound <= 1.1 * 2f64.sqrt() * 1.0 / 0.005 + 1e-9);
    }

    #[test]
    fn alpha_gradient_matches_finite_difference() {
        let chart = Chart::new(HyperbolicMatrix::cat(), 0.005);
        let alpha = AlphaBump::new(chart);
        for c in [ChartPoint::new(1.7, 0.3), ChartPoint::new(-2.2, 2.5), ChartPoint::new(0.0, 1.5)] {
            let q = chart.from_chart(c);
            let g = alpha.gradient(&q);
            let h = 1e-7;
            let fx = (alpha.value(&q.translate([h, 0.0])) - alpha.value(&q.translate([-h, 0.0]))) / (2.0 * h);
            let fy = (alpha.value(&q.translate([0.0, h])) - alpha.value(&q.translate([0.0, -h]))) / (2.0 * h);
            assert!((fx - g[0]).abs() < 1e-4 * (1.0 + g[0].abs()));
            assert!((fy - g[1]).abs() < 1e-4 * (1.0 + g[1].abs()));
        }
    }

    #[test]
    fn profiles_have_bounded_finite_differences_across_gluing_points() {
        let g = GammaBump::new(0.004);
        for t in [0.004, -0.004, 0.996, -0.996] {
            let h = 1e-5;
            let d2 = (g.value(t + h) - 2.0 * g.value(t) + g.value(t - h)) / (h * h);
            assert!(d2.abs() < 1e6);
        }
        for c in [1.0, 3.0, -1.0, -3.0] {
            let h = 1e-5;
            let d1 = (plateau(c + h) - plateau(c - h)) / (2.0 * h);
            let d2 = (plateau(c + h) - 2.0 * plateau(c) + plateau(c - h)) / (h * h);
            assert!(d1.abs() < 1e-3 && d2.abs() < 10.0);
        }
    }

    #[test]
    fn circle_points_and_arcs() {
        assert_eq!(CirclePoint::new(1.0).t(), -1.0);
        assert_eq!(CirclePoint::new(2.5).t(), 0.5);
        assert_eq!(CirclePoint::new(-1e-300).t(), -1e-300);
        let p = CirclePoint::new(0.95);
        assert!((p.distance(&CirclePoint::new(-0.95)) - 0.1).abs() < 1e-12);

        let star = Arc::new(0.9, 0.0);
        assert!((star.len() - 1.1).abs() < 1e-15);
        assert!(star.contains(0.95) && star.contains(-1.0) && star.contains(-0.3) && star.contains(0.0));
        assert!(!star.contains(0.4));
        let r0 = Arc::new(-0.1, 0.0);
        let r1 = Arc::new(0.9, 1.0);
        assert!(!r0.intersects(&r1));
        assert!(star.intersects(&r0) && star.intersects(&r1));
        assert!(Arc::full().contains(0.123));
    }
}
