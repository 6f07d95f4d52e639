//! Standalone SVG figures.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fiber::theta;
use crate::invariants::{AttractorEnclosure, LeafPolyline};
use crate::system::SkewSystem;

fn header(w: usize, h: usize, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <title>{title}</title>\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn arrow_head(s: &mut String, x: f64, y: f64, dx: f64, dy: f64, size: f64, color: &str) {
    let n = (dx * dx + dy * dy).sqrt().max(1e-12);
    let (ux, uy) = (dx / n, dy / n);
    let (bx, by) = (x - size * ux, y - size * uy);
    let (px, py) = (-uy * size * 0.5, ux * size * 0.5);
    let _ = writeln!(
        s,
        "<polygon points=\"{x:.2},{y:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{color}\"/>",
        bx + px,
        by + py,
        bx - px,
        by - py
    );
}

pub fn check_canvas(canvas: usize) -> Result<()> {
    if canvas < 16 {
        return Err(Error::Config(format!("canvas must be at least 16 pixels, got {canvas}")));
    }
    Ok(())
}

/// Phase portrait of `dt/ds = θ(t)` on the fiber circle, `t ↦ angle πt`.
pub fn theta_portrait(canvas: usize) -> String {
    let c = canvas as f64;
    let (cx, cy, rad) = (c / 2.0, c / 2.0, 0.38 * c);
    let mut s = header(canvas, canvas, "fiber flow of theta: two semi-stable fixed points");
    let _ = writeln!(
        s,
        "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{rad:.2}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>"
    );
    let pos = |t: f64| (cx + rad * (PI * t).cos(), cy - rad * (PI * t).sin());
    for k in 0..16 {
        let t = -1.0 + (k as f64 + 0.5) / 8.0;
        let (x, y) = pos(t);
        // Flow increases t: counter-clockwise, length proportional to θ.
        let len = 0.06 * c * theta(t) / 2.0 + 0.01 * c;
        let (dx, dy) = (-(PI * t).sin() * len, -(PI * t).cos() * len);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"steelblue\" stroke-width=\"2\"/>",
            x - dx / 2.0,
            y - dy / 2.0,
            x + dx / 2.0,
            y + dy / 2.0
        );
        arrow_head(&mut s, x + dx / 2.0, y + dy / 2.0, dx, dy, 0.02 * c, "steelblue");
    }
    for (label, t) in [("t = 0", 0.0), ("t = 1 = -1", 1.0)] {
        let (x, y) = pos(t);
        let _ = writeln!(
            s,
            "<circle class=\"fixed-point\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"crimson\"/>",
            0.015 * c
        );
        let tx = if t == 0.0 { x - 0.1 * c } else { x + 0.02 * c };
        let _ = writeln!(
            s,
            "<text x=\"{tx:.2}\" y=\"{:.2}\" font-size=\"{:.1}\">{label}</text>",
            y - 0.03 * c,
            0.03 * c
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Fiber axis `[−1, 1]` with the bands `[i−δ, i]`, the supports of γ and
/// the downward displacement `ψ(t) − t` at full perturbation strength.
pub fn perturbation_diagram(system: &SkewSystem, canvas: usize) -> String {
    let p = system.params();
    let (w, h) = (canvas as f64, canvas as f64 / 2.0);
    let mut s = header(canvas, canvas / 2, "perturbation: gamma supports, trapping bands, displacement");
    let margin = 0.06 * w;
    let x_of = |t: f64| margin + (t + 1.0) / 2.0 * (w - 2.0 * margin);
    let axis_y = 0.7 * h;
    let band = |s: &mut String, lo: f64, hi: f64, color: &str, class: &str, y: f64, hh: f64| {
        let _ = writeln!(
            s,
            "<rect class=\"{class}\" x=\"{:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{hh:.2}\" fill=\"{color}\" opacity=\"0.5\"/>",
            x_of(lo),
            x_of(hi) - x_of(lo)
        );
    };
    for i in [0.0, 1.0] {
        band(&mut s, i - p.delta, i, "gold", "band", axis_y - 0.05 * h, 0.1 * h);
    }
    let tau = p.tau;
    for (lo, hi) in [(-1.0, -1.0 + tau), (-tau, tau), (1.0 - tau, 1.0)] {
        band(&mut s, lo, hi, "tomato", "gamma-support", axis_y - 0.12 * h, 0.05 * h);
    }
    let _ = writeln!(
        s,
        "<line x1=\"{:.2}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
        x_of(-1.0),
        x_of(1.0)
    );
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{:.1}\" text-anchor=\"middle\">{t}</text>",
            x_of(t),
            axis_y + 0.12 * h,
            0.03 * w
        );
    }
    // Displacement arrows, horizontally exaggerated to the support width.
    let samples = 41;
    let disp: Vec<(f64, f64)> = [(-tau, tau), (1.0 - tau, 1.0 + tau)]
        .iter()
        .flat_map(|&(lo, hi)| {
            (0..samples).map(move |k| lo + (hi - lo) * (k as f64 + 0.5) / samples as f64)
        })
        .map(|t| (t, system.psi_with_alpha(1.0, t).value - t))
        .collect();
    let max = disp.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    if max > 0.0 {
        let scale = 0.9 * tau / max;
        for (t, d) in disp {
            let t = if t > 1.0 { t - 2.0 } else { t };
            let (x0, x1) = (x_of(t), x_of(t + d * scale));
            let y = axis_y - 0.25 * h;
            if (x1 - x0).abs() < 0.5 {
                continue;
            }
            let _ = writeln!(
                s,
                "<line class=\"displacement\" x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" stroke=\"darkred\"/>"
            );
            arrow_head(&mut s, x1, y, x1 - x0, 0.0, 0.008 * w, "darkred");
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{margin:.2}\" y=\"{:.2}\" font-size=\"{:.1}\">rho = {}, tau = {:.6}, delta = {}</text>",
        0.12 * h,
        0.03 * w,
        p.rho,
        p.tau,
        p.delta
    );
    s.push_str("</svg>\n");
    s
}

/// Fiber coordinate along a strong leaf against arclength.
pub fn leaf_profile(leaf: &LeafPolyline, band: (f64, f64), canvas: usize) -> String {
    let (w, h) = (canvas as f64, canvas as f64 / 2.0);
    let mut s = header(canvas, canvas / 2, "strong unstable leaf: fiber coordinate against arclength");
    let margin = 0.08 * w;
    let (s_lo, s_hi) = (
        leaf.s.first().copied().unwrap_or(-1.0),
        leaf.s.last().copied().unwrap_or(1.0),
    );
    let (t_lo, t_hi) = (band.0.min(band.1), band.0.max(band.1));
    let pad = 0.1 * (t_hi - t_lo).max(1e-9);
    let (y_lo, y_hi) = (t_lo - pad, t_hi + pad);
    let x_of = |v: f64| margin + (v - s_lo) / (s_hi - s_lo).max(1e-12) * (w - 2.0 * margin);
    let y_of = |t: f64| h - margin - (t - y_lo) / (y_hi - y_lo) * (h - 2.0 * margin);
    for (t, label) in [(band.0, "lower bound"), (band.1, "upper bound")] {
        let _ = writeln!(
            s,
            "<line class=\"bound\" x1=\"{margin:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"{:.1}\">{label} t = {t:.6}</text>",
            w - margin,
            margin + 4.0,
            y_of(t) - 4.0,
            0.022 * w,
            y = y_of(t)
        );
    }
    let (lo, hi) = leaf.fiber_range(0.0);
    let mut pts = String::new();
    for (sv, z) in leaf.s.iter().zip(&leaf.points) {
        let t = z.t.t();
        let _ = write!(pts, "{:.2},{:.2} ", x_of(*sv), y_of(t));
    }
    let _ = writeln!(
        s,
        "<polyline class=\"leaf\" data-samples=\"{}\" data-t-min=\"{lo:e}\" data-t-max=\"{hi:e}\" fill=\"none\" stroke=\"navy\" stroke-width=\"1\" points=\"{}\"/>",
        leaf.len(),
        pts.trim_end()
    );
    s.push_str("</svg>\n");
    s
}

/// Base-grid heatmap of the fiber width of an attractor enclosure.
pub fn enclosure_heatmap(enc: &AttractorEnclosure, canvas: usize) -> String {
    let n = enc.n_b.max(1);
    let c = canvas as f64;
    let cell = c / n as f64;
    let mut s = header(canvas, canvas, "attractor enclosure: fiber width per base square");
    let widths: Vec<f64> = enc.bounds.iter().map(|b| (b.1 - b.0).max(0.0)).collect();
    let max = widths.iter().copied().fold(0.0, f64::max);
    let min = widths.iter().copied().fold(f64::INFINITY, f64::min);
    for (idx, wd) in widths.iter().enumerate() {
        let (i, j) = (idx / n, idx % n);
        let u = if max > min { (wd - min) / (max - min) } else { 0.0 };
        let shade = (255.0 * (1.0 - u)).round() as u8;
        // Base coordinate v runs upward.
        let _ = writeln!(
            s,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"rgb(255,{shade},{shade})\"/>",
            i as f64 * cell,
            c - (j + 1) as f64 * cell,
            cell + 0.05,
            cell + 0.05
        );
    }
    let (lo, hi) = enc.hull();
    let _ = writeln!(
        s,
        "<text x=\"4\" y=\"{:.1}\" font-size=\"{:.1}\">hull [{lo:.6}, {hi:.6}], width {min:.2e} to {max:.2e}</text>",
        0.04 * c,
        0.025 * c
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{attractor_enclosure, default_trap_arcs, grow_unstable_leaf};
    use crate::system::{derive_params, BaseConfig};

    #[test]
    fn figures_are_well_formed() {
        let sys = SkewSystem::new(derive_params(BaseConfig::default()).params).unwrap();
        let a = theta_portrait(400);
        assert_eq!(a.matches("class=\"fixed-point\"").count(), 2);
        let b = perturbation_diagram(&sys, 400);
        assert_eq!(b.matches("class=\"band\"").count(), 2);
        assert!(b.contains("class=\"displacement\""));
        let leaf = grow_unstable_leaf(&sys, 0.0, 1.0, 1e-3).unwrap();
        let c = leaf_profile(&leaf, (-0.1, 0.0), 400);
        assert!(c.contains("data-samples"));
        let enc = attractor_enclosure(&sys, default_trap_arcs(0.1)[0], 8, 3);
        let d = enclosure_heatmap(&enc, 400);
        assert_eq!(d.matches("<rect x=").count(), 64);
        for svg in [a, b, c, d] {
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
            assert!(!svg.contains("NaN") && !svg.contains("inf"));
        }
        assert!(check_canvas(0).is_err());
    }
}
