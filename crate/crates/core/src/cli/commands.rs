use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::access::{accessibility_explore, us_leaf_obstruction_scan, AccessReport, ExploreOptions};
use crate::certificate::Certificate;
use crate::chainrec::{build_graph, certify_graph, fiber_chain_check, scc, soundness_check, BoxPartition};
use crate::error::{Error, Result};
use crate::invariants::{
    attractor_enclosure, default_trap_arcs, grow_unstable_leaf, min_displacement, minimal_u_saturated_report,
    non_transitivity_cert, trap_certificate, wandering_cert, NonTransitivityOptions,
};
use crate::system::{check_proposition, derive_params, derive_params_with, Derivation, SkewSystem, VerifyGrid};

use super::config::RunConfig;
use super::render;
use super::report::Report;

fn system_from(d: &Derivation, unperturbed: bool) -> Result<SkewSystem> {
    let params = if unperturbed {
        d.params.unperturbed()
    } else {
        d.params.clone()
    };
    SkewSystem::new(params)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

pub fn params(cfg: &RunConfig) -> Result<Report> {
    let d = derive_params(cfg.base());
    let mut r = Report::new("params");
    r.push(d.certificate.clone());
    r.sections.push(format!("[params]\n{}", d.params.to_config_string()));
    Ok(r)
}

/// Runs without automatic shrinking of ρ, so that the configured value is
/// the one being verified.
pub fn verify(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    let d = derive_params_with(cfg.base(), false);
    let sys = system_from(&d, unperturbed)?;
    let mut r = Report::new("verify");
    r.push(d.certificate);
    for c in check_proposition(&sys, VerifyGrid { n_x: cfg.grid, n_t: cfg.grid }) {
        r.push(c);
    }
    Ok(r)
}

fn chain_certificates(sys: &SkewSystem, cfg: &RunConfig) -> Result<Vec<Certificate>> {
    let n_f = cfg.n_c_fiber.max(1);
    let fiber = fiber_chain_check(sys, n_f, 2.0 * 2.0 / n_f as f64);
    let partition = BoxPartition::new(cfg.n_b, cfg.n_c)?;
    let epsilon = cfg.epsilon_factor * partition.diameter();
    let graph = build_graph(sys, partition, epsilon)?;
    let sccs = scc(&graph.csr);
    let mut cert = certify_graph(&graph, &sccs);
    let sound = soundness_check(&graph, sys, cfg.soundness_samples, cfg.seed);
    cert.check("orbit_edges_present", sound.missing == 0)
        .value("soundness_checked", sound.checked as f64)
        .value("soundness_missing", sound.missing as f64);
    Ok(vec![fiber, cert])
}

pub fn chain(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    let d = derive_params(cfg.base());
    let sys = system_from(&d, unperturbed)?;
    let mut r = Report::new("chain");
    for c in chain_certificates(&sys, cfg)? {
        r.push(c);
    }
    Ok(r)
}

fn nontransitive_certificates(sys: &SkewSystem, cfg: &RunConfig) -> Result<(Vec<Certificate>, String)> {
    let p = sys.params();
    let mut out = Vec::new();
    let arcs = default_trap_arcs(p.delta);
    for (name, arc) in ["R0", "R1", "J_star"].iter().zip(arcs) {
        let mut c = trap_certificate(sys, arc, cfg.grid).certificate;
        c.name = format!("trap.{name}");
        out.push(c);
    }

    let e0 = attractor_enclosure(sys, arcs[0], cfg.enclosure_n_b, cfg.enclosure_iterations);
    let e1 = attractor_enclosure(sys, arcs[1], cfg.enclosure_n_b, cfg.enclosure_iterations);
    let (lo0, hi0) = e0.hull();
    let (lo1, hi1) = e1.hull();
    let mut enc = Certificate::new("attractor_enclosures");
    enc.param("n_b", cfg.enclosure_n_b as f64)
        .param("iterations", cfg.enclosure_iterations as f64);
    enc.check("full_base_support", e0.full_base_support() && e1.full_base_support())
        .check("lambda0_in_band", lo0 >= -p.delta && hi0 <= 0.0)
        .check("lambda1_in_band", lo1 >= 1.0 - p.delta && hi1 <= 1.0)
        .check("disjoint", !e0.hull_arc().intersects(&e1.hull_arc()));
    enc.value("lambda0_lo", lo0)
        .value("lambda0_hi", hi0)
        .value("lambda1_lo", lo1)
        .value("lambda1_hi", hi1);
    enc.grid(format!("{0}x{0} base squares", cfg.enclosure_n_b));
    out.push(enc);

    let opts = NonTransitivityOptions {
        grid_n: cfg.grid,
        samples: cfg.n_empirical,
        iterations: cfg.iterations,
        seed: cfg.seed,
    };
    out.push(non_transitivity_cert(sys, cfg.u, cfg.v, opts)?);

    // Band of width m/2 centred on the configured point, m the displacement
    // measured just above it.
    let c = cfg.wander_center;
    let m = min_displacement(sys, c, c + 0.01, cfg.grid, 64);
    if m > 0.0 {
        let mut w = wandering_cert(sys, c - m / 4.0, c + m / 4.0, cfg.grid)?;
        w.value("measured_displacement", m);
        out.push(w);
    } else {
        let mut w = Certificate::new("wandering");
        w.margin("displacement_positive", m);
        w.note("no positive displacement near the configured centre");
        out.push(w);
    }
    let section = minimal_u_saturated_report(sys, cfg.enclosure_n_b, cfg.enclosure_iterations);
    Ok((out, section))
}

pub fn nontransitive(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    let d = derive_params(cfg.base());
    let sys = system_from(&d, unperturbed)?;
    let mut r = Report::new("nontransitive");
    let (certs, section) = nontransitive_certificates(&sys, cfg)?;
    for c in certs {
        r.push(c);
    }
    r.sections.push(section);
    Ok(r)
}

fn explore(sys: &SkewSystem, cfg: &RunConfig) -> Result<(AccessReport, Certificate)> {
    let opts = ExploreOptions {
        loops: cfg.loop_specs(),
        t0: cfg.t0,
        n_c: cfg.n_c_access,
        max_word_length: cfg.max_word_length,
        tol: cfg.tol_holonomy,
        fiber_powers: cfg.fiber_powers,
        ..Default::default()
    };
    accessibility_explore(sys, &opts)
}

/// Perturbed: the density certificate gates. Unperturbed: the control passes
/// when density fails and no invariant circle is crossed.
pub fn access(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    let d = derive_params(cfg.base());
    let sys = system_from(&d, unperturbed)?;
    let (report, density) = explore(&sys, cfg)?;
    write_file(&cfg.out_dir, "access_arcs.txt", &report.export())?;
    let mut r = Report::new("access");
    if unperturbed {
        let mut c = Certificate::new("access.negative_control");
        c.check("density_not_reached", !report.all_visited())
            .check("invariant_circles_not_crossed", !report.crossed_invariant_circles);
        c.value("visited_arcs", report.visited_count() as f64)
            .value("n_c", report.n_c as f64);
        c.note("rho = 0: su-holonomies are the identity and the fiber dynamics fixes t = 0 and t = 1");
        r.push(c);
        let mut info = String::from("[informational]\n");
        info.push_str(&density.to_text());
        r.sections.push(info);
    } else {
        r.push(density);
    }
    r.sections
        .push(us_leaf_obstruction_scan(&sys, cfg.leaf_length, cfg.leaf_tol)?);
    r.notes.push(format!(
        "arc export written to {}",
        cfg.out_dir.join("access_arcs.txt").display()
    ));
    Ok(r)
}

pub fn render(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    render::check_canvas(cfg.canvas)?;
    let d = derive_params(cfg.base());
    let sys = system_from(&d, unperturbed)?;
    let p = sys.params();
    let leaf = grow_unstable_leaf(&sys, 0.0, cfg.leaf_length, cfg.leaf_tol)?;
    let band = (-p.delta + p.tau, 0.0);
    let enc = attractor_enclosure(
        &sys,
        default_trap_arcs(p.delta)[0],
        cfg.enclosure_n_b,
        cfg.enclosure_iterations,
    );
    let files = [
        ("theta_portrait.svg", render::theta_portrait(cfg.canvas)),
        ("perturbation.svg", render::perturbation_diagram(&sys, cfg.canvas)),
        ("unstable_leaf.svg", render::leaf_profile(&leaf, band, cfg.canvas)),
        ("enclosure.svg", render::enclosure_heatmap(&enc, cfg.canvas)),
        ("unstable_leaf.txt", leaf.export()),
    ];
    let mut r = Report::new("render");
    for (name, contents) in &files {
        write_file(&cfg.out_dir, name, contents)?;
        r.notes.push(format!("wrote {}", cfg.out_dir.join(name).display()));
    }
    let (lo, hi) = leaf.fiber_range(0.0);
    let mut c = Certificate::new("render.unstable_leaf");
    c.param("arclength", cfg.leaf_length).param("tol", cfg.leaf_tol);
    c.check("within_band", lo > band.0 - 1e-6 && hi <= 0.0);
    c.value("samples", leaf.len() as f64)
        .value("t_min", lo)
        .value("t_max", hi);
    r.push(c);
    Ok(r)
}

/// Full pipeline with the three-claim summary.
pub fn report(cfg: &RunConfig, unperturbed: bool) -> Result<Report> {
    let mut r = Report::new("report");
    let mut context = String::from("[context]\n");
    let d = derive_params(cfg.base());
    let _ = writeln!(context, "params = {}", d.certificate.status());
    let _ = writeln!(context, "tau = {:e}", d.params.tau);
    let _ = writeln!(context, "rho = {:e}", if unperturbed { 0.0 } else { d.params.rho });
    let sys = system_from(&d, unperturbed)?;
    for c in check_proposition(&sys, VerifyGrid { n_x: cfg.grid, n_t: cfg.grid }) {
        let _ = writeln!(context, "verify.{} = {}", c.name, c.status());
    }
    r.sections.push(context);

    for c in chain_certificates(&sys, cfg)? {
        r.push(c);
    }
    let (certs, _) = nontransitive_certificates(&sys, cfg)?;
    for c in certs {
        r.push(c);
    }
    let (_, density) = explore(&sys, cfg)?;
    r.push(density);

    r.claim("chain_transitive", &["chain.fiber_over_p", "chain.transitive_at_scale"]);
    r.claim("accessible_at_scale", &["access.density"]);
    r.claim(
        "not_transitive",
        &["trap.R0", "trap.R1", "trap.J_star", "attractor_enclosures", "nontransitive"],
    );
    r.notes.push(
        "accessibility is certified at scale 2/n_c on the fiber over p; chain transitivity at the box scale epsilon".into(),
    );
    Ok(r)
}

/// Exit code for an error: configuration and I/O problems are usage errors,
/// computations that could not be carried out count as failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergent(_) | Error::RefinementBudget(_) | Error::NotHyperbolic(_) | Error::OversizedRectangle { .. } => 1,
        _ => 2,
    }
}
