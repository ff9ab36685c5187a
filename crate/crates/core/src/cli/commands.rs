//! Command implementations. Each returns a check report and writes its data
//! files under the output directory.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{FieldKind, RunConfig, SCHEMA_VERSION};
use super::fieldfile::{read_field, write_field};
use super::report::{csv_bytes, fmt_f64, write_atomic, CheckReport};
use crate::error::{Error, Result};
use crate::extension::{
    bound_state, discrete_eigen_residual, eigen_residual, phase_shift, ExtensionParam,
};
use crate::fieldops::{
    decompose, divergence_residual, reconstruct, spherical_components, ComplexProfile,
    LongitudinalField, SampledVectorField, Transversality, TransverseField,
};
use crate::fock::{
    apply_annihilate, apply_create, build_n_particle, eigen_check, vacuum_state, FockCoefficients, ModeState,
    ModeSystem,
};
use crate::quadform::{form_q, form_q_kappa_limit, surface_limit, QuadFormResult, SURFACE_KAPPA};
use crate::radial::{inner_angle, Decay, RadialFunction};
use crate::sphere::{laplacian_action_defect, vsh_gram, SphericalIndex};

/// Finite-difference step of the angular Laplacian check.
const LAPLACIAN_STEP: f64 = 1e-2;

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn kappa_tag(kappa: f64) -> String {
    format!("{kappa}")
}

pub fn vsh_check(cfg: &RunConfig) -> Result<CheckReport> {
    let quad = cfg.quadrature()?;
    let gram = vsh_gram(cfg.l_max, &quad);
    let mut report = CheckReport::new("vsh-check");
    report.record_with_note(
        "gram_identity_defect",
        gram.identity_defect(),
        cfg.tolerances.gram,
        format!("{} harmonics, {}x{} quadrature", gram.dim(), quad.n_theta(), quad.n_phi()),
    );
    report.record("laplacian_action_defect", laplacian_action_defect(cfg.l_max, LAPLACIAN_STEP), cfg.tolerances.laplacian);
    Ok(report)
}

pub fn spectrum(cfg: &RunConfig) -> Result<CheckReport> {
    let grid = cfg.radial_grid()?;
    let mut report = CheckReport::new("spectrum");
    let header = ["kind", "lambda", "zeta", "eigenvalue", "norm", "residual"];
    for &kappa in &cfg.kappas {
        let param = ExtensionParam::Finite(kappa);
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for &lambda in &cfg.spectrum_lambdas {
            let zeta = phase_shift(lambda, kappa)?;
            let res = eigen_residual(param, lambda, &grid)?;
            worst = worst.max(res);
            rows.push(vec![
                "continuous".to_string(),
                fmt_f64(lambda),
                fmt_f64(zeta),
                fmt_f64(lambda * lambda),
                String::new(),
                fmt_f64(res),
            ]);
        }
        report.record(format!("eigen_residual[kappa={}]", kappa_tag(kappa)), worst, cfg.tolerances.eigen_residual);
        if kappa < 0.0 {
            let q = bound_state(kappa, &grid)?;
            let norm = inner_angle(1, &q, &q)?;
            let res = discrete_eigen_residual(kappa, &grid)?;
            rows.push(vec![
                "discrete".to_string(),
                String::new(),
                String::new(),
                fmt_f64(-kappa * kappa),
                fmt_f64(norm),
                fmt_f64(res),
            ]);
            report.record(format!("discrete_norm_defect[kappa={}]", kappa_tag(kappa)), (norm - 1.0).abs(), cfg.tolerances.discrete);
            report.record(format!("discrete_eigen_residual[kappa={}]", kappa_tag(kappa)), res, cfg.tolerances.discrete);
        }
        let path = out_path(cfg, &format!("spectrum_kappa_{}.csv", kappa_tag(kappa)));
        write_atomic(&path, &csv_bytes(&header, &rows)?)?;
    }
    Ok(report)
}

fn load_transverse(cfg: &RunConfig, field: &Path, report: &mut CheckReport) -> Result<TransverseField> {
    let grid = cfg.radial_grid()?;
    let quad = cfg.quadrature()?;
    let sampled = read_field(field, &grid, &quad, cfg.angle_convention)?;
    let residual = divergence_residual(&sampled);
    if residual > cfg.tolerances.divergence {
        log::warn!(
            "{}: divergence residual {residual:.3e} exceeds {:.1e}; only the transverse part is used",
            field.display(),
            cfg.tolerances.divergence
        );
    }
    report.record("divergence_residual", residual, cfg.tolerances.divergence);
    decompose(&sampled, cfg.l_max, Transversality::Project, cfg.execution)
}

#[derive(Serialize)]
struct KappaResult {
    kappa: f64,
    result: QuadFormResult,
}

#[derive(Serialize)]
struct QformOutput {
    schema_version: u32,
    /// `Q(A)` by radial assembly, present for fields regular at the origin.
    form_q: Option<f64>,
    /// `lim ∫_{∂B_r} |A|²` from the origin slopes of the l = 1 profiles.
    surface_limit: f64,
    results: Vec<KappaResult>,
}

pub fn qform(cfg: &RunConfig, field: &Path) -> Result<CheckReport> {
    let mut report = CheckReport::new("qform");
    let tf = load_transverse(cfg, field, &mut report)?;
    let q = if !tf.is_singular() { Some(form_q(&tf)?.value) } else { None };
    let s0 = surface_limit(&tf);
    let mut results = Vec::new();
    for &kappa in &cfg.kappas {
        let res = form_q_kappa_limit(&tf, kappa, &cfg.limit)?;
        let d = res.diagnostics.expect("limit evaluation carries diagnostics");
        let tag = kappa_tag(kappa);
        report.record(
            format!("richardson_error[kappa={tag}]"),
            d.richardson_error / d.richardson_scale,
            cfg.limit.tolerance,
        );
        let pole_scale = d.surface_pole.abs().max(res.value.abs()).max(f64::MIN_POSITIVE);
        report.record(
            format!("pole_cancellation[kappa={tag}]"),
            (d.volume_pole - d.surface_pole).abs() / pole_scale,
            cfg.tolerances.kappa_affinity,
        );
        if let Some(q) = q {
            report.record(format!("limit_matches_form[kappa={tag}]"), (res.value - q).abs() / q.abs().max(f64::MIN_POSITIVE), cfg.limit.tolerance);
        }
        results.push(KappaResult { kappa, result: res });
    }
    if let Some((first, rest)) = results.split_first() {
        for other in rest {
            let expected = SURFACE_KAPPA * (other.kappa - first.kappa) * s0;
            let got = first.result.value - other.result.value;
            let scale = expected.abs().max(first.result.value.abs()).max(f64::MIN_POSITIVE);
            report.record(
                format!("kappa_affinity[{},{}]", kappa_tag(first.kappa), kappa_tag(other.kappa)),
                (got - expected).abs() / scale,
                cfg.tolerances.kappa_affinity,
            );
        }
    }
    let out = QformOutput {
        schema_version: SCHEMA_VERSION,
        form_q: q,
        surface_limit: s0,
        results,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("output serialises");
    text.push('\n');
    write_atomic(&out_path(cfg, "qform.json"), text.as_bytes())?;
    Ok(report)
}

pub fn decompose_cmd(cfg: &RunConfig, field: &Path) -> Result<CheckReport> {
    let mut report = CheckReport::new("decompose");
    let tf = load_transverse(cfg, field, &mut report)?;
    let mut rows = Vec::new();
    let nodes = tf.grid().nodes();
    for (idx, ch) in tf.channels() {
        for (name, prof) in [("u", &ch.u), ("w", &ch.w)] {
            for (i, &r) in nodes.iter().enumerate() {
                let v = prof.value(i);
                rows.push(vec![
                    idx.l.to_string(),
                    idx.m.to_string(),
                    name.to_string(),
                    fmt_f64(r),
                    fmt_f64(v.re),
                    fmt_f64(v.im),
                ]);
            }
        }
    }
    let bytes = csv_bytes(&["l", "m", "channel", "r", "re", "im"], &rows)?;
    write_atomic(&out_path(cfg, "decompose.csv"), &bytes)?;
    Ok(report)
}

fn random_state(sys: &ModeSystem, degree: usize, rng: &mut ChaCha8Rng) -> ModeState {
    let mut s = ModeState::zero();
    for _ in 0..6 {
        let mut exps = vec![0u8; sys.len()];
        let d = rng.gen_range(0..=degree);
        for _ in 0..d {
            exps[rng.gen_range(0..sys.len())] += 1;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        s = s.plus(&ModeState::monomial(sys, &exps).expect("degree within cap").scaled(c));
    }
    s
}

pub fn fock_check(cfg: &RunConfig) -> Result<CheckReport> {
    let fc = &cfg.fock;
    let sys = ModeSystem::new(&fc.lambdas, &fc.discrete_kappas)?.with_max_degree(fc.max_degree);
    if fc.random_degree + 1 > fc.max_degree {
        return Err(Error::Config("random_degree must stay below max_degree".into()));
    }
    let tol = cfg.tolerances.fock;
    let mut report = CheckReport::new("fock-check");
    let vac = vacuum_state(&sys);
    let e0 = sys.vacuum_energy();
    let rel = |a: Complex64, b: Complex64| (a - b).norm() / (1.0 + b.norm());

    let ev = eigen_check(&sys, &vac);
    let measured = ev.eigenvalue.map_or(f64::INFINITY, |e| rel(e, e0));
    report.record_with_note("vacuum_eigenvalue", measured, tol, format!("{:.12}{:+.12}i", e0.re, e0.im));

    let mut killed: f64 = 0.0;
    for i in 0..sys.len() {
        killed = killed.max(apply_annihilate(&sys, i, &vac)?.max_abs());
    }
    report.record("vacuum_annihilated", killed, tol);

    for (n, &kappa) in fc.discrete_kappas.iter().enumerate() {
        let single = ModeSystem::new(&[], &[kappa])?;
        let e = eigen_check(&single, &vacuum_state(&single)).eigenvalue;
        let want = Complex64::new(0.0, -kappa);
        report.record_with_note(
            format!("discrete_vacuum_eigenvalue[{n}]"),
            e.map_or(f64::INFINITY, |e| rel(e, want)),
            tol,
            e.map_or_else(|| "not an eigenstate".to_string(), |e| format!("{:.12}{:+.12}i", e.re, e.im)),
        );
    }

    let mut ladder: f64 = 0.0;
    for i in 0..sys.len() {
        let s = apply_create(&sys, i, &vac)?;
        let want = e0 + sys.modes()[i].gamma() * 2.0;
        ladder = ladder.max(eigen_check(&sys, &s).eigenvalue.map_or(f64::INFINITY, |e| rel(e, want)));
    }
    report.record("ladder_offset", ladder, tol);

    let mut pairs: f64 = 0.0;
    for i in 0..sys.len() {
        for j in i..sys.len() {
            let sigma = FockCoefficients::new(2).with(&[i, j], Complex64::new(1.0, 0.0))?.with(&[j, i], Complex64::new(1.0, 0.0))?;
            let s = build_n_particle(&sys, &sigma)?;
            let want = e0 + (sys.modes()[i].gamma() + sys.modes()[j].gamma()) * 2.0;
            pairs = pairs.max(eigen_check(&sys, &s).eigenvalue.map_or(f64::INFINITY, |e| rel(e, want)));
        }
    }
    report.record("two_particle_offset", pairs, tol);

    let mut rng = ChaCha8Rng::seed_from_u64(fc.seed);
    let mut comm: f64 = 0.0;
    for _ in 0..fc.random_states {
        let s = random_state(&sys, fc.random_degree, &mut rng);
        let scale = s.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..sys.len() {
            for j in 0..sys.len() {
                let ab = apply_annihilate(&sys, i, &apply_create(&sys, j, &s)?)?;
                let ba = apply_create(&sys, j, &apply_annihilate(&sys, i, &s)?)?;
                let mut d = ab.minus(&ba);
                if i == j {
                    d = d.minus(&s.scaled(sys.modes()[i].gamma() * 2.0));
                }
                let g = sys.modes()[i].gamma().norm().max(1.0);
                comm = comm.max(d.max_abs() / (scale * g * (1 + fc.random_degree) as f64));
            }
        }
    }
    report.record("commutator_defect", comm, tol);
    Ok(report)
}

/// Sample field of the requested kind on the configured product grid.
pub fn build_field(cfg: &RunConfig, kind: FieldKind) -> Result<SampledVectorField> {
    let grid = cfg.radial_grid()?;
    let quad = cfg.quadrature()?;
    let f = &cfg.field;
    Ok(match kind {
        FieldKind::Zero => SampledVectorField::zeros(grid, quad),
        FieldKind::Singular => {
            let prof = RadialFunction::from_fn(&grid, Decay::Exponential, |r| r * (-r).exp());
            let tf = TransverseField::singular_l1(f.direction, &prof)?;
            reconstruct(&tf, &quad, cfg.execution).with_singular_tag(true)
        }
        FieldKind::Regular => {
            let u = RadialFunction::from_fn(&grid, Decay::Exponential, |r| r * r * (-r).exp());
            let w = RadialFunction::from_fn(&grid, Decay::Exponential, |r| r * r * (-0.5 * r * r).exp());
            let mut tf = TransverseField::singular_l1(f.direction, &u)?;
            for (m, c) in spherical_components(f.twist) {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let idx = SphericalIndex::new(1, m)?;
                let u_part = tf.channel(idx).map_or_else(|| ComplexProfile::zeros(&grid), |ch| ch.u.clone());
                tf.insert(idx, u_part, ComplexProfile::from_scaled(&w, c))?;
            }
            reconstruct(&tf, &quad, cfg.execution)
        }
        FieldKind::Longitudinal => {
            let v = RadialFunction::from_fn(&grid, Decay::Exponential, |r| r * r * (-r).exp());
            let mut lf = LongitudinalField::new(grid.clone());
            for (m, c) in spherical_components(f.direction) {
                if c != Complex64::new(0.0, 0.0) {
                    lf = lf.with_potential(SphericalIndex::new(1, m)?, ComplexProfile::from_scaled(&v, c))?;
                }
            }
            lf.sample(&quad)
        }
    })
}

pub fn make_field(cfg: &RunConfig, kind: FieldKind, output: Option<&Path>) -> Result<(CheckReport, PathBuf)> {
    let field = build_field(cfg, kind)?;
    let name = format!("field_{}.txt", serde_json::to_value(kind).expect("enum serialises").as_str().unwrap_or("field"));
    let path = output.map_or_else(|| out_path(cfg, &name), Path::to_path_buf);
    write_field(&path, &field, cfg.angle_convention)?;
    let mut report = CheckReport::new("make-field");
    let residual = divergence_residual(&field);
    let tol = if kind == FieldKind::Longitudinal { f64::INFINITY } else { cfg.tolerances.divergence };
    report.record("divergence_residual", residual, tol);
    Ok((report, path))
}
