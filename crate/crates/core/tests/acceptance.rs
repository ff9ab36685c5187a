//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line with
//! the measured figures before asserting.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transfield::extension::{
    boundary_residual, discrete_eigen_residual, eigen_residual, eval_p_free, eval_p_kappa, forward_transform,
    inverse_transform, bound_state, ExtensionParam, LambdaParams, SpectralFamily,
};
use transfield::fieldops::{
    decompose, divergence_residual, project_transverse, reconstruct, spherical_components, ComplexProfile,
    LongitudinalField, SampledVectorField, Transversality, TransverseField,
};
use transfield::fock::{
    apply_annihilate, apply_create, build_n_particle, eigen_check, vacuum_state, FockCoefficients, ModeState,
    ModeSystem,
};
use transfield::quadform::{form_q, form_q_kappa_limit, surface_limit, LimitParams, SURFACE_KAPPA};
use transfield::radial::{
    apply_tl, apply_tl_inverse, inner_angle, inner_plain, Decay, GridParams, RadialFunction, RadialGrid,
};
use transfield::sphere::{
    angular_laplacian_action, laplacian_action_defect, vsh_gram, AngularQuadrature, SphericalIndex, VshKind,
};
use transfield::Execution;

fn verdict(n: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {n:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::mapped(&GridParams::default()).unwrap())
}

fn idx(l: usize, m: i64) -> SphericalIndex {
    SphericalIndex::new(l, m).unwrap()
}

/// Smooth bump supported on `[c - a, c + a]`.
fn bump(c: f64, a: f64) -> impl Fn(f64) -> f64 {
    move |r| {
        let x = (r - c) / a;
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }
}

fn weighted_l2(g: &RadialGrid, f: &[f64]) -> f64 {
    let w = g.weights();
    g.interior().map(|i| w[i] * f[i] * f[i]).sum::<f64>().sqrt()
}

#[test]
fn c01_vsh_orthonormality() {
    let quad = AngularQuadrature::for_l_max(8);
    let gram = vsh_gram(8, &quad);
    let d = gram.identity_defect();
    verdict(1, "VSH orthonormality, l_max = 8", d <= 1e-9, format!("Gram dim {}, max |G - I| = {d:.3e} (tol 1e-9)", gram.dim()));
}

#[test]
fn c02_angular_laplacian() {
    let mut coeffs_ok = true;
    for l in 1..=4usize {
        let k = idx(l, 0);
        let lt = k.ltilde();
        let l2 = (l * (l + 1)) as f64;
        let find = |kind, target| {
            angular_laplacian_action(kind, k).iter().find(|(t, _)| *t == target).map(|(_, c)| *c).unwrap_or(0.0)
        };
        coeffs_ok &= find(VshKind::Phi, VshKind::Phi) == l2;
        coeffs_ok &= find(VshKind::Upsilon, VshKind::Psi) == find(VshKind::Psi, VshKind::Upsilon);
        coeffs_ok &= (find(VshKind::Upsilon, VshKind::Psi) + 2.0 * lt).abs() < 1e-15;
        coeffs_ok &= find(VshKind::Upsilon, VshKind::Upsilon) == 2.0 + l2;
        coeffs_ok &= find(VshKind::Psi, VshKind::Psi) == l2;
    }
    let d = laplacian_action_defect(4, 1e-2);
    verdict(
        2,
        "angular Laplacian mixing, l <= 4",
        coeffs_ok && d <= 1e-6,
        format!("finite-difference defect {d:.3e} (tol 1e-6), symmetric -2l̃ coupling {coeffs_ok}"),
    );
}

#[test]
fn c03_form_identity() {
    let g = grid();
    // Half-widths of at least 3 keep the edge layers of the bumps resolved on
    // the default grid.
    let pairs = [
        ((4.0, 3.0), (4.5, 3.3)),
        ((5.0, 4.0), (5.0, 4.0)),
        ((6.0, 4.5), (7.0, 5.0)),
        ((3.5, 3.0), (8.0, 6.0)),
        ((10.0, 8.0), (9.0, 7.5)),
        ((12.0, 6.0), (8.0, 5.0)),
        ((7.0, 3.5), (6.0, 3.0)),
        ((15.0, 10.0), (10.0, 9.0)),
        ((20.0, 12.0), (18.0, 15.0)),
        ((4.0, 3.2), (14.0, 12.0)),
    ];
    let mut worst: f64 = 0.0;
    for ((c1, a1), (c2, a2)) in pairs {
        let u = RadialFunction::from_fn(&g, Decay::Exponential, bump(c1, a1));
        let v = RadialFunction::from_fn(&g, Decay::Exponential, bump(c2, a2));
        let lhs = inner_angle(1, &u, &v).unwrap();
        let rhs = inner_plain(&u, &apply_tl(1, &v)).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    verdict(3, "⟨u,v⟩_1 = (u, T_1 v) on 10 bump pairs", worst <= 1e-8, format!("max difference {worst:.3e} (tol 1e-8)"));
}

#[test]
fn c04_inverse_kernel() {
    let g = grid();
    let fs: Vec<(&str, RadialFunction)> = vec![
        ("r^2 e^-r", RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp())),
        ("r^3 e^-r^2", RadialFunction::from_fn(&g, Decay::Exponential, |r| r.powi(3) * (-r * r).exp())),
        ("bump(4, 3)", RadialFunction::from_fn(&g, Decay::Exponential, bump(4.0, 3.0))),
        ("bump(8, 6)", RadialFunction::from_fn(&g, Decay::Exponential, bump(8.0, 6.0))),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, f) in &fs {
        let back = apply_tl(1, &apply_tl_inverse(1, f));
        let diff: Vec<f64> = back.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
        let rel = weighted_l2(&g, &diff) / weighted_l2(&g, f.values());
        worst = worst.max(rel);
        detail.push(format!("{name}: {rel:.2e}"));
    }
    verdict(4, "T_1 T_1^{-1} f = f", worst <= 1e-6, format!("{} (tol 1e-6)", detail.join(", ")));
}

#[test]
fn c05_extension_family() {
    let g = grid();
    let lambdas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let kappas = [-2.0, -0.5, 0.5, 1.0, 5.0];
    let mut worst_eig: f64 = 0.0;
    let mut worst_bc: f64 = 0.0;
    for &kappa in &kappas {
        for &lambda in &lambdas {
            let param = ExtensionParam::Finite(kappa);
            worst_eig = worst_eig.max(eigen_residual(param, lambda, &g).unwrap());
            let p = RadialFunction::from_fn(&g, Decay::Unknown, |r| eval_p_kappa(lambda, kappa, r));
            // Slope and curvature fitted from the samples, not the closed form.
            let e = p.endpoint();
            let fitted = boundary_residual(e.slope, e.curvature, kappa).kappa_restored;
            worst_bc = worst_bc.max(fitted);
        }
    }
    verdict(
        5,
        "Ť_{1κ} p = λ² p on the 5×5 probe grid",
        worst_eig <= 1e-7 && worst_bc <= 1e-6,
        format!("max eigen-residual {worst_eig:.3e} (tol 1e-7), max boundary residual {worst_bc:.3e} (tol 1e-6)"),
    );
}

#[test]
fn c06_discrete_mode() {
    let g = grid();
    let mut detail = Vec::new();
    let mut pass = true;
    for kappa in [-1.0, -2.0] {
        let q = bound_state(kappa, &g).unwrap();
        let norm = inner_angle(1, &q, &q).unwrap();
        let res = discrete_eigen_residual(kappa, &g).unwrap();
        pass &= (norm - 1.0).abs() <= 1e-8 && res <= 1e-8;
        detail.push(format!("κ={kappa}: ⟨q,q⟩_1-1 = {:.2e}, residual {res:.2e}", norm - 1.0));
    }
    verdict(6, "bound state, eigenvalue -κ²", pass, format!("{} (tol 1e-8)", detail.join("; ")));
}

#[test]
fn c07_friedrichs_limit() {
    let g = grid();
    let sup = |kappa: f64| {
        g.nodes().iter().map(|&r| (eval_p_kappa(1.0, kappa, r) - eval_p_free(1, 1.0, r)).abs()).fold(0.0, f64::max)
    };
    let (d16, d32, d64) = (sup(16.0), sup(32.0), sup(64.0));
    let (r1, r2) = (d16 / d32, d32 / d64);
    let ok = |r: f64| (1.6..=2.4).contains(&r);
    verdict(
        7,
        "Friedrichs limit κ → ∞ at λ = 1",
        ok(r1) && ok(r2),
        format!("sup differences {d16:.3e}, {d32:.3e}, {d64:.3e}; ratios {r1:.3}, {r2:.3} (want 2 ± 20%)"),
    );
}

#[test]
fn c08_transform_pair() {
    let g = grid();
    let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
    let exact = inner_angle(1, &u, &u).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for kappa in [1.0, -1.0] {
        let coarse = SpectralFamily::for_grid(ExtensionParam::Finite(kappa), &g, &LambdaParams::default()).unwrap();
        let fine = coarse.refined().unwrap();
        let mut errs = Vec::new();
        for fam in [&coarse, &fine] {
            let c = forward_transform(&u, fam).unwrap();
            let back = inverse_transform(&c, fam, &g).unwrap();
            let rt = back.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let pars = (c.norm_squared(fam).unwrap() - exact).abs() / exact;
            errs.push((rt, pars));
        }
        let (rt0, p0) = errs[0];
        let (rt1, p1) = errs[1];
        let ok = rt0 <= 1e-3 && p0 <= 1e-3 && rt0 >= 4.0 * rt1 && p0 >= 4.0 * p1;
        pass &= ok;
        detail.push(format!(
            "κ={kappa}: round trip {rt0:.2e}→{rt1:.2e} ({:.1}×), Parseval {p0:.2e}→{p1:.2e} ({:.1}×)",
            rt0 / rt1,
            p0 / p1
        ));
    }
    verdict(8, "transform round trip and Parseval", pass, detail.join("; "));
}

fn regular_field(g: &Arc<RadialGrid>) -> TransverseField {
    let u1 = RadialFunction::from_fn(g, Decay::Exponential, |r| r * r * (-r).exp());
    let w1 = RadialFunction::from_fn(g, Decay::Exponential, |r| r * r * (-0.5 * r * r).exp());
    let u2 = RadialFunction::from_fn(g, Decay::Exponential, |r| r.powi(3) * (-0.8 * r).exp());
    let mut tf = TransverseField::new(g.clone(), 2);
    for (m, c) in spherical_components([0.3, -0.4, 0.9]) {
        tf.insert(idx(1, m), ComplexProfile::from_scaled(&u1, c), ComplexProfile::from_scaled(&w1, c * 0.5))
            .unwrap();
    }
    tf.insert(
        idx(2, 1),
        ComplexProfile::from_scaled(&u2, Complex64::new(0.4, -0.2)),
        ComplexProfile::zeros(g),
    )
    .unwrap();
    tf
}

#[test]
fn c09_quadratic_form_extension() {
    let g = grid();
    let params = LimitParams::default();
    let reg = regular_field(&g);
    let q = form_q(&reg).unwrap().value;
    let mut worst_reg: f64 = 0.0;
    for kappa in [-1.0, 0.0, 1.0] {
        let r = form_q_kappa_limit(&reg, kappa, &params).unwrap();
        worst_reg = worst_reg.max((r.value - q).abs() / q.abs());
    }

    let prof = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * (1.0 + 0.5 * r) * (-r).exp());
    let sing = TransverseField::singular_l1([0.2, -0.7, 0.5], &prof).unwrap();
    let oracle = surface_limit(&sing);
    let kappas = [-1.0, 0.5, 2.0];
    let results: Vec<_> = kappas.iter().map(|&k| form_q_kappa_limit(&sing, k, &params).unwrap()).collect();
    let converged = results.iter().all(|r| r.converged);
    let mut worst_aff: f64 = 0.0;
    for i in 0..kappas.len() {
        for j in i + 1..kappas.len() {
            let expected = SURFACE_KAPPA * (kappas[j] - kappas[i]) * oracle;
            let got = results[i].value - results[j].value;
            worst_aff = worst_aff.max((got - expected).abs() / expected.abs());
        }
    }
    let d = results[0].diagnostics.unwrap();
    let pole = (d.volume_pole - d.surface_pole).abs() / d.surface_pole;
    verdict(
        9,
        "extended quadratic form",
        worst_reg <= 1e-6 && converged && worst_aff <= 1e-4 && pole <= 1e-4,
        format!(
            "regular |Q_κ-Q|/|Q| = {worst_reg:.2e} (tol 1e-6); singular converged {converged}, \
             affinity defect {worst_aff:.2e} (tol 1e-4), pole cancellation {pole:.2e}, lim S = {oracle:.6}"
        ),
    );
}

#[test]
fn c10_field_pipeline() {
    let g = grid();
    let l_max = 4;
    let quad = Arc::new(AngularQuadrature::for_l_max(l_max));
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut tf = TransverseField::new(g.clone(), l_max);
    for k in SphericalIndex::range(1, l_max) {
        let (a, b): (f64, f64) = (rng.gen_range(1.0..2.0), rng.gen_range(0.5..1.5));
        let l = k.l as i32;
        let u = RadialFunction::from_fn(&g, Decay::Exponential, move |r| r.powi(l + 1) * (-a * r).exp());
        let w = RadialFunction::from_fn(&g, Decay::Exponential, move |r| r.powi(l + 1) * (-b * r * r).exp());
        let cu = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let cw = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        tf.insert(k, ComplexProfile::from_scaled(&u, cu), ComplexProfile::from_scaled(&w, cw)).unwrap();
    }
    let f = reconstruct(&tf, &quad, Execution::Parallel);
    let back = decompose(&f, l_max, Transversality::Require { threshold: 1e-6 }, Execution::Parallel).unwrap();
    let round_trip = tf.relative_difference(&back);

    let sing_prof = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * (-r).exp());
    let sing = reconstruct(&TransverseField::singular_l1([1.0, 0.0, 0.5], &sing_prof).unwrap(), &quad, Execution::Parallel);
    let div = divergence_residual(&f).max(divergence_residual(&sing)).max(divergence_residual(&reconstruct(
        &regular_field(&g),
        &quad,
        Execution::Parallel,
    )));

    let v1 = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
    let v3 = RadialFunction::from_fn(&g, Decay::Exponential, |r| r.powi(4) * (-0.7 * r * r).exp());
    let scale = v1.max_abs().max(v3.max_abs());
    let long = LongitudinalField::new(g.clone())
        .with_potential(idx(1, -1), ComplexProfile::real(v1.clone()))
        .unwrap()
        .with_potential(idx(3, 2), ComplexProfile::from_scaled(&v3, Complex64::new(0.0, 1.0)))
        .unwrap()
        .sample(&quad);
    let killed = decompose(&long, l_max, Transversality::Project, Execution::Parallel).unwrap();
    let leak = killed.max_abs() / scale;

    let mixed_values = f.values().iter().zip(long.values()).map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]).collect();
    let mixed = SampledVectorField::from_values(g.clone(), quad.clone(), mixed_values).unwrap();
    let p1 = project_transverse(&mixed, Execution::Parallel);
    let p2 = project_transverse(&p1, Execution::Parallel);
    let idem = p2.distance(&p1).unwrap() / p1.norm();

    verdict(
        10,
        "field pipeline, l_max = 4",
        round_trip <= 1e-8 && div <= 1e-6 && leak <= 1e-8 && idem <= 1e-6,
        format!(
            "round trip {round_trip:.2e} (tol 1e-8), divergence {div:.2e} (tol 1e-6), \
             longitudinal leak {leak:.2e} (tol 1e-8), idempotency {idem:.2e} (tol 1e-6)"
        ),
    );
}

fn random_state(sys: &ModeSystem, rng: &mut ChaCha8Rng) -> ModeState {
    let mut s = ModeState::zero();
    for _ in 0..8 {
        let mut e = vec![0u8; sys.len()];
        for _ in 0..rng.gen_range(0..=4) {
            e[rng.gen_range(0..sys.len())] += 1;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        s = s.plus(&ModeState::monomial(sys, &e).unwrap().scaled(c));
    }
    s
}

#[test]
fn c11_fock_algebra() {
    let lambdas = [0.3, 0.7, 1.0, 1.6, 2.2, 3.1, 4.5];
    let kappa = -1.5;
    let sys = ModeSystem::new(&lambdas, &[kappa]).unwrap();
    assert_eq!(sys.len(), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut comm: f64 = 0.0;
    for _ in 0..10 {
        let s = random_state(&sys, &mut rng);
        for i in 0..8 {
            for j in 0..8 {
                let ab = apply_annihilate(&sys, i, &apply_create(&sys, j, &s).unwrap()).unwrap();
                let ba = apply_create(&sys, j, &apply_annihilate(&sys, i, &s).unwrap()).unwrap();
                let mut d = ab.minus(&ba);
                if i == j {
                    d = d.minus(&s.scaled(sys.modes()[i].gamma() * 2.0));
                }
                comm = comm.max(d.max_abs() / s.max_abs());
            }
        }
    }

    let continuous = ModeSystem::new(&lambdas, &[]).unwrap();
    let sum: f64 = lambdas.iter().sum();
    let vac = eigen_check(&continuous, &vacuum_state(&continuous)).eigenvalue.unwrap();
    let vac_defect = (vac - Complex64::new(sum, 0.0)).norm();

    let e0 = sys.vacuum_energy();
    let mut offsets: f64 = 0.0;
    for occupied in [vec![2usize], vec![1, 5], vec![0, 0, 6], vec![3, 7]] {
        let mut sigma = FockCoefficients::new(occupied.len());
        sigma.set(&occupied, Complex64::new(1.0, 0.0)).unwrap();
        let s = build_n_particle(&sys, &sigma).unwrap();
        let want: Complex64 = e0 + occupied.iter().map(|&i| sys.modes()[i].gamma() * 2.0).sum::<Complex64>();
        let got = eigen_check(&sys, &s).eigenvalue.unwrap();
        offsets = offsets.max((got - want).norm() / want.norm());
    }

    let single = ModeSystem::new(&[], &[kappa]).unwrap();
    let d = eigen_check(&single, &vacuum_state(&single)).eigenvalue.unwrap();
    let disc_defect = (d - Complex64::new(0.0, -kappa)).norm();

    verdict(
        11,
        "Fock algebra",
        comm <= 1e-13 && vac_defect <= 4.0 * f64::EPSILON * sum && offsets <= 1e-14 && disc_defect == 0.0,
        format!(
            "commutator {comm:.2e}, vacuum Σλ defect {vac_defect:.2e}, n-particle offset defect {offsets:.2e}, \
             discrete eigenvalue {d} for κ = {kappa}"
        ),
    );
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut files: Vec<(PathBuf, Vec<u8>)> = entries
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn c12_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = dir.path().join("config.json");
    let cfg = format!(
        r#"{{"grid": {{"nodes": 1024}}, "l_max": 2, "kappas": [1.0, -1.0], "output_dir": {:?}}}"#,
        out.to_str().unwrap()
    );
    std::fs::write(&cfg_path, cfg).unwrap();
    let bin = env!("CARGO_BIN_EXE_transfield");
    let field = out.join("field_singular.txt");
    let field_s = field.to_str().unwrap().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["print-config".into()],
        vec!["vsh-check".into()],
        vec!["spectrum".into()],
        vec!["make-field".into(), "--kind".into(), "singular".into()],
        vec!["qform".into(), "--field".into(), field_s.clone()],
        vec!["decompose".into(), "--field".into(), field_s],
        vec!["fock-check".into()],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let o = Command::new(bin).args(args).arg("--config").arg(&cfg_path).output().unwrap();
            assert!(o.status.code().is_some_and(|c| c <= 1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            runs.push((o.stdout, snapshot(&out)));
        }
        if runs[0] != runs[1] {
            mismatches.push(args[0].clone());
        }
    }
    verdict(
        12,
        "CLI determinism",
        mismatches.is_empty(),
        format!("{} commands run twice, differing outputs: {mismatches:?}", commands.len()),
    );
}
