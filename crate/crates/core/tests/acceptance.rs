//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then asserts.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use torus_mobius::cli::run_with;
use torus_mobius::coherent::{
    eigen_residual, mobius_coherent, mobius_label_value, overlap_bruteforce, overlap_theta,
    torus_coherent, two_mode_eigen_residual, CoherentLabel, Deform, MobiusLabel,
};
use torus_mobius::diagnostics::{embedding_consistency, legendre_residual, theta_approx_curve};
use torus_mobius::entangle::{
    apply_d, entropy, ideal_entangled_pair, mobius_pair_ratio, oam_state, schmidt,
    torus_mobius_ratio, PipelineReport, DEFAULT_TORUS_WINDOW,
};
use torus_mobius::geometry::{mesh, Surface, TorusShape};
use torus_mobius::io::to_json_string;
use torus_mobius::lattice::{basis_state, Axis, LatticeOp, LatticeState, ModeIndex, Sign};
use torus_mobius::mechanics::{
    band_start, equator_circulation, integrate_phi_span, periods_span, Constraint, PhasePoint,
};
use torus_mobius::theta::{theta3, Theta3Params};
use torus_mobius::two_mode::TwoModeState;
use torus_mobius::Complex64;

fn verdict(id: &str, pass: bool, detail: String) {
    println!(
        "criterion {id}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn same(a: &LatticeState, b: &LatticeState) -> bool {
    a.sub(b).map(|d| d.norm() == 0.0).unwrap_or(false)
}

fn commutator(a: LatticeOp, b: LatticeOp, s: &LatticeState) -> LatticeState {
    s.apply(b).apply(a).sub(&s.apply(a).apply(b)).unwrap()
}

#[test]
fn criterion_01_algebra() {
    let start = Instant::now();
    let cutoff = 8;
    let mut failures = 0usize;
    let mut checked = 0usize;
    let ladders: Vec<LatticeOp> = Axis::BOTH
        .iter()
        .flat_map(|&a| {
            [
                LatticeOp::Ladder(a, Sign::Plus),
                LatticeOp::Ladder(a, Sign::Minus),
            ]
        })
        .collect();
    for j1 in -7..=7 {
        for j2 in -7..=7 {
            let s = basis_state(ModeIndex::new(j1, j2), cutoff).unwrap();
            let mut ok = true;
            for &i in &Axis::BOTH {
                for &k in &Axis::BOTH {
                    let up = LatticeOp::Ladder(k, Sign::Plus);
                    let down = LatticeOp::Ladder(k, Sign::Minus);
                    let delta = if i == k { 1.0 } else { 0.0 };
                    ok &= same(
                        &commutator(LatticeOp::J(i), up, &s),
                        &s.apply(up).scaled(Complex64::new(delta, 0.0)),
                    );
                    ok &= same(
                        &commutator(LatticeOp::J(i), down, &s),
                        &s.apply(down).scaled(Complex64::new(-delta, 0.0)),
                    );
                    ok &= commutator(LatticeOp::J(i), LatticeOp::J(k), &s).norm() == 0.0;
                }
                let t_j_t = s
                    .apply(LatticeOp::T)
                    .apply(LatticeOp::J(i))
                    .apply(LatticeOp::T);
                ok &= same(
                    &t_j_t,
                    &s.apply(LatticeOp::J(i)).scaled(Complex64::new(-1.0, 0.0)),
                );
                for sign in [Sign::Plus, Sign::Minus] {
                    let t_u_t = s
                        .apply(LatticeOp::T)
                        .apply(LatticeOp::Ladder(i, sign))
                        .apply(LatticeOp::T);
                    ok &= same(&t_u_t, &s.apply(LatticeOp::Ladder(i, sign.flip())));
                }
            }
            for &a in &ladders {
                for &b in &ladders {
                    ok &= commutator(a, b, &s).norm() == 0.0;
                }
            }
            checked += 1;
            if !ok {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0 && elapsed < Duration::from_secs(1);
    verdict(
        "1",
        pass,
        format!("{checked} basis vectors, {failures} failures, {elapsed:?}"),
    );
    assert!(pass);
}

fn label_grid() -> Vec<CoherentLabel> {
    let mut out = Vec::new();
    for l in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for a in [0.0, 1.3, 2.6, 3.9, 5.2] {
            out.push(CoherentLabel::new(l, a).unwrap());
        }
    }
    out
}

#[test]
fn criterion_02_eigen_residuals() {
    let start = Instant::now();
    let grid = label_grid();
    let mut worst: f64 = 0.0;
    for (n, a) in grid.iter().enumerate() {
        let b = grid[(n * 7 + 3) % grid.len()];
        let z = [*a, b];
        let w = [b, *a];
        for axis in Axis::BOTH {
            worst = worst.max(eigen_residual(&z, axis, 10).unwrap());
            worst = worst.max(two_mode_eigen_residual(&z, &w, axis, 10).unwrap());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst < 1e-12 && elapsed < Duration::from_secs(5);
    verdict(
        "2",
        pass,
        format!(
            "max residual {worst:.3e} over {} labels, {elapsed:?}",
            grid.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_theta_oracle() {
    let start = Instant::now();
    let grid = label_grid();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for (n, a) in grid.iter().enumerate() {
        let z = [*a, grid[(n + 11) % grid.len()]];
        let z2 = [
            grid[(n * 3 + 1) % grid.len()],
            grid[(n * 7 + 5) % grid.len()],
        ];
        let brute = overlap_bruteforce(
            &torus_coherent(&z, 10).unwrap(),
            &torus_coherent(&z2, 10).unwrap(),
        )
        .unwrap();
        let theta = overlap_theta(&z, &z2).unwrap();
        worst = worst.max((brute - theta).norm() / brute.norm().max(1.0));
        pairs += 1;
    }
    let direct: f64 = (-60i32..=60).map(|n| (-(n * n) as f64).exp()).sum();
    let t = theta3(Theta3Params::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 1.0 / PI),
    ))
    .unwrap();
    let elapsed = start.elapsed();
    let pass = pairs >= 25
        && worst < 1e-12
        && (t.re - 1.77263721).abs() < 1e-8
        && (t.re - direct).abs() < 1e-8
        && t.im.abs() < 1e-15
        && elapsed < Duration::from_secs(1);
    verdict(
        "3",
        pass,
        format!(
            "{pairs} pairs, max rel diff {worst:.3e}, theta3(0, i/pi) = {:.10}, {elapsed:?}",
            t.re
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_gaussian_approximation() {
    let curve = theta_approx_curve(1.0, 200).unwrap();
    let worst = curve
        .iter()
        .map(|p| p.relative_error.abs())
        .fold(0.0, f64::max);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta-approx.json");
    std::fs::write(&path, to_json_string(&curve).unwrap()).unwrap();
    let back: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let emitted = back.as_array().map(|a| a.len()) == Some(curve.len());
    let pass = worst < 2e-4 && emitted;
    verdict(
        "4",
        pass,
        format!("max relative error {worst:.3e} over {} points", curve.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_05_entanglement() {
    let start = Instant::now();
    let pair = ideal_entangled_pair(ModeIndex::new(1, 0), ModeIndex::new(2, 0), 8).unwrap();
    let h_pair = entropy(&schmidt(&pair)).unwrap();
    let h_oam = entropy(&schmidt(&oam_state(&[0.2; 5]).unwrap())).unwrap();
    let o = ModeIndex::ORIGIN;
    let input =
        TwoModeState::from_amplitudes((8, 8), [((o, o), Complex64::new(1.0, 0.0))]).unwrap();
    let h_d: Vec<f64> = (0..5)
        .map(|n| entropy(&schmidt(&apply_d(n, Axis::One, Axis::One, &input).unwrap())).unwrap())
        .collect();
    let z = [
        CoherentLabel::new(0.3, 1.0).unwrap(),
        CoherentLabel::new(-0.4, 2.0).unwrap(),
    ];
    let w = [
        CoherentLabel::new(0.0, 0.5).unwrap(),
        CoherentLabel::new(0.7, 4.0).unwrap(),
    ];
    let product = TwoModeState::product(
        &torus_coherent(&z, 8).unwrap(),
        &torus_coherent(&w, 8).unwrap(),
    );
    let basis_product = TwoModeState::product(
        &basis_state(ModeIndex::new(1, 2), 8).unwrap(),
        &basis_state(ModeIndex::new(-3, 0), 8).unwrap(),
    );
    let h_prod = [
        entropy(&schmidt(&product)).unwrap(),
        entropy(&schmidt(&basis_product)).unwrap(),
    ];
    let elapsed = start.elapsed();
    let pass = (h_pair - LN_2).abs() < 1e-12
        && (h_oam - 5f64.ln()).abs() < 1e-12
        && h_d.iter().all(|h| (h - LN_2).abs() < 1e-12)
        && h_prod.iter().all(|h| *h == 0.0)
        && elapsed < Duration::from_secs(1);
    verdict(
        "5",
        pass,
        format!(
            "pair {h_pair:.15}, oam {h_oam:.15}, D^n {h_d:?}, products {h_prod:?}, {elapsed:?}"
        ),
    );
    assert!(pass);
}

fn lambdas(r: &PipelineReport) -> [f64; 2] {
    [r.left.lambda, r.right.lambda]
}

fn default_mobius_run(s: Sign, sp: Sign, cutoff: u32) -> [f64; 2] {
    let xi = MobiusLabel::new(0.0, 0.5, 0.0).unwrap();
    let xi2 = MobiusLabel::new(0.2, 0.5, 1.0).unwrap();
    lambdas(&mobius_pair_ratio(s, sp, &xi, &xi2, cutoff).unwrap())
}

fn default_torus_mobius_run(cutoff: u32) -> [f64; 2] {
    let a = CoherentLabel::new(0.1, 0.5).unwrap();
    let xi = MobiusLabel::new(0.0, 0.5, 0.0).unwrap();
    let op = LatticeOp::Ladder(Axis::One, Sign::Plus);
    lambdas(&torus_mobius_ratio(op, op, &[a, a], &xi, cutoff, DEFAULT_TORUS_WINDOW).unwrap())
}

#[test]
fn criterion_06_measurement_determinism() {
    type Run = (String, [f64; 2], [f64; 2], [f64; 2]);
    let mut runs: Vec<Run> = Vec::new();
    for s in [Sign::Plus, Sign::Minus] {
        for sp in [Sign::Plus, Sign::Minus] {
            runs.push((
                format!("mobius {s:?}/{sp:?}"),
                default_mobius_run(s, sp, 8),
                default_mobius_run(s, sp, 8),
                default_mobius_run(s, sp, 10),
            ));
        }
    }
    runs.push((
        "torus-mobius".into(),
        default_torus_mobius_run(8),
        default_torus_mobius_run(8),
        default_torus_mobius_run(10),
    ));
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (_, a, b, c) in &runs {
        for k in 0..2 {
            pass &= a[k].is_finite() && a[k].to_bits() == b[k].to_bits();
            worst = worst.max((a[k] - c[k]).abs());
        }
    }
    pass &= worst < 1e-10;
    verdict(
        "6",
        pass,
        format!(
            "{} pipelines bit-identical, max change 8->10 {worst:.3e}",
            runs.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_topology() {
    let start = Instant::now();
    let mut label_ok = true;
    for r in [0.1, 0.5, 0.9] {
        for phi in [0.0, 0.7, 2.0, 4.0, 6.0] {
            let lbl = MobiusLabel::new(0.2, r, phi).unwrap();
            let four = lbl.advanced(2);
            let two = lbl.advanced(1);
            label_ok &= mobius_label_value(&four) == mobius_label_value(&lbl);
            label_ok &= mobius_coherent(&four, 8).unwrap() == mobius_coherent(&lbl, 8).unwrap();
            label_ok &= (mobius_label_value(&two) - mobius_label_value(&lbl)).norm() > 1e-3;
            label_ok &= mobius_coherent(&two, 8)
                .unwrap()
                .sub(&mobius_coherent(&lbl, 8).unwrap())
                .unwrap()
                .norm()
                > 1e-3;
        }
    }
    let shape = TorusShape::default();
    let torus = integrate_phi_span(
        &shape,
        Constraint::None,
        &equator_circulation(&shape, 1.0),
        1e-3,
        periods_span(1.0),
    )
    .unwrap();
    let band_full = integrate_phi_span(
        &shape,
        Constraint::Mobius,
        &band_start(&shape, 1.0),
        1e-3,
        periods_span(2.0),
    )
    .unwrap();
    let band_half = integrate_phi_span(
        &shape,
        Constraint::Mobius,
        &band_start(&shape, 1.0),
        1e-3,
        periods_span(1.0),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let pass = label_ok
        && torus.error.is_none()
        && band_full.error.is_none()
        && torus.closure_gap() < 1e-6
        && band_full.closure_gap() < 1e-6
        && band_half.closure_gap() > 1e-3
        && elapsed < Duration::from_secs(10);
    verdict(
        "7",
        pass,
        format!(
            "labels {}, torus 2pi gap {:.3e}, band 4pi gap {:.3e}, band 2pi gap {:.3e}, {elapsed:?}",
            if label_ok { "ok" } else { "bad" },
            torus.closure_gap(),
            band_full.closure_gap(),
            band_half.closure_gap()
        ),
    );
    assert!(pass);
}

/// The boundary curve and the constraint-composed torus point share ring
/// radius and angle but carry the axial offset `r sin(φ/2)` with opposite
/// signs, so the distance between them is `2r|sin(φ/2)|` and this check
/// cannot pass at 1e-12.
#[test]
fn criterion_08a_embedding_consistency() {
    let mut worst: f64 = 0.0;
    let mut radial: f64 = 0.0;
    let mut axial: f64 = 0.0;
    for r in [0.25, 0.5] {
        for l in [0.0, 0.3] {
            let rep = embedding_consistency(r, l, 1000);
            worst = worst.max(rep.max_distance);
            radial = radial.max(rep.max_radial_difference);
            axial = axial.max(rep.max_axial_sum_offset);
        }
    }
    let pass = worst < 1e-12;
    verdict(
        "8a",
        pass,
        format!("max distance {worst:.3e}; ring coordinates agree to {radial:.3e}, axial offsets are negatives to {axial:.3e}"),
    );
    assert!(
        pass,
        "axial sign mismatch between the boundary curve and the constrained torus embedding"
    );
}

#[test]
fn criterion_08b_deformation_preserves_axis() {
    let shape = TorusShape {
        l: 0.3,
        ..TorusShape::default()
    };
    let mut pass = true;
    let mut roundtrip: f64 = 0.0;
    for surface in [Surface::Torus, Surface::Mobius] {
        let m = mesh(surface, &shape, 32, 12).unwrap();
        for z in [-1.0f64, -0.2, 0.5, 2.0] {
            let k = (-z).exp();
            let d = m.deformed(z);
            for (a, b) in d.vertices.iter().zip(&m.vertices) {
                pass &= a[4] == b[4] && a[2] == k * b[2] && a[3] == k * b[3];
            }
            for (a, b) in d.deformed(-z).vertices.iter().zip(&m.vertices) {
                for i in 2..5 {
                    roundtrip = roundtrip.max((a[i] - b[i]).abs());
                }
            }
        }
    }
    pass &= roundtrip <= 1e-15;
    verdict(
        "8b",
        pass,
        format!("Z fixed exactly, undeform round trip {roundtrip:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_mechanics() {
    let shape = TorusShape::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7031);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let theta: f64 = rng.random_range(0.0..TAU);
        if theta.cos().abs() < 0.1 {
            continue;
        }
        let q = [
            theta,
            rng.random_range(0.0..TAU),
            rng.random_range(-1.0..1.0),
        ];
        let qdot = [
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        worst = worst.max(legendre_residual(&shape, q, qdot).unwrap());
        n += 1;
    }
    let torus = integrate_phi_span(
        &shape,
        Constraint::None,
        &equator_circulation(&shape, 1.0),
        1e-3,
        periods_span(10.0),
    )
    .unwrap();
    let tilted = PhasePoint::velocity([FRAC_PI_2 + 0.3, 0.0, 0.0], [0.0, 1.0, 0.0]);
    let off_equator =
        integrate_phi_span(&shape, Constraint::None, &tilted, 1e-3, periods_span(10.0)).unwrap();
    let band = integrate_phi_span(
        &shape,
        Constraint::Mobius,
        &band_start(&shape, 1.0),
        1e-3,
        periods_span(10.0),
    )
    .unwrap();
    let drifts = [
        torus.energy_drift(),
        off_equator.energy_drift(),
        band.energy_drift(),
    ];
    let pass = worst < 1e-12 && drifts.iter().all(|d| *d < 1e-6) && off_equator.error.is_none();
    verdict(
        "9",
        pass,
        format!("Legendre residual {worst:.3e} on {n} states, energy drifts {drifts:.3?}"),
    );
    assert!(pass);
}

fn diag_json(args: &[&str]) -> Value {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["torus-mobius", "diag"];
    full.extend_from_slice(args);
    assert_eq!(
        run_with(full, &mut out, &mut err),
        0,
        "{}",
        String::from_utf8_lossy(&err)
    );
    serde_json::from_slice(&out).unwrap()
}

fn non_empty(v: &Value) -> bool {
    match v {
        Value::Array(a) => !a.is_empty(),
        Value::Object(o) => !o.is_empty(),
        Value::Null => false,
        _ => true,
    }
}

#[test]
fn criterion_10_discrepancy_reports() {
    let m = diag_json(&["m-semantics"]);
    let xi = diag_json(&["xi-factor"]);
    let lag = diag_json(&["lagrangian"]);
    let checks = [
        ("m powers", non_empty(&m["result"]["powers"])),
        (
            "exp coefficients",
            non_empty(&m["result"]["exp_coefficients"]) && m["result"]["cosh_2"].is_number(),
        ),
        (
            "hamiltonian table",
            non_empty(&lag["result"]["hamiltonian"]),
        ),
        (
            "sign conventions",
            non_empty(&xi["result"]["sign_convention"]),
        ),
    ];
    let cosh = m["result"]["cosh_sqrt2"].as_f64().unwrap_or(f64::NAN);
    let pass = checks.iter().all(|(_, ok)| *ok) && (cosh - 2f64.sqrt().cosh()).abs() < 1e-15;
    let missing: Vec<&str> = checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    verdict(
        "10",
        pass,
        format!("reports emitted, missing {missing:?}, cosh(sqrt 2) = {cosh}"),
    );
    assert!(pass);
}
