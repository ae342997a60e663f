use std::sync::Arc;

use nclg::characteristics::VelocityField;
use nclg::fem::{build_space, integrate_field, LagrangeSpace};
use nclg::geometry::{build_uniform_square_mesh, simplex_quadrature, DiagonalSplit, DomainBox};
use nclg::harness::{relative_l2_error, rotating_wave_exact, rotating_wave_problem};
use nclg::scheme::{run, Problem, SchemeConfig, StartupMode, Variant};
use nclg::solver::SolverConfig;
use nclg::{Config32, Problem64, Space32};

fn space(n: usize, k: usize) -> LagrangeSpace<f64> {
    let mesh = build_uniform_square_mesh(DomainBox::symmetric_unit(), n, DiagonalSplit::default())
        .unwrap();
    build_space(Arc::new(mesh), k).unwrap()
}

fn tight(mut cfg: SchemeConfig<f64>) -> SchemeConfig<f64> {
    cfg.solver = SolverConfig {
        tolerance: 1e-14,
        ..Default::default()
    };
    cfg
}

/// Divergence-free and vanishing on the boundary of the unit box.
fn cellular_flow() -> VelocityField<f64> {
    VelocityField::new(
        |x: [f64; 2], t| {
            let (a, b) = (1.0 - x[0] * x[0], 1.0 - x[1] * x[1]);
            let s = 1.0 + t;
            [-4.0 * s * x[1] * a * a * b, 4.0 * s * x[0] * a * b * b]
        },
        |_, _| 0.0,
    )
    .with_div_bound(0.0)
}

#[test]
fn constant_state_is_preserved() {
    let s = space(6, 2);
    for variant in [
        Variant::Conservative,
        Variant::NonConservative,
        Variant::NonConservativeReaction,
    ] {
        for q in [1, 3] {
            let p = Problem::with_exact(
                DomainBox::symmetric_unit(),
                cellular_flow(),
                0.05,
                0.0,
                |_, _| 1.0,
                0.3,
            );
            let cfg = tight(SchemeConfig::new(q, 0.05).with_variant(variant));
            let out = run(&p, &s, &cfg, |_| {}).unwrap();
            assert!(
                out.field.coeffs().iter().all(|c| (c - 1.0).abs() < 1e-11),
                "{variant:?} q={q}"
            );
        }
    }
}

#[test]
fn mass_conserved_for_tangent_divergence_free_flow() {
    let s = space(12, 3);
    let p = Problem::with_exact(
        DomainBox::symmetric_unit(),
        cellular_flow(),
        0.01,
        0.0,
        |x, _| (-10.0 * ((x[0] - 0.3).powi(2) + x[1] * x[1])).exp(),
        0.4,
    );
    let cfg = tight(SchemeConfig::new(2, 0.05));
    let out = run(&p, &s, &cfg, |_| {}).unwrap();
    let m0 = out.diagnostics[0].mass;
    for d in &out.diagnostics {
        assert!(
            ((d.mass - m0) / m0).abs() < 1e-5,
            "n={} drift {}",
            d.n,
            (d.mass - m0) / m0
        );
    }
}

#[test]
fn source_and_reaction_reproduce_linear_in_time_solution() {
    // c = 1 + 0.1 t is exact for every BDF order and constant in space:
    // dc/dt + a0 c = 0.1 + a0 (1 + 0.1 t).
    let s = space(4, 2);
    let a0 = 0.7;
    for q in 1..=5 {
        let p = Problem::with_exact(
            DomainBox::symmetric_unit(),
            VelocityField::zero(),
            0.1,
            a0,
            |_, t| 1.0 + 0.1 * t,
            0.5,
        )
        .with_source(move |_, t| 0.1 + a0 * (1.0 + 0.1 * t));
        let out = run(&p, &s, &tight(SchemeConfig::new(q, 0.05)), |_| {}).unwrap();
        let expect = 1.0 + 0.1 * out.time;
        assert!(
            out.field
                .coeffs()
                .iter()
                .all(|c| (c - expect).abs() < 1e-11),
            "q={q}"
        );
    }
}

#[test]
fn observer_sees_every_level() {
    let s = space(4, 1);
    let p = rotating_wave_problem(0.01, 0.5);
    let mut seen = Vec::new();
    let mut feet_levels = Vec::new();
    let out = run(&p, &s, &SchemeConfig::new(2, 0.01), |r| {
        seen.push(r.diagnostics.n);
        feet_levels.push(r.feet.map(|f| f.len()));
    })
    .unwrap();
    assert_eq!(out.steps, 50);
    assert_eq!(seen, (0..=50).collect::<Vec<_>>());
    assert_eq!(feet_levels[..2], [None, None]);
    assert!(feet_levels[2..].iter().all(|f| *f == Some(2)));
    assert!((out.time - 0.5).abs() < 1e-15);
    assert_eq!(out.diagnostics.len(), 51);
    assert!(out.diagnostics[..2].iter().all(|d| d.startup));
}

#[test]
fn runge_kutta_startup_close_to_exact_startup() {
    let s = space(16, 2);
    let p = rotating_wave_problem(0.05, 0.2);
    let exact = rotating_wave_exact(0.05);
    let quad = simplex_quadrature(8).unwrap();
    for q in [2, 3] {
        let mut errs = Vec::new();
        for mode in [StartupMode::Exact, StartupMode::RungeKutta] {
            let mut cfg = SchemeConfig::new(q, 0.02);
            cfg.startup = mode;
            let out = run(&p, &s, &cfg, |_| {}).unwrap();
            errs.push(relative_l2_error(&s, &out.field, &exact, out.time, &quad));
        }
        assert!(errs[1] < 1.5 * errs[0], "q={q}: {errs:?}");
    }
}

#[test]
fn reaction_form_tracks_conservative_scheme() {
    let s = space(16, 2);
    let p = rotating_wave_problem(0.01, 0.3);
    let exact = rotating_wave_exact(0.01);
    let quad = simplex_quadrature(8).unwrap();
    let err = |v: Variant| {
        let out = run(&p, &s, &SchemeConfig::new(2, 0.02).with_variant(v), |_| {}).unwrap();
        relative_l2_error(&s, &out.field, &exact, out.time, &quad)
    };
    let (c, r, n) = (
        err(Variant::Conservative),
        err(Variant::NonConservativeReaction),
        err(Variant::NonConservative),
    );
    assert!((c - r).abs() < 0.1 * c, "{c} {r}");
    assert!(n > 10.0 * c, "{n} {c}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = space(2, 1);
    let p: Problem64 = rotating_wave_problem(0.01, 0.5);
    assert!(run(&p, &s, &SchemeConfig::new(0, 0.1), |_| {}).is_err());
    assert!(run(&p, &s, &SchemeConfig::new(6, 0.1), |_| {}).is_err());
    assert!(run(&p, &s, &SchemeConfig::new(1, 0.0), |_| {}).is_err());
    assert!(run(&p, &s, &SchemeConfig::new(1, f64::NAN), |_| {}).is_err());
    assert!(run(&p, &s, &SchemeConfig::new(3, 0.3), |_| {}).is_err());
    let mut cfg = SchemeConfig::new(1, 0.1);
    cfg.quad_degree = Some(15);
    assert!(run(&p, &s, &cfg, |_| {}).is_err());
    let mut no_exact = p.clone();
    no_exact.exact = None;
    assert!(run(&no_exact, &s, &SchemeConfig::new(2, 0.1), |_| {}).is_err());
    let mut bad_mu = p.clone();
    bad_mu.mu = -1.0;
    assert!(run(&bad_mu, &s, &SchemeConfig::new(1, 0.1), |_| {}).is_err());
}

#[test]
fn single_precision_matches_double() {
    let mesh = build_uniform_square_mesh(
        DomainBox::<f32>::symmetric_unit(),
        8,
        DiagonalSplit::default(),
    )
    .unwrap();
    let s32: Space32 = build_space(Arc::new(mesh), 2).unwrap();
    let p32 = rotating_wave_problem(0.1f32, 0.2);
    let mut cfg: Config32 = SchemeConfig::new(2, 0.05);
    cfg.solver.tolerance = 1e-6;
    let out32 = run(&p32, &s32, &cfg, |_| {}).unwrap();

    let s64 = space(8, 2);
    let out64 = run(
        &rotating_wave_problem(0.1, 0.2),
        &s64,
        &SchemeConfig::new(2, 0.05),
        |_| {},
    )
    .unwrap();
    let scale = out64
        .field
        .coeffs()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    for (a, b) in out32.field.coeffs().iter().zip(out64.field.coeffs()) {
        assert!((*a as f64 - b).abs() < 1e-4 * scale);
    }
    let m = integrate_field(&s64, &out64.field, &simplex_quadrature(6).unwrap());
    assert!((out32.diagnostics.last().unwrap().mass as f64 - m).abs() < 1e-4 * m);
}
