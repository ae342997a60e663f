use std::sync::Arc;

use nclg::characteristics::{build_feet, rk_step, RkConfig, RkOrder, StepSchedule, VelocityField};
use nclg::fem::{build_space, LagrangeSpace};
use nclg::geometry::{build_uniform_square_mesh, simplex_quadrature, DiagonalSplit, DomainBox};
use nclg::harness::rotating_wave_velocity;

fn space(n: usize, k: usize) -> LagrangeSpace<f64> {
    let mesh = build_uniform_square_mesh(DomainBox::symmetric_unit(), n, DiagonalSplit::default())
        .unwrap();
    build_space(Arc::new(mesh), k).unwrap()
}

/// Flow map by 400 classical RK4 substeps per unit of backward time.
fn reference_foot(u: &VelocityField<f64>, x: [f64; 2], t: f64, span: f64) -> [f64; 2] {
    let m = (400.0 * span).ceil().max(1.0) as usize;
    let h = -span / m as f64;
    (0..m).fold(x, |y, s| {
        rk_step(RkOrder::Classic4, u, y, t + s as f64 * h, h)
    })
}

/// A field whose backward trajectories stay well inside the box over the
/// tested spans, so no projection interferes.
fn gentle() -> VelocityField<f64> {
    VelocityField::new(
        |x: [f64; 2], t| {
            [
                0.3 * (t - x[1]).sin() * (1.0 - x[0] * x[0]),
                0.2 * x[0] * (1.0 - x[1] * x[1]),
            ]
        },
        |x, t| -0.6 * x[0] * (t - x[1]).sin() - 0.4 * x[0] * x[1],
    )
}

fn max_foot_error(n: usize, k: usize) -> f64 {
    let s = space(n, k);
    let u = gentle();
    let (t, dt, q) = (0.4, 0.1, 2);
    let sch = StepSchedule::new(t, dt, q, 3).unwrap();
    let tr = sch.trace(&s, &u, &RkConfig::default()).unwrap();
    let quad = simplex_quadrature(6).unwrap();
    let feet = build_feet(&s, &sch, &tr, &quad, &u, true).unwrap();
    let mut worst = 0.0f64;
    for data in &feet {
        for (p, y) in data.feet.iter().enumerate() {
            let x = s
                .mesh()
                .map_to_physical(p / quad.len(), quad.points[p % quad.len()])
                .unwrap();
            let r = reference_foot(&u, x, t, data.level as f64 * dt);
            worst = worst.max((y[0] - r[0]).abs().max((y[1] - r[1]).abs()));
        }
    }
    worst
}

#[test]
fn interpolated_feet_converge_at_order_k_plus_one() {
    for k in [1, 2] {
        let (coarse, fine) = (max_foot_error(4, k), max_foot_error(8, k));
        let order = (coarse / fine).log2();
        assert!(
            order > k as f64 + 0.7,
            "k={k}: {coarse:e} {fine:e} order {order}"
        );
    }
}

#[test]
fn jacobian_matches_flow_map_determinant() {
    let s = space(6, 3);
    let u = gentle();
    let (t, dt, q) = (0.3, 0.05, 3);
    let sch = StepSchedule::new(t, dt, q, 3).unwrap();
    let tr = sch.trace(&s, &u, &RkConfig::default()).unwrap();
    let quad = simplex_quadrature(3).unwrap();
    let feet = build_feet(&s, &sch, &tr, &quad, &u, true).unwrap();
    let eps = 1e-5;
    for data in &feet {
        let span = data.level as f64 * dt;
        for p in (0..data.len()).step_by(17) {
            let x = s
                .mesh()
                .map_to_physical(p / quad.len(), quad.points[p % quad.len()])
                .unwrap();
            let d = |dx: [f64; 2]| {
                let a = reference_foot(&u, [x[0] + dx[0], x[1] + dx[1]], t, span);
                let b = reference_foot(&u, [x[0] - dx[0], x[1] - dx[1]], t, span);
                [(a[0] - b[0]) / (2.0 * eps), (a[1] - b[1]) / (2.0 * eps)]
            };
            let (c1, c2) = (d([eps, 0.0]), d([0.0, eps]));
            let det = c1[0] * c2[1] - c1[1] * c2[0];
            assert!(
                (data.jacobians[p] - det).abs() < 1e-6,
                "level {} point {p}: {} vs {det}",
                data.level,
                data.jacobians[p]
            );
        }
    }
}

#[test]
fn benchmark_jacobians_respect_divergence_bound() {
    let s = space(8, 2);
    let u = rotating_wave_velocity::<f64>();
    let c = u.c_div().unwrap();
    let quad = simplex_quadrature(5).unwrap();
    for q in 1..=5 {
        let dt = 0.02;
        let sch = StepSchedule::new(0.5, dt, q, 3).unwrap();
        let tr = sch.trace(&s, &u, &RkConfig::default()).unwrap();
        for data in build_feet(&s, &sch, &tr, &quad, &u, true).unwrap() {
            let (lo, hi) = data.jacobian_range();
            let bound = c * data.level as f64 * dt;
            assert!(lo >= (-bound).exp() && hi <= bound.exp());
        }
    }
}

#[test]
fn feet_csv_has_one_row_per_point() {
    let s = space(2, 1);
    let u = gentle();
    let sch = StepSchedule::new(0.2, 0.1, 2, 3).unwrap();
    let tr = sch.trace(&s, &u, &RkConfig::default()).unwrap();
    let quad = simplex_quadrature(2).unwrap();
    let feet = build_feet(&s, &sch, &tr, &quad, &u, true).unwrap();
    let mut buf = Vec::new();
    feet[1].write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8 * 3);
    assert!(rows
        .iter()
        .all(|r| r.starts_with("2,") && r.split(',').count() == 9));
}
