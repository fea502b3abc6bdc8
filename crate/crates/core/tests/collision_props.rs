use noslip_core::algebra::{apply_skew, kinetic_inner, kinetic_norm_sq, wedge, MassParams, Matrix, SkewMatrix, Vector};
use noslip_core::analysis::portrait_point;
use noslip_core::collision::{
    collision_map, mixed_matrix, transverse_collide, transverse_project, MixedVelocity, ReducedState,
    TransversalState,
};
use noslip_core::geometry::CrossSection;
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(Vector::from_vec)
}

fn unit_strategy(n: usize) -> impl Strategy<Value = Vector> {
    vec_strategy(n).prop_filter("non-degenerate direction", |v| v.norm() > 0.1).prop_map(|v| &v / v.norm())
}

fn skew_strategy(n: usize) -> impl Strategy<Value = SkewMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n)
        .prop_map(move |e| SkewMatrix::from_antisymmetric_part(&Matrix::from_vec(n, n, e)).unwrap())
}

fn params_strategy(n: usize) -> impl Strategy<Value = MassParams> {
    // gamma ranges over (0, sqrt(2/n)], the admissible mass distributions
    (0.05f64..2.0, 0.1f64..=1.0)
        .prop_map(move |(r, f)| MassParams::new(n, r, 1.0, f * (2.0 / n as f64).sqrt(), 0.0).unwrap())
}

/// `(n, u, U, nu, params)` for n in 2..=4.
fn boundary_case() -> impl Strategy<Value = (usize, Vector, SkewMatrix, Vector, MassParams)> {
    (2usize..=4).prop_flat_map(|n| (Just(n), vec_strategy(n), skew_strategy(n), unit_strategy(n), params_strategy(n)))
}

fn tangent_part(v: &Vector, nu: &Vector) -> Vector {
    v - nu * v.dot(nu)
}

fn pair_dist((u1, w1): (&Vector, &SkewMatrix), (u2, w2): (&Vector, &SkewMatrix)) -> f64 {
    (u1 - u2).amax().max((w1.entries() - w2.entries()).amax())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn collision_map_is_an_involution((_, u, w, nu, p) in boundary_case()) {
        let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
        let (u2, w2) = collision_map(&u1, &w1, &nu, &p).unwrap();
        prop_assert!(pair_dist((&u2, &w2), (&u, &w)) < 1e-12);
    }

    #[test]
    fn collision_map_preserves_kinetic_energy((_, u, w, nu, p) in boundary_case()) {
        let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
        let e0 = kinetic_norm_sq(&u, &w, &p);
        prop_assert!((kinetic_norm_sq(&u1, &w1, &p) - e0).abs() < 1e-12 * e0.max(1.0));
    }

    #[test]
    fn collision_map_preserves_inner_products(
        (n, u, w, nu, p) in boundary_case(),
        seed in 0u64..1000,
    ) {
        // second vector derived deterministically from the first
        let v = Vector::from_fn(n, |i, _| ((seed + i as u64) as f64).sin());
        let x = w.scale(0.5);
        let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
        let (v1, x1) = collision_map(&v, &x, &nu, &p).unwrap();
        let before = kinetic_inner((&u, &w), (&v, &x), &p);
        let after = kinetic_inner((&u1, &w1), (&v1, &x1), &p);
        prop_assert!((before - after).abs() < 1e-12 * (1.0 + before.abs()));
    }

    #[test]
    fn no_slip_states_are_fixed((n, _u, ang, nu, p) in boundary_case()) {
        // U nu is tangent for skew U, so u = r U nu has u . nu = 0
        let u = apply_skew(&ang, &nu).unwrap() * p.r;
        prop_assert!(u.dot(&nu).abs() < 1e-12);
        let (u1, w1) = collision_map(&u, &ang, &nu, &p).unwrap();
        prop_assert!(pair_dist((&u1, &w1), (&u, &ang)) < 1e-12, "n = {n}");
    }

    #[test]
    fn complement_is_negated((n, x, _w, nu, p) in boundary_case(), normal in -2.0f64..2.0) {
        let x = tangent_part(&x, &nu);
        let u = &x + &nu * normal;
        let ang = wedge(&x, &nu).unwrap().scale(1.0 / (p.r * p.gamma2()));
        let (u1, w1) = collision_map(&u, &ang, &nu, &p).unwrap();
        prop_assert!(pair_dist((&u1, &w1), (&(-&u), &ang.scale(-1.0))) < 1e-12, "n = {n}");
    }

    #[test]
    fn projection_commutes_with_collision(
        (n, u, w, nu, p) in (3usize..=4).prop_flat_map(|n| (
            Just(n), vec_strategy(n), skew_strategy(n), unit_strategy(n - 1), params_strategy(n),
        )),
    ) {
        let mut nu_full = Vector::zeros(n);
        nu_full.rows_mut(0, n - 1).copy_from(&nu);
        let mut a = Vector::zeros(n);
        a.rows_mut(0, n - 1).copy_from(&(-&nu));
        let st = ReducedState::new(a, u, w).unwrap();
        let (u1, w1) = collision_map(&st.u, &st.ang, &nu_full, &p).unwrap();
        let after = transverse_project(&ReducedState::new(st.a.clone(), u1, w1).unwrap());
        let before = transverse_collide(&transverse_project(&st), &nu, &p).unwrap();
        prop_assert!(pair_dist((&after.u_bar, &after.spin), (&before.u_bar, &before.spin)) < 1e-12);
    }

    #[test]
    fn mixed_matrix_reproduces_longitudinal_part(
        (n, u, w, nu, p) in (3usize..=4).prop_flat_map(|n| (
            Just(n), vec_strategy(n), skew_strategy(n), unit_strategy(n - 1), params_strategy(n),
        )),
    ) {
        let mut nu_full = Vector::zeros(n);
        nu_full.rows_mut(0, n - 1).copy_from(&nu);
        let st = ReducedState::new(Vector::zeros(n), u, w).unwrap();
        let lam = MixedVelocity::from_state(&st, &p);
        let (u1, w1) = collision_map(&st.u, &st.ang, &nu_full, &p).unwrap();
        let post = MixedVelocity::from_state(&ReducedState::new(st.a.clone(), u1, w1).unwrap(), &p);
        let predicted = mixed_matrix(&nu, &p) * lam.to_vector();
        prop_assert!((predicted - post.to_vector()).amax() < 1e-12);
    }

    #[test]
    fn mixed_matrix_is_orthogonal_with_det_minus_one(
        (nu, p) in (2usize..=3).prop_flat_map(|d| (unit_strategy(d), params_strategy(d + 1))),
    ) {
        let a = mixed_matrix(&nu, &p);
        let k = a.nrows();
        prop_assert!((&a * a.transpose() - Matrix::identity(k, k)).amax() < 1e-12);
        prop_assert!((a.determinant() + 1.0).abs() < 1e-12);
        let eig = a.clone().symmetric_eigen();
        let minus = eig.eigenvalues.iter().filter(|&&e| (e + 1.0).abs() < 1e-9).count();
        let plus = eig.eigenvalues.iter().filter(|&&e| (e - 1.0).abs() < 1e-9).count();
        prop_assert_eq!((minus, plus), (1, k - 1));
    }

    #[test]
    fn portrait_points_lie_in_the_disc(
        theta in 0.0f64..std::f64::consts::TAU,
        ux in -3.0f64..3.0,
        uy in 0.0f64..3.0,
        spin in -30.0f64..30.0,
        p in params_strategy(2),
    ) {
        prop_assume!(ux.abs() + uy + spin.abs() > 1e-6);
        let sec = CrossSection::circle(1.0).unwrap();
        let f = sec.frame_at(theta).unwrap();
        let tau = f.tau.clone().unwrap();
        let u = &tau * ux + &f.nu * uy;
        let st = TransversalState::planar(f.point.clone(), u, spin).unwrap();
        let (x, y) = portrait_point(&st, &f, &p).unwrap();
        prop_assert!(x * x + y * y <= 1.0 + 1e-12);
    }
}

#[test]
fn portrait_special_points() {
    let p = MassParams::new(2, 1.0, 1.0, 0.4f64.sqrt(), 0.0).unwrap();
    let sec = CrossSection::circle(1.0).unwrap();
    let f = sec.frame_at(0.0).unwrap();
    let tau = f.tau.clone().unwrap();
    let head_on = TransversalState::planar(f.point.clone(), f.nu.clone(), 0.0).unwrap();
    assert_eq!(portrait_point(&head_on, &f, &p).unwrap(), (0.0, 0.0));
    let grazing = TransversalState::planar(f.point.clone(), tau.clone(), 0.0).unwrap();
    let (x, y) = portrait_point(&grazing, &f, &p).unwrap();
    assert!((x - 1.0).abs() < 1e-15 && y == 0.0);
    let still = TransversalState::planar(f.point.clone(), Vector::zeros(2), 0.0).unwrap();
    assert!(portrait_point(&still, &f, &p).is_err());
}
