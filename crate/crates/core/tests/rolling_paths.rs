use noslip_core::algebra::MassParams;
use noslip_core::geometry::CrossSection;
use noslip_core::rolling::{
    circular_closed_form, integrate_rolling, integrate_rolling_every, measured_period_ratio, period_ratio,
    RollingState,
};

fn start(omega_e: f64) -> RollingState {
    RollingState { s: 0.0, h: 0.2, sigma: 0.5, omega_nu: -0.3, omega_e, t: 0.0 }
}

#[test]
fn rk4_matches_circular_closed_form_over_ten_periods() {
    for g in [0.0, 1.0] {
        let p = MassParams::new(3, 0.5, 1.0, 0.4f64.sqrt(), g).unwrap();
        let sec = CrossSection::circle(1.0).unwrap();
        let init = start(4.0);
        let closed = circular_closed_form(&init, 1.0, &p).unwrap();
        let t_end = 10.0 * closed.vertical_period();
        let path = integrate_rolling(&init, &sec, &p, 1e-4, t_end).unwrap();
        let worst = path.iter().map(|s| (s.h - closed.height(s.t)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "g {g}: max |dh| {worst:e}");
        let last = path.last().unwrap();
        assert!((last.t - t_end).abs() < 1e-12);
        assert!((last.sigma - closed.sigma(last.t)).abs() < 1e-8);
        assert!((last.omega_nu - closed.omega_nu(last.t)).abs() < 1e-8);
        assert!(path.iter().all(|s| s.omega_e == init.omega_e));
    }
}

#[test]
fn harmonic_invariant_is_conserved_without_gravity() {
    let p = MassParams::new(3, 0.5, 1.0, 0.4f64.sqrt(), 0.0).unwrap();
    let sec = CrossSection::circle(1.0).unwrap();
    let init = start(4.0);
    let closed = circular_closed_form(&init, 1.0, &p).unwrap();
    let invariant = |s: &RollingState| {
        let z = s.h + closed.c1 / closed.c0;
        s.sigma * s.sigma + closed.c0 * z * z
    };
    let i0 = invariant(&init);
    let path = integrate_rolling(&init, &sec, &p, 1e-4, 50.0).unwrap();
    let worst = path.iter().map(|s| (invariant(s) - i0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "invariant drift {worst:e}");
}

#[test]
fn measured_period_ratio_matches_formula() {
    let p = MassParams::new(3, 0.5, 1.0, 0.4f64.sqrt(), 1.0).unwrap();
    assert!((period_ratio(&p) - 3.5f64.sqrt()).abs() < 1e-15);
    assert!((period_ratio(&p) - 1.870_828_7).abs() < 1e-7);
    let sec = CrossSection::circle(1.0).unwrap();
    let init = start(4.0);
    let closed = circular_closed_form(&init, 1.0, &p).unwrap();
    let path = integrate_rolling(&init, &sec, &p, 1e-4, 10.0 * closed.vertical_period()).unwrap();
    let ratio = measured_period_ratio(&path, -closed.c1 / closed.c0, sec.perimeter().unwrap()).unwrap();
    assert!((ratio - period_ratio(&p)).abs() < 1e-6, "ratio {ratio}");
}

#[test]
fn stadium_rolling_stays_bounded() {
    let p = MassParams::new(3, 0.3, 1.0, 0.4f64.sqrt(), 1.0).unwrap();
    let sec = CrossSection::stadium(1.0, 1.5).unwrap();
    for omega_e in [-3.0, 2.0, 6.0] {
        let init = start(omega_e);
        let path = integrate_rolling_every(&init, &sec, &p, 1e-3, 1000.0, 100).unwrap();
        let (lo, hi) = path.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.h), h.max(s.h)));
        assert!(lo.is_finite() && hi.is_finite());
        // compare the spread of the first and last fifths of the run
        let fifth = path.len() / 5;
        let spread = |xs: &[RollingState]| {
            let (l, h) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.h), h.max(s.h)));
            h - l
        };
        let early = spread(&path[..fifth]);
        let late = spread(&path[path.len() - fifth..]);
        assert!(late < 2.0 * early + 1e-9, "omega_e {omega_e}: spread {early} -> {late}");
        assert!(hi - lo < 100.0, "omega_e {omega_e}: range {lo} .. {hi}");
    }
}

#[test]
fn plates_are_not_rollable() {
    let p = MassParams::new(3, 0.3, 1.0, 0.4f64.sqrt(), 1.0).unwrap();
    let sec = CrossSection::plates(1.0, 2).unwrap();
    assert!(integrate_rolling(&start(1.0), &sec, &p, 1e-3, 1.0).is_err());
}
