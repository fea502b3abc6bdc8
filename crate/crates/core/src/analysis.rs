//! Closed-form predictions and diagnostics built on the billiard recursion.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;

use crate::algebra::{MassParams, Matrix, Vector};
use crate::collision::{mixed_matrix, transverse_collide, MixedVelocity, TransversalState};
use crate::error::{check_dim, Error, Result};
use crate::flight::CollisionRow;
use crate::geometry::{BoundaryFrame, CrossSection};

const EIG_TOL: f64 = 1e-9;

/// Data of a transversally period-2 orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpec {
    /// Normal at the first collision.
    pub nu1: Vector,
    pub nu2: Vector,
    /// Mixed velocity arriving at the first collision.
    pub lambda0: MixedVelocity,
    /// Constant flight time.
    pub t: f64,
}

/// Composition order of the two collision matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QOrder {
    /// `Q = A2 A1`: first collision applied first.
    SecondFirst,
    /// `Q = A1 A2`.
    FirstSecond,
}

pub fn q_matrix(spec: &DriftSpec, params: &MassParams, order: QOrder) -> Matrix {
    let a1 = mixed_matrix(&spec.nu1, params);
    let a2 = mixed_matrix(&spec.nu2, params);
    match order {
        QOrder::SecondFirst => a2 * a1,
        QOrder::FirstSecond => a1 * a2,
    }
}

/// Orthogonal projection onto the eigenvalue-1 eigenspace of an orthogonal
/// matrix, via the symmetric part (whose eigenvalue 1 has the same
/// eigenspace).
pub fn fixed_space_projection(q: &Matrix) -> Matrix {
    eigenspace_projection(q, 1.0)
}

fn eigenspace_projection(q: &Matrix, value: f64) -> Matrix {
    let n = q.nrows();
    let sym = (q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut p = Matrix::zeros(n, n);
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if (ev - value).abs() < EIG_TOL {
            let v = eig.eigenvectors.column(i);
            p += v * v.transpose();
        }
    }
    p
}

/// Asymptotic height gained per collision, `t/2 xi P Lambda0` with
/// `xi = (1 + c, -s nu1^T)`.
pub fn drift_general_with_order(spec: &DriftSpec, params: &MassParams, order: QOrder) -> Result<f64> {
    let n = spec.nu1.len() + 1;
    check_dim(spec.nu1.len(), spec.nu2.len())?;
    check_dim(n - 1, spec.lambda0.w.len())?;
    let p = fixed_space_projection(&q_matrix(spec, params, order));
    let mut xi = Vector::zeros(n);
    xi[0] = 1.0 + params.c_beta();
    xi.rows_mut(1, n - 1).copy_from(&(&spec.nu1 * -params.s_beta()));
    Ok(0.5 * spec.t * xi.dot(&(p * spec.lambda0.to_vector())))
}

pub fn drift_general(spec: &DriftSpec, params: &MassParams) -> Result<f64> {
    drift_general_with_order(spec, params, QOrder::SecondFirst)
}

fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < PI / 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("phi must lie in (0, pi/2), got {phi}")))
    }
}

/// Drift per collision (unit flight time) of a 3-D transversal period-2
/// orbit whose chord makes angle `phi` with the normal.
///
/// `sigma0`, `omega_nu`, `omega_tau` are pre-collision values at the first
/// collision point, in that point's frame, and the other point's normal is
/// the first one rotated by `+(pi - 2 phi)`.
pub fn drift_3d(phi: f64, sigma0: f64, omega_nu: f64, omega_tau: f64, params: &MassParams) -> Result<f64> {
    check_phi(phi)?;
    let (sp, cp) = phi.sin_cos();
    let g2 = params.gamma2();
    Ok((sigma0 * sp * sp + g2 * params.r * sp * (omega_nu * cp + omega_tau * sp)) / (g2 + sp * sp))
}

/// The closed form as usually quoted,
/// `(sigma0 tan(phi) + g^2 r (omega_nu + omega_tau tan(phi))) / (tan(phi) + 2 g^2)`.
///
/// It agrees with [`drift_3d`] only at `phi = pi/4`.
pub fn drift_3d_quoted(phi: f64, sigma0: f64, omega_nu: f64, omega_tau: f64, params: &MassParams) -> Result<f64> {
    check_phi(phi)?;
    let tp = phi.tan();
    let g2 = params.gamma2();
    Ok((sigma0 * tp + g2 * params.r * (omega_nu + omega_tau * tp)) / (tp + 2.0 * g2))
}

/// Unit eigenvector of `Q` for eigenvalue 1 in the 3-D period-2 case,
/// `(s_alpha, gamma (tau1 - tau2)) / norm` with `alpha = 2 phi`.
pub fn eta_3d(phi: f64, tau1: &Vector, tau2: &Vector, params: &MassParams) -> Vector {
    let (sa, ca) = (2.0 * phi).sin_cos();
    let norm = (sa * sa + 2.0 * params.gamma2() * (1.0 + ca)).sqrt();
    let d = (tau1 - tau2) * params.gamma;
    let mut v = Vector::zeros(3);
    v[0] = sa;
    v.rows_mut(1, 2).copy_from(&d);
    v / norm
}

/// Transverse state on a circle of radius `rho` starting at arc position 0
/// whose no-slip orbit bounces between two points with period 2.
///
/// The chord makes angle `phi` with the normal (`phi = 0` is a diameter) and
/// runs clockwise, so the starting normal is the target normal rotated by
/// `+(pi - 2 phi)`; this is the orientation [`drift_3d`] assumes. The spin is `theta_dot = (u . tau) / (r gamma^2)` evaluated at the target
/// point, which makes each collision an exact velocity reversal.
pub fn period2_initials(section: &CrossSection, phi: f64, speed: f64, params: &MassParams) -> Result<TransversalState> {
    if !matches!(section, CrossSection::Circle { .. }) {
        return Err(Error::Unsupported("period-2 construction needs a circle".into()));
    }
    if !(0.0..PI / 2.0).contains(&phi) {
        return Err(Error::InvalidParameter(format!("phi must lie in [0, pi/2), got {phi}")));
    }
    if !(speed > 0.0) {
        return Err(Error::InvalidParameter(format!("speed must be positive, got {speed}")));
    }
    let f0 = section.frame_at(0.0)?;
    let tau0 = f0.tau.clone().expect("2-D frame");
    let u = (&f0.nu * phi.cos() - &tau0 * phi.sin()) * speed;
    let (hit, _) = section.next_transverse_collision(&f0.point, &u)?;
    let f1 = section.frame_at_point(&hit)?;
    let theta_dot = u.dot(f1.tau.as_ref().expect("2-D frame")) / (params.r * params.gamma2());
    let state = TransversalState::planar(f0.point.clone(), u, theta_dot)?;
    let residual = period2_residual(section, &state, params)?;
    if residual > 1e-10 {
        return Err(Error::FixedPoint { residual });
    }
    Ok(state)
}

/// Distance between a transverse state and its image after two collisions.
pub fn period2_residual(section: &CrossSection, state: &TransversalState, params: &MassParams) -> Result<f64> {
    let p2 = params.with_dim(state.a_bar.len());
    let mut s = state.clone();
    for _ in 0..2 {
        let (hit, _) = section.next_transverse_collision(&s.a_bar, &s.u_bar)?;
        let f = section.frame_at_point(&hit)?;
        s.a_bar = hit;
        s = transverse_collide(&s, &f.nu, &p2)?;
    }
    let scale = state.u_bar.norm().max(1.0);
    Ok(((&s.a_bar - &state.a_bar).norm()
        + (&s.u_bar - &state.u_bar).norm() / scale
        + (s.spin.entries() - state.spin.entries()).amax() / scale)
        .max(0.0))
}

/// Rotation entries `(a, b)` of the mixed dynamics in the rolling-impact
/// regime of a circular cylinder.
pub fn rotation_entries(nu0: &Vector, nu1: &Vector, params: &MassParams) -> (f64, f64) {
    let g2 = params.gamma2();
    let d = nu0.dot(nu1);
    let a = 1.0 - g2 / (1.0 + g2) * (1.0 - d);
    let b = -(params.gamma / (1.0 + g2)) * ((1.0 - d) * (2.0 + g2 * (1.0 + d))).max(0.0).sqrt();
    (a, b)
}

fn rotation_2d(angle: f64) -> Matrix {
    let (s, c) = angle.sin_cos();
    Matrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Height after `ell` collisions of a circular-cylinder orbit with equal
/// flight times `t` whose normals advance by the fixed rotation taking
/// `nu0` to `nu1`; `lambda0` and `h0` are taken just after collision 0.
///
/// Exact in `ell`: the recursion is summed in the eigenbasis of
/// `M = A0 R^-1`, split into its `-1` eigenline and the rotation plane.
pub fn circular_closed_height(
    ell: usize,
    lambda0: &MixedVelocity,
    h0: f64,
    t: f64,
    nu0: &Vector,
    nu1: &Vector,
    params: &MassParams,
) -> Result<f64> {
    check_dim(2, nu0.len())?;
    check_dim(2, nu1.len())?;
    if (nu0.dot(nu1).abs() - 1.0).abs() < 1e-12 {
        return Err(Error::Degenerate("nu0 = +-nu1".into()));
    }
    let closed = CircularHeights::new(lambda0, t, nu0, nu1, params)?;
    Ok(closed.height(ell, h0))
}

/// Precomputed spectral data for evaluating [`circular_closed_height`] at
/// many indices.
#[derive(Debug, Clone)]
pub struct CircularHeights {
    t: f64,
    g: f64,
    /// `-1` eigenline projections of `1^T` onto `Lambda0` and onto `1`.
    minus_l: f64,
    minus_one: f64,
    /// Rotation-plane data: basis `e` (3x2), angle of `M` there.
    angle: f64,
    row: Matrix,
    lam_plane: Vector,
    one_plane: Vector,
}

impl CircularHeights {
    pub fn new(lambda0: &MixedVelocity, t: f64, nu0: &Vector, nu1: &Vector, params: &MassParams) -> Result<Self> {
        let a0 = mixed_matrix(nu0, params);
        let ang = nu1[1].atan2(nu1[0]) - nu0[1].atan2(nu0[0]);
        let mut rinv = Matrix::identity(3, 3);
        rinv.view_mut((1, 1), (2, 2)).copy_from(&rotation_2d(-ang));
        let m = a0 * rinv;
        let pm = eigenspace_projection(&m, -1.0);
        if (pm.trace() - 1.0).abs() > 1e-6 {
            return Err(Error::Degenerate("M has no simple -1 eigenvalue".into()));
        }
        let eig = SymmetricEigen::new(Matrix::identity(3, 3) - &pm);
        let cols: Vec<usize> = (0..3).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        let mut basis = Matrix::zeros(3, 2);
        for (j, &i) in cols.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(i));
        }
        let block = basis.transpose() * &m * &basis;
        let angle = block[(1, 0)].atan2(block[(0, 0)]);
        if block.determinant() < 0.0 {
            return Err(Error::Degenerate("M restricted to the plane is not a rotation".into()));
        }
        if angle.abs() < 1e-12 {
            return Err(Error::Degenerate("M has eigenvalue 1".into()));
        }
        let mut one = Vector::zeros(3);
        one[0] = 1.0;
        let l = lambda0.to_vector();
        Ok(Self {
            t,
            g: params.g,
            minus_l: one.dot(&(&pm * &l)),
            minus_one: one.dot(&(&pm * &one)),
            angle,
            row: Matrix::from_row_slice(1, 2, (one.transpose() * &basis).as_slice()),
            lam_plane: basis.transpose() * &l,
            one_plane: basis.transpose() * &one,
        })
    }

    pub fn height(&self, ell: usize, h0: f64) -> f64 {
        let (t, g) = (self.t, self.g);
        let l = ell as f64;
        let id = Matrix::identity(2, 2);
        let b = rotation_2d(self.angle);
        let pow = |k: f64| rotation_2d(self.angle * k);
        let inv = (&id - &b).try_inverse().expect("rotation without eigenvalue 1");
        // sum_{i<ell} M^i
        let s1 = &inv * (&id - pow(l));
        // sum_{j=1}^{ell-1} (ell - j) M^j
        let s2 = if ell == 0 {
            Matrix::zeros(2, 2)
        } else {
            &b * &inv * (l - 1.0) - &b * &b * (&id - pow(l - 1.0)) * &inv * &inv
        };
        let alt = if ell % 2 == 1 { 1.0 } else { 0.0 };
        let s1_l = (&self.row * s1 * &self.lam_plane)[0] + alt * self.minus_l;
        let s2_1 = (&self.row * s2 * &self.one_plane)[0] - (ell / 2) as f64 * self.minus_one;
        h0 - l * t * t * g / 2.0 + t * s1_l - t * t * g * s2_1
    }
}

/// Heights, angular displacements and longitudinal velocities of a
/// parallel-plates run, with the line-of-contact and ellipse diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlatesLadder {
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `w . nu` with `nu` the inward normal at collision 0.
    pub omega: Vec<f64>,
    pub t: f64,
    nu0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatesDiagnostics {
    /// Largest `|dk - (-1)^j gamma dh|` over pairs `(j, j+2)`.
    pub max_line_residual: f64,
    /// Largest `|dk/dh - (-1)^j gamma|` over pairs with `|dh| >= 1e-3`.
    pub max_slope_error: f64,
    /// Largest residual of the ellipse equation over `(h_2n, h_2n+1)`.
    pub max_ellipse_residual: f64,
    pub ellipse_c: f64,
    pub energy: f64,
}

impl PlatesLadder {
    pub fn push(&mut self, row: &CollisionRow) -> Result<()> {
        if self.h.is_empty() {
            self.nu0 = row.nu.clone();
            self.t = row.flight_time;
            self.k.push(0.0);
        } else {
            let j = self.h.len() - 1;
            self.k.push(self.k[j] + self.t * self.omega[j]);
        }
        if row.w.len() != self.nu0.len() {
            return Err(Error::DimensionMismatch { expected: self.nu0.len(), found: row.w.len() });
        }
        let omega = row.w.iter().zip(&self.nu0).map(|(a, b)| a * b).sum();
        self.h.push(row.height);
        self.sigma.push(row.sigma);
        self.omega.push(omega);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Line-of-contact and ellipse checks; `E` and `c` come from the first
    /// two rows.
    pub fn diagnostics(&self, params: &MassParams) -> Result<PlatesDiagnostics> {
        if self.len() < 3 {
            return Err(Error::Precondition("need at least three collisions".into()));
        }
        let gamma = params.gamma;
        let mut max_line: f64 = 0.0;
        let mut max_slope: f64 = 0.0;
        for j in 0..self.len() - 2 {
            let dh = self.h[j + 2] - self.h[j];
            let dk = self.k[j + 2] - self.k[j];
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            max_line = max_line.max((dk - sign * gamma * dh).abs());
            if dh.abs() >= 1e-3 {
                max_slope = max_slope.max((dk / dh - sign * gamma).abs());
            }
        }
        let lam = self.t * self.t * params.g / 2.0;
        let c = -(self.k[1] - self.k[0]) / gamma - self.h[1] - self.h[0];
        let e = 0.5 * (self.sigma[0].powi(2) + self.omega[0].powi(2)) + params.g * self.h[0];
        let rhs = 2.0 * self.t * self.t * e - lam * lam;
        let mut max_ellipse: f64 = 0.0;
        for j in (0..self.len() - 1).step_by(2) {
            let (a, b) = (self.h[j], self.h[j + 1]);
            let lhs = (b - a).powi(2) + gamma * gamma * (a + b + c).powi(2) + 2.0 * lam * (a + b);
            max_ellipse = max_ellipse.max((lhs - rhs).abs());
        }
        Ok(PlatesDiagnostics {
            max_line_residual: max_line,
            max_slope_error: max_slope,
            max_ellipse_residual: max_ellipse,
            ellipse_c: c,
            energy: params.m * e,
        })
    }
}

/// Ladder and diagnostics of a parallel-plates record.
pub fn plates_invariants(
    section: &CrossSection,
    rows: &[CollisionRow],
    params: &MassParams,
) -> Result<(PlatesLadder, PlatesDiagnostics)> {
    if !matches!(section, CrossSection::Plates { .. }) {
        return Err(Error::Unsupported("plates invariants need a Plates section".into()));
    }
    let mut ladder = PlatesLadder::default();
    for r in rows {
        ladder.push(r)?;
    }
    let diag = ladder.diagnostics(params)?;
    Ok((ladder, diag))
}

/// Least-squares polynomial trends of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundedness {
    pub min: f64,
    pub max: f64,
    /// Slope of the best linear fit.
    pub secular_slope: f64,
    /// Leading coefficient of the best quadratic fit.
    pub secular_curvature: f64,
}

/// Linear and quadratic least-squares fits of `ys` against `xs`.
pub fn trend_fit(xs: &[f64], ys: &[f64]) -> Result<Boundedness> {
    check_dim(xs.len(), ys.len())?;
    if xs.len() < 3 {
        return Err(Error::Precondition("need at least three samples".into()));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let half = xs.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    if half == 0.0 {
        return Err(Error::Degenerate("all abscissae equal".into()));
    }
    // fit in the scaled variable z in [-1, 1] for conditioning
    let zs: Vec<f64> = xs.iter().map(|x| (x - mean) / half).collect();
    let design = |deg: usize| Matrix::from_fn(zs.len(), deg + 1, |i, j| zs[i].powi(j as i32));
    let y = Vector::from_column_slice(ys);
    let solve = |a: Matrix| -> Result<Vector> {
        a.svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::Degenerate(e.to_string()))
    };
    let lin = solve(design(1))?;
    let quad = solve(design(2))?;
    let (min, max) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(Boundedness {
        min,
        max,
        secular_slope: lin[1] / half,
        secular_curvature: quad[2] / (half * half),
    })
}

/// Trend fits of heights against collision index.
pub fn boundedness_diagnostic(heights: &[f64]) -> Result<Boundedness> {
    if heights.len() < 100 {
        return Err(Error::Precondition(format!("need at least 100 samples, got {}", heights.len())));
    }
    let xs: Vec<f64> = (0..heights.len()).map(|i| i as f64).collect();
    trend_fit(&xs, heights)
}

/// Velocity phase portrait: the energy-normalized 3-velocity
/// `(u . tau, u . nu, gamma r theta_dot)` projected along `nu` to the disc.
pub fn portrait_point(state: &TransversalState, frame: &BoundaryFrame, params: &MassParams) -> Result<(f64, f64)> {
    let theta_dot = state
        .theta_dot()
        .ok_or_else(|| Error::Unsupported("portrait needs a 2-D cross-section".into()))?;
    let tau = frame.tau.as_ref().ok_or_else(|| Error::Unsupported("frame has no tangent".into()))?;
    let spin = params.gamma * params.r * theta_dot;
    let norm = (state.u_bar.norm_squared() + spin * spin).sqrt();
    if norm == 0.0 {
        return Err(Error::Undefined("zero transverse energy".into()));
    }
    Ok((state.u_bar.dot(tau) / norm, spin / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params() -> MassParams {
        MassParams::new(3, 1.0, 1.0, 0.4f64.sqrt(), 0.0).unwrap()
    }

    fn v2(x: f64, y: f64) -> Vector {
        Vector::from_vec(vec![x, y])
    }

    #[test]
    fn quoted_drift_example() {
        let p = params();
        assert_abs_diff_eq!(drift_3d_quoted(PI / 4.0, 1.0, 0.0, 0.0, &p).unwrap(), 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(drift_3d(PI / 4.0, 1.0, 0.0, 0.0, &p).unwrap(), 5.0 / 9.0, epsilon = 1e-15);
        assert!(drift_3d(PI / 2.0, 1.0, 0.0, 0.0, &p).is_err());
        assert!(drift_3d(0.0, 1.0, 0.0, 0.0, &p).is_err());
        for (a, b, c) in [(0.3, -0.2, 0.7), (1.0, 2.0, -1.0)] {
            assert_abs_diff_eq!(
                drift_3d(PI / 4.0, a, b, c, &p).unwrap(),
                drift_3d_quoted(PI / 4.0, a, b, c, &p).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn plates_drift_vanishes() {
        let p = params();
        let nu = v2(0.0, 1.0);
        let spec = DriftSpec { nu1: nu.clone(), nu2: -&nu, lambda0: MixedVelocity::new(0.8, v2(0.3, -0.5)), t: 1.0 };
        assert_abs_diff_eq!(drift_general(&spec, &p).unwrap(), 0.0, epsilon = 1e-14);
        let spec = DriftSpec { nu1: v2(1.0, 0.0), nu2: v2(0.0, 1.0), lambda0: MixedVelocity::new(0.0, v2(0.0, 0.0)), t: 1.0 };
        assert_eq!(drift_general(&spec, &p).unwrap(), 0.0);
    }

    #[test]
    fn trend_fit_cases() {
        let b = boundedness_diagnostic(&vec![2.5; 200]).unwrap();
        assert_abs_diff_eq!(b.secular_slope, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.secular_curvature, 0.0, epsilon = 1e-14);
        let hs: Vec<f64> = (0..300).map(|i| -((i * i) as f64)).collect();
        let b = boundedness_diagnostic(&hs).unwrap();
        assert_abs_diff_eq!(b.secular_curvature, -1.0, epsilon = 1e-9);
        assert_eq!(b.max, 0.0);
        let hs: Vec<f64> = (0..300).map(|i| 3.0 - 0.25 * i as f64).collect();
        assert_abs_diff_eq!(boundedness_diagnostic(&hs).unwrap().secular_slope, -0.25, epsilon = 1e-12);
        assert!(boundedness_diagnostic(&hs[..50]).is_err());
    }

    #[test]
    fn portrait_cases() {
        let p = params();
        let f = CrossSection::circle(1.0).unwrap().frame_at(0.0).unwrap();
        let st = TransversalState::planar(f.point.clone(), &f.nu * 2.0, 0.0).unwrap();
        let (x, y) = portrait_point(&st, &f, &p).unwrap();
        assert_eq!((x, y), (0.0, 0.0));
        let tau = f.tau.clone().unwrap();
        let st = TransversalState::planar(f.point.clone(), tau.clone(), 0.0).unwrap();
        let (x, y) = portrait_point(&st, &f, &p).unwrap();
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-15);
        assert_eq!(y, 0.0);
        let st = TransversalState::planar(f.point.clone(), Vector::zeros(2), 0.0).unwrap();
        assert!(matches!(portrait_point(&st, &f, &p), Err(Error::Undefined(_))));
    }

    #[test]
    fn rotation_entries_match_spectrum() {
        let p = params();
        for ang in [0.3, 1.1, 2.0, 2.9] {
            let nu0 = v2(-1.0, 0.0);
            let nu1 = v2(-(ang as f64).cos(), -(ang as f64).sin());
            let (a, b) = rotation_entries(&nu0, &nu1, &p);
            assert_abs_diff_eq!(a * a + b * b, 1.0, epsilon = 1e-14);
            let mut rinv = Matrix::identity(3, 3);
            rinv.view_mut((1, 1), (2, 2)).copy_from(&rotation_2d(-ang));
            let m = mixed_matrix(&nu0, &p) * rinv;
            // trace = -1 + 2 cos(theta) on the rotation plane
            assert_abs_diff_eq!((m.trace() + 1.0) / 2.0, a, epsilon = 1e-13);
        }
    }
}
