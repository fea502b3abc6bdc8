//! The no-slip collision map on the reduced phase space, its transverse
//! factorization, and the longitudinal mixed-velocity recursion.

use nalgebra::Vector3;

use crate::algebra::{
    apply_skew, kinetic_norm_sq, omega_to_skew, skew_to_omega, MassParams, Matrix,
    SkewMatrix, Vector,
};
use crate::error::{check_dim, Error, Result};
use crate::geometry::BoundaryFrame;

/// Center-of-mass position and velocity plus angular velocity; the particle
/// orientation itself is never tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub a: Vector,
    pub u: Vector,
    pub ang: SkewMatrix,
}

/// Velocity components in the moving frame `(tau, nu, e)` of a 3-D cylinder.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameComponents {
    pub sigma: f64,
    pub u_tau: f64,
    pub u_nu: f64,
    pub omega_tau: f64,
    pub omega_nu: f64,
    pub omega_e: f64,
}

/// Pads a transverse vector with a zero axis component.
pub fn embed(v_bar: &Vector, n: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v.rows_mut(0, v_bar.len()).copy_from(v_bar);
    v
}

impl ReducedState {
    pub fn new(a: Vector, u: Vector, ang: SkewMatrix) -> Result<Self> {
        check_dim(a.len(), u.len())?;
        check_dim(a.len(), ang.dim())?;
        Ok(Self { a, u, ang })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `a . e`
    pub fn height(&self) -> f64 {
        self.a[self.dim() - 1]
    }

    /// `u . e`
    pub fn sigma(&self) -> f64 {
        self.u[self.dim() - 1]
    }

    pub fn transverse_position(&self) -> Vector {
        self.a.rows(0, self.dim() - 1).into_owned()
    }

    pub fn transverse_velocity(&self) -> Vector {
        self.u.rows(0, self.dim() - 1).into_owned()
    }

    /// 3-D state at a boundary point of a cylinder, from frame components.
    pub fn from_frame_components(
        frame: &BoundaryFrame,
        height: f64,
        c: FrameComponents,
    ) -> Result<Self> {
        check_dim(2, frame.point.len())?;
        let tau = frame
            .tau
            .as_ref()
            .ok_or_else(|| Error::Unsupported("frame has no tangent".into()))?;
        let nu = &frame.nu;
        let mut a = embed(&frame.point, 3);
        a[2] = height;
        let u = Vector::from_vec(vec![
            c.u_tau * tau[0] + c.u_nu * nu[0],
            c.u_tau * tau[1] + c.u_nu * nu[1],
            c.sigma,
        ]);
        let omega = Vector3::new(
            c.omega_tau * tau[0] + c.omega_nu * nu[0],
            c.omega_tau * tau[1] + c.omega_nu * nu[1],
            c.omega_e,
        );
        Ok(Self { a, u, ang: omega_to_skew(&omega) })
    }

    /// Inverse of [`ReducedState::from_frame_components`].
    pub fn frame_components(&self, frame: &BoundaryFrame) -> Result<FrameComponents> {
        let omega = skew_to_omega(&self.ang)?;
        let tau = frame
            .tau
            .as_ref()
            .ok_or_else(|| Error::Unsupported("frame has no tangent".into()))?;
        let tau3 = Vector3::new(tau[0], tau[1], 0.0);
        let nu3 = Vector3::new(frame.nu[0], frame.nu[1], 0.0);
        let u3 = Vector3::new(self.u[0], self.u[1], self.u[2]);
        Ok(FrameComponents {
            sigma: u3.z,
            u_tau: u3.dot(&tau3),
            u_nu: u3.dot(&nu3),
            omega_tau: omega.dot(&tau3),
            omega_nu: omega.dot(&nu3),
            omega_e: omega.z,
        })
    }

    pub fn kinetic_energy(&self, params: &MassParams) -> f64 {
        0.5 * kinetic_norm_sq(&self.u, &self.ang, params)
    }

    /// Kinetic plus potential energy `m g (a . e)`.
    pub fn total_energy(&self, params: &MassParams) -> f64 {
        self.kinetic_energy(params) + params.m * params.g * self.height()
    }

    pub fn negated(&self) -> Self {
        Self { a: self.a.clone(), u: -&self.u, ang: self.ang.scale(-1.0) }
    }
}

/// The linear map `C_a` applied to `(u, U)` with inward normal `nu`.
///
/// No sign condition on `u . nu`; this is the bare orthogonal involution.
/// It is evaluated as the reflection `I - 2 Pi` across the no-slip
/// subspace, with `Pi` the metric projection onto its complement:
/// the normal direction plus `(x, x ^ nu / (r gamma^2))` for tangent `x`.
/// Expanding gives `u+ = c u - (s/gamma)(u.nu) nu + s gamma r U nu` and
/// `U+ = (s/(gamma r)) nu ^ u + U - (s/gamma) nu ^ (U nu)`, but the
/// reflection form reproduces no-slip states exactly, so orbits near
/// rolling impact do not pick up a systematic roundoff drift.
///
/// Intermediates are carried as double-double and each output entry is
/// rounded once. Rounding every intermediate biases the kinetic energy by a
/// fraction of an ulp per collision, which adds up linearly over long runs.
pub fn collision_map(
    u: &Vector,
    ang: &SkewMatrix,
    nu: &Vector,
    params: &MassParams,
) -> Result<(Vector, SkewMatrix)> {
    check_dim(u.len(), nu.len())?;
    check_dim(u.len(), ang.dim())?;
    let n = u.len();
    let w = ang.entries();
    let dot = |x: &dyn Fn(usize) -> Dd| (0..n).fold(Dd::ZERO, |acc, i| acc + x(i) * Dd::from(nu[i]));
    // dividing by |nu|^2 keeps the reflection an exact involution for the
    // normal as computed, instead of rescaling u.nu by 2|nu|^2 - 1 per hit
    let nn = dot(&|i| Dd::from(nu[i]));
    let u_n = dot(&|i| Dd::from(u[i])) / nn;
    // tangential slip velocity of the contact point
    let mut slip: Vec<Dd> = (0..n)
        .map(|i| {
            let w_nu = (0..n).fold(Dd::ZERO, |acc, j| acc + Dd::prod(w[(i, j)], nu[j]));
            Dd::from(u[i]) - w_nu * Dd::from(params.r)
        })
        .collect();
    let s_n = dot(&|i| slip[i]) / nn;
    for (i, s) in slip.iter_mut().enumerate() {
        *s = *s - s_n * Dd::from(nu[i]);
    }
    let (k, j) = slip_coefficients(params);
    let u_plus = Vector::from_fn(n, |i, _| {
        (Dd::from(u[i]) - Dd::from(2.0) * u_n * Dd::from(nu[i]) - k * slip[i]).value()
    });
    let mut m = Matrix::zeros(n, n);
    for a in 0..n {
        for b in a + 1..n {
            // (slip ^ nu)_ab = nu_a slip_b - slip_a nu_b
            let wd = Dd::from(nu[a]) * slip[b] - slip[a] * Dd::from(nu[b]);
            let x = (Dd::from(w[(a, b)]) - j * wd).value();
            m[(a, b)] = x;
            m[(b, a)] = -x;
        }
    }
    Ok((u_plus, SkewMatrix::try_from_matrix(m, 0.0)?))
}

/// `2 gamma^2 / (1 + gamma^2)` and `2 / ((1 + gamma^2) r)`.
///
/// The same rounded coefficient is reused at every collision, so its
/// rounding error would bias the kinetic energy with a fixed sign.
fn slip_coefficients(params: &MassParams) -> (Dd, Dd) {
    let g2 = Dd::prod(params.gamma, params.gamma);
    let den = Dd::from(1.0) + g2;
    (Dd::from(2.0) * g2 / den, Dd::from(2.0) / (den * Dd::from(params.r)))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }
}

impl std::ops::Add for Dd {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::two_sum(s.hi, s.lo + self.lo + o.lo)
    }
}

impl std::ops::Sub for Dd {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + Self { hi: -o.hi, lo: -o.lo }
    }
}

impl std::ops::Mul for Dd {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = Self::prod(self.hi, o.hi);
        Self::two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }
}

impl std::ops::Div for Dd {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - Self::from(q1) * o;
        Self::two_sum(q1, r.hi / o.hi)
    }
}

/// No-slip collision of a state arriving at the boundary.
pub fn no_slip_collide(state: &ReducedState, nu: &Vector, params: &MassParams) -> Result<ReducedState> {
    let approach = state.u.dot(nu);
    if approach > 1e-12 * state.u.norm().max(1.0) {
        return Err(Error::Precondition(format!(
            "state is already separating (u . nu = {approach:e})"
        )));
    }
    let (u, ang) = collision_map(&state.u, &state.ang, nu, params)?;
    Ok(ReducedState { a: state.a.clone(), u, ang })
}

/// Projection of a state onto the transverse billiard of the cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct TransversalState {
    pub a_bar: Vector,
    pub u_bar: Vector,
    /// Leading `so(n-1)` block of the angular velocity.
    pub spin: SkewMatrix,
}

impl TransversalState {
    /// 2-D state from the scalar spin `theta_dot` (the 3-D `omega . e`).
    pub fn planar(a_bar: Vector, u_bar: Vector, theta_dot: f64) -> Result<Self> {
        check_dim(2, a_bar.len())?;
        check_dim(2, u_bar.len())?;
        let spin = SkewMatrix::try_from_matrix(
            Matrix::from_row_slice(2, 2, &[0.0, -theta_dot, theta_dot, 0.0]),
            0.0,
        )?;
        Ok(Self { a_bar, u_bar, spin })
    }

    /// Scalar spin of a 2-D transverse state.
    pub fn theta_dot(&self) -> Option<f64> {
        (self.spin.dim() == 2).then(|| self.spin.entries()[(1, 0)])
    }

    /// `1/2 m (|u_bar|^2 + (r gamma)^2 / 2 Tr(S S^T))`.
    pub fn energy(&self, params: &MassParams) -> f64 {
        0.5 * kinetic_norm_sq(&self.u_bar, &self.spin, params)
    }

    /// Lifts back to a cylinder state with zero longitudinal components.
    pub fn lift(&self, height: f64) -> ReducedState {
        let d = self.a_bar.len();
        let mut a = embed(&self.a_bar, d + 1);
        a[d] = height;
        let mut ang = Matrix::zeros(d + 1, d + 1);
        ang.view_mut((0, 0), (d, d)).copy_from(self.spin.entries());
        ReducedState {
            a,
            u: embed(&self.u_bar, d + 1),
            ang: SkewMatrix::try_from_matrix(ang, 0.0).expect("block of a skew matrix"),
        }
    }
}

/// Drops `sigma` and the mixed block, keeping `(a_bar, u_bar)` and the
/// `so(n-1)` part of the spin.
pub fn transverse_project(state: &ReducedState) -> TransversalState {
    let d = state.dim() - 1;
    TransversalState {
        a_bar: state.transverse_position(),
        u_bar: state.transverse_velocity(),
        spin: state.ang.leading_block(d),
    }
}

/// No-slip collision of the transverse billiard (same `gamma`).
pub fn transverse_collide(
    state: &TransversalState,
    nu_bar: &Vector,
    params: &MassParams,
) -> Result<TransversalState> {
    let (u_bar, spin) = collision_map(&state.u_bar, &state.spin, nu_bar, params)?;
    Ok(TransversalState { a_bar: state.a_bar.clone(), u_bar, spin })
}

/// Longitudinal velocity components `(sigma, w)`, `w = gamma r U e`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedVelocity {
    pub sigma: f64,
    /// Transverse vector (length `n - 1`).
    pub w: Vector,
}

impl MixedVelocity {
    pub fn new(sigma: f64, w: Vector) -> Self {
        Self { sigma, w }
    }

    pub fn from_state(state: &ReducedState, params: &MassParams) -> Self {
        let n = state.dim();
        let ue = state.ang.entries().column(n - 1);
        let w = ue.rows(0, n - 1).into_owned() * (params.gamma * params.r);
        Self { sigma: state.sigma(), w }
    }

    /// Stacked vector `(sigma, w)` in the mixed velocity space.
    pub fn to_vector(&self) -> Vector {
        let mut v = Vector::zeros(self.w.len() + 1);
        v[0] = self.sigma;
        v.rows_mut(1, self.w.len()).copy_from(&self.w);
        v
    }

    pub fn from_vector(v: &Vector) -> Self {
        Self { sigma: v[0], w: v.rows(1, v.len() - 1).into_owned() }
    }

    /// Overwrites the longitudinal part of `state` (sigma and the `U e`
    /// column) with these values, leaving the transverse part untouched.
    pub fn write_into(&self, state: &mut ReducedState, params: &MassParams) {
        let n = state.dim();
        state.u[n - 1] = self.sigma;
        let mut m = state.ang.entries().clone();
        let k = 1.0 / (params.gamma * params.r);
        for i in 0..n - 1 {
            m[(i, n - 1)] = self.w[i] * k;
            m[(n - 1, i)] = -self.w[i] * k;
        }
        state.ang = SkewMatrix::try_from_matrix(m, 0.0).expect("antisymmetric by construction");
    }
}

/// Matrix acting on `(sigma, w)` at a collision with transverse normal `nu`:
/// `[[c, -s nu^T], [-s nu, -c nu nu^T + Pi]]`, `Pi` the projection onto `nu^perp`.
pub fn mixed_matrix(nu: &Vector, params: &MassParams) -> Matrix {
    let d = nu.len();
    let (c, s) = (params.c_beta(), params.s_beta());
    let nn = nu * nu.transpose();
    let mut m = Matrix::zeros(d + 1, d + 1);
    m[(0, 0)] = c;
    for i in 0..d {
        m[(0, i + 1)] = -s * nu[i];
        m[(i + 1, 0)] = -s * nu[i];
    }
    let block = Matrix::identity(d, d) - &nn * (1.0 + c);
    m.view_mut((1, 1), (d, d)).copy_from(&block);
    m
}

/// One flight plus collision of the longitudinal recursion:
/// `h' = h + 1^T (t L + t^2/2 Phi)`, `L' = A (L + t Phi)`, `Phi = -g 1`.
pub fn longitudinal_step(
    lambda: &MixedVelocity,
    h: f64,
    t: f64,
    mixed: &Matrix,
    params: &MassParams,
) -> Result<(MixedVelocity, f64)> {
    if t <= 0.0 {
        return Err(Error::Precondition(format!("flight time must be positive, got {t}")));
    }
    let g = params.g;
    let h_next = h + t * lambda.sigma - 0.5 * t * t * g;
    let mut pre = lambda.to_vector();
    check_dim(mixed.nrows(), pre.len())?;
    pre[0] -= t * g;
    Ok((MixedVelocity::from_vector(&(mixed * pre)), h_next))
}

/// Norm of the tangential part of the contact-point velocity `u - r U nu`.
pub fn rolling_impact_residual(state: &ReducedState, nu: &Vector, params: &MassParams) -> Result<f64> {
    let v = &state.u - apply_skew(&state.ang, nu)? * params.r;
    Ok((&v - nu * v.dot(nu)).norm())
}

/// `-r (omega . e) / (u . tau)`; equals 1 exactly at transversal rolling impact.
pub fn transversal_rolling_defect(
    state: &ReducedState,
    frame: &BoundaryFrame,
    params: &MassParams,
) -> Result<f64> {
    if state.dim() != 3 {
        return Err(Error::Unsupported("rolling defect is defined for n = 3".into()));
    }
    let c = state.frame_components(frame)?;
    if c.u_tau == 0.0 {
        return Err(Error::Undefined("u . tau = 0".into()));
    }
    Ok(-params.r * c.omega_e / c.u_tau)
}

/// Transversal rolling defect of a 2-D transverse state at a boundary frame.
pub fn planar_rolling_defect(state: &TransversalState, frame: &BoundaryFrame, params: &MassParams) -> Result<f64> {
    let theta_dot = state
        .theta_dot()
        .ok_or_else(|| Error::Unsupported("rolling defect needs a 2-D cross-section".into()))?;
    let tau = frame.tau.as_ref().ok_or_else(|| Error::Unsupported("frame has no tangent".into()))?;
    let ut = state.u_bar.dot(tau);
    if ut == 0.0 {
        return Err(Error::Undefined("u . tau = 0".into()));
    }
    Ok(-params.r * theta_dot / ut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{basis, kinetic_inner, wedge};
    use crate::geometry::CrossSection;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize) -> MassParams {
        MassParams::new(n, 1.0, 1.0, 0.4f64.sqrt(), 0.0).unwrap()
    }

    fn rand_vec(rng: &mut impl Rng, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn rand_unit(rng: &mut impl Rng, n: usize) -> Vector {
        let v = rand_vec(rng, n);
        &v / v.norm()
    }

    fn rand_skew(rng: &mut impl Rng, n: usize) -> SkewMatrix {
        SkewMatrix::from_antisymmetric_part(&Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))).unwrap()
    }

    fn mat_close(a: &Matrix, b: &Matrix, tol: f64) {
        assert!((a - b).amax() < tol, "{a} vs {b}");
    }

    #[test]
    fn head_on_bounce() {
        let p = params(3);
        let nu = basis(3, 0);
        let st = ReducedState::new(Vector::zeros(3), -&nu * 2.0, SkewMatrix::zeros(3)).unwrap();
        let out = no_slip_collide(&st, &nu, &p).unwrap();
        assert_abs_diff_eq!((&out.u - &nu * 2.0).norm(), 0.0, epsilon = 1e-15);
        assert!(out.ang.entries().amax() < 1e-15);
    }

    #[test]
    fn rolling_impact_reflects_specularly() {
        let p = params(2);
        let nu = Vector::from_vec(vec![0.0, 1.0]);
        let u = Vector::from_vec(vec![1.0, -1.0]);
        let st = ReducedState { a: Vector::zeros(2), u, ang: TransversalState::planar(Vector::zeros(2), Vector::zeros(2), -1.0).unwrap().spin };
        assert_abs_diff_eq!(rolling_impact_residual(&st, &nu, &p).unwrap(), 0.0, epsilon = 1e-15);
        let out = no_slip_collide(&st, &nu, &p).unwrap();
        assert_abs_diff_eq!(out.u[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.u[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.ang.entries()[(1, 0)], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn separating_state_rejected() {
        let p = params(3);
        let nu = basis(3, 0);
        let st = ReducedState::new(Vector::zeros(3), nu.clone(), SkewMatrix::zeros(3)).unwrap();
        assert!(matches!(no_slip_collide(&st, &nu, &p), Err(Error::Precondition(_))));
    }

    /// Direct transcription of the expanded formula.
    fn expanded_map(u: &Vector, w: &SkewMatrix, nu: &Vector, p: &MassParams) -> (Vector, SkewMatrix) {
        let (c, s, g, r) = (p.c_beta(), p.s_beta(), p.gamma, p.r);
        let wnu = apply_skew(w, nu).unwrap();
        let u1 = u * c - nu * (s / g * u.dot(nu)) + &wnu * (s * g * r);
        let w1 = wedge(nu, u).unwrap().scale(s / (g * r)).add(w).sub(&wedge(nu, &wnu).unwrap().scale(s / g));
        (u1, w1)
    }

    #[test]
    fn matches_expanded_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for n in 2..=4 {
            let p = MassParams::new(n, 0.7, 1.3, 0.9 * (2.0 / n as f64).sqrt(), 0.0).unwrap();
            for _ in 0..100 {
                let nu = rand_unit(&mut rng, n);
                let (u, w) = (rand_vec(&mut rng, n), rand_skew(&mut rng, n));
                let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
                let (u2, w2) = expanded_map(&u, &w, &nu, &p);
                assert_abs_diff_eq!((&u1 - &u2).norm(), 0.0, epsilon = 1e-13);
                mat_close(w1.entries(), w2.entries(), 1e-13);
            }
        }
    }

    #[test]
    fn involution_and_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=4 {
            let p = params(n).with_dim(n);
            for _ in 0..200 {
                let nu = rand_unit(&mut rng, n);
                let (u, w) = (rand_vec(&mut rng, n), rand_skew(&mut rng, n));
                let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
                let (u2, w2) = collision_map(&u1, &w1, &nu, &p).unwrap();
                assert_abs_diff_eq!((&u2 - &u).norm(), 0.0, epsilon = 1e-12);
                mat_close(w2.entries(), w.entries(), 1e-12);
                assert_abs_diff_eq!(
                    kinetic_norm_sq(&u1, &w1, &p),
                    kinetic_norm_sq(&u, &w, &p),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn fixes_no_slip_space_and_negates_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 2..=4 {
            let p = params(n);
            for _ in 0..100 {
                let nu = rand_unit(&mut rng, n);
                // no-slip: any U, u = r U nu (automatically tangent)
                let w = rand_skew(&mut rng, n);
                let u = apply_skew(&w, &nu).unwrap() * p.r;
                let (u1, w1) = collision_map(&u, &w, &nu, &p).unwrap();
                assert_abs_diff_eq!((&u1 - &u).norm(), 0.0, epsilon = 1e-12);
                mat_close(w1.entries(), w.entries(), 1e-12);

                // complement: ((1 / (r gamma^2)) w ^ nu, w) with w tangent
                let t = rand_vec(&mut rng, n);
                let t = &t - &nu * t.dot(&nu);
                let ang = wedge(&t, &nu).unwrap().scale(1.0 / (p.r * p.gamma2()));
                assert_abs_diff_eq!(kinetic_inner((&t, &ang), (&u, &w), &p), 0.0, epsilon = 1e-12);
                let (u1, w1) = collision_map(&t, &ang, &nu, &p).unwrap();
                assert_abs_diff_eq!((&u1 + &t).norm(), 0.0, epsilon = 1e-12);
                mat_close(w1.entries(), &(-ang.entries()), 1e-12);

                // normal direction
                let (u1, w1) = collision_map(&nu, &SkewMatrix::zeros(n), &nu, &p).unwrap();
                assert_abs_diff_eq!((&u1 + &nu).norm(), 0.0, epsilon = 1e-12);
                assert!(w1.entries().amax() < 1e-12);
            }
        }
    }

    #[test]
    fn longitudinal_collision_pairs() {
        let p = params(3);
        let (c, s) = (p.c_beta(), p.s_beta());
        let nu = Vector::from_vec(vec![-0.6, 0.8, 0.0]);
        let e = basis(3, 2);
        let nue = wedge(&nu, &e).unwrap();
        let (u1, w1) = collision_map(&Vector::zeros(3), &nue, &nu, &p).unwrap();
        assert_abs_diff_eq!((&u1 - &e * (p.r * p.gamma * s)).norm(), 0.0, epsilon = 1e-14);
        mat_close(w1.entries(), &(nue.entries() * -c), 1e-14);
        let (u1, w1) = collision_map(&e, &SkewMatrix::zeros(3), &nu, &p).unwrap();
        assert_abs_diff_eq!((&u1 - &e * c).norm(), 0.0, epsilon = 1e-14);
        mat_close(w1.entries(), &(nue.entries() * (s / (p.r * p.gamma))), 1e-14);
        // tangential w ^ e is fixed
        let tau = Vector::from_vec(vec![0.8, 0.6, 0.0]);
        let te = wedge(&tau, &e).unwrap();
        let (u1, w1) = collision_map(&Vector::zeros(3), &te, &nu, &p).unwrap();
        assert!(u1.norm() < 1e-15);
        mat_close(w1.entries(), te.entries(), 1e-15);
    }

    #[test]
    fn projection_commutes_with_collision() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 3..=4 {
            let p = params(n);
            for _ in 0..200 {
                let nu_bar = rand_unit(&mut rng, n - 1);
                let nu = embed(&nu_bar, n);
                let st = ReducedState::new(rand_vec(&mut rng, n), rand_vec(&mut rng, n), rand_skew(&mut rng, n)).unwrap();
                let (u, ang) = collision_map(&st.u, &st.ang, &nu, &p).unwrap();
                let lhs = transverse_project(&ReducedState { a: st.a.clone(), u, ang });
                let rhs = transverse_collide(&transverse_project(&st), &nu_bar, &p.with_dim(n - 1)).unwrap();
                assert_abs_diff_eq!((&lhs.u_bar - &rhs.u_bar).norm(), 0.0, epsilon = 1e-12);
                mat_close(lhs.spin.entries(), rhs.spin.entries(), 1e-12);
            }
        }
        let st = ReducedState::new(Vector::zeros(3), basis(3, 2), SkewMatrix::zeros(3)).unwrap();
        let ts = transverse_project(&st);
        assert_eq!(ts.u_bar.norm(), 0.0);
        assert_eq!(ts.theta_dot(), Some(0.0));
    }

    #[test]
    fn mixed_matrix_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in 2..=4 {
            let p = params(n);
            for _ in 0..50 {
                let nu = rand_unit(&mut rng, n - 1);
                let a = mixed_matrix(&nu, &p);
                mat_close(&(&a * &a), &Matrix::identity(n, n), 1e-13);
                mat_close(&(&a * a.transpose()), &Matrix::identity(n, n), 1e-13);
                let mut v = Vector::zeros(n);
                v[0] = p.gamma;
                v.rows_mut(1, n - 1).copy_from(&nu);
                assert_abs_diff_eq!((&a * &v + &v).norm(), 0.0, epsilon = 1e-13);
                if n > 2 {
                    let t = rand_vec(&mut rng, n - 1);
                    let t = &t - &nu * t.dot(&nu);
                    let v = embed(&t, n).remove_row(n - 1).insert_row(0, 0.0);
                    assert_abs_diff_eq!((&a * &v - &v).norm(), 0.0, epsilon = 1e-13);
                }
                let eig = nalgebra::SymmetricEigen::new(a.clone()).eigenvalues;
                let minus = eig.iter().filter(|x| (*x + 1.0).abs() < 1e-9).count();
                let plus = eig.iter().filter(|x| (*x - 1.0).abs() < 1e-9).count();
                assert_eq!((minus, plus), (1, n - 1));
                if n == 3 {
                    assert_abs_diff_eq!(a.determinant(), -1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn mixed_matrix_matches_collision_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for n in 2..=4 {
            let p = params(n);
            for _ in 0..100 {
                let nu_bar = rand_unit(&mut rng, n - 1);
                let st = ReducedState::new(rand_vec(&mut rng, n), rand_vec(&mut rng, n), rand_skew(&mut rng, n)).unwrap();
                let (u, ang) = collision_map(&st.u, &st.ang, &embed(&nu_bar, n), &p).unwrap();
                let after = MixedVelocity::from_state(&ReducedState { a: st.a.clone(), u, ang }, &p);
                let predicted = mixed_matrix(&nu_bar, &p) * MixedVelocity::from_state(&st, &p).to_vector();
                assert_abs_diff_eq!((after.to_vector() - predicted).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mixed_velocity_frame_relations() {
        let p = params(3);
        let sec = CrossSection::circle(2.0).unwrap();
        let f = sec.frame_at(1.1).unwrap();
        let c = FrameComponents { sigma: 0.3, u_tau: 0.7, u_nu: -0.2, omega_tau: 1.3, omega_nu: -0.4, omega_e: 0.9 };
        let st = ReducedState::from_frame_components(&f, 0.5, c).unwrap();
        let back = st.frame_components(&f).unwrap();
        assert_abs_diff_eq!(back.omega_tau, c.omega_tau, epsilon = 1e-14);
        assert_abs_diff_eq!(back.u_nu, c.u_nu, epsilon = 1e-14);
        let mv = MixedVelocity::from_state(&st, &p);
        let tau = f.tau.as_ref().unwrap();
        assert_abs_diff_eq!(mv.w.dot(tau), p.gamma * p.r * c.omega_nu, epsilon = 1e-14);
        assert_abs_diff_eq!(mv.w.dot(&f.nu), -p.gamma * p.r * c.omega_tau, epsilon = 1e-14);
        let mut copy = st.clone();
        copy.u[2] = 0.0;
        copy.ang = copy.ang.leading_block(2);
        let mut copy = TransversalState { a_bar: copy.a.rows(0, 2).into_owned(), u_bar: copy.u.rows(0, 2).into_owned(), spin: copy.ang }.lift(0.5);
        mv.write_into(&mut copy, &p);
        mat_close(copy.ang.entries(), st.ang.entries(), 1e-14);
        assert_eq!(copy.u, st.u);
    }

    #[test]
    fn longitudinal_step_cases() {
        let p = params(3);
        let a = mixed_matrix(&Vector::from_vec(vec![1.0, 0.0]), &p);
        let l = MixedVelocity::new(0.7, Vector::zeros(2));
        let (_, h) = longitudinal_step(&l, 1.0, 2.0, &a, &p).unwrap();
        assert_abs_diff_eq!(h - 1.0, 1.4, epsilon = 1e-15);
        // free fall before the collision: pre-collision sigma drops by t g
        let pg = p.with_g(1.5);
        let ident = Matrix::identity(3, 3);
        let (l2, h) = longitudinal_step(&l, 0.0, 2.0, &ident, &pg).unwrap();
        assert_abs_diff_eq!(l2.sigma, 0.7 - 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h, 1.4 - 3.0, epsilon = 1e-15);
        assert!(longitudinal_step(&l, 0.0, 0.0, &a, &p).is_err());
    }

    #[test]
    fn residual_cases() {
        let p = params(3);
        let nu = basis(3, 0);
        let st = ReducedState::new(Vector::zeros(3), -&nu, SkewMatrix::zeros(3)).unwrap();
        assert_eq!(rolling_impact_residual(&st, &nu, &p).unwrap(), 0.0);
        let st = ReducedState::new(Vector::zeros(3), basis(3, 1), SkewMatrix::zeros(3)).unwrap();
        assert_abs_diff_eq!(rolling_impact_residual(&st, &nu, &p).unwrap(), 1.0);
    }

    #[test]
    fn defect_cases() {
        let p = MassParams::new(3, 0.5, 1.0, 0.4f64.sqrt(), 0.0).unwrap();
        let f = CrossSection::circle(2.0).unwrap().frame_at(0.4).unwrap();
        let mk = |u_tau: f64, omega_e: f64| {
            ReducedState::from_frame_components(&f, 0.0, FrameComponents { u_tau, u_nu: -1.0, omega_e, ..Default::default() }).unwrap()
        };
        assert_abs_diff_eq!(transversal_rolling_defect(&mk(1.0, -1.0 / p.r), &f, &p).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(transversal_rolling_defect(&mk(1.0, 0.0), &f, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(transversal_rolling_defect(&mk(0.8, -1.15 * 0.8 / p.r), &f, &p).unwrap(), 1.15, epsilon = 1e-14);
        assert!(matches!(transversal_rolling_defect(&mk(0.0, 1.0), &f, &p), Err(Error::Undefined(_))));
    }
}
