//! Event-driven integration of the no-slip billiard in a cylinder.
//!
//! Flights are integrated exactly (linear transversally, quadratic along the
//! axis under a constant force `-m g e`), and collisions are located in
//! closed form on the cross-section.

use std::f64::consts::PI;

use crate::algebra::{basis, MassParams, Matrix, SkewMatrix, Vector};
use crate::collision::{
    collision_map, embed, no_slip_collide, planar_rolling_defect, rolling_impact_residual, transverse_project,
    MixedVelocity, ReducedState, TransversalState,
};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryFrame, CrossSection, Piece, T_MIN};

/// Free flight for time `t`: straight line transversally, free fall along `e`.
pub fn fly(state: &ReducedState, t: f64, params: &MassParams) -> ReducedState {
    let mut out = state.clone();
    out.a += &state.u * t;
    let k = state.dim() - 1;
    let (h, sigma) = axial_flight(state.a[k], state.u[k], t, params.g);
    out.a[k] = h;
    out.u[k] = sigma;
    out
}

/// Height and axial velocity after free fall for time `t`.
///
/// The height moves by `(a / g)(sigma + sigma') / 2` with `a = g t` as
/// rounded, so `sigma^2 / 2 + g h` changes only by unbiased roundoff even
/// when the same `t` repeats at every step of a periodic orbit.
fn axial_flight(h: f64, sigma: f64, t: f64, g: f64) -> (f64, f64) {
    if g == 0.0 {
        return (h + t * sigma, sigma);
    }
    let a = g * t;
    let sigma_next = sigma - a;
    (h + (a / g) * (0.5 * (sigma + sigma_next)), sigma_next)
}

/// A cross-section together with the particle parameters.
///
/// In cylinder mode the state lives in `R^(d+1)` with the axis as last
/// coordinate. Planar mode runs the `d`-dimensional billiard of the section
/// itself (no axis, no force), which is what the transverse projection of a
/// cylinder billiard should reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct Billiard {
    pub section: CrossSection,
    pub params: MassParams,
    axis: bool,
}

impl Billiard {
    pub fn cylinder(section: CrossSection, params: MassParams) -> Result<Self> {
        let d = section.transverse_dim();
        if params.n != d + 1 {
            return Err(Error::InvalidParameter(format!(
                "cylinder over a {d}-dimensional section needs n = {}, got {}",
                d + 1,
                params.n
            )));
        }
        Ok(Self { section, params, axis: true })
    }

    pub fn planar(section: CrossSection, params: MassParams) -> Result<Self> {
        let d = section.transverse_dim();
        if params.n != d || d < 2 {
            return Err(Error::InvalidParameter(format!(
                "planar billiard over a {d}-dimensional section needs n = {d} >= 2, got {}",
                params.n
            )));
        }
        if params.g != 0.0 {
            return Err(Error::InvalidParameter("planar billiard has no axis for the force".into()));
        }
        Ok(Self { section, params, axis: false })
    }

    pub fn has_axis(&self) -> bool {
        self.axis
    }

    fn section_dim(&self) -> usize {
        self.section.transverse_dim()
    }

    fn section_part(&self, v: &Vector) -> Vector {
        v.rows(0, self.section_dim()).into_owned()
    }

    fn full_normal(&self, frame: &BoundaryFrame) -> Vector {
        embed(&frame.nu, self.params.n)
    }

    /// Transverse state seen by the cross-section billiard.
    pub fn transverse_state(&self, state: &ReducedState) -> TransversalState {
        if self.axis {
            transverse_project(state)
        } else {
            TransversalState { a_bar: state.a.clone(), u_bar: state.u.clone(), spin: state.ang.clone() }
        }
    }

    pub fn frame_of(&self, state: &ReducedState) -> Result<BoundaryFrame> {
        self.section.frame_at_point(&self.section_part(&state.a))
    }

    /// Kinetic energy plus `m g h` (cylinder mode).
    pub fn energy(&self, state: &ReducedState) -> f64 {
        if self.axis {
            state.total_energy(&self.params)
        } else {
            state.kinetic_energy(&self.params)
        }
    }
}

/// Result of one flight followed by one collision.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub pre: ReducedState,
    pub post: ReducedState,
    pub flight_time: f64,
    pub frame: BoundaryFrame,
}

/// Flies from a post-collision state to the next boundary point and collides.
pub fn billiard_step(state: &ReducedState, billiard: &Billiard) -> Result<Step> {
    let a_bar = billiard.section_part(&state.a);
    let u_bar = billiard.section_part(&state.u);
    let (hit, t) = billiard.section.next_transverse_collision(&a_bar, &u_bar)?;
    let mut pre = fly(state, t, &billiard.params);
    pre.a.rows_mut(0, hit.len()).copy_from(&hit);
    let frame = billiard.section.frame_at_point(&hit)?;
    let post = no_slip_collide(&pre, &billiard.full_normal(&frame), &billiard.params)?;
    Ok(Step { pre, post, flight_time: t, frame })
}

/// One row of a trajectory record, taken at a collision (row 0 is the
/// initial state).
///
/// Velocity columns are post-collision. `residual` and `defect` describe the
/// pre-collision state at the same point, where rolling impact is decided.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionRow {
    pub index: usize,
    pub time: f64,
    pub position: Vec<f64>,
    /// Flight time to the next collision.
    pub flight_time: f64,
    pub height: f64,
    pub sigma: f64,
    /// `gamma r U e` restricted to the cross-section.
    pub w: Vec<f64>,
    /// Inward transverse normal at the collision point.
    pub nu: Vec<f64>,
    pub piece: Piece,
    pub w_tau: f64,
    pub w_nu: f64,
    /// Scalar transverse spin (2-D sections), zero otherwise.
    pub omega_e: f64,
    pub energy: f64,
    pub residual: f64,
    pub defect: Option<f64>,
}

impl CollisionRow {
    pub fn mixed(&self) -> MixedVelocity {
        MixedVelocity::new(self.sigma, Vector::from_column_slice(&self.w))
    }
}

/// Per-collision ledger of a run plus the state after the last collision.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<CollisionRow>,
    pub final_state: ReducedState,
}

impl TrajectoryRecord {
    pub fn heights(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.height).collect()
    }

    pub fn flight_times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.flight_time).collect()
    }

    pub fn duration(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.time + r.flight_time)
    }
}

/// Circle-section state in the co-rotating boundary frame `(tau, nu[, e])`.
///
/// A circle billiard is rotation invariant, so the flight between two
/// collisions is exact in this frame: the arrival velocity is `(u_tau,
/// -u_nu)` and the contact angle advances by `pi - 2 atan2(u_tau, u_nu)`.
/// Collisions then use the exact basis normal, which makes rolling-impact
/// orbits numerical fixed points instead of slowly drifting ones.
#[derive(Debug, Clone)]
struct CircleFrame {
    rho: f64,
    psi: f64,
    h: f64,
    u: Vector,
    ang: SkewMatrix,
    pre_u: Vector,
    pre_ang: SkewMatrix,
}

/// Columns `tau, nu` (and `e` when `n = 3`) of the boundary frame at angle `psi`.
fn circle_basis(psi: f64, n: usize) -> Matrix {
    let (s, c) = psi.sin_cos();
    let mut f = Matrix::identity(n, n);
    f[(0, 0)] = -s;
    f[(1, 0)] = c;
    f[(0, 1)] = -c;
    f[(1, 1)] = -s;
    f
}

fn rotate_first_plane(angle: f64, n: usize) -> Matrix {
    let (s, c) = angle.sin_cos();
    let mut q = Matrix::identity(n, n);
    q[(0, 0)] = c;
    q[(0, 1)] = -s;
    q[(1, 0)] = s;
    q[(1, 1)] = c;
    q
}

/// Conjugates `ang` by the rotation of the first coordinate plane.
///
/// In three dimensions the pair `(U_20, U_21)` turns like a plane vector and
/// `U_01` is invariant. The rotated pair is rescaled to its original length:
/// every step of a periodic orbit turns by the same angle, so the rounding
/// of `cos^2 + sin^2` would otherwise bias the spin energy linearly in time.
fn rotate_spin(ang: &SkewMatrix, angle: f64) -> SkewMatrix {
    let n = ang.dim();
    if n == 2 {
        return ang.clone();
    }
    if n != 3 {
        return conjugate(&rotate_first_plane(angle, n), ang);
    }
    let (s, c) = angle.sin_cos();
    let u = ang.entries();
    let (x, y) = (u[(2, 0)], u[(2, 1)]);
    let (mut xr, mut yr) = (c * x - s * y, s * x + c * y);
    let before = x.hypot(y);
    let after = xr.hypot(yr);
    if after > 0.0 {
        xr *= before / after;
        yr *= before / after;
    }
    let mut out = u.clone();
    out[(2, 0)] = xr;
    out[(0, 2)] = -xr;
    out[(2, 1)] = yr;
    out[(1, 2)] = -yr;
    SkewMatrix::from_antisymmetric_part(&out).expect("square")
}

fn conjugate(f: &Matrix, ang: &SkewMatrix) -> SkewMatrix {
    SkewMatrix::from_antisymmetric_part(&(f * ang.entries() * f.transpose())).expect("square")
}

impl CircleFrame {
    fn from_global(state: &ReducedState, rho: f64) -> Self {
        let n = state.dim();
        let psi = state.a[1].atan2(state.a[0]);
        let f = circle_basis(psi, n);
        let ft = f.transpose();
        let u = &ft * &state.u;
        let ang = conjugate(&ft, &state.ang);
        let h = if n == 3 { state.a[2] } else { 0.0 };
        Self { rho, psi, h, pre_u: u.clone(), pre_ang: ang.clone(), u, ang }
    }

    fn global(&self, u: &Vector, ang: &SkewMatrix) -> ReducedState {
        let n = u.len();
        let f = circle_basis(self.psi, n);
        let mut a = Vector::zeros(n);
        a[0] = self.rho * self.psi.cos();
        a[1] = self.rho * self.psi.sin();
        if n == 3 {
            a[2] = self.h;
        }
        ReducedState { a, u: &f * u, ang: conjugate(&f, ang) }
    }

    /// Flight plus collision; returns the flight time.
    fn advance(&mut self, params: &MassParams, axis: bool) -> Result<f64> {
        let n = self.u.len();
        let (ut, un) = (self.u[0], self.u[1]);
        let uu = ut * ut + un * un;
        if uu == 0.0 {
            return Err(Error::LongitudinalOnly);
        }
        let t = 2.0 * self.rho * un / uu;
        if t <= T_MIN {
            return Err(Error::Degenerate(format!("grazing ray (t = {t:e})")));
        }
        let dpsi = PI - 2.0 * ut.atan2(un);
        let q = rotate_first_plane(-dpsi, n);
        let mut pre_u = &q * &self.u;
        pre_u[0] = ut;
        pre_u[1] = -un;
        if axis {
            let (h, sigma) = axial_flight(self.h, self.u[2], t, params.g);
            self.h = h;
            pre_u[2] = sigma;
        }
        let pre_ang = rotate_spin(&self.ang, -dpsi);
        let nu = basis(n, 1);
        let (u, ang) = collision_map(&pre_u, &pre_ang, &nu, params)?;
        self.psi = (self.psi + dpsi).rem_euclid(2.0 * PI);
        self.u = u;
        self.ang = ang;
        self.pre_u = pre_u;
        self.pre_ang = pre_ang;
        Ok(t)
    }
}

/// Lazily advancing trajectory; useful for runs too long to keep in memory.
///
/// Circle sections are stepped in the co-rotating frame (see
/// [`CircleFrame`]); other sections use [`billiard_step`].
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    billiard: &'a Billiard,
    state: ReducedState,
    pre: ReducedState,
    frame: BoundaryFrame,
    circle: Option<CircleFrame>,
    time: f64,
    index: usize,
}

impl<'a> Stepper<'a> {
    /// `initial` must sit on the boundary with a non-incoming velocity.
    pub fn new(initial: ReducedState, billiard: &'a Billiard) -> Result<Self> {
        if initial.dim() != billiard.params.n {
            return Err(Error::DimensionMismatch { expected: billiard.params.n, found: initial.dim() });
        }
        let a_bar = billiard.section_part(&initial.a);
        let off = billiard.section.boundary_residual(&a_bar).abs();
        if off > 1e-9 {
            return Err(Error::Precondition(format!("initial point is {off:e} off the boundary")));
        }
        let frame = billiard.section.frame_at_point(&a_bar)?;
        let un = billiard.section_part(&initial.u).dot(&frame.nu);
        if un < -1e-12 * initial.u.norm().max(1.0) {
            return Err(Error::Precondition("initial velocity points out of the domain".into()));
        }
        let circle = match billiard.section {
            CrossSection::Circle { rho } => Some(CircleFrame::from_global(&initial, rho)),
            _ => None,
        };
        Ok(Self { billiard, pre: initial.clone(), state: initial, frame, circle, time: 0.0, index: 0 })
    }

    pub fn state(&self) -> &ReducedState {
        &self.state
    }

    /// Emits the row of the current collision and advances to the next one.
    pub fn advance(&mut self) -> Result<CollisionRow> {
        let b = self.billiard;
        let (flight_time, next) = match &self.circle {
            Some(c) => {
                let mut c = c.clone();
                let t = c.advance(&b.params, b.has_axis())?;
                (t, Some(c))
            }
            None => {
                let step = billiard_step(&self.state, b)?;
                let row = self.row(step.flight_time)?;
                self.time += step.flight_time;
                self.index += 1;
                self.state = step.post;
                self.pre = step.pre;
                self.frame = step.frame;
                return Ok(row);
            }
        };
        let row = self.row(flight_time)?;
        let c = next.expect("circle branch");
        self.time += flight_time;
        self.index += 1;
        self.state = c.global(&c.u, &c.ang);
        self.pre = c.global(&c.pre_u, &c.pre_ang);
        self.frame = b.frame_of(&self.state)?;
        self.circle = Some(c);
        Ok(row)
    }

    fn row(&self, flight_time: f64) -> Result<CollisionRow> {
        let b = self.billiard;
        let p = &b.params;
        let st = &self.state;
        let trans = b.transverse_state(st);
        let (sigma, w) = if b.has_axis() {
            let mv = MixedVelocity::from_state(st, p);
            (mv.sigma, mv.w)
        } else {
            (0.0, Vector::zeros(0))
        };
        let (w_tau, w_nu) = if w.is_empty() {
            (0.0, 0.0)
        } else {
            (self.frame.tau.as_ref().map_or(0.0, |t| w.dot(t)), w.dot(&self.frame.nu))
        };
        let pre_trans = b.transverse_state(&self.pre);
        let defect = match planar_rolling_defect(&pre_trans, &self.frame, p) {
            Ok(d) => Some(d),
            Err(Error::Undefined(_)) | Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(CollisionRow {
            index: self.index,
            time: self.time,
            position: st.a.iter().copied().collect(),
            flight_time,
            height: if b.has_axis() { st.height() } else { 0.0 },
            sigma,
            w: w.iter().copied().collect(),
            nu: self.frame.nu.iter().copied().collect(),
            piece: self.frame.piece,
            w_tau,
            w_nu,
            omega_e: trans.theta_dot().unwrap_or(0.0),
            energy: b.energy(st),
            residual: rolling_impact_residual(&self.pre, &b.full_normal(&self.frame), p)?,
            defect,
        })
    }
}

/// Runs `n_collisions` steps; row `i` holds the state after collision `i`.
pub fn run_trajectory(
    initial: &ReducedState,
    billiard: &Billiard,
    n_collisions: usize,
) -> Result<TrajectoryRecord> {
    if n_collisions == 0 {
        return Err(Error::Precondition("n_collisions must be at least 1".into()));
    }
    let mut stepper = Stepper::new(initial.clone(), billiard)?;
    let mut rows = Vec::with_capacity(n_collisions);
    for _ in 0..n_collisions {
        rows.push(stepper.advance()?);
    }
    Ok(TrajectoryRecord { rows, final_state: stepper.state })
}
