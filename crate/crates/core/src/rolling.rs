//! Nonholonomic rolling of a ball on the inside of a 3-D cylinder.
//!
//! Only the reduced system in `(s, h, sigma, omega_nu)` is integrated;
//! `omega_e` is a constant of motion and the contact point advances along
//! the section boundary at the constant rate `-r omega_e`.

use crate::algebra::MassParams;
use crate::error::{Error, Result};
use crate::geometry::CrossSection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingState {
    /// Arc-length position of the contact point on the effective boundary.
    pub s: f64,
    pub h: f64,
    pub sigma: f64,
    pub omega_nu: f64,
    pub omega_e: f64,
    pub t: f64,
}

/// Time derivatives of the integrated variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingRates {
    pub ds: f64,
    pub dh: f64,
    pub dsigma: f64,
    pub domega_nu: f64,
}

fn rates_with_curvature(st: &RollingState, curvature: f64, p: &MassParams) -> RollingRates {
    let k = p.gamma2() / (1.0 + p.gamma2());
    RollingRates {
        ds: -p.r * st.omega_e,
        dh: st.sigma,
        dsigma: -k * p.r * p.r * curvature * st.omega_e * st.omega_nu - p.g / (1.0 + p.gamma2()),
        domega_nu: curvature * st.omega_e * st.sigma,
    }
}

fn require_bounded(section: &CrossSection) -> Result<()> {
    if section.is_bounded() {
        Ok(())
    } else {
        Err(Error::Unsupported("rolling needs a bounded cross-section".into()))
    }
}

pub fn rolling_rhs(state: &RollingState, section: &CrossSection, params: &MassParams) -> Result<RollingRates> {
    require_bounded(section)?;
    Ok(rates_with_curvature(state, section.curvature_profile(state.s)?, params))
}

fn rk4(st: &RollingState, dt: f64, curvature: f64, p: &MassParams) -> RollingState {
    let shift = |b: &RollingState, k: &RollingRates, f: f64| RollingState {
        s: b.s + f * k.ds,
        h: b.h + f * k.dh,
        sigma: b.sigma + f * k.dsigma,
        omega_nu: b.omega_nu + f * k.domega_nu,
        ..*b
    };
    let k1 = rates_with_curvature(st, curvature, p);
    let k2 = rates_with_curvature(&shift(st, &k1, dt / 2.0), curvature, p);
    let k3 = rates_with_curvature(&shift(st, &k2, dt / 2.0), curvature, p);
    let k4 = rates_with_curvature(&shift(st, &k3, dt), curvature, p);
    let comb = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    RollingState {
        // the integrator overwrites s with its closed form
        s: st.s + dt * k1.ds,
        h: st.h + comb(k1.dh, k2.dh, k3.dh, k4.dh),
        sigma: st.sigma + comb(k1.dsigma, k2.dsigma, k3.dsigma, k4.dsigma),
        omega_nu: st.omega_nu + comb(k1.domega_nu, k2.domega_nu, k3.domega_nu, k4.domega_nu),
        omega_e: st.omega_e,
        t: st.t + dt,
    }
}

/// Fixed-step classical RK4.
///
/// Steps are split at curvature discontinuities (stadium junctions) so each
/// sub-step sees constant curvature. Because `s` is linear in time it is
/// evaluated in closed form rather than integrated, which keeps junction
/// crossing times free of accumulated roundoff.
#[derive(Debug, Clone)]
pub struct RollingIntegrator<'a> {
    section: &'a CrossSection,
    params: &'a MassParams,
    perimeter: f64,
    junctions: Vec<f64>,
    s0: f64,
    t0: f64,
    state: RollingState,
}

impl<'a> RollingIntegrator<'a> {
    pub fn new(initial: RollingState, section: &'a CrossSection, params: &'a MassParams) -> Result<Self> {
        require_bounded(section)?;
        let perimeter = section.perimeter()?;
        let mut state = initial;
        state.s = state.s.rem_euclid(perimeter);
        Ok(Self {
            section,
            params,
            perimeter,
            junctions: section.junctions(),
            s0: state.s,
            t0: state.t,
            state,
        })
    }

    pub fn state(&self) -> &RollingState {
        &self.state
    }

    fn rate(&self) -> f64 {
        -self.params.r * self.state.omega_e
    }

    fn s_at(&self, t: f64) -> f64 {
        (self.s0 + self.rate() * (t - self.t0)).rem_euclid(self.perimeter)
    }

    /// Distance (in `s`) to the next junction in the direction of travel.
    fn next_junction_gap(&self, s: f64, dir: f64) -> f64 {
        let per = self.perimeter;
        let mut best = f64::INFINITY;
        for &j in &self.junctions {
            let gap = if dir > 0.0 { (j - s).rem_euclid(per) } else { (s - j).rem_euclid(per) };
            let gap = if gap <= 1e-12 { gap + per } else { gap };
            best = best.min(gap);
        }
        best
    }

    /// Advances to time `t_target`.
    pub fn step_to(&mut self, t_target: f64) -> Result<()> {
        let rate = self.rate();
        while self.state.t < t_target {
            let t = self.state.t;
            let s = self.s_at(t);
            let mut t_next = t_target;
            if rate != 0.0 && !self.junctions.is_empty() {
                let t_junction = t + self.next_junction_gap(s, rate) / rate.abs();
                if t_junction < t_next {
                    t_next = t_junction;
                }
            }
            let h = t_next - t;
            let curvature = self.section.curvature_profile(self.s_at(t + 0.5 * h))?;
            let mut next = rk4(&self.state, h, curvature, self.params);
            next.t = t_next;
            next.s = self.s_at(t_next);
            self.state = next;
        }
        Ok(())
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        self.step_to(self.state.t + dt)
    }
}

/// Samples after every step from `t = initial.t` up to `t_end` (the last
/// step is shortened to land on `t_end`).
pub fn integrate_rolling(
    initial: &RollingState,
    section: &CrossSection,
    params: &MassParams,
    dt: f64,
    t_end: f64,
) -> Result<Vec<RollingState>> {
    integrate_rolling_every(initial, section, params, dt, t_end, 1)
}

/// Like [`integrate_rolling`] but keeps only every `every`-th sample (the
/// initial and final states are always kept).
pub fn integrate_rolling_every(
    initial: &RollingState,
    section: &CrossSection,
    params: &MassParams,
    dt: f64,
    t_end: f64,
    every: usize,
) -> Result<Vec<RollingState>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let every = every.max(1);
    let mut integ = RollingIntegrator::new(*initial, section, params)?;
    let n_steps = ((t_end - initial.t) / dt).ceil().max(0.0) as usize;
    let mut out = vec![*integ.state()];
    for i in 1..=n_steps {
        let t_target = (initial.t + i as f64 * dt).min(t_end);
        integ.step_to(t_target)?;
        if i % every == 0 || i == n_steps {
            out.push(*integ.state());
        }
    }
    Ok(out)
}

/// Closed-form motion of the circular cylinder of effective radius `rho`:
/// `z = h + c1/c0` oscillates harmonically with angular frequency `sqrt(c0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularRolling {
    pub c0: f64,
    pub c1: f64,
    pub curvature: f64,
    initial: RollingState,
}

impl CircularRolling {
    pub fn frequency(&self) -> f64 {
        self.c0.sqrt()
    }

    pub fn vertical_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.frequency()
    }

    pub fn height(&self, t: f64) -> f64 {
        let w = self.frequency();
        let dt = t - self.initial.t;
        let z0 = self.initial.h + self.c1 / self.c0;
        z0 * (w * dt).cos() + self.initial.sigma / w * (w * dt).sin() - self.c1 / self.c0
    }

    pub fn sigma(&self, t: f64) -> f64 {
        let w = self.frequency();
        let dt = t - self.initial.t;
        let z0 = self.initial.h + self.c1 / self.c0;
        -z0 * w * (w * dt).sin() + self.initial.sigma * (w * dt).cos()
    }

    /// `omega_nu - lambda omega_e h` is conserved.
    pub fn omega_nu(&self, t: f64) -> f64 {
        let l = self.curvature * self.initial.omega_e;
        self.initial.omega_nu + l * (self.height(t) - self.initial.h)
    }
}

pub fn circular_closed_form(initial: &RollingState, rho: f64, params: &MassParams) -> Result<CircularRolling> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if initial.omega_e == 0.0 {
        return Err(Error::Degenerate("omega_e = 0: free fall, no oscillation".into()));
    }
    let k = params.gamma2() / (1.0 + params.gamma2());
    let lam = 1.0 / rho;
    let r2 = params.r * params.r;
    let c0 = k * r2 * lam * lam * initial.omega_e * initial.omega_e;
    let c1 = k * r2 * lam * initial.omega_e * (initial.omega_nu - initial.omega_e * initial.h * lam)
        + params.g / (1.0 + params.gamma2());
    Ok(CircularRolling { c0, c1, curvature: lam, initial: *initial })
}

/// Vertical over horizontal period on a circular cylinder, `sqrt((1+g^2)/g^2)`.
pub fn period_ratio(params: &MassParams) -> f64 {
    ((1.0 + params.gamma2()) / params.gamma2()).sqrt()
}

/// Times at which `f` crosses `level` upward, linearly interpolated.
pub fn upward_crossings(samples: &[RollingState], f: impl Fn(&RollingState) -> f64, level: f64) -> Vec<f64> {
    samples
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (f(&w[0]) - level, f(&w[1]) - level);
            (a < 0.0 && b >= 0.0).then(|| w[0].t + (w[1].t - w[0].t) * a / (a - b))
        })
        .collect()
}

/// Vertical period from upward mean crossings of `h` and horizontal period
/// from wrap-arounds of the contact point, measured on a sampled path.
pub fn measured_period_ratio(samples: &[RollingState], mean_height: f64, perimeter: f64) -> Result<f64> {
    let up = upward_crossings(samples, |s| s.h, mean_height);
    if up.len() < 2 {
        return Err(Error::Undefined("fewer than two vertical periods sampled".into()));
    }
    let t_v = (up[up.len() - 1] - up[0]) / (up.len() - 1) as f64;
    // unwrap s and measure the time per full lap by a linear fit endpoint
    let mut total = 0.0;
    for w in samples.windows(2) {
        let mut d = w[1].s - w[0].s;
        if d > perimeter / 2.0 {
            d -= perimeter;
        } else if d < -perimeter / 2.0 {
            d += perimeter;
        }
        total += d;
    }
    let span = samples[samples.len() - 1].t - samples[0].t;
    if total == 0.0 {
        return Err(Error::Undefined("contact point does not move".into()));
    }
    let t_h = span * perimeter / total.abs();
    Ok(t_v / t_h)
}
