//! Validation: turns a [`ScenarioConfig`] into fully built core objects.

use std::f64::consts::PI;

use noslip_core::algebra::{gamma_uniform, MassParams, Matrix, SkewMatrix, Vector};
use noslip_core::analysis::{drift_3d, period2_initials, DriftSpec};
use noslip_core::collision::{FrameComponents, MixedVelocity, ReducedState};
use noslip_core::geometry::{CrossSection, Piece};
use noslip_core::rolling::RollingState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Initial, Scenario, ScenarioConfig};
use crate::CliError;

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    pub params: MassParams,
    pub section: CrossSection,
    pub job: Job,
}

#[derive(Debug, Clone)]
pub enum Job {
    Rolling { initial: RollingState, dt: f64, t_end: f64 },
    Billiard { initial: ReducedState, n_collisions: usize, sample_dt: Option<f64> },
    Period2 { initial: ReducedState, spec: DriftSpec, drift_3d: f64, n_collisions: usize, sample_dt: Option<f64> },
    /// Seeded sweep; orbit `k` starts from `initials[k]`.
    Portrait { initials: Vec<ReducedState>, n_collisions: usize },
    Compare { billiard: ReducedState, rolling: RollingState, dt: f64, t_end: f64 },
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn core_invalid(e: noslip_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

/// Fails if any of the named fields is set.
fn reject(scenario: Scenario, fields: &[(&str, bool)]) -> Result<(), CliError> {
    match fields.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(invalid(format!("`{name}` is not used by scenario {scenario:?}"))),
        None => Ok(()),
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("`{name}` must be positive, got {v}")))
    }
}

fn finite(name: &str, v: Option<f64>) -> Result<f64, CliError> {
    let v = v.unwrap_or(0.0);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("`{name}` must be finite")))
    }
}

pub fn validate(cfg: &ScenarioConfig) -> Result<Plan, CliError> {
    let sc = cfg.scenario;
    let params = build_params(cfg)?;
    let section = build_section(cfg, &params)?;
    check_run_mode(cfg)?;
    let ini = &cfg.initial;
    if ini.defect.is_some() && ini.omega_e.is_some() {
        return Err(invalid("`defect` and `omega_e` are mutually exclusive"));
    }
    let job = match sc {
        Scenario::CircularRolling | Scenario::StadiumRolling => {
            reject(
                sc,
                &[
                    ("u_tau", ini.u_tau.is_some()),
                    ("u_nu", ini.u_nu.is_some()),
                    ("omega_tau", ini.omega_tau.is_some()),
                    ("defect", ini.defect.is_some()),
                    ("phi", ini.phi.is_some()),
                    ("speed", ini.speed.is_some()),
                ],
            )?;
            Job::Rolling { initial: rolling_state(ini, None)?, dt: cfg.run.dt.unwrap(), t_end: cfg.run.t_end.unwrap() }
        }
        Scenario::CircularBilliard | Scenario::StadiumBilliard => {
            reject(sc, &[("phi", ini.phi.is_some()), ("speed", ini.speed.is_some())])?;
            Job::Billiard {
                initial: section_state(ini, &section, &params, 0.0)?,
                n_collisions: cfg.run.n_collisions.unwrap(),
                sample_dt: cfg.run.sample_dt,
            }
        }
        Scenario::Plates => {
            reject(sc, &[("phi", ini.phi.is_some()), ("speed", ini.speed.is_some())])?;
            Job::Billiard {
                initial: plates_state(ini, &section, &params)?,
                n_collisions: cfg.run.n_collisions.unwrap(),
                sample_dt: cfg.run.sample_dt,
            }
        }
        Scenario::Period2Drift => {
            reject(
                sc,
                &[
                    ("arc_param", ini.arc_param.is_some()),
                    ("u_tau", ini.u_tau.is_some()),
                    ("u_nu", ini.u_nu.is_some()),
                    ("omega_e", ini.omega_e.is_some()),
                    ("defect", ini.defect.is_some()),
                ],
            )?;
            period2_job(cfg, &section, &params)?
        }
        Scenario::Portrait => {
            reject(sc, &[("phi", ini.phi.is_some()), ("speed", ini.speed.is_some())])?;
            let orbits = cfg.run.orbits.unwrap_or(1);
            let base = section_state(ini, &section, &params, 0.0)?;
            let mut initials = vec![base];
            // further orbits scale the spin by seeded uniform factors
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            let spin = if ini.defect.is_some() {
                -ini.defect.unwrap() * finite("u_tau", ini.u_tau)? / params.r
            } else {
                finite("omega_e", ini.omega_e)?
            };
            for _ in 1..orbits {
                let f: f64 = rng.gen();
                let mut v = ini.clone();
                v.defect = None;
                v.omega_e = Some(spin * f);
                initials.push(section_state(&v, &section, &params, 0.0)?);
            }
            Job::Portrait { initials, n_collisions: cfg.run.n_collisions.unwrap() }
        }
        Scenario::CompareRollBounce => {
            reject(
                sc,
                &[("omega_tau", ini.omega_tau.is_some()), ("phi", ini.phi.is_some()), ("speed", ini.speed.is_some())],
            )?;
            compare_job(cfg, &section, &params)?
        }
    };
    Ok(Plan { scenario: sc, params, section, job })
}

fn build_params(cfg: &ScenarioConfig) -> Result<MassParams, CliError> {
    let ph = &cfg.physics;
    let n = ph.n.unwrap_or(3);
    let allowed: &[usize] = if cfg.scenario == Scenario::Plates { &[2, 3] } else { &[3] };
    if !allowed.contains(&n) {
        return Err(invalid(format!("dimension n = {n} is not supported by scenario {:?}", cfg.scenario)));
    }
    let gamma = match (ph.gamma, ph.gamma2) {
        (Some(_), Some(_)) => return Err(invalid("`gamma` and `gamma2` are mutually exclusive")),
        (Some(g), None) => g,
        (None, Some(g2)) => positive("gamma2", g2)?.sqrt(),
        (None, None) => gamma_uniform(n),
    };
    let r = cfg.geometry.r.unwrap_or(1.0);
    MassParams::new(n, r, ph.m.unwrap_or(1.0), gamma, ph.g.unwrap_or(0.0)).map_err(core_invalid)
}

fn build_section(cfg: &ScenarioConfig, params: &MassParams) -> Result<CrossSection, CliError> {
    let geo = &cfg.geometry;
    let sc = cfg.scenario;
    let circle_rho = || -> Result<f64, CliError> {
        match (geo.rho, geo.big_r) {
            (Some(_), Some(_)) => Err(invalid("`rho` and `R` are mutually exclusive")),
            (Some(rho), None) => Ok(rho),
            (None, Some(big_r)) => Ok(big_r - params.r),
            (None, None) => Err(invalid("the section needs `rho` or `R`")),
        }
    };
    let section = match sc {
        Scenario::CircularRolling | Scenario::CircularBilliard | Scenario::Period2Drift | Scenario::CompareRollBounce => {
            reject(sc, &[("half_len", geo.half_len.is_some()), ("gap", geo.gap.is_some())])?;
            CrossSection::circle(circle_rho()?)
        }
        Scenario::StadiumBilliard | Scenario::StadiumRolling => {
            reject(sc, &[("gap", geo.gap.is_some())])?;
            let half_len = geo.half_len.ok_or_else(|| invalid("the stadium needs `half_len`"))?;
            CrossSection::stadium(circle_rho()?, half_len)
        }
        Scenario::Portrait => {
            reject(sc, &[("gap", geo.gap.is_some())])?;
            match geo.half_len {
                Some(half_len) => CrossSection::stadium(circle_rho()?, half_len),
                None => CrossSection::circle(circle_rho()?),
            }
        }
        Scenario::Plates => {
            reject(
                sc,
                &[("rho", geo.rho.is_some()), ("R", geo.big_r.is_some()), ("half_len", geo.half_len.is_some())],
            )?;
            let gap = geo.gap.ok_or_else(|| invalid("plates need `gap`"))?;
            CrossSection::plates(gap, params.n - 1)
        }
    };
    section.map_err(core_invalid)
}

fn check_run_mode(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let run = &cfg.run;
    let sc = cfg.scenario;
    if sc.counts_collisions() {
        reject(sc, &[("dt", run.dt.is_some()), ("t_end", run.t_end.is_some())])?;
        match run.n_collisions {
            Some(n) if n >= 1 => {}
            Some(_) => return Err(invalid("`n_collisions` must be at least 1")),
            None => return Err(invalid(format!("scenario {sc:?} needs `n_collisions`"))),
        }
    } else {
        reject(sc, &[("n_collisions", run.n_collisions.is_some())])?;
        match (run.dt, run.t_end) {
            (Some(dt), Some(t_end)) => {
                positive("dt", dt)?;
                positive("t_end", t_end)?;
            }
            _ => return Err(invalid(format!("scenario {sc:?} needs both `dt` and `t_end`"))),
        }
    }
    let takes_samples = matches!(sc, Scenario::CircularBilliard | Scenario::StadiumBilliard | Scenario::Plates | Scenario::Period2Drift);
    if !takes_samples {
        reject(sc, &[("sample_dt", run.sample_dt.is_some())])?;
    }
    if let Some(dt) = run.sample_dt {
        positive("sample_dt", dt)?;
    }
    if sc != Scenario::Portrait {
        reject(sc, &[("orbits", run.orbits.is_some())])?;
    } else if run.orbits == Some(0) {
        return Err(invalid("`orbits` must be at least 1"));
    }
    Ok(())
}

fn rolling_state(ini: &Initial, omega_e: Option<f64>) -> Result<RollingState, CliError> {
    Ok(RollingState {
        s: finite("arc_param", ini.arc_param)?,
        h: finite("height", ini.height)?,
        sigma: finite("sigma0", ini.sigma0)?,
        omega_nu: finite("omega_nu", ini.omega_nu)?,
        omega_e: match omega_e {
            Some(w) => w,
            None => finite("omega_e", ini.omega_e)?,
        },
        t: 0.0,
    })
}

/// Spin about the axis from `omega_e` or from the requested defect.
fn axial_spin(ini: &Initial, params: &MassParams, default_defect: Option<f64>) -> Result<f64, CliError> {
    let u_tau = finite("u_tau", ini.u_tau)?;
    match (ini.omega_e, ini.defect.or(default_defect)) {
        (Some(w), _) => finite("omega_e", Some(w)),
        (None, Some(d)) => {
            if u_tau == 0.0 {
                return Err(invalid("a rolling defect needs a nonzero `u_tau`"));
            }
            Ok(-finite("defect", Some(d))? * u_tau / params.r)
        }
        (None, None) => Ok(0.0),
    }
}

fn incoming_speed(ini: &Initial) -> Result<f64, CliError> {
    let u_nu = ini.u_nu.ok_or_else(|| invalid("the billiard needs `u_nu` > 0"))?;
    positive("u_nu", u_nu)
}

/// Billiard start on a circle or stadium at `arc_param`.
fn section_state(
    ini: &Initial,
    section: &CrossSection,
    params: &MassParams,
    omega_tau_default: f64,
) -> Result<ReducedState, CliError> {
    let frame = section.frame_at(finite("arc_param", ini.arc_param)?).map_err(core_invalid)?;
    let c = FrameComponents {
        sigma: finite("sigma0", ini.sigma0)?,
        u_tau: finite("u_tau", ini.u_tau)?,
        u_nu: incoming_speed(ini)?,
        omega_tau: ini.omega_tau.map_or(Ok(omega_tau_default), |w| finite("omega_tau", Some(w)))?,
        omega_nu: finite("omega_nu", ini.omega_nu)?,
        omega_e: axial_spin(ini, params, None)?,
    };
    ReducedState::from_frame_components(&frame, finite("height", ini.height)?, c).map_err(core_invalid)
}

/// Start on the lower plate; `arc_param` is the offset along it.
fn plates_state(ini: &Initial, section: &CrossSection, params: &MassParams) -> Result<ReducedState, CliError> {
    if params.n == 3 {
        let frame = section.plates_frame(Piece::LowerPlate, finite("arc_param", ini.arc_param)?).map_err(core_invalid)?;
        let c = FrameComponents {
            sigma: finite("sigma0", ini.sigma0)?,
            u_tau: finite("u_tau", ini.u_tau)?,
            u_nu: incoming_speed(ini)?,
            omega_tau: finite("omega_tau", ini.omega_tau)?,
            omega_nu: finite("omega_nu", ini.omega_nu)?,
            omega_e: axial_spin(ini, params, None)?,
        };
        return ReducedState::from_frame_components(&frame, finite("height", ini.height)?, c).map_err(core_invalid);
    }
    reject(
        Scenario::Plates,
        &[
            ("arc_param", ini.arc_param.is_some()),
            ("u_tau", ini.u_tau.is_some()),
            ("omega_nu", ini.omega_nu.is_some()),
            ("omega_e", ini.omega_e.is_some()),
            ("defect", ini.defect.is_some()),
        ],
    )?;
    // n = 2: the lower plate is x = -gap/2 with inward normal +x; the only
    // rotation is in the (x, e) plane, U e = -omega_tau nu
    let frame = section.plates_frame(Piece::LowerPlate, 0.0).map_err(core_invalid)?;
    let nu = frame.nu[0];
    let a = Vector::from_vec(vec![frame.point[0], finite("height", ini.height)?]);
    let u = Vector::from_vec(vec![incoming_speed(ini)? * nu, finite("sigma0", ini.sigma0)?]);
    let w = finite("omega_tau", ini.omega_tau)?;
    let ang = Matrix::from_row_slice(2, 2, &[0.0, -w * nu, w * nu, 0.0]);
    let ang = SkewMatrix::try_from_matrix(ang, 0.0).map_err(core_invalid)?;
    ReducedState::new(a, u, ang).map_err(core_invalid)
}

fn period2_job(cfg: &ScenarioConfig, section: &CrossSection, params: &MassParams) -> Result<Job, CliError> {
    let ini = &cfg.initial;
    let phi = ini.phi.ok_or_else(|| invalid("period2-drift needs `phi`"))?;
    if !(phi > 0.0 && phi < PI / 2.0) {
        return Err(invalid(format!("`phi` must lie in (0, pi/2), got {phi}")));
    }
    let CrossSection::Circle { rho } = *section else { unreachable!("period2-drift uses a circle") };
    let speed = match ini.speed {
        Some(v) => positive("speed", v)?,
        None => 2.0 * rho * phi.cos(),
    };
    let ts = period2_initials(section, phi, speed, params).map_err(core_invalid)?;
    let (hit, t) = section.next_transverse_collision(&ts.a_bar, &ts.u_bar).map_err(core_invalid)?;
    let f0 = section.frame_at_point(&ts.a_bar).map_err(core_invalid)?;
    let f1 = section.frame_at_point(&hit).map_err(core_invalid)?;
    let tau0 = f0.tau.clone().expect("2-D frame");
    let tau1 = f1.tau.clone().expect("2-D frame");
    let (sigma0, omega_nu, omega_tau) =
        (finite("sigma0", ini.sigma0)?, finite("omega_nu", ini.omega_nu)?, finite("omega_tau", ini.omega_tau)?);
    let c = FrameComponents {
        sigma: sigma0,
        u_tau: ts.u_bar.dot(&tau0),
        u_nu: ts.u_bar.dot(&f0.nu),
        omega_e: ts.theta_dot().expect("planar state"),
        ..Default::default()
    };
    let mut initial = ReducedState::from_frame_components(&f0, finite("height", ini.height)?, c).map_err(core_invalid)?;
    // omega_nu and omega_tau are measured in the frame of the first
    // collision; U e = omega x e gives U_02 = omega_y and U_12 = -omega_x
    let om = [omega_tau * tau1[0] + omega_nu * f1.nu[0], omega_tau * tau1[1] + omega_nu * f1.nu[1]];
    let mut ang = initial.ang.entries().clone();
    ang[(2, 1)] = om[0];
    ang[(1, 2)] = -om[0];
    ang[(0, 2)] = om[1];
    ang[(2, 0)] = -om[1];
    initial.ang = SkewMatrix::try_from_matrix(ang, 0.0).map_err(core_invalid)?;
    let spec = DriftSpec { nu1: f1.nu.clone(), nu2: f0.nu.clone(), lambda0: MixedVelocity::from_state(&initial, params), t };
    let d3 = drift_3d(phi, sigma0, omega_nu, omega_tau, params).map_err(core_invalid)?;
    Ok(Job::Period2 {
        initial,
        spec,
        drift_3d: d3 * t,
        n_collisions: cfg.run.n_collisions.unwrap(),
        sample_dt: cfg.run.sample_dt,
    })
}

/// Billiard at rolling impact (unless a defect or spin is given) and the
/// rolling motion whose contact point turns at the same mean rate.
fn compare_job(cfg: &ScenarioConfig, section: &CrossSection, params: &MassParams) -> Result<Job, CliError> {
    let ini = &cfg.initial;
    let u_tau = finite("u_tau", ini.u_tau)?;
    if u_tau == 0.0 {
        return Err(invalid("compare-roll-bounce needs a nonzero `u_tau`"));
    }
    let u_nu = incoming_speed(ini)?;
    let mut bounce = ini.clone();
    if bounce.omega_e.is_none() && bounce.defect.is_none() {
        bounce.defect = Some(1.0);
    }
    // omega_tau = sigma0 / r removes the longitudinal slip at the contact
    let billiard = section_state(&bounce, section, params, finite("sigma0", ini.sigma0)? / params.r)?;
    // chords at angle theta from the tangent advance the contact point by
    // 2 theta rho per flight time 2 rho sin(theta) / |u|
    let theta = u_nu.atan2(u_tau.abs());
    let speed = u_tau.hypot(u_nu);
    let rate = u_tau.signum() * theta * speed / theta.sin();
    let rolling = rolling_state(ini, Some(-rate / params.r))?;
    Ok(Job::Compare { billiard, rolling, dt: cfg.run.dt.unwrap(), t_end: cfg.run.t_end.unwrap() })
}
