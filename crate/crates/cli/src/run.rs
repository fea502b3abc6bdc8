//! Scenario execution and file output.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use noslip_core::algebra::{MassParams, Vector};
use noslip_core::analysis::{
    boundedness_diagnostic, drift_general, portrait_point, period2_residual, trend_fit, Boundedness, CircularHeights, PlatesLadder,
};
use noslip_core::collision::ReducedState;
use noslip_core::flight::{Billiard, CollisionRow, Stepper};
use noslip_core::geometry::CrossSection;
use noslip_core::rolling::{circular_closed_form, integrate_rolling, measured_period_ratio, period_ratio, RollingState};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ScenarioConfig;
use crate::plan::{validate, Job, Plan};
use crate::timeseries::{sample_flights, Flight};
use crate::CliError;

pub type Summary = Map<String, Value>;

pub const COLLISIONS_HEADER: &str = "index,time,x,y,z,h,sigma,w_tau,w_nu,omega_e,energy,residual,defect";
pub const ROLLING_HEADER: &str = "t,h,sigma,omega_nu,s";
pub const PORTRAIT_HEADER: &str = "index,x,y";

#[derive(Serialize)]
struct CollisionCsv {
    index: usize,
    time: f64,
    x: f64,
    y: f64,
    z: f64,
    h: f64,
    sigma: f64,
    w_tau: f64,
    w_nu: f64,
    omega_e: f64,
    energy: f64,
    residual: f64,
    defect: Option<f64>,
}

impl From<&CollisionRow> for CollisionCsv {
    fn from(r: &CollisionRow) -> Self {
        let c = |i: usize| r.position.get(i).copied().unwrap_or(0.0);
        Self {
            index: r.index,
            time: r.time,
            x: c(0),
            y: c(1),
            z: c(2),
            h: r.height,
            sigma: r.sigma,
            w_tau: r.w_tau,
            w_nu: r.w_nu,
            omega_e: r.omega_e,
            energy: r.energy,
            residual: r.residual,
            defect: r.defect,
        }
    }
}

#[derive(Serialize)]
struct RollingCsv {
    t: f64,
    h: f64,
    sigma: f64,
    omega_nu: f64,
    s: f64,
}

impl From<&RollingState> for RollingCsv {
    fn from(s: &RollingState) -> Self {
        Self { t: s.t, h: s.h, sigma: s.sigma, omega_nu: s.omega_nu, s: s.s }
    }
}

#[derive(Serialize)]
struct PortraitCsv {
    index: usize,
    x: f64,
    y: f64,
}

type CsvOut = csv::Writer<BufWriter<File>>;

fn csv_writer(dir: &Path, name: &str) -> Result<CsvOut, CliError> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

fn write_pairs(dir: &Path, name: &str, header: [&str; 2], rows: &[(f64, f64)]) -> Result<(), CliError> {
    let mut w = csv_writer(dir, name)?;
    w.write_record(header)?;
    for &(a, b) in rows {
        w.serialize((a, b))?;
    }
    w.flush()?;
    Ok(())
}

fn fit_json(prefix: &str, fit: &Boundedness, out: &mut Summary) {
    out.insert(format!("{prefix}min"), json!(fit.min));
    out.insert(format!("{prefix}max"), json!(fit.max));
    out.insert(format!("{prefix}secular_slope"), json!(fit.secular_slope));
    out.insert(format!("{prefix}secular_curvature"), json!(fit.secular_curvature));
}

/// Validates, runs and writes every output file into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Summary, CliError> {
    let plan = validate(cfg)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.json"), cfg.to_json())?;
    let mut summary = Summary::new();
    summary.insert("scenario".into(), serde_json::to_value(cfg.scenario).expect("enum serializes"));
    summary.insert("seed".into(), json!(cfg.seed()));
    summary.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    execute(&plan, out_dir, &mut summary)?;
    let text = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)? + "\n";
    fs::write(out_dir.join("summary.json"), text)?;
    Ok(summary)
}

fn execute(plan: &Plan, dir: &Path, out: &mut Summary) -> Result<(), CliError> {
    let p = &plan.params;
    match &plan.job {
        Job::Rolling { initial, dt, t_end } => run_rolling(&plan.section, p, initial, *dt, *t_end, dir, out),
        Job::Billiard { initial, n_collisions, sample_dt } => {
            let b = Billiard::cylinder(plan.section.clone(), *p)?;
            let run = run_billiard(&b, initial, *n_collisions, *sample_dt, dir, out)?;
            if let CrossSection::Circle { .. } = plan.section {
                circle_report(&b, &run, out)?;
            }
            Ok(())
        }
        Job::Period2 { initial, spec, drift_3d, n_collisions, sample_dt } => {
            let b = Billiard::cylinder(plan.section.clone(), *p)?;
            let ts = b.transverse_state(initial);
            out.insert("period2_residual".into(), json!(period2_residual(&plan.section, &ts, &p.with_dim(2))?));
            out.insert("flight_time".into(), json!(spec.t));
            out.insert("drift_predicted".into(), json!(drift_general(spec, p)?));
            out.insert("drift_3d".into(), json!(drift_3d));
            let run = run_billiard(&b, initial, *n_collisions, *sample_dt, dir, out)?;
            let measured = run.fit.map(|f| f.secular_slope);
            out.insert("drift_measured".into(), json!(measured));
            Ok(())
        }
        Job::Portrait { initials, n_collisions } => run_portrait(&plan.section, p, initials, *n_collisions, dir, out),
        Job::Compare { billiard, rolling, dt, t_end } => {
            run_compare(&plan.section, p, billiard, rolling, *dt, *t_end, dir, out)
        }
    }
}

fn run_rolling(
    section: &CrossSection,
    p: &MassParams,
    initial: &RollingState,
    dt: f64,
    t_end: f64,
    dir: &Path,
    out: &mut Summary,
) -> Result<(), CliError> {
    let path = integrate_rolling(initial, section, p, dt, t_end)?;
    let mut w = csv_writer(dir, "rolling.csv")?;
    for s in &path {
        w.serialize(RollingCsv::from(s))?;
    }
    w.flush()?;
    let ts: Vec<f64> = path.iter().map(|s| s.t).collect();
    let hs: Vec<f64> = path.iter().map(|s| s.h).collect();
    out.insert("samples".into(), json!(path.len()));
    if let Ok(fit) = trend_fit(&ts, &hs) {
        fit_json("height_", &fit, out);
    }
    if let CrossSection::Circle { rho } = *section {
        if initial.omega_e != 0.0 {
            let closed = circular_closed_form(initial, rho, p)?;
            let err = path.iter().map(|s| (s.h - closed.height(s.t)).abs()).fold(0.0, f64::max);
            out.insert("closed_form_max_error".into(), json!(err));
            out.insert("vertical_period".into(), json!(closed.vertical_period()));
            out.insert("period_ratio_predicted".into(), json!(period_ratio(p)));
            let measured = measured_period_ratio(&path, -closed.c1 / closed.c0, section.perimeter()?).ok();
            out.insert("period_ratio_measured".into(), json!(measured));
        }
    }
    Ok(())
}

/// What a streamed billiard run keeps in memory.
struct BilliardRun {
    heights: Vec<f64>,
    rows01: Vec<CollisionRow>,
    fit: Option<Boundedness>,
}

fn run_billiard(
    b: &Billiard,
    initial: &ReducedState,
    n: usize,
    sample_dt: Option<f64>,
    dir: &Path,
    out: &mut Summary,
) -> Result<BilliardRun, CliError> {
    let p = &b.params;
    let mut stepper = Stepper::new(initial.clone(), b)?;
    let mut rows_csv = csv_writer(dir, "collisions.csv")?;
    let planar = b.section.transverse_dim() == 2;
    let mut portrait = if planar { Some(csv_writer(dir, "portrait.csv")?) } else { None };
    let plates = matches!(b.section, CrossSection::Plates { .. });
    let mut ladder = PlatesLadder::default();
    let mut heights = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut flights = Vec::new();
    let mut rows01 = Vec::new();
    let (mut e0, mut de, mut max_res, mut caps) = (None, 0.0f64, 0.0f64, 0usize);
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let mut duration = 0.0;
    for _ in 0..n {
        // the stepper holds the post-collision state of the row it emits next
        let point = match portrait.as_mut() {
            Some(_) => Some(portrait_of(b, stepper.state())?),
            None => None,
        };
        let row = stepper.advance()?;
        duration = row.time + row.flight_time;
        rows_csv.serialize(CollisionCsv::from(&row))?;
        let e = *e0.get_or_insert(row.energy);
        de = de.max((row.energy - e).abs());
        max_res = max_res.max(row.residual);
        if !row.piece.is_flat() && matches!(b.section, CrossSection::Stadium { .. }) {
            caps += 1;
        }
        if let (Some(w), Some((x, y))) = (portrait.as_mut(), point) {
            let rad = x.hypot(y);
            rmin = rmin.min(rad);
            rmax = rmax.max(rad);
            w.serialize(PortraitCsv { index: row.index, x, y })?;
        }
        if plates {
            ladder.push(&row)?;
        }
        if sample_dt.is_some() {
            flights.push(Flight::from(&row));
        }
        heights.push(row.height);
        times.push(row.time);
        if rows01.len() < 2 {
            rows01.push(row);
        }
    }
    rows_csv.flush()?;
    if let Some(mut w) = portrait {
        w.flush()?;
        out.insert("portrait_radius_min".into(), json!(rmin));
        out.insert("portrait_radius_max".into(), json!(rmax));
    }
    out.insert("n_collisions".into(), json!(n));
    out.insert("duration".into(), json!(duration));
    out.insert("energy_drift".into(), json!(de));
    out.insert("max_rolling_impact_residual".into(), json!(max_res));
    if matches!(b.section, CrossSection::Stadium { .. }) {
        out.insert("cap_hits".into(), json!(caps));
    }
    let fit = boundedness_diagnostic(&heights).ok();
    if let Some(f) = &fit {
        fit_json("height_", f, out);
        if let Ok(tf) = trend_fit(&times, &heights) {
            out.insert("fall_rate".into(), json!(tf.secular_slope));
            out.insert("fall_curvature_time".into(), json!(tf.secular_curvature));
        }
    }
    if plates && ladder.len() >= 4 {
        let d = ladder.diagnostics(p)?;
        out.insert("ladder_slope".into(), json!(p.gamma));
        out.insert("ladder_max_line_residual".into(), json!(d.max_line_residual));
        out.insert("ladder_max_slope_error".into(), json!(d.max_slope_error));
        out.insert("ellipse_max_residual".into(), json!(d.max_ellipse_residual));
        out.insert("ellipse_c".into(), json!(d.ellipse_c));
        out.insert("ladder_energy".into(), json!(d.energy));
    }
    if let Some(dt) = sample_dt {
        write_pairs(dir, "timeseries.csv", ["t", "h"], &sample_flights(&flights, p.g, dt)?)?;
    }
    Ok(BilliardRun { heights, rows01, fit })
}

fn portrait_of(b: &Billiard, state: &ReducedState) -> Result<(f64, f64), CliError> {
    let frame = b.frame_of(state)?;
    Ok(portrait_point(&b.transverse_state(state), &frame, &b.params)?)
}

/// For circle runs started at transversal rolling impact (defect 1), the
/// largest gap between the simulated heights and the exact bounded sequence.
fn circle_report(b: &Billiard, run: &BilliardRun, out: &mut Summary) -> Result<(), CliError> {
    let tri = run.rows01.first().and_then(|r| r.defect).is_some_and(|d| (d - 1.0).abs() < 1e-9);
    if run.rows01.len() < 2 || !tri {
        return Ok(());
    }
    let (r0, r1) = (&run.rows01[0], &run.rows01[1]);
    let nu0 = Vector::from_column_slice(&r0.nu);
    let nu1 = Vector::from_column_slice(&r1.nu);
    let Ok(closed) = CircularHeights::new(&r0.mixed(), r0.flight_time, &nu0, &nu1, &b.params) else {
        return Ok(());
    };
    let err = run
        .heights
        .iter()
        .enumerate()
        .map(|(i, h)| (closed.height(i, r0.height) - h).abs())
        .fold(0.0, f64::max);
    out.insert("closed_height_max_error".into(), json!(err));
    Ok(())
}

struct OrbitPortrait {
    points: Vec<(f64, f64)>,
    caps: usize,
}

fn orbit_portrait(b: &Billiard, initial: &ReducedState, n: usize) -> Result<OrbitPortrait, CliError> {
    let mut stepper = Stepper::new(initial.clone(), b)?;
    let mut points = Vec::with_capacity(n);
    let mut caps = 0;
    for _ in 0..n {
        points.push(portrait_of(b, stepper.state())?);
        let row = stepper.advance()?;
        if !row.piece.is_flat() {
            caps += 1;
        }
    }
    Ok(OrbitPortrait { points, caps })
}

fn run_portrait(
    section: &CrossSection,
    p: &MassParams,
    initials: &[ReducedState],
    n: usize,
    dir: &Path,
    out: &mut Summary,
) -> Result<(), CliError> {
    let b = Billiard::cylinder(section.clone(), *p)?;
    // collected by orbit index, so the output order does not depend on scheduling
    let orbits: Vec<OrbitPortrait> =
        initials.par_iter().map(|st| orbit_portrait(&b, st, n)).collect::<Result<_, _>>()?;
    let mut w = csv_writer(dir, "portrait.csv")?;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let mut caps = Vec::new();
    for (k, o) in orbits.iter().enumerate() {
        for (i, &(x, y)) in o.points.iter().enumerate() {
            let rad = x.hypot(y);
            rmin = rmin.min(rad);
            rmax = rmax.max(rad);
            w.serialize(PortraitCsv { index: k * n + i, x, y })?;
        }
        caps.push(o.caps);
    }
    w.flush()?;
    out.insert("orbits".into(), json!(initials.len()));
    out.insert("n_collisions".into(), json!(n));
    out.insert("portrait_radius_min".into(), json!(rmin));
    out.insert("portrait_radius_max".into(), json!(rmax));
    out.insert("cap_hits".into(), json!(caps));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_compare(
    section: &CrossSection,
    p: &MassParams,
    billiard: &ReducedState,
    rolling: &RollingState,
    dt: f64,
    t_end: f64,
    dir: &Path,
    out: &mut Summary,
) -> Result<(), CliError> {
    let CrossSection::Circle { rho } = *section else { unreachable!("compare-roll-bounce uses a circle") };
    let b = Billiard::cylinder(section.clone(), *p)?;
    let mut stepper = Stepper::new(billiard.clone(), &b)?;
    let mut rows_csv = csv_writer(dir, "collisions.csv")?;
    let mut pairs = Vec::new();
    let closed = circular_closed_form(rolling, rho, p)?;
    loop {
        let row = stepper.advance()?;
        if row.time > t_end {
            break;
        }
        rows_csv.serialize(CollisionCsv::from(&row))?;
        pairs.push((row.time, row.height, closed.height(row.time)));
    }
    rows_csv.flush()?;
    let path = integrate_rolling(rolling, section, p, dt, t_end)?;
    let mut w = csv_writer(dir, "rolling.csv")?;
    for s in &path {
        w.serialize(RollingCsv::from(s))?;
    }
    w.flush()?;
    let mut w = csv_writer(dir, "compare.csv")?;
    w.write_record(["t", "h_bounce", "h_roll"])?;
    for &(t, hb, hr) in &pairs {
        w.serialize((t, hb, hr))?;
    }
    w.flush()?;
    let (lo, hi) = path.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| (l.min(s.h), h.max(s.h)));
    let amplitude = 0.5 * (hi - lo);
    let gap = pairs.iter().map(|&(_, hb, hr)| (hb - hr).abs()).fold(0.0, f64::max);
    out.insert("collisions".into(), json!(pairs.len()));
    out.insert("rolling_omega_e".into(), json!(rolling.omega_e));
    out.insert("rolling_amplitude".into(), json!(amplitude));
    out.insert("max_gap".into(), json!(gap));
    out.insert("gap_ratio".into(), json!(gap / amplitude));
    let err = path.iter().map(|s| (s.h - closed.height(s.t)).abs()).fold(0.0, f64::max);
    out.insert("rolling_closed_form_max_error".into(), json!(err));
    Ok(())
}
