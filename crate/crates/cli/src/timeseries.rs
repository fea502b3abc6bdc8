//! Uniform-in-time sampling of the height between collisions.

use noslip_core::flight::{CollisionRow, TrajectoryRecord};

use crate::CliError;

/// One free flight: post-collision height and axial velocity at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flight {
    pub time: f64,
    pub height: f64,
    pub sigma: f64,
    pub flight_time: f64,
}

impl From<&CollisionRow> for Flight {
    fn from(r: &CollisionRow) -> Self {
        Self { time: r.time, height: r.height, sigma: r.sigma, flight_time: r.flight_time }
    }
}

/// `(t, h)` at `t = 0, dt, 2 dt, ...` up to the end of the last flight,
/// using `h = h_i + sigma_i s - g s^2 / 2` on each flight.
pub fn emit_timeseries(record: &TrajectoryRecord, g: f64, dt_sample: f64) -> Result<Vec<(f64, f64)>, CliError> {
    let flights: Vec<Flight> = record.rows.iter().map(Flight::from).collect();
    sample_flights(&flights, g, dt_sample)
}

pub fn sample_flights(flights: &[Flight], g: f64, dt_sample: f64) -> Result<Vec<(f64, f64)>, CliError> {
    if !(dt_sample > 0.0 && dt_sample.is_finite()) {
        return Err(CliError::Config(format!("sample step must be positive, got {dt_sample}")));
    }
    let Some(last) = flights.last() else { return Ok(Vec::new()) };
    let end = last.time + last.flight_time;
    // admit a sample that lands on the final instant up to roundoff
    let slack = 1e-12 * end.max(1.0);
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k as f64 * dt_sample;
        if t > end + slack {
            break;
        }
        let i = flights.partition_point(|f| f.time <= t).max(1) - 1;
        let f = &flights[i];
        let s = t - f.time;
        out.push((t, f.height + f.sigma * s - 0.5 * g * s * s));
        k += 1;
    }
    Ok(out)
}
