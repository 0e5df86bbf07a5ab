//! File formats for single operations: a per-sample CSV, the audio as a
//! single-column CSV, and a JSON summary.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::operation::OperationRecord;
use crate::plant::{AudioRecord, EnergyAudit, ImpactEvent};

/// Column order of [`write_samples_csv`].
pub const SAMPLE_COLUMNS: [&str; 9] = ["t", "u", "current", "lambda", "lambda_hat", "lambda_d", "theta", "omega", "stage"];

pub fn write_samples_csv<W: Write>(record: &OperationRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLE_COLUMNS)?;
    for s in &record.samples {
        w.write_record(&[
            s.t.to_string(),
            s.u.to_string(),
            s.current.to_string(),
            s.lambda.to_string(),
            s.lambda_hat.to_string(),
            s.lambda_d.to_string(),
            s.theta.to_string(),
            s.omega.to_string(),
            format!("{:?}", s.stage),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_audio_csv<W: Write>(audio: &AudioRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u_audio"])?;
    for s in &audio.samples {
        w.write_record([s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    operation_index: usize,
    direction: crate::trajectory::Direction,
    mode: crate::operation::ControlMode,
    resistance_true: f64,
    r_hat: f64,
    cost: f64,
    landing_speed: Option<f64>,
    clamped_samples: usize,
    saturated_samples: usize,
    audio_sample_rate: f64,
    audio_start_time: f64,
    energy: &'a EnergyAudit,
    events: &'a [ImpactEvent],
}

pub fn write_summary_json<W: Write>(record: &OperationRecord, out: W) -> Result<()> {
    let summary = Summary {
        operation_index: record.operation_index,
        direction: record.direction,
        mode: record.mode,
        resistance_true: record.resistance_true,
        r_hat: record.r_hat,
        cost: record.cost,
        landing_speed: record.landing_speed(),
        clamped_samples: record.clamped_samples,
        saturated_samples: record.saturated_samples,
        audio_sample_rate: record.audio.sample_rate,
        audio_start_time: record.audio.start_time,
        energy: &record.energy,
        events: &record.events,
    };
    serde_json::to_writer_pretty(out, &summary)?;
    Ok(())
}
