//! CSV and JSON serialization of result envelopes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::config::OutputFormat;
use crate::run::{Payload, ResultEnvelope};
use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Tabular form of the payload. Fisher quantities are in units of `1/λ²`.
pub fn to_csv(envelope: &ResultEnvelope) -> String {
    let mut out = String::new();
    match &envelope.payload {
        Payload::FisherSeries(s) => {
            out.push_str("n,delta_F,F_cum,std_err\n");
            for i in 0..s.delta.len() {
                push_row(
                    &mut out,
                    &[(i + 1).to_string(), num(s.delta[i]), num(s.cumulative[i]), num(s.std_err[i])],
                );
            }
        }
        Payload::Gain(g) => {
            out.push_str("n,gain\n");
            for (i, &v) in g.gain.iter().enumerate() {
                push_row(&mut out, &[(i + 1).to_string(), num(v)]);
            }
        }
        Payload::TimeBudget(t) => {
            out.push_str("n,trajectories,inverse_F\n");
            for i in 0..t.n.len() {
                push_row(&mut out, &[t.n[i].to_string(), num(t.trajectories[i]), num(t.inverse_fi[i])]);
            }
        }
        Payload::Curve(c) => {
            let _ = writeln!(out, "n,{},std_err", c.label);
            for i in 0..c.y.len() {
                push_row(&mut out, &[format!("{}", c.x[i] as u64), num(c.y[i]), num(c.y_err[i])]);
            }
        }
        Payload::FieldSnapshots(snaps) => {
            out.push_str("n_seq,photons,probability\n");
            for s in snaps {
                for (m, &p) in s.distribution.y.iter().enumerate() {
                    push_row(&mut out, &[s.n_seq.to_string(), m.to_string(), num(p)]);
                }
            }
        }
        Payload::Wigner(w) => {
            out.push_str("q,p,W\n");
            for (i, &q) in w.q.iter().enumerate() {
                for (j, &p) in w.p.iter().enumerate() {
                    push_row(&mut out, &[num(q), num(p), num(w.values[i][j])]);
                }
            }
        }
    }
    out
}

pub fn to_json(envelope: &ResultEnvelope) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(envelope)
        .map_err(|e| CliError::Numerical(format!("result does not serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render(envelope: &ResultEnvelope, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Csv => Ok(to_csv(envelope)),
        OutputFormat::Json => to_json(envelope),
    }
}

/// Writes the envelope to `path`, or to standard output when `None`.
pub fn emit(envelope: &ResultEnvelope, format: OutputFormat, path: Option<&Path>) -> Result<(), CliError> {
    let text = render(envelope, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}
