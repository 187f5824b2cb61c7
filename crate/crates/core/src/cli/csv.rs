//! CSV emission and parsing. Floats use Rust's shortest round-trip formatting,
//! `.` as decimal separator, a header row and `\n` line endings.

use crate::error::{HandsoffError, Result};
use crate::lti::ControlSignal;
use crate::value_map::ValueField;

pub fn fmt_f64(v: f64) -> String {
    // normalize negative zero
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

fn write_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = ::csv::WriterBuilder::new().terminator(::csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn control_csv(u: &ControlSignal) -> String {
    write_table(
        &["t_start", "u"],
        u.values().iter().enumerate().map(|(k, &v)| vec![fmt_f64(u.interval_start(k)), fmt_f64(v)]),
    )
}

/// Several controls on the same grid, one column each.
pub fn multi_control_csv(names: &[&str], controls: &[&ControlSignal]) -> String {
    let mut header = vec!["t_start"];
    header.extend_from_slice(names);
    let first = controls[0];
    write_table(
        &header,
        (0..first.n_intervals()).map(|k| {
            let mut row = vec![fmt_f64(first.interval_start(k))];
            row.extend(controls.iter().map(|u| fmt_f64(u.values()[k])));
            row
        }),
    )
}

/// Parse a `t_start,u` table; the grid must be uniform and start at zero.
pub fn parse_control_csv(text: &str, horizon: f64) -> Result<ControlSignal> {
    let mut reader = ::csv::ReaderBuilder::new().trim(::csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| HandsoffError::InvalidArgument(format!("control CSV: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["t_start", "u"] {
        let got: Vec<&str> = header.iter().collect();
        return Err(HandsoffError::InvalidArgument(format!("line 1: expected header `t_start,u`, got `{}`", got.join(","))));
    }
    let mut starts = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| HandsoffError::InvalidArgument(format!("control CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| HandsoffError::InvalidArgument(format!("line {line}: `{s}` is not a number")))
        };
        starts.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    if values.is_empty() {
        return Err(HandsoffError::InvalidArgument("control CSV has no rows".into()));
    }
    let delta = horizon / values.len() as f64;
    for (k, &t) in starts.iter().enumerate() {
        if (t - k as f64 * delta).abs() > 1e-9 * horizon.max(1.0) {
            return Err(HandsoffError::InvalidArgument(format!(
                "row {}: t_start {t} does not match a uniform grid of {} intervals on [0, {horizon}]",
                k + 1,
                values.len()
            )));
        }
    }
    ControlSignal::new(horizon, values)
}

/// `xi1,xi2,value` (or `xi1,value` for 1-D fields); unreachable points leave `value` empty.
pub fn value_csv(field: &ValueField) -> String {
    let mut header: Vec<String> = (1..=field.axes.len()).map(|d| format!("xi{d}")).collect();
    header.push("value".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        &header,
        field.values.iter().enumerate().map(|(i, v)| {
            let mut row: Vec<String> = field.point(i).into_iter().map(fmt_f64).collect();
            row.push(v.map(fmt_f64).unwrap_or_default());
            row
        }),
    )
}
