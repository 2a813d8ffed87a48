//! File emission and parsing for series and sweep outputs.
//!
//! Both formats are self-describing: every resolved parameter appears in
//! the CSV `#` header block or the JSON `params` object, so a reader can
//! re-run the exact command from the file alone. Floats are serialized
//! with 17 significant digits, which round-trips every `f64` bit pattern.

use std::path::Path;

use serde_json::{json, Map, Value};

use qbm::series::MsdSeries;
use qbm::{QbmError, Result};

/// Serializes a float with 17 significant digits.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// One typed header entry; the type decides its CSV and JSON spellings.
#[derive(Debug, Clone, PartialEq)]
pub enum HeaderValue {
    Float(f64),
    Int(u64),
    Text(String),
}

impl HeaderValue {
    fn render(&self) -> String {
        match self {
            HeaderValue::Float(v) => format_float(*v),
            HeaderValue::Int(v) => v.to_string(),
            HeaderValue::Text(v) => v.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            HeaderValue::Float(v) => json!(v),
            HeaderValue::Int(v) => json!(v),
            HeaderValue::Text(v) => json!(v),
        }
    }
}

/// Ordered header echo; insertion order is emission order.
pub type Header = Vec<(&'static str, HeaderValue)>;

/// Renders a displacement series as CSV text (LF line endings).
pub fn render_series_csv(header: &Header, series: &MsdSeries) -> String {
    let mut out = String::new();
    for (key, value) in header {
        out.push_str(&format!("# {key}={}\n", value.render()));
    }
    out.push_str("t,msd,route,fallback\n");
    let route = series.route.label();
    for i in 0..series.times.len() {
        out.push_str(&format!(
            "{},{},{route},{}\n",
            format_float(series.times[i]),
            format_float(series.values[i]),
            series.fallback_flags[i]
        ));
    }
    out
}

/// Renders a displacement series as JSON text.
///
/// The `route` header entry becomes the top-level `route` field; every
/// other entry lands in `params`.
pub fn render_series_json(header: &Header, series: &MsdSeries) -> String {
    let mut params = Map::new();
    for (key, value) in header {
        if *key != "route" {
            params.insert((*key).to_string(), value.to_json());
        }
    }
    let rows: Vec<Value> = (0..series.times.len())
        .map(|i| {
            json!({
                "t": series.times[i],
                "msd": series.values[i],
                "fallback": series.fallback_flags[i],
            })
        })
        .collect();
    let document = json!({
        "params": Value::Object(params),
        "route": series.route.label(),
        "series": rows,
    });
    let mut text = serde_json::to_string_pretty(&document).expect("static document shape");
    text.push('\n');
    text
}

/// One classified ladder point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega_c: f64,
    pub verdict: &'static str,
    pub n_maxima: usize,
    pub first_max_time: Option<f64>,
}

/// Renders a sweep report as CSV text. `flip` adds a `flip_omega_c`
/// header line only when a transition was found.
pub fn render_sweep_csv(header: &Header, flip: Option<f64>, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for (key, value) in header {
        out.push_str(&format!("# {key}={}\n", value.render()));
    }
    if let Some(omega_c) = flip {
        out.push_str(&format!("# flip_omega_c={}\n", format_float(omega_c)));
    }
    out.push_str("omega_c,verdict,n_maxima,first_max_time\n");
    for row in rows {
        let first = row
            .first_max_time
            .map(format_float)
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{first}\n",
            format_float(row.omega_c),
            row.verdict,
            row.n_maxima
        ));
    }
    out
}

/// Writes rendered text to `path`.
///
/// # Errors
/// [`QbmError::Config`] when the path cannot be written.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| QbmError::Config(format!("output file {}: {e}", path.display())))
}

/// A parsed series CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    /// Header entries in file order, values still textual.
    pub header: Vec<(String, String)>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub routes: Vec<String>,
    pub fallbacks: Vec<bool>,
}

impl ParsedCsv {
    /// Looks up a header value by key.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parses a series CSV file produced by [`render_series_csv`].
///
/// # Errors
/// [`QbmError::Config`] for any structural deviation: malformed header
/// line, missing column line, wrong field count, or an unparseable field.
pub fn parse_series_csv(text: &str) -> Result<ParsedCsv> {
    let mut parsed = ParsedCsv {
        header: Vec::new(),
        times: Vec::new(),
        values: Vec::new(),
        routes: Vec::new(),
        fallbacks: Vec::new(),
    };
    let mut seen_columns = false;
    for (index, line) in text.lines().enumerate() {
        let lineno = index + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if seen_columns {
                return Err(QbmError::Config(format!(
                    "line {lineno}: header line after the column line"
                )));
            }
            let (key, value) = rest.trim_start().split_once('=').ok_or_else(|| {
                QbmError::Config(format!("line {lineno}: header line without `=`"))
            })?;
            parsed.header.push((key.to_string(), value.to_string()));
        } else if !seen_columns {
            if line != "t,msd,route,fallback" {
                return Err(QbmError::Config(format!(
                    "line {lineno}: expected the column line `t,msd,route,fallback`, got `{line}`"
                )));
            }
            seen_columns = true;
        } else {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(QbmError::Config(format!(
                    "line {lineno}: expected 4 fields, got {}",
                    fields.len()
                )));
            }
            let t: f64 = fields[0].parse().map_err(|_| {
                QbmError::Config(format!("line {lineno}: bad time `{}`", fields[0]))
            })?;
            let msd: f64 = fields[1].parse().map_err(|_| {
                QbmError::Config(format!("line {lineno}: bad value `{}`", fields[1]))
            })?;
            let fallback: bool = fields[3].parse().map_err(|_| {
                QbmError::Config(format!("line {lineno}: bad flag `{}`", fields[3]))
            })?;
            parsed.times.push(t);
            parsed.values.push(msd);
            parsed.routes.push(fields[2].to_string());
            parsed.fallbacks.push(fallback);
        }
    }
    if !seen_columns {
        return Err(QbmError::Config(
            "no `t,msd,route,fallback` column line found".to_string(),
        ));
    }
    Ok(parsed)
}
