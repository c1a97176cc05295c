//! Plain-text formats: timestamp lists and CSV histograms and correlograms.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write followed by a read reproduces every value bit for bit.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimation::DecayHistogram;
use crate::photon_stats::Correlogram;
use crate::stream::{Channel, PhotonStream};

pub const HISTOGRAM_HEADER: [&str; 2] = ["time_ns", "counts"];
pub const CORRELOGRAM_HEADER: [&str; 3] = ["lag_ns", "g2", "coincidences"];
const DURATION_KEY: &str = "duration_ns";

/// Contents of a timestamp file.
#[derive(Debug, Clone, PartialEq)]
pub enum TimestampData {
    /// One untagged stream.
    Single(PhotonStream),
    /// Two HBT arms from a file with a channel column.
    Split { a: PhotonStream, b: PhotonStream },
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 =
        field.trim().parse().map_err(|_| parse_err(line, format!("{what} `{}` is not a number", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} must be finite, got {v}")));
    }
    Ok(v)
}

/// Parses one timestamp (ns) per line with an optional `A`/`B` channel column.
///
/// Blank lines and lines starting with `#` are skipped, except a
/// `# duration_ns <value>` header that sets the observation window. Without
/// it the window ends at the last timestamp.
pub fn parse_timestamps(text: &str) -> Result<TimestampData> {
    let mut duration = None;
    let mut untagged = Vec::new();
    let mut tagged: [Vec<(f64, usize)>; 2] = [Vec::new(), Vec::new()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(comment) = s.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some(DURATION_KEY) {
                let v = words.next().ok_or_else(|| parse_err(line, "duration header without a value"))?;
                let d = parse_f64(v, line, "duration")?;
                if d < 0.0 || duration.replace(d).is_some() {
                    return Err(parse_err(line, "duration must be >= 0 and given once"));
                }
            }
            continue;
        }
        let mut fields = s.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty());
        let t = parse_f64(fields.next().unwrap_or_default(), line, "timestamp")?;
        if t < 0.0 {
            return Err(parse_err(line, format!("timestamp must be >= 0, got {t}")));
        }
        match fields.next() {
            None => untagged.push((t, line)),
            Some("A") => tagged[0].push((t, line)),
            Some("B") => tagged[1].push((t, line)),
            Some(other) => return Err(parse_err(line, format!("channel must be A or B, got `{other}`"))),
        }
        if let Some(extra) = fields.next() {
            return Err(parse_err(line, format!("unexpected extra column `{extra}`")));
        }
    }
    let has_tagged = !tagged[0].is_empty() || !tagged[1].is_empty();
    if has_tagged && !untagged.is_empty() {
        return Err(parse_err(untagged[0].1, "missing channel column in a channel-tagged file"));
    }
    let last = untagged.iter().chain(&tagged[0]).chain(&tagged[1]).map(|p| p.0).fold(0.0, f64::max);
    let duration = duration.unwrap_or(last);
    let build = |rows: &[(f64, usize)]| -> Result<PhotonStream> {
        for w in rows.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(parse_err(w[1].1, "timestamps must be strictly increasing"));
            }
        }
        if let Some(&(t, line)) = rows.iter().find(|p| p.0 > duration) {
            return Err(parse_err(line, format!("timestamp {t} exceeds the declared duration {duration}")));
        }
        PhotonStream::new(rows.iter().map(|p| p.0).collect(), duration)
    };
    if has_tagged {
        Ok(TimestampData::Split {
            a: build(&tagged[0])?.with_channel(Channel::A),
            b: build(&tagged[1])?.with_channel(Channel::B),
        })
    } else {
        Ok(TimestampData::Single(build(&untagged)?))
    }
}

pub fn format_timestamps(stream: &PhotonStream) -> String {
    let mut out = String::with_capacity(16 * stream.len() + 32);
    writeln!(out, "# {DURATION_KEY} {}", stream.duration()).unwrap();
    for t in stream.timestamps() {
        writeln!(out, "{t}").unwrap();
    }
    out
}

/// Merges two arms into one time-ordered, channel-tagged listing.
pub fn format_split_timestamps(a: &PhotonStream, b: &PhotonStream) -> String {
    let mut out = String::with_capacity(18 * (a.len() + b.len()) + 32);
    writeln!(out, "# {DURATION_KEY} {}", a.duration().max(b.duration())).unwrap();
    let (ta, tb) = (a.timestamps(), b.timestamps());
    let (mut i, mut j) = (0, 0);
    while i < ta.len() || j < tb.len() {
        if j >= tb.len() || (i < ta.len() && ta[i] <= tb[j]) {
            writeln!(out, "{} A", ta[i]).unwrap();
            i += 1;
        } else {
            writeln!(out, "{} B", tb[j]).unwrap();
            j += 1;
        }
    }
    out
}

fn csv_rows(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let values =
            header.iter().zip(record.iter()).map(|(name, f)| parse_f64(f, line, name)).collect::<Result<Vec<_>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

/// Reads a `time_ns,counts` CSV; the bin width is the center spacing.
pub fn parse_histogram_csv(text: &str) -> Result<DecayHistogram> {
    let rows = csv_rows(text, &HISTOGRAM_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::InsufficientData("a histogram needs at least two bins".into()));
    }
    let width = rows[1].1[0] - rows[0].1[0];
    let (t, c) = rows.into_iter().map(|(_, v)| (v[0], v[1])).unzip();
    DecayHistogram::new(t, c, width)
}

pub fn format_histogram_csv(hist: &DecayHistogram) -> String {
    let mut out = HISTOGRAM_HEADER.join(",") + "\n";
    for (t, c) in hist.bin_centers.iter().zip(&hist.counts) {
        writeln!(out, "{t},{c}").unwrap();
    }
    out
}

pub fn parse_correlogram_csv(text: &str) -> Result<Correlogram> {
    let rows = csv_rows(text, &CORRELOGRAM_HEADER)?;
    let mut lags = Vec::with_capacity(rows.len());
    let mut g2 = Vec::with_capacity(rows.len());
    let mut coinc = Vec::with_capacity(rows.len());
    for (_, v) in rows {
        lags.push(v[0]);
        g2.push(v[1]);
        coinc.push(v[2]);
    }
    Correlogram::from_table(lags, g2, coinc)
}

pub fn format_correlogram_csv(corr: &Correlogram) -> String {
    let mut out = CORRELOGRAM_HEADER.join(",") + "\n";
    for ((t, g), c) in corr.lag_centers.iter().zip(&corr.g2_values).zip(&corr.raw_coincidences) {
        writeln!(out, "{t},{g},{c}").unwrap();
    }
    out
}
