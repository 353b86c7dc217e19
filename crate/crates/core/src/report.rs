//! Deterministic JSON and CSV reports.
//!
//! Floats are always written with 17 significant digits so that identical
//! runs produce byte-identical files.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{Format, RunConfig};
use crate::convergence::{InheritanceRow, StudyRow};
use crate::recovery::Param;
use crate::{Result, VERSION};

/// Envelope shared by all reports.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub result: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'a str, config: &'a RunConfig, result: T) -> Self {
        Report {
            tool: "s1lab",
            version: VERSION,
            command,
            config_hash: config.hash(),
            config,
            result,
        }
    }
}

/// Pretty JSON with floats in `{:.16e}` form.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Flat CSV with a header line.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn param_cells(p: Param) -> [String; 2] {
    match p {
        Param::K(k) => ["k".into(), k.to_string()],
        Param::Epsilon(e) => ["epsilon".into(), fmt_f64(e)],
    }
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let header = [
        "param_kind",
        "param",
        "size",
        "area",
        "smooth_part",
        "area_gap",
        "jacobian_mass",
        "total_variation",
        "l1_error",
        "strict_bv",
    ];
    csv_table(
        &header,
        rows.iter().map(|r| {
            let mut cells = param_cells(r.param).to_vec();
            cells.extend(
                [
                    r.size,
                    r.area,
                    r.smooth_part,
                    r.area_gap,
                    r.jacobian_mass,
                    r.total_variation,
                    r.l1_error,
                    r.strict_bv,
                ]
                .map(fmt_f64),
            );
            cells
        }),
    )
}

pub fn inheritance_csv(rows: &[InheritanceRow]) -> String {
    let header = [
        "param_kind",
        "param",
        "radius",
        "trace_variation",
        "reference_variation",
        "sup_distance",
    ];
    csv_table(
        &header,
        rows.iter().map(|r| {
            let mut cells = param_cells(r.param).to_vec();
            cells.extend([r.radius, r.trace_variation, r.reference_variation, r.sup_distance].map(fmt_f64));
            cells
        }),
    )
}

/// Writes `<dir>/<stem>.json` and/or the given CSV files, returning the paths written.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    format: Format,
    json: &str,
    csv: &[(&str, String)],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format.json() {
        let p = dir.join(format!("{stem}.json"));
        std::fs::write(&p, json)?;
        written.push(p);
    }
    if format.csv() {
        for (suffix, text) in csv {
            let name = if suffix.is_empty() {
                format!("{stem}.csv")
            } else {
                format!("{stem}_{suffix}.csv")
            };
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            written.push(p);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapSpec;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json_string(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-300], "n": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn report_embeds_hash_and_version() {
        let cfg = RunConfig::for_map(MapSpec::Vortex);
        let r = Report::new("area", &cfg, 1.5);
        let s = to_json_string(&r).unwrap();
        assert!(s.contains(&cfg.hash()));
        assert!(s.contains(VERSION));
        assert_eq!(s, to_json_string(&Report::new("area", &cfg, 1.5)).unwrap());
    }
}
