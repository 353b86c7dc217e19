//! Field files: a JSON metadata document next to a flat little-endian `f64` array.
//!
//! Values are stored node-major with components interleaved. Masked-out nodes
//! are written as NaN, which is how the mask round-trips.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GridField, GridSpec, ScalarGridField};
use crate::{Error, Result, Vec2};

pub const FORMAT_NAME: &str = "s1lab-field";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMetadata {
    pub format: String,
    pub format_version: u32,
    pub spec: GridSpec,
    pub components: usize,
    pub node_count: usize,
    pub dtype: String,
    pub endianness: String,
    pub value_layout: String,
    pub masked_value: String,
    pub data_file: String,
}

fn paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("json"), base.with_extension("bin"))
}

fn write_pair(base: &Path, spec: &GridSpec, components: usize, data: &[f64]) -> Result<()> {
    let (meta_path, bin_path) = paths(base);
    let meta = FieldMetadata {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        spec: *spec,
        components,
        node_count: spec.node_count(),
        dtype: "f64".into(),
        endianness: "little".into(),
        value_layout: "node-major, components interleaved".into(),
        masked_value: "NaN".into(),
        data_file: bin_path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string(),
    };
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bin_path, bytes)?;
    let mut f = fs::File::create(&meta_path)?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn read_pair(base: &Path, components: usize) -> Result<(GridSpec, Vec<f64>)> {
    let (meta_path, _) = paths(base);
    let meta: FieldMetadata = serde_json::from_slice(&fs::read(&meta_path)?)?;
    if meta.format != FORMAT_NAME || meta.format_version != FORMAT_VERSION {
        return Err(Error::InvalidField(format!(
            "unsupported format {} v{}",
            meta.format, meta.format_version
        )));
    }
    if meta.dtype != "f64" || meta.endianness != "little" {
        return Err(Error::InvalidField("only little-endian f64 data is supported".into()));
    }
    if meta.components != components {
        return Err(Error::InvalidField(format!(
            "expected {components} components, file has {}",
            meta.components
        )));
    }
    let spec = meta.spec.validated()?;
    if meta.node_count != spec.node_count() {
        return Err(Error::InvalidField("node count disagrees with grid spec".into()));
    }
    let bin_path = meta_path.with_file_name(&meta.data_file);
    let bytes = fs::read(bin_path)?;
    if bytes.len() != spec.node_count() * components * 8 {
        return Err(Error::InvalidField(format!(
            "data file has {} bytes, expected {}",
            bytes.len(),
            spec.node_count() * components * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((spec, data))
}

/// Writes `<base>.json` and `<base>.bin`.
pub fn write_field(field: &GridField, base: &Path) -> Result<()> {
    let mut data = Vec::with_capacity(field.values().len() * 2);
    for (v, m) in field.values().iter().zip(field.mask()) {
        if *m {
            data.extend_from_slice(&[v.x, v.y]);
        } else {
            data.extend_from_slice(&[f64::NAN, f64::NAN]);
        }
    }
    write_pair(base, field.spec(), 2, &data)
}

pub fn read_field(base: &Path) -> Result<GridField> {
    let (spec, data) = read_pair(base, 2)?;
    let mut values = Vec::with_capacity(spec.node_count());
    let mut mask = Vec::with_capacity(spec.node_count());
    for c in data.chunks_exact(2) {
        let ok = c[0].is_finite() && c[1].is_finite();
        mask.push(ok);
        values.push(if ok { Vec2::new(c[0], c[1]) } else { Vec2::zeros() });
    }
    GridField::new(spec, values, mask)
}

pub fn write_scalar_field(field: &ScalarGridField, base: &Path) -> Result<()> {
    let data: Vec<f64> = field
        .values()
        .iter()
        .zip(field.mask())
        .map(|(v, m)| if *m { *v } else { f64::NAN })
        .collect();
    write_pair(base, field.spec(), 1, &data)
}

pub fn read_scalar_field(base: &Path) -> Result<ScalarGridField> {
    let (spec, data) = read_pair(base, 1)?;
    let mask: Vec<bool> = data.iter().map(|v| v.is_finite()).collect();
    let values = data.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
    ScalarGridField::new(spec, values, mask)
}

/// CSV with columns `x,y,v1,v2,mask`.
pub fn write_field_csv(field: &GridField, path: &Path) -> Result<()> {
    let mut out = String::from("x,y,v1,v2,mask\n");
    for (idx, (v, m)) in field.values().iter().zip(field.mask()).enumerate() {
        let p = field.spec().node(idx);
        let (v1, v2) = if *m { (v.x, v.y) } else { (f64::NAN, f64::NAN) };
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            p.x,
            p.y,
            v1,
            v2,
            u8::from(*m)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
