//! File formats: bodies and nets as JSON, point clouds as CSV.
//!
//! Coordinates are written with Rust's shortest round-trip float formatting,
//! so reading a file back yields bit-identical doubles.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use randhull_core::{BodySpec, SphereNet};
use serde::{Deserialize, Serialize};

pub fn read_body(path: &Path) -> Result<BodySpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_body(&text).with_context(|| format!("parsing body {}", path.display()))
}

pub fn parse_body(text: &str) -> Result<BodySpec> {
    let body: BodySpec = serde_json::from_str(text)?;
    body.validate()?;
    Ok(body)
}

pub fn write_body(path: &Path, body: &BodySpec) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(body)? + "\n")?;
    Ok(())
}

/// One point per row, no header.
pub fn write_points_csv<W: Write>(writer: W, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in points {
        w.write_record(p.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut points = Vec::new();
    let mut dim = None;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let p: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().with_context(|| format!("row {}: bad number {s:?}", line + 1)))
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(p.len()),
            Some(d) if d != p.len() => bail!("row {}: expected {d} coordinates, got {}", line + 1, p.len()),
            _ => {}
        }
        points.push(p);
    }
    if points.is_empty() {
        bail!("point file is empty");
    }
    Ok(points)
}

pub fn read_points_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_points_csv(f)
}

/// On-disk form of a [`SphereNet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetFile {
    pub dim: usize,
    pub delta: f64,
    pub seed: u64,
    pub covering_radius_estimate: f64,
    pub directions: Vec<Vec<f64>>,
}

impl From<&SphereNet> for NetFile {
    fn from(net: &SphereNet) -> Self {
        Self {
            dim: net.dim(),
            delta: net.delta(),
            seed: net.seed(),
            covering_radius_estimate: net.covering_radius_estimate(),
            directions: net.directions().to_vec(),
        }
    }
}

impl NetFile {
    pub fn into_net(self) -> Result<SphereNet> {
        Ok(SphereNet::from_parts(self.dim, self.delta, self.seed, self.directions, self.covering_radius_estimate)?)
    }
}

pub fn write_net(path: &Path, net: &SphereNet) -> Result<()> {
    fs::write(path, serde_json::to_string(&NetFile::from(net))? + "\n")?;
    Ok(())
}

pub fn read_net(path: &Path) -> Result<SphereNet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: NetFile = serde_json::from_str(&text)?;
    file.into_net()
}
