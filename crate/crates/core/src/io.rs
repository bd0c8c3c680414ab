//! Artifact writers: numeric CSV with hexfloat companions, PGM/PPM rasters,
//! JSON reports and the metadata sidecar.
//!
//! Every artifact except the sidecar is a pure function of its inputs, so
//! two runs with the same configuration produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use hexfloat2::HexFloat;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{PixelClass, Raster};
use crate::error::Result;

/// Overlay colour for root markers in PPM output.
pub const ROOT_MARKER: [u8; 3] = [220, 30, 30];

/// Decimal text of a float that round-trips exactly.
pub fn decimal(x: f64) -> String {
    format!("{x:e}")
}

pub fn hexfloat(x: f64) -> String {
    HexFloat(x).to_string()
}

/// Numeric table written with a `name` and a `name_hex` column per field.
#[derive(Debug, Clone, Default)]
pub struct NumericTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Table of complex points with `re` and `im` columns.
    pub fn from_complex(points: &[Complex64]) -> Self {
        let mut t = Self::new(&["re", "im"]);
        for p in points {
            t.push(vec![p.re, p.im]);
        }
        t
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self
            .columns
            .iter()
            .flat_map(|c| [c.clone(), format!("{c}_hex")])
            .collect();
        w.write_record(&header)?;
        for row in &self.rows {
            let rec: Vec<String> = row.iter().flat_map(|&x| [decimal(x), hexfloat(x)]).collect();
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.to_bytes()?)
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Binary PGM (P5), row-major from the top row.
pub fn pgm_bytes(width: usize, height: usize, gray: &[u8]) -> Vec<u8> {
    assert_eq!(gray.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

/// Binary PPM (P6).
pub fn ppm_bytes(width: usize, height: usize, rgb: &[[u8; 3]]) -> Vec<u8> {
    assert_eq!(rgb.len(), width * height);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend(rgb.iter().flatten());
    out
}

/// Class raster as PGM. Palette: ToE white, ToEPrime black, Unresolved
/// mid-gray; the real attractors β₀ and β₁ are light and dark gray.
pub fn write_class_pgm(path: &Path, raster: &Raster<PixelClass>) -> Result<()> {
    write_bytes(path, &pgm_bytes(raster.res, raster.res, &raster.grays()))
}

/// Class raster as PPM with the given parameters marked in red.
pub fn write_class_ppm(path: &Path, raster: &Raster<PixelClass>, marks: &[Complex64]) -> Result<()> {
    let n = raster.res;
    let mut rgb: Vec<[u8; 3]> = raster.grays().into_iter().map(|g| [g, g, g]).collect();
    let r = raster.rect;
    for m in marks {
        let col = ((m.re - r.re_min) / (r.re_max - r.re_min) * n as f64).floor();
        let row = ((r.im_max - m.im) / (r.im_max - r.im_min) * n as f64).floor();
        if col >= 0.0 && row >= 0.0 && (col as usize) < n && (row as usize) < n {
            rgb[row as usize * n + col as usize] = ROOT_MARKER;
        }
    }
    write_bytes(path, &ppm_bytes(n, n, &rgb))
}

/// Scalar field mapped linearly onto 0..=255; missing cells are black.
pub fn scalar_pgm_bytes(width: usize, height: usize, values: &[Option<f64>]) -> Vec<u8> {
    let finite = values.iter().flatten().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let gray: Vec<u8> = values
        .iter()
        .map(|v| match v {
            Some(x) if x.is_finite() => (((x - lo) / span) * 255.0).round() as u8,
            _ => 0,
        })
        .collect();
    pgm_bytes(width, height, &gray)
}

pub fn write_scalar_pgm(path: &Path, width: usize, height: usize, values: &[Option<f64>]) -> Result<()> {
    write_bytes(path, &scalar_pgm_bytes(width, height, values))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

/// Metadata written next to each artifact set. Only this file carries
/// timestamps.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub command: String,
    /// Resolved configuration, echoed verbatim.
    pub config: serde_json::Value,
    /// Entries read from the `--config` file, if any.
    #[serde(rename = "configFile")]
    pub config_file: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(rename = "gitDescribe")]
    pub git_describe: String,
    #[serde(rename = "startedUnix")]
    pub started_unix: u64,
    #[serde(rename = "wallSeconds")]
    pub wall_seconds: f64,
    pub artifacts: Vec<String>,
}

impl Sidecar {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>, started: SystemTime) -> Self {
        Self {
            command: command.to_string(),
            config,
            config_file: BTreeMap::new(),
            seed,
            tolerances: BTreeMap::new(),
            git_describe: git_describe(),
            started_unix: started.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs(),
            wall_seconds: 0.0,
            artifacts: Vec::new(),
        }
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.wall_seconds = elapsed.as_secs_f64();
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.meta.json", self.command));
        write_json(&path, self)?;
        Ok(path)
    }
}

/// `git describe --always --dirty` of the working directory, or `unknown`.
pub fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn hexfloat_round_trips() {
        for x in [0.1, -3.0, 1e-310, 2f64.powi(60)] {
            let h = hexfloat(x);
            let (mant, exp) = h.trim_start_matches('-').trim_start_matches("0x").split_once('p').unwrap();
            let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
            let mut m = u64::from_str_radix(int, 16).unwrap() as f64;
            for (k, d) in frac.chars().enumerate() {
                m += d.to_digit(16).unwrap() as f64 * 16f64.powi(-(k as i32 + 1));
            }
            let v = m * 2f64.powi(exp.parse().unwrap());
            assert_eq!(if h.starts_with('-') { -v } else { v }, x);
        }
    }

    #[test]
    fn decimal_round_trips() {
        for x in [0.1, 1.0 / 3.0, -7.25e-200] {
            assert_eq!(decimal(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let t = NumericTable::from_complex(&[c64(0.5, -1.0)]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "re,re_hex,im,im_hex\n5e-1,0x1.0000000000000p-1,-1e0,-0x1.0000000000000p0\n");
    }

    #[test]
    fn pgm_header() {
        let b = pgm_bytes(2, 1, &[0, 255]);
        assert_eq!(&b[..11], b"P5\n2 1\n255\n");
        assert_eq!(&b[11..], &[0, 255]);
        let s = scalar_pgm_bytes(2, 1, &[Some(1.0), Some(3.0)]);
        assert_eq!(&s[11..], &[0, 255]);
    }
}
