//! CSV and manifest formats.
//!
//! * IMU: `t,ax,ay,az,gx,gy,gz`
//! * micromovements: `index,t_start,p,u,m,d,n`
//! * annotations: `bite_id,start_s,end_s,weight_g`
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! file written here parses back to identical bits.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    BiteAnnotation, ImuSample, ImuStream, MicromovementWindow, Session, Wrist,
};

pub const IMU_HEADER: [&str; 7] = ["t", "ax", "ay", "az", "gx", "gy", "gz"];
pub const MICRO_HEADER: [&str; 7] = ["index", "t_start", "p", "u", "m", "d", "n"];
pub const ANNOTATION_HEADER: [&str; 4] = ["bite_id", "start_s", "end_s", "weight_g"];

/// A session exactly as stored on disk: IMU and micromovement times are on
/// the recording clock, annotations on the annotation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSession {
    pub subject_id: String,
    pub session_id: String,
    pub imu: ImuStream,
    pub micromovements: Vec<MicromovementWindow>,
    pub bites: Vec<BiteAnnotation>,
    pub sync_offset_s: f64,
}

impl RawSession {
    /// Moves IMU and micromovement times onto the annotation clock and
    /// validates the result.
    pub fn into_session(self) -> Result<Session> {
        let off = self.sync_offset_s;
        if !off.is_finite() {
            return Err(Error::InvariantViolation(format!("sync offset {off} is not finite")));
        }
        let imu = self.imu.shifted(off)?;
        let micromovements = self
            .micromovements
            .into_iter()
            .map(|w| MicromovementWindow::new(w.index, w.t_start + off, w.probs))
            .collect();
        Session::new(
            self.subject_id,
            self.session_id,
            imu,
            micromovements,
            self.bites,
            off,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subjects: Vec<ManifestSubject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSubject {
    pub id: String,
    pub sessions: Vec<ManifestSession>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSession {
    #[serde(default)]
    pub id: Option<String>,
    pub imu: PathBuf,
    pub micromovement: PathBuf,
    pub annotation: PathBuf,
    pub wrist: Wrist,
    #[serde(default)]
    pub sync_offset_s: f64,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Loads every session; relative paths resolve against `base_dir`.
    pub fn load_all(&self, base_dir: &Path) -> Result<Vec<Session>> {
        let mut out = Vec::new();
        for subject in &self.subjects {
            for (i, entry) in subject.sessions.iter().enumerate() {
                out.push(load_session(entry, &subject.id, i, base_dir)?);
            }
        }
        Ok(out)
    }
}

/// Reads a manifest and every session it lists.
pub fn load_dataset(manifest_path: &Path) -> Result<Vec<Session>> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    manifest.load_all(base)
}

pub fn load_raw_session(
    entry: &ManifestSession,
    subject_id: &str,
    ordinal: usize,
    base_dir: &Path,
) -> Result<RawSession> {
    let resolve = |p: &Path| if p.is_absolute() { p.to_owned() } else { base_dir.join(p) };
    let samples = read_imu_csv(&resolve(&entry.imu))?;
    let imu = ImuStream::with_estimated_rate(samples, entry.wrist)?;
    let micromovements = read_micromovement_csv(&resolve(&entry.micromovement))?;
    let bites = read_annotation_csv(&resolve(&entry.annotation))?;
    Ok(RawSession {
        subject_id: subject_id.to_owned(),
        session_id: entry.id.clone().unwrap_or_else(|| format!("session{ordinal}")),
        imu,
        micromovements,
        bites,
        sync_offset_s: entry.sync_offset_s,
    })
}

/// Loads, aligns and validates one manifest entry.
pub fn load_session(
    entry: &ManifestSession,
    subject_id: &str,
    ordinal: usize,
    base_dir: &Path,
) -> Result<Session> {
    load_raw_session(entry, subject_id, ordinal, base_dir)?.into_session()
}

/// Writes the three CSVs of `raw` into `dir` and returns the manifest entry
/// (paths relative to `dir`'s parent when `rel_prefix` is given).
pub fn write_raw_session(raw: &RawSession, dir: &Path, rel_prefix: &Path) -> Result<ManifestSession> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = format!("{}_{}", raw.subject_id, raw.session_id);
    let names = [
        format!("{stem}_imu.csv"),
        format!("{stem}_micromovement.csv"),
        format!("{stem}_annotation.csv"),
    ];
    write_imu_csv(&dir.join(&names[0]), raw.imu.samples())?;
    write_micromovement_csv(&dir.join(&names[1]), &raw.micromovements)?;
    write_annotation_csv(&dir.join(&names[2]), &raw.bites)?;
    Ok(ManifestSession {
        id: Some(raw.session_id.clone()),
        imu: rel_prefix.join(&names[0]),
        micromovement: rel_prefix.join(&names[1]),
        annotation: rel_prefix.join(&names[2]),
        wrist: raw.imu.wrist(),
        sync_offset_s: raw.sync_offset_s,
    })
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, path: &Path, expected: &[&str]) -> Result<()> {
    let header = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

/// Iterates data records as `(line, fields)`, checking the column count.
fn for_each_record<R: Read>(
    rdr: &mut csv::Reader<R>,
    path: &Path,
    width: usize,
    mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
) -> Result<()> {
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        if !more {
            return Ok(());
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(path, line, format!("expected {width} fields, got {}", record.len())));
        }
        f(line, &record)?;
    }
}

fn field_f64(path: &Path, line: u64, record: &csv::StringRecord, i: usize) -> Result<f64> {
    record[i]
        .parse::<f64>()
        .map_err(|e| parse_err(path, line, format!("column {}: {e}", i + 1)))
}

pub fn read_imu_csv(path: &Path) -> Result<Vec<ImuSample>> {
    let mut rdr = open_reader(path)?;
    check_header(&mut rdr, path, &IMU_HEADER)?;
    let mut out = Vec::new();
    for_each_record(&mut rdr, path, 7, |line, r| {
        let t = field_f64(path, line, r, 0)?;
        let mut values = [0.0; 6];
        for (i, v) in values.iter_mut().enumerate() {
            *v = field_f64(path, line, r, i + 1)?;
        }
        out.push(ImuSample::new(t, values));
        Ok(())
    })?;
    Ok(out)
}

pub fn read_micromovement_csv(path: &Path) -> Result<Vec<MicromovementWindow>> {
    let mut rdr = open_reader(path)?;
    check_header(&mut rdr, path, &MICRO_HEADER)?;
    let mut out = Vec::new();
    for_each_record(&mut rdr, path, 7, |line, r| {
        let index = r[0]
            .parse::<usize>()
            .map_err(|e| parse_err(path, line, format!("column 1: {e}")))?;
        let t_start = field_f64(path, line, r, 1)?;
        let mut probs = [0.0; 5];
        for (i, p) in probs.iter_mut().enumerate() {
            *p = field_f64(path, line, r, i + 2)?;
        }
        out.push(MicromovementWindow::new(index, t_start, probs));
        Ok(())
    })?;
    Ok(out)
}

pub fn read_annotation_csv(path: &Path) -> Result<Vec<BiteAnnotation>> {
    let mut rdr = open_reader(path)?;
    check_header(&mut rdr, path, &ANNOTATION_HEADER)?;
    let mut out = Vec::new();
    for_each_record(&mut rdr, path, 4, |line, r| {
        out.push(BiteAnnotation::new(
            &r[0],
            field_f64(path, line, r, 1)?,
            field_f64(path, line, r, 2)?,
            field_f64(path, line, r, 3)?,
        ));
        Ok(())
    })?;
    Ok(out)
}

/// Creates `path` for buffered writing, creating parent directories.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_rows(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create_file(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_imu_csv(path: &Path, samples: &[ImuSample]) -> Result<()> {
    write_rows(path, |w| {
        writeln!(w, "{}", IMU_HEADER.join(","))?;
        for s in samples {
            let v = &s.values;
            writeln!(w, "{},{},{},{},{},{},{}", s.t, v[0], v[1], v[2], v[3], v[4], v[5])?;
        }
        Ok(())
    })
}

pub fn write_micromovement_csv(path: &Path, windows: &[MicromovementWindow]) -> Result<()> {
    write_rows(path, |w| {
        writeln!(w, "{}", MICRO_HEADER.join(","))?;
        for m in windows {
            let p = &m.probs;
            writeln!(w, "{},{},{},{},{},{},{}", m.index, m.t_start, p[0], p[1], p[2], p[3], p[4])?;
        }
        Ok(())
    })
}

pub fn write_annotation_csv(path: &Path, bites: &[BiteAnnotation]) -> Result<()> {
    write_rows(path, |w| {
        writeln!(w, "{}", ANNOTATION_HEADER.join(","))?;
        for b in bites {
            writeln!(w, "{},{},{},{}", b.bite_id, b.start_s, b.end_s, b.weight_g)?;
        }
        Ok(())
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create_file(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}
