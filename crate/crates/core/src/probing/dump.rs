//! Representation dumps: a JSON header line, then one JSON record per line.
//! Vectors are stored inline, or as little-endian f32 runs in a sidecar file
//! (`<dump>.f32`) when a record carries `offset` instead of `vector`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{InstanceLabel, Task};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpHeader {
    pub format_version: u32,
    pub model_id: String,
    pub layer: String,
    pub dim: usize,
    pub dtype: String,
}

impl DumpHeader {
    pub fn new(model_id: &str, dim: usize) -> Self {
        DumpHeader {
            format_version: FORMAT_VERSION,
            model_id: model_id.into(),
            layer: "last".into(),
            dim,
            dtype: "f32".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationRecord {
    pub problem_id: String,
    pub task: Task,
    pub step_index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_id: Option<String>,
    pub label: InstanceLabel,
    pub vector: Vec<f32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    problem_id: String,
    task: Task,
    step_index: u32,
    #[serde(default)]
    candidate_id: Option<String>,
    label: InstanceLabel,
    #[serde(default)]
    vector: Option<Vec<f32>>,
    #[serde(default)]
    offset: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dump {
    pub header: DumpHeader,
    pub records: Vec<RepresentationRecord>,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("dump has no header line")]
    MissingHeader,
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
}

pub fn sidecar_path(dump: &Path) -> PathBuf {
    let mut s = dump.as_os_str().to_owned();
    s.push(".f32");
    PathBuf::from(s)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> DumpError + '_ {
    move |source| DumpError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn check_header(h: &DumpHeader) -> Result<(), String> {
    if h.format_version != FORMAT_VERSION {
        return Err(format!("format_version {} is not {FORMAT_VERSION}", h.format_version));
    }
    if h.layer != "last" {
        return Err(format!("layer {:?} is not \"last\"", h.layer));
    }
    if h.dtype != "f32" {
        return Err(format!("dtype {:?} is not \"f32\"", h.dtype));
    }
    if h.dim == 0 {
        return Err("dim is 0".into());
    }
    Ok(())
}

struct Sidecar {
    path: PathBuf,
    file: Option<File>,
}

impl Sidecar {
    fn read(&mut self, offset: u64, dim: usize) -> Result<Vec<f32>, String> {
        if self.file.is_none() {
            self.file = Some(File::open(&self.path).map_err(|e| format!("{}: {e}", self.path.display()))?);
        }
        let f = self.file.as_mut().expect("opened above");
        let mut buf = vec![0u8; dim * 4];
        f.seek(SeekFrom::Start(offset))
            .and_then(|_| f.read_exact(&mut buf))
            .map_err(|e| format!("sidecar offset {offset}: {e}"))?;
        Ok(buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")))
            .collect())
    }
}

fn parse_record(line: &str, dim: usize, sidecar: &mut Sidecar) -> Result<RepresentationRecord, String> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let vector = match (raw.vector, raw.offset) {
        (Some(v), None) => v,
        (None, Some(off)) => sidecar.read(off, dim)?,
        (Some(_), Some(_)) => return Err("record has both vector and offset".into()),
        (None, None) => return Err("record has neither vector nor offset".into()),
    };
    if vector.len() != dim {
        return Err(format!("vector has {} entries, header declares {dim}", vector.len()));
    }
    if raw.label.task() != raw.task {
        return Err(format!("label {:?} does not belong to task {}", raw.label, raw.task));
    }
    if raw.task != Task::Css && raw.candidate_id.is_none() {
        return Err(format!("{} record lacks candidate_id", raw.task));
    }
    Ok(RepresentationRecord {
        problem_id: raw.problem_id,
        task: raw.task,
        step_index: raw.step_index,
        candidate_id: raw.candidate_id,
        label: raw.label,
        vector,
    })
}

/// Reads a dump in one pass, failing on the first schema violation.
pub fn read_dump(path: &Path) -> Result<Dump, DumpError> {
    let reader = BufReader::new(File::open(path).map_err(io(path))?);
    let mut lines = reader.lines().enumerate();
    let header: DumpHeader = loop {
        match lines.next() {
            None => return Err(DumpError::MissingHeader),
            Some((_, l)) => {
                let l = l.map_err(io(path))?;
                if l.trim().is_empty() {
                    continue;
                }
                let v: serde_json::Value = serde_json::from_str(&l).map_err(|e| DumpError::Header(e.to_string()))?;
                if v.get("format_version").is_none() {
                    return Err(DumpError::MissingHeader);
                }
                break serde_json::from_value(v).map_err(|e| DumpError::Header(e.to_string()))?;
            }
        }
    };
    check_header(&header).map_err(DumpError::Header)?;
    let mut sidecar = Sidecar {
        path: sidecar_path(path),
        file: None,
    };
    let mut records = Vec::new();
    for (i, l) in lines {
        let l = l.map_err(io(path))?;
        if l.trim().is_empty() {
            continue;
        }
        let r = parse_record(&l, header.dim, &mut sidecar).map_err(|message| DumpError::Record { line: i + 1, message })?;
        records.push(r);
    }
    Ok(Dump { header, records })
}

/// Writes a dump. With `binary`, vectors go to the sidecar and records carry
/// byte offsets.
pub fn write_dump(path: &Path, dump: &Dump, binary: bool) -> Result<(), DumpError> {
    let mut out = BufWriter::new(File::create(path).map_err(io(path))?);
    let side = sidecar_path(path);
    let mut bin = if binary {
        Some(BufWriter::new(File::create(&side).map_err(io(&side))?))
    } else {
        None
    };
    let header = serde_json::to_string(&dump.header).expect("header serializes");
    writeln!(out, "{header}").map_err(io(path))?;
    let mut offset = 0u64;
    for r in &dump.records {
        match bin.as_mut() {
            None => writeln!(out, "{}", serde_json::to_string(r).expect("record serializes")).map_err(io(path))?,
            Some(b) => {
                for x in &r.vector {
                    b.write_all(&x.to_le_bytes()).map_err(io(&side))?;
                }
                let mut v = serde_json::to_value(r).expect("record serializes");
                let obj = v.as_object_mut().expect("record is an object");
                obj.remove("vector");
                obj.insert("offset".into(), offset.into());
                writeln!(out, "{v}").map_err(io(path))?;
                offset += 4 * r.vector.len() as u64;
            }
        }
    }
    if let Some(mut b) = bin {
        b.flush().map_err(io(&side))?;
    }
    out.flush().map_err(io(path))
}

/// Schema and count report for a dump file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DumpReport {
    pub valid: bool,
    pub records: usize,
    pub per_task: BTreeMap<Task, usize>,
    pub violations: Vec<String>,
}

/// Checks every line and the per-problem record counts, listing all
/// violations instead of stopping at the first.
pub fn validate_dump(path: &Path) -> Result<DumpReport, DumpError> {
    let reader = BufReader::new(File::open(path).map_err(io(path))?);
    let mut report = DumpReport::default();
    let mut lines = reader.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let header = match lines.next() {
        None => {
            report.violations.push("missing header".into());
            return Ok(report);
        }
        Some((_, l)) => {
            let l = l.map_err(io(path))?;
            match serde_json::from_str::<DumpHeader>(&l) {
                Ok(h) => h,
                Err(e) => {
                    report.violations.push(format!("missing or invalid header: {e}"));
                    return Ok(report);
                }
            }
        }
    };
    if let Err(e) = check_header(&header) {
        report.violations.push(e);
    }
    let mut sidecar = Sidecar {
        path: sidecar_path(path),
        file: None,
    };
    let mut good = Vec::new();
    for (i, l) in lines {
        let l = l.map_err(io(path))?;
        report.records += 1;
        match parse_record(&l, header.dim, &mut sidecar) {
            Ok(r) => good.push(r),
            Err(e) => report.violations.push(format!("line {}: {e}", i + 1)),
        }
    }
    for r in &good {
        *report.per_task.entry(r.task).or_default() += 1;
    }
    report.violations.extend(count_violations(&good));
    report.valid = report.violations.is_empty();
    Ok(report)
}

/// Per-problem expectations: CSS step indices run 1..n, RFI has 3 + 3 and
/// NSD has 6 anchors of 3 + 3.
pub fn count_violations(records: &[RepresentationRecord]) -> Vec<String> {
    let mut groups: BTreeMap<(Task, &str), Vec<&RepresentationRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.task, r.problem_id.as_str())).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((task, pid), rs) in groups {
        let pos = rs.iter().filter(|r| r.label.is_positive()).count();
        match task {
            Task::Css => {
                let mut idx: Vec<u32> = rs.iter().map(|r| r.step_index).collect();
                idx.sort_unstable();
                if idx.iter().enumerate().any(|(k, &i)| i as usize != k + 1) {
                    out.push(format!("CSS {pid}: step indices {idx:?} are not 1..{}", idx.len()));
                }
            }
            Task::Rfi => {
                if rs.len() != 6 || pos != 3 {
                    out.push(format!("RFI {pid}: {} records with {pos} necessary, expected 6 with 3", rs.len()));
                }
            }
            Task::Nsd => {
                let mut anchors: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
                for r in &rs {
                    let e = anchors.entry(r.step_index).or_default();
                    e.0 += 1;
                    e.1 += r.label.is_positive() as usize;
                }
                if rs.len() != 36 || anchors.len() != 6 || anchors.values().any(|&c| c != (6, 3)) {
                    out.push(format!(
                        "NSD {pid}: {} records over {} anchors, expected 36 over 6 anchors of 3 + 3",
                        rs.len(),
                        anchors.len()
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pid: &str, step: u32, v: Vec<f32>) -> RepresentationRecord {
        RepresentationRecord {
            problem_id: pid.into(),
            task: Task::Css,
            step_index: step,
            candidate_id: None,
            label: InstanceLabel::T,
            vector: v,
        }
    }

    fn sample() -> Dump {
        Dump {
            header: DumpHeader::new("m", 3),
            records: vec![rec("a", 1, vec![0.1, -2.5, 1e-7]), rec("a", 2, vec![f32::MAX, 0.0, -0.0])],
        }
    }

    #[test]
    fn inline_and_binary_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for binary in [false, true] {
            let p = dir.path().join(format!("d{binary}.jsonl"));
            write_dump(&p, &sample(), binary).unwrap();
            let back = read_dump(&p).unwrap();
            assert_eq!(back.header, sample().header);
            for (a, b) in back.records.iter().zip(sample().records) {
                let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a.vector), bits(&b.vector));
            }
            assert!(validate_dump(&p).unwrap().valid);
        }
    }

    #[test]
    fn header_line_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        write_dump(&p, &sample(), false).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"format_version":1,"model_id":"m","layer":"last","dim":3,"dtype":"f32"}"#
        );
    }

    #[test]
    fn violations_listed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        std::fs::write(
            &p,
            "{\"format_version\":1,\"model_id\":\"m\",\"layer\":\"last\",\"dim\":2,\"dtype\":\"f32\"}\n\
             {\"problem_id\":\"a\",\"task\":\"CSS\",\"step_index\":1,\"label\":\"T\",\"vector\":[1.0]}\n\
             {\"problem_id\":\"a\",\"task\":\"CSS\",\"step_index\":3,\"label\":\"T\",\"vector\":[1.0,2.0]}\n",
        )
        .unwrap();
        let r = validate_dump(&p).unwrap();
        assert!(!r.valid);
        assert_eq!(r.violations.len(), 2);
        assert!(matches!(read_dump(&p), Err(DumpError::Record { line: 2, .. })));

        let q = dir.path().join("noheader.jsonl");
        std::fs::write(&q, "{\"problem_id\":\"a\"}\n").unwrap();
        assert!(matches!(read_dump(&q), Err(DumpError::MissingHeader)));
        assert!(!validate_dump(&q).unwrap().valid);
    }
}
