//! CSV and JSON artifacts. Every file is written to a temporary sibling and
//! renamed into place, so readers never observe a partial artifact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Field, FrontSeries};
use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParams};
use crate::solver::{FieldState, Grid1D, InitialSpec, InvariantSummary, SimulationRecord, SolverConfig};

pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const FRONTS_FILE: &str = "fronts.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })
}

/// CSV with a header row; cells are written verbatim.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    atomic_write(path, &csv_bytes(header, rows)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    atomic_write(path, s.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&s)?)
}

pub fn snapshot_rows<'a>(grid: &'a Grid1D, snaps: &'a [FieldState]) -> impl Iterator<Item = Vec<String>> + 'a {
    snaps.iter().flat_map(move |s| {
        (0..s.len()).map(move |i| {
            vec![fmt_f64(s.t), fmt_f64(grid.x(i)), fmt_f64(s.f[i]), fmt_f64(s.c[i]), fmt_f64(s.h[i])]
        })
    })
}

pub fn write_snapshots(path: &Path, grid: &Grid1D, snaps: &[FieldState]) -> Result<()> {
    write_csv(path, &["t", "x", "F", "C", "H"], snapshot_rows(grid, snaps))
}

fn field_label(f: Field) -> &'static str {
    match f {
        Field::H => "1-H",
        other => other.name(),
    }
}

pub fn write_fronts(path: &Path, fronts: &[FrontSeries]) -> Result<()> {
    let rows = fronts.iter().flat_map(|fs| {
        fs.samples.iter().map(move |(t, x)| {
            vec![
                fmt_f64(*t),
                x.map(fmt_f64).unwrap_or_default(),
                field_label(fs.field).to_string(),
                fmt_f64(fs.level),
            ]
        })
    });
    write_csv(path, &["t", "x_front", "field", "level"], rows)
}

/// Run manifest: the resolved configuration echo plus everything needed to
/// reload the record from its CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    /// Full resolved configuration as supplied by the caller.
    pub config: serde_json::Value,
    pub params: ModelParams,
    pub derived: DerivedConstants,
    pub grid: Grid1D,
    pub initial: InitialSpec,
    pub solver: SolverConfig,
    pub invariants: InvariantSummary,
    pub snapshot_times: Vec<f64>,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn for_record(record: &SimulationRecord, derived: DerivedConstants, config: serde_json::Value, wall_time_s: f64) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            params: record.params,
            derived,
            grid: record.grid,
            initial: record.initial,
            solver: record.config.clone(),
            invariants: record.invariants,
            snapshot_times: record.snapshots.iter().map(|s| s.t).collect(),
            files: vec![SNAPSHOTS_FILE.into(), FRONTS_FILE.into()],
            wall_time_s,
        }
    }
}

/// Write snapshots, fronts and manifest into `dir`.
pub fn save_record(dir: &Path, record: &SimulationRecord, manifest: &Manifest) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let snaps = dir.join(SNAPSHOTS_FILE);
    let fronts = dir.join(FRONTS_FILE);
    let man = dir.join(MANIFEST_FILE);
    write_snapshots(&snaps, &record.grid, &record.snapshots)?;
    write_fronts(&fronts, &record.fronts)?;
    write_json(&man, manifest)?;
    Ok(vec![snaps, fronts, man])
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Io(format!("bad number `{s}` in {what}")))
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let got: Vec<String> = r.headers()?.iter().map(|s| s.to_string()).collect();
    if got != header {
        return Err(Error::Io(format!("{}: expected header {:?}, found {:?}", path.display(), header, got)));
    }
    Ok(r)
}

pub fn read_snapshots(path: &Path, grid: &Grid1D) -> Result<Vec<FieldState>> {
    let mut r = open_csv(path, &["t", "x", "F", "C", "H"])?;
    let mut out: Vec<FieldState> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = parse_f64(&rec[0], "snapshot t")?;
        let new = out.last().map(|s| s.t != t).unwrap_or(true);
        if new {
            out.push(FieldState { t, f: Vec::with_capacity(grid.n), c: Vec::with_capacity(grid.n), h: Vec::with_capacity(grid.n) });
        }
        let s = out.last_mut().expect("pushed above");
        s.f.push(parse_f64(&rec[2], "F")?);
        s.c.push(parse_f64(&rec[3], "C")?);
        s.h.push(parse_f64(&rec[4], "H")?);
    }
    if let Some(bad) = out.iter().find(|s| s.len() != grid.n) {
        return Err(Error::Io(format!("snapshot at t = {} has {} rows, grid has {}", bad.t, bad.len(), grid.n)));
    }
    Ok(out)
}

pub fn read_fronts(path: &Path) -> Result<Vec<FrontSeries>> {
    let mut r = open_csv(path, &["t", "x_front", "field", "level"])?;
    let mut out: Vec<FrontSeries> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = parse_f64(&rec[0], "front t")?;
        let x = if rec[1].trim().is_empty() { None } else { Some(parse_f64(&rec[1], "x_front")?) };
        let field = Field::parse(&rec[2])?;
        let level = parse_f64(&rec[3], "level")?;
        match out.iter_mut().find(|fs| fs.field == field && fs.level == level) {
            Some(fs) => fs.samples.push((t, x)),
            None => {
                let mut fs = FrontSeries::new(field, level);
                fs.samples.push((t, x));
                out.push(fs);
            }
        }
    }
    Ok(out)
}

/// Rebuild a record from a run directory written by [`save_record`].
pub fn load_record(dir: &Path) -> Result<(SimulationRecord, Manifest)> {
    let man: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
    let snapshots = read_snapshots(&dir.join(SNAPSHOTS_FILE), &man.grid)?;
    let fronts = read_fronts(&dir.join(FRONTS_FILE))?;
    let rec = SimulationRecord {
        params: man.params,
        grid: man.grid,
        initial: man.initial,
        config: man.solver.clone(),
        snapshots,
        fronts,
        invariants: man.invariants,
    };
    Ok((rec, man))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::derived_constants;
    use crate::solver::run;

    fn small_record() -> SimulationRecord {
        let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let spec = InitialSpec::default();
        let grid = Grid1D::sized_for(&spec, 2.0 * 2f64.sqrt(), 4.0, 0.1).unwrap();
        let cfg = SolverConfig::with_snapshot_every(4.0, 1.0);
        run(&m, &grid, &spec, &cfg).unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 5e-324, 1.7976931348623157e308, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn record_round_trip() {
        let rec = small_record();
        let dir = tempfile::tempdir().unwrap();
        let man = Manifest::for_record(&rec, derived_constants(&rec.params).unwrap(), serde_json::json!({"k": 1}), 0.5);
        save_record(dir.path(), &rec, &man).unwrap();
        let (back, man2) = load_record(dir.path()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(man2, man);
        // no temporaries left behind
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 3);
    }

    #[test]
    fn csv_headers() {
        let rec = small_record();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_snapshots(&p, &rec.grid, &rec.snapshots).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,x,F,C,H\n"));
        assert_eq!(text.lines().count(), 1 + rec.grid.n * rec.snapshots.len());
        let q = dir.path().join("f.csv");
        write_fronts(&q, &rec.fronts).unwrap();
        let text = fs::read_to_string(&q).unwrap();
        assert!(text.starts_with("t,x_front,field,level\n"));
        assert!(text.contains(",1-H,") && text.contains(",F+C,"));
    }

    #[test]
    fn header_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        let grid = Grid1D::new(-1.0, 1.0, 16).unwrap();
        assert!(matches!(read_snapshots(&p, &grid), Err(Error::Io(_))));
    }
}
