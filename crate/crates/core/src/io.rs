//! Time-series CSV and field snapshots.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flow::{Snapshot, TimeSeriesRecord, TrajectorySink};
use crate::functionals::EnergyBreakdown;
use crate::grid::{GridSpec, ScalarField};

pub const CSV_HEADER: &str = "step,time,B,L,T_abs,T_bar,M,total,components,length,max_radius,T_tilde";

/// One CSV row without the trailing newline. Reals carry 17 significant
/// digits, so parsing a row gives back the exact values.
pub fn format_record(r: &TimeSeriesRecord) -> String {
    let e = &r.energy;
    let t_tilde = r.t_tilde.map(|t| format!("{t:.16e}")).unwrap_or_default();
    format!(
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
        r.step, r.time, e.b, e.l, e.t_abs, e.t_bar, e.m, e.total, r.components, r.length, r.max_radius, t_tilde
    )
}

pub fn parse_record(line: &str) -> Result<TimeSeriesRecord> {
    let f: Vec<&str> = line.trim_end().split(',').collect();
    if f.len() != 12 {
        return Err(Error::Snapshot(format!("expected 12 CSV fields, found {}", f.len())));
    }
    let real = |i: usize| -> Result<f64> {
        f[i].parse()
            .map_err(|_| Error::Snapshot(format!("bad number {:?} in column {}", f[i], i + 1)))
    };
    let int = |i: usize| -> Result<usize> {
        f[i].parse()
            .map_err(|_| Error::Snapshot(format!("bad integer {:?} in column {}", f[i], i + 1)))
    };
    Ok(TimeSeriesRecord {
        step: int(0)?,
        time: real(1)?,
        energy: EnergyBreakdown {
            b: real(2)?,
            l: real(3)?,
            t_abs: real(4)?,
            t_bar: real(5)?,
            m: real(6)?,
            total: real(7)?,
        },
        components: int(8)?,
        length: real(9)?,
        max_radius: real(10)?,
        t_tilde: if f[11].is_empty() { None } else { Some(real(11)?) },
    })
}

pub fn write_timeseries(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    let mut w = TimeseriesWriter::create(path)?;
    for r in records {
        w.push(r)?;
    }
    w.finish()
}

pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end() == CSV_HEADER => {}
        Some(Err(e)) => return Err(Error::io(path, e)),
        _ => return Err(Error::Snapshot(format!("{}: missing CSV header", path.display()))),
    }
    lines
        .map(|l| {
            let l = l.map_err(|e| Error::io(path, e))?;
            parse_record(&l)
        })
        .collect()
}

/// Streams records to a CSV file as they arrive.
pub struct TimeseriesWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
        })
    }

    pub fn push(&mut self, r: &TimeSeriesRecord) -> Result<()> {
        writeln!(self.out, "{}", format_record(r)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub extent: f64,
    pub step: usize,
    pub time: f64,
}

pub fn write_snapshot(path: &Path, u: &ScalarField, step: usize, time: f64) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = u.grid;
    let io = |e| Error::io(path, e);
    writeln!(w, "PFIELD {} {:.16e} {} {:.16e}", g.n(), g.extent(), step, time).map_err(io)?;
    for row in u.values.chunks(g.n()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn parse_snapshot(text: &str) -> Result<(SnapshotHeader, ScalarField)> {
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
    if head.len() != 5 || head[0] != "PFIELD" {
        return Err(Error::Snapshot("header must be `PFIELD n extent step time`".into()));
    }
    let bad = |what: &str| Error::Snapshot(format!("bad {what} in header"));
    let header = SnapshotHeader {
        n: head[1].parse().map_err(|_| bad("n"))?,
        extent: head[2].parse().map_err(|_| bad("extent"))?,
        step: head[3].parse().map_err(|_| bad("step"))?,
        time: head[4].parse().map_err(|_| bad("time"))?,
    };
    let grid = GridSpec::new(header.n, header.extent)?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|_| Error::Snapshot(format!("bad value {t:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != grid.len() {
        return Err(Error::Snapshot(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    let field = ScalarField::from_values(grid, values)?;
    if !field.is_finite() {
        return Err(Error::Snapshot("non-finite value".into()));
    }
    Ok((header, field))
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, ScalarField)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text).map_err(|e| match e {
        Error::Snapshot(m) => Error::Snapshot(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writes the time series and every snapshot into one directory as
/// `timeseries.csv` and `snapshot_<step>.pfield`.
pub struct DirectorySink {
    dir: PathBuf,
    csv: Option<TimeseriesWriter>,
}

impl DirectorySink {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = TimeseriesWriter::create(&dir.join("timeseries.csv"))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            csv: Some(csv),
        })
    }

    pub fn snapshot_path(&self, step: usize) -> PathBuf {
        self.dir.join(format!("snapshot_{step:06}.pfield"))
    }

    pub fn finish(mut self) -> Result<()> {
        match self.csv.take() {
            Some(w) => w.finish(),
            None => Ok(()),
        }
    }
}

impl TrajectorySink for DirectorySink {
    fn record(&mut self, record: &TimeSeriesRecord) -> Result<()> {
        match self.csv.as_mut() {
            Some(w) => w.push(record),
            None => Ok(()),
        }
    }

    fn snapshot(&mut self, s: &Snapshot) -> Result<()> {
        write_snapshot(&self.snapshot_path(s.step), &s.field, s.step, s.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: usize, t_tilde: Option<f64>) -> TimeSeriesRecord {
        TimeSeriesRecord {
            step,
            time: step as f64 * 1e-5 + 1.0 / 3.0,
            energy: EnergyBreakdown {
                b: 12.566370614359172,
                l: std::f64::consts::PI,
                t_abs: 6.283,
                t_bar: 6.28318530717958,
                m: 1e-300,
                total: -0.1,
            },
            components: 2,
            length: 3.1,
            max_radius: 0.5,
            t_tilde,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        for r in [record(0, None), record(17, Some(2.0 / 7.0))] {
            assert_eq!(parse_record(&format_record(&r)).unwrap(), r);
        }
    }

    #[test]
    fn csv_line_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ts.csv");
        write_timeseries(&path, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
        let recs = [record(0, None), record(1, Some(1.5))];
        write_timeseries(&path, &recs).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        assert_eq!(read_timeseries(&path).unwrap(), recs);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(parse_record("1,2,3").is_err());
        assert!(parse_record("x,0,0,0,0,0,0,0,0,0,0,").is_err());
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let g = GridSpec::new(16, 1.2).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * y.exp() / 7.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.pfield");
        write_snapshot(&path, &u, 42, 1.25e-3).unwrap();
        let (h, back) = read_snapshot(&path).unwrap();
        assert_eq!(h, SnapshotHeader { n: 16, extent: 1.2, step: 42, time: 1.25e-3 });
        assert_eq!(back.grid, u.grid);
        assert!(back.values.iter().zip(&u.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn snapshot_errors() {
        assert!(parse_snapshot("PFIELD 16 1.2 0").is_err());
        assert!(parse_snapshot("FIELD 16 1.2 0 0\n").is_err());
        let short = format!("PFIELD 16 1.2 0 0\n{}", "0 ".repeat(255));
        assert!(matches!(parse_snapshot(&short), Err(Error::Snapshot(_))));
        let nan = format!("PFIELD 16 1.2 0 0\nNaN {}", "0 ".repeat(255));
        assert!(parse_snapshot(&nan).is_err());
    }

    #[test]
    fn snapshot_size_order_of_magnitude() {
        let g = GridSpec::new(256, 1.25).unwrap();
        let u = ScalarField::constant(g, -0.123456789);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.pfield");
        write_snapshot(&path, &u, 0, 0.0).unwrap();
        let size = std::fs::metadata(&path).unwrap().len();
        assert!(size > 1_000_000 && size < 3_000_000, "{size}");
    }
}
