//! CSV readers and writers for curves, snapshots and metric series.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::PlanarCurve;
use crate::metrics::MeshQualityMetrics;
use crate::point::Point;
use crate::solver::{Diagnostics, Snapshot};

#[derive(Deserialize)]
struct XyRow {
    x: f64,
    y: f64,
}

pub fn parse_curve_csv<R: std::io::Read>(reader: R) -> Result<PlanarCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y"] {
        return Err(Error::validation("curve", "CSV header must be `x,y`"));
    }
    let nodes = rdr
        .deserialize::<XyRow>()
        .map(|r| r.map(|r| Point::new(r.x, r.y)).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    PlanarCurve::new(nodes)
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<PlanarCurve> {
    parse_curve_csv(File::open(path)?)
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &PlanarCurve) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y")?;
    for p in curve.nodes() {
        writeln!(w, "{},{}", p.x, p.y)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `i,x,y,k,nu,g,alpha`; `g` is the local length of the segment
/// leaving node `i`.
pub fn write_snapshot<W: Write>(mut w: W, snap: &Snapshot) -> Result<()> {
    writeln!(w, "i,x,y,k,nu,g,alpha")?;
    for i in 0..snap.x.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            i, snap.x[i].x, snap.x[i].y, snap.k[i], snap.nu[i], snap.g[i], snap.alpha[i]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot_csv(path: impl AsRef<Path>, snap: &Snapshot) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), snap)
}

#[derive(Deserialize)]
struct SnapshotRow {
    i: usize,
    x: f64,
    y: f64,
    k: f64,
    nu: f64,
    g: f64,
    alpha: f64,
}

/// Reads a snapshot file; `t` and `step` are not stored in it.
pub fn read_snapshot_csv(path: impl AsRef<Path>) -> Result<Snapshot> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut snap = Snapshot {
        step: 0,
        t: 0.0,
        x: Vec::new(),
        k: Vec::new(),
        nu: Vec::new(),
        g: Vec::new(),
        alpha: Vec::new(),
    };
    for row in rdr.deserialize::<SnapshotRow>() {
        let row = row?;
        if row.i != snap.x.len() {
            return Err(Error::validation("i", "snapshot rows must be numbered 0..n"));
        }
        snap.x.push(Point::new(row.x, row.y));
        snap.k.push(row.k);
        snap.nu.push(row.nu);
        snap.g.push(row.g);
        snap.alpha.push(row.alpha);
    }
    Ok(snap)
}

pub fn write_metrics_csv(path: impl AsRef<Path>, metrics: &[MeshQualityMetrics]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,ratio,dispersion,stdev")?;
    for m in metrics {
        writeln!(w, "{},{},{},{}", m.t, m.ratio, m.dispersion, m.stdev)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics_csv(path: impl AsRef<Path>, diags: &[Diagnostics]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,L,A,max_abs_k,ratio,dispersion")?;
    for d in diags {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            d.t, d.length, d.area, d.max_abs_k, d.ratio, d.dispersion
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let c = PlanarCurve::from_xy([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.1, 0.7)]).unwrap();
        write_curve_csv(&path, &c).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,y\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_curve_csv(&path).unwrap(), c);
    }

    #[test]
    fn curve_csv_rejects_bad_input() {
        assert!(parse_curve_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(matches!(
            parse_curve_csv("x,y\n0,0\n1,0\n1,0\n0,1\n".as_bytes()),
            Err(Error::DegenerateSegment { index: 1 })
        ));
        assert!(parse_curve_csv("x,y\n0,0\n1,zz\n".as_bytes()).is_err());
    }

    #[test]
    fn snapshot_header_and_rows() {
        let snap = Snapshot {
            step: 3,
            t: 0.5,
            x: vec![Point::new(1.0, 2.0), Point::new(3.0, 4.0)],
            k: vec![0.1, 0.2],
            nu: vec![0.3, 0.4],
            g: vec![0.5, 0.6],
            alpha: vec![0.0, -0.7],
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &snap).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,x,y,k,nu,g,alpha"));
        assert_eq!(lines.next(), Some("0,1,2,0.1,0.3,0.5,0"));
        assert_eq!(lines.next(), Some("1,3,4,0.2,0.4,0.6,-0.7"));
    }
}
