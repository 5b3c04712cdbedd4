//! File formats: point sets (`x,y`) and line families (`a,b`) as CSV with a
//! JSON metadata sidecar, Heisenberg point sets as CSV `x,y,t`, grid
//! functions as raw little-endian `f64` with a JSON header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::generators::{GeneratorMetadata, Instance};
use crate::heisenberg::HPoint;
use crate::planar::{LineAB, LineFamily, Point2, PointSet};
use crate::sobolev::{GridFunction, GridHeader};

pub fn write_points_csv(w: impl Write, ps: &PointSet) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in ps.points() {
        wr.serialize(p)?;
    }
    if ps.is_empty() {
        wr.write_record(["x", "y"])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads `x,y` rows and validates δ-separation.
pub fn read_points_csv(r: impl Read, delta: f64) -> Result<PointSet> {
    let pts = csv::Reader::from_reader(r)
        .deserialize::<Point2>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    PointSet::new(pts, delta)
}

pub fn write_lines_csv(w: impl Write, lf: &LineFamily) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for l in lf.lines() {
        wr.serialize(l)?;
    }
    if lf.is_empty() {
        wr.write_record(["a", "b"])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads `a,b` rows and validates range and ε-separation.
pub fn read_lines_csv(r: impl Read, epsilon: f64) -> Result<LineFamily> {
    let lines = csv::Reader::from_reader(r)
        .deserialize::<LineAB>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    LineFamily::new(lines, epsilon)
}

pub fn write_hpoints_csv(w: impl Write, pts: &[HPoint]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in pts {
        wr.serialize(p)?;
    }
    if pts.is_empty() {
        wr.write_record(["x", "y", "t"])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_hpoints_csv(r: impl Read) -> Result<Vec<HPoint>> {
    Ok(csv::Reader::from_reader(r)
        .deserialize::<HPoint>()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Paths `<dir>/<stem>_points.csv`, `<dir>/<stem>_lines.csv`, `<dir>/<stem>.json`.
pub fn instance_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("{stem}_points.csv")),
        dir.join(format!("{stem}_lines.csv")),
        dir.join(format!("{stem}.json")),
    )
}

pub fn write_instance(dir: &Path, stem: &str, inst: &Instance) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let (pp, lp, mp) = instance_paths(dir, stem);
    write_points_csv(BufWriter::new(File::create(pp)?), &inst.points)?;
    write_lines_csv(BufWriter::new(File::create(lp)?), &inst.lines)?;
    let mut m = BufWriter::new(File::create(mp)?);
    serde_json::to_writer_pretty(&mut m, &inst.metadata)?;
    m.write_all(b"\n")?;
    m.flush()?;
    Ok(())
}

pub fn read_instance(dir: &Path, stem: &str) -> Result<Instance> {
    let (pp, lp, mp) = instance_paths(dir, stem);
    let metadata: GeneratorMetadata = serde_json::from_reader(BufReader::new(File::open(mp)?))?;
    Ok(Instance {
        points: read_points_csv(BufReader::new(File::open(pp)?), metadata.delta)?,
        lines: read_lines_csv(BufReader::new(File::open(lp)?), metadata.epsilon)?,
        metadata,
    })
}

/// Writes `<stem>.json` (header) and `<stem>.bin` (values).
pub fn write_grid_function(stem: &Path, f: &GridFunction) -> Result<()> {
    let mut h = BufWriter::new(File::create(stem.with_extension("json"))?);
    serde_json::to_writer_pretty(&mut h, &f.header())?;
    h.write_all(b"\n")?;
    h.flush()?;
    let mut b = BufWriter::new(File::create(stem.with_extension("bin"))?);
    f.write_raw(&mut b)?;
    b.flush()?;
    Ok(())
}

pub fn read_grid_function(stem: &Path) -> Result<GridFunction> {
    let header: GridHeader = serde_json::from_reader(BufReader::new(File::open(stem.with_extension("json"))?))?;
    GridFunction::read_raw(&header, &mut BufReader::new(File::open(stem.with_extension("bin"))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorKind, GeneratorSpec};

    #[test]
    fn point_csv_has_header_and_round_trips() {
        let ps = PointSet::new(vec![Point2::new(0.5, -0.25), Point2::new(0.0, 1.0)], 0.1).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &ps).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y\n"), "{text}");
        assert_eq!(read_points_csv(buf.as_slice(), 0.1).unwrap(), ps);
        assert!(read_points_csv(buf.as_slice(), 2.0).is_err());
    }

    #[test]
    fn line_csv_header() {
        let lf = LineFamily::new(vec![LineAB::new(0.5, 0.25)], 0.1).unwrap();
        let mut buf = Vec::new();
        write_lines_csv(&mut buf, &lf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("a,b\n"));
        assert_eq!(read_lines_csv(buf.as_slice(), 0.1).unwrap(), lf);
    }

    #[test]
    fn hpoint_csv() {
        let pts = vec![HPoint::new(1.0, 2.0, 3.5), HPoint::new(-0.5, 0.0, 0.25)];
        let mut buf = Vec::new();
        write_hpoints_csv(&mut buf, &pts).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("x,y,t\n"));
        assert_eq!(read_hpoints_csv(buf.as_slice()).unwrap(), pts);
    }

    #[test]
    fn instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = GeneratorSpec::new(GeneratorKind::Random, 1.0 / 64.0);
        spec.n_points = 50;
        spec.n_lines = 40;
        spec.seed = 3;
        let inst = generate(&spec).unwrap();
        write_instance(dir.path(), "r", &inst).unwrap();
        let back = read_instance(dir.path(), "r").unwrap();
        assert_eq!(back.points, inst.points);
        assert_eq!(back.lines, inst.lines);
        assert_eq!(back.metadata, inst.metadata);
    }
}
