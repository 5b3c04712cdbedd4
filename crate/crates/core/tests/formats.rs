//! Round trips through every on-disk format.

use std::fs;

use incidence_lab::generators::{generate, GeneratorKind, GeneratorSpec};
use incidence_lab::heisenberg::{HPoint, Plane};
use incidence_lab::io::{
    instance_paths, read_grid_function, read_hpoints_csv, read_instance, read_lines_csv, read_points_csv,
    write_grid_function, write_hpoints_csv, write_instance, write_lines_csv, write_points_csv,
};
use incidence_lab::measure::shape_zoo;
use incidence_lab::sobolev::function_zoo;
use incidence_lab::voxel::{project_voxels, voxelize, PlaneRegion, VoxelSet};
use incidence_lab::LabError;

#[test]
fn planar_csv_round_trip() {
    let inst = generate(&GeneratorSpec::new(GeneratorKind::Tube, 1.0 / 64.0)).unwrap();
    let mut buf = Vec::new();
    write_points_csv(&mut buf, &inst.points).unwrap();
    assert!(buf.starts_with(b"x,y\n"));
    assert_eq!(
        read_points_csv(buf.as_slice(), inst.points.delta()).unwrap(),
        inst.points
    );

    let mut buf = Vec::new();
    write_lines_csv(&mut buf, &inst.lines).unwrap();
    assert!(buf.starts_with(b"a,b\n"));
    assert_eq!(
        read_lines_csv(buf.as_slice(), inst.lines.epsilon()).unwrap(),
        inst.lines
    );
}

#[test]
fn reading_rejects_unseparated_points() {
    let text = "x,y\n0.0,0.0\n0.001,0.0\n";
    assert!(read_points_csv(text.as_bytes(), 0.01).is_err());
    assert!(read_points_csv("x,y\n0.0,nope\n".as_bytes(), 0.01).is_err());
}

#[test]
fn hpoints_round_trip_exactly() {
    let pts = vec![
        HPoint::new(0.1, -0.2, 1.0 / 3.0),
        HPoint::new(-1e-17, 5.0, f64::MIN_POSITIVE),
    ];
    let mut buf = Vec::new();
    write_hpoints_csv(&mut buf, &pts).unwrap();
    assert_eq!(read_hpoints_csv(buf.as_slice()).unwrap(), pts);
}

#[test]
fn instance_round_trip_keeps_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = GeneratorSpec::new(GeneratorKind::Random, 1.0 / 32.0);
    spec.seed = 99;
    let inst = generate(&spec).unwrap();
    write_instance(dir.path(), "rand", &inst).unwrap();
    let (p, l, m) = instance_paths(dir.path(), "rand");
    assert!(p.exists() && l.exists() && m.exists());
    let back = read_instance(dir.path(), "rand").unwrap();
    assert_eq!(back.points, inst.points);
    assert_eq!(back.lines, inst.lines);
    assert_eq!(back.metadata, inst.metadata);
}

#[test]
fn grid_function_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = function_zoo()[0].sample(1.0 / 16.0).unwrap();
    let stem = dir.path().join("bump");
    write_grid_function(&stem, &f).unwrap();
    assert!(stem.with_extension("json").exists() && stem.with_extension("bin").exists());
    assert_eq!(read_grid_function(&stem).unwrap(), f);
}

#[test]
fn truncated_grid_payload_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = function_zoo()[0].sample(1.0 / 16.0).unwrap();
    let stem = dir.path().join("bump");
    write_grid_function(&stem, &f).unwrap();
    let bin = stem.with_extension("bin");
    let bytes = fs::read(&bin).unwrap();
    fs::write(&bin, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(
        read_grid_function(&stem),
        Err(LabError::Io(_)) | Err(LabError::Format(_))
    ));
}

#[test]
fn voxel_and_region_formats_round_trip() {
    for (_, shape) in shape_zoo() {
        let k = voxelize(&shape, 1.0 / 16.0).unwrap();
        let mut rle = Vec::new();
        k.write_rle(&mut rle).unwrap();
        assert_eq!(VoxelSet::read_rle(&mut rle.as_slice()).unwrap(), k);
        let mut csv = Vec::new();
        k.write_csv(&mut csv).unwrap();
        assert_eq!(
            VoxelSet::read_csv(csv.as_slice(), k.h(), k.ht()).unwrap().voxels(),
            k.voxels()
        );

        let region = project_voxels(&k, Plane::Wy, 2).unwrap();
        let mut rle = Vec::new();
        region.write_rle(&mut rle).unwrap();
        assert_eq!(PlaneRegion::read_rle(&mut rle.as_slice()).unwrap(), region);
    }
}
