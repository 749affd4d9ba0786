use lsim_core::output::{lines_svg, map_csv, map_svg, series_csv, write_csv, SERIES_HEADER};
use lsim_core::{Channel, DensityMatrix, SpectralMap, TimeSeries};

fn three_samples() -> TimeSeries {
    let mut ts = TimeSeries::standard();
    for (k, rho) in [
        DensityMatrix::ground(),
        DensityMatrix::spin_superposition(0.3, 0.1),
        DensityMatrix::maximally_mixed(),
    ]
    .iter()
    .enumerate()
    {
        ts.push_state(0.1 * k as f64, rho);
    }
    ts
}

#[test]
fn series_csv_has_header_and_one_row_per_sample() {
    let text = series_csv(&three_samples()).unwrap();
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], SERIES_HEADER);
    assert!(!text.contains('\r'));
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 9));
}

#[test]
fn csv_values_round_trip_exactly() {
    let ts = three_samples();
    let text = series_csv(&ts).unwrap();
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[1], ts.channel(Channel::ReRho12).unwrap()[1]);
    assert_eq!(row[4], ts.channel(Channel::ImRho13).unwrap()[1]);
}

#[test]
fn identical_series_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_csv(&three_samples(), &a).unwrap();
    write_csv(&three_samples(), &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn unwritable_path_is_an_io_error() {
    let err = write_csv(&three_samples(), std::path::Path::new("/nonexistent/dir/x.csv")).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn two_by_two_map_is_five_lines_long() {
    let map = SpectralMap::new(vec![-1.0, 1.0], vec![0.0, 0.5], vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let text = map_csv(&map);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next(), Some("delta2_khz,t_us,value"));
    assert_eq!(text.lines().nth(4), Some("1,0.5,4"));
}

#[test]
fn svg_has_one_polyline_per_curve_and_is_deterministic() {
    let x = [0.0, 1.0];
    let (a, b) = ([0.0, 1.0], [1.0, -1.0]);
    let svg = lines_svg("t", "x", "y", &x, &[("a", &a), ("b", &b)]).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg, lines_svg("t", "x", "y", &x, &[("a", &a), ("b", &b)]).unwrap());
    assert!(lines_svg("t", "x", "y", &[], &[]).is_err());
}

#[test]
fn map_svg_is_a_heatmap_and_rejects_empty_maps() {
    let map = SpectralMap::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0, 1.0]; 3]).unwrap();
    let svg = map_svg(&map, "map").unwrap();
    assert!(svg.contains("<rect"));
    assert!(svg.contains("δ2"));
    assert!(SpectralMap::new(vec![], vec![], vec![]).map_or(true, |m| map_svg(&m, "x").is_err()));
}
