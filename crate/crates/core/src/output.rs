//! CSV and SVG writers. Output depends only on the data, so identical inputs
//! give byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::{Channel, SpectralMap, TimeSeries};

pub const SERIES_HEADER: &str = "t_us,re_rho12,im_rho12,re_rho13,im_rho13,pop1,pop2,pop3,e_d_arb";

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn series_csv(ts: &TimeSeries) -> Result<String> {
    let cols = Channel::ALL
        .iter()
        .map(|&c| ts.channel(c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::with_capacity(ts.len() * 160);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for (k, t) in ts.t_us().iter().enumerate() {
        let _ = write!(out, "{t}");
        for c in &cols {
            let _ = write!(out, ",{}", c[k]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Time series with the full standard header.
pub fn write_csv(ts: &TimeSeries, path: &Path) -> Result<()> {
    write(path, &series_csv(ts)?)
}

pub fn map_csv(map: &SpectralMap) -> String {
    let mut out = String::from("delta2_khz,t_us,value\n");
    for (d, row) in map.delta2_khz.iter().zip(&map.values) {
        for (t, v) in map.t_us.iter().zip(row) {
            let _ = writeln!(out, "{d},{t},{v}");
        }
    }
    out
}

/// Spectral map in long format.
pub fn write_map_csv(map: &SpectralMap, path: &Path) -> Result<()> {
    write(path, &map_csv(map))
}

/// Generic numeric table.
pub fn write_table(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if columns.len() != header.len() || columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidInput("table columns disagree with header".into()));
    }
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..n {
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", c[k]);
        }
        out.push('\n');
    }
    write(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return Some((lo - pad, hi + pad));
    }
    Some((lo, hi))
}

fn header(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * (x1 - x0);
        let py = y1 - f * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 16.0,
            tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Line plot of several curves over a shared x grid.
pub fn lines_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    curves: &[(&str, &[f64])],
) -> Result<String> {
    if x.is_empty() || curves.is_empty() {
        return Err(Error::Render("nothing to plot".into()));
    }
    if curves.iter().any(|(_, y)| y.len() != x.len()) {
        return Err(Error::Render("curve length differs from x grid".into()));
    }
    let xb = bounds(x.iter()).ok_or_else(|| Error::Render("no finite x values".into()))?;
    let yb = bounds(curves.iter().flat_map(|(_, y)| y.iter()))
        .ok_or_else(|| Error::Render("no finite y values".into()))?;
    let mut svg = String::new();
    header(&mut svg, title);
    axes(&mut svg, xb, yb, x_label, y_label);
    let px = |v: f64| LEFT + (v - xb.0) / (xb.1 - xb.0) * (W - RIGHT - LEFT);
    let py = |v: f64| H - BOTTOM - (v - yb.0) / (yb.1 - yb.0) * (H - BOTTOM - TOP);
    // at most ~2000 vertices per curve
    let stride = x.len().div_ceil(2000).max(1);
    for (i, (name, y)) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = String::new();
        for k in (0..x.len()).step_by(stride).chain(std::iter::once(x.len() - 1)) {
            if y[k].is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", px(x[k]), py(y[k]));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Line plot of `channels` of a time series.
pub fn render_svg(ts: &TimeSeries, channels: &[Channel], title: &str, path: &Path) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::Render("empty time series".into()));
    }
    let curves = channels
        .iter()
        .map(|&c| ts.channel(c).map(|v| (c.name(), v)))
        .collect::<Result<Vec<_>>>()?;
    write(path, &lines_svg(title, "t (μs)", "value (arb.)", ts.t_us(), &curves)?)
}

pub fn render_lines_svg(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    curves: &[(&str, &[f64])],
) -> Result<()> {
    write(path, &lines_svg(title, x_label, y_label, x, curves)?)
}

fn diverging(v: f64) -> String {
    // -1 blue, 0 white, +1 red
    let v = v.clamp(-1.0, 1.0);
    let (r, g, b) = if v >= 0.0 {
        (255.0, 255.0 * (1.0 - v), 255.0 * (1.0 - v))
    } else {
        (255.0 * (1.0 + v), 255.0 * (1.0 + v), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Heatmap with time on x and two-photon detuning on y.
pub fn map_svg(map: &SpectralMap, title: &str) -> Result<String> {
    if map.delta2_khz.is_empty() || map.t_us.is_empty() {
        return Err(Error::Render("empty map".into()));
    }
    let scale = map
        .values
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale == 0.0 { 1.0 } else { scale };
    let xb = bounds(map.t_us.iter()).expect("non-empty grid");
    let yb = bounds(map.delta2_khz.iter()).expect("non-empty grid");
    let mut svg = String::new();
    header(&mut svg, title);
    let nt = map.t_us.len().min(240);
    let nd = map.delta2_khz.len().min(200);
    let cw = (W - RIGHT - LEFT) / nt as f64;
    let ch = (H - BOTTOM - TOP) / nd as f64;
    for j in 0..nd {
        let row = &map.values[j * map.delta2_khz.len() / nd];
        for i in 0..nt {
            let v = row[i * map.t_us.len() / nt] / scale;
            let _ = writeln!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + i as f64 * cw,
                H - BOTTOM - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                diverging(v)
            );
        }
    }
    axes(&mut svg, xb, yb, "t (μs)", "δ2 (kHz)");
    let lx = W - RIGHT + 12.0;
    for (i, (label, v)) in [("+max", 1.0), ("0", 0.0), ("-max", -1.0)].iter().enumerate() {
        let ly = TOP + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx}" y="{ly}" width="14" height="14" fill="{}" stroke="black"/>"#,
            diverging(*v)
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{label}</text>"#, lx + 20.0, ly + 11.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{lx}" y="{}">max = {}</text>"#,
        TOP + 72.0,
        tick(scale)
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_map_svg(map: &SpectralMap, title: &str, path: &Path) -> Result<()> {
    write(path, &map_svg(map, title)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityMatrix;

    #[test]
    fn series_csv_has_header_plus_rows() {
        let mut ts = TimeSeries::standard();
        for t in [0.0, 0.5, 1.0] {
            ts.push_state(t, &DensityMatrix::ground());
        }
        let csv = series_csv(&ts).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap(), SERIES_HEADER);
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn map_csv_is_long_format() {
        let m = SpectralMap::new(vec![-1.0, 1.0], vec![0.0, 0.1], vec![vec![1.0, 2.0], vec![3.0, 4.0]])
            .unwrap();
        let csv = map_csv(&m);
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().nth(2).unwrap(), "-1,0.1,2");
    }

    #[test]
    fn svg_has_one_polyline_per_channel_and_is_deterministic() {
        let mut ts = TimeSeries::standard();
        ts.push_state(0.0, &DensityMatrix::ground());
        ts.push_state(1.0, &DensityMatrix::maximally_mixed());
        let x = ts.t_us().to_vec();
        let a = ts.channel(Channel::Pop1).unwrap();
        let b = ts.channel(Channel::Pop2).unwrap();
        let s1 = lines_svg("t", "x", "y", &x, &[("pop1", a), ("pop2", b)]).unwrap();
        let s2 = lines_svg("t", "x", "y", &x, &[("pop1", a), ("pop2", b)]).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.matches("<polyline").count(), 2);
    }

    #[test]
    fn empty_data_is_a_render_error() {
        assert!(matches!(
            lines_svg("t", "x", "y", &[], &[]),
            Err(Error::Render(_))
        ));
        let m = SpectralMap::new(vec![], vec![], vec![]).unwrap();
        assert!(matches!(map_svg(&m, "m"), Err(Error::Render(_))));
    }
}
