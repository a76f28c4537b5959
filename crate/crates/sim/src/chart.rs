//! Static SVG line charts of median sum-rate with a 10–90 percentile band.

use std::fmt::Write as _;
use std::path::Path;

use crate::aggregate::Aggregate;
use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    K,
    PowerDbm,
    Kappa,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::K, Axis::PowerDbm, Axis::Kappa, Axis::N];

    pub fn value(self, a: &Aggregate) -> f64 {
        match self {
            Axis::N => a.n as f64,
            Axis::K => a.k as f64,
            Axis::PowerDbm => a.power_dbm,
            Axis::Kappa => a.kappa,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::N => "BS antennas N",
            Axis::K => "IRS elements K",
            Axis::PowerDbm => "transmit power (dBm)",
            Axis::Kappa => "CSI quality κ",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::K => "k",
            Axis::PowerDbm => "power",
            Axis::Kappa => "kappa",
        }
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// Axes along which the aggregates take more than one value.
pub fn swept_axes(aggs: &[Aggregate]) -> Vec<Axis> {
    Axis::ALL
        .into_iter()
        .filter(|ax| distinct(aggs.iter().map(|a| ax.value(a))).len() > 1)
        .collect()
}

/// Aggregates along `x` with every other swept quantity at its largest value,
/// grouped by scheme in first-appearance order.
pub fn series(aggs: &[Aggregate], x: Axis) -> Vec<(String, Vec<&Aggregate>)> {
    let fixed: Vec<(Axis, f64)> = Axis::ALL
        .into_iter()
        .filter(|ax| *ax != x)
        .map(|ax| (ax, distinct(aggs.iter().map(|a| ax.value(a))).pop().unwrap_or(0.0)))
        .collect();
    let mut out: Vec<(String, Vec<&Aggregate>)> = Vec::new();
    for a in aggs.iter().filter(|a| fixed.iter().all(|(ax, v)| ax.value(a) == *v)) {
        match out.iter_mut().find(|(s, _)| *s == a.scheme) {
            Some((_, pts)) => pts.push(a),
            None => out.push((a.scheme.clone(), vec![a])),
        }
    }
    for (_, pts) in &mut out {
        pts.sort_by(|p, q| x.value(p).total_cmp(&x.value(q)));
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e6 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

pub fn render_svg(aggs: &[Aggregate], x: Axis) -> Result<String> {
    let lines = series(aggs, x);
    if lines.is_empty() {
        return Err(Error::Empty("no aggregates to chart"));
    }
    let pts = lines.iter().flat_map(|(_, p)| p.iter());
    let xs = distinct(pts.clone().map(|a| x.value(a)));
    let (x0, x1) = (xs[0], *xs.last().unwrap());
    let y_lo = pts.clone().map(|a| a.p10.min(a.median)).fold(f64::INFINITY, f64::min);
    let y_hi = pts.map(|a| a.p90.max(a.median)).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((y_hi - y_lo) * 0.05).max(1e-3);
    let (y0, y1) = ((y_lo - pad).max(0.0), y_hi + pad);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |v: f64| LEFT + if x1 > x0 { (v - x0) / (x1 - x0) * pw } else { pw / 2.0 };
    let sy = |v: f64| TOP + (1.0 - (v - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">Sum-rate versus {}</text>"#,
        LEFT + pw / 2.0,
        x.label()
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for v in &xs {
        let px = sx(*v);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="#444"/><text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            fmt_tick(*v)
        );
    }
    for i in 0..=5 {
        let v = y0 + (y1 - y0) * i as f64 / 5.0;
        let py = sy(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            LEFT,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        x.label()
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">median sum-rate (bit/s/Hz)</text>"#,
        TOP + ph / 2.0
    );
    for (i, (name, p)) in lines.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let upper = p.iter().map(|a| format!("{:.2},{:.2}", sx(x.value(a)), sy(a.p90)));
        let lower = p.iter().rev().map(|a| format!("{:.2},{:.2}", sx(x.value(a)), sy(a.p10)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = p.iter().map(|a| format!("{:.2},{:.2}", sx(x.value(a)), sy(a.median))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for a in p {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x.value(a)),
                sy(a.median)
            );
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = W - RIGHT + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_chart(path: impl AsRef<Path>, aggs: &[Aggregate], x: Axis) -> Result<()> {
    let svg = render_svg(aggs, x)?;
    std::fs::write(path.as_ref(), svg).map_err(io_err(path.as_ref()))
}
