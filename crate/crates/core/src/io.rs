//! Plain-text snapshots of matrices and channel sets.
//!
//! Matrix format: a header line `rows cols` followed by `rows·cols` lines of
//! `re im`, row-major. Floats are written in shortest round-trip form, so a
//! write/read cycle is lossless in `f64`.
//!
//! Channel format: optional geometry lines, then three labelled matrix blocks.
//!
//! ```text
//! d_irs 500
//! l_bs 1.2e-9
//! d_bu 512.3 498.1
//! d_su 21.4 37.9
//! l_bu ...
//! l_su ...
//! h_bs
//! 16 8
//! ...
//! h_bu
//! ...
//! h_su
//! ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{ChannelSet, Geometry};
use crate::error::{Error, Result};
use crate::num::{cplx, CMat, Real};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn write_matrix<T: Real>(out: &mut String, m: &CMat<T>) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{} {}", z.re.as_f64(), z.im.as_f64());
        }
    }
}

pub fn matrix_to_string<T: Real>(m: &CMat<T>) -> String {
    let mut s = String::new();
    write_matrix(&mut s, m);
    s
}

/// Non-empty, non-comment lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(s: &'a str) -> Self {
        Self { inner: s.lines().enumerate(), last: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                self.last = i + 1;
                return Some((i + 1, t));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next().ok_or_else(|| parse_err(last + 1, format!("unexpected end of input, expected {what}")))
    }
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

fn read_matrix_from<T: Real>(lines: &mut Lines<'_>) -> Result<CMat<T>> {
    let (ln, header) = lines.expect("matrix header")?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |t: &str| t.parse::<usize>().map_err(|_| parse_err(ln, format!("invalid dimension '{t}'")));
    if dims.len() != 2 {
        return Err(parse_err(ln, "header must be 'rows cols'"));
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut m = CMat::<T>::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let (ln, l) = lines.expect("matrix entry")?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(parse_err(ln, "entry must be 're im'"));
            }
            let (re, im) = (parse_f64(ln, toks[0])?, parse_f64(ln, toks[1])?);
            if !re.is_finite() || !im.is_finite() {
                return Err(parse_err(ln, "non-finite entry"));
            }
            m[(i, j)] = cplx(re, im);
        }
    }
    Ok(m)
}

pub fn read_matrix<T: Real>(s: &str) -> Result<CMat<T>> {
    let mut lines = Lines::new(s);
    let m = read_matrix_from(&mut lines)?;
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after matrix"));
    }
    Ok(m)
}

fn write_list(out: &mut String, key: &str, v: &[f64]) {
    let _ = write!(out, "{key}");
    for x in v {
        let _ = write!(out, " {x}");
    }
    out.push('\n');
}

pub fn channel_to_string<T: Real>(ch: &ChannelSet<T>) -> String {
    let mut s = String::new();
    let (n, m, k) = ch.shape();
    let _ = writeln!(s, "# channel set N={n} M={m} K={k}");
    if let Some(g) = &ch.geometry {
        let _ = writeln!(s, "d_irs {}", g.d_irs);
        let _ = writeln!(s, "l_bs {}", g.l_bs);
        write_list(&mut s, "d_bu", &g.d_bu);
        write_list(&mut s, "d_su", &g.d_su);
        write_list(&mut s, "l_bu", &g.l_bu);
        write_list(&mut s, "l_su", &g.l_su);
    }
    for (name, mat) in [("h_bs", &ch.h_bs), ("h_bu", &ch.h_bu), ("h_su", &ch.h_su)] {
        let _ = writeln!(s, "{name}");
        write_matrix(&mut s, mat);
    }
    s
}

pub fn read_channel<T: Real>(s: &str) -> Result<ChannelSet<T>> {
    let mut lines = Lines::new(s);
    let mut scalars: [Option<f64>; 2] = [None, None];
    let mut lists: [Option<Vec<f64>>; 4] = [None, None, None, None];
    let mut mats: [Option<CMat<T>>; 3] = [None, None, None];
    let mut geometry_line = 0;
    while let Some((ln, l)) = lines.next() {
        let mut toks = l.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let values = || toks.clone().map(|t| parse_f64(ln, t)).collect::<Result<Vec<f64>>>();
        match key {
            "h_bs" | "h_bu" | "h_su" => {
                let idx = ["h_bs", "h_bu", "h_su"].iter().position(|k| *k == key).unwrap();
                if mats[idx].is_some() {
                    return Err(parse_err(ln, format!("duplicate block '{key}'")));
                }
                mats[idx] = Some(read_matrix_from(&mut lines)?);
            }
            "d_irs" | "l_bs" => {
                let v = values()?;
                if v.len() != 1 {
                    return Err(parse_err(ln, format!("'{key}' takes one value")));
                }
                scalars[usize::from(key == "l_bs")] = Some(v[0]);
                geometry_line = ln;
            }
            "d_bu" | "d_su" | "l_bu" | "l_su" => {
                let idx = ["d_bu", "d_su", "l_bu", "l_su"].iter().position(|k| *k == key).unwrap();
                lists[idx] = Some(values()?);
                geometry_line = ln;
            }
            other => return Err(parse_err(ln, format!("unknown key '{other}'"))),
        }
    }
    let [h_bs, h_bu, h_su] = mats;
    let missing = |name: &str| parse_err(lines.last, format!("missing block '{name}'"));
    let (h_bs, h_bu, h_su) = (
        h_bs.ok_or_else(|| missing("h_bs"))?,
        h_bu.ok_or_else(|| missing("h_bu"))?,
        h_su.ok_or_else(|| missing("h_su"))?,
    );
    let any_geometry = scalars.iter().any(Option::is_some) || lists.iter().any(Option::is_some);
    let geometry = if any_geometry {
        let [d_irs, l_bs] = scalars;
        let [d_bu, d_su, l_bu, l_su] = lists;
        let incomplete = || parse_err(geometry_line, "incomplete geometry");
        Some(Geometry {
            d_irs: d_irs.ok_or_else(incomplete)?,
            l_bs: l_bs.ok_or_else(incomplete)?,
            d_bu: d_bu.ok_or_else(incomplete)?,
            d_su: d_su.ok_or_else(incomplete)?,
            l_bu: l_bu.ok_or_else(incomplete)?,
            l_su: l_su.ok_or_else(incomplete)?,
        })
    } else {
        None
    };
    ChannelSet::new(h_bs, h_bu, h_su, geometry)
}

pub fn save_matrix<T: Real>(path: impl AsRef<Path>, m: &CMat<T>) -> Result<()> {
    Ok(std::fs::write(path, matrix_to_string(m))?)
}

pub fn load_matrix<T: Real>(path: impl AsRef<Path>) -> Result<CMat<T>> {
    read_matrix(&std::fs::read_to_string(path)?)
}

pub fn save_channel<T: Real>(path: impl AsRef<Path>, ch: &ChannelSet<T>) -> Result<()> {
    Ok(std::fs::write(path, channel_to_string(ch))?)
}

pub fn load_channel<T: Real>(path: impl AsRef<Path>) -> Result<ChannelSet<T>> {
    read_channel(&std::fs::read_to_string(path)?)
}
