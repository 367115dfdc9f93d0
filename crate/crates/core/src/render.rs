//! Deterministic SVG pictures. Coordinates are printed with three decimals
//! so identical inputs give identical bytes.

use std::f64::consts::TAU;
use std::fmt::Write;
use std::str::FromStr;

use num_traits::Zero;

use crate::arc::WeightedArcFamily;
use crate::error::{Error, Result};
use crate::loops::CircleConfiguration;
use crate::rational::{to_f64, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Each boundary as a window interval, arcs as bands between windows.
    Interval,
    /// Each boundary as a circle with the footprints of its arcs.
    Circle,
    /// A circle configuration with its identified segments.
    PlanarLoop,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Model::Interval),
            "circle" => Ok(Model::Circle),
            "planar-loop" => Ok(Model::PlanarLoop),
            _ => Err(Error::Unsupported(format!("unknown model {s:?}"))),
        }
    }
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
}

/// Start and end of each arc end along its boundary, as fractions of the
/// boundary's total weight. Boundaries without arcs get no entries.
fn footprints(f: &WeightedArcFamily) -> Vec<Vec<(usize, f64, f64)>> {
    let index = f.endpoint_map();
    (0..f.comb.counts.len())
        .map(|b| {
            let ends = f.end_interval(b);
            let total: Q = ends.iter().fold(Q::zero(), |acc, (_, w)| acc + w);
            if total.is_zero() {
                return Vec::new();
            }
            let t = to_f64(&total);
            let mut at = 0.0;
            ends.iter()
                .map(|(e, w)| {
                    let start = at;
                    at += to_f64(w) / t;
                    (index[e].0, start, at)
                })
                .collect()
        })
        .collect()
}

pub fn render_interval(f: &WeightedArcFamily) -> String {
    let n = f.comb.counts.len();
    let (left, len, gap) = (40.0, 400.0, 90.0);
    let row = |b: usize| 40.0 + gap * b as f64;
    let mut out = String::new();
    header(&mut out, left * 2.0 + len, row(n - 1) + 40.0);
    let fp = footprints(f);
    let mut ends: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); f.comb.arcs.len()];
    for (b, list) in fp.iter().enumerate() {
        for &(arc, s, e) in list {
            ends[arc].push((b, left + s * len, left + e * len));
        }
    }
    for (arc, pair) in ends.iter().enumerate() {
        if let [(b0, s0, e0), (b1, s1, e1)] = pair[..] {
            let (y0, y1) = (row(b0), row(b1));
            // a band returning to its own window nests; otherwise it runs straight down
            let (p, q, c0, c1) = if b0 == b1 { (e1, s1, y0 + 35.0, y1 + 35.0) } else { (s1, e1, (y0 + y1) / 2.0, (y0 + y1) / 2.0) };
            let _ = writeln!(
                out,
                r#"<path d="M{s0:.3},{y0:.3} C{s0:.3},{c0:.3} {p:.3},{c1:.3} {p:.3},{y1:.3} L{q:.3},{y1:.3} C{q:.3},{c1:.3} {e0:.3},{c0:.3} {e0:.3},{y0:.3} Z" fill="{}" fill-opacity="0.5" stroke="none"/>"#,
                color(arc),
            );
        }
    }
    for b in 0..n {
        let y = row(b);
        let _ = writeln!(out, r#"<line x1="{left:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="black" stroke-width="2"/>"#, left + len);
        let _ = writeln!(out, r#"<text x="8.000" y="{:.3}" font-size="12">{b}</text>"#, y + 4.0);
    }
    out.push_str("</svg>\n");
    out
}

fn polar(cx: f64, cy: f64, r: f64, t: f64) -> (f64, f64) {
    (cx + r * (TAU * t).cos(), cy - r * (TAU * t).sin())
}

fn arc_path(cx: f64, cy: f64, r: f64, s: f64, e: f64) -> String {
    let (x0, y0) = polar(cx, cy, r, s);
    let (x1, y1) = polar(cx, cy, r, e);
    let large = i32::from(e - s > 0.5);
    format!("M{x0:.3},{y0:.3} A{r:.3},{r:.3} 0 {large} 0 {x1:.3},{y1:.3}")
}

pub fn render_circle(f: &WeightedArcFamily) -> String {
    let n = f.comb.counts.len();
    let (r, step) = (70.0, 200.0);
    let centre = |b: usize| (110.0 + step * b as f64, 130.0);
    let mut out = String::new();
    header(&mut out, 20.0 + step * n as f64, 260.0);
    let mut mids: Vec<Vec<(f64, f64)>> = vec![Vec::new(); f.comb.arcs.len()];
    for (b, list) in footprints(f).iter().enumerate() {
        let (cx, cy) = centre(b);
        let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="none" stroke="black"/>"#);
        let _ = writeln!(out, r#"<text x="{cx:.3}" y="{:.3}" font-size="12">{b}</text>"#, cy + 4.0);
        for &(arc, s, e) in list {
            let _ = writeln!(
                out,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="6"/>"#,
                arc_path(cx, cy, r, s, e),
                color(arc)
            );
            mids[arc].push(polar(cx, cy, r + 3.0, (s + e) / 2.0));
        }
    }
    for (arc, m) in mids.iter().enumerate() {
        if let [(x0, y0), (x1, y1)] = m[..] {
            let (qx, qy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0 - 90.0);
            let _ = writeln!(
                out,
                r#"<path d="M{x0:.3},{y0:.3} Q{qx:.3},{qy:.3} {x1:.3},{y1:.3}" fill="none" stroke="{}"/>"#,
                color(arc)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_planar_loop(k: &CircleConfiguration) -> String {
    let n = k.circumferences.len();
    let longest = k.circumferences.iter().map(to_f64).fold(0.0, f64::max);
    let radius = |c: usize| if longest > 0.0 { 20.0 + 60.0 * to_f64(&k.circumferences[c]) / longest } else { 40.0 };
    let step = 180.0;
    let centre = |c: usize| (100.0 + step * c as f64, 120.0);
    let mut out = String::new();
    header(&mut out, 20.0 + step * n as f64, 240.0);
    for c in 0..n {
        let (cx, cy) = centre(c);
        let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="black"/>"#, radius(c));
        let _ = writeln!(out, r#"<text x="{cx:.3}" y="{:.3}" font-size="12">{c}</text>"#, cy + 4.0);
    }
    for (k_id, id) in k.identifications.iter().enumerate() {
        let mut mids = Vec::new();
        for (c, start) in [(id.a, &id.a_start), (id.b, &id.b_start)] {
            let m = to_f64(&k.circumferences[c]);
            if m <= 0.0 {
                continue;
            }
            let (s, len) = (to_f64(start) / m, to_f64(&id.length) / m);
            let (cx, cy) = centre(c);
            let r = radius(c);
            let d = if len >= 1.0 {
                format!("M{:.3},{cy:.3} a{r:.3},{r:.3} 0 1 0 {:.3},0 a{r:.3},{r:.3} 0 1 0 {:.3},0", cx - r, 2.0 * r, -2.0 * r)
            } else {
                arc_path(cx, cy, r, s, s + len)
            };
            let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="{}" stroke-width="5"/>"#, color(k_id));
            mids.push(polar(cx, cy, r, s + len / 2.0));
        }
        if let [(x0, y0), (x1, y1)] = mids[..] {
            let dash = if id.aligned { "" } else { r#" stroke-dasharray="4 3""# };
            let _ = writeln!(
                out,
                r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="{}"{dash}/>"#,
                color(k_id)
            );
        }
    }
    for class in &k.multiple_points {
        for (c, t) in class {
            let m = to_f64(&k.circumferences[*c]);
            let (cx, cy) = centre(*c);
            let (x, y) = polar(cx, cy, radius(*c), if m > 0.0 { to_f64(t) / m } else { 0.0 });
            let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3.000" fill="black"/>"#);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::dot;
    use crate::loops::loop_of;
    use crate::rational::qi;

    #[test]
    fn renders_are_deterministic() {
        let f = dot(qi(1), qi(2));
        for svg in [render_interval(&f), render_circle(&f), render_planar_loop(&loop_of(&f).unwrap())] {
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
            assert!(svg.contains("path") || svg.contains("circle"));
        }
        assert_eq!(render_circle(&f), render_circle(&f.clone()));
        assert_eq!("planar-loop".parse::<Model>().unwrap(), Model::PlanarLoop);
    }
}
