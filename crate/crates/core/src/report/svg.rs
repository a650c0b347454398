//! Hand-written SVG figures.
//!
//! All coordinates are printed with two decimals so equal inputs give
//! byte-identical documents.

use std::fmt::Write as _;

use super::summary::{LatentSummary, PosteriorSummary};
use crate::error::{Error, Result};
use crate::model::TimeGrid;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const FONT: &str = "font-family=\"sans-serif\" font-size=\"12\"";
const BAND_FILL: &str = "#9ecae1";
const MEAN_STROKE: &str = "#08519c";
const MAP_STROKE: &str = "#d94801";
const DENSITY_STROKE: &str = "#08519c";
/// Points per density curve.
pub const DENSITY_POINTS: usize = 400;

/// `−5000` → "5000 BCE", `500` → "500 CE".
pub fn format_year(year: f64) -> String {
    let y = year.round() as i64;
    match y {
        y if y < 0 => format!("{} BCE", -y),
        0 => "0".into(),
        y => format!("{y} CE"),
    }
}

/// A round step giving roughly `target` intervals over `span`.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let unit = raw / mag;
    let nice = if unit < 1.5 {
        1.0
    } else if unit < 3.0 {
        2.0
    } else if unit < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if a >= 1e6 {
        format!("{}M", trim(v / 1e6))
    } else if a >= 1e3 {
        format!("{}k", trim(v / 1e3))
    } else if a >= 0.01 {
        trim(v)
    } else {
        format!("{v:.1e}")
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn y(&self, v: f64) -> f64 {
        let v = v.clamp(self.y0, self.y1);
        self.bottom - (v - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }

    fn axes(&self, out: &mut String, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)]) {
        let _ = writeln!(
            out,
            "<g class=\"axes\" stroke=\"#333\" fill=\"none\"><path d=\"M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}\"/></g>",
            self.left, self.top, self.left, self.bottom, self.right, self.bottom
        );
        let _ = writeln!(out, "<g class=\"ticks\" {FONT} fill=\"#333\">");
        for (v, label) in x_ticks {
            let x = self.x(*v);
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333\"/><text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                self.bottom,
                self.bottom + 5.0,
                self.bottom + 18.0,
                escape(label)
            );
        }
        for (v, label) in y_ticks {
            let y = self.y(*v);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#333\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                self.left - 5.0,
                self.left,
                self.left - 8.0,
                y + 4.0,
                escape(label)
            );
        }
        out.push_str("</g>\n");
    }
}

fn ticks(lo: f64, hi: f64, target: f64, label: impl Fn(f64) -> String) -> Vec<(f64, String)> {
    let step = nice_step(hi - lo, target);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            let v = k as f64 * step;
            (v, label(v))
        })
        .collect()
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" width=\"{WIDTH}\" height=\"{HEIGHT}\">"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

/// Posterior mean and MAP trajectories with the interquartile band.
///
/// The band and curves are drawn through bin midpoints; a single bin is drawn
/// as a band across the bin with point markers for the mean and MAP.
pub fn render_trajectory_svg(summary: &PosteriorSummary, grid: &TimeGrid) -> Result<String> {
    let rows = &summary.trajectory;
    if rows.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let y_max = rows
        .iter()
        .flat_map(|r| [r.q75, r.mean, r.map])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let frame = Frame {
        x0: grid.start_year() as f64,
        x1: grid.end_year() as f64,
        y0: 0.0,
        y1: y_max,
        left: MARGIN_LEFT,
        right: WIDTH - MARGIN_RIGHT,
        top: MARGIN_TOP,
        bottom: HEIGHT - MARGIN_BOTTOM,
    };

    let mut out = String::new();
    header(&mut out, "Posterior population trajectory");
    frame.axes(
        &mut out,
        &ticks(frame.x0, frame.x1, 8.0, format_year),
        &ticks(0.0, y_max, 6.0, format_value),
    );

    let xs: Vec<f64> = if rows.len() == 1 {
        vec![rows[0].bin_start_year as f64, rows[0].bin_end_year as f64]
    } else {
        rows.iter().map(|r| r.year).collect()
    };
    let at = |k: usize| &rows[k.min(rows.len() - 1)];

    let mut band = String::new();
    for (k, x) in xs.iter().enumerate() {
        let _ = write!(
            band,
            "{}{:.2},{:.2} ",
            if k == 0 { "M" } else { "L" },
            frame.x(*x),
            frame.y(at(k).q75.max(0.0))
        );
    }
    for (k, x) in xs.iter().enumerate().rev() {
        let _ = write!(band, "L{:.2},{:.2} ", frame.x(*x), frame.y(at(k).q25.max(0.0)));
    }
    let _ = writeln!(
        out,
        "<path class=\"band\" d=\"{}Z\" fill=\"{BAND_FILL}\" fill-opacity=\"0.6\" stroke=\"none\"/>",
        band
    );

    if rows.len() == 1 {
        let r = &rows[0];
        let x = frame.x(r.year);
        let _ = writeln!(
            out,
            "<circle class=\"mean\" cx=\"{x:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{MEAN_STROKE}\"/>",
            frame.y(r.mean)
        );
        let _ = writeln!(
            out,
            "<circle class=\"map\" cx=\"{x:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{MAP_STROKE}\"/>",
            frame.y(r.map)
        );
    } else {
        for (class, colour, pick) in [
            (
                "mean",
                MEAN_STROKE,
                (|r: &super::summary::TrajectoryRow| r.mean) as fn(&_) -> f64,
            ),
            ("map", MAP_STROKE, |r| r.map),
        ] {
            let pts: Vec<String> = rows
                .iter()
                .map(|r| format!("{:.2},{:.2}", frame.x(r.year), frame.y(pick(r))))
                .collect();
            let dash = if class == "map" {
                " stroke-dasharray=\"6 3\""
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"{dash}/>",
                pts.join(" ")
            );
        }
    }

    let legend_x = frame.left + 15.0;
    let _ = writeln!(
        out,
        "<g class=\"legend\" {FONT}><rect x=\"{legend_x:.2}\" y=\"{:.2}\" width=\"14\" height=\"10\" fill=\"{BAND_FILL}\"/><text x=\"{:.2}\" y=\"{:.2}\">interquartile range</text><line x1=\"{legend_x:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{MEAN_STROKE}\" stroke-width=\"2\"/><text x=\"{:.2}\" y=\"{:.2}\">mean</text><line x1=\"{legend_x:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{MAP_STROKE}\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/><text x=\"{:.2}\" y=\"{:.2}\">MAP</text></g>",
        frame.top + 5.0,
        legend_x + 20.0,
        frame.top + 14.0,
        frame.top + 25.0,
        legend_x + 14.0,
        frame.top + 25.0,
        legend_x + 20.0,
        frame.top + 29.0,
        frame.top + 40.0,
        legend_x + 14.0,
        frame.top + 40.0,
        legend_x + 20.0,
        frame.top + 44.0,
    );
    let _ = writeln!(
        out,
        "<text {FONT} x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">year</text>",
        0.5 * (frame.left + frame.right),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        "<text {FONT} transform=\"translate(18,{:.2}) rotate(-90)\" text-anchor=\"middle\">population</text>",
        0.5 * (frame.top + frame.bottom)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// `(x, density)` pairs evenly spaced between the 0.1% and 99.9% quantiles.
pub fn density_curve(latent: &LatentSummary, points: usize) -> Vec<(f64, f64)> {
    let lo = latent.density.quantile(0.001);
    let hi = latent.density.quantile(0.999);
    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            (x, latent.density.pdf(x))
        })
        .collect()
}

/// Side-by-side marginal densities, one panel per latent.
pub fn render_density_svg(latents: &[LatentSummary]) -> String {
    let mut out = String::new();
    header(&mut out, "Posterior densities");
    let n = latents.len().max(1) as f64;
    let panel = WIDTH / n;
    for (k, latent) in latents.iter().enumerate() {
        let curve = density_curve(latent, DENSITY_POINTS);
        let (lo, hi) = (curve[0].0, curve[curve.len() - 1].0);
        let peak = curve.iter().map(|p| p.1).fold(0.0f64, f64::max);
        let frame = Frame {
            x0: lo,
            x1: hi,
            y0: 0.0,
            y1: if peak > 0.0 { peak * 1.1 } else { 1.0 },
            left: k as f64 * panel + 45.0,
            right: (k + 1) as f64 * panel - 15.0,
            top: MARGIN_TOP + 20.0,
            bottom: HEIGHT - MARGIN_BOTTOM,
        };
        let _ = writeln!(out, "<g class=\"panel\" data-latent=\"{}\">", escape(&latent.name));
        frame.axes(&mut out, &ticks(lo, hi, 3.0, format_value), &[]);
        let pts: Vec<String> = curve
            .iter()
            .map(|(x, d)| format!("{:.2},{:.2}", frame.x(*x), frame.y(*d)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"density\" points=\"{}\" fill=\"none\" stroke=\"{DENSITY_STROKE}\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
        let mean_x = frame.x(latent.mean.clamp(lo, hi));
        let _ = writeln!(
            out,
            "<line class=\"mean\" x1=\"{mean_x:.2}\" y1=\"{:.2}\" x2=\"{mean_x:.2}\" y2=\"{:.2}\" stroke=\"{MAP_STROKE}\" stroke-dasharray=\"4 3\"/>",
            frame.top,
            frame.bottom
        );
        let title = if latent.units.is_empty() {
            latent.name.clone()
        } else {
            format!("{} ({})", latent.name, latent.units)
        };
        let _ = writeln!(
            out,
            "<text {FONT} x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            0.5 * (frame.left + frame.right),
            MARGIN_TOP + 5.0,
            escape(&title)
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::GuideState;
    use crate::model::{build_priors, PriorConfig};
    use crate::report::summarize_guide;

    fn summary(grid: &TimeGrid) -> PosteriorSummary {
        let priors = build_priors(grid, &PriorConfig::default()).unwrap();
        summarize_guide(&GuideState::from_priors(&priors), grid).unwrap()
    }

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed XML")
    }

    #[test]
    fn year_labels() {
        assert_eq!(format_year(-5000.0), "5000 BCE");
        assert_eq!(format_year(500.0), "500 CE");
        assert_eq!(format_year(0.0), "0");
    }

    #[test]
    fn trajectory_is_valid_xml_with_one_band() {
        let grid = TimeGrid::cyprus_default();
        let svg = render_trajectory_svg(&summary(&grid), &grid).unwrap();
        let doc = parse(&svg);
        let root = doc.root_element();
        assert_eq!(root.attribute("viewBox"), Some("0 0 800 500"));
        let bands = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("band"))
            .count();
        assert_eq!(bands, 1);
        assert!(svg.contains("BCE"));
    }

    #[test]
    fn single_bin() {
        let grid = TimeGrid::new(0, 100, 100, 2_022).unwrap();
        let svg = render_trajectory_svg(&summary(&grid), &grid).unwrap();
        let doc = parse(&svg);
        assert_eq!(
            doc.descendants()
                .filter(|n| n.attribute("class") == Some("band"))
                .count(),
            1
        );
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 2);
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let grid = TimeGrid::cyprus_default();
        let mut s = summary(&grid);
        s.trajectory.clear();
        assert!(matches!(render_trajectory_svg(&s, &grid), Err(Error::EmptyTrajectory)));
    }

    #[test]
    fn band_never_drops_below_the_axis() {
        let grid = TimeGrid::new(0, 500, 100, 2_022).unwrap();
        let mut s = summary(&grid);
        for r in &mut s.trajectory {
            r.q25 = -1e5;
        }
        let svg = render_trajectory_svg(&s, &grid).unwrap();
        let doc = parse(&svg);
        let d = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("band"))
            .unwrap()
            .attribute("d")
            .unwrap();
        let baseline = HEIGHT - MARGIN_BOTTOM;
        for pair in d.trim_end_matches('Z').split_whitespace() {
            let y: f64 = pair
                .trim_start_matches(['M', 'L'])
                .split(',')
                .nth(1)
                .unwrap()
                .parse()
                .unwrap();
            assert!(y <= baseline + 1e-9, "{y}");
        }
    }

    #[test]
    fn density_panels() {
        let grid = TimeGrid::cyprus_default();
        let s = summary(&grid);
        let svg = render_density_svg(&s.parameters);
        let doc = parse(&svg);
        assert_eq!(
            doc.descendants()
                .filter(|n| n.attribute("class") == Some("panel"))
                .count(),
            3
        );
        assert_eq!(svg, render_density_svg(&s.parameters));
    }

    #[test]
    fn density_curves_integrate_to_one() {
        let grid = TimeGrid::cyprus_default();
        for latent in &summary(&grid).parameters {
            let c = density_curve(latent, DENSITY_POINTS);
            let area: f64 = c.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
            assert!((area - 1.0).abs() < 0.02, "{}: {area}", latent.name);
        }
    }
}
