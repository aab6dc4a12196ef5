//! Static log-log plot of a sweep: individual errors, one median series per
//! estimator and dashed power-law guides.

use std::fmt::Write as _;

use vpe_core::experiments::{Statistic, SweepResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Decade-aligned log10 range covering `values`.
fn decades(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite() && *v > 0.0)
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return None;
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    Some(if hi > lo { (lo, hi) } else { (lo, lo + 1.0) })
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y.log10() - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Guide exponents for the sweep's x axis.
fn guide_slopes(axis: &str) -> &'static [f64] {
    if axis == "shots" {
        &[-0.5]
    } else {
        &[1.0, 2.0, 3.0]
    }
}

pub fn render(sweep: &SweepResult) -> String {
    let axis = if sweep.axis.is_empty() {
        "rate"
    } else {
        sweep.axis.as_str()
    };
    let estimators = sweep.estimators();
    let positive =
        |r: &&vpe_core::experiments::ErrorRecord| r.abs_error > 0.0 && r.abs_error.is_finite();
    let xs = decades(sweep.records.iter().map(|r| r.rate));
    let ys = decades(sweep.records.iter().filter(positive).map(|r| r.abs_error));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(&sweep.name));
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let (Some(x), Some(y)) = (xs, ys) else {
        let _ = writeln!(s, r#"<text x="{LEFT}" y="{}">no data</text>"#, HEIGHT / 2.0);
        s.push_str("</svg>\n");
        return s;
    };
    let ax = Axes { x, y };
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{x0}" y="{y0}" width="{}" height="{}"/></clipPath></defs>"#,
        x1 - x0,
        y1 - y0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        x1 - x0,
        y1 - y0
    );
    for d in (x.0 as i32)..=(x.1 as i32) {
        let p = ax.px(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{p:.2}" y1="{y1}" x2="{p:.2}" y2="{}" stroke="#444"/><text x="{p:.2}" y="{}" text-anchor="middle">1e{d}</text>"##,
            y1 + 5.0,
            y1 + 20.0
        );
    }
    for d in (y.0 as i32)..=(y.1 as i32) {
        let p = ax.py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="#444"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            x0 - 5.0,
            x0 - 8.0,
            p + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(axis)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">absolute error</text>"#,
        (y0 + y1) / 2.0
    );

    let _ = writeln!(s, r#"<g clip-path="url(#plot)">"#);
    let mut anchor: Option<(f64, f64)> = None;
    for (k, e) in estimators.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<g class="points" data-estimator="{}" fill="{color}" fill-opacity="0.25">"#,
            escape(e)
        );
        for r in sweep
            .records
            .iter()
            .filter(positive)
            .filter(|r| &r.estimator == e)
        {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
                ax.px(r.rate),
                ax.py(r.abs_error)
            );
        }
        s.push_str("</g>\n");
        let curve: Vec<(f64, f64)> = sweep
            .curve(e, Statistic::Median)
            .into_iter()
            .filter(|(_, v)| *v > 0.0)
            .collect();
        if let Some(&last) = curve.last() {
            if anchor.is_none_or(|a| last.0 > a.0 || (last.0 == a.0 && last.1 > a.1)) {
                anchor = Some(last);
            }
        }
        let d: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(i, &(rx, ry))| {
                format!(
                    "{}{:.2},{:.2}",
                    if i == 0 { "M" } else { "L" },
                    ax.px(rx),
                    ax.py(ry)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<path class="series" data-estimator="{}" d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(e),
            d.join(" ")
        );
    }
    if let Some((ax0, ay0)) = anchor {
        let lo = 10f64.powf(x.0);
        let hi = 10f64.powf(x.1);
        for &m in guide_slopes(axis) {
            let at = |rx: f64| ay0 * (rx / ax0).powf(m);
            let _ = writeln!(
                s,
                r##"<path class="guide" data-slope="{m}" d="M{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="#888" stroke-dasharray="6 4"/>"##,
                ax.px(lo),
                ax.py(at(lo)),
                ax.px(hi),
                ax.py(at(hi))
            );
        }
    }
    s.push_str("</g>\n");
    for (k, e) in estimators.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x1 + 10.0,
            x1 + 30.0,
            x1 + 35.0,
            ly + 4.0,
            escape(e)
        );
    }
    let ly = TOP + 10.0 + 18.0 * estimators.len() as f64;
    let slopes: Vec<String> = guide_slopes(axis).iter().map(|m| m.to_string()).collect();
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" fill="#888">guides: slope {}</text>"##,
        x1 + 10.0,
        ly + 4.0,
        slopes.join(", ")
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use vpe_core::experiments::ErrorRecord;

    fn record(rate: f64, estimator: &str, abs_error: f64) -> ErrorRecord {
        ErrorRecord {
            rate,
            replicate: 0,
            estimator: estimator.into(),
            abs_error,
        }
    }

    #[test]
    fn one_series_per_estimator_and_separate_guides() {
        let sweep = SweepResult {
            name: "t".into(),
            axis: "rate".into(),
            records: vec![
                record(1e-3, "vpe", 1e-6),
                record(1e-2, "vpe", 1e-4),
                record(1e-3, "tomography", 1e-3),
                record(1e-2, "tomography", 1e-2),
            ],
            ..Default::default()
        };
        let svg = render(&sweep);
        assert_eq!(svg.matches(r#"class="series""#).count(), 2);
        assert_eq!(svg.matches(r#"class="guide""#).count(), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_sweep_still_renders() {
        let svg = render(&SweepResult::default());
        assert!(svg.contains("no data"));
    }
}
