//! Minimal line plot of `log₁₀(error)` against the parameter index.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

fn log10_clamped(v: f64) -> f64 {
    if v > 0.0 {
        v.log10().max(-17.0)
    } else {
        -17.0
    }
}

pub fn render(title: &str, series: &[Series]) -> String {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(1);
    let logs: Vec<Vec<f64>> = series.iter().map(|s| s.values.iter().map(|&v| log10_clamped(v)).collect()).collect();
    let all = logs.iter().flatten().copied();
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    lo = lo.floor();
    hi = hi.ceil().max(lo + 1.0);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let x = |i: usize| LEFT + if n > 1 { pw * i as f64 / (n - 1) as f64 } else { pw / 2.0 };
    let y = |v: f64| TOP + ph * (hi - v) / (hi - lo);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    let mut e = lo as i64;
    while e as f64 <= hi {
        let yy = y(e as f64);
        writeln!(s, r##"<line x1="{LEFT}" y1="{yy:.1}" x2="{}" y2="{yy:.1}" stroke="#ddd"/>"##, LEFT + pw).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{e}</text>"#, LEFT - 6.0, yy + 4.0).unwrap();
        e += 1;
    }
    let ticks = n.min(10);
    for t in 0..ticks {
        let i = if ticks > 1 { t * (n - 1) / (ticks - 1) } else { 0 };
        writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, x(i), TOP + ph + 16.0, i + 1).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">parameter index</text>"#, LEFT + pw / 2.0, H - 10.0).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">log10 relative error</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    )
    .unwrap();
    for (k, (ser, lv)) in series.iter().zip(&logs).enumerate() {
        let c = COLORS[k % COLORS.len()];
        let pts: Vec<String> = lv.iter().enumerate().map(|(i, &v)| format!("{:.1},{:.1}", x(i), y(v))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).unwrap();
        let ly = TOP + 10.0 + 18.0 * k as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, W - RIGHT + 12.0, W - RIGHT + 32.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - RIGHT + 38.0, ly + 4.0, escape(&ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_series() {
        let s = render(
            "a < b",
            &[
                Series {
                    label: "m=5".into(),
                    values: vec![1e-3, 1e-4, 0.0],
                },
                Series {
                    label: "m=10".into(),
                    values: vec![1e-8, 1e-9, 1e-7],
                },
            ],
        );
        assert!(s.starts_with("<svg"));
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("a &lt; b"));
    }

    #[test]
    fn empty_plot_is_valid() {
        assert!(render("empty", &[]).ends_with("</svg>\n"));
    }
}
