use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;

use super::ExperimentResult;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per sweep point. Bound terms appear as `term_<label>` columns
/// when a bound was evaluated.
pub fn result_csv(r: &ExperimentResult) -> Result<String> {
    let labels: Vec<String> = r
        .points
        .first()
        .map(|p| p.bound_terms.iter().map(|t| format!("term_{}", t.label)).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "axis_value",
        "T",
        "d",
        "n",
        "n_v",
        "mean",
        "se",
        "ci_lo",
        "ci_hi",
        "mean_lambda_erm",
        "lambda_star",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(labels.iter().cloned());
    header.extend(["bound_total", "reference_distfree", "reference_priorwork"].map(String::from));
    w.write_record(&header)?;
    for p in &r.points {
        let mut row = vec![
            p.x.to_string(),
            p.t.to_string(),
            p.d.to_string(),
            p.n.to_string(),
            p.n_v.to_string(),
            p.mean.to_string(),
            p.se.to_string(),
            p.ci.0.to_string(),
            p.ci.1.to_string(),
            opt(p.mean_lambda_erm),
            opt(p.lambda_star),
        ];
        row.extend(p.bound_terms.iter().map(|t| t.value.to_string()));
        row.extend([opt(p.bound_total), p.reference_distfree.to_string(), p.reference_priorwork.to_string()]);
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

/// Log-log line chart of the sweep: the measured mean, the bound total when
/// present, and both reference curves.
pub fn result_svg(r: &ExperimentResult) -> String {
    let mut series: Vec<(&str, &str, Vec<(f64, f64)>)> = vec![(
        "mean",
        "#1f77b4",
        r.points.iter().map(|p| (p.x, p.mean)).collect(),
    )];
    if r.points.iter().all(|p| p.bound_total.is_some()) && !r.points.is_empty() {
        series.push((
            "bound",
            "#d62728",
            r.points.iter().map(|p| (p.x, p.bound_total.unwrap_or(0.0))).collect(),
        ));
    }
    series.push(("ref distfree", "#2ca02c", r.points.iter().map(|p| (p.x, p.reference_distfree)).collect()));
    series.push(("ref prior work", "#7f7f7f", r.points.iter().map(|p| (p.x, p.reference_priorwork)).collect()));

    let pos = |v: f64| v > 0.0 && v.is_finite();
    let xs: Vec<f64> = r.points.iter().map(|p| p.x).filter(|&v| pos(v)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.2.iter().map(|p| p.1)).filter(|&v| pos(v)).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min).log10();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).log10();
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let (pl, pr, pt, pb) = PAD;
    let px = |x: f64| pl + (x.log10() - x0) / (x1 - x0) * (W - pl - pr);
    let py = |y: f64| H - pb - (y.log10() - y0) / (y1 - y0) * (H - pt - pb);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pl}" y="{pt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - pl - pr,
        H - pt - pb
    );
    for k in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let v = 10f64.powi(k);
        if (k as f64) >= x0 - 1e-9 && (k as f64) <= x1 + 1e-9 {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"#, px(v), H - pb + 16.0);
        }
    }
    for k in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let v = 10f64.powi(k);
        if (k as f64) >= y0 - 1e-9 && (k as f64) <= y1 + 1e-9 {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{k}</text>"#, pl - 6.0, py(v) + 4.0);
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{} ({})</text>"#,
        (W + pl - pr) / 2.0,
        H - 12.0,
        r.axis.name(),
        r.label
    );
    for (i, (name, color, pts)) in series.iter().enumerate() {
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| pos(p.0) && pos(p.1))
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = pt + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{name}</text>"#,
            W - pr - 130.0,
            W - pr - 110.0,
            W - pr - 104.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<stem>.csv`, `<stem>.json` and `<stem>.svg` into `dir`.
pub fn write_result(r: &ExperimentResult, dir: &Path, stem: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.csv")), result_csv(r)?)?;
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(r)? + "\n")?;
    fs::write(dir.join(format!("{stem}.svg")), result_svg(r))?;
    Ok(())
}
