//! Report emission. JSON carries full fidelity, CSV one fixed-width
//! row per scenario, SVG an at-a-glance picture: the bodies of the
//! first polygon scenario plus deficit-versus-distance scatters with
//! their theorem bound terms.

use crate::error::{Error, Result};
use crate::report::{Outcome, Payload, VerificationReport};
use bbl_core::pconcave::Flag;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected json, csv, svg)")),
        }
    }
}

/// Top-level JSON document written to reports.json.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReportsFile {
    pub schema: u32,
    pub reports: Vec<VerificationReport>,
}

pub fn reports_json(reports: &[VerificationReport]) -> String {
    let file = ReportsFile {
        schema: crate::report::SCHEMA_VERSION,
        reports: reports.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("reports serialize");
    text.push('\n');
    text
}

/// Fixed CSV header; every kind fills the same columns, leaving the
/// inapplicable ones empty.
pub const CSV_HEADER: [&str; 24] = [
    "name",
    "kind",
    "seed",
    "p",
    "lambda",
    "mesh_h",
    "quad_tol",
    "angle_count",
    "status",
    "q0",
    "q1",
    "q_lambda",
    "mean_rhs",
    "deficit",
    "h0",
    "asym",
    "fem_slack",
    "flag_plain",
    "flag_hausdorff",
    "flag_asymmetry",
    "flag_hausdorff_capped",
    "flag_asymmetry_capped",
    "flag_stability",
    "error",
];

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flag_cell(flags: &[(&'static str, Flag)], label: &str) -> String {
    flags
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, f)| match f {
            Flag::Pass => "pass".to_string(),
            Flag::Fail => "fail".to_string(),
            Flag::NotApplicable => "n/a".to_string(),
        })
        .unwrap_or_default()
}

/// Primary scalars of a payload: the three measured quantities, the
/// mean-side bound, the leading deficit, and the distances.
struct Row {
    q0: Option<f64>,
    q1: Option<f64>,
    q_lambda: Option<f64>,
    mean_rhs: Option<f64>,
    deficit: Option<f64>,
    h0: Option<f64>,
    asym: Option<f64>,
    fem_slack: Option<f64>,
}

fn row_scalars(payload: &Payload) -> Row {
    match payload {
        Payload::Bm(bm) => Row {
            q0: Some(bm.area0),
            q1: Some(bm.area1),
            q_lambda: Some(bm.area_lambda),
            mean_rhs: Some(bm.mean_rhs),
            deficit: Some(bm.area_lambda - bm.mean_rhs),
            h0: Some(bm.h0),
            asym: Some(bm.asym),
            fem_slack: None,
        },
        Payload::Bbl(r) => Row {
            q0: Some(r.i0),
            q1: Some(r.i1),
            q_lambda: Some(r.i_lambda),
            mean_rhs: Some(r.mean_rhs),
            deficit: Some(r.epsilon),
            h0: Some(r.h0),
            asym: Some(r.asym),
            fem_slack: None,
        },
        Payload::Stability(s) => Row {
            q0: None,
            q1: None,
            q_lambda: Some(s.vol_lambda),
            mean_rhs: Some(s.mean_vol),
            deficit: Some(s.epsilon),
            h0: None,
            asym: None,
            fem_slack: None,
        },
        Payload::BmTau(r) => Row {
            q0: Some(r.tau0.richardson),
            q1: Some(r.tau1.richardson),
            q_lambda: Some(r.tau_lambda.richardson),
            mean_rhs: Some(r.mean_rhs),
            deficit: Some(r.plain.margin),
            h0: Some(r.h0),
            asym: Some(r.asym),
            fem_slack: Some(r.fem_slack),
        },
        Payload::Urysohn(r) => Row {
            q0: Some(r.tau_omega.richardson),
            q1: Some(r.tau_sharp.richardson),
            q_lambda: None,
            mean_rhs: None,
            deficit: Some(r.plain.margin),
            h0: Some(r.h_dist),
            asym: Some(r.asym),
            fem_slack: Some(r.fem_slack),
        },
        Payload::PoissonBbl(r) => Row {
            q0: Some(r.i0.richardson),
            q1: Some(r.i1.richardson),
            q_lambda: Some(r.i_lambda.richardson),
            mean_rhs: Some(r.mean_rhs),
            deficit: Some(r.plain.margin),
            h0: Some(r.h0),
            asym: None,
            fem_slack: Some(r.fem_slack),
        },
    }
}

pub fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("csv header");
    for r in reports {
        let (status, error) = match &r.outcome {
            Outcome::Ok(_) => ("ok".to_string(), String::new()),
            Outcome::Error(msg) => ("error".to_string(), msg.clone()),
        };
        let (row, flags) = match &r.outcome {
            Outcome::Ok(p) => (Some(row_scalars(p)), p.flags()),
            Outcome::Error(_) => (None, Vec::new()),
        };
        let pick = |f: fn(&Row) -> Option<f64>| row.as_ref().and_then(f);
        let record = [
            r.name.clone(),
            r.kind.to_string(),
            r.seed.to_string(),
            opt(r.params.p),
            opt(r.params.lambda),
            opt(r.params.mesh_h),
            opt(r.params.quad_tol),
            r.params
                .angle_count
                .map(|a| a.to_string())
                .unwrap_or_default(),
            status,
            opt(pick(|x| x.q0)),
            opt(pick(|x| x.q1)),
            opt(pick(|x| x.q_lambda)),
            opt(pick(|x| x.mean_rhs)),
            opt(pick(|x| x.deficit)),
            opt(pick(|x| x.h0)),
            opt(pick(|x| x.asym)),
            opt(pick(|x| x.fem_slack)),
            flag_cell(&flags, "plain"),
            flag_cell(&flags, "hausdorff"),
            flag_cell(&flags, "asymmetry"),
            flag_cell(&flags, "hausdorff_capped"),
            flag_cell(&flags, "asymmetry_capped"),
            flag_cell(&flags, "stability"),
            error,
        ];
        w.write_record(&record).expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv is utf-8")
}

const PANEL: f64 = 420.0;
const PAD: f64 = 42.0;
/// Log-scale floor and ceiling for the scatter panels.
const LOG_LO: f64 = -30.0;
const LOG_HI: f64 = 2.0;

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn log_clamp(x: f64) -> f64 {
    x.max(10f64.powf(LOG_LO)).log10().clamp(LOG_LO, LOG_HI)
}

/// (deficit, bound term) samples against a distance, one per report
/// that measures the pair.
fn scatter_points(reports: &[VerificationReport], against_h: bool) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for r in reports {
        let Outcome::Ok(payload) = &r.outcome else {
            continue;
        };
        let sample = match payload {
            Payload::Bm(bm) => {
                let deficit = bm.area_lambda - bm.mean_rhs;
                if against_h {
                    Some((bm.h0, deficit, bm.mean_rhs * bm.omega_groemer * bm.h0.powi(3)))
                } else {
                    Some((
                        bm.asym,
                        deficit,
                        bm.mean_rhs * bm.fmp_coeff * bm.asym * bm.asym,
                    ))
                }
            }
            Payload::Bbl(r) => {
                let p = r.constants.provenance.p;
                if against_h {
                    Some((
                        r.h0,
                        r.epsilon,
                        r.constants.beta * r.h0.powf(3.0 * (p + 1.0) / p),
                    ))
                } else {
                    Some((
                        r.asym,
                        r.epsilon,
                        r.constants.delta * r.asym.powf(2.0 * (p + 1.0) / p),
                    ))
                }
            }
            Payload::Stability(_) => None,
            Payload::BmTau(r) => {
                if against_h {
                    Some((r.h0, r.plain.margin, r.constants.beta * r.h0.powi(9)))
                } else {
                    Some((r.asym, r.plain.margin, r.constants.delta * r.asym.powi(6)))
                }
            }
            Payload::Urysohn(r) => {
                let tau = r.tau_omega.richardson;
                if against_h {
                    Some((r.h_dist, r.plain.margin, tau * r.mu * r.h_dist.powi(9)))
                } else {
                    Some((r.asym, r.plain.margin, tau * r.nu * r.asym.powi(6)))
                }
            }
            Payload::PoissonBbl(r) => {
                let p = r.p_used;
                if against_h {
                    Some((
                        r.h0,
                        r.plain.margin,
                        r.constants.beta * r.h0.powf(3.0 * (p + 1.0) / p),
                    ))
                } else {
                    None
                }
            }
        };
        if let Some(s) = sample {
            out.push(s);
        }
    }
    out
}

fn scatter_panel(
    svg: &mut String,
    origin_x: f64,
    title: &str,
    x_label: &str,
    points: &[(f64, f64, f64)],
) {
    let span = PANEL - 2.0 * PAD;
    let to_px = |lx: f64| (lx - LOG_LO) / (LOG_HI - LOG_LO) * span;
    let x_of = |x: f64| origin_x + PAD + to_px(log_clamp(x));
    let y_of = |y: f64| PANEL - PAD - to_px(log_clamp(y));
    let _ = writeln!(
        svg,
        "<rect x=\"{:.1}\" y=\"{PAD}\" width=\"{span}\" height=\"{span}\" fill=\"none\" stroke=\"#888\"/>",
        origin_x + PAD
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        origin_x + PANEL / 2.0,
        PAD - 12.0,
        xml_escape(title)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{} (log10)</text>",
        origin_x + PANEL / 2.0,
        PANEL - 8.0,
        xml_escape(x_label)
    );
    for dec in (LOG_LO as i64..=LOG_HI as i64).step_by(8) {
        let px = origin_x + PAD + to_px(dec as f64);
        let py = PANEL - PAD - to_px(dec as f64);
        let _ = writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" font-size=\"9\" text-anchor=\"middle\">1e{dec}</text>",
            PANEL - PAD + 12.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{py:.1}\" font-size=\"9\" text-anchor=\"end\">1e{dec}</text>",
            origin_x + PAD - 4.0
        );
    }
    let mut bounds: Vec<(f64, f64)> = points.iter().map(|&(x, _, b)| (x_of(x), y_of(b))).collect();
    bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
    if bounds.len() > 1 {
        let path: Vec<String> = bounds
            .iter()
            .map(|(x, y)| format!("{x:.1},{y:.1}"))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#cc6633\" stroke-dasharray=\"4 3\"/>",
            path.join(" ")
        );
    }
    for &(x, deficit, bound) in points {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#336699\" fill-opacity=\"0.8\"/>",
            x_of(x),
            y_of(deficit)
        );
        let (bx, by) = (x_of(x), y_of(bound));
        let _ = writeln!(
            svg,
            "<path d=\"M{:.1} {:.1}L{:.1} {:.1}M{:.1} {:.1}L{:.1} {:.1}\" stroke=\"#cc6633\"/>",
            bx - 3.0,
            by - 3.0,
            bx + 3.0,
            by + 3.0,
            bx - 3.0,
            by + 3.0,
            bx + 3.0,
            by - 3.0
        );
    }
}

fn bodies_panel(svg: &mut String, reports: &[VerificationReport]) {
    let bodies = reports.iter().find_map(|r| match &r.outcome {
        Outcome::Ok(Payload::Bm(bm)) => Some(&bm.bodies),
        _ => None,
    });
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">bodies: first volume scenario</text>",
        PANEL / 2.0,
        PAD - 12.0
    );
    let Some(bodies) = bodies else {
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">no polygon scenarios in this suite</text>",
            PANEL / 2.0,
            PANEL / 2.0
        );
        return;
    };
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for body in bodies {
        for &[x, y] in body {
            lo[0] = lo[0].min(x);
            lo[1] = lo[1].min(y);
            hi[0] = hi[0].max(x);
            hi[1] = hi[1].max(y);
        }
    }
    let scale = (PANEL - 2.0 * PAD) / (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let colors = ["#336699", "#993333", "#663399"];
    let labels = ["omega0", "omega1", "omega_lambda"];
    for (i, body) in bodies.iter().enumerate().take(3) {
        let pts: Vec<String> = body
            .iter()
            .map(|&[x, y]| {
                format!(
                    "{:.2},{:.2}",
                    PAD + (x - lo[0]) * scale,
                    PANEL - PAD - (y - lo[1]) * scale
                )
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.22\" stroke=\"{}\"/>",
            pts.join(" "),
            colors[i],
            colors[i]
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{}\">{}</text>",
            PAD,
            PAD + 14.0 * (i as f64 + 1.0),
            colors[i],
            labels[i]
        );
    }
}

pub fn reports_svg(reports: &[VerificationReport]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{PANEL:.0}\" viewBox=\"0 0 {:.0} {PANEL:.0}\">",
        3.0 * PANEL,
        3.0 * PANEL
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    bodies_panel(&mut svg, reports);
    scatter_panel(
        &mut svg,
        PANEL,
        "deficit (dots) vs Hausdorff bound term (crosses)",
        "H0",
        &scatter_points(reports, true),
    );
    scatter_panel(
        &mut svg,
        2.0 * PANEL,
        "deficit (dots) vs asymmetry bound term (crosses)",
        "A",
        &scatter_points(reports, false),
    );
    svg.push_str("</svg>\n");
    svg
}

/// Writes the requested formats into `out_dir`, returning the paths in
/// json, csv, svg order.
pub fn emit(
    reports: &[VerificationReport],
    formats: &[Format],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    if formats.contains(&Format::Json) {
        write("reports.json", reports_json(reports))?;
    }
    if formats.contains(&Format::Csv) {
        write("reports.csv", reports_csv(reports))?;
    }
    if formats.contains(&Format::Svg) {
        write("reports.svg", reports_svg(reports))?;
    }
    Ok(written)
}
