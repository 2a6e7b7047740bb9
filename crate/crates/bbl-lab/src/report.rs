//! Verification reports: everything a run measured, every flag it
//! raised, and enough recorded scalars to recompute each flag offline.

use crate::scenario::{Kind, PolygonLit};
use bbl_core::means::{p_mean, MeanOrder};
use bbl_core::pconcave::{BBLReport, Check, Flag};
use bbl_core::torsion::{BmTauReport, PoissonBblReport, UrysohnReport};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Slack for the exact-arithmetic polygon checks (the mesh-based kinds
/// carry their own `fem_slack` instead).
pub const BM_SLACK: f64 = 1e-9;

/// Relative tolerance when the audit recomputes a recorded margin.
pub const AUDIT_RTOL: f64 = 1e-12;

/// Scenario parameters echoed into the report so flags can be
/// recomputed without the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_count: Option<usize>,
}

/// Volume inequality on one polygon pair: the square-root form, the
/// Hausdorff-powered sharpening, and the asymmetry-powered sharpening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmPayload {
    /// Ω0, Ω1, Ω_λ vertex loops, in that order (feeds the SVG panel).
    pub bodies: Vec<PolygonLit>,
    pub area0: f64,
    pub area1: f64,
    pub area_lambda: f64,
    /// M_{1/2}(area0, area1; λ).
    pub mean_rhs: f64,
    pub h0: f64,
    pub asym: f64,
    /// Coefficient of H₀³ in the Hausdorff sharpening.
    pub omega_groemer: f64,
    /// Coefficient of A² in the asymmetry sharpening.
    pub fmp_coeff: f64,
    pub theta_n: f64,
    pub plain: Check,
    pub groemer: Check,
    pub fmp: Check,
}

/// Reverse volume bound driven by the convolution deficit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityPayload {
    /// Raw deficit I_λ − M_{p/(np+1)}(I0, I1; λ); may dip below zero by
    /// quadrature error.
    pub epsilon: f64,
    pub vol_lambda: f64,
    /// M_{1/n}(|Ω0|, |Ω1|; λ).
    pub mean_vol: f64,
    pub bound_rhs: f64,
    pub eta: f64,
    pub b_threshold: f64,
    pub holds: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Bm(BmPayload),
    Bbl(BBLReport),
    Stability(StabilityPayload),
    BmTau(BmTauReport),
    Urysohn(UrysohnReport),
    PoissonBbl(PoissonBblReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok(Payload),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool_version: String,
    pub name: String,
    pub kind: Kind,
    pub seed: u64,
    pub params: Params,
    /// Measured, not reproducible: excluded from serialized output so
    /// reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_ms: u64,
    pub outcome: Outcome,
}

impl VerificationReport {
    /// True when every flag is pass or not-applicable. An errored
    /// scenario counts as not verified.
    pub fn all_ok(&self) -> bool {
        match &self.outcome {
            Outcome::Error(_) => false,
            Outcome::Ok(payload) => payload.flags().iter().all(|(_, f)| f.ok()),
        }
    }
}

impl Payload {
    /// Every flag in the payload with a stable label (the CSV column
    /// suffix).
    pub fn flags(&self) -> Vec<(&'static str, Flag)> {
        match self {
            Payload::Bm(bm) => vec![
                ("plain", bm.plain.flag),
                ("hausdorff", bm.groemer.flag),
                ("asymmetry", bm.fmp.flag),
            ],
            Payload::Bbl(r) => vec![
                ("plain", r.checks.base.flag),
                ("hausdorff", r.checks.hausdorff.flag),
                ("asymmetry", r.checks.asymmetry.flag),
                ("hausdorff_capped", r.checks.hausdorff_capped.flag),
                ("asymmetry_capped", r.checks.asymmetry_capped.flag),
                ("stability", r.checks.stability.flag),
            ],
            Payload::Stability(s) => vec![("stability", s.holds)],
            Payload::BmTau(r) => vec![
                ("plain", r.plain.flag),
                ("hausdorff", r.hausdorff.flag),
                ("asymmetry", r.asymmetry.flag),
            ],
            Payload::Urysohn(r) => vec![
                ("plain", r.plain.flag),
                ("hausdorff", r.hausdorff.flag),
                ("asymmetry", r.asymmetry.flag),
            ],
            Payload::PoissonBbl(r) => vec![
                ("plain", r.plain.flag),
                ("hausdorff", r.hausdorff.flag),
            ],
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AUDIT_RTOL * a.abs().max(b.abs()).max(1e-300)
}

fn expect_flag(
    errors: &mut Vec<String>,
    label: &str,
    check: Check,
    margin: Option<f64>,
    slack: f64,
) {
    if let Some(m) = margin {
        if !close(check.margin, m) {
            errors.push(format!(
                "{label}: recorded margin {} but scalars give {m}",
                check.margin
            ));
        }
    }
    let expected = if check.margin >= -slack {
        Flag::Pass
    } else {
        Flag::Fail
    };
    if check.flag != expected {
        errors.push(format!(
            "{label}: flag {:?} disagrees with margin {} at slack {slack}",
            check.flag, check.margin
        ));
    }
}

fn expect_na(errors: &mut Vec<String>, label: &str, check: Check) {
    if check.flag != Flag::NotApplicable {
        errors.push(format!(
            "{label}: expected not-applicable, recorded {:?}",
            check.flag
        ));
    }
}

/// Recomputes every flag of the report from its recorded scalars and
/// compares. `Err` lists each disagreement.
pub fn audit(report: &VerificationReport) -> Result<(), Vec<String>> {
    let payload = match &report.outcome {
        Outcome::Error(_) => return Ok(()),
        Outcome::Ok(p) => p,
    };
    let mut errors = Vec::new();
    let mean =
        |a: f64, b: f64, lambda: f64, q: f64| p_mean(a, b, lambda, MeanOrder::Finite(q)).ok();
    match payload {
        Payload::Bm(bm) => {
            let Some(lambda) = report.params.lambda else {
                return Err(vec!["bm report lacks lambda".to_string()]);
            };
            let root = (1.0 - lambda) * bm.area0.sqrt() + lambda * bm.area1.sqrt();
            expect_flag(
                &mut errors,
                "plain",
                bm.plain,
                Some(bm.area_lambda.sqrt() - root),
                BM_SLACK,
            );
            if let Some(m) = mean(bm.area0, bm.area1, lambda, 0.5) {
                if !close(m, bm.mean_rhs) {
                    errors.push(format!("mean_rhs {} vs recomputed {m}", bm.mean_rhs));
                }
                expect_flag(
                    &mut errors,
                    "groemer",
                    bm.groemer,
                    Some(bm.area_lambda - m * (1.0 + bm.omega_groemer * bm.h0.powi(3))),
                    BM_SLACK,
                );
                expect_flag(
                    &mut errors,
                    "fmp",
                    bm.fmp,
                    Some(bm.area_lambda - m * (1.0 + bm.fmp_coeff * bm.asym * bm.asym)),
                    BM_SLACK,
                );
            }
        }
        Payload::Bbl(r) => {
            let Some(tol) = report.params.quad_tol else {
                return Err(vec!["bbl report lacks quad_tol".to_string()]);
            };
            let c = &r.constants;
            let p = c.provenance.p;
            let slack = tol * r.i_lambda.abs().max(1.0);
            let term_h = c.beta * r.h0.powf(3.0 * (p + 1.0) / p);
            let term_a = c.delta * r.asym.powf(2.0 * (p + 1.0) / p);
            expect_flag(&mut errors, "base", r.checks.base, Some(r.epsilon), slack);
            if r.h0 < c.h0_max {
                expect_flag(
                    &mut errors,
                    "hausdorff",
                    r.checks.hausdorff,
                    Some(r.epsilon - term_h),
                    slack,
                );
            } else {
                expect_na(&mut errors, "hausdorff", r.checks.hausdorff);
            }
            if r.asym < c.a_max {
                expect_flag(
                    &mut errors,
                    "asymmetry",
                    r.checks.asymmetry,
                    Some(r.epsilon - term_a),
                    slack,
                );
            } else {
                expect_na(&mut errors, "asymmetry", r.checks.asymmetry);
            }
            expect_flag(
                &mut errors,
                "hausdorff_capped",
                r.checks.hausdorff_capped,
                Some(r.epsilon - term_h.min(c.b_threshold)),
                slack,
            );
            expect_flag(
                &mut errors,
                "asymmetry_capped",
                r.checks.asymmetry_capped,
                Some(r.epsilon - term_a.min(c.b_threshold)),
                slack,
            );
            if r.epsilon.max(0.0) <= c.b_threshold {
                // The stability margin needs |Ω_λ|, which the embedded
                // report does not carry; check flag-margin agreement.
                expect_flag(&mut errors, "stability", r.checks.stability, None, BM_SLACK);
            } else {
                expect_na(&mut errors, "stability", r.checks.stability);
            }
        }
        Payload::Stability(s) => {
            let Some(p) = report.params.p else {
                return Err(vec!["stability report lacks p".to_string()]);
            };
            let eps_plus = s.epsilon.max(0.0);
            let bound = s.mean_vol * (1.0 + s.eta * eps_plus.powf(p / (p + 1.0)));
            if !close(bound, s.bound_rhs) {
                errors.push(format!("bound_rhs {} vs recomputed {bound}", s.bound_rhs));
            }
            let expected = if eps_plus > s.b_threshold {
                Flag::NotApplicable
            } else if s.bound_rhs - s.vol_lambda >= -BM_SLACK {
                Flag::Pass
            } else {
                Flag::Fail
            };
            if s.holds != expected {
                errors.push(format!("stability flag {:?} vs recomputed {expected:?}", s.holds));
            }
        }
        Payload::BmTau(r) => {
            let Some(lambda) = report.params.lambda else {
                return Err(vec!["bm_tau report lacks lambda".to_string()]);
            };
            if let Some(m) = mean(r.tau0.richardson, r.tau1.richardson, lambda, 0.25) {
                if !close(m, r.mean_rhs) {
                    errors.push(format!("mean_rhs {} vs recomputed {m}", r.mean_rhs));
                }
            }
            let deficit = r.tau_lambda.richardson - r.mean_rhs;
            let c = &r.constants;
            expect_flag(&mut errors, "plain", r.plain, Some(deficit), r.fem_slack);
            if r.h0 < c.h0_max {
                expect_flag(
                    &mut errors,
                    "hausdorff",
                    r.hausdorff,
                    Some(deficit - c.beta * r.h0.powi(9)),
                    r.fem_slack,
                );
            } else {
                expect_na(&mut errors, "hausdorff", r.hausdorff);
            }
            if r.asym < c.a_max {
                expect_flag(
                    &mut errors,
                    "asymmetry",
                    r.asymmetry,
                    Some(deficit - c.delta * r.asym.powi(6)),
                    r.fem_slack,
                );
            } else {
                expect_na(&mut errors, "asymmetry", r.asymmetry);
            }
        }
        Payload::Urysohn(r) => {
            let t = r.tau_omega.richardson;
            let ts = r.tau_sharp.richardson;
            expect_flag(&mut errors, "plain", r.plain, Some(ts - t), r.fem_slack);
            expect_flag(
                &mut errors,
                "hausdorff",
                r.hausdorff,
                Some(ts - t * (1.0 + r.mu * r.h_dist.powi(9))),
                r.fem_slack,
            );
            expect_flag(
                &mut errors,
                "asymmetry",
                r.asymmetry,
                Some(ts - t * (1.0 + r.nu * r.asym.powi(6))),
                r.fem_slack,
            );
        }
        Payload::PoissonBbl(r) => {
            let Some(lambda) = report.params.lambda else {
                return Err(vec!["poisson_bbl report lacks lambda".to_string()]);
            };
            let p = r.p_used;
            if let Some(m) = mean(
                r.i0.richardson,
                r.i1.richardson,
                lambda,
                p / (2.0 * p + 1.0),
            ) {
                if !close(m, r.mean_rhs) {
                    errors.push(format!("mean_rhs {} vs recomputed {m}", r.mean_rhs));
                }
            }
            let deficit = r.i_lambda.richardson - r.mean_rhs;
            let c = &r.constants;
            expect_flag(&mut errors, "plain", r.plain, Some(deficit), r.fem_slack);
            if r.h0 < c.h0_max {
                expect_flag(
                    &mut errors,
                    "hausdorff",
                    r.hausdorff,
                    Some(deficit - c.beta * r.h0.powf(3.0 * (p + 1.0) / p)),
                    r.fem_slack,
                );
            } else {
                expect_na(&mut errors, "hausdorff", r.hausdorff);
            }
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
