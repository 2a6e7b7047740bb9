//! Suite execution: one deterministic verification per scenario,
//! parallel over scenarios only, collected in input order.

use crate::error::Result;
use crate::generate::polygon_to_lit;
use crate::report::{
    BmPayload, Outcome, Params, Payload, StabilityPayload, VerificationReport, BM_SLACK,
    SCHEMA_VERSION,
};
use crate::scenario::{Inputs, Scenario};
use bbl_core::distance::{h0, rel_asymmetry};
use bbl_core::means::{groemer_coefficient, p_mean, theta_n_bound, MeanOrder};
use bbl_core::pconcave::{verify_bbl, Check, Flag};
use bbl_core::polygon::{minkowski_comb, ConvexPolygon};
use bbl_core::torsion::{verify_bm_tau, verify_poisson_bbl, verify_urysohn};
use rayon::prelude::*;

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn flag_from(margin: f64, slack: f64) -> Check {
    Check {
        flag: if margin >= -slack {
            Flag::Pass
        } else {
            Flag::Fail
        },
        margin,
    }
}

/// Plain and quantitative volume inequalities on one pair.
pub fn verify_bm_pair(
    k0: &ConvexPolygon,
    k1: &ConvexPolygon,
    lambda: f64,
) -> Result<BmPayload> {
    let comb = minkowski_comb(k0, k1, lambda)?;
    let area0 = k0.area();
    let area1 = k1.area();
    let area_lambda = comb.area();
    let mean_rhs = p_mean(area0, area1, lambda, MeanOrder::Finite(0.5))?;
    let h0v = h0(k0, k1);
    let asym = rel_asymmetry(k0, k1).a;
    let omega = groemer_coefficient(2, lambda, area0, area1, k0.diameter(), k1.diameter())?;
    let theta = theta_n_bound(2)?;
    let nu0 = area0.sqrt();
    let nu1 = area1.sqrt();
    let lam_ratio = (lambda / (1.0 - lambda)).max((1.0 - lambda) / lambda);
    let fmp_coeff = 2.0 * nu0.min(nu1) / (lam_ratio * nu0.max(nu1) * theta * theta);

    Ok(BmPayload {
        bodies: vec![
            polygon_to_lit(k0),
            polygon_to_lit(k1),
            polygon_to_lit(&comb),
        ],
        area0,
        area1,
        area_lambda,
        mean_rhs,
        h0: h0v,
        asym,
        omega_groemer: omega,
        fmp_coeff,
        theta_n: theta,
        plain: flag_from(
            area_lambda.sqrt() - ((1.0 - lambda) * area0.sqrt() + lambda * area1.sqrt()),
            BM_SLACK,
        ),
        groemer: flag_from(
            area_lambda - mean_rhs * (1.0 + omega * h0v.powi(3)),
            BM_SLACK,
        ),
        fmp: flag_from(
            area_lambda - mean_rhs * (1.0 + fmp_coeff * asym * asym),
            BM_SLACK,
        ),
    })
}

fn run_inputs(inputs: &Inputs) -> Result<Payload> {
    match inputs {
        Inputs::Bm { k0, k1, lambda } => Ok(Payload::Bm(verify_bm_pair(k0, k1, *lambda)?)),
        Inputs::Bbl {
            u0,
            u1,
            p,
            lambda,
            quad_tol,
        } => Ok(Payload::Bbl(verify_bbl(u0, u1, *p, *lambda, *quad_tol)?)),
        Inputs::Stability {
            u0,
            u1,
            p,
            lambda,
            quad_tol,
        } => {
            let r = verify_bbl(u0, u1, *p, *lambda, *quad_tol)?;
            let c = &r.constants;
            let mean_vol = p_mean(
                u0.domain().area(),
                u1.domain().area(),
                *lambda,
                MeanOrder::Finite(0.5),
            )?;
            let vol_lambda = minkowski_comb(u0.domain(), u1.domain(), *lambda)?.area();
            let eps_plus = r.epsilon.max(0.0);
            let bound_rhs = mean_vol * (1.0 + c.eta * eps_plus.powf(p / (p + 1.0)));
            Ok(Payload::Stability(StabilityPayload {
                epsilon: r.epsilon,
                vol_lambda,
                mean_vol,
                bound_rhs,
                eta: c.eta,
                b_threshold: c.b_threshold,
                holds: r.checks.stability.flag,
            }))
        }
        Inputs::BmTau {
            k0,
            k1,
            lambda,
            mesh_h,
        } => Ok(Payload::BmTau(verify_bm_tau(k0, k1, *lambda, *mesh_h)?)),
        Inputs::Urysohn {
            k,
            mesh_h,
            angle_count,
        } => Ok(Payload::Urysohn(verify_urysohn(k, *mesh_h, *angle_count)?)),
        Inputs::PoissonBbl {
            k0,
            k1,
            lambda,
            f_pieces,
            beta_exp,
            mesh_h,
        } => Ok(Payload::PoissonBbl(verify_poisson_bbl(
            k0, k1, *lambda, f_pieces, *beta_exp, *mesh_h,
        )?)),
    }
}

/// Runs one scenario; failures land in the outcome instead of
/// propagating.
pub fn run_one(index: usize, scenario: &Scenario) -> VerificationReport {
    let start = std::time::Instant::now();
    let outcome = match scenario.validate(index) {
        Err(e) => Outcome::Error(e.to_string()),
        Ok(inputs) => match run_inputs(&inputs) {
            Ok(payload) => Outcome::Ok(payload),
            Err(e) => Outcome::Error(e.to_string()),
        },
    };
    VerificationReport {
        schema: SCHEMA_VERSION,
        tool_version: tool_version().to_string(),
        name: scenario.name.clone(),
        kind: scenario.kind,
        seed: scenario.seed,
        params: Params {
            p: scenario.p,
            lambda: scenario.lambda,
            mesh_h: scenario.mesh_h,
            quad_tol: scenario.quad_tol,
            angle_count: scenario.angle_count,
        },
        wall_time_ms: start.elapsed().as_millis() as u64,
        outcome,
    }
}

/// Parallel map over scenarios with order-preserving collection; `jobs`
/// of `None` lets the pool pick its default width.
pub fn run_suite(scenarios: &[Scenario], jobs: Option<usize>) -> Vec<VerificationReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .expect("thread pool construction");
    pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, sc)| run_one(i, sc))
            .collect()
    })
}
