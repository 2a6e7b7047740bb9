//! Weighted power means M_q(a,b;λ) on extended orders q ∈ [−∞,+∞],
//! the product lemma, and every explicit stability constant used by
//! the verification pipelines (β, δ, η, ω, γ_n, θ_n, B, μ, ν and the
//! smallness thresholds).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Order of a power mean. Infinite orders are tags, never floating
/// infinities inside exponent arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanOrder {
    NegInf,
    Finite(f64),
    PosInf,
}

/// Finite orders with |q| below this evaluate through the q = 0
/// (geometric) formula; the power formula cancels catastrophically there.
pub const TINY_ORDER: f64 = 1e-12;

/// M_q(a,b;λ) per the five-case definition: max at q=+∞, min at q=−∞,
/// geometric mean at q=0, zero when q is finite and ab=0, otherwise
/// ((1−λ)a^q + λb^q)^(1/q).
pub fn p_mean(a: f64, b: f64, lambda: f64, q: MeanOrder) -> Result<f64> {
    for (what, value) in [("a", a), ("b", b)] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::BadScalar { what, value });
        }
    }
    check_lambda(lambda)?;
    if a == b {
        return Ok(a);
    }
    Ok(match q {
        MeanOrder::PosInf => a.max(b),
        MeanOrder::NegInf => a.min(b),
        MeanOrder::Finite(q) if q.abs() < TINY_ORDER => a.powf(1.0 - lambda) * b.powf(lambda),
        MeanOrder::Finite(_) if a == 0.0 || b == 0.0 => 0.0,
        MeanOrder::Finite(q) => {
            // Factor out an endpoint so both ratios stay in (0,1]; avoids
            // overflow for large |q|.
            let m = if q > 0.0 { a.max(b) } else { a.min(b) };
            let sum = (1.0 - lambda) * (a / m).powf(q) + lambda * (b / m).powf(q);
            m * sum.powf(1.0 / q)
        }
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::NonPositive { what, value });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Product lemma: M_p(a,b;λ)·M_q(c,d;λ) ≥ M_s(ac,bd;λ) with
/// s = pq/(p+q), s = 0 when p = q = 0. Requires p+q > 0 or p = q = 0.
pub fn mean_product_check(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    lambda: f64,
    p: f64,
    q: f64,
) -> Result<ProductCheck> {
    let s = if p == 0.0 && q == 0.0 {
        0.0
    } else if p + q > 0.0 {
        p * q / (p + q)
    } else {
        return Err(Error::BadOrderPair { p, q });
    };
    let lhs = p_mean(a, b, lambda, MeanOrder::Finite(p))?
        * p_mean(c, d, lambda, MeanOrder::Finite(q))?;
    let rhs = p_mean(a * c, b * d, lambda, MeanOrder::Finite(s))?;
    let holds = lhs >= rhs - 1e-12 * lhs.abs().max(1.0);
    Ok(ProductCheck { lhs, rhs, holds })
}

/// γ_n = (1 + 1/(3·2¹³)) · 3^((n−1)/n) · 2^((n+2)/(n+1)) · n; always < 6.00025·n.
pub fn gamma_n(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let nf = f64::from(n);
    let g = (1.0 + 1.0 / (3.0 * 8192.0))
        * 3f64.powf((nf - 1.0) / nf)
        * 2f64.powf((nf + 2.0) / (nf + 1.0))
        * nf;
    assert!(g < 6.00025 * nf);
    Ok(g)
}

/// θ_n upper bound 362·n⁷ / (2 − 2^((n−1)/n))^(3/2).
pub fn theta_n_bound(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let nf = f64::from(n);
    Ok(362.0 * nf.powi(7) / (2.0 - 2f64.powf((nf - 1.0) / nf)).powf(1.5))
}

/// ω = (γ_n·(M/m·1/√(λ(1−λ)) + 2)·d̃)^(−(n+1)) with ν_i = vol_i^(1/n),
/// d̃ = max(diam_i/ν_i), M = max ν_i, m = min ν_i.
pub fn groemer_coefficient(
    n: u32,
    lambda: f64,
    vol0: f64,
    vol1: f64,
    diam0: f64,
    diam1: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let shape = body_shape(n, vol0, vol1, diam0, diam1)?;
    let nf = f64::from(n);
    Ok(groemer_base(gamma_n(n)?, &shape, lambda).powf(-(nf + 1.0)))
}

struct BodyShape {
    d_tilde: f64,
    m_big: f64,
    m_small: f64,
}

fn body_shape(n: u32, vol0: f64, vol1: f64, diam0: f64, diam1: f64) -> Result<BodyShape> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    check_positive("vol0", vol0)?;
    check_positive("vol1", vol1)?;
    check_positive("diam0", diam0)?;
    check_positive("diam1", diam1)?;
    let nf = f64::from(n);
    let nu0 = vol0.powf(1.0 / nf);
    let nu1 = vol1.powf(1.0 / nf);
    Ok(BodyShape {
        d_tilde: (diam0 / nu0).max(diam1 / nu1),
        m_big: nu0.max(nu1),
        m_small: nu0.min(nu1),
    })
}

fn groemer_base(gamma: f64, shape: &BodyShape, lambda: f64) -> f64 {
    gamma * (shape.m_big / shape.m_small / (lambda * (1.0 - lambda)).sqrt() + 2.0) * shape.d_tilde
}

/// Inputs a ConstantsBundle was computed from; recomputing from these
/// reproduces every entry bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n: u32,
    pub p: f64,
    pub lambda: f64,
    pub vol0: f64,
    pub vol1: f64,
    pub diam0: f64,
    pub diam1: f64,
    pub i0: f64,
    pub i1: f64,
}

/// The explicit constants of the quantitative theorems, all evaluated
/// literally from the displayed formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsBundle {
    /// Coefficient of H₀^((n+1)(p+1)/p).
    pub beta: f64,
    /// Coefficient of A^(2(p+1)/p).
    pub delta: f64,
    /// Stability factor: bound is M_(1/n)·(1 + η·ε^(p/(p+1))).
    pub eta: f64,
    /// Coefficient of H₀^(n+1) in the volume stability bound.
    pub omega_groemer: f64,
    pub gamma_n: f64,
    pub theta_n: f64,
    /// Cap B = (1/(2n))^((p+1)/p); also the admissible range of ε.
    pub b_threshold: f64,
    /// H₀ must stay below this for the β-term bound to apply.
    pub h0_max: f64,
    /// A must stay below this for the δ-term bound to apply.
    pub a_max: f64,
    pub provenance: Provenance,
}

impl ConstantsBundle {
    /// Mean M_(p/(np+1))(I0, I1; λ) of the provenance integrals.
    pub fn integral_mean(&self) -> f64 {
        let pr = &self.provenance;
        let nf = f64::from(pr.n);
        let order = pr.p / (nf * pr.p + 1.0);
        p_mean(pr.i0, pr.i1, pr.lambda, MeanOrder::Finite(order))
            .expect("provenance was validated at construction")
    }

    pub fn recompute(&self) -> ConstantsBundle {
        let pr = &self.provenance;
        bbl_constants(
            pr.n, pr.p, pr.lambda, pr.vol0, pr.vol1, pr.diam0, pr.diam1, pr.i0, pr.i1,
        )
        .expect("provenance was validated at construction")
    }
}

/// Evaluates β, δ, η, ω, γ_n, θ_n, B and the two smallness thresholds
/// for bodies of the given volumes/diameters and functions with
/// integrals I0, I1.
#[allow(clippy::too_many_arguments)]
pub fn bbl_constants(
    n: u32,
    p: f64,
    lambda: f64,
    vol0: f64,
    vol1: f64,
    diam0: f64,
    diam1: f64,
    i0: f64,
    i1: f64,
) -> Result<ConstantsBundle> {
    check_positive("p", p)?;
    check_lambda(lambda)?;
    check_positive("i0", i0)?;
    check_positive("i1", i1)?;
    let shape = body_shape(n, vol0, vol1, diam0, diam1)?;
    let nf = f64::from(n);
    let gamma = gamma_n(n)?;
    let theta = theta_n_bound(n)?;

    let mean = p_mean(i0, i1, lambda, MeanOrder::Finite(p / (nf * p + 1.0)))?;
    let eta = 2.0 * (nf + 1.0 / mean);
    let base = groemer_base(gamma, &shape, lambda);
    let omega = base.powf(-(nf + 1.0));
    let beta = base.powf(-(p + 1.0) * (nf + 1.0) / p) * eta.powf(-(p + 1.0) / p);
    let lam_ratio = (lambda / (1.0 - lambda)).max((1.0 - lambda) / lambda);
    let delta = (shape.m_small * (1.0 - 2f64.powf(-1.0 / nf)).powi(3)
        / (181.0 * 181.0 * nf.powi(13) * lam_ratio * shape.m_big * (nf + 1.0 / mean)))
    .powf((p + 1.0) / p);
    let b_threshold = (1.0 / (2.0 * nf)).powf((p + 1.0) / p);
    let h0_max = (2.0 * nf).powf(-1.0 / (nf + 1.0)) * beta.powf(-p / ((nf + 1.0) * (p + 1.0)));
    let a_max = (2.0 * nf).powf(-0.5) * delta.powf(-p / (2.0 * (p + 1.0)));

    Ok(ConstantsBundle {
        beta,
        delta,
        eta,
        omega_groemer: omega,
        gamma_n: gamma,
        theta_n: theta,
        b_threshold,
        h0_max,
        a_max,
        provenance: Provenance {
            n,
            p,
            lambda,
            vol0,
            vol1,
            diam0,
            diam1,
            i0,
            i1,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrysohnConstants {
    /// Coefficient of H^(3(n+1)) in τ(Ω♯) ≥ τ(Ω)(1 + μH^(3(n+1))).
    pub mu: f64,
    /// Coefficient of A⁶ in τ(Ω♯) ≥ τ(Ω)(1 + νA⁶).
    pub nu: f64,
}

/// μ = τ²·(2^(2n+3)·γ_n^(n+1)·d^(n+1)·(nτ+1))^(−3) and
/// ν = (1−2^(−1/n))⁹·τ² / (181²·n³⁹·(nτ+1)³).
pub fn urysohn_constants(n: u32, tau: f64, diam: f64) -> Result<UrysohnConstants> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    check_positive("tau", tau)?;
    check_positive("diam", diam)?;
    let nf = f64::from(n);
    let gamma = gamma_n(n)?;
    let mu = tau * tau
        * (2f64.powf(2.0 * nf + 3.0) * gamma.powf(nf + 1.0) * diam.powf(nf + 1.0)
            * (nf * tau + 1.0))
        .powi(-3);
    let nu = (1.0 - 2f64.powf(-1.0 / nf)).powi(9) * tau * tau
        / (181.0 * 181.0 * nf.powi(39) * (nf * tau + 1.0).powi(3));
    Ok(UrysohnConstants { mu, nu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p_mean_five_cases() {
        assert_eq!(p_mean(2.0, 2.0, 0.3, MeanOrder::Finite(0.7)).unwrap(), 2.0);
        assert_relative_eq!(
            p_mean(1.0, 4.0, 0.5, MeanOrder::Finite(0.0)).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_eq!(p_mean(3.0, 0.0, 0.5, MeanOrder::Finite(2.0)).unwrap(), 0.0);
        assert_eq!(p_mean(1.0, 4.0, 0.5, MeanOrder::NegInf).unwrap(), 1.0);
        assert_eq!(p_mean(1.0, 4.0, 0.5, MeanOrder::PosInf).unwrap(), 4.0);
        // +∞ with one zero argument is literally max.
        assert_eq!(p_mean(0.0, 4.0, 0.5, MeanOrder::PosInf).unwrap(), 4.0);
    }

    #[test]
    fn p_mean_tiny_order_uses_geometric_formula() {
        let near = p_mean(1.0, 4.0, 0.25, MeanOrder::Finite(1e-13)).unwrap();
        let geo = p_mean(1.0, 4.0, 0.25, MeanOrder::Finite(0.0)).unwrap();
        assert_eq!(near, geo);
    }

    #[test]
    fn p_mean_rejects_bad_inputs() {
        assert!(p_mean(f64::NAN, 1.0, 0.5, MeanOrder::PosInf).is_err());
        assert!(p_mean(-1.0, 1.0, 0.5, MeanOrder::PosInf).is_err());
        assert!(p_mean(1.0, 1.0, 0.0, MeanOrder::PosInf).is_err());
        assert!(p_mean(1.0, 1.0, 1.0, MeanOrder::PosInf).is_err());
    }

    #[test]
    fn p_mean_extreme_orders_stay_bounded() {
        let max = p_mean(1e-6, 8.0, 0.5, MeanOrder::Finite(100.0)).unwrap();
        assert!(max <= 8.0 && max >= 8.0 * 0.99);
        let min = p_mean(1e-6, 8.0, 0.5, MeanOrder::Finite(-100.0)).unwrap();
        assert!(min >= 1e-6 && min <= 1.01e-6);
    }

    #[test]
    fn product_check_examples() {
        let r = mean_product_check(1.0, 1.0, 1.0, 1.0, 0.3, 0.7, 2.0).unwrap();
        assert!(r.holds && r.lhs == 1.0 && r.rhs == 1.0);

        let r = mean_product_check(1.0, 2.0, 3.0, 4.0, 0.5, 0.5, 1.0).unwrap();
        assert!(r.holds && r.lhs >= r.rhs);

        // p = q = 0: geometric means multiply exactly.
        let r = mean_product_check(1.0, 4.0, 1.0, 4.0, 0.5, 0.0, 0.0).unwrap();
        assert_relative_eq!(r.lhs, 4.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 4.0, max_relative = 1e-14);
        assert!(r.holds);

        assert!(mean_product_check(1.0, 2.0, 3.0, 4.0, 0.5, -2.0, 1.0).is_err());
    }

    #[test]
    fn gamma_n_values() {
        let g2 = gamma_n(2).unwrap();
        assert_relative_eq!(g2, 8.729344271249022, max_relative = 1e-13);
        assert!(g2 < 12.0005);
        assert!(gamma_n(3).unwrap() < 18.00075);
        assert!(gamma_n(1).is_err());
    }

    #[test]
    fn theta_n_values() {
        let t2 = theta_n_bound(2).unwrap();
        assert_relative_eq!(t2, 46336.0 / (2.0 - 2f64.sqrt()).powf(1.5), max_relative = 1e-15);
        assert_relative_eq!(t2, 103349.78355895477, max_relative = 1e-13);
        assert!(theta_n_bound(2).unwrap() < theta_n_bound(3).unwrap());
    }

    #[test]
    fn groemer_unit_squares() {
        let w = groemer_coefficient(2, 0.5, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt()).unwrap();
        assert_relative_eq!(w, 8.304818919327309e-6, max_relative = 1e-13);
    }

    #[test]
    fn groemer_symmetries() {
        let w = groemer_coefficient(2, 0.3, 2.0, 5.0, 2.1, 3.3).unwrap();
        // Swapping the bodies together with λ ↔ 1−λ leaves ω unchanged
        // (up to the rounding of 1−λ itself).
        let swapped = groemer_coefficient(2, 0.7, 5.0, 2.0, 3.3, 2.1).unwrap();
        assert_relative_eq!(w, swapped, max_relative = 1e-14);
        // Scaling both bodies by c leaves ω unchanged (d̃ and M/m are scale-free).
        let c: f64 = 1.7;
        let scaled =
            groemer_coefficient(2, 0.3, 2.0 * c * c, 5.0 * c * c, 2.1 * c, 3.3 * c).unwrap();
        assert_relative_eq!(w, scaled, max_relative = 1e-13);
    }

    #[test]
    fn bundle_unit_square_example() {
        let d = 2f64.sqrt();
        let cb = bbl_constants(2, 0.5, 0.5, 1.0, 1.0, d, d, 1.0, 1.0).unwrap();
        assert_eq!(cb.b_threshold, 0.015625);
        assert_eq!(cb.eta, 6.0);
        assert_relative_eq!(cb.beta, 2.6517754833179095e-18, max_relative = 1e-12);
        assert_relative_eq!(cb.delta, 3.0393366509301734e-32, max_relative = 1e-12);
        assert_relative_eq!(cb.omega_groemer, 8.304818919327309e-6, max_relative = 1e-13);
        assert_relative_eq!(cb.h0_max, 56.52670844809145, max_relative = 1e-12);
        assert_relative_eq!(cb.a_max, 89503.53803767814, max_relative = 1e-12);
    }

    #[test]
    fn bundle_recompute_is_bit_identical() {
        let cb = bbl_constants(2, 1.3, 0.37, 2.7, 0.9, 3.0, 1.4, 0.8, 2.2).unwrap();
        let again = cb.recompute();
        assert_eq!(cb, again);
    }

    #[test]
    fn urysohn_examples() {
        let c = urysohn_constants(2, 0.0703, 2f64.sqrt()).unwrap();
        assert_relative_eq!(c.mu, 2.3845754230415851e-19, max_relative = 1e-12);
        let c = urysohn_constants(2, std::f64::consts::FRAC_PI_4, 1.0).unwrap();
        assert_relative_eq!(c.nu, 3.1976698451522487e-23, max_relative = 1e-12);
    }

    #[test]
    fn urysohn_tau_doubling_identity() {
        let (n, tau, d) = (2.0f64, 0.21f64, 1.9f64);
        let a = urysohn_constants(2, tau, d).unwrap();
        let b = urysohn_constants(2, 2.0 * tau, d).unwrap();
        let factor = 4.0 * ((n * tau + 1.0) / (2.0 * n * tau + 1.0)).powi(3);
        assert_relative_eq!(b.mu / a.mu, factor, max_relative = 1e-12);
    }
}
