//! The Bennett statistic family: the corrected Bennett statistic, its
//! unrestricted variant, Wu's prevalence-corrected variant, and the
//! cross-check that estimating everything under the null recovers the pooled
//! difference statistic.
//!
//! Every statistic is computed in two algebraically equivalent forms — the
//! count form and the predictive-value form — and the two are asserted to
//! agree; the count form is the one returned.

use crate::error::{Error, Result};
use crate::inference::Target;
use crate::model::PairedCounts;
use crate::variance::{difference_covariance, pooled_difference_covariance, pooled_estimates};

/// Building blocks of the Bennett statistics for one target side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BennettComponents {
    /// `a = (x1+x2)(x5+x7) - (x1+x3)(x5+x6) = n_A n_B (P_A - P_B)`.
    pub a: f64,
    /// `b0 = x1(x6-x7)^2 + x2(x5+x7)^2 + x3(x5+x6)^2`.
    pub b0: f64,
    /// `b1 = x7(x1+x2)^2 + x6(x1+x3)^2 + x5(x2-x3)^2`.
    pub b1: f64,
    /// Plug-in estimate of `M = sum f_i p_i = 2 t_A t_B (P_A - P_B)`.
    pub m: f64,
    /// Plug-in estimate of `F = sum f_i^2 p_i`.
    pub f: f64,
    /// Prevalence estimate `(x1+x2+x3+x4)/n`.
    pub pi_hat: f64,
}

/// The three Bennett-family statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BennettStatistics {
    /// Corrected Bennett statistic `a^2 / (b0 + b1)`.
    pub z_b: f64,
    /// Unrestricted variant `a^2 / (b0 + b1 - 4 a^2 / n)`.
    pub z_b_prime: f64,
    /// Wu's variant, with 4 replaced by `1/pi + 1/(1-pi) - 1`.
    pub z_w: f64,
}

fn oriented(counts: &PairedCounts, target: Target) -> PairedCounts {
    match target {
        Target::Positive => *counts,
        Target::Negative => counts.diagnosis_symmetry(),
    }
}

/// Computes `a`, `b0`, `b1` and the plug-in `M`, `F` for the requested side.
pub fn bennett_components(counts: &PairedCounts, target: Target) -> Result<BennettComponents> {
    let c = oriented(counts, target);
    c.validate()?;
    let n = c.n();
    let (x1, x2, x3, x5, x6, x7) = (c.x(1), c.x(2), c.x(3), c.x(5), c.x(6), c.x(7));
    let a = (x1 + x2) * (x5 + x7) - (x1 + x3) * (x5 + x6);
    let b0 = x1 * (x6 - x7) * (x6 - x7) + x2 * (x5 + x7) * (x5 + x7) + x3 * (x5 + x6) * (x5 + x6);
    let b1 = x7 * (x1 + x2) * (x1 + x2) + x6 * (x1 + x3) * (x1 + x3) + x5 * (x2 - x3) * (x2 - x3);
    // plug-in scale: a is O(x^2), b are O(x^3)
    let m = 2.0 * a / (n * n);
    let f = (b0 + b1) / (n * n * n);
    let pi_hat = (c.x(1) + c.x(2) + c.x(3) + c.x(4)) / n;
    Ok(BennettComponents {
        a,
        b0,
        b1,
        m,
        f,
        pi_hat,
    })
}

const FORM_AGREEMENT_TOL: f64 = 1e-10;

fn check_forms(label: &'static str, count_form: f64, pv_form: f64) -> Result<f64> {
    let scale = count_form.abs().max(pv_form.abs()).max(1e-300);
    if ((count_form - pv_form) / scale).abs() > FORM_AGREEMENT_TOL {
        return Err(Error::Domain(format!(
            "{label}: count form {count_form} and predictive-value form {pv_form} disagree"
        )));
    }
    Ok(count_form)
}

/// The three Bennett-family statistics for the requested side, with the
/// count form cross-checked against the predictive-value form.
pub fn bennett_statistics(counts: &PairedCounts, target: Target) -> Result<BennettStatistics> {
    let c = oriented(counts, target);
    let comp = bennett_components(counts, target)?;
    let n = c.n();
    let a2 = comp.a * comp.a;
    let denom_b = comp.b0 + comp.b1;
    if denom_b <= 0.0 {
        return Err(Error::ZeroVariance("the Bennett statistic"));
    }
    let z_b = a2 / denom_b;

    let denom_bp = denom_b - 4.0 * a2 / n;
    if denom_bp <= 0.0 {
        return Err(Error::ZeroVariance("the unrestricted Bennett statistic"));
    }
    let z_b_prime = a2 / denom_bp;

    if comp.pi_hat <= 0.0 || comp.pi_hat >= 1.0 {
        return Err(Error::ZeroVariance(
            "the Wu statistic (degenerate prevalence)",
        ));
    }
    let cap_pi = 1.0 / comp.pi_hat + 1.0 / (1.0 - comp.pi_hat) - 1.0;
    let denom_w = denom_b - cap_pi * a2 / n;
    if denom_w <= 0.0 {
        return Err(Error::ZeroVariance("the Wu statistic"));
    }
    let z_w = a2 / denom_w;

    // predictive-value forms
    let est = c.estimates()?;
    let d = est.ppv_a - est.ppv_b;
    let var_d = difference_covariance(&c)?.var_d;
    let inv_sizes = 1.0 / c.n_a() + 1.0 / c.n_b();
    let z_b_alt = d * d / (var_d + d * d * inv_sizes);
    let z_bp_alt = d * d / (var_d + d * d * (inv_sizes - 4.0 / n));

    Ok(BennettStatistics {
        z_b: check_forms("z_B^2", z_b, z_b_alt)?,
        z_b_prime: check_forms("z_B'^2", z_b_prime, z_bp_alt)?,
        z_w,
    })
}

const KOSINSKI_TOL: f64 = 1e-9;

/// Verifies that the Bennett-family statistic with both `F` and `M`
/// estimated under `P_A = P_B = P` equals the pooled difference statistic
/// `z_{d(p)}^2` within 1e-9 relative.
pub fn kosinski_equivalence_check(counts: &PairedCounts, target: Target) -> Result<bool> {
    let c = oriented(counts, target);
    c.validate()?;
    let n = c.n();
    let est = c.estimates()?;
    let pooled = pooled_estimates(&c)?.ppv;
    let t_a = c.n_a() / n;
    let t_b = c.n_b() / n;
    let p1 = c.x(1) / n;
    let p5 = c.x(5) / n;
    // F under the null (the squared-difference term vanishes); M = 0
    let f_null = t_a
        * t_b
        * (t_a * pooled * (1.0 - pooled) + t_b * pooled * (1.0 - pooled)
            - 2.0 * (p1 * (1.0 - pooled) * (1.0 - pooled) + p5 * pooled * pooled));
    if f_null <= 0.0 {
        return Err(Error::ZeroVariance("the null-estimated Bennett variance"));
    }
    let f_hat = t_a * t_b * (est.ppv_a - est.ppv_b);
    let bennett_style = f_hat * f_hat / (f_null / n);

    let pd = pooled_difference_covariance(&c)?;
    if pd.var_d <= 0.0 {
        return Err(Error::ZeroVariance("the pooled difference statistic"));
    }
    let d = est.ppv_a - est.ppv_b;
    let z_dp = d * d / pd.var_d;

    if z_dp == 0.0 {
        return Ok(bennett_style == 0.0);
    }
    Ok(((bennett_style - z_dp) / z_dp).abs() <= KOSINSKI_TOL)
}
