//! Delta-method variance and covariance estimators for the difference and
//! ratio parameter pairs, their pooled-under-the-null variants, and a
//! finite-difference oracle for the generic multinomial delta formula.

use crate::error::{Error, Result};
use crate::model::{CellProbabilities, PairedCounts};
use crate::numerics::Matrix2;

/// Covariance matrix entries of `(d_hat, dbar_hat)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceCovariance {
    pub var_d: f64,
    pub var_d_bar: f64,
    pub cov: f64,
}

impl DifferenceCovariance {
    pub fn matrix(&self) -> Matrix2 {
        Matrix2::symmetric(self.var_d, self.cov, self.var_d_bar)
    }
}

/// Covariance matrix entries of `(ln R_hat, ln Rbar_hat)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCovariance {
    pub var_log_r: f64,
    pub var_log_r_bar: f64,
    pub cov: f64,
}

impl RatioCovariance {
    pub fn matrix(&self) -> Matrix2 {
        Matrix2::symmetric(self.var_log_r, self.cov, self.var_log_r_bar)
    }
}

/// Predictive values pooled under the homogeneity hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledEstimates {
    /// Weighted positive predictive value under `P_A = P_B`.
    pub ppv: f64,
    /// Weighted negative predictive value under `N_A = N_B`.
    pub npv: f64,
}

/// Unrestricted (Wald) covariance of the difference pair.
pub fn difference_covariance(counts: &PairedCounts) -> Result<DifferenceCovariance> {
    let e = counts.estimates()?;
    let (pa, pb, na, nb) = (e.ppv_a, e.ppv_b, e.npv_a, e.npv_b);
    let (m_a, m_b) = (counts.n_a(), counts.n_b());
    let (mb_a, mb_b) = (counts.n_bar_a(), counts.n_bar_b());
    let var_d = pa * (1.0 - pa) / m_a + pb * (1.0 - pb) / m_b
        - 2.0 * ((1.0 - pa) * (1.0 - pb) * counts.x(1) + pa * pb * counts.x(5)) / (m_a * m_b);
    let var_d_bar = na * (1.0 - na) / mb_a + nb * (1.0 - nb) / mb_b
        - 2.0 * ((1.0 - na) * (1.0 - nb) * counts.x(8) + na * nb * counts.x(4)) / (mb_a * mb_b);
    let cov = ((1.0 - pa) * nb * counts.x(2) + pa * (1.0 - nb) * counts.x(6)) / (m_a * mb_b)
        + ((1.0 - pb) * na * counts.x(3) + pb * (1.0 - na) * counts.x(7)) / (mb_a * m_b);
    Ok(DifferenceCovariance {
        var_d,
        var_d_bar,
        cov,
    })
}

/// Unrestricted (Wald) covariance of the log-ratio pair. Requires all four
/// predictive values to be strictly positive.
pub fn ratio_covariance(counts: &PairedCounts) -> Result<RatioCovariance> {
    let e = counts.estimates()?;
    e.require_ratio_scale()?;
    let (pa, pb, na, nb) = (e.ppv_a, e.ppv_b, e.npv_a, e.npv_b);
    let (m_a, m_b) = (counts.n_a(), counts.n_b());
    let (mb_a, mb_b) = (counts.n_bar_a(), counts.n_bar_b());
    let var_log_r = (1.0 - pa) / (m_a * pa) + (1.0 - pb) / (m_b * pb)
        - 2.0 / (m_a * m_b) * ((1.0 - pa) * (1.0 - pb) / (pa * pb) * counts.x(1) + counts.x(5));
    let var_log_r_bar = (1.0 - na) / (mb_a * na) + (1.0 - nb) / (mb_b * nb)
        - 2.0 / (mb_a * mb_b) * ((1.0 - na) * (1.0 - nb) / (na * nb) * counts.x(8) + counts.x(4));
    let cov = ((1.0 - pa) / pa * counts.x(2) + (1.0 - nb) / nb * counts.x(6)) / (m_a * mb_b)
        + ((1.0 - pb) / pb * counts.x(3) + (1.0 - na) / na * counts.x(7)) / (mb_a * m_b);
    Ok(RatioCovariance {
        var_log_r,
        var_log_r_bar,
        cov,
    })
}

/// Weighted predictive-value estimators under the null of homogeneity.
pub fn pooled_estimates(counts: &PairedCounts) -> Result<PooledEstimates> {
    let e = counts.estimates()?;
    let (m_a, m_b) = (counts.n_a(), counts.n_b());
    let (mb_a, mb_b) = (counts.n_bar_a(), counts.n_bar_b());
    Ok(PooledEstimates {
        ppv: (m_a * e.ppv_a + m_b * e.ppv_b) / (m_a + m_b),
        npv: (mb_a * e.npv_a + mb_b * e.npv_b) / (mb_a + mb_b),
    })
}

/// Difference-pair covariance with the predictive values pooled: `P` replaces
/// both `P_A` and `P_B` (and `N` both `N_A`, `N_B`) inside the unrestricted
/// formulas, counts untouched.
pub fn pooled_difference_covariance(counts: &PairedCounts) -> Result<DifferenceCovariance> {
    let pooled = pooled_estimates(counts)?;
    let (p, np) = (pooled.ppv, pooled.npv);
    let (m_a, m_b) = (counts.n_a(), counts.n_b());
    let (mb_a, mb_b) = (counts.n_bar_a(), counts.n_bar_b());
    let var_d = p * (1.0 - p) * (1.0 / m_a + 1.0 / m_b)
        - 2.0 * ((1.0 - p) * (1.0 - p) * counts.x(1) + p * p * counts.x(5)) / (m_a * m_b);
    let var_d_bar = np * (1.0 - np) * (1.0 / mb_a + 1.0 / mb_b)
        - 2.0 * ((1.0 - np) * (1.0 - np) * counts.x(8) + np * np * counts.x(4)) / (mb_a * mb_b);
    let cov = ((1.0 - p) * np * counts.x(2) + p * (1.0 - np) * counts.x(6)) / (m_a * mb_b)
        + ((1.0 - p) * np * counts.x(3) + p * (1.0 - np) * counts.x(7)) / (mb_a * m_b);
    Ok(DifferenceCovariance {
        var_d,
        var_d_bar,
        cov,
    })
}

/// Log-ratio covariance with pooled predictive values, same substitution rule.
pub fn pooled_ratio_covariance(counts: &PairedCounts) -> Result<RatioCovariance> {
    counts.estimates()?.require_ratio_scale()?;
    let pooled = pooled_estimates(counts)?;
    let (p, np) = (pooled.ppv, pooled.npv);
    if p <= 0.0 || np <= 0.0 {
        return Err(Error::ZeroVariance("pooled ratio scale"));
    }
    let (m_a, m_b) = (counts.n_a(), counts.n_b());
    let (mb_a, mb_b) = (counts.n_bar_a(), counts.n_bar_b());
    let q = (1.0 - p) / p;
    let nq = (1.0 - np) / np;
    let var_log_r =
        q * (1.0 / m_a + 1.0 / m_b) - 2.0 / (m_a * m_b) * (q * q * counts.x(1) + counts.x(5));
    let var_log_r_bar = nq * (1.0 / mb_a + 1.0 / mb_b)
        - 2.0 / (mb_a * mb_b) * (nq * nq * counts.x(8) + counts.x(4));
    let cov = (q * counts.x(2) + nq * counts.x(6)) / (m_a * mb_b)
        + (q * counts.x(3) + nq * counts.x(7)) / (mb_a * m_b);
    Ok(RatioCovariance {
        var_log_r,
        var_log_r_bar,
        cov,
    })
}

/// Finite-difference step for the oracle's partial derivatives.
const ORACLE_STEP: f64 = 1e-6;

/// Generic delta-method oracle: for smooth functions `f`, `g` of the eight
/// cell probabilities, estimates `(V(f), V(g), Cov(f, g))` from
/// `n V(f) = sum f_i^2 p_i - (sum f_i p_i)^2` with numerically estimated
/// partials (central differences, coordinate-wise, no simplex projection).
///
/// This is the brute-force reference every closed form above is checked
/// against; it must stay independent of those implementations.
pub fn delta_oracle<F, G>(f: F, g: G, cells: &CellProbabilities, n: f64) -> (f64, f64, f64)
where
    F: Fn(&[f64; 8]) -> f64,
    G: Fn(&[f64; 8]) -> f64,
{
    let p = cells.probabilities();
    let mut fi = [0.0; 8];
    let mut gi = [0.0; 8];
    for i in 0..8 {
        let mut hi = p;
        let mut lo = p;
        hi[i] += ORACLE_STEP;
        lo[i] -= ORACLE_STEP;
        fi[i] = (f(&hi) - f(&lo)) / (2.0 * ORACLE_STEP);
        gi[i] = (g(&hi) - g(&lo)) / (2.0 * ORACLE_STEP);
    }
    let mut sum_f2p = 0.0;
    let mut sum_fp = 0.0;
    let mut sum_g2p = 0.0;
    let mut sum_gp = 0.0;
    let mut sum_fgp = 0.0;
    for i in 0..8 {
        sum_f2p += fi[i] * fi[i] * p[i];
        sum_fp += fi[i] * p[i];
        sum_g2p += gi[i] * gi[i] * p[i];
        sum_gp += gi[i] * p[i];
        sum_fgp += fi[i] * gi[i] * p[i];
    }
    (
        (sum_f2p - sum_fp * sum_fp) / n,
        (sum_g2p - sum_gp * sum_gp) / n,
        (sum_fgp - sum_fp * sum_gp) / n,
    )
}

/// `d` as a function of raw cell probabilities, for oracle use.
pub fn d_of_probs(p: &[f64; 8]) -> f64 {
    let t_a = p[0] + p[1] + p[4] + p[5];
    let t_b = p[0] + p[2] + p[4] + p[6];
    (p[0] + p[1]) / t_a - (p[0] + p[2]) / t_b
}

/// `dbar` as a function of raw cell probabilities.
pub fn d_bar_of_probs(p: &[f64; 8]) -> f64 {
    let tb_a = p[2] + p[3] + p[6] + p[7];
    let tb_b = p[1] + p[3] + p[5] + p[7];
    (p[6] + p[7]) / tb_a - (p[5] + p[7]) / tb_b
}

/// `ln R` as a function of raw cell probabilities.
pub fn log_r_of_probs(p: &[f64; 8]) -> f64 {
    let t_a = p[0] + p[1] + p[4] + p[5];
    let t_b = p[0] + p[2] + p[4] + p[6];
    ((p[0] + p[1]) / t_a).ln() - ((p[0] + p[2]) / t_b).ln()
}

/// `ln Rbar` as a function of raw cell probabilities.
pub fn log_r_bar_of_probs(p: &[f64; 8]) -> f64 {
    let tb_a = p[2] + p[3] + p[6] + p[7];
    let tb_b = p[1] + p[3] + p[5] + p[7];
    ((p[6] + p[7]) / tb_a).ln() - ((p[5] + p[7]) / tb_b).ln()
}
