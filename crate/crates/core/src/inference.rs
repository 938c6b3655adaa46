//! User-facing inference: confidence intervals, individual and global
//! homogeneity tests, non-inferiority tests, and confidence-region
//! membership, in the nine method variants d, d(a), d(p), LR, LR(a), LR(p),
//! R, R(a), R(p).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PairedCounts;
use crate::numerics::{
    chisq_critical, chisq_sf, normal_quantile, normal_sf, quadratic_form, Matrix2,
};
use crate::variance::{
    difference_covariance, pooled_difference_covariance, pooled_ratio_covariance, ratio_covariance,
    DifferenceCovariance, RatioCovariance,
};

/// Parameter family an inference method works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `d = P_A - P_B` (and `dbar` on the negative side).
    Difference,
    /// `ln R` with `R = P_A / P_B`.
    LogRatio,
    /// `R` itself.
    DirectRatio,
}

/// Variance-estimation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Unrestricted Wald plug-in.
    Classic,
    /// Everything recomputed after adding 0.5 to every cell.
    Adjusted,
    /// Variances estimated under the null of homogeneity.
    Pooled,
}

/// One of the nine named inference methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MethodId {
    pub family: Family,
    pub variant: Variant,
}

impl MethodId {
    pub const fn new(family: Family, variant: Variant) -> Self {
        MethodId { family, variant }
    }

    /// All nine methods in the conventional order.
    pub const ALL: [MethodId; 9] = [
        MethodId::new(Family::Difference, Variant::Classic),
        MethodId::new(Family::Difference, Variant::Adjusted),
        MethodId::new(Family::Difference, Variant::Pooled),
        MethodId::new(Family::LogRatio, Variant::Classic),
        MethodId::new(Family::LogRatio, Variant::Adjusted),
        MethodId::new(Family::LogRatio, Variant::Pooled),
        MethodId::new(Family::DirectRatio, Variant::Classic),
        MethodId::new(Family::DirectRatio, Variant::Adjusted),
        MethodId::new(Family::DirectRatio, Variant::Pooled),
    ];

    /// The six methods that define confidence intervals (pooled variants do
    /// not invert to a CI).
    pub const CI_METHODS: [MethodId; 6] = [
        MethodId::new(Family::Difference, Variant::Classic),
        MethodId::new(Family::Difference, Variant::Adjusted),
        MethodId::new(Family::LogRatio, Variant::Classic),
        MethodId::new(Family::LogRatio, Variant::Adjusted),
        MethodId::new(Family::DirectRatio, Variant::Classic),
        MethodId::new(Family::DirectRatio, Variant::Adjusted),
    ];

    /// Canonical display name: `d`, `d(a)`, `d(p)`, `LR`, ..., `R(p)`.
    pub fn name(&self) -> &'static str {
        match (self.family, self.variant) {
            (Family::Difference, Variant::Classic) => "d",
            (Family::Difference, Variant::Adjusted) => "d(a)",
            (Family::Difference, Variant::Pooled) => "d(p)",
            (Family::LogRatio, Variant::Classic) => "LR",
            (Family::LogRatio, Variant::Adjusted) => "LR(a)",
            (Family::LogRatio, Variant::Pooled) => "LR(p)",
            (Family::DirectRatio, Variant::Classic) => "R",
            (Family::DirectRatio, Variant::Adjusted) => "R(a)",
            (Family::DirectRatio, Variant::Pooled) => "R(p)",
        }
    }
}

impl std::fmt::Display for MethodId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        let m = match norm.as_str() {
            "d" => MethodId::new(Family::Difference, Variant::Classic),
            "da" => MethodId::new(Family::Difference, Variant::Adjusted),
            "dp" => MethodId::new(Family::Difference, Variant::Pooled),
            "lr" => MethodId::new(Family::LogRatio, Variant::Classic),
            "lra" => MethodId::new(Family::LogRatio, Variant::Adjusted),
            "lrp" => MethodId::new(Family::LogRatio, Variant::Pooled),
            "r" => MethodId::new(Family::DirectRatio, Variant::Classic),
            "ra" => MethodId::new(Family::DirectRatio, Variant::Adjusted),
            "rp" => MethodId::new(Family::DirectRatio, Variant::Pooled),
            _ => {
                return Err(Error::Domain(format!(
                    "unknown method {s:?}; expected one of d, d(a), d(p), LR, LR(a), LR(p), R, R(a), R(p)"
                )))
            }
        };
        Ok(m)
    }
}

impl Serialize for MethodId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for MethodId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which predictive-value pair an individual inference targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `P_A` vs `P_B`.
    Positive,
    /// `N_A` vs `N_B`.
    Negative,
}

/// What a test statistic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestTarget {
    Positive,
    Negative,
    Global,
}

impl From<Target> for TestTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::Positive => TestTarget::Positive,
            Target::Negative => TestTarget::Negative,
        }
    }
}

/// Scale a confidence interval lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Difference,
    Ratio,
}

/// A two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub scale: Scale,
}

impl Interval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A chi-square-referenced test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub method: MethodId,
    pub target: TestTarget,
}

/// A one-sided non-inferiority outcome: the signed root statistic plus the
/// squared form and decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoninferiorityResult {
    /// Signed root, e.g. `(d_hat - delta) / sigma_d`.
    pub z: f64,
    /// The squared statistic with its two-sided reference p-value.
    pub test: TestResult,
    /// One-sided p-value `1 - Phi(z)`.
    pub p_one_sided: f64,
    /// One-sided critical value: the `(1 - alpha)`-quantile of the
    /// standard normal.
    pub critical: f64,
    /// True when `z > critical`: the data support superiority over the margin.
    pub reject: bool,
}

/// CI variants: only classic and adjusted inference methods invert to
/// confidence intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiVariant {
    Classic,
    Adjusted,
}

/// Ratio-scale CI construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioForm {
    /// Symmetric on the log scale: `R_hat * exp(+- z sigma_R)`.
    Log,
    /// Solved on the ratio scale itself via `Y = 1 + z^2 sigma_R^2 / 2`.
    Direct,
}

fn select_difference(
    cov: &DifferenceCovariance,
    est: &crate::model::PredictiveEstimates,
    target: Target,
) -> (f64, f64) {
    match target {
        Target::Positive => (est.d(), cov.var_d),
        Target::Negative => (est.d_bar(), cov.var_d_bar),
    }
}

fn select_ratio(
    cov: &RatioCovariance,
    est: &crate::model::PredictiveEstimates,
    target: Target,
) -> Result<(f64, f64)> {
    match target {
        Target::Positive => Ok((est.r()?, cov.var_log_r)),
        Target::Negative => Ok((est.r_bar()?, cov.var_log_r_bar)),
    }
}

/// Wald confidence interval `d_hat +- z_alpha sigma_d` for the difference of
/// predictive values (classic or adjusted counts).
pub fn ci_difference(
    counts: &PairedCounts,
    variant: CiVariant,
    alpha: f64,
    target: Target,
) -> Result<Interval> {
    let working = match variant {
        CiVariant::Classic => *counts,
        CiVariant::Adjusted => counts.adjust_half(),
    };
    let est = working.estimates()?;
    let cov = difference_covariance(&working)?;
    let (point, var) = select_difference(&cov, &est, target);
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let half = z * var.max(0.0).sqrt();
    Ok(Interval {
        lower: point - half,
        upper: point + half,
        scale: Scale::Difference,
    })
}

/// Confidence interval for the ratio of predictive values, either the
/// log-scale form or the direct-ratio form (classic or adjusted counts).
pub fn ci_ratio(
    counts: &PairedCounts,
    form: RatioForm,
    variant: CiVariant,
    alpha: f64,
    target: Target,
) -> Result<Interval> {
    let working = match variant {
        CiVariant::Classic => *counts,
        CiVariant::Adjusted => counts.adjust_half(),
    };
    let est = working.estimates()?;
    est.require_ratio_scale()?;
    let cov = ratio_covariance(&working)?;
    let (r, var) = select_ratio(&cov, &est, target)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let (lower, upper) = match form {
        RatioForm::Log => {
            let half = z * var.max(0.0).sqrt();
            (r * (-half).exp(), r * half.exp())
        }
        RatioForm::Direct => {
            let y = 1.0 + z * z * var.max(0.0) / 2.0;
            let root = (y * y - 1.0).max(0.0).sqrt();
            (r * (y - root), r * (y + root))
        }
    };
    Ok(Interval {
        lower,
        upper,
        scale: Scale::Ratio,
    })
}

/// Confidence interval for the method's parameter; errors for pooled
/// variants, which do not define one.
pub fn ci_for_method(
    counts: &PairedCounts,
    method: MethodId,
    alpha: f64,
    target: Target,
) -> Result<Interval> {
    let variant = match method.variant {
        Variant::Classic => CiVariant::Classic,
        Variant::Adjusted => CiVariant::Adjusted,
        Variant::Pooled => {
            return Err(Error::Domain(format!(
                "method {method} does not define a confidence interval"
            )))
        }
    };
    match method.family {
        Family::Difference => ci_difference(counts, variant, alpha, target),
        Family::LogRatio => ci_ratio(counts, RatioForm::Log, variant, alpha, target),
        Family::DirectRatio => ci_ratio(counts, RatioForm::Direct, variant, alpha, target),
    }
}

fn difference_variance_for(
    counts: &PairedCounts,
    variant: Variant,
    target: Target,
) -> Result<(f64, f64)> {
    // returns (point estimate, variance); adjusted recomputes both from the
    // adjusted table, pooled keeps the unpooled point estimate
    let working = match variant {
        Variant::Adjusted => counts.adjust_half(),
        _ => *counts,
    };
    let est = working.estimates()?;
    let cov = match variant {
        Variant::Pooled => pooled_difference_covariance(&working)?,
        _ => difference_covariance(&working)?,
    };
    Ok(select_difference(&cov, &est, target))
}

fn ratio_variance_for(
    counts: &PairedCounts,
    variant: Variant,
    target: Target,
) -> Result<(f64, f64)> {
    let working = match variant {
        Variant::Adjusted => counts.adjust_half(),
        _ => *counts,
    };
    let est = working.estimates()?;
    est.require_ratio_scale()?;
    let cov = match variant {
        Variant::Pooled => pooled_ratio_covariance(&working)?,
        _ => ratio_covariance(&working)?,
    };
    select_ratio(&cov, &est, target)
}

/// Individual homogeneity test of `P_A = P_B` (or `N_A = N_B`), df = 1.
pub fn individual_test(
    counts: &PairedCounts,
    method: MethodId,
    target: Target,
) -> Result<TestResult> {
    let statistic = match method.family {
        Family::Difference => {
            let (d, var) = difference_variance_for(counts, method.variant, target)?;
            if var <= 0.0 {
                return Err(Error::ZeroVariance("the difference statistic"));
            }
            d * d / var
        }
        Family::LogRatio => {
            let (r, var) = ratio_variance_for(counts, method.variant, target)?;
            if var <= 0.0 {
                return Err(Error::ZeroVariance("the log-ratio statistic"));
            }
            let lr = r.ln();
            lr * lr / var
        }
        Family::DirectRatio => {
            let (r, var) = ratio_variance_for(counts, method.variant, target)?;
            if var <= 0.0 || r <= 0.0 {
                return Err(Error::ZeroVariance("the ratio statistic"));
            }
            (r - 1.0) * (r - 1.0) / (r * var)
        }
    };
    Ok(TestResult {
        statistic,
        df: 1,
        p_value: chisq_sf(statistic, 1)?,
        method,
        target: target.into(),
    })
}

/// One-sided non-inferiority test: `H: d = delta` vs `K: d > delta` for the
/// difference family (margin `delta <= 0`), or `H: R = rho` vs `K: R > rho`
/// for the ratio families (margin `0 < rho <= 1`). Rejects when the signed
/// root exceeds `normal_quantile(1 - alpha)`.
pub fn noninferiority_test(
    counts: &PairedCounts,
    family: Family,
    variant: Variant,
    margin: f64,
    alpha: f64,
    target: Target,
) -> Result<NoninferiorityResult> {
    let z = match family {
        Family::Difference => {
            if !(-1.0 < margin && margin <= 0.0) {
                return Err(Error::InvalidMargin(format!(
                    "difference margin must satisfy -1 < delta <= 0, got {margin}"
                )));
            }
            let (d, var) = difference_variance_for(counts, variant, target)?;
            if var <= 0.0 {
                return Err(Error::ZeroVariance("the difference statistic"));
            }
            (d - margin) / var.sqrt()
        }
        Family::LogRatio => {
            if !(0.0 < margin && margin <= 1.0) {
                return Err(Error::InvalidMargin(format!(
                    "ratio margin must satisfy 0 < rho <= 1, got {margin}"
                )));
            }
            let (r, var) = ratio_variance_for(counts, variant, target)?;
            if var <= 0.0 {
                return Err(Error::ZeroVariance("the log-ratio statistic"));
            }
            (r.ln() - margin.ln()) / var.sqrt()
        }
        Family::DirectRatio => {
            if !(0.0 < margin && margin <= 1.0) {
                return Err(Error::InvalidMargin(format!(
                    "ratio margin must satisfy 0 < rho <= 1, got {margin}"
                )));
            }
            let (r, var) = ratio_variance_for(counts, variant, target)?;
            if var <= 0.0 || r <= 0.0 {
                return Err(Error::ZeroVariance("the ratio statistic"));
            }
            (r - margin) / (margin * r * var).sqrt()
        }
    };
    let critical = normal_quantile(1.0 - alpha)?;
    let statistic = z * z;
    Ok(NoninferiorityResult {
        z,
        test: TestResult {
            statistic,
            df: 1,
            p_value: chisq_sf(statistic, 1)?,
            method: MethodId::new(family, variant),
            target: target.into(),
        },
        p_one_sided: normal_sf(z),
        critical,
        reject: z > critical,
    })
}

fn global_vector_and_matrix(
    counts: &PairedCounts,
    method: MethodId,
) -> Result<((f64, f64), Matrix2)> {
    let working = match method.variant {
        Variant::Adjusted => counts.adjust_half(),
        _ => *counts,
    };
    let est = working.estimates()?;
    match method.family {
        Family::Difference => {
            let cov = match method.variant {
                Variant::Pooled => pooled_difference_covariance(&working)?,
                _ => difference_covariance(&working)?,
            };
            Ok(((est.d(), est.d_bar()), cov.matrix()))
        }
        Family::LogRatio => {
            est.require_ratio_scale()?;
            let cov = match method.variant {
                Variant::Pooled => pooled_ratio_covariance(&working)?,
                _ => ratio_covariance(&working)?,
            };
            Ok(((est.r()?.ln(), est.r_bar()?.ln()), cov.matrix()))
        }
        Family::DirectRatio => {
            est.require_ratio_scale()?;
            let cov = match method.variant {
                Variant::Pooled => pooled_ratio_covariance(&working)?,
                _ => ratio_covariance(&working)?,
            };
            let r = est.r()?;
            let rb = est.r_bar()?;
            Ok((((r - 1.0) / r.sqrt(), (rb - 1.0) / rb.sqrt()), cov.matrix()))
        }
    }
}

/// Global homogeneity test of `P_A = P_B` and `N_A = N_B` jointly, df = 2.
pub fn global_test(counts: &PairedCounts, method: MethodId) -> Result<TestResult> {
    let (v, m) = global_vector_and_matrix(counts, method)?;
    // pooled variances can degenerate on tables far from the null
    if m.a11 <= 0.0 || m.a22 <= 0.0 {
        return Err(Error::ZeroVariance("the global statistic"));
    }
    // positive-definite by the guards above; rounding dust only
    let statistic = quadratic_form(v, &m)?.max(0.0);
    Ok(TestResult {
        statistic,
        df: 2,
        p_value: chisq_sf(statistic, 2)?,
        method,
        target: TestTarget::Global,
    })
}

/// Membership of `point` in the joint confidence region at level `1 - alpha`
/// (classic covariance of the given family).
pub fn confidence_region_contains(
    counts: &PairedCounts,
    family: Family,
    point: (f64, f64),
    alpha: f64,
) -> Result<bool> {
    let est = counts.estimates()?;
    let (v, m) = match family {
        Family::Difference => {
            let cov = difference_covariance(counts)?;
            ((est.d() - point.0, est.d_bar() - point.1), cov.matrix())
        }
        Family::LogRatio => {
            est.require_ratio_scale()?;
            if point.0 <= 0.0 || point.1 <= 0.0 {
                return Err(Error::Domain(
                    "ratio-family region points must be positive".into(),
                ));
            }
            let cov = ratio_covariance(counts)?;
            (
                ((est.r()? / point.0).ln(), (est.r_bar()? / point.1).ln()),
                cov.matrix(),
            )
        }
        Family::DirectRatio => {
            est.require_ratio_scale()?;
            if point.0 <= 0.0 || point.1 <= 0.0 {
                return Err(Error::Domain(
                    "ratio-family region points must be positive".into(),
                ));
            }
            let cov = ratio_covariance(counts)?;
            let r = est.r()?;
            let rb = est.r_bar()?;
            (
                (
                    (r - point.0) / (r * point.0).sqrt(),
                    (rb - point.1) / (rb * point.1).sqrt(),
                ),
                cov.matrix(),
            )
        }
    };
    let q = quadratic_form(v, &m)?;
    Ok(q <= chisq_critical(alpha, 2)?)
}
