//! Study planning: building multinomial cell probabilities from a simulation
//! scenario, and sample sizes for the one-sided non-inferiority tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CellProbabilities;
use crate::numerics::normal_quantile;

/// A simulation scenario: the four predictive values, the prevalence, and
/// the within-stratum odds ratios between the two tests' diagnoses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Positive predictive value of test A.
    pub p_a: f64,
    /// Positive predictive value of test B.
    pub p_b: f64,
    /// Negative predictive value of test A.
    pub n_a: f64,
    /// Negative predictive value of test B.
    pub n_b: f64,
    /// Disease prevalence.
    pub pi: f64,
    /// Odds ratio between the diagnoses among the diseased.
    pub o_plus: f64,
    /// Odds ratio between the diagnoses among the non-diseased.
    pub o_minus: f64,
}

impl Scenario {
    pub fn new(p_a: f64, p_b: f64, n_a: f64, n_b: f64, pi: f64, o_plus: f64, o_minus: f64) -> Self {
        Scenario {
            p_a,
            p_b,
            n_a,
            n_b,
            pi,
            o_plus,
            o_minus,
        }
    }

    /// The scenario whose cell vector is the diagnosis-symmetric image of
    /// this one's: predictive values swapped, prevalence complemented, odds
    /// ratios exchanged.
    pub fn diagnosis_symmetry(&self) -> Self {
        Scenario {
            p_a: self.n_a,
            p_b: self.n_b,
            n_a: self.p_a,
            n_b: self.p_b,
            pi: 1.0 - self.pi,
            o_plus: self.o_minus,
            o_minus: self.o_plus,
        }
    }
}

const ODDS_ONE_TOL: f64 = 1e-9;
const ROOT_TOL: f64 = 1e-12;

/// Joint (+,+) cell probability of a 2x2 table with marginals `a`, `b` and
/// odds ratio `o`: the root of `o = c11 c22 / (c12 c21)` lying in
/// `[max(0, a+b-1), min(a, b)]`.
fn joint_cell(a: f64, b: f64, o: f64, stratum: &str) -> Result<f64> {
    let c11 = if (o - 1.0).abs() < ODDS_ONE_TOL {
        a * b
    } else {
        let s = 1.0 + (a + b) * (o - 1.0);
        let disc = s * s - 4.0 * o * (o - 1.0) * a * b;
        if disc < 0.0 {
            return Err(Error::InfeasibleScenario(format!(
                "no real joint cell in the {stratum} stratum (marginals {a}, {b}, odds ratio {o})"
            )));
        }
        (s - disc.sqrt()) / (2.0 * (o - 1.0))
    };
    let lo = (a + b - 1.0).max(0.0);
    let hi = a.min(b);
    if c11 < lo - ROOT_TOL || c11 > hi + ROOT_TOL {
        return Err(Error::InfeasibleScenario(format!(
            "joint cell {c11} outside the Frechet bounds [{lo}, {hi}] in the {stratum} stratum"
        )));
    }
    Ok(c11.clamp(lo, hi))
}

/// Builds the eight multinomial cell probabilities realizing a scenario.
///
/// `t_X = (pi - (1 - N_X)) / (P_X + N_X - 1)` is forced by the prevalence
/// identity; within each disease stratum the two tests' joint distribution
/// is completed from its marginals and the stratum odds ratio. Recomputing
/// the scenario parameters from the cells returns the inputs to 1e-10.
pub fn scenario_to_cells(s: &Scenario) -> Result<CellProbabilities> {
    for (name, v) in [
        ("P_A", s.p_a),
        ("P_B", s.p_b),
        ("N_A", s.n_a),
        ("N_B", s.n_b),
        ("pi", s.pi),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InfeasibleScenario(format!(
                "{name} must lie in (0, 1), got {v}"
            )));
        }
    }
    for (name, v) in [("O+", s.o_plus), ("O-", s.o_minus)] {
        let ok = v.is_finite() && v > 0.0;
        if !ok {
            return Err(Error::InfeasibleScenario(format!(
                "{name} must be a positive finite odds ratio, got {v}"
            )));
        }
    }
    let denom_a = s.p_a + s.n_a - 1.0;
    if denom_a <= 0.0 {
        return Err(Error::InfeasibleScenario(format!(
            "P_A + N_A must exceed 1 for t_A to be defined, got {}",
            s.p_a + s.n_a
        )));
    }
    let denom_b = s.p_b + s.n_b - 1.0;
    if denom_b <= 0.0 {
        return Err(Error::InfeasibleScenario(format!(
            "P_B + N_B must exceed 1 for t_B to be defined, got {}",
            s.p_b + s.n_b
        )));
    }
    let t_a = (s.pi - (1.0 - s.n_a)) / denom_a;
    let t_b = (s.pi - (1.0 - s.n_b)) / denom_b;
    if !(t_a > 0.0 && t_a < 1.0) {
        return Err(Error::InfeasibleScenario(format!(
            "positive-diagnosis rate t_A = {t_a} outside (0, 1)"
        )));
    }
    if !(t_b > 0.0 && t_b < 1.0) {
        return Err(Error::InfeasibleScenario(format!(
            "positive-diagnosis rate t_B = {t_b} outside (0, 1)"
        )));
    }

    // diseased stratum: positive-diagnosis rates conditional on S = +
    let a_pos = t_a * s.p_a / s.pi;
    let b_pos = t_b * s.p_b / s.pi;
    for (name, v) in [("t_A P_A / pi", a_pos), ("t_B P_B / pi", b_pos)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InfeasibleScenario(format!(
                "conditional rate {name} = {v} outside (0, 1)"
            )));
        }
    }
    let c11 = joint_cell(a_pos, b_pos, s.o_plus, "diseased")?;
    let p1 = s.pi * c11;
    let p2 = s.pi * (a_pos - c11);
    let p3 = s.pi * (b_pos - c11);
    let p4 = s.pi * (1.0 - a_pos - b_pos + c11);

    // non-diseased stratum
    let q = 1.0 - s.pi;
    let a_neg = t_a * (1.0 - s.p_a) / q;
    let b_neg = t_b * (1.0 - s.p_b) / q;
    for (name, v) in [
        ("t_A (1 - P_A) / (1 - pi)", a_neg),
        ("t_B (1 - P_B) / (1 - pi)", b_neg),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InfeasibleScenario(format!(
                "conditional rate {name} = {v} outside (0, 1)"
            )));
        }
    }
    let c11n = joint_cell(a_neg, b_neg, s.o_minus, "non-diseased")?;
    let p5 = q * c11n;
    let p6 = q * (a_neg - c11n);
    let p7 = q * (b_neg - c11n);
    let p8 = q * (1.0 - a_neg - b_neg + c11n);

    let mut p = [p1, p2, p3, p4, p5, p6, p7, p8];
    for (i, v) in p.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -ROOT_TOL {
                return Err(Error::InfeasibleScenario(format!(
                    "cell p{} is negative ({v})",
                    i + 1
                )));
            }
            *v = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    p[7] += 1.0 - sum;
    CellProbabilities::new(p)
}

/// Recovers the scenario parameters realized by a cell vector, for
/// round-trip checks.
pub fn cells_to_scenario(cells: &CellProbabilities) -> Scenario {
    let p = cells.probabilities();
    Scenario {
        p_a: (p[0] + p[1]) / cells.t_a(),
        p_b: (p[0] + p[2]) / cells.t_b(),
        n_a: (p[6] + p[7]) / cells.t_bar_a(),
        n_b: (p[5] + p[7]) / cells.t_bar_b(),
        pi: cells.prevalence(),
        o_plus: p[0] * p[3] / (p[1] * p[2]),
        o_minus: p[4] * p[7] / (p[5] * p[6]),
    }
}

/// Design parameters shared by the two sample-size formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeInputs {
    /// Anticipated positive predictive values.
    pub p_a: f64,
    pub p_b: f64,
    /// Anticipated positive-diagnosis rates of the two tests.
    pub t_a: f64,
    pub t_b: f64,
    /// Anticipated probability of (A, B, S) = (+, +, +).
    pub p1: f64,
    /// Anticipated probability of (A, B, S) = (+, +, -).
    pub p5: f64,
    /// One-sided type-I error.
    pub alpha: f64,
    /// Type-II error (power is `1 - beta`).
    pub beta: f64,
}

/// A computed sample size: the ceiling and the raw real value it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSize {
    pub n: u64,
    pub raw: f64,
}

fn validate_inputs(inputs: &SampleSizeInputs) -> Result<()> {
    for (name, v) in [
        ("P_A", inputs.p_a),
        ("P_B", inputs.p_b),
        ("t_A", inputs.t_a),
        ("t_B", inputs.t_b),
        ("alpha", inputs.alpha),
        ("beta", inputs.beta),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    for (name, v) in [("p1", inputs.p1), ("p5", inputs.p5)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1), got {v}")));
        }
    }
    Ok(())
}

/// Population variance factor of `d`: `n sigma_d^2` at the design point.
fn difference_bracket(i: &SampleSizeInputs) -> f64 {
    i.p_a * (1.0 - i.p_a) / i.t_a + i.p_b * (1.0 - i.p_b) / i.t_b
        - 2.0 * ((1.0 - i.p_a) * (1.0 - i.p_b) * i.p1 + i.p_a * i.p_b * i.p5) / (i.t_a * i.t_b)
}

/// Population variance factor of `ln R`: `n sigma_R^2` at the design point.
fn ratio_bracket(i: &SampleSizeInputs) -> f64 {
    (1.0 - i.p_a) / (i.t_a * i.p_a) + (1.0 - i.p_b) / (i.t_b * i.p_b)
        - 2.0 / (i.t_a * i.t_b) * ((1.0 - i.p_a) * (1.0 - i.p_b) / (i.p_a * i.p_b) * i.p1 + i.p5)
}

/// Sample size for the one-sided difference test `H: d = delta` against the
/// alternative `d = delta1 > delta`, at one-sided error `alpha` and power
/// `1 - beta`.
pub fn sample_size_difference(
    inputs: &SampleSizeInputs,
    delta: f64,
    delta1: f64,
) -> Result<SampleSize> {
    validate_inputs(inputs)?;
    if delta1 <= delta {
        return Err(Error::InvalidMargin(format!(
            "the alternative delta1 = {delta1} must exceed the margin delta = {delta}"
        )));
    }
    let z = normal_quantile(1.0 - inputs.alpha)? + normal_quantile(1.0 - inputs.beta)?;
    let scale = z / (delta - delta1);
    let raw = scale * scale * difference_bracket(inputs);
    Ok(SampleSize {
        n: raw.ceil() as u64,
        raw,
    })
}

/// Sample size for the one-sided ratio test `H: R = rho` against
/// `R = rho1 > rho`, on the log scale.
pub fn sample_size_ratio(inputs: &SampleSizeInputs, rho: f64, rho1: f64) -> Result<SampleSize> {
    validate_inputs(inputs)?;
    let positive = rho > 0.0 && rho1 > 0.0;
    if !positive {
        return Err(Error::InvalidMargin(format!(
            "ratio margins must be positive, got rho = {rho}, rho1 = {rho1}"
        )));
    }
    if rho1 <= rho {
        return Err(Error::InvalidMargin(format!(
            "the alternative rho1 = {rho1} must exceed the margin rho = {rho}"
        )));
    }
    let z = normal_quantile(1.0 - inputs.alpha)? + normal_quantile(1.0 - inputs.beta)?;
    let scale = z / (rho.ln() - rho1.ln());
    let raw = scale * scale * ratio_bracket(inputs);
    Ok(SampleSize {
        n: raw.ceil() as u64,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairedCounts;
    use crate::variance::difference_covariance;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn base_inputs() -> SampleSizeInputs {
        SampleSizeInputs {
            p_a: 0.8,
            p_b: 0.7,
            t_a: 0.5,
            t_b: 0.5,
            p1: 0.3,
            p5: 0.05,
            alpha: 0.05,
            beta: 0.05,
        }
    }

    #[test]
    fn paper_grid_scenario_round_trips() {
        let s = Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, 5.0, 2.0);
        let cells = scenario_to_cells(&s).unwrap();
        let back = cells_to_scenario(&cells);
        assert_abs_diff_eq!(back.p_a, s.p_a, epsilon = 1e-10);
        assert_abs_diff_eq!(back.p_b, s.p_b, epsilon = 1e-10);
        assert_abs_diff_eq!(back.n_a, s.n_a, epsilon = 1e-10);
        assert_abs_diff_eq!(back.n_b, s.n_b, epsilon = 1e-10);
        assert_abs_diff_eq!(back.pi, s.pi, epsilon = 1e-10);
        assert_abs_diff_eq!(back.o_plus, s.o_plus, epsilon = 1e-9);
        assert_abs_diff_eq!(back.o_minus, s.o_minus, epsilon = 1e-9);
    }

    #[test]
    fn independence_case_is_product_of_marginals() {
        let s = Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, 1.0, 1.0);
        let cells = scenario_to_cells(&s).unwrap();
        let t_a = (0.35 - 0.2) / 0.6;
        let a = t_a * 0.8 / 0.35;
        assert_abs_diff_eq!(cells.p(1), 0.35 * a * a, epsilon = 1e-14);
    }

    #[test]
    fn uninformative_test_is_infeasible() {
        let s = Scenario::new(0.6, 0.8, 0.4, 0.8, 0.35, 5.0, 2.0);
        assert!(matches!(
            scenario_to_cells(&s),
            Err(Error::InfeasibleScenario(_))
        ));
    }

    #[test]
    fn out_of_range_parameters_are_infeasible() {
        let s = Scenario::new(0.8, 0.8, 0.8, 0.8, 1.2, 5.0, 2.0);
        assert!(scenario_to_cells(&s).is_err());
        let s = Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, -1.0, 2.0);
        assert!(scenario_to_cells(&s).is_err());
    }

    #[test]
    fn diagnosis_symmetry_of_scenarios() {
        let s = Scenario::new(0.8, 0.7, 0.75, 0.85, 0.35, 5.0, 2.0);
        let cells = scenario_to_cells(&s).unwrap();
        let cells_sym = scenario_to_cells(&s.diagnosis_symmetry()).unwrap();
        let p = cells.diagnosis_symmetry().probabilities();
        let q = cells_sym.probabilities();
        for i in 0..8 {
            assert_abs_diff_eq!(p[i], q[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn difference_sample_size_hand_value() {
        // bracket = .8*.2/.5 + .7*.3/.5 - 2*(.06*.3 + .56*.05)/.25 = 0.372
        let inputs = base_inputs();
        let ss = sample_size_difference(&inputs, -0.1, 0.0).unwrap();
        assert_relative_eq!(ss.raw, 402.58486596939747, max_relative = 1e-9);
        assert_eq!(ss.n, 403);
    }

    #[test]
    fn ratio_sample_size_hand_value() {
        // bracket = .2/.4 + .3/.35 - 2/.25*(.06/.56*.3 + .05) = 0.7
        let inputs = base_inputs();
        let ss = sample_size_ratio(&inputs, 0.9, 1.0).unwrap();
        assert_relative_eq!(ss.raw, 682.4278936646218, max_relative = 1e-9);
        assert_eq!(ss.n, 683);
    }

    #[test]
    fn doubling_the_margin_gap_quarters_n() {
        let inputs = base_inputs();
        let narrow = sample_size_difference(&inputs, -0.1, 0.0).unwrap();
        let wide = sample_size_difference(&inputs, -0.2, 0.0).unwrap();
        assert_relative_eq!(narrow.raw, 4.0 * wide.raw, max_relative = 1e-12);

        let narrow = sample_size_ratio(&inputs, 0.9, 1.0).unwrap();
        let wide = sample_size_ratio(&inputs, 0.81, 1.0).unwrap();
        assert_relative_eq!(narrow.raw, 4.0 * wide.raw, max_relative = 1e-12);
    }

    #[test]
    fn alpha_beta_symmetric_when_equal() {
        let mut a = base_inputs();
        a.alpha = 0.10;
        a.beta = 0.025;
        let mut b = base_inputs();
        b.alpha = 0.025;
        b.beta = 0.10;
        let na = sample_size_difference(&a, -0.1, 0.0).unwrap();
        let nb = sample_size_difference(&b, -0.1, 0.0).unwrap();
        assert_relative_eq!(na.raw, nb.raw, max_relative = 1e-12);
    }

    #[test]
    fn equal_margins_are_invalid() {
        let inputs = base_inputs();
        assert!(matches!(
            sample_size_difference(&inputs, -0.1, -0.1),
            Err(Error::InvalidMargin(_))
        ));
        assert!(matches!(
            sample_size_ratio(&inputs, 0.9, 0.9),
            Err(Error::InvalidMargin(_))
        ));
    }

    #[test]
    fn bracket_equals_population_variance() {
        // n sigma_d^2 evaluated on a table with x_i = n p_i equals the
        // bracketed factor at the matching design point
        let s = Scenario::new(0.8, 0.7, 0.75, 0.85, 0.35, 5.0, 2.0);
        let cells = scenario_to_cells(&s).unwrap();
        let n = 1000.0;
        let p = cells.probabilities();
        let mut x = [0.0; 8];
        for i in 0..8 {
            x[i] = n * p[i];
        }
        let counts = PairedCounts::new(x).unwrap();
        let var_d = difference_covariance(&counts).unwrap().var_d;
        let inputs = SampleSizeInputs {
            p_a: s.p_a,
            p_b: s.p_b,
            t_a: cells.t_a(),
            t_b: cells.t_b(),
            p1: cells.p(1),
            p5: cells.p(5),
            alpha: 0.05,
            beta: 0.2,
        };
        assert_relative_eq!(n * var_d, difference_bracket(&inputs), max_relative = 1e-10);
    }
}
