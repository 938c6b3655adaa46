//! Data model for the paired design: the eight observed cell counts, the
//! eight multinomial cell probabilities, and the predictive-value estimators.
//!
//! Cell indexing follows the 2x2x2 layout: within the diseased row (`S = +`)
//! the cells are x1 (A+,B+), x2 (A+,B-), x3 (A-,B+), x4 (A-,B-); x5..x8
//! repeat the pattern for the non-diseased row (`S = -`).
//!
//! Counts are real-valued so the +0.5 adjustment and the 0.05 zero
//! substitution live in the same type; margins are always derived from the
//! cells, never stored.

use crate::error::{Error, MarginKind, PredictiveValueKind, Result};

/// Zero cells drawn in simulation are replaced by this value.
pub const ZERO_SUBSTITUTE: f64 = 0.05;

/// The eight observed cell counts of a paired study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedCounts {
    x: [f64; 8],
}

impl PairedCounts {
    /// Builds a table from cells `[x1, ..., x8]`; every cell must be finite
    /// and nonnegative.
    pub fn new(cells: [f64; 8]) -> Result<Self> {
        for (i, &v) in cells.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "cell x{} must be a finite nonnegative count, got {v}",
                    i + 1
                )));
            }
        }
        Ok(PairedCounts { x: cells })
    }

    pub fn cells(&self) -> [f64; 8] {
        self.x
    }

    /// Cell value, 1-based index matching the table notation.
    pub fn x(&self, i: usize) -> f64 {
        self.x[i - 1]
    }

    /// Column total `n_j = x_j + x_{j+4}`, `j` in 1..=4.
    pub fn n_j(&self, j: usize) -> f64 {
        self.x[j - 1] + self.x[j + 3]
    }

    /// Total sample size.
    pub fn n(&self) -> f64 {
        self.x.iter().sum()
    }

    /// Positive diagnoses of test A: `n_1 + n_2`.
    pub fn n_a(&self) -> f64 {
        self.n_j(1) + self.n_j(2)
    }

    /// Positive diagnoses of test B: `n_1 + n_3`.
    pub fn n_b(&self) -> f64 {
        self.n_j(1) + self.n_j(3)
    }

    /// Negative diagnoses of test A: `n_3 + n_4`.
    pub fn n_bar_a(&self) -> f64 {
        self.n_j(3) + self.n_j(4)
    }

    /// Negative diagnoses of test B: `n_2 + n_4`.
    pub fn n_bar_b(&self) -> f64 {
        self.n_j(2) + self.n_j(4)
    }

    /// Correct positive diagnoses of test A: `x_1 + x_2`.
    pub fn x_a(&self) -> f64 {
        self.x[0] + self.x[1]
    }

    /// Correct positive diagnoses of test B: `x_1 + x_3`.
    pub fn x_b(&self) -> f64 {
        self.x[0] + self.x[2]
    }

    /// Correct negative diagnoses of test A: `x_7 + x_8`.
    pub fn x_bar_a(&self) -> f64 {
        self.x[6] + self.x[7]
    }

    /// Correct negative diagnoses of test B: `x_6 + x_8`.
    pub fn x_bar_b(&self) -> f64 {
        self.x[5] + self.x[7]
    }

    /// Checks that all four diagnosis margins are positive, naming the first
    /// empty one otherwise.
    pub fn validate(&self) -> Result<&Self> {
        if self.n_a() <= 0.0 {
            Err(Error::EmptyMargin(MarginKind::PositiveA))
        } else if self.n_b() <= 0.0 {
            Err(Error::EmptyMargin(MarginKind::PositiveB))
        } else if self.n_bar_a() <= 0.0 {
            Err(Error::EmptyMargin(MarginKind::NegativeA))
        } else if self.n_bar_b() <= 0.0 {
            Err(Error::EmptyMargin(MarginKind::NegativeB))
        } else {
            Ok(self)
        }
    }

    /// The four predictive-value estimators and derived parameters.
    pub fn estimates(&self) -> Result<PredictiveEstimates> {
        self.validate()?;
        Ok(PredictiveEstimates {
            ppv_a: self.x_a() / self.n_a(),
            ppv_b: self.x_b() / self.n_b(),
            npv_a: self.x_bar_a() / self.n_bar_a(),
            npv_b: self.x_bar_b() / self.n_bar_b(),
        })
    }

    /// Symmetry in diagnoses: permuting the + and - signs maps `x_i` to
    /// `x_{9-i}`, so positive-predictive-value formulas become their
    /// negative counterparts.
    pub fn diagnosis_symmetry(&self) -> Self {
        let x = &self.x;
        PairedCounts {
            x: [x[7], x[6], x[5], x[4], x[3], x[2], x[1], x[0]],
        }
    }

    /// Symmetry in tests: permuting the labels A and B swaps `x2 <-> x3`
    /// and `x6 <-> x7`.
    pub fn test_symmetry(&self) -> Self {
        let x = &self.x;
        PairedCounts {
            x: [x[0], x[2], x[1], x[3], x[4], x[6], x[5], x[7]],
        }
    }

    /// Every cell increased by 0.5 (the adjusted-Wald transformation).
    pub fn adjust_half(&self) -> Self {
        let mut x = self.x;
        for v in &mut x {
            *v += 0.5;
        }
        PairedCounts { x }
    }

    /// Every zero cell replaced by 0.05, the simulation-protocol remedy for
    /// tables on which ratio-scale statistics are undefined.
    pub fn zero_substitute(&self) -> Self {
        let mut x = self.x;
        for v in &mut x {
            if *v == 0.0 {
                *v = ZERO_SUBSTITUTE;
            }
        }
        PairedCounts { x }
    }
}

/// The eight multinomial cell probabilities of the paired design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellProbabilities {
    p: [f64; 8],
}

impl CellProbabilities {
    const SUM_TOL: f64 = 1e-12;

    /// Builds cell probabilities `[p1, ..., p8]`; each must be nonnegative
    /// and they must sum to 1 within 1e-12.
    pub fn new(p: [f64; 8]) -> Result<Self> {
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "cell probability p{} must be finite and nonnegative, got {v}",
                    i + 1
                )));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::Domain(format!(
                "cell probabilities must sum to 1 within {:e}, got {sum}",
                Self::SUM_TOL
            )));
        }
        Ok(CellProbabilities { p })
    }

    /// Plug-in probabilities `x_i / n` from an observed table.
    pub fn plug_in(counts: &PairedCounts) -> Result<Self> {
        let n = counts.n();
        if n <= 0.0 {
            return Err(Error::Domain(
                "plug-in probabilities require a table with n > 0".into(),
            ));
        }
        let x = counts.cells();
        let mut p = [0.0; 8];
        for i in 0..8 {
            p[i] = x[i] / n;
        }
        // Normalization is exact up to rounding; renormalize the last cell
        // so the simplex invariant holds bit-for-bit.
        let sum: f64 = p.iter().sum();
        p[7] = (p[7] + (1.0 - sum)).max(0.0);
        Self::new(p)
    }

    pub fn probabilities(&self) -> [f64; 8] {
        self.p
    }

    /// Cell probability, 1-based index.
    pub fn p(&self, i: usize) -> f64 {
        self.p[i - 1]
    }

    /// Column total `t_j = p_j + p_{j+4}`.
    pub fn t_j(&self, j: usize) -> f64 {
        self.p[j - 1] + self.p[j + 3]
    }

    pub fn t_a(&self) -> f64 {
        self.t_j(1) + self.t_j(2)
    }

    pub fn t_b(&self) -> f64 {
        self.t_j(1) + self.t_j(3)
    }

    pub fn t_bar_a(&self) -> f64 {
        self.t_j(3) + self.t_j(4)
    }

    pub fn t_bar_b(&self) -> f64 {
        self.t_j(2) + self.t_j(4)
    }

    /// Disease prevalence `p1 + p2 + p3 + p4`.
    pub fn prevalence(&self) -> f64 {
        self.p[0] + self.p[1] + self.p[2] + self.p[3]
    }

    /// Diagnosis symmetry on the probability scale: `p_i -> p_{9-i}`.
    pub fn diagnosis_symmetry(&self) -> Self {
        let p = &self.p;
        CellProbabilities {
            p: [p[7], p[6], p[5], p[4], p[3], p[2], p[1], p[0]],
        }
    }
}

/// The four predictive-value estimates and the derived comparison parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveEstimates {
    pub ppv_a: f64,
    pub ppv_b: f64,
    pub npv_a: f64,
    pub npv_b: f64,
}

impl PredictiveEstimates {
    /// `d = PPV_A - PPV_B`.
    pub fn d(&self) -> f64 {
        self.ppv_a - self.ppv_b
    }

    /// `dbar = NPV_A - NPV_B`.
    pub fn d_bar(&self) -> f64 {
        self.npv_a - self.npv_b
    }

    /// `R = PPV_A / PPV_B`, undefined when the denominator is zero.
    pub fn r(&self) -> Result<f64> {
        if self.ppv_b > 0.0 {
            Ok(self.ppv_a / self.ppv_b)
        } else {
            Err(Error::ZeroPredictiveValue(PredictiveValueKind::PositiveB))
        }
    }

    /// `Rbar = NPV_A / NPV_B`, undefined when the denominator is zero.
    pub fn r_bar(&self) -> Result<f64> {
        if self.npv_b > 0.0 {
            Ok(self.npv_a / self.npv_b)
        } else {
            Err(Error::ZeroPredictiveValue(PredictiveValueKind::NegativeB))
        }
    }

    /// Ensures all four predictive values are strictly positive, as the
    /// ratio-scale variances require.
    pub fn require_ratio_scale(&self) -> Result<()> {
        let checks = [
            (self.ppv_a, PredictiveValueKind::PositiveA),
            (self.ppv_b, PredictiveValueKind::PositiveB),
            (self.npv_a, PredictiveValueKind::NegativeA),
            (self.npv_b, PredictiveValueKind::NegativeB),
        ];
        for (v, kind) in checks {
            if v <= 0.0 {
                return Err(Error::ZeroPredictiveValue(kind));
            }
        }
        Ok(())
    }
}

/// The counts of the Weiner et al. coronary-artery-disease study, the
/// running example of the module documentation and tests.
pub const WEINER: [f64; 8] = [473.0, 81.0, 29.0, 25.0, 22.0, 44.0, 46.0, 151.0];
