//! Acceptance suite: golden values from the worked examples, the Monte
//! Carlo regression rows, the property gates, and the determinism contract.
//!
//! Each criterion is one test that prints a `criterion N: PASS` line on
//! success (visible with `cargo test --test acceptance -- --nocapture`);
//! a failure panics with the offending quantity.

use approx::{assert_abs_diff_eq, assert_relative_eq};

use pvcompare::bennett::{bennett_statistics, kosinski_equivalence_check};
use pvcompare::design::cells_to_scenario;
use pvcompare::inference::{ci_for_method, RatioForm};
use pvcompare::numerics::normal_quantile;
use pvcompare::variance::{d_bar_of_probs, d_of_probs, log_r_bar_of_probs, log_r_of_probs};
use pvcompare::{
    ci_difference, ci_ratio, delta_oracle, difference_covariance, global_test, individual_test,
    pooled_difference_covariance, pooled_ratio_covariance, ratio_covariance, run, run_grid,
    scenario_to_cells, CellProbabilities, CiVariant, Family, MethodId, Metric, PairedCounts,
    Scenario, SimulationSpec, SplitMix64, Target, Variant,
};

const WEINER: [f64; 8] = [473.0, 81.0, 29.0, 25.0, 22.0, 44.0, 46.0, 151.0];
const ROLDAN: [f64; 8] = [152.0, 17.0, 7.0, 36.0, 25.0, 10.0, 11.0, 290.0];

fn weiner() -> PairedCounts {
    PairedCounts::new(WEINER).unwrap()
}

fn random_table(rng: &mut SplitMix64, lo: f64, hi: f64) -> PairedCounts {
    let mut cells = [0.0; 8];
    for c in &mut cells {
        *c = lo + (hi - lo) * rng.next_f64();
    }
    PairedCounts::new(cells).unwrap()
}

#[test]
fn criterion_1_point_estimates() {
    let e = weiner().estimates().unwrap();
    assert_abs_diff_eq!(e.ppv_a, 0.8935, epsilon = 5e-5);
    assert_abs_diff_eq!(e.ppv_b, 0.8807, epsilon = 5e-5);
    assert_abs_diff_eq!(e.npv_a, 0.7849, epsilon = 5e-5);
    assert_abs_diff_eq!(e.npv_b, 0.6478, epsilon = 5e-5);
    assert_abs_diff_eq!(e.d(), 0.0128, epsilon = 5e-5);
    assert_abs_diff_eq!(e.r().unwrap(), 1.015, epsilon = 5e-4);
    assert_abs_diff_eq!(e.r_bar().unwrap(), 1.212, epsilon = 5e-4);
    println!("criterion 1: PASS — point estimates reproduce the worked example");
}

#[test]
fn criterion_2_statistic_table_rows() {
    let c = weiner();
    let individual = [
        ("d", 0.802, 23.73),
        ("LR", 0.800, 22.44),
        ("d(p)", 0.807, 22.50),
        ("R(p)", 0.808, 22.32),
        ("d(a)", 0.809, 23.44),
    ];
    for (name, pos, neg) in individual {
        let m: MethodId = name.parse().unwrap();
        let t = individual_test(&c, m, Target::Positive).unwrap();
        assert_abs_diff_eq!(t.statistic, pos, epsilon = 5e-3);
        let t = individual_test(&c, m, Target::Negative).unwrap();
        assert_abs_diff_eq!(t.statistic, neg, epsilon = 5e-3);
    }
    let global = [("d", 25.94), ("R", 24.45), ("LR", 24.37)];
    for (name, expected) in global {
        let t = global_test(&c, name.parse().unwrap()).unwrap();
        assert_abs_diff_eq!(t.statistic, expected, epsilon = 1e-2);
    }
    println!("criterion 2: PASS — statistic table rows reproduce");
}

#[test]
fn criterion_3_second_worked_example() {
    let c = PairedCounts::new(ROLDAN).unwrap();
    let global = [
        ("d", 4.2517, 0.1193),
        ("R", 4.2067, 0.1220),
        ("LR", 4.2064, 0.1221),
    ];
    for (name, stat, p) in global {
        let t = global_test(&c, name.parse().unwrap()).unwrap();
        assert_abs_diff_eq!(t.statistic, stat, epsilon = 5e-4);
        assert_abs_diff_eq!(t.p_value, p, epsilon = 2e-4);
    }
    // the d(a) row's printed p-value (0.0445) is inconsistent with its own
    // statistic: chisq_sf(4.0730, 1) = 0.04357, so 0.0436 is asserted
    let individual = [
        ("d", 4.2461, 0.0393),
        ("d(p)", 4.2076, 0.0402),
        ("d(a)", 4.0730, 0.0436),
    ];
    for (name, stat, p) in individual {
        let t = individual_test(&c, name.parse().unwrap(), Target::Negative).unwrap();
        assert_abs_diff_eq!(t.statistic, stat, epsilon = 5e-4);
        assert_abs_diff_eq!(t.p_value, p, epsilon = 2e-4);
    }
    println!("criterion 3: PASS — second worked example reproduces");
}

#[test]
fn criterion_4_bennett_family() {
    let c = weiner();
    let pos = bennett_statistics(&c, Target::Positive).unwrap();
    assert_abs_diff_eq!(pos.z_b, 0.800, epsilon = 5e-3);
    assert_abs_diff_eq!(pos.z_b_prime, 0.803, epsilon = 5e-3);
    assert_abs_diff_eq!(pos.z_w, 0.803, epsilon = 5e-3);
    let neg = bennett_statistics(&c, Target::Negative).unwrap();
    assert_abs_diff_eq!(neg.z_b, 20.220, epsilon = 5e-3);
    assert_abs_diff_eq!(neg.z_b_prime, 22.290, epsilon = 5e-3);
    assert_abs_diff_eq!(neg.z_w, 22.145, epsilon = 5e-3);

    assert!(kosinski_equivalence_check(&c, Target::Positive).unwrap());
    assert!(kosinski_equivalence_check(&c, Target::Negative).unwrap());
    let mut rng = SplitMix64::new(0xACCE_0004);
    for _ in 0..200 {
        let t = random_table(&mut rng, 0.5, 150.0);
        assert!(kosinski_equivalence_check(&t, Target::Positive).unwrap());
        assert!(kosinski_equivalence_check(&t, Target::Negative).unwrap());
    }
    println!("criterion 4: PASS — Bennett-family statistics and the pooled equivalence hold");
}

const SIM_REPLICATIONS: u64 = 100_000;
const SIM_SEED: u64 = 20250807;

/// Three Monte Carlo standard errors of a percentage near `pct` at the
/// regression replication count.
fn three_mc_se(pct: f64) -> f64 {
    let q = pct / 100.0;
    3.0 * 100.0 * (q * (1.0 - q) / SIM_REPLICATIONS as f64).sqrt()
}

fn sim_row(scenario: Scenario, metric: Metric, methods: &[&str]) -> Vec<(MethodId, f64, f64)> {
    let spec = SimulationSpec {
        scenario,
        n: 100,
        replications: SIM_REPLICATIONS,
        alpha: 0.05,
        methods: methods.iter().map(|m| m.parse().unwrap()).collect(),
        metric,
        seed: SIM_SEED,
    };
    run(&spec)
        .unwrap()
        .into_iter()
        .map(|r| {
            let value = r.coverage.or(r.rejection).unwrap();
            (r.method, value, r.avg_width.unwrap_or(f64::NAN))
        })
        .collect()
}

fn assert_pct(observed: &[(MethodId, f64, f64)], method: &str, expected: f64) {
    let m: MethodId = method.parse().unwrap();
    let (_, value, _) = observed.iter().find(|(id, _, _)| *id == m).unwrap();
    let tol = three_mc_se(expected);
    println!("    {method}: observed {value:.3} vs expected {expected} (tol {tol:.3})");
    assert!(
        (value - expected).abs() <= tol,
        "{method}: {value:.3} outside {expected} +- {tol:.3}"
    );
}

fn assert_width(observed: &[(MethodId, f64, f64)], method: &str, expected: f64) {
    let m: MethodId = method.parse().unwrap();
    let (_, _, width) = observed.iter().find(|(id, _, _)| *id == m).unwrap();
    println!("    W {method}: observed {width:.4} vs expected {expected} (tol 0.003)");
    assert!(
        (width - expected).abs() <= 0.003,
        "width {method}: {width:.4} outside {expected} +- 0.003"
    );
}

#[test]
fn criterion_5_simulation_regression() {
    let null_scenario = Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, 5.0, 2.0);

    println!("  coverage row (null scenario, n = 100):");
    let row = sim_row(
        null_scenario,
        Metric::CoverageWidth,
        &["d", "d(a)", "LR", "LR(a)", "R", "R(a)"],
    );
    assert_pct(&row, "d", 93.9);
    assert_pct(&row, "d(a)", 95.6);
    assert_pct(&row, "LR", 95.6);
    assert_pct(&row, "R(a)", 96.8);
    assert_width(&row, "d", 0.376);
    assert_width(&row, "d(a)", 0.364);

    println!("  individual size row (null scenario, n = 100):");
    let all: Vec<&str> = MethodId::ALL.iter().map(|m| m.name()).collect();
    let row = sim_row(null_scenario, Metric::Size, &all);
    assert_pct(&row, "d", 6.1);
    assert_pct(&row, "d(a)", 4.4);
    assert_pct(&row, "d(p)", 4.9);
    assert_pct(&row, "LR(a)", 3.2);
    assert_pct(&row, "R(p)", 4.9);

    println!("  individual power row (P_A = .8, P_B = .7, n = 100):");
    let row = sim_row(
        Scenario::new(0.8, 0.7, 0.7, 0.7, 0.35, 5.0, 2.0),
        Metric::Power,
        &all,
    );
    assert_pct(&row, "d(p)", 7.4);
    assert_pct(&row, "LR(a)", 3.7);

    // the source table's d-family and R-family columns are sheared by one
    // row block; the arithmetically consistent n = 100 value of the classic
    // global size is 5.9 (the printed 5.3 belongs to n = 300)
    println!("  global size row (null scenario, n = 100):");
    let row = sim_row(null_scenario, Metric::GlobalSize, &all);
    assert_pct(&row, "d", 5.9);
    assert_pct(&row, "LR(a)", 3.1);

    println!("  global power row (P_A = .7, P_B = .8, n = 100):");
    let row = sim_row(
        Scenario::new(0.7, 0.8, 0.7, 0.7, 0.35, 5.0, 2.0),
        Metric::GlobalPower,
        &all,
    );
    assert_pct(&row, "R", 8.1);
    assert_pct(&row, "d(p)", 4.6);

    println!("criterion 5: PASS — simulation regression rows within 3 Monte Carlo SEs");
}

#[test]
fn criterion_6_property_gates() {
    // symmetry invariances over 500 random tables
    let mut rng = SplitMix64::new(0xACCE_0006);
    for _ in 0..500 {
        let c = random_table(&mut rng, 0.5, 150.0);
        let diag = c.diagnosis_symmetry();
        let swap = c.test_symmetry();
        for m in MethodId::ALL {
            let neg = individual_test(&c, m, Target::Negative).unwrap().statistic;
            let pos = individual_test(&diag, m, Target::Positive)
                .unwrap()
                .statistic;
            assert_relative_eq!(neg, pos, max_relative = 1e-10);
            let base = individual_test(&c, m, Target::Positive).unwrap().statistic;
            let swapped = individual_test(&swap, m, Target::Positive)
                .unwrap()
                .statistic;
            assert_relative_eq!(base, swapped, max_relative = 1e-10);
            let g = global_test(&c, m).map(|t| t.statistic);
            let g_d = global_test(&diag, m).map(|t| t.statistic);
            let g_s = global_test(&swap, m).map(|t| t.statistic);
            match (g, g_d, g_s) {
                (Ok(a), Ok(b), Ok(c)) => {
                    assert_relative_eq!(a, b, max_relative = 1e-10);
                    assert_relative_eq!(a, c, max_relative = 1e-10);
                }
                (Err(_), Err(_), Err(_)) => {}
                other => panic!("global symmetry outcomes disagree: {other:?}"),
            }
        }
        for m in MethodId::CI_METHODS {
            let neg = ci_for_method(&c, m, 0.05, Target::Negative).unwrap();
            let pos = ci_for_method(&diag, m, 0.05, Target::Positive).unwrap();
            assert_relative_eq!(neg.lower, pos.lower, max_relative = 1e-10);
            assert_relative_eq!(neg.upper, pos.upper, max_relative = 1e-10);
            let base = ci_for_method(&c, m, 0.05, Target::Positive).unwrap();
            let swapped = ci_for_method(&swap, m, 0.05, Target::Positive).unwrap();
            if m.family == Family::Difference {
                assert_abs_diff_eq!(swapped.lower, -base.upper, epsilon = 1e-10);
                assert_abs_diff_eq!(swapped.upper, -base.lower, epsilon = 1e-10);
            } else {
                assert_relative_eq!(swapped.lower, 1.0 / base.upper, max_relative = 1e-10);
                assert_relative_eq!(swapped.upper, 1.0 / base.lower, max_relative = 1e-10);
            }
        }
        let b_neg = bennett_statistics(&c, Target::Negative).unwrap();
        let b_pos = bennett_statistics(&diag, Target::Positive).unwrap();
        assert_relative_eq!(b_neg.z_b, b_pos.z_b, max_relative = 1e-10);
        let b = bennett_statistics(&c, Target::Positive).unwrap();
        let b_s = bennett_statistics(&swap, Target::Positive).unwrap();
        assert_relative_eq!(b.z_b_prime, b_s.z_b_prime, max_relative = 1e-10);
    }

    // oracle agreement over 200 nondegenerate tables
    let mut rng = SplitMix64::new(0xACCE_0106);
    for _ in 0..200 {
        let c = random_table(&mut rng, 10.0, 100.0);
        let n = c.n();
        let cells = CellProbabilities::plug_in(&c).unwrap();
        let (v_d, v_db, cov_d) = delta_oracle(d_of_probs, d_bar_of_probs, &cells, n);
        let closed = difference_covariance(&c).unwrap();
        assert_relative_eq!(v_d, closed.var_d, max_relative = 1e-8);
        assert_relative_eq!(v_db, closed.var_d_bar, max_relative = 1e-8);
        assert_relative_eq!(cov_d, closed.cov, max_relative = 1e-8);
        let (v_r, v_rb, cov_r) = delta_oracle(log_r_of_probs, log_r_bar_of_probs, &cells, n);
        let closed = ratio_covariance(&c).unwrap();
        assert_relative_eq!(v_r, closed.var_log_r, max_relative = 1e-8);
        assert_relative_eq!(v_rb, closed.var_log_r_bar, max_relative = 1e-8);
        assert_relative_eq!(cov_r, closed.cov, max_relative = 1e-8);
    }

    // CI inversion identities
    let mut rng = SplitMix64::new(0xACCE_0206);
    let z2 = {
        let z = normal_quantile(0.975).unwrap();
        z * z
    };
    for _ in 0..100 {
        let c = random_table(&mut rng, 2.0, 120.0);
        let e = c.estimates().unwrap();
        let cov = difference_covariance(&c).unwrap();
        let ci = ci_difference(&c, CiVariant::Classic, 0.05, Target::Positive).unwrap();
        for bound in [ci.lower, ci.upper] {
            assert_abs_diff_eq!(
                (e.d() - bound) * (e.d() - bound) / cov.var_d,
                z2,
                epsilon = 1e-9
            );
        }
        let rcov = ratio_covariance(&c).unwrap();
        let r = e.r().unwrap();
        let ci = ci_ratio(
            &c,
            RatioForm::Direct,
            CiVariant::Classic,
            0.05,
            Target::Positive,
        )
        .unwrap();
        for bound in [ci.lower, ci.upper] {
            assert_abs_diff_eq!(
                (r - bound) * (r - bound) / (bound * r * rcov.var_log_r),
                z2,
                epsilon = 1e-9
            );
        }
    }

    // scenario round-trip to 1e-10
    let mut rng = SplitMix64::new(0xACCE_0306);
    for _ in 0..200 {
        let p_a = 0.55 + 0.4 * rng.next_f64();
        let p_b = 0.55 + 0.4 * rng.next_f64();
        let n_a = 0.55 + 0.4 * rng.next_f64();
        let n_b = 0.55 + 0.4 * rng.next_f64();
        let lo = (1.0 - n_a).max(1.0 - n_b) + 0.02;
        let hi = p_a.min(p_b) - 0.02;
        let pi = lo + (hi - lo) * rng.next_f64();
        let s = Scenario::new(
            p_a,
            p_b,
            n_a,
            n_b,
            pi,
            0.25 + 7.75 * rng.next_f64(),
            0.25 + 7.75 * rng.next_f64(),
        );
        let back = cells_to_scenario(&scenario_to_cells(&s).unwrap());
        assert_abs_diff_eq!(back.p_a, s.p_a, epsilon = 1e-10);
        assert_abs_diff_eq!(back.p_b, s.p_b, epsilon = 1e-10);
        assert_abs_diff_eq!(back.n_a, s.n_a, epsilon = 1e-10);
        assert_abs_diff_eq!(back.n_b, s.n_b, epsilon = 1e-10);
        assert_abs_diff_eq!(back.pi, s.pi, epsilon = 1e-10);
    }

    // size complements coverage, table by table, under the null
    let scenario = Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, 5.0, 2.0);
    let methods: Vec<MethodId> = MethodId::CI_METHODS.to_vec();
    let coverage_spec = SimulationSpec {
        scenario,
        n: 80,
        replications: 5000,
        alpha: 0.05,
        methods: methods.clone(),
        metric: Metric::CoverageWidth,
        seed: 0xACCE_0406,
    };
    let size_spec = SimulationSpec {
        metric: Metric::Size,
        ..coverage_spec.clone()
    };
    let coverage = run(&coverage_spec).unwrap();
    let size = run(&size_spec).unwrap();
    for (c, s) in coverage.iter().zip(&size) {
        assert_eq!(c.hits + s.hits, coverage_spec.replications);
    }

    // pooled reduces to classic when the estimates are equal
    let mut rng = SplitMix64::new(0xACCE_0506);
    for _ in 0..200 {
        let vals: Vec<f64> = (0..6).map(|_| 1.0 + 99.0 * rng.next_f64()).collect();
        let c = PairedCounts::new([
            vals[0], vals[1], vals[1], vals[2], vals[3], vals[4], vals[4], vals[5],
        ])
        .unwrap();
        let classic = difference_covariance(&c).unwrap();
        let pooled = pooled_difference_covariance(&c).unwrap();
        assert_relative_eq!(pooled.var_d, classic.var_d, max_relative = 1e-11);
        assert_relative_eq!(pooled.var_d_bar, classic.var_d_bar, max_relative = 1e-11);
        let classic = ratio_covariance(&c).unwrap();
        let pooled = pooled_ratio_covariance(&c).unwrap();
        assert_relative_eq!(pooled.var_log_r, classic.var_log_r, max_relative = 1e-11);
    }

    println!("criterion 6: PASS — property gates hold");
}

#[test]
fn criterion_7_worker_determinism() {
    let specs = vec![
        SimulationSpec {
            scenario: Scenario::new(0.8, 0.8, 0.8, 0.8, 0.35, 5.0, 2.0),
            n: 100,
            replications: 20_000,
            alpha: 0.05,
            methods: MethodId::CI_METHODS.to_vec(),
            metric: Metric::CoverageWidth,
            seed: 7,
        },
        SimulationSpec {
            scenario: Scenario::new(0.8, 0.7, 0.7, 0.7, 0.35, 2.0, 5.0),
            n: 200,
            replications: 20_000,
            alpha: 0.05,
            methods: MethodId::ALL.to_vec(),
            metric: Metric::Size,
            seed: 8,
        },
    ];
    let render = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| serde_json::to_string_pretty(&run_grid(&specs)).unwrap())
    };
    let one = render(1);
    let eight = render(8);
    assert_eq!(
        one, eight,
        "reports must be byte-identical across worker counts"
    );
    assert!(one.contains("\"method\": \"d\""));
    println!("criterion 7: PASS — byte-identical reports across 1 and 8 workers");
}

#[test]
fn degenerate_margin_coverage_row_reproduces() {
    // N_B = .7 with pi = .35 drives t_B down to 0.1, so zero cells are
    // routine and the substitution path carries the ratio methods; the
    // published row is C: 90.0 / 96.6 / 92.8 / 98.6 / 92.7 / 98.5 with
    // W(d) = .519, W(d(a)) = .504, W(LR(a)) = .808, W(R(a)) = .800
    let row = sim_row(
        Scenario::new(0.8, 0.8, 0.8, 0.7, 0.35, 5.0, 2.0),
        Metric::CoverageWidth,
        &["d", "d(a)", "LR", "LR(a)", "R", "R(a)"],
    );
    assert_pct(&row, "d", 90.0);
    assert_pct(&row, "d(a)", 96.6);
    assert_pct(&row, "LR", 92.8);
    assert_pct(&row, "LR(a)", 98.6);
    assert_pct(&row, "R", 92.7);
    assert_pct(&row, "R(a)", 98.5);
    assert_width(&row, "d", 0.519);
    assert_width(&row, "d(a)", 0.504);
    assert_width(&row, "LR(a)", 0.808);
    assert_width(&row, "R(a)", 0.800);
    // the mean LR and R widths are dominated by rare near-degenerate
    // tables and converge slowly; only band them
    let w_of = |name: &str| {
        let m: MethodId = name.parse().unwrap();
        row.iter().find(|(id, _, _)| *id == m).unwrap().2
    };
    let w_lr = w_of("LR");
    assert!(
        (1.5..4.5).contains(&w_lr),
        "W(LR) = {w_lr} outside the tail band"
    );
    let w_r = w_of("R");
    assert!(
        (0.85..1.10).contains(&w_r),
        "W(R) = {w_r} outside the tail band"
    );
}

#[test]
fn degenerate_margin_size_row_reproduces_all_nine_methods() {
    // the same scenario's size row, the most liberal line of the grid:
    // 10.0 / 3.4 / 4.2 / 7.2 / 1.4 / 4.9 / 7.2 / 1.5 / 5.0
    let all: Vec<&str> = MethodId::ALL.iter().map(|m| m.name()).collect();
    let row = sim_row(
        Scenario::new(0.8, 0.8, 0.8, 0.7, 0.35, 5.0, 2.0),
        Metric::Size,
        &all,
    );
    assert_pct(&row, "d", 10.0);
    assert_pct(&row, "d(a)", 3.4);
    assert_pct(&row, "d(p)", 4.2);
    assert_pct(&row, "LR", 7.2);
    assert_pct(&row, "LR(a)", 1.4);
    assert_pct(&row, "LR(p)", 4.9);
    assert_pct(&row, "R", 7.2);
    assert_pct(&row, "R(a)", 1.5);
    assert_pct(&row, "R(p)", 5.0);
}

#[test]
fn grid_footer_reproduces_the_pooled_size_average() {
    // the 24 size settings: P_A = P_B = .8 crossed with two (N_A, N_B)
    // pairs, two prevalences, two odds-ratio pairs and three sample sizes;
    // the footer average of the pooled difference test sits at 4.9
    let mut specs = Vec::new();
    for (n_a, n_b) in [(0.8, 0.8), (0.8, 0.7)] {
        for pi in [0.35, 0.65] {
            for (o_plus, o_minus) in [(5.0, 2.0), (2.0, 5.0)] {
                for n in [100, 200, 300] {
                    specs.push(SimulationSpec {
                        scenario: Scenario::new(0.8, 0.8, n_a, n_b, pi, o_plus, o_minus),
                        n,
                        replications: 20_000,
                        alpha: 0.05,
                        methods: vec!["d(p)".parse().unwrap()],
                        metric: Metric::Size,
                        seed: 424242,
                    });
                }
            }
        }
    }
    assert_eq!(specs.len(), 24);
    let report = run_grid(&specs);
    assert_eq!(report.rows.len(), 24);
    assert!(report.rows.iter().all(|r| r.error.is_none()));
    let avg = report
        .summary
        .iter()
        .find(|s| s.quantity == pvcompare::Quantity::Size)
        .unwrap()
        .average;
    println!("    footer average d(p) size: observed {avg:.3} vs expected 4.9");
    assert!(
        (avg - 4.9).abs() <= 0.15,
        "footer average {avg:.3} outside 4.9 +- 0.15"
    );
}

#[test]
fn variant_enum_is_exported() {
    // the nine methods factor as three families by three variants
    let mut count = 0;
    for m in MethodId::ALL {
        if m.variant == Variant::Pooled {
            count += 1;
        }
    }
    assert_eq!(count, 3);
}
