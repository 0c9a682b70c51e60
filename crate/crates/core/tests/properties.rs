//! Property-style checks of the library invariants: CSV round trips, kernel
//! laws, the decomposition identity and estimator symmetries.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmd_miss::data::vstack;
use mmd_miss::inference::TestMethod;
use mmd_miss::{
    incomplete_laplacian, laplacian, load_csv, mmd_u, partition_rows, KernelParams, MaskedMatrix,
    TwoSampleData,
};

fn masked_matrix_strategy() -> impl Strategy<Value = MaskedMatrix<f64>> {
    (1usize..6, 1usize..5).prop_flat_map(|(n, d)| {
        let cells = proptest::collection::vec(
            ((-1e6f64..1e6f64), proptest::bool::weighted(0.75)),
            n * d,
        );
        cells.prop_map(move |cells| {
            let values: Vec<f64> = cells.iter().map(|(v, _)| *v).collect();
            let mask: Vec<bool> = cells.iter().map(|(_, m)| *m).collect();
            MaskedMatrix::new(values, mask, n, d).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bit_exact(m in masked_matrix_strategy()) {
        let dir = std::env::temp_dir().join(format!("mmdmiss-prop-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("rt-{:x}.csv", rand::random::<u64>()));
        m.write_csv(&path, "NA").unwrap();
        let back: MaskedMatrix<f64> = load_csv(&path, "NA").unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(back.n(), m.n());
        prop_assert_eq!(back.d(), m.d());
        for i in 0..m.n() {
            for j in 0..m.d() {
                prop_assert_eq!(back.is_observed(i, j), m.is_observed(i, j));
                if m.is_observed(i, j) {
                    prop_assert_eq!(back.value(i, j).to_bits(), m.value(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn partition_counts_rows_with_missing_entries(m in masked_matrix_strategy()) {
        let p = partition_rows(&m);
        let expected = (0..m.n())
            .filter(|&i| (0..m.d()).any(|j| !m.is_observed(i, j)))
            .count();
        prop_assert_eq!(p.m, expected);
        prop_assert_eq!(p.incomplete_rows.len() + p.complete_rows.len(), m.n());
        let mut all: Vec<usize> = p.incomplete_rows.iter().chain(&p.complete_rows).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..m.n()).collect::<Vec<_>>());
    }

    #[test]
    fn kernel_range_and_symmetry(
        x in proptest::collection::vec(-1e3f64..1e3, 1..6),
        shift in proptest::collection::vec(-1e3f64..1e3, 1..6),
        beta in 0.01f64..10.0,
    ) {
        let d = x.len().min(shift.len());
        let x = &x[..d];
        let y: Vec<f64> = x.iter().zip(&shift[..d]).map(|(a, b)| a + b).collect();
        let params = KernelParams::new(beta).unwrap();
        let k = laplacian(x, &y, &params).unwrap();
        let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        // k is in (0, 1] mathematically; exp underflows to exactly 0 beyond
        // about -745, which the positivity check must tolerate
        prop_assert!((0.0..=1.0).contains(&k));
        if beta * dist < 700.0 {
            prop_assert!(k > 0.0);
        }
        let k_rev = laplacian(&y, x, &params).unwrap();
        prop_assert_eq!(k, k_rev);
        if x == y.as_slice() {
            prop_assert_eq!(k, 1.0);
        }
    }

    #[test]
    fn kernel_monotone_in_beta(
        x in -1e3f64..1e3,
        gap in 0.001f64..1e3,
        beta in 0.01f64..5.0,
        factor in 1.01f64..4.0,
    ) {
        let y = x + gap;
        let small = laplacian(&[x], &[y], &KernelParams::new(beta).unwrap()).unwrap();
        let large = laplacian(&[x], &[y], &KernelParams::new(beta * factor).unwrap()).unwrap();
        prop_assert!(large <= small);
    }
}

#[test]
fn incomplete_kernel_dominates_any_imputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let params = KernelParams::new(0.9).unwrap();
    for _ in 0..300 {
        let d = rng.gen_range(1..5);
        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mask_a: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.7)).collect();
        let mask_b: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.7)).collect();
        let m = MaskedMatrix::from_optional_rows(vec![
            a.iter().zip(&mask_a).map(|(&v, &ok)| ok.then_some(v)).collect(),
            b.iter().zip(&mask_b).map(|(&v, &ok)| ok.then_some(v)).collect(),
        ])
        .unwrap();
        let k_star = incomplete_laplacian(m.masked_row(0), m.masked_row(1), &params).unwrap();
        for _ in 0..20 {
            // any dense imputation of both rows
            let fill = |vals: &[f64], mask: &[bool], rng: &mut ChaCha8Rng| -> Vec<f64> {
                vals.iter()
                    .zip(mask)
                    .map(|(&v, &ok)| if ok { v } else { rng.gen_range(-50.0..50.0) })
                    .collect()
            };
            let fa = fill(&a, &mask_a, &mut rng);
            let fb = fill(&b, &mask_b, &mut rng);
            let k = laplacian(&fa, &fb, &params).unwrap();
            assert!(k_star >= k, "incomplete kernel {k_star} below imputed {k}");
        }
    }
}

#[test]
#[allow(clippy::needless_range_loop)] // index ranges transcribe the four-term formulas
fn decomposition_identity_on_artificial_splits() {
    // on complete data the four-term split must reproduce the statistic for
    // any artificial (m1, m2), evaluating each term with actual kernels
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let params = KernelParams::new(1.1).unwrap();
    for _ in 0..50 {
        let n1 = rng.gen_range(2..8);
        let n2 = rng.gen_range(2..8);
        let d = rng.gen_range(1..4);
        let rows = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect()
        };
        let x_rows = rows(&mut rng, n1);
        let y_rows = rows(&mut rng, n2);
        let x = MaskedMatrix::from_rows(x_rows.clone()).unwrap();
        let y = MaskedMatrix::from_rows(y_rows.clone()).unwrap();
        let stat = mmd_u(&x, &y, &params).unwrap();
        let k = |a: &[f64], b: &[f64]| laplacian(a, b, &params).unwrap();
        for m1 in 0..=n1 {
            for m2 in 0..=n2 {
                let c1 = 2.0 / (n1 as f64 * (n1 as f64 - 1.0));
                let c2 = 2.0 / (n2 as f64 * (n2 as f64 - 1.0));
                let c3 = 2.0 / (n1 as f64 * n2 as f64);
                let mut a1 = 0.0;
                for i in 0..m1 {
                    for j in i + 1..m1 {
                        a1 += c1 * k(&x_rows[i], &x_rows[j]);
                    }
                }
                for i in 0..m2 {
                    for j in i + 1..m2 {
                        a1 += c2 * k(&y_rows[i], &y_rows[j]);
                    }
                }
                for i in 0..m1 {
                    for j in 0..m2 {
                        a1 -= c3 * k(&x_rows[i], &y_rows[j]);
                    }
                }
                let mut a2 = 0.0;
                for i in m1..n1 {
                    for j in i + 1..n1 {
                        a2 += c1 * k(&x_rows[i], &x_rows[j]);
                    }
                }
                for i in m2..n2 {
                    for j in i + 1..n2 {
                        a2 += c2 * k(&y_rows[i], &y_rows[j]);
                    }
                }
                for i in m1..n1 {
                    for j in m2..n2 {
                        a2 -= c3 * k(&x_rows[i], &y_rows[j]);
                    }
                }
                let mut a3 = 0.0;
                for i in 0..m1 {
                    for j in m1..n1 {
                        a3 += c1 * k(&x_rows[i], &x_rows[j]);
                    }
                }
                for i in 0..m1 {
                    for j in m2..n2 {
                        a3 -= c3 * k(&x_rows[i], &y_rows[j]);
                    }
                }
                let mut a4 = 0.0;
                for i in 0..m2 {
                    for j in m2..n2 {
                        a4 += c2 * k(&y_rows[i], &y_rows[j]);
                    }
                }
                for i in m1..n1 {
                    for j in 0..m2 {
                        a4 -= c3 * k(&x_rows[i], &y_rows[j]);
                    }
                }
                let total = a1 + a2 + a3 + a4;
                assert!(
                    (total - stat).abs() <= 1e-10,
                    "split ({m1}, {m2}): {total} vs {stat}"
                );
            }
        }
    }
}

#[test]
fn estimator_invariant_to_within_group_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let params = KernelParams::new(0.7).unwrap();
    let rows: Vec<Vec<f64>> = (0..7).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
    let rows_y: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
    let x = MaskedMatrix::from_rows(rows.clone()).unwrap();
    let y = MaskedMatrix::from_rows(rows_y.clone()).unwrap();
    let base = mmd_u(&x, &y, &params).unwrap();
    for _ in 0..10 {
        let mut order_x: Vec<usize> = (0..7).collect();
        let mut order_y: Vec<usize> = (0..6).collect();
        for i in (1..order_x.len()).rev() {
            order_x.swap(i, rng.gen_range(0..=i));
        }
        for i in (1..order_y.len()).rev() {
            order_y.swap(i, rng.gen_range(0..=i));
        }
        let xp = x.filter_rows(&order_x);
        let yp = y.filter_rows(&order_y);
        let stat = mmd_u(&xp, &yp, &params).unwrap();
        assert!((stat - base).abs() < 1e-12);
    }
}

#[test]
fn estimator_fluctuates_around_zero_under_the_null() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let params = KernelParams::new(1.0).unwrap();
    let mut stats = Vec::new();
    for _ in 0..200 {
        let draw = |rng: &mut ChaCha8Rng, n: usize| -> MaskedMatrix<f64> {
            MaskedMatrix::from_rows(
                (0..n)
                    .map(|_| {
                        vec![{
                            let u: f64 = rng.gen_range(-1.0f64..1.0);
                            u + rng.gen_range(-1.0..1.0)
                        }]
                    })
                    .collect(),
            )
            .unwrap()
        };
        let x = draw(&mut rng, 40);
        let y = draw(&mut rng, 40);
        stats.push(mmd_u(&x, &y, &params).unwrap());
    }
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    assert!(mean.abs() < 0.01, "null mean {mean}");
    assert!(stats.iter().any(|&s| s > 0.0) && stats.iter().any(|&s| s < 0.0));
}

#[test]
fn baseline_outputs_are_fully_observed_and_preserve_observed_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let n1 = rng.gen_range(2..8);
        let n2 = rng.gen_range(2..8);
        let d = rng.gen_range(1..4);
        let gen = |rng: &mut ChaCha8Rng, n: usize| -> MaskedMatrix<f64> {
            let rows: Vec<Vec<Option<f64>>> = (0..n)
                .map(|_| {
                    (0..d)
                        .map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(-3.0..3.0)))
                        .collect()
                })
                .collect();
            MaskedMatrix::from_optional_rows(rows).unwrap()
        };
        let data = TwoSampleData::new(gen(&mut rng, n1), gen(&mut rng, n2)).unwrap();
        if let Ok(out) = mmd_miss::mean_impute(&data) {
            assert!(out.x.is_fully_observed() && out.y.is_fully_observed());
            for i in 0..data.x.n() {
                for j in 0..d {
                    if data.x.is_observed(i, j) {
                        assert_eq!(out.x.value(i, j), data.x.value(i, j));
                    }
                }
            }
        }
        if let Ok(out) = mmd_miss::hot_deck_impute(&data, 5) {
            assert!(out.x.is_fully_observed() && out.y.is_fully_observed());
        }
        let deleted = mmd_miss::case_delete(&data);
        assert!(deleted.x.is_fully_observed() && deleted.y.is_fully_observed());
        assert!(deleted.x.n() <= data.x.n());
    }
}

#[test]
fn exact_test_is_calibrated_under_the_null() {
    // rejection rate over 500 null repetitions stays in the binomial band
    use mmd_miss::simulation::{Mechanism, ScenarioConfig};
    use mmd_miss::MethodId;
    let cfg = ScenarioConfig {
        n1: 50,
        n2: 50,
        d: 1,
        mean_x: 0.0,
        sd_x: 1.0,
        mean_y: 0.0,
        sd_y: 1.0,
        mechanism: Mechanism::MnarUnivariate,
        component_fraction: 0.3,
        projection_threshold: 0.8,
        s_values: vec![0.0],
        reps: 500,
        alpha: 0.05,
        methods: vec![MethodId::PermExact],
        seed: 314,
        b: 100,
    };
    let table = mmd_miss::run_scenario(&cfg).unwrap();
    let rate = table.get(MethodId::PermExact, 0.0).unwrap().rate;
    assert!(
        (0.03..=0.08).contains(&rate),
        "null rejection rate {rate} outside [0.03, 0.08]"
    );
}

#[test]
fn mean_imputation_inflates_type_one_error() {
    // informative missingness at ten percent: imputing group means shifts
    // both samples toward each other's tails and the null gets rejected in
    // more than half of the repetitions
    use mmd_miss::simulation::{Mechanism, ScenarioConfig};
    use mmd_miss::MethodId;
    let cfg = ScenarioConfig {
        n1: 500,
        n2: 500,
        d: 1,
        mean_x: 0.0,
        sd_x: 1.0,
        mean_y: 0.0,
        sd_y: 1.0,
        mechanism: Mechanism::MnarUnivariate,
        component_fraction: 0.3,
        projection_threshold: 0.8,
        s_values: vec![0.10],
        reps: 100,
        alpha: 0.05,
        methods: vec![MethodId::MeanImpute],
        seed: 217,
        b: 100,
    };
    let table = mmd_miss::run_scenario(&cfg).unwrap();
    let rate = table.get(MethodId::MeanImpute, 0.10).unwrap().rate;
    assert!(rate > 0.5, "mean-imputation null rejection {rate} <= 0.5");
}

#[test]
fn case_deletion_shifts_the_retained_mean_upward() {
    use mmd_miss::simulation::{apply_mnar_univariate, gen_gaussian};
    let x: MaskedMatrix<f64> = gen_gaussian(400, 1, 0.0, 5);
    let y: MaskedMatrix<f64> = gen_gaussian(400, 1, 0.0, 6);
    let data = apply_mnar_univariate(&x, &y, 0.10, 7).unwrap();
    let full_mean: f64 = (0..x.n()).map(|i| x.value(i, 0)).sum::<f64>() / x.n() as f64;
    let deleted = mmd_miss::case_delete(&data);
    let kept_mean: f64 =
        (0..deleted.x.n()).map(|i| deleted.x.value(i, 0)).sum::<f64>() / deleted.x.n() as f64;
    assert!(
        kept_mean > full_mean,
        "dropping negative-only values must raise the mean: {kept_mean} vs {full_mean}"
    );
}

#[test]
fn all_methods_agree_without_missing_data() {
    use mmd_miss::simulation::{Mechanism, ScenarioConfig};
    use mmd_miss::MethodId;
    let cfg = ScenarioConfig {
        n1: 20,
        n2: 20,
        d: 1,
        mean_x: 0.0,
        sd_x: 1.0,
        mean_y: 0.7,
        sd_y: 1.0,
        mechanism: Mechanism::MnarUnivariate,
        component_fraction: 0.3,
        projection_threshold: 0.8,
        s_values: vec![0.0],
        reps: 25,
        alpha: 0.05,
        methods: vec![
            MethodId::PermBound,
            MethodId::PermExact,
            MethodId::CaseDeletion,
            MethodId::MeanImpute,
            MethodId::HotDeck,
        ],
        seed: 99,
        b: 60,
    };
    let table = mmd_miss::run_scenario(&cfg).unwrap();
    let reference = table.get(MethodId::PermBound, 0.0).unwrap().rate;
    for m in [
        MethodId::PermExact,
        MethodId::CaseDeletion,
        MethodId::MeanImpute,
        MethodId::HotDeck,
    ] {
        assert_eq!(
            table.get(m, 0.0).unwrap().rate,
            reference,
            "{m} disagrees with the bound method on complete data"
        );
    }
}

#[test]
fn bound_outcome_method_tags_and_interval_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let rows: Vec<Vec<Option<f64>>> = (0..10)
        .map(|i| vec![(i != 3).then(|| rng.gen_range(-2.0..2.0))])
        .collect();
    let x = MaskedMatrix::from_optional_rows(rows).unwrap();
    let y = MaskedMatrix::from_rows((0..10).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect())
        .unwrap();
    let data = TwoSampleData::new(x, y).unwrap();
    let pooled = vstack(&data.x, &data.y).unwrap();
    let params = mmd_miss::median_heuristic(&pooled).unwrap();
    let plan = mmd_miss::make_plan(20, 50, 3).unwrap();
    let out = mmd_miss::permutation_p_bound(&data, &params, &plan, 0.05).unwrap();
    assert_eq!(out.method, TestMethod::PermutationBound);
    assert!(out.diagnostics.stat_bounds.lower <= out.diagnostics.stat_bounds.upper);
    assert_eq!(out.diagnostics.permutations, Some(50));
    assert!(out.p_upper > 0.0 && out.p_upper <= 1.0);
    assert_eq!(out.reject, out.p_upper <= 0.05);
}
