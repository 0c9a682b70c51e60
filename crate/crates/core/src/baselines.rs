//! The three standard missing-data pipelines used for comparison: case
//! deletion, mean imputation and hot deck imputation, each followed by the
//! exact MMD permutation test on the treated data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{vstack, MaskedMatrix, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::Scalar;
use crate::inference::{make_plan, permutation_p_exact, PermutationPlan, TestOutcome};
use crate::kernel::median_heuristic;
use crate::mmd::check_sample_sizes;
use crate::simulation::derive_seed;

/// Which pipeline to apply before the standard test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    CaseDeletion,
    MeanImpute,
    HotDeck,
}

/// A baseline pipeline plus the seed consumed by hot deck draws.
#[derive(Clone, Copy, Debug)]
pub struct BaselineMethod {
    pub kind: BaselineKind,
    pub seed: u64,
}

/// Drops every row that is not fully observed, preserving order.
/// The result may have fewer than two rows per sample; tests fail later
/// with a sample-size error in that case.
pub fn case_delete<F: Scalar>(data: &TwoSampleData<F>) -> TwoSampleData<F> {
    let keep = |m: &MaskedMatrix<F>| -> MaskedMatrix<F> {
        let rows: Vec<usize> = (0..m.n()).filter(|&i| m.is_row_complete(i)).collect();
        m.filter_rows(&rows)
    };
    TwoSampleData {
        x: keep(&data.x),
        y: keep(&data.y),
    }
}

/// Replaces missing values by means of observed donors: the group's observed
/// values for univariate data, the row's observed components otherwise.
/// Observed entries are never changed.
pub fn mean_impute<F: Scalar>(data: &TwoSampleData<F>) -> Result<TwoSampleData<F>> {
    Ok(TwoSampleData {
        x: mean_impute_matrix(&data.x)?,
        y: mean_impute_matrix(&data.y)?,
    })
}

fn mean_impute_matrix<F: Scalar>(m: &MaskedMatrix<F>) -> Result<MaskedMatrix<F>> {
    if m.is_fully_observed() {
        return Ok(m.clone());
    }
    let mut rows: Vec<Vec<Option<F>>> = Vec::with_capacity(m.n());
    if m.d() == 1 {
        let observed: Vec<F> = (0..m.n())
            .filter(|&i| m.is_observed(i, 0))
            .map(|i| m.value(i, 0))
            .collect();
        let mean = if observed.is_empty() {
            let first_missing = (0..m.n()).find(|&i| !m.is_observed(i, 0)).unwrap_or(0);
            return Err(Error::Impute {
                row: first_missing + 1,
            });
        } else {
            mean_of(&observed)
        };
        for i in 0..m.n() {
            let v = if m.is_observed(i, 0) {
                m.value(i, 0)
            } else {
                mean
            };
            rows.push(vec![Some(v)]);
        }
    } else {
        for i in 0..m.n() {
            let observed: Vec<F> = (0..m.d())
                .filter(|&j| m.is_observed(i, j))
                .map(|j| m.value(i, j))
                .collect();
            if observed.is_empty() {
                return Err(Error::Impute { row: i + 1 });
            }
            let mean = mean_of(&observed);
            rows.push(
                (0..m.d())
                    .map(|j| {
                        Some(if m.is_observed(i, j) {
                            m.value(i, j)
                        } else {
                            mean
                        })
                    })
                    .collect(),
            );
        }
    }
    MaskedMatrix::from_optional_rows(rows)
}

fn mean_of<F: Scalar>(values: &[F]) -> F {
    let mut sum = F::zero();
    for &v in values {
        sum = sum + v;
    }
    sum / F::from_usize_lossy(values.len())
}

/// Replaces missing values by uniform draws with replacement from the donor
/// pool (group's observed values for univariate data, the row's observed
/// components otherwise).
///
/// Each cell consumes its own generator derived from `(seed, group, row,
/// column)`, so the output does not depend on traversal order.
pub fn hot_deck_impute<F: Scalar>(data: &TwoSampleData<F>, seed: u64) -> Result<TwoSampleData<F>> {
    Ok(TwoSampleData {
        x: hot_deck_matrix(&data.x, seed, 0)?,
        y: hot_deck_matrix(&data.y, seed, 1)?,
    })
}

fn hot_deck_matrix<F: Scalar>(
    m: &MaskedMatrix<F>,
    seed: u64,
    group: u64,
) -> Result<MaskedMatrix<F>> {
    if m.is_fully_observed() {
        return Ok(m.clone());
    }
    let group_pool: Vec<F> = if m.d() == 1 {
        (0..m.n())
            .filter(|&i| m.is_observed(i, 0))
            .map(|i| m.value(i, 0))
            .collect()
    } else {
        Vec::new()
    };
    let mut rows: Vec<Vec<Option<F>>> = Vec::with_capacity(m.n());
    for i in 0..m.n() {
        let row_pool: Vec<F> = if m.d() == 1 {
            group_pool.clone()
        } else {
            (0..m.d())
                .filter(|&j| m.is_observed(i, j))
                .map(|j| m.value(i, j))
                .collect()
        };
        let mut row = Vec::with_capacity(m.d());
        for j in 0..m.d() {
            if m.is_observed(i, j) {
                row.push(Some(m.value(i, j)));
            } else {
                if row_pool.is_empty() {
                    return Err(Error::Impute { row: i + 1 });
                }
                let cell_seed = derive_seed(seed, group << 32 | i as u64, j as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
                row.push(Some(row_pool[rng.gen_range(0..row_pool.len())]));
            }
        }
        rows.push(row);
    }
    MaskedMatrix::from_optional_rows(rows)
}

/// Applies the pipeline, recomputes the kernel bandwidth by the median
/// heuristic on the treated data, and runs the exact permutation test.
///
/// Case deletion shrinks the pooled sample, in which case a plan with the
/// same permutation count and seed is re-derived for the treated size.
pub fn run_baseline<F: Scalar>(
    data: &TwoSampleData<F>,
    method: BaselineMethod,
    alpha: F,
    plan: &PermutationPlan,
) -> Result<TestOutcome<F>> {
    let treated = match method.kind {
        BaselineKind::CaseDeletion => case_delete(data),
        BaselineKind::MeanImpute => mean_impute(data)?,
        BaselineKind::HotDeck => hot_deck_impute(data, method.seed)?,
    };
    check_sample_sizes(treated.x.n(), treated.y.n(), 2)?;
    let pooled = vstack(&treated.x, &treated.y)?;
    let params = median_heuristic(&pooled)?;
    let n_total = treated.x.n() + treated.y.n();
    let resized;
    let plan_ref = if plan.n_total() == n_total {
        plan
    } else {
        resized = make_plan(n_total, plan.b(), plan.seed())?;
        &resized
    };
    permutation_p_exact(&treated.x, &treated.y, &params, plan_ref, alpha)
}
