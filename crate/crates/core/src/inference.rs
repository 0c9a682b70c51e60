//! p-value machinery: exact permutation test on complete data, bounded
//! permutation p-value on masked data, and the bounded
//! normality-approximation p-value for large samples in high dimension.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    gap_decays, identity_assignment, labeled_pair_sums, MultivariateBoundEngine,
    UnivariateBoundEngine,
};
use crate::data::{MaskedMatrix, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::{Accumulator, Scalar};
use crate::kernel::{laplacian_unchecked, KernelParams};
use crate::mmd::{check_sample_sizes, constant_c1, constant_c3, naive_bounds_auto, BoundInterval};

/// Which p-value construction produced a [`TestOutcome`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestMethod {
    PermutationBound,
    NormalityBound,
    PermutationExact,
}

/// Supporting numbers reported alongside a test decision.
#[derive(Clone, Debug)]
pub struct Diagnostics<F> {
    /// Interval for the observed statistic (degenerate when computed exactly).
    pub stat_bounds: BoundInterval<F>,
    /// Permutation count, for permutation-based methods.
    pub permutations: Option<usize>,
    /// Variance-proxy upper bound, for the normality method.
    pub v_bar: Option<F>,
    /// Set when the normality approximation runs outside its intended
    /// sample-size/dimension regime.
    pub regime_warning: Option<String>,
}

/// Decision of a two-sample test together with its bounded p-value.
#[derive(Clone, Debug)]
pub struct TestOutcome<F> {
    /// Upper bound of the p-value (exact p-value for complete-data methods).
    pub p_upper: F,
    pub alpha: F,
    /// `p_upper <= alpha`.
    pub reject: bool,
    pub method: TestMethod,
    pub diagnostics: Diagnostics<F>,
}

/// A reproducible batch of uniform random permutations of `{0..n_total-1}`.
#[derive(Clone, Debug)]
pub struct PermutationPlan {
    b: usize,
    seed: u64,
    n_total: usize,
    sigmas: Vec<Vec<u32>>,
}

impl PermutationPlan {
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn sigmas(&self) -> &[Vec<u32>] {
        &self.sigmas
    }
}

/// Draws `b` independent uniform permutations via seeded Fisher-Yates.
/// The same `(n_total, b, seed)` always yields the same plan.
pub fn make_plan(n_total: usize, b: usize, seed: u64) -> Result<PermutationPlan> {
    if b < 1 {
        return Err(Error::Config(format!(
            "permutation count must be at least 1, got {b}"
        )));
    }
    if n_total < 2 {
        return Err(Error::Config(format!(
            "permutation plan needs at least 2 pooled rows, got {n_total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigmas = Vec::with_capacity(b);
    for _ in 0..b {
        let mut sigma: Vec<u32> = (0..n_total as u32).collect();
        sigma.shuffle(&mut rng);
        sigmas.push(sigma);
    }
    Ok(PermutationPlan {
        b,
        seed,
        n_total,
        sigmas,
    })
}

fn check_alpha<F: Scalar>(alpha: F) -> Result<()> {
    if !(alpha > F::zero() && alpha < F::one()) {
        return Err(Error::Config(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `(1 + #{upper_i >= observed_lower}) / (B + 1)`, the permutation p-value
/// bound. Monotone nonincreasing in `observed_lower`.
pub(crate) fn p_bar_from_bounds<F: Scalar>(observed_lower: F, permuted_uppers: &[F]) -> F {
    let hits = permuted_uppers
        .iter()
        .filter(|&&u| u >= observed_lower)
        .count();
    p_from_hits(hits, permuted_uppers.len())
}

fn p_from_hits<F: Scalar>(hits: usize, b: usize) -> F {
    (F::one() + F::from_usize_lossy(hits)) / (F::from_usize_lossy(b) + F::one())
}

// ---------------------------------------------------------------------------
// Exact permutation test (complete data)
// ---------------------------------------------------------------------------

/// Split-independent structures for evaluating the exact statistic on every
/// permuted split of the pooled rows.
enum ExactEngine<F> {
    /// Univariate: pooled scalars sorted once, each split costs `O(N)`.
    Sorted {
        sorted_ids: Vec<u32>,
        decays: Vec<F>,
        n1: usize,
        n2: usize,
    },
    /// Multivariate: one pooled Gram matrix, each split costs `O(n1^2)`
    /// lookups plus row-sum algebra.
    Gram {
        gram: Vec<F>,
        rowsum: Vec<F>,
        total: F,
        n: usize,
        n1: usize,
        n2: usize,
    },
}

impl<F: Scalar> ExactEngine<F> {
    fn new(x: &MaskedMatrix<F>, y: &MaskedMatrix<F>, beta: F) -> Self {
        let n1 = x.n();
        let n2 = y.n();
        let n = n1 + n2;
        if x.d() == 1 {
            let mut sorted: Vec<(F, u32)> = (0..n)
                .map(|p| {
                    let v = if p < n1 {
                        x.value(p, 0)
                    } else {
                        y.value(p - n1, 0)
                    };
                    (v, p as u32)
                })
                .collect();
            sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite value"));
            let decays = gap_decays(&sorted, beta);
            let sorted_ids = sorted.iter().map(|&(_, p)| p).collect();
            ExactEngine::Sorted {
                sorted_ids,
                decays,
                n1,
                n2,
            }
        } else {
            let row = |p: usize| if p < n1 { x.row(p) } else { y.row(p - n1) };
            let mut gram = vec![F::one(); n * n];
            let parallel = n * x.d() > 200_000;
            let fill = |a: usize, out: &mut [F]| {
                let ra = row(a);
                for (b, slot) in out.iter_mut().enumerate() {
                    if a != b {
                        *slot = laplacian_unchecked(ra, row(b), beta);
                    }
                }
            };
            if parallel {
                gram.par_chunks_mut(n).enumerate().for_each(|(a, r)| fill(a, r));
            } else {
                for (a, r) in gram.chunks_mut(n).enumerate() {
                    fill(a, r);
                }
            }
            let rowsum: Vec<F> = gram
                .chunks(n)
                .map(|r| {
                    let mut acc = Accumulator::new();
                    for &v in r {
                        acc.add(v);
                    }
                    acc.total()
                })
                .collect();
            let mut total_acc = Accumulator::new();
            for &v in &rowsum {
                total_acc.add(v);
            }
            ExactEngine::Gram {
                gram,
                rowsum,
                total: total_acc.total(),
                n,
                n1,
                n2,
            }
        }
    }

    /// Exact statistic for the split assigning `x_indices` to the first
    /// sample and the rest to the second.
    fn stat(&self, x_indices: &[u32]) -> F {
        match self {
            ExactEngine::Sorted {
                sorted_ids,
                decays,
                n1,
                n2,
            } => {
                let mut in_x = vec![false; n1 + n2];
                for &i in x_indices {
                    in_x[i as usize] = true;
                }
                let (sxx, syy, sxy) = labeled_pair_sums(sorted_ids, decays, &in_x);
                constant_c1::<F>(*n1) * sxx + constant_c1::<F>(*n2) * syy
                    - constant_c3::<F>(*n1, *n2) * sxy
            }
            ExactEngine::Gram {
                gram,
                rowsum,
                total,
                n,
                n1,
                n2,
            } => {
                let mut pair = Accumulator::new();
                for (a, &i) in x_indices.iter().enumerate() {
                    let row = &gram[(i as usize) * n..];
                    for &j in &x_indices[a + 1..] {
                        pair.add(row[j as usize]);
                    }
                }
                let mut xrows = Accumulator::new();
                for &i in x_indices {
                    xrows.add(rowsum[i as usize]);
                }
                let n1f = F::from_usize_lossy(*n1);
                let n2f = F::from_usize_lossy(*n2);
                let two = F::from_f64_lossy(2.0);
                let sxx_incl = two * pair.total() + n1f;
                let sx_rows = xrows.total();
                let sxy = sx_rows - sxx_incl;
                let syy_incl = *total - two * sx_rows + sxx_incl;
                (sxx_incl - n1f) / (n1f * (n1f - F::one()))
                    + (syy_incl - n2f) / (n2f * (n2f - F::one()))
                    - two * sxy / (n1f * n2f)
            }
        }
    }
}

/// Exact permutation p-value on fully observed data.
///
/// `p = (1 + #{stat(sigma_i) >= stat(observed)}) / (B + 1)` with an
/// inclusive indicator.
pub fn permutation_p_exact<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    params: &KernelParams<F>,
    plan: &PermutationPlan,
    alpha: F,
) -> Result<TestOutcome<F>> {
    check_alpha(alpha)?;
    if x.d() != y.d() {
        return Err(Error::Dim {
            left: x.d(),
            right: y.d(),
        });
    }
    let missing = x.n_missing_cells() + y.n_missing_cells();
    if missing > 0 {
        return Err(Error::IncompleteData { missing });
    }
    let n1 = x.n();
    let n2 = y.n();
    check_sample_sizes(n1, n2, 2)?;
    if plan.n_total != n1 + n2 {
        return Err(Error::Config(format!(
            "plan built for {} pooled rows, data has {}",
            plan.n_total,
            n1 + n2
        )));
    }

    let engine = ExactEngine::new(x, y, params.beta());
    let identity: Vec<u32> = (0..n1 as u32).collect();
    let observed = engine.stat(&identity);
    let permuted: Vec<F> = plan
        .sigmas
        .par_iter()
        .map(|sigma| engine.stat(&sigma[..n1]))
        .collect();
    let hits = permuted.iter().filter(|&&s| s >= observed).count();
    let p = p_from_hits(hits, plan.b);
    Ok(TestOutcome {
        p_upper: p,
        alpha,
        reject: p <= alpha,
        method: TestMethod::PermutationExact,
        diagnostics: Diagnostics {
            stat_bounds: BoundInterval::degenerate(observed),
            permutations: Some(plan.b),
            v_bar: None,
            regime_warning: None,
        },
    })
}

// ---------------------------------------------------------------------------
// Bounded permutation test (masked data)
// ---------------------------------------------------------------------------

enum BoundEngine<F> {
    Uni(UnivariateBoundEngine<F>),
    Multi(MultivariateBoundEngine<F>),
    /// No pooled row is fully observed: every split gets the same naive
    /// interval, so the bound p-value is 1.
    Naive(BoundInterval<F>),
}

impl<F: Scalar> BoundEngine<F> {
    fn new(data: &TwoSampleData<F>, params: &KernelParams<F>) -> Result<Self> {
        if data.d() == 1 {
            Ok(BoundEngine::Uni(UnivariateBoundEngine::new(data, params)?))
        } else {
            match MultivariateBoundEngine::new(data, params) {
                Ok(e) => Ok(BoundEngine::Multi(e)),
                Err(Error::NoCompleteRows) => {
                    Ok(BoundEngine::Naive(naive_bounds_auto(data, params)?))
                }
                Err(e) => Err(e),
            }
        }
    }

    fn interval(&self, in_x: &[bool]) -> BoundInterval<F> {
        match self {
            BoundEngine::Uni(e) => e.interval_for(in_x),
            BoundEngine::Multi(e) => e.interval_for(in_x),
            BoundEngine::Naive(iv) => *iv,
        }
    }
}

/// Permutation p-value upper bound on arbitrarily masked data.
///
/// Each permuted split carries its rows' masks; the indicator compares the
/// permuted statistic's upper bound against the observed statistic's lower
/// bound, so the result can only exceed the unobservable exact p-value. On
/// fully observed data this reduces bit for bit to [`permutation_p_exact`].
pub fn permutation_p_bound<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
    plan: &PermutationPlan,
    alpha: F,
) -> Result<TestOutcome<F>> {
    check_alpha(alpha)?;
    let n1 = data.x.n();
    let n2 = data.y.n();
    check_sample_sizes(n1, n2, 2)?;
    if plan.n_total != n1 + n2 {
        return Err(Error::Config(format!(
            "plan built for {} pooled rows, data has {}",
            plan.n_total,
            n1 + n2
        )));
    }
    if data.is_fully_observed() {
        let mut outcome = permutation_p_exact(&data.x, &data.y, params, plan, alpha)?;
        outcome.method = TestMethod::PermutationBound;
        return Ok(outcome);
    }

    let engine = BoundEngine::new(data, params)?;
    let observed = engine.interval(&identity_assignment(n1, n2));
    let uppers: Vec<F> = plan
        .sigmas
        .par_iter()
        .map(|sigma| {
            let mut in_x = vec![false; n1 + n2];
            for &i in &sigma[..n1] {
                in_x[i as usize] = true;
            }
            engine.interval(&in_x).upper
        })
        .collect();
    let p = p_bar_from_bounds(observed.lower, &uppers);
    Ok(TestOutcome {
        p_upper: p,
        alpha,
        reject: p <= alpha,
        method: TestMethod::PermutationBound,
        diagnostics: Diagnostics {
            stat_bounds: observed,
            permutations: Some(plan.b),
            v_bar: None,
            regime_warning: None,
        },
    })
}

// ---------------------------------------------------------------------------
// Bounded normality approximation
// ---------------------------------------------------------------------------

/// Ingredients of the studentized-statistic lower bound.
#[derive(Clone, Copy, Debug)]
pub struct StudentizedBound<F> {
    /// Lower bound of the statistic over all imputations.
    pub stat_lower: F,
    /// Upper bound of the variance proxy.
    pub v_bar: F,
    /// `2/(n(n-1)) + 4/(nm) + 2/(m(m-1))`.
    pub c_nm: F,
}

/// Standard normal CDF via `erfc`; the complementary form keeps the upper
/// tail accurate for large arguments.
pub fn normal_cdf<F: Scalar>(x: F) -> F {
    let half = F::from_f64_lossy(0.5);
    let inv_sqrt2 = F::from_f64_lossy(std::f64::consts::FRAC_1_SQRT_2);
    half * (-x * inv_sqrt2).erfc()
}

/// Upper bound of the variance proxy of the studentized statistic.
///
/// Builds an elementwise upper Gram matrix from the incomplete kernel and an
/// elementwise lower one that zeroes every off-diagonal entry touching an
/// incomplete row, then evaluates the centered second-moment formula on the
/// pair. Both matrices use diagonal 1, the Laplacian self-kernel value.
pub fn variance_bound<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<StudentizedBound<F>> {
    let stat_lower = crate::bounds::mmd_bounds(data, params)?.lower;
    let v_bar = v_bar_value(data, params)?;
    Ok(StudentizedBound {
        stat_lower,
        v_bar,
        c_nm: c_nm_constant(data.x.n(), data.y.n()),
    })
}

fn c_nm_constant<F: Scalar>(n: usize, m: usize) -> F {
    let two = F::from_f64_lossy(2.0);
    let four = F::from_f64_lossy(4.0);
    let nf = F::from_usize_lossy(n);
    let mf = F::from_usize_lossy(m);
    two / (nf * (nf - F::one())) + four / (nf * mf) + two / (mf * (mf - F::one()))
}

fn v_bar_value<F: Scalar>(data: &TwoSampleData<F>, params: &KernelParams<F>) -> Result<F> {
    let n1 = data.x.n();
    let n2 = data.y.n();
    check_sample_sizes(n1, n2, 2)?;
    let n = n1 + n2;
    let beta = params.beta();
    let row = |p: usize| {
        if p < n1 {
            data.x.masked_row(p)
        } else {
            data.y.masked_row(p - n1)
        }
    };
    let complete: Vec<bool> = (0..n).map(|p| row(p).is_complete()).collect();
    let any_observed = (0..n).any(|p| row(p).mask.iter().any(|&m| m));
    if !any_observed {
        return Err(Error::NoCompleteRows);
    }

    // Upper Gram from the incomplete kernel, diagonal 1.
    let mut a_bar = vec![F::one(); n * n];
    let parallel = n * data.d() > 200_000;
    let fill = |s: usize, out: &mut [F]| {
        let rs = row(s);
        for (t, slot) in out.iter_mut().enumerate() {
            if s != t {
                *slot =
                    crate::kernel::incomplete_laplacian_unchecked(rs, row(t), beta);
            }
        }
    };
    if parallel {
        a_bar.par_chunks_mut(n).enumerate().for_each(|(s, r)| fill(s, r));
    } else {
        for (s, r) in a_bar.chunks_mut(n).enumerate() {
            fill(s, r);
        }
    }

    // Lower Gram: zero any off-diagonal entry whose row or column is an
    // incomplete sample; elsewhere both rows are complete so the incomplete
    // kernel already equals the exact kernel.
    let n_f = F::from_usize_lossy(n);
    let nm2 = F::from_usize_lossy(n - 2);
    let mut low_means = vec![F::zero(); n];
    for (t, mean_slot) in low_means.iter_mut().enumerate() {
        let mut acc = Accumulator::new();
        for s in 0..n {
            let v = if s == t {
                F::one()
            } else if complete[s] && complete[t] {
                a_bar[s * n + t]
            } else {
                F::zero()
            };
            acc.add(v);
        }
        *mean_slot = acc.total() / nm2;
    }
    let mut grand_acc = Accumulator::new();
    for &v in &a_bar {
        grand_acc.add(v);
    }
    let grand = grand_acc.total() / ((n_f - F::one()) * nm2);

    let mut square_acc = Accumulator::new();
    for s in 0..n {
        for t in 0..n {
            if s != t {
                let centered = a_bar[s * n + t] - low_means[t] - low_means[s] + grand;
                square_acc.add(centered * centered);
            }
        }
    }
    let nm3 = F::from_usize_lossy(n - 3);
    Ok(square_acc.total() / (n_f * nm3) - F::one() / ((n_f - F::one()) * nm3))
}

/// p-value upper bound from the normality approximation of the studentized
/// statistic.
///
/// When the statistic's lower bound is negative the test cannot reject and
/// the bound is 1; otherwise the lower-bounded studentized value feeds the
/// standard normal tail. Intended for `n1, n2 >= 25` and `d >= 50`; outside
/// that regime the outcome carries a warning instead of an error.
pub fn normality_p_bound<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
    alpha: F,
) -> Result<TestOutcome<F>> {
    check_alpha(alpha)?;
    let interval = crate::bounds::mmd_bounds(data, params)?;
    let v_bar = v_bar_value(data, params)?;
    let c_nm = c_nm_constant::<F>(data.x.n(), data.y.n());
    let regime_warning = if data.x.n() < 25 || data.y.n() < 25 || data.d() < 50 {
        Some(format!(
            "normality approximation outside its intended regime \
             (n1 = {}, n2 = {}, d = {}; suggested n1, n2 >= 25 and d >= 50)",
            data.x.n(),
            data.y.n(),
            data.d()
        ))
    } else {
        None
    };

    let p = if interval.lower < F::zero() {
        F::one()
    } else {
        if v_bar <= F::zero() {
            return Err(Error::DegenerateVariance {
                value: v_bar.as_f64(),
            });
        }
        F::one() - normal_cdf(interval.lower / (c_nm * v_bar).sqrt())
    };
    Ok(TestOutcome {
        p_upper: p,
        alpha,
        reject: p <= alpha,
        method: TestMethod::NormalityBound,
        diagnostics: Diagnostics {
            stat_bounds: interval,
            permutations: None,
            v_bar: Some(v_bar),
            regime_warning,
        },
    })
}
