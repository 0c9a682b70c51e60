//! Exact unbiased MMD statistic and its decomposition into fully observed
//! and missing-data terms.

use crate::bounds;
use crate::data::{partition_rows, MaskedMatrix, RowPartition, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::{Accumulator, Scalar};
use crate::kernel::{laplacian_unchecked, KernelParams};

/// Closed interval `[lower, upper]` bounding a statistic that cannot be
/// computed exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInterval<F> {
    pub lower: F,
    pub upper: F,
}

impl<F: Scalar> BoundInterval<F> {
    pub fn new(lower: F, upper: F) -> Self {
        debug_assert!(
            lower <= upper + F::from_f64_lossy(1e-12),
            "inverted interval: [{lower}, {upper}]"
        );
        Self { lower, upper }
    }

    pub fn degenerate(value: F) -> Self {
        Self {
            lower: value,
            upper: value,
        }
    }

    pub fn width(&self) -> F {
        self.upper - self.lower
    }

    /// Whether `value` lies inside the interval widened by `tol` on each side.
    pub fn contains(&self, value: F, tol: F) -> bool {
        value >= self.lower - tol && value <= self.upper + tol
    }

    /// Whether `self` is contained in `outer`, allowing `tol` slack.
    pub fn is_subset_of(&self, outer: &Self, tol: F) -> bool {
        self.lower >= outer.lower - tol && self.upper <= outer.upper + tol
    }

    /// How far `value` escapes the interval (zero when inside).
    pub fn overshoot(&self, value: F) -> F {
        (self.lower - value).max(value - self.upper).max(F::zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            lower: self.lower + other.lower,
            upper: self.upper + other.upper,
        }
    }
}

/// The constants and terms of the four-way split of the statistic into
/// incomplete-only (`a1`), complete-only (`a2`) and mixed (`a3`, `a4`) parts.
///
/// `a2` is computable exactly; the other three are bound intervals.
#[derive(Clone, Debug)]
pub struct DecompTerms<F> {
    pub c1: F,
    pub c2: F,
    pub c3: F,
    pub a2: F,
    pub a1_bounds: BoundInterval<F>,
    pub a3_bounds: BoundInterval<F>,
    pub a4_bounds: BoundInterval<F>,
}

impl<F: Scalar> DecompTerms<F> {
    /// Interval for the full statistic: `a2` plus the three bound terms.
    pub fn total(&self) -> BoundInterval<F> {
        BoundInterval::new(
            self.a2 + self.a1_bounds.lower + self.a3_bounds.lower + self.a4_bounds.lower,
            self.a2 + self.a1_bounds.upper + self.a3_bounds.upper + self.a4_bounds.upper,
        )
    }
}

pub(crate) fn check_sample_sizes(n1: usize, n2: usize, required: usize) -> Result<()> {
    if n1 < required || n2 < required {
        return Err(Error::SampleSize { required, n1, n2 });
    }
    Ok(())
}

/// Unordered pairwise kernel sums used by the unbiased estimator:
/// within-`x` pairs, within-`y` pairs and cross pairs, restricted to the
/// given row indices. Compensated accumulation, row-major order.
pub(crate) fn pair_sums<F: Scalar>(
    x: &MaskedMatrix<F>,
    x_rows: &[usize],
    y: &MaskedMatrix<F>,
    y_rows: &[usize],
    beta: F,
) -> (F, F, F) {
    let mut sxx = Accumulator::new();
    for (a, &i) in x_rows.iter().enumerate() {
        let ri = x.row(i);
        for &j in &x_rows[a + 1..] {
            sxx.add(laplacian_unchecked(ri, x.row(j), beta));
        }
    }
    let mut syy = Accumulator::new();
    for (a, &i) in y_rows.iter().enumerate() {
        let ri = y.row(i);
        for &j in &y_rows[a + 1..] {
            syy.add(laplacian_unchecked(ri, y.row(j), beta));
        }
    }
    let mut sxy = Accumulator::new();
    for &i in x_rows {
        let ri = x.row(i);
        for &j in y_rows {
            sxy.add(laplacian_unchecked(ri, y.row(j), beta));
        }
    }
    (sxx.total(), syy.total(), sxy.total())
}

/// The estimator assembled from unordered pair sums with the full-sample
/// constants. Shared by [`mmd_u`], the complete-only term of the
/// decomposition and the degenerate (no missing data) code paths, so those
/// agree bit for bit on fully observed data.
pub(crate) fn mmd_u_over_rows<F: Scalar>(
    x: &MaskedMatrix<F>,
    x_rows: &[usize],
    y: &MaskedMatrix<F>,
    y_rows: &[usize],
    n1: usize,
    n2: usize,
    beta: F,
) -> F {
    let (sxx, syy, sxy) = pair_sums(x, x_rows, y, y_rows, beta);
    let c1 = constant_c1::<F>(n1);
    let c2 = constant_c1::<F>(n2);
    let c3 = constant_c3::<F>(n1, n2);
    c1 * sxx + c2 * syy - c3 * sxy
}

#[inline]
pub(crate) fn constant_c1<F: Scalar>(n: usize) -> F {
    F::from_f64_lossy(2.0) / (F::from_usize_lossy(n) * F::from_usize_lossy(n - 1))
}

#[inline]
pub(crate) fn constant_c3<F: Scalar>(n1: usize, n2: usize) -> F {
    F::from_f64_lossy(2.0) / (F::from_usize_lossy(n1) * F::from_usize_lossy(n2))
}

/// Unbiased MMD^2 estimate with the Laplacian kernel on fully observed data.
///
/// `O(d (n1 + n2)^2)` time. Fails on masked input, mismatched dimensions or
/// samples with fewer than two rows.
pub fn mmd_u<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    params: &KernelParams<F>,
) -> Result<F> {
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
    check_sample_sizes(x.n(), y.n(), 2)?;
    let x_rows: Vec<usize> = (0..x.n()).collect();
    let y_rows: Vec<usize> = (0..y.n()).collect();
    Ok(mmd_u_over_rows(
        x,
        &x_rows,
        y,
        &y_rows,
        x.n(),
        y.n(),
        params.beta(),
    ))
}

/// Splits the statistic into the computable complete-only term and bound
/// intervals for the three terms touched by missing rows.
///
/// On fully observed data the intervals are `[0, 0]` and `a2` equals
/// [`mmd_u`] bit for bit.
pub fn decompose<F: Scalar>(
    data: &TwoSampleData<F>,
    px: &RowPartition,
    py: &RowPartition,
    params: &KernelParams<F>,
) -> Result<DecompTerms<F>> {
    let n1 = data.x.n();
    let n2 = data.y.n();
    check_sample_sizes(n1, n2, 2)?;
    let c1 = constant_c1::<F>(n1);
    let c2 = constant_c1::<F>(n2);
    let c3 = constant_c3::<F>(n1, n2);

    if px.m == 0 && py.m == 0 {
        let a2 = mmd_u_over_rows(
            &data.x,
            &px.complete_rows,
            &data.y,
            &py.complete_rows,
            n1,
            n2,
            params.beta(),
        );
        let zero = BoundInterval::degenerate(F::zero());
        return Ok(DecompTerms {
            c1,
            c2,
            c3,
            a2,
            a1_bounds: zero,
            a3_bounds: zero,
            a4_bounds: zero,
        });
    }

    let (a2, a1_bounds, a3_bounds, a4_bounds) = if data.d() == 1 {
        bounds::univariate_terms(data, params)?
    } else {
        bounds::multivariate_terms(data, params)?
    };
    Ok(DecompTerms {
        c1,
        c2,
        c3,
        a2,
        a1_bounds,
        a3_bounds,
        a4_bounds,
    })
}

/// The conservative 0/1 kernel-substitution interval.
///
/// Every kernel term involving an incomplete row is replaced by its crudest
/// bound: 0 in the positive within-sample sums and 1 in the subtracted cross
/// sum for the lower end, and symmetrically for the upper end.
pub fn naive_bounds<F: Scalar>(
    data: &TwoSampleData<F>,
    px: &RowPartition,
    py: &RowPartition,
    params: &KernelParams<F>,
) -> Result<BoundInterval<F>> {
    let n1 = data.x.n();
    let n2 = data.y.n();
    check_sample_sizes(n1, n2, 2)?;
    let a2 = mmd_u_over_rows(
        &data.x,
        &px.complete_rows,
        &data.y,
        &py.complete_rows,
        n1,
        n2,
        params.beta(),
    );
    if px.m == 0 && py.m == 0 {
        return Ok(BoundInterval::degenerate(a2));
    }
    let cx = px.complete_rows.len();
    let cy = py.complete_rows.len();
    let xx_missing = n1 * (n1 - 1) / 2 - cx * cx.saturating_sub(1) / 2;
    let yy_missing = n2 * (n2 - 1) / 2 - cy * cy.saturating_sub(1) / 2;
    let xy_missing = n1 * n2 - cx * cy;
    let c1 = constant_c1::<F>(n1);
    let c2 = constant_c1::<F>(n2);
    let c3 = constant_c3::<F>(n1, n2);
    let lower = a2 - c3 * F::from_usize_lossy(xy_missing);
    let upper =
        a2 + c1 * F::from_usize_lossy(xx_missing) + c2 * F::from_usize_lossy(yy_missing);
    Ok(BoundInterval::new(lower, upper))
}

/// [`naive_bounds`] with the partitions derived internally.
pub fn naive_bounds_auto<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<BoundInterval<F>> {
    let px = partition_rows(&data.x);
    let py = partition_rows(&data.y);
    naive_bounds(data, &px, &py, params)
}
