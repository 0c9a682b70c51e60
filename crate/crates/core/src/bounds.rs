//! Lower/upper bounds of the unbiased MMD statistic under arbitrary
//! missingness.
//!
//! The univariate path bounds the mixed terms through a one-dimensional
//! kernel-sum function evaluated at the observed points; the multivariate
//! path combines the incomplete Laplacian kernel with per-component maximum
//! distances. Both assemble intervals that contain the statistic of every
//! possible imputation of the missing cells.

use rayon::prelude::*;

use crate::data::{MaskedRow, RowPartition, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::{Accumulator, Scalar};
use crate::kernel::{incomplete_laplacian_unchecked, laplacian_unchecked, KernelParams};
use crate::mmd::{
    check_sample_sizes, constant_c1, constant_c3, mmd_u, naive_bounds_auto, BoundInterval,
};

/// Default cap on the joint imputation grid size.
pub const DEFAULT_GRID_CAP: u128 = 1_000_000;

// ---------------------------------------------------------------------------
// T-function machinery
// ---------------------------------------------------------------------------

/// A signed sum of Laplacian kernel evaluations,
/// `T(z) = sum_i a_i k(x_i, z) - sum_i b_i k(y_i, z)`,
/// restricted to the components in `missing_dims`.
///
/// An empty `missing_dims` means full evaluation of one-dimensional points.
#[derive(Clone, Debug)]
pub struct TFunctionSpec<F> {
    x_points: Vec<(Vec<F>, F)>,
    y_points: Vec<(Vec<F>, F)>,
    beta: F,
    missing_dims: Vec<usize>,
}

impl<F: Scalar> TFunctionSpec<F> {
    /// All weights must be strictly positive and at least one point list
    /// nonempty.
    pub fn new(
        x_points: Vec<(Vec<F>, F)>,
        y_points: Vec<(Vec<F>, F)>,
        beta: F,
        missing_dims: Vec<usize>,
    ) -> Result<Self> {
        if x_points.is_empty() && y_points.is_empty() {
            return Err(Error::EmptySpec);
        }
        let dim = x_points
            .first()
            .or_else(|| y_points.first())
            .map(|(p, _)| p.len())
            .unwrap_or(0);
        for (p, w) in x_points.iter().chain(y_points.iter()) {
            if p.len() != dim {
                return Err(Error::Dim {
                    left: p.len(),
                    right: dim,
                });
            }
            // the negation also rejects NaN weights
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(*w > F::zero()) {
                return Err(Error::Config(format!(
                    "T-function weights must be strictly positive, got {w}"
                )));
            }
        }
        if missing_dims.is_empty() && dim != 1 {
            return Err(Error::Dim { left: dim, right: 1 });
        }
        if let Some(&j) = missing_dims.iter().find(|&&j| j >= dim) {
            return Err(Error::Dim { left: j, right: dim });
        }
        Ok(Self {
            x_points,
            y_points,
            beta,
            missing_dims,
        })
    }

    /// Convenience constructor for scalar points.
    pub fn univariate(x_points: Vec<(F, F)>, y_points: Vec<(F, F)>, beta: F) -> Result<Self> {
        Self::new(
            x_points.into_iter().map(|(p, w)| (vec![p], w)).collect(),
            y_points.into_iter().map(|(p, w)| (vec![p], w)).collect(),
            beta,
            vec![0],
        )
    }

    pub fn x_points(&self) -> &[(Vec<F>, F)] {
        &self.x_points
    }

    pub fn y_points(&self) -> &[(Vec<F>, F)] {
        &self.y_points
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    fn dims(&self) -> Vec<usize> {
        if self.missing_dims.is_empty() {
            vec![0]
        } else {
            self.missing_dims.clone()
        }
    }
}

/// Evaluates the T-function at `z`, which supplies one value per entry of
/// the spec's missing-dimension set (a single value in the univariate case).
pub fn t_eval<F: Scalar>(spec: &TFunctionSpec<F>, z: &[F]) -> Result<F> {
    let dims = spec.dims();
    if z.len() != dims.len() {
        return Err(Error::Dim {
            left: z.len(),
            right: dims.len(),
        });
    }
    Ok(t_eval_unchecked(spec, &dims, z))
}

fn t_eval_unchecked<F: Scalar>(spec: &TFunctionSpec<F>, dims: &[usize], z: &[F]) -> F {
    let beta = spec.beta;
    let mut acc = Accumulator::new();
    for (p, w) in &spec.x_points {
        let mut dist = F::zero();
        for (k, &j) in dims.iter().enumerate() {
            dist = dist + (p[j] - z[k]).abs();
        }
        acc.add(*w * (-beta * dist).exp());
    }
    for (p, w) in &spec.y_points {
        let mut dist = F::zero();
        for (k, &j) in dims.iter().enumerate() {
            dist = dist + (p[j] - z[k]).abs();
        }
        acc.add(-(*w) * (-beta * dist).exp());
    }
    acc.total()
}

/// Interval containing `T(z)` for every real `z`, univariate case.
///
/// The candidate set is `{0}` together with `T` evaluated at every point of
/// the spec. Candidates are computed with two sorted prefix/suffix sweeps in
/// `O(l log l)`; [`t_bounds_univariate_reference`] keeps the quadratic
/// evaluation for cross-checking.
pub fn t_bounds_univariate<F: Scalar>(spec: &TFunctionSpec<F>) -> Result<BoundInterval<F>> {
    let dims = spec.dims();
    if dims.len() != 1 {
        return Err(Error::Dim {
            left: dims.len(),
            right: 1,
        });
    }
    let j = dims[0];
    let mut pts: Vec<(F, F)> = Vec::with_capacity(spec.x_points.len() + spec.y_points.len());
    for (p, w) in &spec.x_points {
        pts.push((p[j], *w));
    }
    for (p, w) in &spec.y_points {
        pts.push((p[j], -*w));
    }
    pts.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite point"));
    let (tmin, tmax) = sweep_t_minmax(&pts, spec.beta);
    Ok(BoundInterval::new(tmin.min(F::zero()), tmax.max(F::zero())))
}

/// Quadratic-time reference for [`t_bounds_univariate`], kept for tests.
#[cfg(test)]
pub(crate) fn t_bounds_univariate_reference<F: Scalar>(
    spec: &TFunctionSpec<F>,
) -> Result<BoundInterval<F>> {
    let dims = spec.dims();
    if dims.len() != 1 {
        return Err(Error::Dim {
            left: dims.len(),
            right: 1,
        });
    }
    let j = dims[0];
    let mut tmin = F::zero();
    let mut tmax = F::zero();
    for (p, _) in spec.x_points.iter().chain(spec.y_points.iter()) {
        let t = t_eval_unchecked(spec, &dims, &[p[j]]);
        tmin = tmin.min(t);
        tmax = tmax.max(t);
    }
    Ok(BoundInterval::new(tmin, tmax))
}

/// Min and max of `T` over the sorted weighted points themselves (the zero
/// candidate is the caller's concern). `points` holds `(position, signed
/// weight)` sorted by position.
///
/// `left[i] = sum_{k<=i} w_k exp(-beta (p_i - p_k))` satisfies
/// `left[i] = left[i-1] exp(-beta (p_i - p_{i-1})) + w_i`, and symmetrically
/// from the right, so all values come out of two linear passes.
fn sweep_t_minmax<F: Scalar>(points: &[(F, F)], beta: F) -> (F, F) {
    let m = points.len();
    if m == 0 {
        return (F::zero(), F::zero());
    }
    let mut left = Vec::with_capacity(m);
    left.push(points[0].1);
    for i in 1..m {
        let decay = (-beta * (points[i].0 - points[i - 1].0)).exp();
        let prev: F = left[i - 1];
        left.push(prev * decay + points[i].1);
    }
    let mut tmin = F::infinity();
    let mut tmax = F::neg_infinity();
    let mut right = points[m - 1].1;
    for i in (0..m).rev() {
        let t = left[i] + right - points[i].1;
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        if i > 0 {
            let decay = (-beta * (points[i].0 - points[i - 1].0)).exp();
            right = right * decay + points[i - 1].1;
        }
    }
    (tmin, tmax)
}

/// Exact extremes of `T` over the finite imputation grid whose per-dimension
/// candidates are the observed components of the spec's points.
///
/// Exponential in the number of missing dimensions; only the verification
/// oracle and tiny instances use it.
pub fn t_bounds_grid<F: Scalar>(spec: &TFunctionSpec<F>, cap: u128) -> Result<BoundInterval<F>> {
    let dims = spec.dims();
    let n_candidates = spec.x_points.len() + spec.y_points.len();
    let size = (n_candidates as u128)
        .checked_pow(dims.len() as u32)
        .ok_or(Error::GridTooLarge {
            size: u128::MAX,
            cap,
        })?;
    if size > cap {
        return Err(Error::GridTooLarge { size, cap });
    }
    let candidates: Vec<Vec<F>> = dims
        .iter()
        .map(|&j| {
            spec.x_points
                .iter()
                .chain(spec.y_points.iter())
                .map(|(p, _)| p[j])
                .collect()
        })
        .collect();
    let mut tmin = F::infinity();
    let mut tmax = F::neg_infinity();
    let mut odometer = vec![0usize; dims.len()];
    let mut z = vec![F::zero(); dims.len()];
    loop {
        for (k, &c) in odometer.iter().enumerate() {
            z[k] = candidates[k][c];
        }
        let t = t_eval_unchecked(spec, &dims, &z);
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        // advance mixed-radix counter
        let mut k = 0;
        loop {
            if k == odometer.len() {
                return Ok(BoundInterval::new(
                    tmin.min(F::zero()),
                    tmax.max(F::zero()),
                ));
            }
            odometer[k] += 1;
            if odometer[k] < n_candidates {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Maximum-distance table and the closed-form multivariate T bound
// ---------------------------------------------------------------------------

/// Per-row, per-component maximum absolute distances to the pooled fully
/// observed rows. `xhat[i][j]` belongs to the `i`-th complete row of the
/// first sample.
#[derive(Clone, Debug)]
pub struct MaxDistanceTable<F> {
    pub xhat: Vec<Vec<F>>,
    pub yhat: Vec<Vec<F>>,
}

/// Builds the maximum-distance table over the pooled complete rows.
///
/// `xhat[i][j] = max_w |x_i(j) - w(j)|` with `w` ranging over every complete
/// row of both samples, which reduces to the distance to the per-component
/// minimum or maximum.
pub fn build_max_distance_table<F: Scalar>(
    data: &TwoSampleData<F>,
    px: &RowPartition,
    py: &RowPartition,
) -> Result<MaxDistanceTable<F>> {
    let d = data.d();
    if px.complete_rows.is_empty() && py.complete_rows.is_empty() {
        return Err(Error::NoCompleteRows);
    }
    let mut lo = vec![F::infinity(); d];
    let mut hi = vec![F::neg_infinity(); d];
    for &i in &px.complete_rows {
        for (j, &v) in data.x.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    for &i in &py.complete_rows {
        for (j, &v) in data.y.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let hat_row = |row: &[F]| -> Vec<F> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| (v - lo[j]).max(hi[j] - v))
            .collect()
    };
    Ok(MaxDistanceTable {
        xhat: px.complete_rows.iter().map(|&i| hat_row(data.x.row(i))).collect(),
        yhat: py.complete_rows.iter().map(|&i| hat_row(data.y.row(i))).collect(),
    })
}

/// Closed-form interval containing the grid extremes of the multivariate
/// T-function, using maximum-distance attenuation instead of enumeration.
///
/// `table` rows must align one-to-one with the spec's point lists.
pub fn t_bounds_max_distance<F: Scalar>(
    spec: &TFunctionSpec<F>,
    table: &MaxDistanceTable<F>,
) -> Result<BoundInterval<F>> {
    if table.xhat.len() != spec.x_points.len() {
        return Err(Error::Dim {
            left: table.xhat.len(),
            right: spec.x_points.len(),
        });
    }
    if table.yhat.len() != spec.y_points.len() {
        return Err(Error::Dim {
            left: table.yhat.len(),
            right: spec.y_points.len(),
        });
    }
    let dims = spec.dims();
    let beta = spec.beta;
    let mut sum_a_att = Accumulator::new();
    let mut sum_a = Accumulator::new();
    for ((_, w), hat) in spec.x_points.iter().zip(&table.xhat) {
        let mut dist = F::zero();
        for &j in &dims {
            dist = dist + hat[j];
        }
        sum_a_att.add(*w * (-beta * dist).exp());
        sum_a.add(*w);
    }
    let mut sum_b_att = Accumulator::new();
    let mut sum_b = Accumulator::new();
    for ((_, w), hat) in spec.y_points.iter().zip(&table.yhat) {
        let mut dist = F::zero();
        for &j in &dims {
            dist = dist + hat[j];
        }
        sum_b_att.add(*w * (-beta * dist).exp());
        sum_b.add(*w);
    }
    Ok(BoundInterval::new(
        sum_a_att.total() - sum_b.total(),
        sum_a.total() - sum_b_att.total(),
    ))
}

// ---------------------------------------------------------------------------
// Univariate bound engine
// ---------------------------------------------------------------------------

/// Precomputed, split-independent structure for the univariate bounds.
///
/// The pooled fully observed scalars are sorted once and the kernel decay of
/// every adjacent gap is evaluated once; every group assignment (the
/// identity split or a permutation) is then bounded in `O(n1 + n2)`
/// multiply-adds via prefix/suffix sweeps, with no further `exp` calls.
pub(crate) struct UnivariateBoundEngine<F> {
    n1: usize,
    n2: usize,
    c1: F,
    c2: F,
    c3: F,
    /// Pooled row ids of the complete scalars in ascending value order; the
    /// values themselves are not needed once the decays are computed.
    sorted_ids: Vec<u32>,
    /// `decays[i] = exp(-beta (v_i - v_{i-1}))`; `decays[0]` unused.
    decays: Vec<F>,
    incomplete: Vec<u32>,
}

/// Kernel decay factors between adjacent sorted values.
pub(crate) fn gap_decays<F: Scalar>(sorted: &[(F, u32)], beta: F) -> Vec<F> {
    let mut decays = Vec::with_capacity(sorted.len());
    decays.push(F::one());
    for i in 1..sorted.len() {
        decays.push((-beta * (sorted[i].0 - sorted[i - 1].0)).exp());
    }
    decays
}

pub(crate) type TermIntervals<F> = (F, BoundInterval<F>, BoundInterval<F>, BoundInterval<F>);

impl<F: Scalar> UnivariateBoundEngine<F> {
    pub(crate) fn new(data: &TwoSampleData<F>, params: &KernelParams<F>) -> Result<Self> {
        if data.d() != 1 {
            return Err(Error::Dim {
                left: data.d(),
                right: 1,
            });
        }
        let n1 = data.x.n();
        let n2 = data.y.n();
        check_sample_sizes(n1, n2, 2)?;
        let mut sorted_complete = Vec::new();
        let mut incomplete = Vec::new();
        for p in 0..n1 + n2 {
            let row = pooled_row(data, p);
            if row.mask[0] {
                sorted_complete.push((row.values[0], p as u32));
            } else {
                incomplete.push(p as u32);
            }
        }
        sorted_complete.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite value"));
        let decays = gap_decays(&sorted_complete, params.beta());
        let sorted_ids = sorted_complete.iter().map(|&(_, p)| p).collect();
        Ok(Self {
            n1,
            n2,
            c1: constant_c1::<F>(n1),
            c2: constant_c1::<F>(n2),
            c3: constant_c3::<F>(n1, n2),
            sorted_ids,
            decays,
            incomplete,
        })
    }

    pub(crate) fn identity(&self) -> Vec<bool> {
        identity_assignment(self.n1, self.n2)
    }

    /// `(a2, a1, a3, a4)` for the given pooled-row group assignment.
    pub(crate) fn terms_for(&self, in_x: &[bool]) -> TermIntervals<F> {
        let m1 = self
            .incomplete
            .iter()
            .filter(|&&p| in_x[p as usize])
            .count();
        let m2 = self.incomplete.len() - m1;
        let (sxx, syy, sxy) = labeled_pair_sums(&self.sorted_ids, &self.decays, in_x);
        let a2 = self.c1 * sxx + self.c2 * syy - self.c3 * sxy;
        let a1 = counting_a1_interval(self.c1, self.c2, self.c3, m1, m2);
        let m1f = F::from_usize_lossy(m1);
        let m2f = F::from_usize_lossy(m2);
        let (b1min, b1max) = self.t_candidates_minmax(in_x, self.c1, -self.c3);
        let a3 = BoundInterval::new(m1f * b1min, m1f * b1max);
        let (b2min, b2max) = self.t_candidates_minmax(in_x, -self.c3, self.c2);
        let a4 = BoundInterval::new(m2f * b2min, m2f * b2max);
        (a2, a1, a3, a4)
    }

    pub(crate) fn interval_for(&self, in_x: &[bool]) -> BoundInterval<F> {
        let (a2, a1, a3, a4) = self.terms_for(in_x);
        BoundInterval::new(
            a2 + a1.lower + a3.lower + a4.lower,
            a2 + a1.upper + a3.upper + a4.upper,
        )
    }

    /// Min/max of the candidate set `{0} U {T at each complete point}` where
    /// `T` weights complete points by `w_x` or `w_y` by group.
    fn t_candidates_minmax(&self, in_x: &[bool], w_x: F, w_y: F) -> (F, F) {
        let m = self.sorted_ids.len();
        if m == 0 {
            return (F::zero(), F::zero());
        }
        let weight =
            |i: usize| -> F { if in_x[self.sorted_ids[i] as usize] { w_x } else { w_y } };
        let mut left = Vec::with_capacity(m);
        left.push(weight(0));
        for i in 1..m {
            let prev: F = left[i - 1];
            left.push(prev * self.decays[i] + weight(i));
        }
        let mut tmin = F::infinity();
        let mut tmax = F::neg_infinity();
        let mut right = weight(m - 1);
        for i in (0..m).rev() {
            let w = weight(i);
            let t = left[i] + right - w;
            tmin = tmin.min(t);
            tmax = tmax.max(t);
            if i > 0 {
                right = right * self.decays[i] + weight(i - 1);
            }
        }
        (tmin.min(F::zero()), tmax.max(F::zero()))
    }
}

pub(crate) fn identity_assignment(n1: usize, n2: usize) -> Vec<bool> {
    let mut in_x = vec![false; n1 + n2];
    for flag in in_x.iter_mut().take(n1) {
        *flag = true;
    }
    in_x
}

fn pooled_row<'a, F: Scalar>(data: &'a TwoSampleData<F>, p: usize) -> MaskedRow<'a, F> {
    if p < data.x.n() {
        data.x.masked_row(p)
    } else {
        data.y.masked_row(p - data.x.n())
    }
}

fn counting_a1_interval<F: Scalar>(
    c1: F,
    c2: F,
    c3: F,
    m1: usize,
    m2: usize,
) -> BoundInterval<F> {
    let m1f = F::from_usize_lossy(m1);
    let m2f = F::from_usize_lossy(m2);
    let half = F::from_f64_lossy(0.5);
    let xx = F::from_usize_lossy(m1 * m1.saturating_sub(1));
    let yy = F::from_usize_lossy(m2 * m2.saturating_sub(1));
    BoundInterval::new(-c3 * m1f * m2f, c1 * xx * half + c2 * yy * half)
}

/// Unordered within/cross pairwise kernel sums over value-sorted labeled
/// scalars with precomputed adjacent-gap decays.
///
/// One ascending pass with decayed running sums; kernel values never
/// materialize pairwise.
pub(crate) fn labeled_pair_sums<F: Scalar>(
    sorted_ids: &[u32],
    decays: &[F],
    in_x: &[bool],
) -> (F, F, F) {
    let mut gx = F::zero();
    let mut gy = F::zero();
    let mut sxx = Accumulator::new();
    let mut syy = Accumulator::new();
    let mut sxy = Accumulator::new();
    for (i, &p) in sorted_ids.iter().enumerate() {
        if i > 0 {
            gx = gx * decays[i];
            gy = gy * decays[i];
        }
        if in_x[p as usize] {
            sxx.add(gx);
            sxy.add(gy);
            gx = gx + F::one();
        } else {
            syy.add(gy);
            sxy.add(gx);
            gy = gy + F::one();
        }
    }
    (sxx.total(), syy.total(), sxy.total())
}

// ---------------------------------------------------------------------------
// Multivariate bound engine
// ---------------------------------------------------------------------------

/// Precomputed, split-independent structure for the multivariate bounds.
///
/// The incomplete-kernel matrices, the exact Gram over complete rows and the
/// attenuation factors depend only on the pooled rows, never on the group
/// assignment, so permutation tests reuse one instance across all splits.
pub(crate) struct MultivariateBoundEngine<F> {
    n1: usize,
    n2: usize,
    c1: F,
    c2: F,
    c3: F,
    complete: Vec<u32>,
    incomplete: Vec<u32>,
    /// Exact kernel over complete rows, diagonal 1, row-major `nc x nc`.
    g_cc: Vec<F>,
    /// Incomplete kernel between each incomplete row and each complete row.
    ks_ic: Vec<F>,
    /// `ks_ic` attenuated by `exp(-beta * sum of the incomplete row's missing
    /// components' max distances at the complete row)`.
    ks_att_ic: Vec<F>,
    /// Incomplete kernel among incomplete rows, diagonal unused.
    ks_ii: Vec<F>,
}

impl<F: Scalar> MultivariateBoundEngine<F> {
    pub(crate) fn new(data: &TwoSampleData<F>, params: &KernelParams<F>) -> Result<Self> {
        let n1 = data.x.n();
        let n2 = data.y.n();
        check_sample_sizes(n1, n2, 2)?;
        let n = n1 + n2;
        let d = data.d();
        let beta = params.beta();

        let mut complete = Vec::new();
        let mut incomplete = Vec::new();
        for p in 0..n {
            if pooled_row(data, p).is_complete() {
                complete.push(p as u32);
            } else {
                incomplete.push(p as u32);
            }
        }
        if complete.is_empty() {
            return Err(Error::NoCompleteRows);
        }
        let nc = complete.len();
        let ni = incomplete.len();

        // Component ranges over pooled complete rows; the max distance from a
        // value to the set is the distance to one of the two endpoints.
        let mut lo = vec![F::infinity(); d];
        let mut hi = vec![F::neg_infinity(); d];
        for &c in &complete {
            for (j, &v) in pooled_row(data, c as usize).values.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let hat: Vec<Vec<F>> = complete
            .iter()
            .map(|&c| {
                pooled_row(data, c as usize)
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (v - lo[j]).max(hi[j] - v))
                    .collect()
            })
            .collect();

        let parallel = nc.max(ni) * d > 200_000;

        let mut g_cc = vec![F::one(); nc * nc];
        let fill_g_row = |a: usize, out: &mut [F]| {
            let ra = pooled_row(data, complete[a] as usize).values;
            for (b, slot) in out.iter_mut().enumerate() {
                if a != b {
                    let rb = pooled_row(data, complete[b] as usize).values;
                    *slot = laplacian_unchecked(ra, rb, beta);
                }
            }
        };
        if parallel {
            g_cc.par_chunks_mut(nc)
                .enumerate()
                .for_each(|(a, row)| fill_g_row(a, row));
        } else {
            for (a, row) in g_cc.chunks_mut(nc).enumerate() {
                fill_g_row(a, row);
            }
        }

        let mut ks_ic = vec![F::zero(); ni * nc];
        let mut ks_att_ic = vec![F::zero(); ni * nc];
        let fill_i_row = |i: usize, ks_row: &mut [F], att_row: &mut [F]| {
            let irow = pooled_row(data, incomplete[i] as usize);
            let miss: Vec<usize> = irow
                .mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| !m)
                .map(|(j, _)| j)
                .collect();
            for c in 0..nc {
                let crow = pooled_row(data, complete[c] as usize);
                let ks = incomplete_laplacian_unchecked(irow, crow, beta);
                let mut hat_sum = F::zero();
                for &j in &miss {
                    hat_sum = hat_sum + hat[c][j];
                }
                ks_row[c] = ks;
                att_row[c] = ks * (-beta * hat_sum).exp();
            }
        };
        if parallel {
            ks_ic
                .par_chunks_mut(nc)
                .zip(ks_att_ic.par_chunks_mut(nc))
                .enumerate()
                .for_each(|(i, (ks_row, att_row))| fill_i_row(i, ks_row, att_row));
        } else {
            for (i, (ks_row, att_row)) in
                ks_ic.chunks_mut(nc).zip(ks_att_ic.chunks_mut(nc)).enumerate()
            {
                fill_i_row(i, ks_row, att_row);
            }
        }

        let mut ks_ii = vec![F::one(); ni * ni];
        for a in 0..ni {
            let ra = pooled_row(data, incomplete[a] as usize);
            for b in a + 1..ni {
                let rb = pooled_row(data, incomplete[b] as usize);
                let k = incomplete_laplacian_unchecked(ra, rb, beta);
                ks_ii[a * ni + b] = k;
                ks_ii[b * ni + a] = k;
            }
        }

        Ok(Self {
            n1,
            n2,
            c1: constant_c1::<F>(n1),
            c2: constant_c1::<F>(n2),
            c3: constant_c3::<F>(n1, n2),
            complete,
            incomplete,
            g_cc,
            ks_ic,
            ks_att_ic,
            ks_ii,
        })
    }

    pub(crate) fn identity(&self) -> Vec<bool> {
        identity_assignment(self.n1, self.n2)
    }

    /// `(a2, a1, a3, a4)` for the given pooled-row group assignment.
    pub(crate) fn terms_for(&self, in_x: &[bool]) -> TermIntervals<F> {
        let nc = self.complete.len();
        let ni = self.incomplete.len();

        let mut sxx = Accumulator::new();
        let mut syy = Accumulator::new();
        let mut sxy = Accumulator::new();
        for a in 0..nc {
            let ax = in_x[self.complete[a] as usize];
            let row = &self.g_cc[a * nc..(a + 1) * nc];
            for (b, &k) in row.iter().enumerate().skip(a + 1) {
                let bx = in_x[self.complete[b] as usize];
                match (ax, bx) {
                    (true, true) => sxx.add(k),
                    (false, false) => syy.add(k),
                    _ => sxy.add(k),
                }
            }
        }
        let a2 = self.c1 * sxx.total() + self.c2 * syy.total() - self.c3 * sxy.total();

        let mut kxx = Accumulator::new();
        let mut kyy = Accumulator::new();
        let mut kxy = Accumulator::new();
        for a in 0..ni {
            let ax = in_x[self.incomplete[a] as usize];
            let row = &self.ks_ii[a * ni..(a + 1) * ni];
            for (b, &k) in row.iter().enumerate().skip(a + 1) {
                let bx = in_x[self.incomplete[b] as usize];
                match (ax, bx) {
                    (true, true) => kxx.add(k),
                    (false, false) => kyy.add(k),
                    _ => kxy.add(k),
                }
            }
        }
        let a1 = BoundInterval::new(
            -self.c3 * kxy.total(),
            self.c1 * kxx.total() + self.c2 * kyy.total(),
        );

        // Mixed terms: per incomplete row, clamp against zero, then sum.
        // Summing before clamping would not be a valid bound.
        let mut c_up_x = Accumulator::new();
        let mut c_lo_x = Accumulator::new();
        let mut c_up_y = Accumulator::new();
        let mut c_lo_y = Accumulator::new();
        let zero = F::zero();
        for i in 0..ni {
            let ix = in_x[self.incomplete[i] as usize];
            let ks_row = &self.ks_ic[i * nc..(i + 1) * nc];
            let att_row = &self.ks_att_ic[i * nc..(i + 1) * nc];
            let mut s_ks_x = Accumulator::new();
            let mut s_ks_y = Accumulator::new();
            let mut s_att_x = Accumulator::new();
            let mut s_att_y = Accumulator::new();
            for c in 0..nc {
                if in_x[self.complete[c] as usize] {
                    s_ks_x.add(ks_row[c]);
                    s_att_x.add(att_row[c]);
                } else {
                    s_ks_y.add(ks_row[c]);
                    s_att_y.add(att_row[c]);
                }
            }
            if ix {
                c_up_x.add((self.c1 * s_ks_x.total() - self.c3 * s_att_y.total()).max(zero));
                c_lo_x.add((self.c1 * s_att_x.total() - self.c3 * s_ks_y.total()).min(zero));
            } else {
                c_up_y.add((self.c2 * s_ks_y.total() - self.c3 * s_att_x.total()).max(zero));
                c_lo_y.add((self.c2 * s_att_y.total() - self.c3 * s_ks_x.total()).min(zero));
            }
        }
        let a3 = BoundInterval::new(c_lo_x.total(), c_up_x.total());
        let a4 = BoundInterval::new(c_lo_y.total(), c_up_y.total());
        (a2, a1, a3, a4)
    }

    pub(crate) fn interval_for(&self, in_x: &[bool]) -> BoundInterval<F> {
        let (a2, a1, a3, a4) = self.terms_for(in_x);
        BoundInterval::new(
            a2 + a1.lower + a3.lower + a4.lower,
            a2 + a1.upper + a3.upper + a4.upper,
        )
    }
}

// ---------------------------------------------------------------------------
// Assembled statistic bounds
// ---------------------------------------------------------------------------

pub(crate) fn univariate_terms<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<TermIntervals<F>> {
    let engine = UnivariateBoundEngine::new(data, params)?;
    let id = engine.identity();
    Ok(engine.terms_for(&id))
}

pub(crate) fn multivariate_terms<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<TermIntervals<F>> {
    match MultivariateBoundEngine::new(data, params) {
        Ok(engine) => {
            let id = engine.identity();
            Ok(engine.terms_for(&id))
        }
        Err(Error::NoCompleteRows) => {
            // Every row is incomplete: the mixed terms vanish and only the
            // counting bound remains, matching the naive interval.
            let n1 = data.x.n();
            let n2 = data.y.n();
            let c1 = constant_c1::<F>(n1);
            let c2 = constant_c1::<F>(n2);
            let c3 = constant_c3::<F>(n1, n2);
            let zero = BoundInterval::degenerate(F::zero());
            Ok((
                F::zero(),
                counting_a1_interval(c1, c2, c3, n1, n2),
                zero,
                zero,
            ))
        }
        Err(e) => Err(e),
    }
}

/// Interval containing the unbiased MMD statistic of every imputation,
/// univariate samples with fully missing scalars.
///
/// `O((n1 + n2) log (n1 + n2))` including the one-time sort. With no missing
/// rows the interval degenerates to the exact statistic, computed through
/// the same code path as [`mmd_u`].
pub fn mmd_bounds_univariate<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<BoundInterval<F>> {
    if data.d() != 1 {
        return Err(Error::Dim {
            left: data.d(),
            right: 1,
        });
    }
    check_sample_sizes(data.x.n(), data.y.n(), 2)?;
    if data.is_fully_observed() {
        return Ok(BoundInterval::degenerate(mmd_u(&data.x, &data.y, params)?));
    }
    let engine = UnivariateBoundEngine::new(data, params)?;
    let id = engine.identity();
    Ok(engine.interval_for(&id))
}

/// Interval containing the unbiased MMD statistic of every imputation,
/// arbitrary per-entry missingness, any `d >= 1`.
///
/// `O(d (n1 + n2)^2)`. Falls back to the naive 0/1 substitution interval
/// when no pooled row is fully observed, where the mixed-term machinery is
/// undefined.
pub fn mmd_bounds_multivariate<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<BoundInterval<F>> {
    check_sample_sizes(data.x.n(), data.y.n(), 2)?;
    if data.is_fully_observed() {
        return Ok(BoundInterval::degenerate(mmd_u(&data.x, &data.y, params)?));
    }
    match MultivariateBoundEngine::new(data, params) {
        Ok(engine) => {
            let id = engine.identity();
            Ok(engine.interval_for(&id))
        }
        Err(Error::NoCompleteRows) => naive_bounds_auto(data, params),
        Err(e) => Err(e),
    }
}

/// Dispatches to the univariate path for `d == 1` and the multivariate path
/// otherwise.
pub fn mmd_bounds<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
) -> Result<BoundInterval<F>> {
    if data.d() == 1 {
        mmd_bounds_univariate(data, params)
    } else {
        mmd_bounds_multivariate(data, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::MaskedMatrix;

    fn params(beta: f64) -> KernelParams<f64> {
        KernelParams::new(beta).unwrap()
    }

    fn uni_spec(
        x: &[(f64, f64)],
        y: &[(f64, f64)],
        beta: f64,
    ) -> TFunctionSpec<f64> {
        TFunctionSpec::univariate(x.to_vec(), y.to_vec(), beta).unwrap()
    }

    #[test]
    fn t_eval_single_point() {
        let spec = uni_spec(&[(0.0, 1.0)], &[], 1.0);
        assert_eq!(t_eval(&spec, &[0.0]).unwrap(), 1.0);
        let ln2 = 2.0f64.ln();
        assert!((t_eval(&spec, &[ln2]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn t_eval_perfect_cancellation() {
        let spec = uni_spec(&[(0.0, 1.0)], &[(0.0, 1.0)], 1.0);
        for z in [-3.0, -0.5, 0.0, 1.0, 10.0] {
            assert!(t_eval(&spec, &[z]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn t_bounds_single_x_point() {
        let spec = uni_spec(&[(0.0, 1.0)], &[], 1.0);
        let iv = t_bounds_univariate(&spec).unwrap();
        assert_eq!(iv.lower, 0.0);
        assert_eq!(iv.upper, 1.0);
    }

    #[test]
    fn t_bounds_two_point_hand_evaluation() {
        let spec = uni_spec(&[(0.0, 1.0)], &[(1.0, 1.0)], 1.0);
        let iv = t_bounds_univariate(&spec).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((iv.lower - (e1 - 1.0)).abs() < 1e-15);
        assert!((iv.upper - (1.0 - e1)).abs() < 1e-15);
    }

    #[test]
    fn empty_spec_is_rejected() {
        assert!(matches!(
            TFunctionSpec::<f64>::univariate(vec![], vec![], 1.0),
            Err(Error::EmptySpec)
        ));
    }

    #[test]
    fn sweep_matches_quadratic_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let nx = rng.gen_range(1..6);
            let ny = rng.gen_range(0..6);
            let x: Vec<(f64, f64)> = (0..nx)
                .map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(0.01..3.0)))
                .collect();
            let y: Vec<(f64, f64)> = (0..ny)
                .map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(0.01..3.0)))
                .collect();
            let beta = rng.gen_range(0.05..4.0);
            let spec = uni_spec(&x, &y, beta);
            let fast = t_bounds_univariate(&spec).unwrap();
            let slow = t_bounds_univariate_reference(&spec).unwrap();
            let slow_clamped = BoundInterval::new(slow.lower.min(0.0), slow.upper.max(0.0));
            assert!((fast.lower - slow_clamped.lower).abs() < 1e-12);
            assert!((fast.upper - slow_clamped.upper).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_sweep_stays_inside_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let nx = rng.gen_range(1..5);
            let ny = rng.gen_range(1..5);
            let x: Vec<(f64, f64)> = (0..nx)
                .map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.01..2.0)))
                .collect();
            let y: Vec<(f64, f64)> = (0..ny)
                .map(|_| (rng.gen_range(-4.0..4.0), rng.gen_range(0.01..2.0)))
                .collect();
            let beta = rng.gen_range(0.1..3.0);
            let spec = uni_spec(&x, &y, beta);
            let iv = t_bounds_univariate(&spec).unwrap();
            let mut z = -10.0;
            while z <= 10.0 {
                let t = t_eval(&spec, &[z]).unwrap();
                assert!(iv.contains(t, 1e-12), "T({z}) = {t} outside {iv:?}");
                z += 1e-2;
            }
        }
    }

    #[test]
    fn grid_reduces_to_univariate_candidates() {
        let spec = uni_spec(&[(0.0, 1.0), (2.0, 0.5)], &[(1.0, 0.3)], 0.8);
        let grid = t_bounds_grid(&spec, DEFAULT_GRID_CAP).unwrap();
        let uni = t_bounds_univariate(&spec).unwrap();
        assert!((grid.lower - uni.lower).abs() < 1e-14);
        assert!((grid.upper - uni.upper).abs() < 1e-14);
    }

    #[test]
    fn grid_cap_enforced() {
        let x: Vec<(Vec<f64>, f64)> = (0..4).map(|i| (vec![i as f64, 0.0], 1.0)).collect();
        let spec = TFunctionSpec::new(x, vec![], 1.0, vec![0, 1]).unwrap();
        assert!(matches!(
            t_bounds_grid(&spec, 10),
            Err(Error::GridTooLarge { size: 16, cap: 10 })
        ));
    }

    #[test]
    fn grid_contains_random_imputations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let nx = rng.gen_range(1..4);
            let ny = rng.gen_range(1..4);
            let d = rng.gen_range(2..4usize);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<(Vec<f64>, f64)> {
                (0..n)
                    .map(|_| {
                        (
                            (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
                            rng.gen_range(0.05..2.0),
                        )
                    })
                    .collect()
            };
            let x = mk(&mut rng, nx);
            let y = mk(&mut rng, ny);
            let dims: Vec<usize> = (0..d).filter(|_| rng.gen_bool(0.6)).collect();
            let dims = if dims.is_empty() { vec![0] } else { dims };
            let spec = TFunctionSpec::new(x, y, rng.gen_range(0.2..2.0), dims.clone()).unwrap();
            let iv = t_bounds_grid(&spec, DEFAULT_GRID_CAP).unwrap();
            for _ in 0..200 {
                let z: Vec<f64> = dims.iter().map(|_| rng.gen_range(-30.0..30.0)).collect();
                let t = t_eval(&spec, &z).unwrap();
                assert!(iv.contains(t, 1e-12), "T = {t} outside {iv:?}");
            }
        }
    }

    #[test]
    fn max_distance_bound_zero_distance_point() {
        let spec = TFunctionSpec::new(vec![(vec![0.0], 1.0)], vec![], 1.0, vec![0]).unwrap();
        let table = MaxDistanceTable {
            xhat: vec![vec![0.0]],
            yhat: vec![],
        };
        let iv = t_bounds_max_distance(&spec, &table).unwrap();
        assert_eq!(iv.lower, 1.0);
        assert_eq!(iv.upper, 1.0);
    }

    #[test]
    fn max_distance_bound_symmetric_ln2() {
        let spec = TFunctionSpec::new(
            vec![(vec![0.0], 1.0)],
            vec![(vec![0.0], 1.0)],
            1.0,
            vec![0],
        )
        .unwrap();
        let ln2 = 2.0f64.ln();
        let table = MaxDistanceTable {
            xhat: vec![vec![ln2]],
            yhat: vec![vec![ln2]],
        };
        let iv = t_bounds_max_distance(&spec, &table).unwrap();
        assert!((iv.lower + 0.5).abs() < 1e-15);
        assert!((iv.upper - 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_distance_bound_contains_grid_extremes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let nx = rng.gen_range(1..4);
            let ny = rng.gen_range(1..4);
            let d = rng.gen_range(1..4usize);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
                    .collect()
            };
            let xr = mk(&mut rng, nx);
            let yr = mk(&mut rng, ny);
            let n_dims = rng.gen_range(1..=d.min(3));
            let dims: Vec<usize> = (0..n_dims).collect();
            // max-distance rows over the pooled points
            let pooled: Vec<&Vec<f64>> = xr.iter().chain(yr.iter()).collect();
            let hat = |row: &Vec<f64>| -> Vec<f64> {
                (0..d)
                    .map(|j| {
                        pooled
                            .iter()
                            .map(|w| (row[j] - w[j]).abs())
                            .fold(0.0f64, f64::max)
                    })
                    .collect()
            };
            let table = MaxDistanceTable {
                xhat: xr.iter().map(hat).collect(),
                yhat: yr.iter().map(hat).collect(),
            };
            let wx: Vec<(Vec<f64>, f64)> = xr
                .iter()
                .map(|r| (r.clone(), rng.gen_range(0.05..2.0)))
                .collect();
            let wy: Vec<(Vec<f64>, f64)> = yr
                .iter()
                .map(|r| (r.clone(), rng.gen_range(0.05..2.0)))
                .collect();
            let spec =
                TFunctionSpec::new(wx, wy, rng.gen_range(0.2..2.0), dims.clone()).unwrap();
            let att = t_bounds_max_distance(&spec, &table).unwrap();
            let grid = t_bounds_grid(&spec, DEFAULT_GRID_CAP).unwrap();
            // the attenuated bound clamped at zero must contain the clamped
            // grid interval, which in turn contains every achieved value
            let att_clamped = BoundInterval::new(att.lower.min(0.0), att.upper.max(0.0));
            assert!(
                grid.is_subset_of(&att_clamped, 1e-12),
                "grid {grid:?} not inside the attenuated bound {att_clamped:?}"
            );
        }
    }

    #[test]
    fn max_distance_table_identical_rows() {
        let x = MaskedMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let y = MaskedMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let data = TwoSampleData::new(x, y).unwrap();
        let px = crate::data::partition_rows(&data.x);
        let py = crate::data::partition_rows(&data.y);
        let t = build_max_distance_table(&data, &px, &py).unwrap();
        assert_eq!(t.xhat, vec![vec![0.0, 0.0]]);
        assert_eq!(t.yhat, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn max_distance_table_two_scalar_rows() {
        let x = MaskedMatrix::from_rows(vec![vec![0.0]]).unwrap();
        let y = MaskedMatrix::from_rows(vec![vec![3.0]]).unwrap();
        let data = TwoSampleData::new(x, y).unwrap();
        let px = crate::data::partition_rows(&data.x);
        let py = crate::data::partition_rows(&data.y);
        let t = build_max_distance_table(&data, &px, &py).unwrap();
        assert_eq!(t.xhat, vec![vec![3.0]]);
        assert_eq!(t.yhat, vec![vec![3.0]]);
    }

    #[test]
    fn max_distance_table_needs_a_complete_row() {
        let x = MaskedMatrix::from_rows(vec![vec![0.0]])
            .unwrap()
            .with_masked_cells(&[(0, 0)]);
        let y = MaskedMatrix::from_rows(vec![vec![3.0]])
            .unwrap()
            .with_masked_cells(&[(0, 0)]);
        let data = TwoSampleData::new(x, y).unwrap();
        let px = crate::data::partition_rows(&data.x);
        let py = crate::data::partition_rows(&data.y);
        assert!(matches!(
            build_max_distance_table(&data, &px, &py),
            Err(Error::NoCompleteRows)
        ));
    }

    fn mat1(values: &[f64]) -> MaskedMatrix<f64> {
        MaskedMatrix::from_rows(values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn univariate_bounds_degenerate_without_missing_rows() {
        let data = TwoSampleData::new(mat1(&[0.0, 1.0, 2.5]), mat1(&[0.3, -1.0])).unwrap();
        let p = params(0.9);
        let iv = mmd_bounds_univariate(&data, &p).unwrap();
        let stat = mmd_u(&data.x, &data.y, &p).unwrap();
        assert_eq!(iv.lower, stat);
        assert_eq!(iv.upper, stat);
    }

    #[test]
    fn univariate_bounds_contain_listed_imputations() {
        // X = {0, 1, 2, missing}, Y = {5, 6, 7}
        let x = mat1(&[0.0, 1.0, 2.0, 0.0]).with_masked_cells(&[(3, 0)]);
        let y = mat1(&[5.0, 6.0, 7.0]);
        let data = TwoSampleData::new(x, y).unwrap();
        let p = params(1.0);
        let iv = mmd_bounds_univariate(&data, &p).unwrap();
        for v in [-100.0, -1.0, 0.0, 0.5, 3.0, 6.0, 100.0] {
            let xi = mat1(&[0.0, 1.0, 2.0, v]);
            let stat = mmd_u(&xi, &data.y, &p).unwrap();
            assert!(
                iv.contains(stat, 1e-9),
                "imputation {v}: stat {stat} outside {iv:?}"
            );
        }
    }

    #[test]
    fn univariate_rejects_wrong_dimension() {
        let x = MaskedMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let y = MaskedMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let data = TwoSampleData::new(x, y).unwrap();
        assert!(matches!(
            mmd_bounds_univariate(&data, &params(1.0)),
            Err(Error::Dim { .. })
        ));
    }

    #[test]
    fn multivariate_bounds_degenerate_without_missing_cells() {
        let x = MaskedMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![0.5, 0.5]])
            .unwrap();
        let y = MaskedMatrix::from_rows(vec![vec![0.2, 0.8], vec![1.5, 2.5]]).unwrap();
        let data = TwoSampleData::new(x, y).unwrap();
        let p = params(0.6);
        let iv = mmd_bounds_multivariate(&data, &p).unwrap();
        let stat = mmd_u(&data.x, &data.y, &p).unwrap();
        assert_eq!(iv.lower, stat);
        assert_eq!(iv.upper, stat);
    }

    #[test]
    fn multivariate_all_missing_falls_back_to_naive() {
        let x = mat1(&[0.0, 1.0]).with_masked_cells(&[(0, 0), (1, 0)]);
        let y = mat1(&[0.0, 1.0]).with_masked_cells(&[(0, 0), (1, 0)]);
        let data = TwoSampleData::new(x, y).unwrap();
        let iv = mmd_bounds_multivariate(&data, &params(1.0)).unwrap();
        assert!((iv.lower + 2.0).abs() < 1e-15);
        assert!((iv.upper - 2.0).abs() < 1e-15);
    }

    #[test]
    fn engine_matches_across_identity_reorderings() {
        // interval is invariant to reordering complete rows
        let x = MaskedMatrix::from_rows(vec![
            vec![0.0, 1.0],
            vec![2.0, -1.0],
            vec![0.5, 0.5],
            vec![1.5, 1.0],
        ])
        .unwrap()
        .with_masked_cells(&[(0, 1)]);
        let y = MaskedMatrix::from_rows(vec![vec![0.2, 0.8], vec![1.1, 2.0], vec![-0.3, 0.1]])
            .unwrap()
            .with_masked_cells(&[(2, 0)]);
        let data = TwoSampleData::new(x, y).unwrap();
        let p = params(0.8);
        let a = mmd_bounds_multivariate(&data, &p).unwrap();
        // permute complete rows of x (rows 1..=3)
        let xp = data.x.filter_rows(&[0, 3, 1, 2]);
        let data2 = TwoSampleData::new(xp, data.y.clone()).unwrap();
        let b = mmd_bounds_multivariate(&data2, &p).unwrap();
        assert!((a.lower - b.lower).abs() < 1e-12);
        assert!((a.upper - b.upper).abs() < 1e-12);
    }
}
