//! Brute-force verification of the statistic bounds.
//!
//! The oracle recomputes the unbiased MMD statistic with its own
//! straightforward kernel loops — deliberately sharing no evaluation code
//! with the bounds machinery — and checks that every randomized or
//! exhaustive imputation of the missing cells stays inside the analytic
//! interval. Agreement is therefore evidence, not tautology.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{mmd_bounds, mmd_bounds_multivariate};
use crate::data::{MaskedMatrix, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::Scalar;
use crate::kernel::{median_heuristic, KernelParams};
use crate::mmd::{check_sample_sizes, BoundInterval};
use crate::simulation::derive_seed;

/// Absolute slack allowed before an imputation counts as escaping a bound.
pub const CONTAINMENT_TOLERANCE: f64 = 1e-9;

/// One bound escape found by the oracle.
#[derive(Clone, Debug)]
pub struct Violation {
    pub instance_seed: u64,
    /// Values assigned to the missing cells; empty for grid-witness checks.
    pub imputation: Vec<f64>,
    pub statistic: f64,
    pub interval: (f64, f64),
}

/// Outcome of a containment sweep.
#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub instances: usize,
    pub imputations_per_instance: usize,
    pub violations: Vec<Violation>,
    /// Largest escape over all checks; zero when everything was contained.
    pub max_overshoot: f64,
}

impl SweepReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: SweepReport) {
        self.instances += other.instances;
        self.imputations_per_instance = self.imputations_per_instance.max(other.imputations_per_instance);
        self.violations.extend(other.violations);
        self.max_overshoot = self.max_overshoot.max(other.max_overshoot);
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "containment sweep: {} instance(s), {} imputation(s) per instance",
            self.instances, self.imputations_per_instance
        )?;
        writeln!(f, "max overshoot: {:.3e}", self.max_overshoot)?;
        if self.violations.is_empty() {
            writeln!(f, "violations: none")
        } else {
            writeln!(f, "violations: {}", self.violations.len())?;
            for v in self.violations.iter().take(20) {
                writeln!(
                    f,
                    "  seed {} statistic {:.12} outside [{:.12}, {:.12}]",
                    v.instance_seed, v.statistic, v.interval.0, v.interval.1
                )?;
            }
            if self.violations.len() > 20 {
                writeln!(f, "  ... {} more", self.violations.len() - 20)?;
            }
            Ok(())
        }
    }
}

/// Independent unbiased-MMD evaluation on dense rows: plain loops, inline
/// kernel, no shared code with the bounds path.
pub fn mmd_u_reference<F: Scalar>(x_rows: &[Vec<F>], y_rows: &[Vec<F>], beta: F) -> F {
    let kernel = |a: &[F], b: &[F]| -> F {
        let mut dist = F::zero();
        for l in 0..a.len() {
            dist = dist + (a[l] - b[l]).abs();
        }
        (-beta * dist).exp()
    };
    let n1 = x_rows.len();
    let n2 = y_rows.len();
    let mut sxx = F::zero();
    for i in 0..n1 {
        for j in 0..n1 {
            if i != j {
                sxx = sxx + kernel(&x_rows[i], &x_rows[j]);
            }
        }
    }
    let mut syy = F::zero();
    for i in 0..n2 {
        for j in 0..n2 {
            if i != j {
                syy = syy + kernel(&y_rows[i], &y_rows[j]);
            }
        }
    }
    let mut sxy = F::zero();
    for xi in x_rows {
        for yj in y_rows {
            sxy = sxy + kernel(xi, yj);
        }
    }
    let n1f = F::from_usize_lossy(n1);
    let n2f = F::from_usize_lossy(n2);
    let two = F::from_f64_lossy(2.0);
    sxx / (n1f * (n1f - F::one())) + syy / (n2f * (n2f - F::one())) - two * sxy / (n1f * n2f)
}

/// Location of every missing cell, first sample rows first, row-major.
fn missing_cells<F: Scalar>(data: &TwoSampleData<F>) -> Vec<(bool, usize, usize)> {
    let mut cells = Vec::new();
    for (is_x, m) in [(true, &data.x), (false, &data.y)] {
        for i in 0..m.n() {
            for j in 0..m.d() {
                if !m.is_observed(i, j) {
                    cells.push((is_x, i, j));
                }
            }
        }
    }
    cells
}

fn dense_rows<F: Scalar>(m: &MaskedMatrix<F>) -> Vec<Vec<F>> {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

fn fill_cells<F: Scalar>(
    x_rows: &mut [Vec<F>],
    y_rows: &mut [Vec<F>],
    cells: &[(bool, usize, usize)],
    values: &[F],
) {
    for (&(is_x, i, j), &v) in cells.iter().zip(values.iter()) {
        if is_x {
            x_rows[i][j] = v;
        } else {
            y_rows[i][j] = v;
        }
    }
}

/// Checks randomized imputations of `data` against a given interval.
pub(crate) fn sweep_against_interval<F: Scalar>(
    data: &TwoSampleData<F>,
    interval: &BoundInterval<F>,
    n_draws: usize,
    seed: u64,
    beta: F,
) -> Result<SweepReport> {
    check_sample_sizes(data.x.n(), data.y.n(), 2)?;
    let cells = missing_cells(data);
    let mut report = SweepReport {
        instances: 1,
        imputations_per_instance: if cells.is_empty() { 0 } else { n_draws },
        ..SweepReport::default()
    };
    if cells.is_empty() {
        return Ok(report);
    }

    let mut pool: Vec<f64> = Vec::new();
    for m in [&data.x, &data.y] {
        for i in 0..m.n() {
            for j in 0..m.d() {
                if m.is_observed(i, j) {
                    pool.push(m.value(i, j).as_f64());
                }
            }
        }
    }
    let (lo, hi) = pool
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (lo, hi) = if pool.is_empty() { (-1.0, 1.0) } else { (lo, hi) };
    let range = if hi > lo { hi - lo } else { 1.0 };

    let mut x_rows = dense_rows(&data.x);
    let mut y_rows = dense_rows(&data.y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw_values = vec![F::zero(); cells.len()];
    for _ in 0..n_draws {
        for v in draw_values.iter_mut() {
            let raw = match rng.gen_range(0..5u8) {
                0 | 1 if !pool.is_empty() => pool[rng.gen_range(0..pool.len())],
                2 | 3 => rng.gen_range(lo - range..=hi + range),
                _ => {
                    if rng.gen_bool(0.5) {
                        lo - 10.0 * range
                    } else {
                        hi + 10.0 * range
                    }
                }
            };
            *v = F::from_f64_lossy(raw);
        }
        fill_cells(&mut x_rows, &mut y_rows, &cells, &draw_values);
        let stat = mmd_u_reference(&x_rows, &y_rows, beta);
        let overshoot = interval.overshoot(stat).as_f64();
        report.max_overshoot = report.max_overshoot.max(overshoot);
        if overshoot > CONTAINMENT_TOLERANCE {
            report.violations.push(Violation {
                instance_seed: seed,
                imputation: draw_values.iter().map(|v| v.as_f64()).collect(),
                statistic: stat.as_f64(),
                interval: (interval.lower.as_f64(), interval.upper.as_f64()),
            });
        }
    }
    Ok(report)
}

/// Draws `n_draws` random imputations per missing cell — a mixture of pooled
/// observed values, uniform draws over the widened observed range, and
/// extremes at ten times the range — and reports any escape from the
/// analytic bound interval beyond [`CONTAINMENT_TOLERANCE`].
pub fn random_imputation_sweep<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
    n_draws: usize,
    seed: u64,
) -> Result<SweepReport> {
    let interval = mmd_bounds(data, params)?;
    sweep_against_interval(data, &interval, n_draws, seed, params.beta())
}

/// Exact extremes of the statistic over the joint grid that imputes every
/// missing cell from the observed values of its own column.
///
/// This is a witness interval: the analytic bounds must contain it, but are
/// allowed to be wider.
pub fn grid_extreme_search<F: Scalar>(
    data: &TwoSampleData<F>,
    params: &KernelParams<F>,
    cap: u128,
) -> Result<BoundInterval<F>> {
    check_sample_sizes(data.x.n(), data.y.n(), 2)?;
    let beta = params.beta();
    let cells = missing_cells(data);
    let mut x_rows = dense_rows(&data.x);
    let mut y_rows = dense_rows(&data.y);
    if cells.is_empty() {
        let stat = mmd_u_reference(&x_rows, &y_rows, beta);
        return Ok(BoundInterval::degenerate(stat));
    }

    let column_pool = |j: usize| -> Vec<F> {
        let mut vals = Vec::new();
        for m in [&data.x, &data.y] {
            for i in 0..m.n() {
                if m.is_observed(i, j) {
                    vals.push(m.value(i, j));
                }
            }
        }
        vals
    };
    let global_pool: Vec<F> = (0..data.d()).flat_map(column_pool).collect();
    let candidates: Vec<Vec<F>> = cells
        .iter()
        .map(|&(_, _, j)| {
            let col = column_pool(j);
            if !col.is_empty() {
                col
            } else if !global_pool.is_empty() {
                global_pool.clone()
            } else {
                vec![F::zero()]
            }
        })
        .collect();

    let mut size: u128 = 1;
    for c in &candidates {
        size = size
            .checked_mul(c.len() as u128)
            .ok_or(Error::GridTooLarge {
                size: u128::MAX,
                cap,
            })?;
    }
    if size > cap {
        return Err(Error::GridTooLarge { size, cap });
    }

    let mut min_stat = F::infinity();
    let mut max_stat = F::neg_infinity();
    let mut odometer = vec![0usize; cells.len()];
    let mut values = vec![F::zero(); cells.len()];
    loop {
        for (k, &c) in odometer.iter().enumerate() {
            values[k] = candidates[k][c];
        }
        fill_cells(&mut x_rows, &mut y_rows, &cells, &values);
        let stat = mmd_u_reference(&x_rows, &y_rows, beta);
        min_stat = min_stat.min(stat);
        max_stat = max_stat.max(stat);
        let mut k = 0;
        loop {
            if k == odometer.len() {
                return Ok(BoundInterval::new(min_stat, max_stat));
            }
            odometer[k] += 1;
            if odometer[k] < candidates[k].len() {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

/// Configuration of the randomized verification sweep behind the `verify`
/// command and the acceptance suite.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub instances: usize,
    pub draws_per_instance: usize,
    pub seed: u64,
    pub grid_cap: u128,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            instances: 100,
            draws_per_instance: 1000,
            seed: 0,
            grid_cap: crate::bounds::DEFAULT_GRID_CAP,
        }
    }
}

/// Generates random small instances (n1, n2 in 2..=8, d in 1..=4, one to
/// four missing cells), sweeps random imputations against the dispatched
/// bounds, additionally checks the multivariate path on univariate
/// instances, and verifies that grid witness extremes are contained.
pub fn run_verification_sweep(cfg: &SweepConfig) -> SweepReport {
    let reports: Vec<SweepReport> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| verify_one_instance(cfg, i))
        .collect();
    let mut merged = SweepReport::default();
    for r in reports {
        merged.merge(r);
    }
    merged
}

fn verify_one_instance(cfg: &SweepConfig, index: usize) -> SweepReport {
    let iseed = derive_seed(cfg.seed, 0xACC0, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(iseed);
    let n1 = rng.gen_range(2..=8usize);
    let n2 = rng.gen_range(2..=8usize);
    let d = rng.gen_range(1..=4usize);
    let scale = rng.gen_range(0.5..3.0);
    let shift = rng.gen_range(-1.0..1.0);
    let gen_matrix = |rng: &mut ChaCha8Rng, n: usize| -> MaskedMatrix<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| rng.gen_range(-1.0..1.0) * scale + shift)
                    .collect()
            })
            .collect();
        MaskedMatrix::from_rows(rows).unwrap()
    };
    let x = gen_matrix(&mut rng, n1);
    let y = gen_matrix(&mut rng, n2);

    let n_missing = rng.gen_range(1..=4usize);
    let mut cells_x = Vec::new();
    let mut cells_y = Vec::new();
    for _ in 0..n_missing {
        let in_x = rng.gen_bool(0.5);
        let n = if in_x { n1 } else { n2 };
        let cell = (rng.gen_range(0..n), rng.gen_range(0..d));
        if in_x {
            cells_x.push(cell);
        } else {
            cells_y.push(cell);
        }
    }
    let data = TwoSampleData::new(x.with_masked_cells(&cells_x), y.with_masked_cells(&cells_y))
        .expect("same d");

    let pooled = stack(&data.x, &data.y);
    let params = median_heuristic(&pooled)
        .or_else(|_| KernelParams::new(1.0))
        .expect("fallback bandwidth");

    let mut report = match random_imputation_sweep(&data, &params, cfg.draws_per_instance, iseed) {
        Ok(r) => r,
        Err(_) => return SweepReport::default(),
    };

    // The multivariate assembly must also be valid on univariate data.
    if data.d() == 1 {
        if let Ok(iv) = mmd_bounds_multivariate(&data, &params) {
            if let Ok(r) = sweep_against_interval(
                &data,
                &iv,
                cfg.draws_per_instance,
                derive_seed(iseed, 0xD1, 0),
                params.beta(),
            ) {
                report.max_overshoot = report.max_overshoot.max(r.max_overshoot);
                report.violations.extend(r.violations);
            }
        }
    }

    match grid_extreme_search(&data, &params, cfg.grid_cap) {
        Ok(witness) => {
            if let Ok(analytic) = mmd_bounds(&data, &params) {
                let tol = CONTAINMENT_TOLERANCE;
                for endpoint in [witness.lower, witness.upper] {
                    let overshoot = analytic.overshoot(endpoint);
                    report.max_overshoot = report.max_overshoot.max(overshoot);
                    if overshoot > tol {
                        report.violations.push(Violation {
                            instance_seed: iseed,
                            imputation: Vec::new(),
                            statistic: endpoint,
                            interval: (analytic.lower, analytic.upper),
                        });
                    }
                }
            }
        }
        Err(Error::GridTooLarge { .. }) => {}
        Err(_) => {}
    }
    report
}

fn stack<F: Scalar>(a: &MaskedMatrix<F>, b: &MaskedMatrix<F>) -> MaskedMatrix<F> {
    let keep_a: Vec<usize> = (0..a.n()).collect();
    let mut rows: Vec<Vec<Option<F>>> = Vec::with_capacity(a.n() + b.n());
    for &i in &keep_a {
        rows.push(
            (0..a.d())
                .map(|j| a.is_observed(i, j).then(|| a.value(i, j)))
                .collect(),
        );
    }
    for i in 0..b.n() {
        rows.push(
            (0..b.d())
                .map(|j| b.is_observed(i, j).then(|| b.value(i, j)))
                .collect(),
        );
    }
    MaskedMatrix::from_optional_rows(rows).expect("nonempty stack")
}
