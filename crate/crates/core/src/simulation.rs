//! Gaussian data generators, the missingness mechanisms of the experiment
//! protocol, and the repetition engine estimating Type I error and power.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::baselines::{run_baseline, BaselineKind, BaselineMethod};
use crate::data::{vstack, MaskedMatrix, TwoSampleData};
use crate::error::{Error, Result};
use crate::float::Scalar;
use crate::inference::{
    make_plan, normality_p_bound, permutation_p_bound, permutation_p_exact,
};
use crate::kernel::median_heuristic;

/// Stateless seed derivation: a splitmix64-style hash of `(master, stream,
/// index)`.
///
/// The repetition engine derives every per-repetition seed as
/// `derive_seed(master_seed, s_index, rep_index)`, so any single cell of a
/// result grid can be recomputed in isolation and still match the full run.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(index.wrapping_mul(0x94D0_49BB_1331_11EB));
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// `n x d` matrix of independent `Normal(mean, 1)` entries, fully observed.
pub fn gen_gaussian<F: Scalar>(n: usize, d: usize, mean: f64, seed: u64) -> MaskedMatrix<F> {
    gen_gaussian_scaled(n, d, mean, 1.0, seed)
}

/// `n x d` matrix of independent `Normal(mean, sd^2)` entries.
pub fn gen_gaussian_scaled<F: Scalar>(
    n: usize,
    d: usize,
    mean: f64,
    sd: f64,
    seed: u64,
) -> MaskedMatrix<F> {
    assert!(n >= 1 && d >= 1, "generator needs n >= 1 and d >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<F> = (0..n * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            F::from_f64_lossy(mean + sd * z)
        })
        .collect();
    let mask = vec![true; n * d];
    MaskedMatrix::new(values, mask, n, d).expect("valid shape")
}

// ---------------------------------------------------------------------------
// Missingness mechanisms
// ---------------------------------------------------------------------------

/// Which missingness mechanism to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mechanism {
    /// Rows selected uniformly at random.
    Mcar,
    /// Univariate informative missingness: negative first-sample values and
    /// positive second-sample values are eligible.
    MnarUnivariate,
    /// Multivariate informative missingness driven by the normalized row sum
    /// and the sub/super-median components.
    MnarMultivariate,
    /// Image-region masking for 28x28 rasters, second sample only.
    MnistRegion,
}

/// Pixel block and eligibility threshold of the image-region mechanism.
/// Indices are 0-based, ranges half-open, raster width 28.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionSpec {
    pub row_start: usize,
    pub row_end: usize,
    pub col_start: usize,
    pub col_end: usize,
    pub nonzero_threshold: usize,
}

impl Default for RegionSpec {
    fn default() -> Self {
        // image rows 1-14 and columns 8-21 in 1-based pixel numbering
        Self {
            row_start: 0,
            row_end: 14,
            col_start: 7,
            col_end: 21,
            nonzero_threshold: 85,
        }
    }
}

impl RegionSpec {
    pub fn flat_indices(&self) -> Vec<usize> {
        let mut idx = Vec::new();
        for r in self.row_start..self.row_end {
            for c in self.col_start..self.col_end {
                idx.push(r * 28 + c);
            }
        }
        idx
    }
}

/// Mechanism identity plus its parameters.
#[derive(Clone, Copy, Debug)]
pub struct MissingnessSpec {
    pub mechanism: Mechanism,
    /// Proportion of rows flagged per targeted sample.
    pub s: f64,
    /// Fraction of components masked within a flagged multivariate row.
    pub component_fraction: f64,
    /// Normalized row-sum cutoff for multivariate eligibility.
    pub projection_threshold: f64,
    pub region: RegionSpec,
}

impl MissingnessSpec {
    pub fn new(mechanism: Mechanism, s: f64) -> Self {
        Self {
            mechanism,
            s,
            component_fraction: 0.30,
            projection_threshold: 0.8,
            region: RegionSpec::default(),
        }
    }
}

/// Flags `k` rows: uniformly from `eligible` when enough are eligible,
/// otherwise all eligible rows plus a uniform draw of the shortfall from the
/// remaining rows.
fn select_flagged(eligible: &[usize], n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    if eligible.len() >= k {
        rand::seq::index::sample(rng, eligible.len(), k)
            .iter()
            .map(|i| eligible[i])
            .collect()
    } else {
        let mut flagged: Vec<usize> = eligible.to_vec();
        let chosen: Vec<bool> = {
            let mut mask = vec![false; n];
            for &i in eligible {
                mask[i] = true;
            }
            mask
        };
        let rest: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
        let shortfall = k - eligible.len();
        flagged.extend(
            rand::seq::index::sample(rng, rest.len(), shortfall.min(rest.len()))
                .iter()
                .map(|i| rest[i]),
        );
        flagged
    }
}

fn flag_count(s: f64, n: usize) -> usize {
    (s * n as f64).floor() as usize
}

/// Univariate informative missingness: `floor(s * n)` rows flagged per
/// sample, drawn from the negative values of the first sample and the
/// positive values of the second, with a uniform fallback when too few rows
/// are eligible. Flagged rows have their single cell masked; values are
/// never altered.
pub fn apply_mnar_univariate<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    s: f64,
    seed: u64,
) -> Result<TwoSampleData<F>> {
    if x.d() != 1 || y.d() != 1 {
        return Err(Error::Dim {
            left: x.d().max(y.d()),
            right: 1,
        });
    }
    check_proportion(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible_x: Vec<usize> = (0..x.n()).filter(|&i| x.value(i, 0) < F::zero()).collect();
    let flag_x = select_flagged(&eligible_x, x.n(), flag_count(s, x.n()), &mut rng);
    let eligible_y: Vec<usize> = (0..y.n()).filter(|&i| y.value(i, 0) > F::zero()).collect();
    let flag_y = select_flagged(&eligible_y, y.n(), flag_count(s, y.n()), &mut rng);
    let cells = |rows: &[usize]| -> Vec<(usize, usize)> { rows.iter().map(|&i| (i, 0)).collect() };
    TwoSampleData::new(
        x.with_masked_cells(&cells(&flag_x)),
        y.with_masked_cells(&cells(&flag_y)),
    )
}

fn check_proportion(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Config(format!(
            "missing proportion must lie in [0, 1], got {s}"
        )));
    }
    Ok(())
}

fn row_median<F: Scalar>(row: &[F]) -> F {
    let mut sorted = row.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite value"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / F::from_f64_lossy(2.0)
    }
}

/// Multivariate informative missingness.
///
/// A first-sample row is eligible when its normalized component sum falls
/// below `-projection_threshold` (second sample: above the positive
/// threshold). `floor(s * n)` rows are flagged per sample with the uniform
/// fallback, and a flagged row has `floor(component_fraction * d)`
/// components masked, drawn from the components strictly below the row
/// median (second sample: strictly above), topping up uniformly from the
/// remaining components when that pool is short.
pub fn apply_mnar_multivariate<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    s: f64,
    spec: &MissingnessSpec,
    seed: u64,
) -> Result<TwoSampleData<F>> {
    let d = x.d();
    if d < 2 || y.d() != d {
        return Err(Error::Dim {
            left: y.d(),
            right: d.max(2),
        });
    }
    check_proportion(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_d = (d as f64).sqrt();
    let threshold = spec.projection_threshold;
    let n_components = (spec.component_fraction * d as f64).floor() as usize;

    let mask_one = |m: &MaskedMatrix<F>,
                        below_median: bool,
                        eligible: Vec<usize>,
                        rng: &mut ChaCha8Rng|
     -> Vec<(usize, usize)> {
        let flagged = select_flagged(&eligible, m.n(), flag_count(s, m.n()), rng);
        let mut cells = Vec::new();
        for &i in &flagged {
            let row = m.row(i);
            let median = row_median(row);
            let candidates: Vec<usize> = (0..d)
                .filter(|&j| {
                    if below_median {
                        row[j] < median
                    } else {
                        row[j] > median
                    }
                })
                .collect();
            let take = n_components.min(candidates.len());
            let mut chosen: Vec<usize> = rand::seq::index::sample(rng, candidates.len(), take)
                .iter()
                .map(|k| candidates[k])
                .collect();
            if chosen.len() < n_components {
                let mut in_chosen = vec![false; d];
                for &j in &chosen {
                    in_chosen[j] = true;
                }
                let rest: Vec<usize> = (0..d).filter(|&j| !in_chosen[j]).collect();
                let extra = (n_components - chosen.len()).min(rest.len());
                chosen.extend(
                    rand::seq::index::sample(rng, rest.len(), extra)
                        .iter()
                        .map(|k| rest[k]),
                );
            }
            cells.extend(chosen.into_iter().map(|j| (i, j)));
        }
        cells
    };

    let projection = |m: &MaskedMatrix<F>, i: usize| -> f64 {
        let mut sum = 0.0;
        for &v in m.row(i) {
            sum += v.as_f64();
        }
        sum / sqrt_d
    };
    let eligible_x: Vec<usize> = (0..x.n())
        .filter(|&i| projection(x, i) < -threshold)
        .collect();
    let cells_x = mask_one(x, true, eligible_x, &mut rng);
    let eligible_y: Vec<usize> = (0..y.n())
        .filter(|&i| projection(y, i) > threshold)
        .collect();
    let cells_y = mask_one(y, false, eligible_y, &mut rng);
    TwoSampleData::new(x.with_masked_cells(&cells_x), y.with_masked_cells(&cells_y))
}

/// Rows selected uniformly at random; flagged univariate rows lose their
/// cell, flagged multivariate rows lose `floor(component_fraction * d)`
/// uniformly chosen components.
pub fn apply_mcar<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    s: f64,
    spec: &MissingnessSpec,
    seed: u64,
) -> Result<TwoSampleData<F>> {
    check_proportion(s)?;
    let d = x.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask_one = |m: &MaskedMatrix<F>, rng: &mut ChaCha8Rng| -> Vec<(usize, usize)> {
        let all: Vec<usize> = (0..m.n()).collect();
        let flagged = select_flagged(&all, m.n(), flag_count(s, m.n()), rng);
        let mut cells = Vec::new();
        for &i in &flagged {
            if d == 1 {
                cells.push((i, 0));
            } else {
                let k = ((spec.component_fraction * d as f64).floor() as usize).max(1);
                cells.extend(
                    rand::seq::index::sample(rng, d, k.min(d))
                        .iter()
                        .map(|j| (i, j)),
                );
            }
        }
        cells
    };
    let cells_x = mask_one(x, &mut rng);
    let cells_y = mask_one(y, &mut rng);
    TwoSampleData::new(x.with_masked_cells(&cells_x), y.with_masked_cells(&cells_y))
}

/// Image-region masking for flattened 28x28 rasters in `[0, 1]`.
///
/// Rows with strictly more than the threshold count of nonzero pixels inside
/// the region are eligible; `floor(s * n)` rows are flagged (uniform
/// fallback as elsewhere) and lose exactly the region's pixels.
pub fn apply_mnist_region<F: Scalar>(
    y: &MaskedMatrix<F>,
    s: f64,
    spec: &MissingnessSpec,
    seed: u64,
) -> Result<MaskedMatrix<F>> {
    if y.d() != 784 {
        return Err(Error::Dim {
            left: y.d(),
            right: 784,
        });
    }
    check_proportion(s)?;
    let region = spec.region.flat_indices();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<usize> = (0..y.n())
        .filter(|&i| {
            let row = y.row(i);
            let nonzero = region.iter().filter(|&&j| row[j] != F::zero()).count();
            nonzero > spec.region.nonzero_threshold
        })
        .collect();
    let flagged = select_flagged(&eligible, y.n(), flag_count(s, y.n()), &mut rng);
    let mut cells = Vec::new();
    for &i in &flagged {
        cells.extend(region.iter().map(|&j| (i, j)));
    }
    Ok(y.with_masked_cells(&cells))
}

/// Applies the configured mechanism. The image-region mechanism masks the
/// second sample only.
pub fn apply_missingness<F: Scalar>(
    x: &MaskedMatrix<F>,
    y: &MaskedMatrix<F>,
    spec: &MissingnessSpec,
    seed: u64,
) -> Result<TwoSampleData<F>> {
    match spec.mechanism {
        Mechanism::Mcar => apply_mcar(x, y, spec.s, spec, seed),
        Mechanism::MnarUnivariate => apply_mnar_univariate(x, y, spec.s, seed),
        Mechanism::MnarMultivariate => apply_mnar_multivariate(x, y, spec.s, spec, seed),
        Mechanism::MnistRegion => {
            let masked_y = apply_mnist_region(y, spec.s, spec, seed)?;
            TwoSampleData::new(x.clone(), masked_y)
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario configuration and the repetition engine
// ---------------------------------------------------------------------------

/// Test pipelines selectable in scenarios and on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodId {
    PermBound,
    NormalBound,
    PermExact,
    CaseDeletion,
    MeanImpute,
    HotDeck,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::PermBound,
        MethodId::NormalBound,
        MethodId::PermExact,
        MethodId::CaseDeletion,
        MethodId::MeanImpute,
        MethodId::HotDeck,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::PermBound => "perm-bound",
            MethodId::NormalBound => "normal-bound",
            MethodId::PermExact => "perm-exact",
            MethodId::CaseDeletion => "case-deletion",
            MethodId::MeanImpute => "mean-impute",
            MethodId::HotDeck => "hot-deck",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .iter()
            .find(|m| m.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Full description of one simulation scenario: sample shapes, the Gaussian
/// location/scale pair, the missingness mechanism, the grid of missing
/// proportions, and the repetition budget.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub n1: usize,
    pub n2: usize,
    pub d: usize,
    pub mean_x: f64,
    pub sd_x: f64,
    pub mean_y: f64,
    pub sd_y: f64,
    pub mechanism: Mechanism,
    pub component_fraction: f64,
    pub projection_threshold: f64,
    pub s_values: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub methods: Vec<MethodId>,
    pub seed: u64,
    pub b: usize,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 {
            return Err(Error::Config("need n1 >= 2 and n2 >= 2".into()));
        }
        if self.d < 1 {
            return Err(Error::Config("need d >= 1".into()));
        }
        if self.reps < 1 {
            return Err(Error::Config("need reps >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods list must not be empty".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.b < 1 {
            return Err(Error::Config("need b >= 1".into()));
        }
        if self.s_values.is_empty() {
            return Err(Error::Config("s grid must not be empty".into()));
        }
        for &s in &self.s_values {
            check_proportion(s)?;
        }
        if self.sd_x <= 0.0 || self.sd_y <= 0.0 {
            return Err(Error::Config("standard deviations must be positive".into()));
        }
        Ok(())
    }
}

/// Parses the flat `key=value` scenario format.
///
/// Keys mirror [`ScenarioConfig`]: `n1`, `n2`, `d`, `mean_x`, `sd_x`,
/// `mean_y`, `sd_y`, `mechanism` (`mcar` | `mnar` | `mnist-region`; `mnar`
/// dispatches on `d`), `component_fraction`, `projection_threshold`, `s`
/// (comma-separated grid), `reps`, `alpha`, `methods` (comma-separated),
/// `seed`, `b`. Lines starting with `#` are comments.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig {
        n1: 0,
        n2: 0,
        d: 1,
        mean_x: 0.0,
        sd_x: 1.0,
        mean_y: 0.0,
        sd_y: 1.0,
        mechanism: Mechanism::MnarUnivariate,
        component_fraction: 0.30,
        projection_threshold: 0.8,
        s_values: Vec::new(),
        reps: 100,
        alpha: 0.05,
        methods: Vec::new(),
        seed: 0,
        b: 100,
    };
    let mut mechanism_key = String::from("mnar");
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("scenario line {} is not key=value: {raw:?}", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("invalid {what} on line {}", lineno + 1));
        match key {
            "n1" => cfg.n1 = value.parse().map_err(|_| bad("n1"))?,
            "n2" => cfg.n2 = value.parse().map_err(|_| bad("n2"))?,
            "d" => cfg.d = value.parse().map_err(|_| bad("d"))?,
            "mean_x" => cfg.mean_x = value.parse().map_err(|_| bad("mean_x"))?,
            "sd_x" => cfg.sd_x = value.parse().map_err(|_| bad("sd_x"))?,
            "mean_y" => cfg.mean_y = value.parse().map_err(|_| bad("mean_y"))?,
            "sd_y" => cfg.sd_y = value.parse().map_err(|_| bad("sd_y"))?,
            "mechanism" => mechanism_key = value.to_string(),
            "component_fraction" => {
                cfg.component_fraction = value.parse().map_err(|_| bad("component_fraction"))?
            }
            "projection_threshold" => {
                cfg.projection_threshold =
                    value.parse().map_err(|_| bad("projection_threshold"))?
            }
            "s" => {
                cfg.s_values = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad("s")))
                    .collect::<Result<Vec<f64>>>()?
            }
            "reps" => cfg.reps = value.parse().map_err(|_| bad("reps"))?,
            "alpha" => cfg.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "methods" => {
                cfg.methods = value
                    .split(',')
                    .map(|v| v.trim().parse::<MethodId>())
                    .collect::<Result<Vec<MethodId>>>()?
            }
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            "b" => cfg.b = value.parse().map_err(|_| bad("b"))?,
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario key {other:?} on line {}",
                    lineno + 1
                )))
            }
        }
    }
    cfg.mechanism = match mechanism_key.as_str() {
        "mcar" => Mechanism::Mcar,
        "mnar" => {
            if cfg.d == 1 {
                Mechanism::MnarUnivariate
            } else {
                Mechanism::MnarMultivariate
            }
        }
        "mnist-region" => Mechanism::MnistRegion,
        other => return Err(Error::Config(format!("unknown mechanism {other:?}"))),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One `(method, s)` cell of a scenario result.
#[derive(Clone, Debug)]
pub struct RejectionRow {
    pub method: MethodId,
    pub s: f64,
    pub rate: f64,
    /// Standard error of the mean, `sqrt(rate (1 - rate) / reps)`.
    pub se: f64,
    pub reps: usize,
    /// Repetitions where the method failed (for example sample-size errors
    /// after case deletion); counted as non-rejections.
    pub warnings: usize,
}

/// Rejection rates per `(method, s)` cell.
#[derive(Clone, Debug)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

impl RejectionTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,s,rate,se,reps,warnings\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.method, r.s, r.rate, r.se, r.reps, r.warnings
            ));
        }
        out
    }

    pub fn get(&self, method: MethodId, s: f64) -> Option<&RejectionRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.s - s).abs() < 1e-12)
    }
}

/// Runs the full `(method, s, repetition)` grid and reports rejection rates
/// with their standard errors. Deterministic for a fixed config, including
/// the seed; repetitions run in parallel.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RejectionTable> {
    cfg.validate()?;
    let mut per_cell: Vec<Vec<(usize, usize)>> =
        vec![vec![(0, 0); cfg.s_values.len()]; cfg.methods.len()];
    for (s_idx, &s) in cfg.s_values.iter().enumerate() {
        let rep_outcomes: Result<Vec<Vec<(bool, bool)>>> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| run_one_rep(cfg, s_idx, s, rep))
            .collect();
        for rep_result in rep_outcomes? {
            for (m_idx, (reject, warned)) in rep_result.into_iter().enumerate() {
                let cell = &mut per_cell[m_idx][s_idx];
                if reject {
                    cell.0 += 1;
                }
                if warned {
                    cell.1 += 1;
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (m_idx, &method) in cfg.methods.iter().enumerate() {
        for (s_idx, &s) in cfg.s_values.iter().enumerate() {
            let (rejects, warnings) = per_cell[m_idx][s_idx];
            let rate = rejects as f64 / cfg.reps as f64;
            let se = (rate * (1.0 - rate) / cfg.reps as f64).sqrt();
            rows.push(RejectionRow {
                method,
                s,
                rate,
                se,
                reps: cfg.reps,
                warnings,
            });
        }
    }
    Ok(RejectionTable { rows })
}

fn run_one_rep(
    cfg: &ScenarioConfig,
    s_idx: usize,
    s: f64,
    rep: usize,
) -> Result<Vec<(bool, bool)>> {
    let rep_seed = derive_seed(cfg.seed, s_idx as u64, rep as u64);
    let x: MaskedMatrix<f64> =
        gen_gaussian_scaled(cfg.n1, cfg.d, cfg.mean_x, cfg.sd_x, derive_seed(rep_seed, 1, 0));
    let y: MaskedMatrix<f64> =
        gen_gaussian_scaled(cfg.n2, cfg.d, cfg.mean_y, cfg.sd_y, derive_seed(rep_seed, 2, 0));
    let masked = if s == 0.0 {
        TwoSampleData::new(x, y)?
    } else {
        let mut spec = MissingnessSpec::new(cfg.mechanism, s);
        spec.component_fraction = cfg.component_fraction;
        spec.projection_threshold = cfg.projection_threshold;
        apply_missingness(&x, &y, &spec, derive_seed(rep_seed, 3, 0))?
    };
    let plan = make_plan(cfg.n1 + cfg.n2, cfg.b, derive_seed(rep_seed, 4, 0))?;
    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let outcome = run_method(
                method,
                &masked,
                cfg.alpha,
                &plan,
                derive_seed(rep_seed, 5, k as u64),
            );
            match outcome {
                Ok(reject) => (reject, false),
                Err(_) => (false, true),
            }
        })
        .collect())
}

fn run_method(
    method: MethodId,
    data: &TwoSampleData<f64>,
    alpha: f64,
    plan: &crate::inference::PermutationPlan,
    seed: u64,
) -> Result<bool> {
    match method {
        MethodId::PermBound => {
            let pooled = vstack(&data.x, &data.y)?;
            let params = median_heuristic(&pooled)?;
            Ok(permutation_p_bound(data, &params, plan, alpha)?.reject)
        }
        MethodId::NormalBound => {
            let pooled = vstack(&data.x, &data.y)?;
            let params = median_heuristic(&pooled)?;
            Ok(normality_p_bound(data, &params, alpha)?.reject)
        }
        MethodId::PermExact => {
            let pooled = vstack(&data.x, &data.y)?;
            let params = median_heuristic(&pooled)?;
            Ok(permutation_p_exact(&data.x, &data.y, &params, plan, alpha)?.reject)
        }
        MethodId::CaseDeletion | MethodId::MeanImpute | MethodId::HotDeck => {
            let kind = match method {
                MethodId::CaseDeletion => BaselineKind::CaseDeletion,
                MethodId::MeanImpute => BaselineKind::MeanImpute,
                _ => BaselineKind::HotDeck,
            };
            Ok(run_baseline(data, BaselineMethod { kind, seed }, alpha, plan)?.reject)
        }
    }
}
