//! Laplacian kernel, incomplete Laplacian kernel and the median heuristic.

use crate::data::{MaskedMatrix, MaskedRow};
use crate::error::{Error, Result};
use crate::float::Scalar;

/// Parameters of the Laplacian kernel `k(x, y) = exp(-beta * ||x - y||_1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams<F> {
    beta: F,
}

impl<F: Scalar> KernelParams<F> {
    /// `beta` must be positive and finite.
    pub fn new(beta: F) -> Result<Self> {
        // the negation also rejects NaN, which `beta <= 0` would let through
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(beta > F::zero()) || !beta.is_finite() {
            return Err(Error::InvalidBandwidth {
                value: beta.as_f64(),
            });
        }
        Ok(Self { beta })
    }

    #[inline]
    pub fn beta(&self) -> F {
        self.beta
    }
}

/// Laplacian kernel on two fully observed vectors of equal length.
///
/// Returns a value in `(0, 1]`, with 1 exactly when `x == y` componentwise.
pub fn laplacian<F: Scalar>(x: &[F], y: &[F], params: &KernelParams<F>) -> Result<F> {
    if x.len() != y.len() {
        return Err(Error::Dim {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(laplacian_unchecked(x, y, params.beta()))
}

#[inline]
pub(crate) fn laplacian_unchecked<F: Scalar>(x: &[F], y: &[F], beta: F) -> F {
    let mut dist = F::zero();
    for (a, b) in x.iter().zip(y.iter()) {
        dist = dist + (*a - *b).abs();
    }
    (-beta * dist).exp()
}

/// Incomplete Laplacian kernel: the L1 distance runs only over components
/// observed in both rows. Equals [`laplacian`] when both rows are complete,
/// and `exp(0) = 1` when no component is jointly observed.
pub fn incomplete_laplacian<F: Scalar>(
    x_row: MaskedRow<'_, F>,
    y_row: MaskedRow<'_, F>,
    params: &KernelParams<F>,
) -> Result<F> {
    if x_row.len() != y_row.len() {
        return Err(Error::Dim {
            left: x_row.len(),
            right: y_row.len(),
        });
    }
    Ok(incomplete_laplacian_unchecked(x_row, y_row, params.beta()))
}

#[inline]
pub(crate) fn incomplete_laplacian_unchecked<F: Scalar>(
    x_row: MaskedRow<'_, F>,
    y_row: MaskedRow<'_, F>,
    beta: F,
) -> F {
    let mut dist = F::zero();
    for l in 0..x_row.values.len() {
        if x_row.mask[l] && y_row.mask[l] {
            dist = dist + (x_row.values[l] - y_row.values[l]).abs();
        }
    }
    (-beta * dist).exp()
}

/// Median-heuristic bandwidth: `beta = 1 / median(L1 distances)` over all
/// pairs of fully observed rows of `pooled`.
///
/// The median of an even number of distances is the mean of the two central
/// values. Fails with [`Error::InsufficientCompleteRows`] when fewer than two
/// rows are complete and with [`Error::DegenerateScale`] when the median
/// distance is zero.
pub fn median_heuristic<F: Scalar>(pooled: &MaskedMatrix<F>) -> Result<KernelParams<F>> {
    let complete: Vec<usize> = (0..pooled.n())
        .filter(|&i| pooled.is_row_complete(i))
        .collect();
    if complete.len() < 2 {
        return Err(Error::InsufficientCompleteRows {
            found: complete.len(),
        });
    }
    let mut distances = Vec::with_capacity(complete.len() * (complete.len() - 1) / 2);
    for (a, &i) in complete.iter().enumerate() {
        let ri = pooled.row(i);
        for &j in &complete[a + 1..] {
            let rj = pooled.row(j);
            let mut dist = F::zero();
            for l in 0..pooled.d() {
                dist = dist + (ri[l] - rj[l]).abs();
            }
            distances.push(dist);
        }
    }
    let median = median_in_place(&mut distances);
    if median <= F::zero() {
        return Err(Error::DegenerateScale);
    }
    KernelParams::new(F::one() / median)
}

/// Median via partial selection; distances are finite so the comparison is
/// total on the inputs we feed it.
fn median_in_place<F: Scalar>(values: &mut [F]) -> F {
    let len = values.len();
    let cmp = |a: &F, b: &F| a.partial_cmp(b).expect("finite distance");
    if len % 2 == 1 {
        let (_, mid, _) = values.select_nth_unstable_by(len / 2, cmp);
        *mid
    } else {
        let (_, hi, _) = values.select_nth_unstable_by(len / 2, cmp);
        let hi = *hi;
        let (_, lo, _) = values.select_nth_unstable_by(len / 2 - 1, cmp);
        let two = F::from_f64_lossy(2.0);
        (*lo + hi) / two
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::MaskedMatrix;

    fn params(beta: f64) -> KernelParams<f64> {
        KernelParams::new(beta).unwrap()
    }

    #[test]
    fn identical_inputs_give_one() {
        let k = laplacian(&[3.7], &[3.7], &params(2.0)).unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn hand_evaluated_two_dim() {
        let k = laplacian(&[0.0, 0.0], &[1.0, 1.0], &params(0.5)).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_scalar() {
        let k = laplacian(&[0.0], &[2.0], &params(0.5)).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_dim_error() {
        assert!(matches!(
            laplacian(&[0.0], &[1.0, 2.0], &params(1.0)),
            Err(Error::Dim { .. })
        ));
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        assert!(KernelParams::new(0.0).is_err());
        assert!(KernelParams::new(-1.0).is_err());
        assert!(KernelParams::new(f64::INFINITY).is_err());
        assert!(KernelParams::new(f64::NAN).is_err());
    }

    #[test]
    fn incomplete_kernel_of_fully_missing_rows_is_one() {
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 2.0], vec![5.0, -3.0]])
            .unwrap()
            .with_masked_cells(&[(0, 0), (0, 1), (1, 0), (1, 1)]);
        let k = incomplete_laplacian(m.masked_row(0), m.masked_row(1), &params(1.0)).unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn incomplete_kernel_restricts_to_jointly_observed() {
        // x = (1, missing), y = (2, 5): only component 0 contributes.
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 9.0], vec![2.0, 5.0]])
            .unwrap()
            .with_masked_cells(&[(0, 1)]);
        let k = incomplete_laplacian(m.masked_row(0), m.masked_row(1), &params(1.0)).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn incomplete_kernel_equals_laplacian_on_complete_rows() {
        let m = MaskedMatrix::from_rows(vec![vec![1.0, 2.0, -1.0], vec![0.5, 2.5, 3.0]]).unwrap();
        let p = params(0.7);
        let a = incomplete_laplacian(m.masked_row(0), m.masked_row(1), &p).unwrap();
        let b = laplacian(m.row(0), m.row(1), &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn median_heuristic_single_pair() {
        let m: MaskedMatrix<f64> = MaskedMatrix::from_rows(vec![vec![0.0], vec![2.0]]).unwrap();
        let p = median_heuristic(&m).unwrap();
        assert!((p.beta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn median_heuristic_degenerate_scale() {
        let m: MaskedMatrix<f64> = MaskedMatrix::from_rows(vec![vec![0.0], vec![0.0], vec![0.0]]).unwrap();
        assert!(matches!(median_heuristic(&m), Err(Error::DegenerateScale)));
    }

    #[test]
    fn median_heuristic_three_pairs() {
        // distances {1, 3, 2}, median 2, beta = 0.5
        let m: MaskedMatrix<f64> = MaskedMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let p = median_heuristic(&m).unwrap();
        assert!((p.beta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn median_heuristic_ignores_incomplete_rows() {
        let m: MaskedMatrix<f64> = MaskedMatrix::from_rows(vec![vec![0.0], vec![2.0], vec![100.0]])
            .unwrap()
            .with_masked_cells(&[(2, 0)]);
        let p = median_heuristic(&m).unwrap();
        assert!((p.beta() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn median_heuristic_needs_two_complete_rows() {
        let m = MaskedMatrix::from_rows(vec![vec![0.0], vec![2.0]])
            .unwrap()
            .with_masked_cells(&[(1, 0)]);
        assert!(matches!(
            median_heuristic(&m),
            Err(Error::InsufficientCompleteRows { found: 1 })
        ));
    }

    #[test]
    fn even_count_median_averages_central_values() {
        // rows 0,1,2,3 -> distances {1,2,3,1,2,1}; sorted {1,1,1,2,2,3}; median 1.5
        let m: MaskedMatrix<f64> = MaskedMatrix::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let p = median_heuristic(&m).unwrap();
        assert!((p.beta() - 1.0 / 1.5).abs() < 1e-15);
    }
}
