//! Inverse-Wishart sampling via the Bartlett decomposition.
//!
//! Parameterization: IW(ν, Λ) has mean Λ/(ν − d − 1) for ν > d + 1. A draw
//! is produced as the inverse of a Wishart(ν, Λ⁻¹) variate, itself built
//! from the Bartlett factor of its scale, so the whole path works on
//! triangular matrices and never forms an unstable dense inverse.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd, lower_triangular_inverse, Mat, SpdMatrix};
use crate::math;
use crate::rng::RngStream;

pub fn sample_inverse_wishart(
    nu: f64,
    scale: &SpdMatrix,
    rng: &mut RngStream,
) -> Result<SpdMatrix> {
    let d = scale.dim();
    if !(nu > d as f64 - 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "inverse-Wishart needs nu > d - 1 = {}, got {nu}",
            d as f64 - 1.0
        )));
    }
    let scale_chol = cholesky_psd(scale)?;
    let lambda_inv = scale_chol.inverse();
    let lv = cholesky_psd(&lambda_inv)?;

    // Bartlett factor: A lower triangular, A_ii² ~ χ²(ν − i), i 0-based.
    let mut a = Mat::zeros(d, d);
    for i in 0..d {
        a[(i, i)] = math::sqrt(rng.chi_square(nu - i as f64)?);
        for j in 0..i {
            a[(i, j)] = rng.standard_normal();
        }
    }
    // W = (Lᵥ A)(Lᵥ A)ᵀ ~ Wishart(ν, Λ⁻¹); the draw is W⁻¹ = T⁻ᵀ T⁻¹.
    let t = lv.lower().mul(&a);
    let tinv = lower_triangular_inverse(&t);
    let n = d;
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in j..n {
                s += tinv[(k, i)] * tinv[(k, j)];
            }
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    Ok(SpdMatrix::symmetrized(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_degrees_of_freedom() {
        let mut rng = RngStream::new(0);
        let s = SpdMatrix::identity(3);
        assert!(sample_inverse_wishart(1.9, &s, &mut rng).is_err());
        assert!(sample_inverse_wishart(2.5, &s, &mut rng).is_ok());
    }

    #[test]
    fn rejects_non_pd_scale() {
        let mut rng = RngStream::new(0);
        let s = SpdMatrix::new(Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap()).unwrap();
        assert!(sample_inverse_wishart(5.0, &s, &mut rng).is_err());
    }

    #[test]
    fn monte_carlo_mean_matches_analytic_identity_scale() {
        // nu = 7, d = 2, Λ = I: mean = I / (7 - 2 - 1) = 0.25 I.
        let mut rng = RngStream::new(314);
        let s = SpdMatrix::identity(2);
        let n = 10_000;
        let mut acc = Mat::zeros(2, 2);
        for _ in 0..n {
            let draw = sample_inverse_wishart(7.0, &s, &mut rng).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    acc[(i, j)] += draw[(i, j)];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let mean = acc[(i, j)] / n as f64;
                let expect = if i == j { 0.25 } else { 0.0 };
                // 5% of the diagonal scale covers exact zeros off-diagonal.
                assert!((mean - expect).abs() < 0.05 * 0.25, "entry ({i},{j}) = {mean}");
            }
        }
    }

    #[test]
    fn monte_carlo_mean_matches_analytic_general_scale() {
        let scale = SpdMatrix::new(
            Mat::from_rows(&[
                &[2.0, 0.4, 0.0, 0.0],
                &[0.4, 1.0, 0.2, 0.0],
                &[0.0, 0.2, 1.5, -0.3],
                &[0.0, 0.0, -0.3, 0.8],
            ])
            .unwrap(),
        )
        .unwrap();
        let d = 4.0;
        let nu = 12.0;
        let denom = nu - d - 1.0;
        let mut rng = RngStream::new(2718);
        let n = 10_000;
        let mut acc = Mat::zeros(4, 4);
        for _ in 0..n {
            let draw = sample_inverse_wishart(nu, &scale, &mut rng).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    acc[(i, j)] += draw[(i, j)];
                }
            }
        }
        let diag_scale = (0..4).map(|i| scale[(i, i)] / denom).fold(0.0f64, f64::max);
        for i in 0..4 {
            for j in 0..4 {
                let mean = acc[(i, j)] / n as f64;
                let expect = scale[(i, j)] / denom;
                assert!(
                    (mean - expect).abs() < 0.05 * diag_scale,
                    "entry ({i},{j}): {mean} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn draws_are_symmetric_positive_definite() {
        let mut rng = RngStream::new(55);
        let s = SpdMatrix::new(Mat::from_rows(&[&[1.0, 0.3], &[0.3, 2.0]]).unwrap()).unwrap();
        for _ in 0..200 {
            let draw = sample_inverse_wishart(4.0, &s, &mut rng).unwrap();
            assert_eq!(draw[(0, 1)], draw[(1, 0)]);
            assert!(cholesky_psd(&draw).is_ok());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = SpdMatrix::identity(3);
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        let da = sample_inverse_wishart(6.0, &s, &mut a).unwrap();
        let db = sample_inverse_wishart(6.0, &s, &mut b).unwrap();
        assert_eq!(da, db);
    }
}
