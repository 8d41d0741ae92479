use nalgebra::DMatrix;

use crate::error::{CasimirError, Result};

/// `ln det A` for a matrix with positive determinant, by in-place LU with
/// partial pivoting on the column-major storage. The log-magnitudes of the
/// pivots are accumulated so the result never overflows.
pub fn ln_det_positive(a: &mut DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let data = a.as_mut_slice();
    let mut ln_det = 0.0;
    let mut negative = false;
    for k in 0..n {
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let col_k = &mut head[k * n..];
        let (mut piv, mut best) = (k, col_k[k].abs());
        for (i, v) in col_k.iter().enumerate().skip(k + 1) {
            if v.abs() > best {
                best = v.abs();
                piv = i;
            }
        }
        if !(best > 0.0) || !best.is_finite() {
            return Err(CasimirError::SingularFactorization(format!(
                "zero or non-finite pivot in column {k} of a {n}x{n} matrix"
            )));
        }
        if piv != k {
            negative = !negative;
            col_k.swap(k, piv);
            for col in tail.chunks_exact_mut(n) {
                col.swap(k, piv);
            }
            // columns left of k hold L factors that are no longer read
        }
        let p = col_k[k];
        if p < 0.0 {
            negative = !negative;
        }
        ln_det += p.abs().ln();
        let inv = 1.0 / p;
        let lower = &mut col_k[k + 1..];
        for v in lower.iter_mut() {
            *v *= inv;
        }
        let lower: &[f64] = lower;
        for col in tail.chunks_exact_mut(n) {
            let u = col[k];
            if u == 0.0 {
                continue;
            }
            for (c, l) in col[k + 1..].iter_mut().zip(lower) {
                *c -= l * u;
            }
        }
    }
    if negative {
        return Err(CasimirError::SingularFactorization(format!(
            "determinant of a {n}x{n} matrix is negative; the multipole truncation or frequency is outside the valid range"
        )));
    }
    Ok(ln_det)
}

/// `ln det (1 - N)` for a square `N`, consuming it.
pub fn ln_det_one_minus(mut n: DMatrix<f64>) -> Result<f64> {
    n.neg_mut();
    for i in 0..n.nrows() {
        n[(i, i)] += 1.0;
    }
    ln_det_positive(&mut n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_nalgebra_determinant() {
        let m = DMatrix::from_fn(7, 7, |i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64) + if i == j { 2.0 } else { 0.0 });
        let expect = m.determinant().ln();
        let mut c = m.clone();
        let got = ln_det_positive(&mut c).unwrap();
        assert_relative_eq!(got, expect, max_relative = 1e-13);
    }

    #[test]
    fn pivoting_matches_nalgebra() {
        let m = DMatrix::from_fn(30, 30, |i, j| ((i * 7 + j * 13) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 });
        let det = m.determinant();
        let mut c = m.clone();
        if det < 0.0 {
            c.row_mut(0).neg_mut();
        }
        let got = ln_det_positive(&mut c).unwrap();
        assert_relative_eq!(got, det.abs().ln(), max_relative = 1e-12);
    }

    #[test]
    fn negative_and_singular_detected() {
        let mut m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(ln_det_positive(&mut m).is_err());
        let mut z = DMatrix::<f64>::zeros(3, 3);
        assert!(ln_det_positive(&mut z).is_err());
    }

    #[test]
    fn huge_diagonal_does_not_overflow() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_element(40, 1e300));
        assert_relative_eq!(ln_det_one_minus(-m).unwrap(), 40.0 * (1e300f64 + 1.0).ln(), max_relative = 1e-14);
    }
}
