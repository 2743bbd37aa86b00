//! Small dense-matrix helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Matrix exponential by scaling-and-squaring with a fixed-order (6,6) Padé
/// approximant. Matrices here are tiny (orbital count squared), so the
/// simple variant is plenty accurate and fast.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);

    // Padé(6,6): exp(A) ~ q(A)^{-1} p(A) with p/q from the [6/6] table.
    const C: [f64; 7] = [1.0, 0.5, 3.0 / 26.0, 5.0 / 312.0, 5.0 / 3432.0, 1.0 / 11440.0, 1.0 / 308880.0];
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut term = id.clone();
    let mut p = &id * Complex64::new(C[0], 0.0);
    let mut q = p.clone();
    let mut sign = 1.0;
    for c in C.iter().skip(1) {
        term = &term * &scaled;
        sign = -sign;
        p += &term * Complex64::new(*c, 0.0);
        q += &term * Complex64::new(*c * sign, 0.0);
    }
    let mut result = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Real symmetric matrix promoted to a complex one.
pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}

/// Determinant of a small square complex matrix via LU.
pub fn det(a: &DMatrix<Complex64>) -> Complex64 {
    a.clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<Complex64>::zeros(4, 4);
        let e = expm(&z);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(e[(i, j)].re, expect, epsilon = 1e-15);
                assert_relative_eq!(e[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn expm_matches_diagonal_closed_form() {
        let mut a = DMatrix::<Complex64>::zeros(3, 3);
        a[(0, 0)] = Complex64::new(0.3, 0.0);
        a[(1, 1)] = Complex64::new(-1.7, 0.0);
        a[(2, 2)] = Complex64::new(0.0, 2.0);
        let e = expm(&a);
        for i in 0..3 {
            let want = a[(i, i)].exp();
            assert_relative_eq!(e[(i, i)].re, want.re, epsilon = 1e-13);
            assert_relative_eq!(e[(i, i)].im, want.im, epsilon = 1e-13);
        }
    }

    #[test]
    fn expm_antihermitian_is_unitary() {
        // i * symmetric => anti-hermitian generator, unitary exponential.
        let s = DMatrix::<f64>::from_row_slice(3, 3, &[0.0, 1.2, -0.4, 1.2, 0.5, 0.9, -0.4, 0.9, -0.3]);
        let a = DMatrix::from_fn(3, 3, |i, j| Complex64::new(0.0, s[(i, j)]));
        let u = expm(&a);
        let prod = u.adjoint() * &u;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(prod[(i, j)].re, expect, epsilon = 1e-13);
                assert_relative_eq!(prod[(i, j)].im, 0.0, epsilon = 1e-13);
            }
        }
    }
}
