//! Determinant by Laplace (cofactor) expansion.
//!
//! Exponential-work expansion made tractable by memoizing on the set of
//! still-unused columns, so the cost is O(n * 2^n) instead of O(n!). Deliberately
//! avoids any triangular factorization: this is the cross-check for log-det code
//! built on Cholesky.

use nalgebra::{Complex, DMatrix};

type C64 = Complex<f64>;

/// Largest matrix the memoized expansion accepts (2^n table entries).
pub const MAX_DIM: usize = 16;

/// Determinant of a square complex matrix by memoized cofactor expansion.
///
/// Panics if the matrix is not square or larger than `MAX_DIM`.
pub fn cofactor_det(a: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of a non-square matrix");
    assert!(n <= MAX_DIM, "cofactor_det supports up to {MAX_DIM}x{MAX_DIM}");
    if n == 0 {
        return C64::new(1.0, 0.0);
    }

    // table[mask] = det of the submatrix of rows 0..popcount(mask) and columns in mask
    let mut table = vec![C64::new(0.0, 0.0); 1usize << n];
    table[0] = C64::new(1.0, 0.0);
    for mask in 1usize..(1usize << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = C64::new(0.0, 0.0);
        let mut sign = 1.0;
        for col in 0..n {
            if mask & (1 << col) != 0 {
                acc += C64::new(sign, 0.0) * a[(row, col)] * table[mask & !(1 << col)];
                sign = -sign;
            }
        }
        // expansion along the last row: parity of (row + position-in-mask)
        if row % 2 == 1 {
            acc = -acc;
        }
        table[mask] = acc;
    }
    table[(1usize << n) - 1]
}
