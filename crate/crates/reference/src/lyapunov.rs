//! Continuous Lyapunov equation solved through Kronecker vectorization.

use nalgebra::DMatrix;

/// Solves `A^T P + P A = -W` for symmetric `P` by building the n^2 x n^2
/// Kronecker system and LU-factorizing it. Intended for the small state
/// dimensions that appear in per-axis control tests.
pub fn lyapunov_solve(a: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!((w.nrows(), w.ncols()), (n, n));
    assert!(n <= 8, "vectorized Lyapunov solve capped at 8 states");

    // vec(A^T P) = (I kron A^T) vec(P); vec(P A) = (A^T kron I) vec(P)
    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let big = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DMatrix::from_column_slice(n * n, 1, (-w).as_slice());
    let sol = big
        .lu()
        .solve(&rhs)
        .expect("Lyapunov operator is singular: A has mirrored eigenvalues");
    let p = DMatrix::from_column_slice(n, n, sol.as_slice());
    // symmetrize away rounding asymmetry
    (&p + p.transpose()) * 0.5
}
