//! Thomas algorithm for tridiagonal systems.

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place.
///
/// `lower[0]` and `upper[n-1]` are ignored. `scratch` must have length `n`.
/// Returns `false` on a zero or non-finite pivot; `rhs` then holds garbage.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> bool {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return true;
    }
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return false;
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        if pivot == 0.0 || !pivot.is_finite() {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn laplacian_system() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0; 4];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let mut x = vec![1.0, 0.0, 0.0, 1.0];
        let mut scratch = vec![0.0; 4];
        assert!(solve_tridiagonal(
            &lower,
            &diag,
            &upper,
            &mut x,
            &mut scratch
        ));
        for xi in &x {
            assert!((xi - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_reported() {
        let mut x = vec![1.0, 1.0];
        let mut s = vec![0.0; 2];
        assert!(!solve_tridiagonal(
            &[0.0, 1.0],
            &[0.0, 1.0],
            &[1.0, 0.0],
            &mut x,
            &mut s
        ));
    }

    proptest! {
        #[test]
        fn diagonally_dominant_systems_solve(
            off in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
            xs in prop::collection::vec(-10.0f64..10.0, 40),
        ) {
            let n = off.len();
            let lower: Vec<f64> = off.iter().map(|o| o.0).collect();
            let upper: Vec<f64> = off.iter().map(|o| o.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + lower[i].abs() + upper[i].abs()).collect();
            let x_true = &xs[..n];
            let mut rhs = apply(&lower, &diag, &upper, x_true);
            let mut scratch = vec![0.0; n];
            prop_assert!(solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch));
            for (a, b) in rhs.iter().zip(x_true) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
