use crate::error::{Error, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` couples row `i + 1` to unknown `i`, `upper[i]` couples row `i` to unknown
/// `i + 1`; both have length `n - 1`. A pivot whose magnitude drops below `eps` times the
/// row's coefficient scale is reported as [`Error::ZeroPivot`]. Strictly diagonally
/// dominant systems never trigger it.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty tridiagonal system".into()));
    }
    if lower.len() != n - 1 || upper.len() != n - 1 || rhs.len() != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal shape mismatch: diag {n}, lower {}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }

    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for i in 0..n {
        let a = if i > 0 { lower[i - 1] } else { 0.0 };
        let c = if i + 1 < n { upper[i] } else { 0.0 };
        let pivot = diag[i] - a * prev_c;
        let scale = diag[i].abs() + a.abs() + c.abs();
        if !pivot.is_finite() || pivot.abs() <= f64::EPSILON * scale {
            return Err(Error::ZeroPivot { row: i });
        }
        prev_c = c / pivot;
        prev_d = (rhs[i] - a * prev_d) / pivot;
        c_prime[i] = prev_c;
        d_prime[i] = prev_d;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}
