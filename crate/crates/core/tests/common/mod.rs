#![allow(dead_code)]

use frontfix::verify::equilibrium_front;
use frontfix::Expr;

/// Root of 2 tanh(z) = z.
pub fn s_star() -> f64 {
    equilibrium_front(2.0, 1.0, 1.0).unwrap()
}

/// `c cosh(sqrt(lambda) (b - x)) / cosh(sqrt(lambda) b)` as expression text.
pub fn cosh_profile_text(c: f64, lambda: f64, b: f64) -> String {
    let k = lambda.sqrt();
    format!("{c:?}*cosh({k:?}*({b:?} - x))/cosh({k:?}*{b:?})")
}

pub fn cosh_profile(c: f64, lambda: f64, b: f64) -> Expr {
    Expr::parse(&cosh_profile_text(c, lambda, b), &["x"]).unwrap()
}

pub fn t_expr(text: &str) -> Expr {
    Expr::parse(text, &["t"]).unwrap()
}

pub fn x_expr(text: &str) -> Expr {
    Expr::parse(text, &["x"]).unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= m * p;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Expands tridiagonal bands into a dense matrix.
pub fn dense_from_bands(lower: &[f64], diag: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i > 0 {
            a[i][i - 1] = lower[i - 1];
        }
        if i + 1 < n {
            a[i][i + 1] = upper[i];
        }
    }
    a
}

/// Random strictly diagonally dominant tridiagonal system of size `n`.
pub fn random_dominant_system(rng: &mut impl rand::Rng, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let lower: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let off = if i > 0 { lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * (off + rng.gen_range(0.1..2.0))
        })
        .collect();
    let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
    (lower, diag, upper, rhs)
}
