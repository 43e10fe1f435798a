//! Small dense complex linear algebra: LU factorization with partial
//! pivoting, solves, inverses, and an infinity-norm condition estimate.
//!
//! Systems here are tiny (2..=12 unknowns), so everything is row-major
//! slices with no blocking. Factorization is in place.

use num_complex::Complex64;

/// In-place LU factorization with partial pivoting.
///
/// On success `a` holds L (unit diagonal, below) and U (on and above), and
/// `piv[k]` records the row swapped into position `k`. Fails when a pivot
/// column is numerically zero.
pub fn lu_factor(a: &mut [Complex64], n: usize, piv: &mut [usize]) -> Result<(), Singular> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(piv.len(), n);
    for k in 0..n {
        let mut best = k;
        let mut best_mag = a[k * n + k].norm_sqr();
        for r in (k + 1)..n {
            let mag = a[r * n + k].norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = r;
            }
        }
        if best_mag < 1e-300 {
            return Err(Singular);
        }
        piv[k] = best;
        if best != k {
            for c in 0..n {
                a.swap(k * n + c, best * n + c);
            }
        }
        let inv_pivot = Complex64::new(1.0, 0.0) / a[k * n + k];
        for r in (k + 1)..n {
            let factor = a[r * n + k] * inv_pivot;
            a[r * n + k] = factor;
            for c in (k + 1)..n {
                let u = a[k * n + c];
                a[r * n + c] -= factor * u;
            }
        }
    }
    Ok(())
}

/// Solves `L U x = P b` in place, given a factorization from [`lu_factor`].
pub fn lu_solve(lu: &[Complex64], n: usize, piv: &[usize], b: &mut [Complex64]) {
    // factorization swaps whole rows, so the stored L is lower triangular in
    // final row positions: permute b completely before substituting
    for k in 0..n {
        b.swap(k, piv[k]);
    }
    for k in 0..n {
        let bk = b[k];
        for r in (k + 1)..n {
            let l = lu[r * n + k];
            b[r] -= l * bk;
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in (k + 1)..n {
            s -= lu[k * n + c] * b[c];
        }
        b[k] = s / lu[k * n + k];
    }
}

/// Marker error for a numerically singular matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

/// Dense inverse via LU; returns `None` when singular.
pub fn inverse(a: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let mut lu = a.to_vec();
    let mut piv = vec![0usize; n];
    lu_factor(&mut lu, n, &mut piv).ok()?;
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        col[j] = Complex64::new(1.0, 0.0);
        lu_solve(&lu, n, &piv, &mut col);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Some(inv)
}

/// Row-sum (infinity) norm.
pub fn norm_inf(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Condition number estimate `cond_inf(A) = ||A||_inf * ||A^-1||_inf`.
///
/// Returns `f64::INFINITY` for numerically singular matrices.
pub fn cond_inf(a: &[Complex64], n: usize) -> f64 {
    match inverse(a, n) {
        Some(inv) => norm_inf(a, n) * norm_inf(&inv, n),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_complex_3x3() {
        let a = vec![
            c(2.0, 1.0),
            c(0.0, 0.0),
            c(1.0, -1.0),
            c(0.0, 3.0),
            c(4.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(-2.0, 2.0),
            c(5.0, 1.0),
        ];
        let x_true = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0)];
        let mut b = vec![c(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        let mut lu = a.clone();
        let mut piv = [0usize; 3];
        lu_factor(&mut lu, 3, &mut piv).unwrap();
        lu_solve(&lu, 3, &piv, &mut b);
        for (got, want) in b.iter().zip(&x_true) {
            assert!((got - want).norm() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn detects_singular() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let mut lu = a.clone();
        let mut piv = [0usize; 2];
        assert_eq!(lu_factor(&mut lu, 2, &mut piv), Err(Singular));
        assert_eq!(cond_inf(&a, 2), f64::INFINITY);
    }

    #[test]
    fn identity_condition_is_one() {
        let a = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!((cond_inf(&a, 2) - 1.0).abs() < 1e-14);
    }
}
