//! Leading principal minors of a general (non-symmetric) Toeplitz matrix.
//!
//! The matrix is `T[i][j] = t_{i-j}`, described by its first column `t_0, t_1, ...` and its
//! first row `t_0, t_{-1}, ...`.

use crate::real::{CompensatedSum, Real};

/// A Toeplitz matrix given by its first column and first row (`col[0] == row[0]`).
#[derive(Debug, Clone)]
pub struct Toeplitz<T> {
    col: Vec<T>,
    row: Vec<T>,
}

impl<T: Real> Toeplitz<T> {
    /// `col[k] = t_k`, `row[k] = t_{-k}`; both of length `n`, sharing `t_0`.
    pub fn new(col: Vec<T>, row: Vec<T>) -> Self {
        assert_eq!(col.len(), row.len(), "column and row length differ");
        assert!(!col.is_empty(), "empty Toeplitz matrix");
        assert!(col[0] == row[0], "column and row disagree on the diagonal");
        Self { col, row }
    }

    pub fn order(&self) -> usize {
        self.col.len()
    }

    /// `t_k` for `|k| < order`.
    #[inline]
    pub fn diag(&self, k: isize) -> T {
        if k >= 0 {
            self.col[k as usize]
        } else {
            self.row[k.unsigned_abs()]
        }
    }

    /// Dense `n x n` leading block, row-major.
    pub fn leading_block(&self, n: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.diag(i as isize - j as isize));
            }
        }
        out
    }
}

/// Where and why the minor recursion stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown<T> {
    /// Minors `det T_1 .. det T_k` computed before the breakdown.
    pub minors: Vec<T>,
    /// 1-based order of the first minor that fell below the threshold.
    pub order: usize,
}

/// Levinson recursion for all leading principal minors in `O(n^2)`.
///
/// Keeps the forward and backward solutions `T_n f = e_1`, `T_n b = e_n`. With
/// `d_n = det T_n / det T_{n-1}`, extending by one row and column gives
/// `d_{n+1} = d_n (1 - e_f e_b)` where `e_f`, `e_b` are the residuals of the zero-padded
/// vectors. Stops with [`Breakdown`] once `|det T_k| < threshold`, since the vectors then
/// carry entries of order `1 / det` and further minors lose all absolute accuracy.
pub fn levinson_minors<T: Real>(t: &Toeplitz<T>, threshold: T) -> Result<Vec<T>, Breakdown<T>> {
    let n_max = t.order();
    let mut minors = Vec::with_capacity(n_max);
    let t0 = t.diag(0);
    if t0.abs() < threshold {
        return Err(Breakdown { minors, order: 1 });
    }
    minors.push(t0);
    let mut ratio = t0;
    let mut fwd = vec![T::one() / t0];
    let mut bwd = vec![T::one() / t0];
    let mut next_f = Vec::with_capacity(n_max);
    let mut next_b = Vec::with_capacity(n_max);

    for n in 1..n_max {
        let mut ef = CompensatedSum::new();
        let mut eb = CompensatedSum::new();
        for i in 0..n {
            ef.add(t.diag((n - i) as isize) * fwd[i]);
            eb.add(t.diag(-((i + 1) as isize)) * bwd[i]);
        }
        let (ef, eb) = (ef.value(), eb.value());
        let denom = T::one() - ef * eb;
        ratio = ratio * denom;
        let det = minors[n - 1] * ratio;
        if det.abs() < threshold || !det.is_finite() {
            return Err(Breakdown {
                minors,
                order: n + 1,
            });
        }
        minors.push(det);

        next_f.clear();
        next_b.clear();
        for i in 0..=n {
            let f_pad = if i < n { fwd[i] } else { T::zero() };
            let b_pad = if i > 0 { bwd[i - 1] } else { T::zero() };
            next_f.push((f_pad - ef * b_pad) / denom);
            next_b.push((b_pad - eb * f_pad) / denom);
        }
        std::mem::swap(&mut fwd, &mut next_f);
        std::mem::swap(&mut bwd, &mut next_b);
    }
    Ok(minors)
}

/// Determinant by Gaussian elimination with partial pivoting, consuming `a` (row-major `n x n`).
pub fn lu_determinant<T: Real>(mut a: Vec<T>, n: usize) -> T {
    assert_eq!(a.len(), n * n);
    let mut det = T::one();
    for k in 0..n {
        let (p, pmax) =
            (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold(
                    (k, -T::one()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pmax == T::zero() {
            return T::zero();
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det = det * pivot;
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in (k + 1)..n {
                a[i * n + j] = a[i * n + j] - factor * a[k * n + j];
            }
        }
    }
    det
}

/// Leading minor of order `n` by pivoted elimination (`O(n^3)`).
pub fn lu_minor<T: Real>(t: &Toeplitz<T>, n: usize) -> T {
    lu_determinant(t.leading_block(n), n)
}
