//! Symmetric tridiagonal kernels: LDL^T factorization, solves, and the
//! closed-form generalized eigendecomposition of the 2x2 boundary pencil.

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n - 1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> SymTridiag {
        SymTridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Principal submatrix on the contiguous index range `lo..hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> SymTridiag {
        SymTridiag {
            diag: self.diag[lo..hi].to_vec(),
            off: if hi > lo + 1 {
                self.off[lo..hi - 1].to_vec()
            } else {
                Vec::new()
            },
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = self.diag[i] * x[i];
            if i > 0 {
                y[i] += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y[i] += self.off[i] * x[i + 1];
            }
        }
        y
    }

    /// x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.len();
        let mut q = 0.0;
        for i in 0..n {
            q += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                q += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        q
    }

    /// LDL^T factorization; fails on a nonpositive pivot.
    pub fn ldlt(&self) -> Result<TridiagLdlt, NonpositivePivot> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut prev = 0.0f64;
        for i in 0..n {
            let mut di = self.diag[i];
            if i > 0 {
                di -= l[i - 1] * l[i - 1] * prev;
            }
            if !(di > 0.0) {
                return Err(NonpositivePivot { index: i, pivot: di });
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = self.off[i] / di;
            }
            prev = di;
        }
        Ok(TridiagLdlt { d, l })
    }
}

/// Factorization failure: pivot `pivot` at row `index` was not positive.
#[derive(Debug, Clone, Copy)]
pub struct NonpositivePivot {
    pub index: usize,
    pub pivot: f64,
}

/// LDL^T factors of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagLdlt {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagLdlt {
    /// Solve A x = b in O(n).
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

/// Eigenvalues (ascending) of the 2x2 symmetric pencil S q = sigma diag(b0, b1) q,
/// with b0, b1 > 0. Returned with B-normalized eigenvectors.
pub fn sym2x2_generalized(s: [[f64; 2]; 2], b0: f64, b1: f64) -> [(f64, [f64; 2]); 2] {
    // Congruence to an ordinary symmetric problem: T = B^{-1/2} S B^{-1/2}.
    let (r0, r1) = (b0.sqrt(), b1.sqrt());
    let t00 = s[0][0] / (r0 * r0);
    let t11 = s[1][1] / (r1 * r1);
    let t01 = s[0][1] / (r0 * r1);
    let mid = 0.5 * (t00 + t11);
    let disc = (0.25 * (t00 - t11) * (t00 - t11) + t01 * t01).sqrt();
    let lo = mid - disc;
    let hi = mid + disc;
    let vec_for = |lam: f64| -> [f64; 2] {
        // (T - lam I) v = 0; pick the numerically larger row.
        let a = t00 - lam;
        let b = t11 - lam;
        let mut v = if a.abs() >= b.abs() && (a.abs() > 0.0 || t01 != 0.0) {
            [-t01, a]
        } else {
            [b, -t01]
        };
        if v[0] == 0.0 && v[1] == 0.0 {
            v = [1.0, 0.0];
        }
        // undo the B^{1/2} scaling: q = B^{-1/2} v
        let q = [v[0] / r0, v[1] / r1];
        let norm = (q[0] * q[0] * b0 + q[1] * q[1] * b1).sqrt();
        [q[0] / norm, q[1] / norm]
    };
    [(lo, vec_for(lo)), (hi, vec_for(hi))]
}
