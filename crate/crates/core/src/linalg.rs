//! Small dense symmetric matrices for per-node metric algebra.
//!
//! Every grid node carries an n×n metric with n ≤ [`MAX_DIM`]; these
//! helpers avoid heap allocation in the hot loops.

/// Largest supported manifold dimension.
pub const MAX_DIM: usize = 7;

/// Dense n×n matrix stored in a fixed-size array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} unsupported");
        Mat {
            n,
            a: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `c` times the identity.
    pub fn scalar(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = c;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), rows.len());
            for (j, v) in r.iter().enumerate() {
                m.a[i][j] = *v;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    /// Sets both (i, j) and (j, i).
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
        self.a[j][i] = v;
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] *= c;
            }
        }
        m
    }

    pub fn add(&self, other: &Mat) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] += other.a[i][j];
            }
        }
        m
    }

    pub fn sub(&self, other: &Mat) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Mat) -> Self {
        let n = self.n;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.a[i][j] += aik * other.a[k][j];
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    /// v^T M v
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += v[i] * self.a[i][j] * v[j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.a[i][j] != 0.0 {
                    return false;
                }
            }
        }
        true
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.a[0][0],
            2 => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
            3 => {
                let a = &self.a;
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => {
                let (lu, sign) = match self.lu() {
                    Some(v) => v,
                    None => return 0.0,
                };
                let mut d = sign;
                for i in 0..self.n {
                    d *= lu.a[i][i];
                }
                d
            }
        }
    }

    /// Inverse via the adjugate, A⁻¹ = C(A)ᵀ / det A, for n ≤ 3; Gauss–Jordan
    /// elimination with partial pivoting above that.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        if n <= 3 {
            let d = self.det();
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let mut inv = Mat::zeros(n);
            match n {
                1 => inv.a[0][0] = 1.0 / d,
                2 => {
                    inv.a[0][0] = self.a[1][1] / d;
                    inv.a[0][1] = -self.a[0][1] / d;
                    inv.a[1][0] = -self.a[1][0] / d;
                    inv.a[1][1] = self.a[0][0] / d;
                }
                _ => {
                    let a = &self.a;
                    // cofactors C_ij, stored transposed
                    let c = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                    inv.a[0][0] = c(1, 2, 1, 2) / d;
                    inv.a[1][0] = -c(1, 2, 0, 2) / d;
                    inv.a[2][0] = c(1, 2, 0, 1) / d;
                    inv.a[0][1] = -c(0, 2, 1, 2) / d;
                    inv.a[1][1] = c(0, 2, 0, 2) / d;
                    inv.a[2][1] = -c(0, 2, 0, 1) / d;
                    inv.a[0][2] = c(0, 1, 1, 2) / d;
                    inv.a[1][2] = -c(0, 1, 0, 2) / d;
                    inv.a[2][2] = c(0, 1, 0, 1) / d;
                }
            }
            return Some(inv);
        }
        let mut m = *self;
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m.a[r][col].abs() > m.a[piv][col].abs() {
                    piv = r;
                }
            }
            if m.a[piv][col] == 0.0 {
                return None;
            }
            m.a.swap(col, piv);
            inv.a.swap(col, piv);
            let p = m.a[col][col];
            for j in 0..n {
                m.a[col][j] /= p;
                inv.a[col][j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m.a[r][col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m.a[r][j] -= f * m.a[col][j];
                    inv.a[r][j] -= f * inv.a[col][j];
                }
            }
        }
        Some(inv)
    }

    fn lu(&self) -> Option<(Mat, f64)> {
        let n = self.n;
        let mut m = *self;
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m.a[r][col].abs() > m.a[piv][col].abs() {
                    piv = r;
                }
            }
            if m.a[piv][col] == 0.0 {
                return None;
            }
            if piv != col {
                m.a.swap(col, piv);
                sign = -sign;
            }
            for r in col + 1..n {
                let f = m.a[r][col] / m.a[col][col];
                m.a[r][col] = f;
                for j in col + 1..n {
                    m.a[r][j] -= f * m.a[col][j];
                }
            }
        }
        Some((m, sign))
    }

    /// Lower Cholesky factor; `None` unless the matrix is symmetric positive-definite.
    pub fn cholesky(&self) -> Option<Mat> {
        let n = self.n;
        let mut l = Mat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s -= l.a[i][k] * l.a[j][k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    l.a[i][i] = s.sqrt();
                } else {
                    l.a[i][j] = s / l.a[j][j];
                }
            }
        }
        Some(l)
    }

    /// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
    pub fn symmetric_eigenvalues(&self) -> [f64; MAX_DIM] {
        let n = self.n;
        let mut a = *self;
        let mut out = [0.0; MAX_DIM];
        if a.is_diagonal() {
            for i in 0..n {
                out[i] = a.a[i][i];
            }
            out[..n].sort_by(|x, y| x.total_cmp(y));
            return out;
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a.a[i][j] * a.a[i][j];
                }
            }
            let scale: f64 = (0..n).map(|i| a.a[i][i] * a.a[i][i]).sum::<f64>() + off;
            if off <= 1e-30 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a.a[q][q] - a.a[p][p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.a[k][p];
                        let akq = a.a[k][q];
                        a.a[k][p] = c * akp - s * akq;
                        a.a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a.a[p][k];
                        let aqk = a.a[q][k];
                        a.a[p][k] = c * apk - s * aqk;
                        a.a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        for i in 0..n {
            out[i] = a.a[i][i];
        }
        out[..n].sort_by(|x, y| x.total_cmp(y));
        out
    }

    /// Largest λ with `self·v = λ·other·v` for SPD `other`.
    pub fn max_generalized_eigenvalue(&self, other: &Mat) -> Option<f64> {
        let n = self.n;
        if self.is_diagonal() && other.is_diagonal() {
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                if !(other.a[i][i] > 0.0) {
                    return None;
                }
                best = best.max(self.a[i][i] / other.a[i][i]);
            }
            return Some(best);
        }
        let l = other.cholesky()?;
        let linv = l.inverse()?;
        let m = linv.mul(self).mul(&linv.transpose());
        let mut sym = m;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (m.a[i][j] + m.a[j][i]);
                sym.set_sym(i, j, v);
            }
        }
        Some(sym.symmetric_eigenvalues()[n - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_inverse_3x3() {
        let m = Mat::from_rows(&[&[4.0, 1.0, 0.5], &[1.0, 3.0, 0.2], &[0.5, 0.2, 2.0]]);
        let p = m.mul(&m.inverse().unwrap());
        assert!(p.sub(&Mat::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn elimination_inverse_5x5() {
        let mut m = Mat::identity(5).scale(3.0);
        for i in 0..4 {
            m.set_sym(i, i + 1, 0.7);
        }
        let p = m.mul(&m.inverse().unwrap());
        assert!(p.sub(&Mat::identity(5)).max_abs() < 1e-13);
        let d = m.det();
        let expected = m.symmetric_eigenvalues()[..5].iter().product::<f64>();
        assert!((d - expected).abs() < 1e-10 * d.abs());
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(m.cholesky().is_none());
        assert!(Mat::identity(2).cholesky().is_some());
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 0.0, 5.0]]);
        let e = m.symmetric_eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
        assert!((e[2] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_eigenvalue_of_scaled_metric() {
        let g = Mat::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let lam = g.scale(4.0).max_generalized_eigenvalue(&g).unwrap();
        assert!((lam - 4.0).abs() < 1e-13);
    }
}
