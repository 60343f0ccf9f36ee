//! Dense linear algebra used by the collocation solver and the Hill
//! eigensolver: a one-sided Jacobi SVD for real matrices (singular values,
//! min-norm least squares, null-space extraction) and a complex
//! Hessenberg + shifted-QR eigenvalue solver.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Column-major real matrix.
#[derive(Clone, Debug)]
pub struct RealMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[c * self.rows + r]
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for c in 0..self.cols {
            let col = self.column(c);
            let xc = x[c];
            for (yi, &aij) in y.iter_mut().zip(col) {
                *yi += aij * xc;
            }
        }
        y
    }
}

/// Thin SVD A = U diag(sigma) V^T of a square real matrix by one-sided
/// Jacobi rotations on columns. Singular values are returned descending.
pub struct Svd {
    pub u: RealMatrix,
    pub sigma: Vec<f64>,
    pub v: RealMatrix,
}

pub fn svd_jacobi(a: &RealMatrix) -> Svd {
    let n = a.cols;
    let m = a.rows;
    let mut w = a.clone();
    let mut v = RealMatrix::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }
    let eps = 1e-15;
    // overall scale: largest column norm squared, for skipping the
    // numerically-null columns that would otherwise churn forever
    let mut scale2 = 0.0f64;
    for c in 0..n {
        scale2 = scale2.max(w.column(c).iter().map(|x| x * x).sum::<f64>());
    }
    let floor2 = scale2 * 1e-30;
    for _sweep in 0..40 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                {
                    let (lo, hi) = (p.min(q), p.max(q));
                    let (head, tail) = w.data.split_at(hi * m);
                    let colp = &head[lo * m..lo * m + m];
                    let colq = &tail[..m];
                    for i in 0..m {
                        app += colp[i] * colp[i];
                        aqq += colq[i] * colq[i];
                        apq += colp[i] * colq[i];
                    }
                }
                if app <= floor2 || aqq <= floor2 {
                    continue;
                }
                let denom = (app * aqq).sqrt();
                if apq.abs() <= eps * denom || denom == 0.0 {
                    continue;
                }
                off = off.max(apq.abs() / denom);
                // Jacobi rotation angle
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if off < eps {
            break;
        }
    }
    // Column norms are the singular values; normalize U.
    let mut order: Vec<usize> = (0..n).collect();
    let mut sig: Vec<f64> = (0..n)
        .map(|c| w.column(c).iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).unwrap());
    let mut u = RealMatrix::zeros(m, n);
    let mut vv = RealMatrix::zeros(n, n);
    let mut s_sorted = vec![0.0; n];
    for (new, &old) in order.iter().enumerate() {
        s_sorted[new] = sig[old];
        let scale = if sig[old] > 0.0 { 1.0 / sig[old] } else { 0.0 };
        for i in 0..m {
            *u.at_mut(i, new) = w.at(i, old) * scale;
        }
        for i in 0..n {
            *vv.at_mut(i, new) = v.at(i, old);
        }
    }
    sig = s_sorted;
    Svd { u, sigma: sig, v: vv }
}

fn rotate_columns(m: &mut RealMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows;
    let (lo, hi) = (p.min(q), p.max(q));
    let (head, tail) = m.data.split_at_mut(hi * rows);
    let colp = &mut head[lo * rows..lo * rows + rows];
    let colq = &mut tail[..rows];
    let (cp, cq): (&mut [f64], &mut [f64]) = if p < q { (colp, colq) } else { (colq, colp) };
    for i in 0..rows {
        let (x, y) = (cp[i], cq[i]);
        cp[i] = c * x - s * y;
        cq[i] = s * x + c * y;
    }
}

impl Svd {
    /// Min-norm least-squares solve with relative rank cutoff `tau`.
    pub fn solve_min_norm(&self, b: &[f64], tau: f64) -> Vec<f64> {
        let n = self.v.rows;
        let cutoff = tau * self.sigma.first().copied().unwrap_or(0.0);
        let mut x = vec![0.0; n];
        for j in 0..self.sigma.len() {
            if self.sigma[j] <= cutoff {
                continue;
            }
            let uj = self.u.column(j);
            let coeff = uj.iter().zip(b).map(|(u, b)| u * b).sum::<f64>() / self.sigma[j];
            for (xi, &vij) in x.iter_mut().zip(self.v.column(j)) {
                *xi += coeff * vij;
            }
        }
        x
    }

    /// Orthonormal basis of the numerical null space (sigma <= tau*sigma_max).
    pub fn null_space(&self, tau: f64) -> Vec<Vec<f64>> {
        let cutoff = tau * self.sigma.first().copied().unwrap_or(0.0);
        (0..self.sigma.len())
            .filter(|&j| self.sigma[j] <= cutoff)
            .map(|j| self.v.column(j).to_vec())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Complex dense eigenvalues
// ---------------------------------------------------------------------------

/// Row-major complex matrix (square).
#[derive(Clone)]
pub struct ComplexMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Complex64 {
        &mut self.data[r * self.n + c]
    }
}

/// All eigenvalues of a general complex matrix: Householder reduction to
/// upper Hessenberg form followed by explicit-shift QR with Wilkinson
/// shifts and deflation.
pub fn complex_eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.n;
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n; // active block is 0..hi
    let mut iter_since_deflation = 0usize;
    let max_iters = 40 * n.max(8);
    let mut total = 0usize;
    while hi > 0 {
        // find the active block's lower edge
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h.at(lo, lo - 1).norm();
            let scale = h.at(lo, lo).norm() + h.at(lo - 1, lo - 1).norm();
            if sub <= f64::EPSILON * scale.max(1e-300) {
                *h.at_mut(lo, lo - 1) = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs[hi - 1] = h.at(hi - 1, hi - 1);
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total += 1;
        iter_since_deflation += 1;
        if total > max_iters {
            return Err(Error::numerical(
                "complex_eigenvalues",
                format!("QR iteration failed to converge (n = {n})"),
            ));
        }
        // Wilkinson shift from the trailing 2x2 of the active block, with an
        // occasional exceptional shift to break limit cycles.
        let shift = if iter_since_deflation % 12 == 0 {
            h.at(hi - 1, hi - 2).norm() * Complex64::new(0.75, 0.0) + h.at(hi - 1, hi - 1)
        } else {
            wilkinson_shift(
                h.at(hi - 2, hi - 2),
                h.at(hi - 2, hi - 1),
                h.at(hi - 1, hi - 2),
                h.at(hi - 1, hi - 1),
            )
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(eigs)
}

fn hessenberg(h: &mut ComplexMatrix) {
    let n = h.n;
    for col in 0..n.saturating_sub(2) {
        // Householder vector for rows col+1..n of column col
        let mut norm2 = 0.0;
        for r in (col + 1)..n {
            norm2 += h.at(r, col).norm_sqr();
        }
        let x0 = h.at(col + 1, col);
        let alpha = norm2.sqrt();
        if alpha <= 1e-300 {
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let v0 = x0 + phase * alpha;
        let mut v: Vec<Complex64> = Vec::with_capacity(n - col - 1);
        v.push(v0);
        for r in (col + 2)..n {
            v.push(h.at(r, col));
        }
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        // H = I - 2 v v* / |v|^2, applied from left and right
        for c in col..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                dot += vi.conj() * h.at(col + 1 + i, c);
            }
            let f = 2.0 * dot / vnorm2;
            for (i, vi) in v.iter().enumerate() {
                let val = h.at(col + 1 + i, c) - f * vi;
                *h.at_mut(col + 1 + i, c) = val;
            }
        }
        for r in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                dot += h.at(r, col + 1 + i) * *vi;
            }
            let f = 2.0 * dot / vnorm2;
            for (i, vi) in v.iter().enumerate() {
                let val = h.at(r, col + 1 + i) - f * vi.conj();
                *h.at_mut(r, col + 1 + i) = val;
            }
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit-shift QR step on the active block lo..hi via Givens rotations.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.n;
    let m = hi - lo;
    if m < 2 {
        return;
    }
    let mut cs = vec![(0.0f64, Complex64::new(0.0, 0.0)); m - 1];
    for i in lo..hi {
        *h.at_mut(i, i) -= shift;
    }
    // QR by Givens on the subdiagonal
    for i in lo..(hi - 1) {
        let a = h.at(i, i);
        let b = h.at(i + 1, i);
        let (c, s) = givens(a, b);
        cs[i - lo] = (c, s);
        for col in i..n {
            let x = h.at(i, col);
            let y = h.at(i + 1, col);
            *h.at_mut(i, col) = c * x + s * y;
            *h.at_mut(i + 1, col) = -s.conj() * x + c * y;
        }
    }
    // RQ
    for i in lo..(hi - 1) {
        let (c, s) = cs[i - lo];
        let top = (i + 2).min(hi);
        for row in 0..top {
            let x = h.at(row, i);
            let y = h.at(row, i + 1);
            *h.at_mut(row, i) = c * x + s.conj() * y;
            *h.at_mut(row, i + 1) = -s * x + c * y;
        }
    }
    for i in lo..hi {
        *h.at_mut(i, i) += shift;
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let an = a.norm();
    let t = (an * an + bn * bn).sqrt();
    if an == 0.0 {
        (0.0, b.conj() / bn)
    } else {
        let c = an / t;
        let s = (a / an) * b.conj() / t;
        (c, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_diagonal() {
        let mut a = RealMatrix::zeros(3, 3);
        *a.at_mut(0, 0) = 3.0;
        *a.at_mut(1, 1) = -2.0;
        *a.at_mut(2, 2) = 0.5;
        let s = svd_jacobi(&a);
        assert!((s.sigma[0] - 3.0).abs() < 1e-14);
        assert!((s.sigma[1] - 2.0).abs() < 1e-14);
        assert!((s.sigma[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn svd_min_norm_solves_rank_deficient_system() {
        // A = outer product -> rank 1
        let mut a = RealMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                *a.at_mut(i, j) = (i + 1) as f64 * (j + 1) as f64;
            }
        }
        let s = svd_jacobi(&a);
        assert!(s.sigma[1] < 1e-12 * s.sigma[0]);
        let b = vec![1.0, 2.0, 3.0];
        let x = s.solve_min_norm(&b, 1e-10);
        let ax = a.matvec(&x);
        for (axi, bi) in ax.iter().zip(&b) {
            assert!((axi - bi).abs() < 1e-12);
        }
        assert_eq!(s.null_space(1e-10).len(), 2);
    }

    #[test]
    fn svd_reconstructs_random_matrix() {
        let n = 24;
        let mut a = RealMatrix::zeros(n, n);
        let mut state = 1u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                *a.at_mut(i, j) = rnd();
            }
        }
        let s = svd_jacobi(&a);
        // check A v_j = sigma_j u_j
        for j in 0..n {
            let av = a.matvec(s.v.column(j));
            for i in 0..n {
                assert!((av[i] - s.sigma[j] * s.u.at(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalues_of_companion_matrix() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let mut a = ComplexMatrix::zeros(3);
        *a.at_mut(0, 0) = Complex64::new(6.0, 0.0);
        *a.at_mut(0, 1) = Complex64::new(-11.0, 0.0);
        *a.at_mut(0, 2) = Complex64::new(6.0, 0.0);
        *a.at_mut(1, 0) = Complex64::new(1.0, 0.0);
        *a.at_mut(2, 1) = Complex64::new(1.0, 0.0);
        let mut eigs = complex_eigenvalues(&a).unwrap();
        eigs.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (e, want) in eigs.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - Complex64::new(want, 0.0)).norm() < 1e-10, "{e} vs {want}");
        }
    }

    #[test]
    fn eigenvalues_of_random_complex_matrix_satisfy_trace_and_det() {
        let n = 20;
        let mut a = ComplexMatrix::zeros(n);
        let mut state = 7u64;
        let mut rnd = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(99);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut trace = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                *a.at_mut(i, j) = Complex64::new(rnd(), rnd());
            }
            trace += a.at(i, i);
        }
        let eigs = complex_eigenvalues(&a).unwrap();
        let sum: Complex64 = eigs.iter().sum();
        assert!((sum - trace).norm() < 1e-9 * trace.norm().max(1.0));
    }

    #[test]
    fn eigenvalues_of_hermitian_tridiagonal_are_real() {
        let n = 16;
        let mut a = ComplexMatrix::zeros(n);
        for i in 0..n {
            *a.at_mut(i, i) = Complex64::new(2.0, 0.0);
            if i + 1 < n {
                *a.at_mut(i, i + 1) = Complex64::new(-1.0, 0.3);
                *a.at_mut(i + 1, i) = Complex64::new(-1.0, -0.3);
            }
        }
        let eigs = complex_eigenvalues(&a).unwrap();
        for e in eigs {
            assert!(e.im.abs() < 1e-10, "non-real eigenvalue {e} of Hermitian matrix");
        }
    }
}
