//! Dense complex LU with partial pivoting, reciprocal-condition estimation
//! and a shifted-system solver that reuses one Hessenberg reduction.

use nalgebra::{DMatrix, Hessenberg};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LU factorisation `P A = L U` of a square complex matrix whose nonzeros
/// below the diagonal are confined to `lower_bandwidth` subdiagonals.
///
/// A full matrix uses `lower_bandwidth = n - 1`; an upper Hessenberg matrix
/// uses `1`, which makes factorisation and solves `O(n^2)`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower_bandwidth: usize,
    // row-major; U in the upper triangle, multipliers below
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
    norm1: f64,
}

impl BandedLu {
    /// Factorises the row-major `n x n` matrix `a`.
    pub fn factor(mut a: Vec<Complex64>, n: usize, lower_bandwidth: usize) -> Self {
        assert_eq!(a.len(), n * n);
        let norm1 = norm1_row_major(&a, n);
        let bw = lower_bandwidth.min(n.saturating_sub(1));
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + bw).min(n - 1);
            let mut p = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..=last {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots.push(p);
            if p != k {
                for j in k..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            if pivot == ZERO {
                continue;
            }
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let row_k = &head[k * n..];
            for i in k + 1..=last {
                let row_i = &mut tail[(i - k - 1) * n..(i - k) * n];
                let l = row_i[k] / pivot;
                row_i[k] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        row_i[j] -= l * row_k[j];
                    }
                }
            }
        }
        BandedLu {
            n,
            lower_bandwidth: bw,
            lu: a,
            pivots,
            norm1,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `true` when some pivot vanished exactly.
    pub fn is_singular(&self) -> bool {
        (0..self.n).any(|k| self.lu[k * self.n + k] == ZERO)
    }

    /// 1-norm of the factorised matrix.
    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let bw = self.lower_bandwidth;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != ZERO {
                for i in k + 1..=(k + bw).min(n - 1) {
                    b[i] -= self.lu[i * n + k] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let row = &self.lu[k * n..(k + 1) * n];
            let mut s = b[k];
            for j in k + 1..n {
                s -= row[j] * b[j];
            }
            b[k] = s / row[k];
        }
    }

    /// Solves `A^H x = b` in place.
    pub fn solve_adjoint_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let bw = self.lower_bandwidth;
        // U^H y = b, forward
        for k in 0..n {
            let mut s = b[k];
            for j in 0..k {
                s -= self.lu[j * n + k].conj() * b[j];
            }
            b[k] = s / self.lu[k * n + k].conj();
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + bw).min(n.saturating_sub(1)) {
                s -= self.lu[i * n + k].conj() * b[i];
            }
            b[k] = s;
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Reciprocal 1-norm condition estimate `1 / (|A|_1 |A^-1|_1)`.
    pub fn rcond(&self) -> f64 {
        if self.is_singular() || self.norm1 == 0.0 {
            return 0.0;
        }
        let inv_norm = estimate_inverse_norm1(self);
        if !inv_norm.is_finite() || inv_norm == 0.0 {
            return 0.0;
        }
        1.0 / (self.norm1 * inv_norm)
    }
}

fn norm1_row_major(a: &[Complex64], n: usize) -> f64 {
    let mut cols = vec![0.0; n];
    for row in a.chunks_exact(n) {
        for (c, v) in cols.iter_mut().zip(row) {
            *c += v.norm();
        }
    }
    cols.into_iter().fold(0.0, f64::max)
}

fn vec_norm1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Hager's 1-norm estimator with Higham's alternating-sign safeguard.
fn estimate_inverse_norm1(lu: &BandedLu) -> f64 {
    let n = lu.dim();
    let mut probe = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut estimate = 0.0;
    for iter in 0..5 {
        let y = lu.solve(&probe);
        let norm = vec_norm1(&y);
        if iter > 0 && norm <= estimate {
            break;
        }
        estimate = norm;
        let mut z: Vec<Complex64> = y
            .iter()
            .map(|v| {
                let a = v.norm();
                if a == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    v / a
                }
            })
            .collect();
        lu.solve_adjoint_in_place(&mut z);
        let (j, zmax) = z
            .iter()
            .map(|v| v.norm())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let zx: f64 = z.iter().zip(&probe).map(|(a, b)| (a.conj() * b).re).sum();
        if iter > 0 && zmax <= zx {
            break;
        }
        probe.iter_mut().for_each(|v| *v = ZERO);
        probe[j] = Complex64::new(1.0, 0.0);
    }
    let mut alt: Vec<Complex64> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let scale = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            Complex64::new(sign * (1.0 + scale), 0.0)
        })
        .collect();
    lu.solve_in_place(&mut alt);
    estimate.max(2.0 * vec_norm1(&alt) / (3.0 * n as f64))
}

/// Solves `(lambda I - A) x = b` for many shifts `lambda` with one
/// orthogonal reduction `A = Q H Q^T` and an `O(n^2)` Hessenberg LU per
/// shift.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    n: usize,
    q: DMatrix<f64>,
    h: DMatrix<f64>,
}

/// One shifted system, factorised and ready for right-hand sides.
#[derive(Debug, Clone)]
pub struct ShiftedFactor<'a> {
    solver: &'a ShiftedSolver,
    lu: BandedLu,
}

impl ShiftedSolver {
    pub fn new(a: &DMatrix<f64>) -> Self {
        assert!(a.is_square());
        let n = a.nrows();
        let (q, h) = Hessenberg::new(a.clone()).unpack();
        ShiftedSolver { n, q, h }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor(&self, lambda: Complex64) -> ShiftedFactor<'_> {
        let n = self.n;
        let mut m = vec![ZERO; n * n];
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                m[i * n + j] = Complex64::new(-self.h[(i, j)], 0.0);
            }
            m[i * n + i] += lambda;
        }
        ShiftedFactor {
            solver: self,
            lu: BandedLu::factor(m, n, 1),
        }
    }
}

impl ShiftedFactor<'_> {
    /// Reciprocal condition of the Hessenberg form of `lambda I - A`.
    pub fn rcond(&self) -> f64 {
        self.lu.rcond()
    }

    pub fn solve_real(&self, b: &[f64]) -> Vec<Complex64> {
        let q = &self.solver.q;
        let n = self.solver.n;
        let mut y: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(q.column(j).iter().zip(b).map(|(a, b)| a * b).sum(), 0.0))
            .collect();
        self.lu.solve_in_place(&mut y);
        let mut x = vec![ZERO; n];
        for j in 0..n {
            let yj = y[j];
            for (xi, qij) in x.iter_mut().zip(q.column(j).iter()) {
                *xi += yj * *qij;
            }
        }
        x
    }
}

/// `|(lambda I - A) x - b|_2 / |b|_2`.
pub fn relative_residual(a: &DMatrix<f64>, lambda: Complex64, x: &[Complex64], b: &[f64]) -> f64 {
    let n = a.nrows();
    let mut r2 = 0.0;
    for i in 0..n {
        let mut s = lambda * x[i] - b[i];
        for j in 0..n {
            s -= a[(i, j)] * x[j];
        }
        r2 += s.norm_sqr();
    }
    let b2: f64 = b.iter().map(|v| v * v).sum();
    if b2 == 0.0 {
        r2.sqrt()
    } else {
        (r2 / b2).sqrt()
    }
}
