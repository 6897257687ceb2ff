//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian
//! matrices. Sizes in this crate stay at or below 64×64, where Jacobi is
//! accurate to a few ulps of the matrix norm and simple to verify.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
/// Convergence: off-diagonal Frobenius norm relative to the full norm.
const OFF_DIAGONAL_TOL: f64 = 1e-15;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The smaller of `H·Hᴴ` and `Hᴴ·H`; both share their non-zero spectrum.
    pub fn gram(&self) -> ComplexMatrix {
        if self.rows <= self.cols {
            // G[i][j] = Σ_k H[i][k]·conj(H[j][k])
            let n = self.rows;
            let mut g = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                let ri = &self.data[i * self.cols..(i + 1) * self.cols];
                for j in i..n {
                    let rj = &self.data[j * self.cols..(j + 1) * self.cols];
                    let s: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                    g.set(i, j, s);
                    g.set(j, i, s.conj());
                }
            }
            g
        } else {
            let n = self.cols;
            let mut g = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let s: Complex64 = (0..self.rows).map(|k| self.get(k, i).conj() * self.get(k, j)).sum();
                    g.set(i, j, s);
                    g.set(j, i, s.conj());
                }
            }
            g
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit-norm eigenvector of `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
    pub sweeps: usize,
}

impl HermitianEigen {
    /// Largest `‖A·v − μ·v‖` over all pairs.
    pub fn max_residual(&self, a: &ComplexMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&mu, v)| a.mul_vec(v).iter().zip(v).map(|(av, vi)| (av - vi * mu).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigen-decomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary,
/// then zeroes it with a real Givens rotation. Only the upper triangle's
/// Hermitian consistency is assumed; the input is not checked.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if m.rows != m.cols || m.rows == 0 {
        return Err(Error::domain(format!("eigensolve needs a non-empty square matrix, got {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut a = m.data.clone();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
        a[i * n + i].im = 0.0;
    }
    let norm = m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= OFF_DIAGONAL_TOL * norm || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off, norm });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane
                let j_pp = Complex64::new(c, 0.0);
                let j_pq = Complex64::new(s, 0.0);
                let j_qp = -phase.conj() * s;
                let j_qq = phase.conj() * c;

                // A ← A·J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * j_pp + akq * j_qp;
                    a[k * n + q] = akp * j_pq + akq * j_qq;
                }
                // A ← Jᴴ·A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
                    a[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;

                // V ← V·J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * j_pp + vkq * j_qp;
                    v[k * n + q] = vkp * j_pq + vkq * j_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    Ok(HermitianEigen { values, vectors, sweeps })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}
