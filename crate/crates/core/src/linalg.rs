//! Dense symmetric/Hermitian eigensolvers and small complex determinants.
//!
//! The eigensolver is cyclic Jacobi on real symmetric matrices. Hermitian
//! input is handled through the real embedding `[[A, -B], [B, A]]` of
//! `A + iB`, whose spectrum is that of the Hermitian matrix with every
//! eigenvalue doubled.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::default(); n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl RealMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

impl ComplexMatrix {
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, |i, j| self.get(i, j).re)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JacobiOptions {
    /// Convergence when the off-diagonal Frobenius norm falls below
    /// `threshold · ‖A‖_F`.
    pub threshold: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self { threshold: 1e-12, max_sweeps: 100 }
    }
}

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
pub fn jacobi_eigen(m: &RealMatrix, opts: JacobiOptions) -> Result<SymEigen> {
    let n = m.dim();
    if !m.data.iter().all(|x| x.is_finite()) {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    if !m.is_symmetric(1e-12 * m.frobenius_norm().max(1.0)) {
        return Err(Error::validation("matrix is not symmetric"));
    }
    let mut a = m.data.clone();
    let mut v = RealMatrix::identity(n).data;
    let scale = m.frobenius_norm();
    let target = opts.threshold * scale;
    let mut sweeps = 0;

    let mut off = off_diagonal_norm(&a, n);
    while off > target {
        if sweeps == opts.max_sweeps {
            return Err(Error::NumericFailure {
                what: "Jacobi eigensolver".into(),
                estimate: off / scale.max(f64::MIN_POSITIVE),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // skip elements that no longer affect the diagonal in floating point
                if sweeps > 4 && apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let nkp = c * akp - s * akq;
                    let nkq = s * akp + c * akq;
                    a[k * n + p] = nkp;
                    a[p * n + k] = nkp;
                    a[k * n + q] = nkq;
                    a[q * n + k] = nkq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        off = off_diagonal_norm(&a, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their column order
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|k| v[k * n + col]).collect();
            fix_sign(&mut vec);
            vec
        })
        .collect();
    Ok(SymEigen { values, vectors, sweeps })
}

/// Index of the largest-magnitude component; the first one wins ties.
fn dominant_index<T>(v: &[T], mag: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (i, x) in v.iter().enumerate() {
        let m = mag(x);
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    best
}

fn fix_sign(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let i = dominant_index(v, |x| x.abs());
    if v[i] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Rotates `v` so that its largest-magnitude component is real and positive.
pub fn fix_phase(v: &mut [Complex64]) {
    if v.is_empty() {
        return;
    }
    let i = dominant_index(v, |z| z.norm());
    let r = v[i].norm();
    if r == 0.0 {
        return;
    }
    let rot = v[i].conj() / r;
    v.iter_mut().for_each(|z| *z *= rot);
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Eigendecomposition of a Hermitian matrix. Real input goes straight to
/// Jacobi; complex input goes through the doubled real embedding.
pub fn hermitian_eigen(m: &ComplexMatrix, opts: JacobiOptions) -> Result<HermitianEigen> {
    let n = m.dim();
    if !m.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    if !m.is_hermitian(1e-12 * m.frobenius_norm().max(1.0)) {
        return Err(Error::validation("matrix is not Hermitian"));
    }
    if m.is_real() {
        let e = jacobi_eigen(&m.real_part(), opts)?;
        let vectors = e
            .vectors
            .into_iter()
            .map(|v| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
            .collect();
        return Ok(HermitianEigen { values: e.values, vectors });
    }

    let embed = RealMatrix::from_fn(2 * n, |i, j| {
        let (bi, ri) = (i / n, i % n);
        let (bj, rj) = (j / n, j % n);
        let z = m.get(ri, rj);
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let e = jacobi_eigen(&embed, opts)?;

    // Each Hermitian eigenpair appears twice; keep one representative per
    // pair by projecting out the complex vectors already accepted.
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (lambda, w) in e.values.iter().zip(&e.vectors) {
        if vectors.len() == n {
            break;
        }
        let mut u: Vec<Complex64> = (0..n).map(|k| Complex64::new(w[k], w[n + k])).collect();
        for prev in &vectors {
            let proj: Complex64 = prev.iter().zip(&u).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in u.iter_mut().zip(prev) {
                *x -= proj * p;
            }
        }
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 0.5 {
            continue;
        }
        u.iter_mut().for_each(|z| *z /= norm);
        fix_phase(&mut u);
        values.push(*lambda);
        vectors.push(u);
    }
    if vectors.len() != n {
        return Err(Error::NumericFailure {
            what: "Hermitian eigenvector extraction".into(),
            estimate: (n - vectors.len()) as f64,
        });
    }
    Ok(HermitianEigen { values, vectors })
}

/// `log det` of a Hermitian positive-definite matrix given row-major in `a`
/// (overwritten by its Cholesky factor). Returns `None` if not positive definite.
pub fn logdet_hpd(a: &mut [Complex64], n: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        logdet += 2.0 * ljj.ln();
        a[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / ljj;
        }
    }
    Some(logdet)
}
