//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a pivoted tridiagonal LU. Exact zeros on the off-diagonal
//! split the matrix into independent blocks, which are solved separately so
//! that eigenvectors stay confined to their block.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_BISECTION_STEPS: usize = 300;
const MAX_INVERSE_STEPS: usize = 8;
const MAX_RESTARTS: usize = 4;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

/// Eigenvalues in ascending order with unit-norm (Euclidean) eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigenpairs<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Domain(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub fn add_to_diagonal(&mut self, shift: impl Fn(usize) -> T) {
        for (i, d) in self.diag.iter_mut().enumerate() {
            *d = *d + shift(i);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        mat_vec(&self.diag, &self.off, x)
    }

    /// Infinity norm, which bounds the spectral radius.
    pub fn norm_inf(&self) -> T {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut row = self.diag[i].abs();
                if i > 0 {
                    row = row + self.off[i - 1].abs();
                }
                if i + 1 < n {
                    row = row + self.off[i].abs();
                }
                row
            })
            .fold(T::zero(), T::max)
    }

    /// Number of eigenvalues strictly below `lambda`.
    pub fn sturm_count(&self, lambda: T) -> usize {
        sturm_count(&self.diag, &self.off, lambda, self.pivmin())
    }

    fn pivmin(&self) -> T {
        let max_off2 = self
            .off
            .iter()
            .map(|&e| e * e)
            .fold(T::one(), T::max);
        T::min_positive_value() * max_off2
    }

    /// Index ranges of the irreducible blocks.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, &e) in self.off.iter().enumerate() {
            if e == T::zero() {
                out.push(start..i + 1);
                start = i + 1;
            }
        }
        out.push(start..self.len());
        out
    }

    /// The `k` lowest eigenpairs. Vectors have the full matrix length and
    /// vanish outside the block that owns them.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Eigenpairs<T>> {
        if k == 0 || k > self.len() {
            return Err(Error::Domain(format!(
                "requested {k} eigenpairs of a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let mut found: Vec<(T, usize, Vec<T>)> = Vec::new();
        for (block_id, range) in self.blocks().into_iter().enumerate() {
            let block = BlockView {
                diag: &self.diag[range.clone()],
                off: &self.off[range.start..range.end - 1],
            };
            let m = k.min(range.len());
            let values = block.lowest_values(m)?;
            let vectors = block.vectors(&values)?;
            for (value, local) in values.into_iter().zip(vectors) {
                let mut full = vec![T::zero(); self.len()];
                full[range.clone()].copy_from_slice(&local);
                found.push((value, block_id, full));
            }
        }
        found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        found.truncate(k);
        let (values, vectors) = found.into_iter().map(|(v, _, x)| (v, x)).unzip();
        Ok(Eigenpairs { values, vectors })
    }
}

fn mat_vec<T: Real>(diag: &[T], off: &[T], x: &[T]) -> Vec<T> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut y = diag[i] * x[i];
            if i > 0 {
                y = y + off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y = y + off[i] * x[i + 1];
            }
            y
        })
        .collect()
}

fn sturm_count<T: Real>(diag: &[T], off: &[T], lambda: T, pivmin: T) -> usize {
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn normalize<T: Real>(x: &mut [T]) -> T {
    let norm = dot(x, x).sqrt();
    if norm > T::zero() {
        for v in x.iter_mut() {
            *v = *v / norm;
        }
    }
    norm
}

struct BlockView<'a, T> {
    diag: &'a [T],
    off: &'a [T],
}

impl<T: Real> BlockView<'_, T> {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn pivmin(&self) -> T {
        let max_off2 = self.off.iter().map(|&e| e * e).fold(T::one(), T::max);
        T::min_positive_value() * max_off2
    }

    fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = (hi - lo).abs().max(T::one()) * T::epsilon() * T::lit(4.0);
        (lo - pad, hi + pad)
    }

    fn norm(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn count(&self, lambda: T, pivmin: T) -> usize {
        sturm_count(self.diag, self.off, lambda, pivmin)
    }

    /// Bisection for the `m` smallest eigenvalues.
    fn lowest_values(&self, m: usize) -> Result<Vec<T>> {
        let pivmin = self.pivmin();
        let (g_lo, g_hi) = self.gershgorin();
        let two = T::lit(2.0);
        let mut values = Vec::with_capacity(m);
        let mut floor = g_lo;
        for j in 0..m {
            let mut lo = floor;
            let mut hi = g_hi;
            for _ in 0..MAX_BISECTION_STEPS {
                let tol = two * T::epsilon() * lo.abs().max(hi.abs()) + pivmin;
                if hi - lo <= tol {
                    break;
                }
                let mid = lo + (hi - lo) / two;
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count(mid, pivmin) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let (below_lo, below_hi) = (self.count(lo, pivmin), self.count(hi, pivmin));
            if !(below_lo <= j && j < below_hi) {
                return Err(Error::Convergence(format!(
                    "Sturm count mismatch for eigenvalue {j}: {below_lo} below lower bracket, {below_hi} below upper"
                )));
            }
            values.push(lo + (hi - lo) / two);
            floor = lo;
        }
        Ok(values)
    }

    /// Inverse iteration for each eigenvalue, with Gram-Schmidt against the
    /// already accepted vectors (always, since it is cheap for few states).
    fn vectors(&self, values: &[T]) -> Result<Vec<Vec<T>>> {
        let n = self.len();
        let norm = self.norm().max(T::min_positive_value());
        let tol = T::lit(64.0) * T::epsilon() * norm * T::lit_usize(n).sqrt();
        let mut accepted: Vec<Vec<T>> = Vec::with_capacity(values.len());
        for (j, &lambda) in values.iter().enumerate() {
            let lu = ShiftedLu::factor(self.diag, self.off, lambda, norm);
            let mut converged = None;
            'restart: for restart in 0..=MAX_RESTARTS {
                let mut x = start_vector::<T>(n, j + restart * 7919);
                project_out(&mut x, &accepted);
                normalize(&mut x);
                for _ in 0..MAX_INVERSE_STEPS {
                    lu.solve(&mut x);
                    project_out(&mut x, &accepted);
                    if normalize(&mut x) == T::zero() || !x[0].is_finite() {
                        continue 'restart;
                    }
                    let hx = mat_vec(self.diag, self.off, &x);
                    let res: T = hx
                        .iter()
                        .zip(&x)
                        .map(|(&y, &v)| (y - lambda * v) * (y - lambda * v))
                        .sum::<T>()
                        .sqrt();
                    if res <= tol {
                        converged = Some(x);
                        break 'restart;
                    }
                }
            }
            match converged {
                Some(mut x) => {
                    project_out(&mut x, &accepted);
                    normalize(&mut x);
                    fix_sign(&mut x);
                    accepted.push(x);
                }
                None => {
                    return Err(Error::Convergence(format!(
                        "inverse iteration for eigenvalue {j} ({:e}) did not converge after {MAX_RESTARTS} restarts",
                        lambda.as_f64()
                    )))
                }
            }
        }
        Ok(accepted)
    }
}

fn start_vector<T: Real>(n: usize, seed: usize) -> Vec<T> {
    // Deterministic, non-symmetric pattern with no special alignment to
    // discrete sine modes.
    let phase = 0.618_033_988_749_895 * (seed as f64 + 1.0);
    (0..n)
        .map(|i| {
            let x = i as f64;
            T::lit(1.0 + 0.5 * (1.7 * x + phase).sin() + 0.25 * (0.013 * x * x + phase).cos())
        })
        .collect()
}

fn project_out<T: Real>(x: &mut [T], basis: &[Vec<T>]) {
    for b in basis {
        let c = dot(x, b);
        for (xi, &bi) in x.iter_mut().zip(b) {
            *xi = *xi - c * bi;
        }
    }
}

/// Makes the largest-magnitude component positive.
fn fix_sign<T: Real>(x: &mut [T]) {
    let pivot = x
        .iter()
        .copied()
        .fold(T::zero(), |acc, v| if v.abs() > acc.abs() { v } else { acc });
    if pivot < T::zero() {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

/// LU factorization of `T - λI` with partial pivoting (LAPACK `gttrf` layout).
struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(diag: &[T], off: &[T], lambda: T, norm: T) -> Self {
        let n = diag.len();
        let mut d: Vec<T> = diag.iter().map(|&v| v - lambda).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] = d[i + 1] - fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = T::epsilon() * norm;
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < T::zero() { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // Rescale to keep the iterate finite near an exact eigenvalue.
        let big = b.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if big > T::zero() && big.is_finite() {
            for v in b.iter_mut() {
                *v = *v / big;
            }
        }
    }
}
