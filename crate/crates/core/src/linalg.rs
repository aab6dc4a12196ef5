//! Small dense linear-algebra helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{i phi}`
#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

pub fn from_rows(rows: &[&[Complex64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn hermiticity_error(h: &CMatrix) -> f64 {
    max_abs_diff(h, &h.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `exp(i * t * h)` for Hermitian `h`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let phases: Vec<Complex64> = vals.iter().map(|&e| cis(e * t)).collect();
    &vecs * diag(&phases) * vecs.adjoint()
}

/// Applies a `2^k x 2^k` operator to the qubits `targets` of a vector of `n`
/// qubits laid out with the given element stride. Qubit 0 is the most
/// significant bit of the basis index.
pub(crate) fn apply_local(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    n: usize,
    targets: &[usize],
    op: &CMatrix,
) {
    let k = targets.len();
    let sub = 1usize << k;
    let masks: Vec<usize> = targets.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let mut offsets = vec![0usize; sub];
    for (s, o) in offsets.iter_mut().enumerate() {
        for (b, &m) in masks.iter().enumerate() {
            if s >> (k - 1 - b) & 1 == 1 {
                *o |= m;
            }
        }
    }
    let mut buf = vec![ZERO; sub];
    let dim = 1usize << n;
    for base in 0..dim {
        if base & all != 0 {
            continue;
        }
        for s in 0..sub {
            buf[s] = data[offset + (base | offsets[s]) * stride];
        }
        for r in 0..sub {
            let mut acc = ZERO;
            for s in 0..sub {
                acc += op[(r, s)] * buf[s];
            }
            data[offset + (base | offsets[r]) * stride] = acc;
        }
    }
}

/// Dense `2^n` operator acting as `op` on `targets` and identity elsewhere.
pub fn embed(n: usize, targets: &[usize], op: &CMatrix) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::identity(dim, dim);
    for col in 0..dim {
        apply_local(m.as_mut_slice(), col * dim, 1, n, targets, op);
    }
    m
}
