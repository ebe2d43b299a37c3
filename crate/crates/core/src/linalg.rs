//! Small complex linear-algebra helpers on `ρ`-weighted fiber spaces.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{2πi t}`.
pub fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// `A^* diag(w) B`.
pub fn weighted_gram(a: &CMat, b: &CMat, w: &[f64]) -> CMat {
    assert_eq!(a.nrows(), w.len());
    assert_eq!(b.nrows(), w.len());
    let mut wb = b.clone();
    for (i, &wi) in w.iter().enumerate() {
        wb.row_mut(i).scale_mut(wi);
    }
    a.adjoint() * wb
}

/// Rows of `diag(√w) A`, i.e. coordinates in which the weighted inner
/// product is the standard one.
pub fn sqrt_weighted(a: &CMat, w: &[f64]) -> CMat {
    let mut out = a.clone();
    for (i, &wi) in w.iter().enumerate() {
        out.row_mut(i).scale_mut(wi.sqrt());
    }
    out
}

/// Orthogonal projector (in √w coordinates) onto the column span of `a`.
pub fn span_projector(a: &CMat, w: &[f64]) -> CMat {
    let q = sqrt_weighted(a, w);
    if q.ncols() == 0 {
        return CMat::zeros(q.nrows(), q.nrows());
    }
    let g = q.adjoint() * &q;
    let ginv = g.try_inverse().unwrap_or_else(|| CMat::zeros(q.ncols(), q.ncols()));
    &q * ginv * q.adjoint()
}

/// Frobenius distance between the projectors onto two column spans.
pub fn span_distance(a: &CMat, b: &CMat, w: &[f64]) -> f64 {
    (span_projector(a, w) - span_projector(b, w)).norm()
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    (u.adjoint() * u - CMat::identity(u.ncols(), u.ncols())).norm()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Classical Gram–Schmidt with one reorthogonalization pass, in column
/// order, against the weighted inner product. Returns the index of the
/// first column whose remainder falls below `tol` relative to its norm.
pub fn gram_schmidt(a: &CMat, w: &[f64], tol: f64) -> Result<CMat, usize> {
    let mut q = CMat::zeros(a.nrows(), a.ncols());
    let norm = |v: &CMat| weighted_gram(v, v, w)[(0, 0)].re.max(0.0).sqrt();
    for j in 0..a.ncols() {
        let orig = a.columns(j, 1).into_owned();
        let n0 = norm(&orig);
        let mut v = orig;
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.columns(k, 1).into_owned();
                let coef = weighted_gram(&qk, &v, w)[(0, 0)];
                v -= qk * coef;
            }
        }
        let n = norm(&v);
        if n0 == 0.0 || n <= tol * n0 {
            return Err(j);
        }
        q.set_column(j, &(v.column(0) / c(n, 0.0)));
    }
    Ok(q)
}

/// Applies `rows[i] <- m[map(i)]`.
pub fn gather_rows(m: &CMat, map: impl Fn(usize) -> usize) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(map(i), j)])
}

/// Applies `rows[map(i)] <- m[i]`.
pub fn scatter_rows(m: &CMat, map: impl Fn(usize) -> usize) -> CMat {
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        out.set_row(map(i), &m.row(i));
    }
    out
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
