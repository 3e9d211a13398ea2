//! Dense decompositions on `CMat`, computed with faer.

use faer::{c64, Mat};

use crate::lifting::CMat;

pub(crate) struct Svd {
    /// `rows x p`, `p = min(rows, cols)`.
    pub u: CMat,
    /// Descending.
    pub s: Vec<f64>,
    /// `p x cols`.
    pub v_t: CMat,
}

fn to_faer(m: &CMat) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let v = m[(i, j)];
        c64::new(v.re, v.im)
    })
}

/// Thin SVD with singular values sorted in descending order.
pub(crate) fn svd(m: &CMat) -> Svd {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return Svd {
            u: CMat::zeros(rows, 0),
            s: Vec::new(),
            v_t: CMat::zeros(0, cols),
        };
    }
    let f = to_faer(m);
    let dec = f.thin_svd().expect("SVD of a finite matrix");
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    let u_out = CMat::from_fn(rows, p, |i, k| {
        let z = u[(i, order[k])];
        z.into()
    });
    let v_t = CMat::from_fn(p, cols, |k, j| {
        let z = v[(j, order[k])];
        num_complex::Complex64::new(z.re, -z.im)
    });
    Svd {
        u: u_out,
        s: order.iter().map(|&k| s[k].re).collect(),
        v_t,
    }
}

pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix")
        .into_iter()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// directions below `rcond · σ₁`.
pub(crate) fn lstsq(a: &CMat, b: &CMat, rcond: f64) -> CMat {
    let d = svd(a);
    let s1 = d.s.first().copied().unwrap_or(0.0);
    let mut ub = d.u.adjoint() * b;
    for (k, &s) in d.s.iter().enumerate() {
        let f = if s > rcond * s1 && s > 0.0 { 1.0 / s } else { 0.0 };
        ub.row_mut(k).scale_mut(f);
    }
    d.v_t.adjoint() * ub
}

pub(crate) fn eigenvalues(m: &CMat) -> Vec<num_complex::Complex64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    to_faer(m)
        .eigenvalues()
        .expect("eigenvalues of a finite matrix")
        .into_iter()
        .map(|z| num_complex::Complex64::new(z.re, z.im))
        .collect()
}
