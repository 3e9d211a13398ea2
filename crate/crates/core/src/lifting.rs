//! Lifting operators: Hankel, double-Hankel and block-Hankel structures.
//!
//! A lifting places raw sample values into a structured matrix. Every matrix
//! entry reads exactly one sample, so the operator is fully described by an
//! index table. With the scalars `a_n = √c_n` (where `c_n` is the number of
//! entries reading sample `n`) the lifted matrix carries the samples verbatim
//! and [`back_project`] is a left inverse of [`lift`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftingKind {
    Hankel,
    DoubleHankel,
    BlockHankel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftingSpec {
    pub kind: LiftingKind,
    /// Rows per Hankel block.
    pub d: usize,
    /// Block rows of the temporal Hankel arrangement (block-Hankel only).
    pub d_t: usize,
    pub n: usize,
    /// Snapshot count (block-Hankel only).
    pub t: usize,
    /// Second double-Hankel block as the reversed conjugate instead of a copy.
    pub reversed_conjugate: bool,
}

/// Square-ish default pencil parameter `⌈(N+1)/2⌉`.
pub fn default_pencil(n: usize) -> usize {
    n / 2 + 1
}

impl LiftingSpec {
    pub fn hankel(n: usize, d: usize) -> Result<Self> {
        Self::validated(LiftingKind::Hankel, n, d, 1, 1, false)
    }

    pub fn double_hankel(n: usize, d: usize) -> Result<Self> {
        Self::validated(LiftingKind::DoubleHankel, n, d, 1, 1, false)
    }

    /// Double-Hankel whose second block reads `conj(x[N-1-k])`.
    pub fn double_hankel_reversed_conjugate(n: usize, d: usize) -> Result<Self> {
        Self::validated(LiftingKind::DoubleHankel, n, d, 1, 1, true)
    }

    pub fn block_hankel(n: usize, d: usize, t: usize, d_t: usize) -> Result<Self> {
        Self::validated(LiftingKind::BlockHankel, n, d, t, d_t, false)
    }

    fn validated(kind: LiftingKind, n: usize, d: usize, t: usize, d_t: usize, rc: bool) -> Result<Self> {
        if n == 0 || d == 0 || d > n {
            return Err(Error::InvalidArgument(format!(
                "pencil parameter must satisfy 1 <= d <= N, got d={d}, N={n}"
            )));
        }
        if t == 0 || d_t == 0 || d_t > t {
            return Err(Error::InvalidArgument(format!(
                "temporal pencil must satisfy 1 <= d_t <= T, got d_t={d_t}, T={t}"
            )));
        }
        Ok(Self {
            kind,
            d,
            d_t,
            n,
            t,
            reversed_conjugate: rc,
        })
    }

    /// Column count of one Hankel block, `N - d + 1`.
    pub fn d_prime(&self) -> usize {
        self.n - self.d + 1
    }

    pub fn shape(&self) -> (usize, usize) {
        let dp = self.d_prime();
        match self.kind {
            LiftingKind::Hankel => (self.d, dp),
            LiftingKind::DoubleHankel => (self.d, 2 * dp),
            LiftingKind::BlockHankel => (self.d_t * self.d, (self.t - self.d_t + 1) * dp),
        }
    }

    /// Length of the lifted vector (`N`, or `N·T` column-major for block-Hankel).
    pub fn num_samples(&self) -> usize {
        match self.kind {
            LiftingKind::BlockHankel => self.n * self.t,
            _ => self.n,
        }
    }

    /// Sample read by entry `(row, col)` and whether it enters conjugated.
    #[inline]
    pub fn sample_at(&self, row: usize, col: usize) -> (usize, bool) {
        let dp = self.d_prime();
        match self.kind {
            LiftingKind::Hankel => (row + col, false),
            LiftingKind::DoubleHankel => {
                if col < dp {
                    (row + col, false)
                } else if self.reversed_conjugate {
                    (self.n - 1 - (row + col - dp), true)
                } else {
                    (row + col - dp, false)
                }
            }
            LiftingKind::BlockHankel => {
                let (br, r) = (row / self.d, row % self.d);
                let (bc, c) = (col / dp, col % dp);
                ((br + bc) * self.n + r + c, false)
            }
        }
    }

    /// Precomputed index table for repeated application.
    pub fn map(&self) -> LiftMap {
        LiftMap::new(*self)
    }
}

/// Index table of a lifting, with per-sample entry counts `c_n`.
#[derive(Debug, Clone)]
pub struct LiftMap {
    spec: LiftingSpec,
    rows: usize,
    cols: usize,
    /// Column-major `(sample, conj)` per entry.
    table: Vec<(usize, bool)>,
    counts: Vec<usize>,
}

impl LiftMap {
    fn new(spec: LiftingSpec) -> Self {
        let (rows, cols) = spec.shape();
        let mut table = Vec::with_capacity(rows * cols);
        let mut counts = vec![0usize; spec.num_samples()];
        for c in 0..cols {
            for r in 0..rows {
                let e = spec.sample_at(r, c);
                counts[e.0] += 1;
                table.push(e);
            }
        }
        Self {
            spec,
            rows,
            cols,
            table,
            counts,
        }
    }

    pub fn spec(&self) -> &LiftingSpec {
        &self.spec
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Column-major entry table.
    pub fn table(&self) -> &[(usize, bool)] {
        &self.table
    }

    pub fn num_samples(&self) -> usize {
        self.counts.len()
    }

    pub fn lift(&self, x: &[Complex64]) -> Result<CMat> {
        if x.len() != self.num_samples() {
            return Err(Error::shape(self.num_samples(), x.len()));
        }
        Ok(self.lift_unchecked(x))
    }

    pub(crate) fn lift_unchecked(&self, x: &[Complex64]) -> CMat {
        let mut m = CMat::zeros(self.rows, self.cols);
        for (dst, &(i, conj)) in m.as_mut_slice().iter_mut().zip(&self.table) {
            *dst = if conj { x[i].conj() } else { x[i] };
        }
        m
    }

    fn check(&self, m: &CMat) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(())
    }

    /// Per-sample sum of the entries reading it (conjugated entries folded back).
    pub fn adjoint(&self, m: &CMat) -> Result<Vec<Complex64>> {
        self.check(m)?;
        Ok(self.adjoint_unchecked(m))
    }

    pub(crate) fn adjoint_unchecked(&self, m: &CMat) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_samples()];
        for (v, &(i, conj)) in m.as_slice().iter().zip(&self.table) {
            out[i] += if conj { v.conj() } else { *v };
        }
        out
    }

    /// Per-sample mean of the entries reading it: `(1/a_n) tr(A_nᵀ M)`.
    pub fn back_project(&self, m: &CMat) -> Result<Vec<Complex64>> {
        self.check(m)?;
        let mut out = self.adjoint_unchecked(m);
        for (v, &c) in out.iter_mut().zip(&self.counts) {
            if c > 0 {
                *v /= c as f64;
            }
        }
        Ok(out)
    }
}

pub fn lift(spec: &LiftingSpec, x: &[Complex64]) -> Result<CMat> {
    spec.map().lift(x)
}

/// Block-Hankel lift of an `N x T` sample matrix.
pub fn lift_matrix(spec: &LiftingSpec, y: &CMat) -> Result<CMat> {
    if y.shape() != (spec.n, spec.t) {
        return Err(Error::shape(
            format!("{}x{}", spec.n, spec.t),
            format!("{}x{}", y.nrows(), y.ncols()),
        ));
    }
    lift(spec, y.as_slice())
}

pub fn adjoint(spec: &LiftingSpec, m: &CMat) -> Result<Vec<Complex64>> {
    spec.map().adjoint(m)
}

pub fn back_project(spec: &LiftingSpec, m: &CMat) -> Result<Vec<Complex64>> {
    spec.map().back_project(m)
}

/// Singular values of a lifted matrix, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    crate::linalg::singular_values(m)
}

/// Number of lifted entries reading sample `n` (0-based).
pub fn diag_count(spec: &LiftingSpec, n: usize) -> Result<usize> {
    if n >= spec.num_samples() {
        return Err(Error::InvalidArgument(format!(
            "sample index {n} out of range for {} samples",
            spec.num_samples()
        )));
    }
    if spec.kind == LiftingKind::Hankel {
        let (len, d) = (spec.n, spec.d);
        return Ok((n + 1).min(d).min(len - d + 1).min(len - n));
    }
    Ok(spec.map().counts()[n])
}

/// Basis matrix `A_n` of a lifting: equal positive entries `1/√c_n` on `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    pub index: usize,
    pub support: Vec<(usize, usize)>,
    pub value: f64,
    /// `a_n = √c_n`.
    pub scale: f64,
}

impl BasisMatrix {
    pub fn count(&self) -> usize {
        self.support.len()
    }

    pub fn to_dense(&self, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(rows, cols);
        for &(r, c) in &self.support {
            m[(r, c)] = self.value;
        }
        m
    }

    /// Squared mass per row, `Σ_j [A_n]_{ij}²`.
    pub fn row_mass(&self, rows: usize) -> Vec<f64> {
        let mut m = vec![0.0; rows];
        let w = self.value * self.value;
        for &(r, _) in &self.support {
            m[r] += w;
        }
        m
    }

    pub fn col_mass(&self, cols: usize) -> Vec<f64> {
        let mut m = vec![0.0; cols];
        let w = self.value * self.value;
        for &(_, c) in &self.support {
            m[c] += w;
        }
        m
    }
}

pub fn basis(spec: &LiftingSpec) -> Vec<BasisMatrix> {
    let (rows, cols) = spec.shape();
    let mut supports: Vec<Vec<(usize, usize)>> = vec![Vec::new(); spec.num_samples()];
    for c in 0..cols {
        for r in 0..rows {
            supports[spec.sample_at(r, c).0].push((r, c));
        }
    }
    supports
        .into_iter()
        .enumerate()
        .map(|(index, mut support)| {
            support.sort_unstable();
            let c = support.len() as f64;
            BasisMatrix {
                index,
                support,
                value: if c > 0.0 { 1.0 / c.sqrt() } else { 0.0 },
                scale: c.sqrt(),
            }
        })
        .collect()
}
