//! Weighted leverage scores and the design of diagonal weight matrices.
//!
//! Weights are stored as the *squared* diagonals `w_L`, `w_R` of `W_L`, `W_R`
//! normalized to the probability simplex. Leverage scores are invariant to a
//! global rescaling of the weights, so the solver works with the mean-one
//! rescaling returned by [`WeightPair::solver_diagonals`]; uniform simplex
//! weights then coincide with the identity.

mod lp;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::Omega;
use crate::error::{Error, Result};
use crate::lifting::{basis, BasisMatrix, CMat, LiftingKind, LiftingSpec};
use crate::linalg;

pub use lp::{LinearProgram, LpSolution};

/// Default mixing floor for designed weights.
pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPair {
    pub w_left: Vec<f64>,
    pub w_right: Vec<f64>,
    pub floor: f64,
}

impl WeightPair {
    /// Uniform weights; equivalent to identity weighting in the solver.
    pub fn uniform(left: usize, right: usize) -> Self {
        Self {
            w_left: vec![1.0 / left as f64; left],
            w_right: vec![1.0 / right as f64; right],
            floor: 1.0,
        }
    }

    pub fn identity_for(spec: &LiftingSpec) -> Self {
        let (r, c) = spec.shape();
        Self::uniform(r, c)
    }

    /// Mixes `(1-ε)·w + ε·uniform` into both raw simplex vectors.
    pub fn floored(w_left: Vec<f64>, w_right: Vec<f64>, floor: f64) -> Self {
        let mix = |w: Vec<f64>| {
            let u = floor / w.len() as f64;
            w.into_iter().map(|v| (1.0 - floor) * v + u).collect::<Vec<_>>()
        };
        Self {
            w_left: mix(w_left),
            w_right: mix(w_right),
            floor,
        }
    }

    pub fn is_uniform(&self) -> bool {
        let flat = |w: &[f64]| w.iter().all(|&v| (v - w[0]).abs() <= 1e-15 * w[0].abs().max(1.0));
        flat(&self.w_left) && flat(&self.w_right)
    }

    /// Diagonals of `W_L` and `W_R` rescaled so the squared entries average one.
    pub fn solver_diagonals(&self) -> (Vec<f64>, Vec<f64>) {
        let scale = |w: &[f64]| {
            let m = w.len() as f64;
            w.iter().map(|&v| (m * v).sqrt()).collect::<Vec<_>>()
        };
        (scale(&self.w_left), scale(&self.w_right))
    }

    /// `(index, w_left)` then `(index, w_right)` rows, 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "side,index,weight")?;
        for (i, w) in self.w_left.iter().enumerate() {
            writeln!(out, "left,{},{:.17e}", i + 1, w)?;
        }
        for (i, w) in self.w_right.iter().enumerate() {
            writeln!(out, "right,{},{:.17e}", i + 1, w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageReport {
    pub mu: Vec<f64>,
    pub k_tilde: usize,
    pub beta: f64,
    /// Whether `Σ μ_n K̃ / N ≤ 4 log N`.
    pub bound_ok: bool,
}

impl LeverageReport {
    /// `Σ_n μ_n K̃ / N`.
    pub fn normalized_sum(&self) -> f64 {
        let n = self.mu.len() as f64;
        self.mu.iter().sum::<f64>() * self.k_tilde as f64 / n
    }
}

/// How the numerical rank of the weighted lifted matrix is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankRule {
    /// Singular values above `tol · σ₁`.
    Relative(f64),
    Fixed(usize),
    /// Largest ratio gap `σ_k / σ_{k+1}` of the spectrum.
    Elbow,
}

impl Default for RankRule {
    fn default() -> Self {
        RankRule::Relative(1e-8)
    }
}

pub(crate) fn numerical_rank(sv: &[f64], rule: RankRule) -> usize {
    let s1 = sv.first().copied().unwrap_or(0.0);
    if s1 <= 0.0 {
        return 0;
    }
    match rule {
        RankRule::Relative(tol) => sv.iter().filter(|&&s| s > tol * s1).count(),
        RankRule::Fixed(k) => k.min(sv.len()),
        RankRule::Elbow => {
            let mut best = (1, 0.0);
            for k in 1..sv.len() {
                let ratio = if sv[k] > 0.0 { sv[k - 1] / sv[k] } else { f64::INFINITY };
                if ratio > best.1 {
                    best = (k, ratio);
                }
            }
            best.0
        }
    }
}

fn weighted(m: &CMat, left: &[f64], right: &[f64]) -> CMat {
    let mut x = m.clone();
    for c in 0..x.ncols() {
        for r in 0..x.nrows() {
            x[(r, c)] *= left[r] * right[c];
        }
    }
    x
}

/// Orthonormal basis for the column space of `diag(w) · B`; errors if the
/// Gram matrix `Bᴴ diag(w)² B` is singular.
fn weighted_range(b: &CMat, w: &[f64]) -> Result<CMat> {
    let mut wb = b.clone();
    for r in 0..wb.nrows() {
        for c in 0..wb.ncols() {
            wb[(r, c)] *= w[r];
        }
    }
    let gram = wb.adjoint() * &wb;
    let scale = gram.diagonal().iter().map(|v| v.re).fold(0.0, f64::max);
    let chol = gram.clone().cholesky().ok_or(Error::DegenerateWeights)?;
    let l = chol.l();
    let min_pivot = l.diagonal().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    if !(min_pivot * min_pivot > 1e-13 * scale) {
        return Err(Error::DegenerateWeights);
    }
    // Q = W B L^{-H}
    let l_inv_h = l
        .adjoint()
        .try_inverse()
        .ok_or(Error::DegenerateWeights)?;
    Ok(wb * l_inv_h)
}

fn squared_row_norms(q: &CMat) -> Vec<f64> {
    q.row_iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum()).collect()
}

/// `||P_U(A_n)||_F²` given the orthonormal range `qu` of the left factor.
fn left_projection_mass(a: &BasisMatrix, qu: &CMat) -> f64 {
    // columns of A_n hold at most one entry each
    let rows = squared_row_norms(qu);
    a.support.iter().map(|&(r, _)| rows[r]).sum::<f64>() * a.value * a.value
}

/// `||P_V(A_n)||_F²` given the orthonormal range `qv` of the right factor.
fn right_projection_mass(a: &BasisMatrix, qv: &CMat) -> f64 {
    let k = qv.ncols();
    let mut by_row: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for &(r, c) in &a.support {
        let acc = match by_row.iter_mut().find(|(rr, _)| *rr == r) {
            Some((_, acc)) => acc,
            None => {
                by_row.push((r, vec![Complex64::new(0.0, 0.0); k]));
                &mut by_row.last_mut().unwrap().1
            }
        };
        for (j, v) in acc.iter_mut().enumerate() {
            *v += qv[(c, j)];
        }
    }
    by_row
        .iter()
        .map(|(_, acc)| acc.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        * a.value
        * a.value
}

struct Subspaces {
    qu: CMat,
    qv: CMat,
    k_tilde: usize,
    beta: f64,
}

fn subspaces(m: &CMat, weights: &WeightPair, rule: RankRule, n: usize) -> Result<Subspaces> {
    let (rows, cols) = m.shape();
    if weights.w_left.len() != rows || weights.w_right.len() != cols {
        return Err(Error::shape(
            format!("weights {rows}+{cols}"),
            format!("{}+{}", weights.w_left.len(), weights.w_right.len()),
        ));
    }
    let (l, r) = weights.solver_diagonals();
    let x = weighted(m, &l, &r);
    let svd = linalg::svd(&x);
    let k = numerical_rank(&svd.s, rule);
    if k == 0 {
        if m.iter().any(|v| v.norm() > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        return Err(Error::InvalidArgument("lifted matrix has numerical rank zero".into()));
    }
    let u = svd.u.columns(0, k).into_owned();
    let v = svd.v_t.rows(0, k).adjoint();
    // reduced factors are orthonormal, so both spectral norms equal one
    let nu = linalg::singular_values(&u)[0];
    let nv = linalg::singular_values(&v)[0];
    let beta = n as f64 / k as f64 * (1.0 / (nu * nu)).max(1.0 / (nv * nv));
    Ok(Subspaces {
        qu: weighted_range(&u, &l)?,
        qv: weighted_range(&v, &r)?,
        k_tilde: k,
        beta,
    })
}

/// Weighted leverage scores of a Hankel-type lifted matrix.
pub fn leverage_scores(spec: &LiftingSpec, m: &CMat, weights: &WeightPair, rule: RankRule) -> Result<LeverageReport> {
    if m.shape() != spec.shape() {
        return Err(Error::shape(format!("{:?}", spec.shape()), format!("{:?}", m.shape())));
    }
    let n = spec.num_samples();
    let sub = subspaces(m, weights, rule, n)?;
    let scale = n as f64 / sub.k_tilde as f64;
    let mu: Vec<f64> = basis(spec)
        .iter()
        .map(|a| {
            scale
                * left_projection_mass(a, &sub.qu).max(right_projection_mass(a, &sub.qv))
        })
        .collect();
    let mut report = LeverageReport {
        mu,
        k_tilde: sub.k_tilde,
        beta: sub.beta,
        bound_ok: false,
    };
    report.bound_ok = report.normalized_sum() <= 4.0 * (n as f64).ln();
    Ok(report)
}

/// `β = (N/K̃)·max(1/||Uᴴ||², 1/||Vᴴ||²)` for the reduced singular factors.
pub fn beta(spec: &LiftingSpec, m: &CMat, weights: &WeightPair, rule: RankRule) -> Result<f64> {
    Ok(subspaces(m, weights, rule, spec.num_samples())?.beta)
}

/// Elementwise right-hand side of the diagonal-weight leverage bound,
/// `max{||W_L A_n||² / Σ_k w_L,(k), ||A_n W_Rᵀ||² / Σ_k w_R,(k)}` with the
/// sums over the `⌊N/(βK̃)⌋` smallest weights.
pub fn leverage_upper_bound(spec: &LiftingSpec, weights: &WeightPair, beta: f64, k_tilde: usize) -> Vec<f64> {
    let n = spec.num_samples() as f64;
    let take = ((n / (beta * k_tilde as f64)).floor() as usize).max(1);
    let smallest = |w: &[f64]| {
        let mut s = w.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.iter().take(take).sum::<f64>()
    };
    let (dl, dr) = (smallest(&weights.w_left), smallest(&weights.w_right));
    let (rows, cols) = spec.shape();
    basis(spec)
        .iter()
        .map(|a| {
            let l: f64 = a.row_mass(rows).iter().zip(&weights.w_left).map(|(m, w)| m * w).sum();
            let r: f64 = a.col_mass(cols).iter().zip(&weights.w_right).map(|(m, w)| m * w).sum();
            (l / dl).max(r / dr)
        })
        .collect()
}

/// Diagonals of `Σ_{n∉Ω} A_n A_nᵀ` and `Σ_{n∉Ω} A_nᵀ A_n`.
pub fn gram_diagonals(spec: &LiftingSpec, omega: &Omega) -> Result<(Vec<f64>, Vec<f64>)> {
    check_omega(spec, omega)?;
    let (rows, cols) = spec.shape();
    let mut dl = vec![0.0; rows];
    let mut dr = vec![0.0; cols];
    let observed = omega.mask();
    for a in basis(spec).iter().filter(|a| !observed[a.index]) {
        for (acc, m) in dl.iter_mut().zip(a.row_mass(rows)) {
            *acc += m;
        }
        for (acc, m) in dr.iter_mut().zip(a.col_mass(cols)) {
            *acc += m;
        }
    }
    Ok((dl, dr))
}

fn check_omega(spec: &LiftingSpec, omega: &Omega) -> Result<()> {
    if spec.kind == LiftingKind::BlockHankel {
        return Err(Error::InvalidArgument(
            "block-Hankel weights are designed per snapshot; use design_weights_block".into(),
        ));
    }
    if omega.n() != spec.n {
        return Err(Error::InvalidArgument(format!(
            "observation set for N={} used with N={}",
            omega.n(),
            spec.n
        )));
    }
    Ok(())
}

fn argmin_uniform(diag: &[f64]) -> Vec<f64> {
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * diag.iter().cloned().fold(1.0, f64::max);
    let ties: Vec<bool> = diag.iter().map(|&v| v <= min + tol).collect();
    let k = ties.iter().filter(|&&t| t).count() as f64;
    ties.iter().map(|&t| if t { 1.0 / k } else { 0.0 }).collect()
}

/// Closed-form surrogate design: uniform mass on the argmin of each Gram
/// diagonal, then ε-mixed with the uniform vector.
pub fn design_weights_surrogate(spec: &LiftingSpec, omega: &Omega, floor: f64) -> Result<WeightPair> {
    check_floor(floor)?;
    let (dl, dr) = gram_diagonals(spec, omega)?;
    Ok(WeightPair::floored(argmin_uniform(&dl), argmin_uniform(&dr), floor))
}

fn check_floor(floor: f64) -> Result<()> {
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::InvalidArgument(format!("floor must lie in [0, 1), got {floor}")));
    }
    Ok(())
}

/// `Σ_{n∉Ω} max(||W_L A_n||², ||W_R A_nᵀ||²)` for raw simplex weights.
pub fn minimax_objective(spec: &LiftingSpec, omega: &Omega, w_left: &[f64], w_right: &[f64]) -> f64 {
    let (rows, cols) = spec.shape();
    let observed = omega.mask();
    basis(spec)
        .iter()
        .filter(|a| !observed[a.index])
        .map(|a| {
            let l: f64 = a.row_mass(rows).iter().zip(w_left).map(|(m, w)| m * w).sum();
            let r: f64 = a.col_mass(cols).iter().zip(w_right).map(|(m, w)| m * w).sum();
            l.max(r)
        })
        .sum()
}

/// Unfloored minimax optimum and its objective value.
pub fn solve_minimax_lp(spec: &LiftingSpec, omega: &Omega) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_omega(spec, omega)?;
    let (rows, cols) = spec.shape();
    let observed = omega.mask();
    let missing: Vec<BasisMatrix> = basis(spec).into_iter().filter(|a| !observed[a.index]).collect();
    if missing.is_empty() {
        return Ok((vec![1.0 / rows as f64; rows], vec![1.0 / cols as f64; cols], 0.0));
    }
    // variables: w_left | w_right | t
    let nv = rows + cols + missing.len();
    let mut cost = vec![0.0; nv];
    for c in cost.iter_mut().skip(rows + cols) {
        *c = 1.0;
    }
    let mut a_ub = Vec::with_capacity(2 * missing.len());
    for (k, a) in missing.iter().enumerate() {
        let mut left = vec![0.0; nv];
        left[..rows].copy_from_slice(&a.row_mass(rows));
        left[rows + cols + k] = -1.0;
        a_ub.push(left);
        let mut right = vec![0.0; nv];
        right[rows..rows + cols].copy_from_slice(&a.col_mass(cols));
        right[rows + cols + k] = -1.0;
        a_ub.push(right);
    }
    let mut sum_l = vec![0.0; nv];
    sum_l[..rows].iter_mut().for_each(|v| *v = 1.0);
    let mut sum_r = vec![0.0; nv];
    sum_r[rows..rows + cols].iter_mut().for_each(|v| *v = 1.0);
    let lp = LinearProgram {
        cost,
        b_ub: vec![0.0; a_ub.len()],
        a_ub,
        a_eq: vec![sum_l, sum_r],
        b_eq: vec![1.0, 1.0],
    };
    let sol = lp.solve()?;
    let normalize = |w: &[f64]| {
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect::<Vec<_>>()
    };
    let wl = normalize(&sol.x[..rows]);
    let wr = normalize(&sol.x[rows..rows + cols]);
    let obj = minimax_objective(spec, omega, &wl, &wr);
    Ok((wl, wr, obj))
}

/// Minimax design solved exactly as a linear program, then ε-floored.
pub fn design_weights_minimax(spec: &LiftingSpec, omega: &Omega, floor: f64) -> Result<WeightPair> {
    check_floor(floor)?;
    let (wl, wr, _) = solve_minimax_lp(spec, omega)?;
    Ok(WeightPair::floored(wl, wr, floor))
}

/// Which single-snapshot design feeds the per-snapshot blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Identity,
    Surrogate,
    #[default]
    Minimax,
}

pub fn design_weights(spec: &LiftingSpec, omega: &Omega, mode: WeightMode, floor: f64) -> Result<WeightPair> {
    match mode {
        WeightMode::Identity => Ok(WeightPair::identity_for(spec)),
        WeightMode::Surrogate => design_weights_surrogate(spec, omega, floor),
        WeightMode::Minimax => design_weights_minimax(spec, omega, floor),
    }
}

/// One weight pair per snapshot, each designed on the single-snapshot Hankel
/// lift of that snapshot's observation set.
pub fn design_weights_block(
    spec: &LiftingSpec,
    omegas: &[Omega],
    mode: WeightMode,
    floor: f64,
) -> Result<Vec<WeightPair>> {
    if omegas.len() != spec.t {
        return Err(Error::shape(format!("{} observation sets", spec.t), omegas.len()));
    }
    let single = LiftingSpec::hankel(spec.n, spec.d)?;
    let mut out: Vec<WeightPair> = Vec::with_capacity(omegas.len());
    for (t, om) in omegas.iter().enumerate() {
        match omegas[..t].iter().position(|prev| prev == om) {
            Some(p) => out.push(out[p].clone()),
            None => out.push(design_weights(&single, om, mode, floor)?),
        }
    }
    Ok(out)
}

/// Block-diagonal assembly of per-snapshot weights for a block-Hankel lift:
/// block row `r` takes the left weights of snapshot `r`, block column `c`
/// the right weights of snapshot `c + d_t - 1`. Each block is renormalized so
/// the assembled pair is again on the simplex.
pub fn assemble_block_weights(spec: &LiftingSpec, per_snapshot: &[WeightPair]) -> Result<WeightPair> {
    if per_snapshot.len() != spec.t {
        return Err(Error::shape(spec.t, per_snapshot.len()));
    }
    let block_cols = spec.t - spec.d_t + 1;
    let mut wl = Vec::with_capacity(spec.d_t * spec.d);
    for w in per_snapshot.iter().take(spec.d_t) {
        wl.extend(w.w_left.iter().map(|v| v / spec.d_t as f64));
    }
    let mut wr = Vec::with_capacity(block_cols * spec.d_prime());
    for w in per_snapshot.iter().skip(spec.d_t - 1).take(block_cols) {
        wr.extend(w.w_right.iter().map(|v| v / block_cols as f64));
    }
    Ok(WeightPair {
        w_left: wl,
        w_right: wr,
        floor: per_snapshot[0].floor,
    })
}
