use num_complex::Complex64;

use crate::array_model::Omega;
use crate::error::{Error, Result};
use crate::lifting::{CMat, LiftMap, LiftingSpec};
use crate::linalg;
use crate::weights::WeightPair;

/// Output of the convex reference solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceResult {
    pub y_hat: Vec<Complex64>,
    /// Penalized objective after every outer iteration; non-increasing.
    pub objective: Vec<f64>,
}

const INNER_ITERS: usize = 60;

struct Operator {
    map: LiftMap,
    left: Vec<f64>,
    right: Vec<f64>,
    /// `Σ (l_i r_j)²` per sample, the diagonal of `A*A`.
    energy: Vec<f64>,
}

impl Operator {
    fn new(spec: &LiftingSpec, weights: &WeightPair) -> Result<Self> {
        let map = spec.map();
        let (rows, cols) = map.shape();
        if weights.w_left.len() != rows || weights.w_right.len() != cols {
            return Err(Error::shape(
                format!("weights {rows}+{cols}"),
                format!("{}+{}", weights.w_left.len(), weights.w_right.len()),
            ));
        }
        let (left, right) = weights.solver_diagonals();
        let mut energy = vec![0.0; map.num_samples()];
        for (k, &(i, _)) in map.table().iter().enumerate() {
            let w = left[k % rows] * right[k / rows];
            energy[i] += w * w;
        }
        Ok(Self {
            map,
            left,
            right,
            energy,
        })
    }

    fn apply(&self, g: &[Complex64]) -> CMat {
        let rows = self.left.len();
        let mut m = self.map.lift_unchecked(g);
        for (k, v) in m.as_mut_slice().iter_mut().enumerate() {
            *v *= self.left[k % rows] * self.right[k / rows];
        }
        m
    }

    fn adjoint(&self, y: &CMat) -> Vec<Complex64> {
        let rows = self.left.len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.map.num_samples()];
        for (k, (v, &(i, conj))) in y.as_slice().iter().zip(self.map.table()).enumerate() {
            let w = self.left[k % rows] * self.right[k / rows];
            out[i] += if conj { v.conj() } else { *v } * w;
        }
        out
    }
}

/// Clips the singular values of `m` at `radius`.
fn project_spectral_ball(m: &CMat, radius: f64) -> CMat {
    let svd = linalg::svd(m);
    if svd.s.iter().all(|&s| s <= radius) {
        return m.clone();
    }
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (k, &s) in svd.s.iter().enumerate() {
        let s = Complex64::from(s.min(radius));
        out += svd.u.column(k) * svd.v_t.row(k) * s;
    }
    out
}

fn observed_data(y_obs: &[Complex64], omega: &Omega, spec: &LiftingSpec) -> Result<(Vec<bool>, Vec<Complex64>)> {
    if omega.n() != spec.num_samples() {
        return Err(Error::shape(
            format!("observation set over {} samples", spec.num_samples()),
            omega.n(),
        ));
    }
    if y_obs.len() != omega.len() {
        return Err(Error::shape(omega.len(), y_obs.len()));
    }
    let mut mask = vec![false; omega.n()];
    let mut data = vec![Complex64::new(0.0, 0.0); omega.n()];
    for (&i, &v) in omega.indices().iter().zip(y_obs) {
        mask[i] = true;
        data[i] = v;
    }
    Ok((mask, data))
}

fn objective(op: &Operator, mask: &[bool], data: &[Complex64], lambda: f64, g: &[Complex64]) -> f64 {
    let fit: f64 = g
        .iter()
        .zip(data)
        .zip(mask)
        .filter(|(_, &o)| o)
        .map(|((a, b), _)| (a - b).norm_sqr())
        .sum();
    let nuc: f64 = linalg::singular_values(&op.apply(g)).iter().sum();
    0.5 * fit + lambda * nuc
}

/// `½||P_Ω(g) - y_Ω||² + λ ||W_L H(g) W_Rᵀ||_*`.
pub fn weighted_nuclear_objective(
    y_obs: &[Complex64],
    omega: &Omega,
    spec: &LiftingSpec,
    weights: &WeightPair,
    lambda: f64,
    g: &[Complex64],
) -> Result<f64> {
    let op = Operator::new(spec, weights)?;
    let (mask, data) = observed_data(y_obs, omega, spec)?;
    if g.len() != spec.num_samples() {
        return Err(Error::shape(spec.num_samples(), g.len()));
    }
    Ok(objective(&op, &mask, &data, lambda, g))
}

/// Minimizes [`weighted_nuclear_objective`] by monotone accelerated proximal
/// gradient, starting from the zero-filled observations. The proximal map of
/// the weighted nuclear norm is evaluated through its dual, a projected
/// gradient over the spectral-norm ball of radius `λ`.
pub fn prox_nuclear_reference(
    y_obs: &[Complex64],
    omega: &Omega,
    spec: &LiftingSpec,
    weights: &WeightPair,
    lambda: f64,
    iters: usize,
) -> Result<ReferenceResult> {
    let (_, data) = observed_data(y_obs, omega, spec)?;
    prox_nuclear_reference_from(y_obs, omega, spec, weights, lambda, iters, &data)
}

/// [`prox_nuclear_reference`] from a caller-supplied starting point.
pub fn prox_nuclear_reference_from(
    y_obs: &[Complex64],
    omega: &Omega,
    spec: &LiftingSpec,
    weights: &WeightPair,
    lambda: f64,
    iters: usize,
    init: &[Complex64],
) -> Result<ReferenceResult> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let op = Operator::new(spec, weights)?;
    let (mask, data) = observed_data(y_obs, omega, spec)?;
    if init.len() != spec.num_samples() {
        return Err(Error::shape(spec.num_samples(), init.len()));
    }
    let lip = op.energy.iter().cloned().fold(0.0, f64::max);
    let (rows, cols) = op.map.shape();

    let mut x = init.to_vec();
    let mut best = objective(&op, &mask, &data, lambda, &x);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut dual = CMat::zeros(rows, cols);
    let mut history = Vec::with_capacity(iters);

    for _ in 0..iters {
        // gradient step on the data term (unit Lipschitz constant)
        let v: Vec<Complex64> = z
            .iter()
            .zip(&data)
            .zip(&mask)
            .map(|((zi, di), &o)| if o { *di } else { *zi })
            .collect();
        // dual projected gradient for prox_{λ||A·||_*}(v)
        let mut yk = dual.clone();
        let mut wk = dual.clone();
        let mut s = 1.0f64;
        for _ in 0..INNER_ITERS {
            let mut resid = op.adjoint(&wk);
            for (r, vi) in resid.iter_mut().zip(&v) {
                *r -= vi;
            }
            let grad = op.apply(&resid);
            let next = project_spectral_ball(&(&wk - grad / Complex64::from(lip)), lambda);
            let s_next = 0.5 * (1.0 + (1.0 + 4.0 * s * s).sqrt());
            wk = &next + (&next - &yk) * Complex64::from((s - 1.0) / s_next);
            yk = next;
            s = s_next;
        }
        dual = yk;
        let a_star = op.adjoint(&dual);
        let u: Vec<Complex64> = v.iter().zip(&a_star).map(|(a, b)| a - b).collect();
        if u.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Solver {
                reason: "non-finite iterate".into(),
                iterate: x.iter().flat_map(|c| [c.re, c.im]).collect(),
            });
        }
        let f_u = objective(&op, &mask, &data, lambda, &u);
        let x_prev = x.clone();
        if f_u <= best {
            x = u.clone();
            best = f_u;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = x
            .iter()
            .zip(&u)
            .zip(&x_prev)
            .map(|((xi, ui), pi)| xi + (ui - xi) * (t / t_next) + (xi - pi) * ((t - 1.0) / t_next))
            .collect();
        t = t_next;
        history.push(best);
    }
    Ok(ReferenceResult {
        y_hat: x,
        objective: history,
    })
}
