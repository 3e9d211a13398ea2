use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AdmmConfig, CompletionResult, GStep, TraceEntry};
use crate::array_model::Omega;
use crate::error::{Error, Result};
use crate::lifting::{CMat, LiftMap, LiftingKind, LiftingSpec};
use crate::linalg;
use crate::weights::{numerical_rank, RankRule, WeightPair};

/// Completes one snapshot from its observed samples.
///
/// `y_obs[j]` is the sample at `omega.indices()[j]`. The lifting must be a
/// single-snapshot Hankel or double-Hankel spec.
///
/// ```
/// use wlidoa::array_model::{superpose, Omega, project};
/// use wlidoa::completion::{admm_complete, nmse, AdmmConfig};
/// use wlidoa::lifting::LiftingSpec;
/// use wlidoa::weights::WeightPair;
///
/// let y = superpose(&[0.1, -0.27], &[1.0.into(), 0.5.into()], 15);
/// let omega = Omega::new(vec![0, 1, 3, 4, 6, 8, 9, 11, 13, 14], 15).unwrap();
/// let spec = LiftingSpec::hankel(15, 8).unwrap();
/// let cfg = AdmmConfig::default().with_rank(2);
/// let out = admm_complete(&project(&y, &omega).unwrap(), &omega, &spec,
///                         &WeightPair::identity_for(&spec), &cfg).unwrap();
/// assert!(nmse(&y, &out.y_hat).unwrap() < 1e-6);
/// ```
pub fn admm_complete(
    y_obs: &[Complex64],
    omega: &Omega,
    spec: &LiftingSpec,
    weights: &WeightPair,
    cfg: &AdmmConfig,
) -> Result<CompletionResult> {
    if spec.kind == LiftingKind::BlockHankel {
        return Err(Error::InvalidArgument(
            "block-Hankel lifting needs admm_complete_block".into(),
        ));
    }
    if omega.n() != spec.n {
        return Err(Error::shape(format!("observation set over {} elements", spec.n), omega.n()));
    }
    let problem = Problem::new(spec, weights, &[y_obs], std::slice::from_ref(omega))?;
    problem.solve(cfg)
}

/// Completes `T` snapshots jointly through a block-Hankel lifting.
///
/// `y_obs[t]` holds the observed samples of snapshot `t` on `omegas[t]`;
/// `weights` is an assembled pair matching the block shape (see
/// [`crate::weights::assemble_block_weights`]). With `T = 1` this is the
/// same computation as [`admm_complete`].
pub fn admm_complete_block(
    y_obs: &[Vec<Complex64>],
    omegas: &[Omega],
    spec: &LiftingSpec,
    weights: &WeightPair,
    cfg: &AdmmConfig,
) -> Result<CompletionResult> {
    if spec.kind != LiftingKind::BlockHankel {
        return Err(Error::InvalidArgument("expected a block-Hankel lifting".into()));
    }
    if y_obs.len() != spec.t || omegas.len() != spec.t {
        return Err(Error::shape(format!("{} snapshots", spec.t), y_obs.len().min(omegas.len())));
    }
    if let Some(bad) = omegas.iter().find(|o| o.n() != spec.n) {
        return Err(Error::shape(format!("observation set over {} elements", spec.n), bad.n()));
    }
    let cols: Vec<&[Complex64]> = y_obs.iter().map(Vec::as_slice).collect();
    let problem = Problem::new(spec, weights, &cols, omegas)?;
    problem.solve(cfg)
}

struct Problem {
    map: LiftMap,
    left: Vec<f64>,
    right: Vec<f64>,
    observed: Vec<bool>,
    /// Zero-filled data over all samples.
    data: Vec<Complex64>,
    n: usize,
    snapshots: usize,
}

impl Problem {
    fn new(spec: &LiftingSpec, weights: &WeightPair, y_obs: &[&[Complex64]], omegas: &[Omega]) -> Result<Self> {
        let map = spec.map();
        let (rows, cols) = map.shape();
        if weights.w_left.len() != rows || weights.w_right.len() != cols {
            return Err(Error::shape(
                format!("weights {rows}+{cols}"),
                format!("{}+{}", weights.w_left.len(), weights.w_right.len()),
            ));
        }
        if weights.w_left.iter().chain(&weights.w_right).any(|w| !(*w > 0.0)) {
            return Err(Error::DegenerateWeights);
        }
        let (left, right) = weights.solver_diagonals();
        let total = map.num_samples();
        let mut observed = vec![false; total];
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for (t, (y, om)) in y_obs.iter().zip(omegas).enumerate() {
            if y.len() != om.len() {
                return Err(Error::shape(om.len(), y.len()));
            }
            for (&i, &v) in om.indices().iter().zip(y.iter()) {
                observed[t * spec.n + i] = true;
                data[t * spec.n + i] = v;
            }
        }
        Ok(Self {
            map,
            left,
            right,
            observed,
            data,
            n: spec.n,
            snapshots: y_obs.len(),
        })
    }

    fn weighted_lift(&self, g: &[Complex64]) -> CMat {
        let mut m = self.map.lift_unchecked(g);
        let rows = self.left.len();
        for (k, v) in m.as_mut_slice().iter_mut().enumerate() {
            *v *= self.left[k % rows] * self.right[k / rows];
        }
        m
    }

    fn solve(&self, cfg: &AdmmConfig) -> Result<CompletionResult> {
        let (rows, cols) = self.map.shape();
        cfg.validate((rows, cols))?;
        let r = cfg.rank;
        let total = self.map.num_samples();
        let table = self.map.table();
        let counts = self.map.counts();

        // Per-sample normal-equation denominators of the exact g step.
        let mut energy = vec![0.0f64; total];
        for (k, &(i, _)) in table.iter().enumerate() {
            let w = self.left[k % rows] * self.right[k / rows];
            energy[i] += w * w;
        }
        let denom: Vec<f64> = energy
            .iter()
            .zip(&self.observed)
            .map(|(e, &o)| if o { cfg.gamma + cfg.rho * e } else { cfg.rho * e })
            .collect();

        let x0 = self.weighted_lift(&self.data);
        let svd = linalg::svd(&x0);
        let (u, vt) = (&svd.u, &svd.v_t);
        let mut s_mat = CMat::zeros(rows, r);
        let mut r_mat = CMat::zeros(cols, r);
        for k in 0..r {
            let sq = svd.s[k].sqrt();
            s_mat.set_column(k, &(u.column(k) * Complex64::from(sq)));
            r_mat.set_column(k, &(vt.row(k).adjoint() * Complex64::from(sq)));
        }
        let mut lambda = CMat::zeros(rows, cols);
        let mut g = self.data.clone();
        let mut trace = Vec::with_capacity(cfg.iters);
        let mut max_mult = 0.0f64;
        let eye = CMat::identity(r, r);
        let rho = Complex64::from(cfg.rho);
        let mut iterations_run = 0;
        let hard = cfg.gamma.is_infinite();

        for it in 1..=cfg.iters {
            iterations_run = it;
            let target = &s_mat * r_mat.adjoint() - &lambda;
            let g_prev = std::mem::take(&mut g);
            g = match cfg.g_step {
                GStep::Exact => {
                    let mut acc = vec![Complex64::new(0.0, 0.0); total];
                    for (k, (v, &(i, conj))) in target.as_slice().iter().zip(table).enumerate() {
                        let w = self.left[k % rows] * self.right[k / rows];
                        acc[i] += if conj { v.conj() } else { *v } * w;
                    }
                    acc.iter()
                        .enumerate()
                        .map(|(i, a)| {
                            if !self.observed[i] {
                                a * cfg.rho / denom[i]
                            } else if hard {
                                self.data[i]
                            } else {
                                (a * cfg.rho + self.data[i] * cfg.gamma) / denom[i]
                            }
                        })
                        .collect()
                }
                GStep::BackProjection => {
                    let mut acc = vec![Complex64::new(0.0, 0.0); total];
                    for (k, (v, &(i, conj))) in target.as_slice().iter().zip(table).enumerate() {
                        let w = self.left[k % rows] * self.right[k / rows];
                        acc[i] += if conj { v.conj() } else { *v } / w;
                    }
                    acc.iter()
                        .enumerate()
                        .map(|(i, a)| {
                            let b = a / counts[i] as f64;
                            if self.observed[i] && hard {
                                self.data[i]
                            } else if self.observed[i] {
                                (self.data[i] * cfg.gamma + b * cfg.rho) / (cfg.gamma + cfg.rho)
                            } else {
                                b
                            }
                        })
                        .collect()
                }
            };
            let x = self.weighted_lift(&g);
            let f = (&x + &lambda) * rho;
            if f.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Divergence { iteration: it });
            }
            s_mat = right_solve(&f * &r_mat, &(&eye + r_mat.adjoint() * &r_mat * rho), it)?;
            r_mat = right_solve(f.adjoint() * &s_mat, &(&eye + s_mat.adjoint() * &s_mat * rho), it)?;
            let gap = &x - &s_mat * r_mat.adjoint();
            lambda += &gap;

            let feas = gap.norm();
            let data_res = g
                .iter()
                .zip(&self.data)
                .zip(&self.observed)
                .filter(|(_, &o)| o)
                .map(|((a, b), _)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if !feas.is_finite() || !data_res.is_finite() {
                return Err(Error::Divergence { iteration: it });
            }
            max_mult = max_mult.max(lambda.norm());
            trace.push(TraceEntry {
                iter: it,
                feas_residual: feas,
                data_residual: data_res,
            });
            let step: f64 = g.iter().zip(&g_prev).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let g_norm: f64 = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let scale = x.norm().max(1.0);
            if feas <= cfg.tol * scale && step <= cfg.tol * g_norm.max(1.0) {
                break;
            }
        }

        let low_rank = &s_mat * r_mat.adjoint();
        let sv = linalg::singular_values(&low_rank);
        let final_rank_estimate = numerical_rank(&sv, RankRule::Relative(1e-6));
        Ok(CompletionResult {
            y_hat: g,
            n: self.n,
            snapshots: self.snapshots,
            trace,
            final_rank_estimate,
            iterations_run,
            max_multiplier_norm: max_mult,
        })
    }
}

/// `B M⁻¹` for Hermitian positive definite `M`.
fn right_solve(b: CMat, m: &CMat, iteration: usize) -> Result<CMat> {
    let chol = m.clone().cholesky().ok_or(Error::Divergence { iteration })?;
    let sol: DMatrix<Complex64> = chol.solve(&b.adjoint());
    Ok(sol.adjoint())
}
