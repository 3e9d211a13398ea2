//! Angle and amplitude extraction from completed uniform-array samples.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::{tau_atom, Omega};
use crate::error::{Error, Result};
use crate::lifting::{default_pencil, CMat, LiftingSpec};
use crate::linalg;

/// Estimated sources, sorted by `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaEstimate {
    pub taus: Vec<f64>,
    /// `asin(τ / spacing)` in degrees; `None` where `|τ / spacing| > 1`.
    pub thetas: Vec<Option<f64>>,
    pub amps: Vec<Complex64>,
    /// `||Σ b_k a(τ_k) - y|| / ||y||` on the samples the estimate was fitted to.
    pub residual: f64,
    pub spacing_ratio: f64,
}

impl DoaEstimate {
    fn empty() -> Self {
        Self {
            taus: Vec::new(),
            thetas: Vec::new(),
            amps: Vec::new(),
            residual: 1.0,
            spacing_ratio: 0.5,
        }
    }

    fn from_parts(mut pairs: Vec<(f64, Complex64)>, residual: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (taus, amps): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let mut est = Self {
            thetas: Vec::new(),
            taus,
            amps,
            residual,
            spacing_ratio: 0.5,
        };
        est.thetas = est.compute_thetas();
        est
    }

    fn compute_thetas(&self) -> Vec<Option<f64>> {
        self.taus
            .iter()
            .map(|t| {
                let s = t / self.spacing_ratio;
                (s.abs() <= 1.0).then(|| s.asin().to_degrees())
            })
            .collect()
    }

    /// Reinterprets the electrical angles for another element spacing (in wavelengths).
    pub fn with_spacing(mut self, spacing_ratio: f64) -> Self {
        self.spacing_ratio = spacing_ratio;
        self.thetas = self.compute_thetas();
        self
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta_deg,tau,amp_re,amp_im")?;
        for ((t, th), a) in self.taus.iter().zip(&self.thetas).zip(&self.amps) {
            let th = th.map(|v| format!("{v:.12}")).unwrap_or_default();
            writeln!(out, "{th},{t:.15},{:.12e},{:.12e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Wraps a normalized frequency into `(-0.5, 0.5]`.
pub fn wrap_tau(tau: f64) -> f64 {
    let w = tau - tau.round();
    if w <= -0.5 {
        w + 1.0
    } else {
        w
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Least-squares amplitudes of `exp(-j2πτ_k n)` atoms for `y[0..N]`.
pub fn amplitudes_ls(y: &[Complex64], taus: &[f64]) -> Result<Vec<Complex64>> {
    let rows: Vec<usize> = (0..y.len()).collect();
    amplitudes_on(y, &rows, taus)
}

/// Least squares over the sample positions `rows` (so `y[j]` sits at `rows[j]`).
fn amplitudes_on(y: &[Complex64], rows: &[usize], taus: &[f64]) -> Result<Vec<Complex64>> {
    if taus.is_empty() {
        return Ok(Vec::new());
    }
    if taus.len() > rows.len() {
        return Err(Error::InvalidArgument(format!(
            "{} frequencies exceed {} samples",
            taus.len(),
            rows.len()
        )));
    }
    for (i, a) in taus.iter().enumerate() {
        for b in &taus[i + 1..] {
            if wrap_tau(a - b).abs() <= 1e-12 {
                return Err(Error::IllConditioned(format!("duplicate frequency {a}")));
            }
        }
    }
    let v = CMat::from_fn(rows.len(), taus.len(), |r, c| tau_atom(taus[c], rows[r]));
    let rhs = CMat::from_column_slice(y.len(), 1, y);
    let sv = linalg::singular_values(&v);
    let (smax, smin) = (sv[0], sv[sv.len() - 1]);
    if !(smin > 1e-12 * smax) {
        return Err(Error::IllConditioned(format!(
            "steering matrix condition number {:.3e}",
            smax / smin
        )));
    }
    let b = linalg::lstsq(&v, &rhs, 0.0);
    Ok(b.column(0).iter().copied().collect())
}

fn relative_residual(y: &[Complex64], rows: &[usize], taus: &[f64], amps: &[Complex64]) -> f64 {
    let ny = norm(y);
    if ny == 0.0 {
        return 0.0;
    }
    let diff: Vec<Complex64> = rows
        .iter()
        .zip(y)
        .map(|(&n, v)| {
            let m: Complex64 = taus.iter().zip(amps).map(|(&t, b)| b * tau_atom(t, n)).sum();
            m - v
        })
        .collect();
    norm(&diff) / ny
}

/// Matrix-pencil (signal-subspace shift-invariance) estimate of up to `k`
/// frequencies from a full uniform sample vector.
///
/// The model order is the number of singular values of the Hankel lift above
/// `noise_tol · σ₁`, capped at `k`. `pencil_d` defaults to `⌈(N+1)/2⌉`.
pub fn matrix_pencil(y: &[Complex64], k: usize, pencil_d: Option<usize>, noise_tol: f64) -> Result<DoaEstimate> {
    let n = y.len();
    if n < 2 * k + 1 {
        return Err(Error::InvalidArgument(format!(
            "{n} samples cannot resolve {k} frequencies (need at least {})",
            2 * k + 1
        )));
    }
    let d = pencil_d.unwrap_or_else(|| default_pencil(n));
    let spec = LiftingSpec::hankel(n, d)?;
    let dp = spec.d_prime();
    if d < k + 1 || dp < k {
        return Err(Error::InvalidArgument(format!(
            "pencil parameter {d} cannot resolve {k} frequencies for N={n}"
        )));
    }
    if k == 0 || norm(y) == 0.0 {
        return Ok(DoaEstimate::empty());
    }
    let h = spec.map().lift(y)?;
    let svd = linalg::svd(&h);
    let sv = &svd.s;
    let s1 = sv[0];
    let k_hat = sv.iter().take(k).filter(|&&s| s > noise_tol * s1).count();
    if k_hat == 0 {
        return Ok(DoaEstimate::empty());
    }
    let u = svd.u.columns(0, k_hat).into_owned();
    let u1 = u.rows(0, d - 1).into_owned();
    let u2 = u.rows(1, d - 1).into_owned();
    let psi = linalg::lstsq(&u1, &u2, 1e-14);
    let eig = linalg::eigenvalues(&psi);
    let taus: Vec<f64> = eig.iter().map(|z| wrap_tau(-z.arg() / (2.0 * PI))).collect();
    let rows: Vec<usize> = (0..n).collect();
    let amps = amplitudes_on(y, &rows, &taus)?;
    let residual = relative_residual(y, &rows, &taus, &amps);
    Ok(DoaEstimate::from_parts(taus.into_iter().zip(amps).collect(), residual))
}

/// Sparse-recovery grid over `sin θ ∈ [-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Number of segments of `[-1, 1]`.
    pub resolution: usize,
    /// ℓ1 weight; `None` selects `1e-2 · ||A_Ωᴴ y||_∞`.
    pub lambda_reg: Option<f64>,
    pub iters: usize,
    pub spacing_ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            resolution: 4096,
            lambda_reg: None,
            iters: 300,
            spacing_ratio: 0.5,
        }
    }
}

impl GridSpec {
    pub fn sin_at(&self, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / self.resolution as f64
    }

    pub fn tau_at(&self, i: usize) -> f64 {
        self.spacing_ratio * self.sin_at(i)
    }
}

/// Output of [`bp_grid_detail`].
#[derive(Debug, Clone, PartialEq)]
pub struct BpResult {
    pub estimate: DoaEstimate,
    /// Peak grid index of every reported source.
    pub grid_indices: Vec<usize>,
    /// `λ||x||₁ + ½||A_Ω x - y||²` per iteration; non-increasing.
    pub objective: Vec<f64>,
}

/// Basis-pursuit baseline: ℓ1-regularized least squares over the grid
/// dictionary, solved by monotone FISTA. Contiguous runs of active atoms are
/// reported as one source at their peak.
pub fn bp_grid(y_obs: &[Complex64], omega: &Omega, grid: &GridSpec) -> Result<DoaEstimate> {
    bp_grid_detail(y_obs, omega, grid).map(|r| r.estimate)
}

pub fn bp_grid_detail(y_obs: &[Complex64], omega: &Omega, grid: &GridSpec) -> Result<BpResult> {
    if grid.resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {}",
            grid.resolution
        )));
    }
    if y_obs.len() != omega.len() {
        return Err(Error::shape(omega.len(), y_obs.len()));
    }
    let rows = omega.indices();
    let g = grid.resolution;
    let empty = |objective| BpResult {
        estimate: DoaEstimate::empty().with_spacing(grid.spacing_ratio),
        grid_indices: Vec::new(),
        objective,
    };
    if norm(y_obs) == 0.0 {
        return Ok(empty(Vec::new()));
    }
    let dict = CMat::from_fn(rows.len(), g, |r, c| tau_atom(grid.tau_at(c), rows[r]));
    let y = nalgebra::DVector::from_column_slice(y_obs);
    let corr = dict.ad_mul(&y);
    let lambda = grid
        .lambda_reg
        .unwrap_or_else(|| 1e-2 * corr.iter().map(|c| c.norm()).fold(0.0, f64::max));
    // ||A||² by power iteration
    let mut v = nalgebra::DVector::from_element(g, Complex64::new(1.0, 0.0));
    let mut lip = 0.0;
    for _ in 0..50 {
        let w = dict.ad_mul(&(&dict * &v));
        lip = w.norm() / v.norm();
        v = w.unscale(w.norm());
    }
    let step = 1.0 / (1.01 * lip);
    let obj = |x: &nalgebra::DVector<Complex64>| {
        let r = &dict * x - &y;
        0.5 * r.norm_squared() + lambda * x.iter().map(|c| c.norm()).sum::<f64>()
    };
    let shrink = |z: &nalgebra::DVector<Complex64>| {
        let grad = dict.ad_mul(&(&dict * z - &y));
        let u = z - grad * Complex64::from(step);
        u.map(|c| {
            let m = c.norm();
            if m <= lambda * step {
                Complex64::new(0.0, 0.0)
            } else {
                c * ((m - lambda * step) / m)
            }
        })
    };
    let mut x = nalgebra::DVector::<Complex64>::zeros(g);
    let mut best = obj(&x);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut history = Vec::with_capacity(grid.iters);
    for _ in 0..grid.iters {
        let u = shrink(&z);
        let f_u = obj(&u);
        let x_prev = x.clone();
        if f_u <= best {
            x = u.clone();
            best = f_u;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &x + (&u - &x) * Complex64::from(t / t_next) + (&x - &x_prev) * Complex64::from((t - 1.0) / t_next);
        t = t_next;
        history.push(best);
    }

    let mags: Vec<f64> = x.iter().map(|c| c.norm()).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(empty(history));
    }
    let active: Vec<bool> = mags.iter().map(|&m| m > 1e-3 * peak).collect();
    let mut indices = Vec::new();
    let mut i = 0;
    while i < g {
        if !active[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < g && active[i] {
            i += 1;
        }
        let best_i = (start..i).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).expect("nonempty run");
        indices.push(best_i);
    }
    // a run touching both ends of the grid wraps around
    let step_tau = 2.0 * grid.spacing_ratio / g as f64;
    if indices.len() > 1 && active[0] && active[g - 1] && wrap_tau(grid.tau_at(0) - grid.tau_at(g - 1)).abs() <= step_tau + 1e-12 {
        let last = indices.pop().expect("len > 1");
        if mags[last] > mags[indices[0]] {
            indices[0] = last;
        }
    }
    let taus: Vec<f64> = indices.iter().map(|&i| grid.tau_at(i)).collect();
    let amps = match amplitudes_on(y_obs, rows, &taus) {
        Ok(a) => a,
        Err(_) => indices.iter().map(|&i| x[i]).collect(),
    };
    let residual = relative_residual(y_obs, rows, &taus, &amps);
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let grid_indices = order.iter().map(|&o| indices[o]).collect();
    let estimate = DoaEstimate::from_parts(taus.into_iter().zip(amps).collect(), residual).with_spacing(grid.spacing_ratio);
    Ok(BpResult {
        estimate,
        grid_indices,
        objective: history,
    })
}

/// Merges per-snapshot estimates into at most `k` sources. Snapshots are
/// visited from the richest (then lowest residual) estimate down; each
/// frequency joins the nearest unclaimed cluster within `radius`
/// (wrap-around aware) or opens a new one, so a snapshot contributes at most
/// one member per cluster. Cluster frequencies are circular means of their
/// members, amplitudes are averaged, and the `k` most populated clusters are
/// kept.
pub fn cluster_taus(per_snapshot: &[DoaEstimate], k: usize, radius: f64) -> DoaEstimate {
    if k == 0 || per_snapshot.iter().all(|e| e.is_empty()) {
        return DoaEstimate::empty();
    }
    let mut order: Vec<&DoaEstimate> = per_snapshot.iter().collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then(a.residual.total_cmp(&b.residual)));

    let mut anchors: Vec<f64> = Vec::new();
    let mut members: Vec<Vec<(f64, Complex64)>> = Vec::new();
    for est in order {
        let mut pairs = Vec::new();
        for (i, &t) in est.taus.iter().enumerate() {
            for (c, &a) in anchors.iter().enumerate() {
                let dist = wrap_tau(t - a).abs();
                if dist <= radius {
                    pairs.push((dist, i, c));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut used_est = vec![false; est.len()];
        let mut used_cluster = vec![false; anchors.len()];
        for (_, i, c) in pairs {
            if !used_est[i] && !used_cluster[c] {
                used_est[i] = true;
                used_cluster[c] = true;
                members[c].push((est.taus[i], est.amps[i]));
            }
        }
        for (i, used) in used_est.into_iter().enumerate() {
            if !used {
                anchors.push(est.taus[i]);
                members.push(vec![(est.taus[i], est.amps[i])]);
            }
        }
    }
    members.sort_by_key(|c| std::cmp::Reverse(c.len()));
    members.truncate(k);
    let merged: Vec<(f64, Complex64)> = members
        .iter()
        .map(|c| {
            let anchor = c[0].0;
            let offset = c.iter().map(|(t, _)| wrap_tau(t - anchor)).sum::<f64>() / c.len() as f64;
            let amp = c.iter().map(|(_, a)| a).sum::<Complex64>() / c.len() as f64;
            (wrap_tau(anchor + offset), amp)
        })
        .collect();
    let residual = per_snapshot.iter().map(|e| e.residual).sum::<f64>() / per_snapshot.len() as f64;
    DoaEstimate::from_parts(merged, residual).with_spacing(per_snapshot[0].spacing_ratio)
}

/// Minimum wrap-around distance `min |sin θ_i - sin θ_j + q|` over distinct
/// pairs and integers `q`.
pub fn wrap_separation(thetas_deg: &[f64]) -> Result<f64> {
    if thetas_deg.len() < 2 {
        return Err(Error::UndefinedMetric("separation needs at least two angles".into()));
    }
    let s: Vec<f64> = thetas_deg.iter().map(|t| t.to_radians().sin()).collect();
    let mut best = f64::INFINITY;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let diff = s[i] - s[j];
            best = best.min((diff - diff.round()).abs());
        }
    }
    Ok(best)
}

/// Whether the angles are separated by at least `2.52 / (spacing · N)`.
pub fn separation_ok(thetas_deg: &[f64], n: usize, spacing_ratio: f64) -> Result<bool> {
    Ok(wrap_separation(thetas_deg)? >= separation_threshold(n, spacing_ratio))
}

pub fn separation_threshold(n: usize, spacing_ratio: f64) -> f64 {
    2.52 / (spacing_ratio * n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::superpose;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_tone() {
        let y = superpose(&[0.1], &[c(1.0)], 15);
        let est = matrix_pencil(&y, 1, None, 1e-8).unwrap();
        assert_abs_diff_eq!(est.taus[0], 0.1, epsilon = 1e-8);
        assert!(est.residual < 1e-10);
    }

    #[test]
    fn two_tones_and_amplitudes() {
        let y = superpose(&[0.1, 0.3], &[c(1.0), c(2.0)], 21);
        let est = matrix_pencil(&y, 2, None, 1e-8).unwrap();
        assert_abs_diff_eq!(est.taus[0], 0.1, epsilon = 1e-8);
        assert_abs_diff_eq!(est.taus[1], 0.3, epsilon = 1e-8);
        assert!((est.amps[0] - c(1.0)).norm() < 1e-8);
        assert!((est.amps[1] - c(2.0)).norm() < 1e-8);
    }

    #[test]
    fn overestimated_order_is_trimmed() {
        let y = superpose(&[-0.2], &[c(1.5)], 15);
        let est = matrix_pencil(&y, 3, None, 1e-8).unwrap();
        assert_eq!(est.len(), 1);
    }

    #[test]
    fn zero_signal_is_empty() {
        let y = vec![c(0.0); 9];
        let est = matrix_pencil(&y, 2, None, 1e-8).unwrap();
        assert!(est.is_empty());
        assert_eq!(est.residual, 1.0);
    }

    #[test]
    fn too_few_samples() {
        let y = vec![c(1.0); 4];
        assert!(matches!(matrix_pencil(&y, 2, None, 1e-8), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn amplitude_examples() {
        let y = superpose(&[0.05, -0.31], &[Complex64::new(1.0, -2.0), c(0.5)], 12);
        let b = amplitudes_ls(&y, &[0.05, -0.31]).unwrap();
        assert!((b[0] - Complex64::new(1.0, -2.0)).norm() < 1e-10);
        assert!((b[1] - c(0.5)).norm() < 1e-10);
        assert!(amplitudes_ls(&y, &[]).unwrap().is_empty());
        let ones = vec![c(1.0); 6];
        assert!((amplitudes_ls(&ones, &[0.0]).unwrap()[0] - c(1.0)).norm() < 1e-12);
        assert!(matches!(amplitudes_ls(&y, &[0.1, 0.1]), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn thetas_follow_spacing() {
        let y = superpose(&[0.25], &[c(1.0)], 9);
        let est = matrix_pencil(&y, 1, None, 1e-8).unwrap();
        assert_abs_diff_eq!(est.thetas[0].unwrap(), 30.0, epsilon = 1e-6);
        let est = est.with_spacing(0.2);
        assert_eq!(est.thetas[0], None);
    }

    #[test]
    fn bp_on_grid_source() {
        let grid = GridSpec::default();
        let idx = 2600;
        let y = superpose(&[grid.tau_at(idx)], &[c(2.0)], 16);
        let omega = Omega::full(16);
        let out = bp_grid_detail(&y, &omega, &grid).unwrap();
        assert!(out.grid_indices.contains(&idx), "{:?}", out.grid_indices);
        let k = out.grid_indices.iter().position(|&i| i == idx).unwrap();
        assert!((out.estimate.amps[k].norm() - 2.0).abs() < 0.02);
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn bp_off_grid_source_lands_next_to_it() {
        let grid = GridSpec::default();
        let tau = 0.5 * (grid.tau_at(1000) + grid.tau_at(1001)) + 1e-5;
        let y = superpose(&[tau], &[c(1.0)], 16);
        let out = bp_grid_detail(&y, &Omega::full(16), &grid).unwrap();
        let strongest = (0..out.estimate.len())
            .max_by(|&a, &b| out.estimate.amps[a].norm().total_cmp(&out.estimate.amps[b].norm()))
            .unwrap();
        assert!([1000, 1001].contains(&out.grid_indices[strongest]), "{:?}", out.grid_indices);
    }

    #[test]
    fn bp_zero_is_empty() {
        let omega = Omega::new(vec![0, 3, 5], 8).unwrap();
        let est = bp_grid(&[c(0.0); 3], &omega, &GridSpec::default()).unwrap();
        assert!(est.is_empty());
    }

    #[test]
    fn separation_examples() {
        assert_abs_diff_eq!(wrap_separation(&[30.0, 30.5]).unwrap(), 0.00753, epsilon = 1e-5);
        assert_abs_diff_eq!(wrap_separation(&[80.0, -80.0]).unwrap(), 0.03038, epsilon = 1e-5);
        assert_eq!(wrap_separation(&[12.0, 12.0]).unwrap(), 0.0);
        assert!(wrap_separation(&[1.0]).is_err());
        assert!(!separation_ok(&[90.0, -90.0], 10, 0.5).unwrap());
        assert_abs_diff_eq!(separation_threshold(100, 0.5), 0.0504, epsilon = 1e-12);
        let dist = |delta: f64| [0.0, delta.asin().to_degrees()];
        assert!(separation_ok(&dist(0.06), 100, 0.5).unwrap());
        assert!(!separation_ok(&dist(0.04), 100, 0.5).unwrap());
    }

    #[test]
    fn clustering_merges_snapshots() {
        let a = matrix_pencil(&superpose(&[0.1, -0.2], &[c(1.0), c(1.0)], 15), 2, None, 1e-8).unwrap();
        let b = matrix_pencil(&superpose(&[0.1001, -0.2], &[c(3.0), c(1.0)], 15), 2, None, 1e-8).unwrap();
        let m = cluster_taus(&[a, b], 2, 0.01);
        assert_eq!(m.len(), 2);
        assert_abs_diff_eq!(m.taus[1], 0.10005, epsilon = 1e-6);
        assert!((m.amps[1] - c(2.0)).norm() < 1e-6);
    }

    #[test]
    fn clustering_keeps_sources_closer_than_radius() {
        let taus = [-0.2151, -0.2037, -0.1937];
        let amps = [c(1.0), c(2.0), c(1.5)];
        let per: Vec<DoaEstimate> = (0..4)
            .map(|t| {
                let jitter = 1e-4 * t as f64;
                let shifted: Vec<f64> = taus.iter().map(|x| x + jitter).collect();
                matrix_pencil(&superpose(&shifted, &amps, 41), 3, None, 1e-8).unwrap()
            })
            .collect();
        let m = cluster_taus(&per, 3, 0.5 / 41.0);
        assert_eq!(m.len(), 3);
        for (got, want) in m.taus.iter().zip(taus) {
            assert_abs_diff_eq!(*got, want + 1.5e-4, epsilon = 1e-8);
        }
    }

    #[test]
    fn clustering_wraps_around_half() {
        let a = matrix_pencil(&superpose(&[0.499], &[c(1.0)], 15), 1, None, 1e-8).unwrap();
        let b = matrix_pencil(&superpose(&[-0.499], &[c(1.0)], 15), 1, None, 1e-8).unwrap();
        let m = cluster_taus(&[a, b], 1, 0.01);
        assert_eq!(m.len(), 1);
        assert!(wrap_tau(m.taus[0] - 0.5).abs() < 1e-8);
    }
}
