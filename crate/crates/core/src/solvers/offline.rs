//! Full-horizon benchmarks.
//!
//! Both solvers work on the horizon-scaled objective
//! `Σ_t f_t(x_t) + (β₁/2)Σ_t‖x_t − x_{t−1}‖² + w‖Σ_t A_t x_t‖_p`, which is
//! `T·cost(x)` by positive homogeneity of the norm.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{OfflineMethod, SolveOptions};
use crate::error::{Error, Result};
use crate::model::{total_cost, CostBreakdown, Episode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineSolution {
    pub trajectory: Vec<DVector<f64>>,
    pub cost: CostBreakdown,
    pub method: OfflineMethod,
    pub iterations: usize,
    /// Final primal residual (splitting) or final subgradient norm.
    pub residual: f64,
    /// Total cost reached by the restarted solve, when one was run.
    pub restart_total: Option<f64>,
    pub warning: Option<String>,
}

/// Minimizes the full cost over the stacked trajectory.
pub fn solve_offline_opt(episode: &Episode, opts: &SolveOptions) -> Result<OfflineSolution> {
    solve(episode, opts, true)
}

/// Minimizes the fairness term alone. The returned cost still reports every
/// component of the resulting trajectory. The fairness minimizer is rarely
/// unique; when both starts reach the same fairness value, the trajectory
/// with the lower total is kept.
pub fn solve_fair_opt(episode: &Episode, opts: &SolveOptions) -> Result<OfflineSolution> {
    if episode.fairness().weight == 0.0 {
        let trajectory = episode
            .action_sets()
            .iter()
            .map(|set| set.project(episode.x0()))
            .collect::<Result<Vec<_>>>()?;
        let cost = total_cost(episode, &trajectory)?;
        return Ok(OfflineSolution {
            trajectory,
            cost,
            method: opts.offline,
            iterations: 0,
            residual: 0.0,
            restart_total: None,
            warning: None,
        });
    }
    solve(episode, opts, false)
}

fn solve(episode: &Episode, opts: &SolveOptions, with_smooth: bool) -> Result<OfflineSolution> {
    opts.validate()?;
    let problem = Stacked::new(episode, with_smooth);
    let p = episode.fairness().p;
    let method = if p == 1.0 || p == 2.0 || p.is_infinite() || episode.fairness().weight == 0.0 {
        opts.offline
    } else {
        OfflineMethod::Subgradient
    };

    let first_start = problem.default_start()?;
    let mut first = problem.run(method, first_start, 1.0, opts)?;
    let mut first_total = total_cost(episode, &first.trajectory)?;

    if opts.offline_restart {
        let second_start = problem.seeded_start(opts.seed)?;
        let second = problem.run(method, second_start, 4.0, opts)?;
        let second_total = total_cost(episode, &second.trajectory)?;
        let objective = |c: &CostBreakdown| if with_smooth { c.total } else { c.fairness };
        let (a, b) = (objective(&first_total), objective(&second_total));
        let disagreement = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let mut warning = first.warning.take().or(second.warning.clone());
        if disagreement > opts.restart_agreement {
            warning = Some(format!(
                "restarted offline solves disagree by {:.3}% ({a:.6} vs {b:.6})",
                100.0 * disagreement
            ));
        }
        let restart_total = Some(second_total.total);
        let tied = disagreement <= opts.restart_agreement;
        if (tied && second_total.total < first_total.total) || (!tied && b < a) {
            first = second;
            first_total = second_total;
        }
        first.warning = warning;
        return Ok(first.finish(first_total, method, restart_total));
    }
    Ok(first.finish(first_total, method, None))
}

struct RunOutcome {
    trajectory: Vec<DVector<f64>>,
    iterations: usize,
    residual: f64,
    warning: Option<String>,
}

impl RunOutcome {
    fn finish(self, cost: CostBreakdown, method: OfflineMethod, restart_total: Option<f64>) -> OfflineSolution {
        OfflineSolution {
            trajectory: self.trajectory,
            cost,
            method,
            iterations: self.iterations,
            residual: self.residual,
            restart_total,
            warning: self.warning,
        }
    }
}

/// The horizon problem in matrix form. Trajectories are `T × N` matrices
/// whose row `t` is `x_t`.
struct Stacked<'a> {
    episode: &'a Episode,
    horizon: usize,
    n: usize,
    m: usize,
    curvature: Vec<f64>,
    beta1: f64,
    /// Linear part `q` of the smooth term `½XᵀHX − q·X`.
    linear: DMatrix<f64>,
    weight: f64,
    p: f64,
}

impl<'a> Stacked<'a> {
    fn new(episode: &'a Episode, with_smooth: bool) -> Self {
        let horizon = episode.horizon();
        let n = episode.action_dim();
        let beta1 = if with_smooth { episode.switching_weight() } else { 0.0 };
        let mut curvature = vec![0.0; horizon];
        let mut linear = DMatrix::zeros(horizon, n);
        if with_smooth {
            for (t, step) in episode.steps().iter().enumerate() {
                let f = &step.hitting;
                curvature[t] = f.curvature;
                for i in 0..n {
                    linear[(t, i)] = f.curvature * f.center[i] - f.linear[i];
                }
            }
            for i in 0..n {
                linear[(0, i)] += beta1 * episode.x0()[i];
            }
        }
        Stacked {
            episode,
            horizon,
            n,
            m: episode.fairness_dim(),
            curvature,
            beta1,
            linear,
            weight: episode.fairness().weight,
            p: episode.fairness().p,
        }
    }

    fn rows(&self, x: &DMatrix<f64>) -> Vec<DVector<f64>> {
        (0..self.horizon).map(|t| x.row(t).transpose()).collect()
    }

    fn project_rows(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.horizon, self.n);
        for (t, set) in self.episode.action_sets().iter().enumerate() {
            let projected = set.project(&x.row(t).transpose())?;
            out.set_row(t, &projected.transpose());
        }
        Ok(out)
    }

    fn default_start(&self) -> Result<DMatrix<f64>> {
        let mut start = DMatrix::zeros(self.horizon, self.n);
        for t in 0..self.horizon {
            let guess = if self.curvature[t] > 0.0 {
                self.linear.row(t).transpose() / self.curvature[t]
            } else {
                self.episode.x0().clone()
            };
            start.set_row(t, &guess.transpose());
        }
        self.project_rows(&start)
    }

    fn seeded_start(&self, seed: u64) -> Result<DMatrix<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut start = DMatrix::zeros(self.horizon, self.n);
        for (t, set) in self.episode.action_sets().iter().enumerate() {
            let corner = set.linear_minimizer(&DVector::from_fn(self.n, |_, _| rng.random_range(-1.0..1.0)))?;
            start.set_row(t, &corner.transpose());
        }
        Ok(start)
    }

    /// `Σ_t A_t x_t`.
    fn couple(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut s = DVector::zeros(self.m);
        for (t, step) in self.episode.steps().iter().enumerate() {
            let a = &step.fairness_matrix;
            for i in 0..self.m {
                let mut acc = 0.0;
                for j in 0..self.n {
                    acc += a[(i, j)] * x[(t, j)];
                }
                s[i] += acc;
            }
        }
        s
    }

    /// Row `t` of the result is `A_tᵀ y`.
    fn couple_adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.horizon, self.n);
        self.add_couple_adjoint(y, 1.0, &mut out);
        out
    }

    /// Adds `scale · A_tᵀ y` to row `t` of `out`.
    fn add_couple_adjoint(&self, y: &DVector<f64>, scale: f64, out: &mut DMatrix<f64>) {
        for (t, step) in self.episode.steps().iter().enumerate() {
            let a = &step.fairness_matrix;
            for j in 0..self.n {
                let mut acc = 0.0;
                for i in 0..self.m {
                    acc += a[(i, j)] * y[i];
                }
                out[(t, j)] += scale * acc;
            }
        }
    }

    /// Largest eigenvalue of `Σ_t A_t A_tᵀ`.
    fn coupling_norm_sq(&self) -> f64 {
        let mut gram = DMatrix::zeros(self.m, self.m);
        for step in self.episode.steps() {
            gram += &step.fairness_matrix * step.fairness_matrix.transpose();
        }
        gram.symmetric_eigenvalues().max()
    }

    fn smooth_gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = -&self.linear;
        for t in 0..self.horizon {
            let last = t + 1 == self.horizon;
            let diag = self.curvature[t] + self.beta1 * if last { 1.0 } else { 2.0 };
            for i in 0..self.n {
                let mut v = diag * x[(t, i)];
                if t > 0 {
                    v -= self.beta1 * x[(t - 1, i)];
                }
                if !last {
                    v -= self.beta1 * x[(t + 1, i)];
                }
                g[(t, i)] += v;
            }
        }
        g
    }

    fn run(&self, method: OfflineMethod, start: DMatrix<f64>, rho_scale: f64, opts: &SolveOptions) -> Result<RunOutcome> {
        match method {
            OfflineMethod::Admm => self.admm(start, rho_scale, opts),
            OfflineMethod::Subgradient => self.subgradient(start, opts),
        }
    }

    fn admm(&self, start: DMatrix<f64>, rho_scale: f64, opts: &SolveOptions) -> Result<RunOutcome> {
        let (t_len, n, m) = (self.horizon, self.n, self.m);
        let coupled = self.weight > 0.0;

        let finite_curv: Vec<f64> = self.curvature.iter().copied().filter(|&c| c > 0.0).collect();
        let gram = if coupled { self.coupling_norm_sq().max(f64::MIN_POSITIVE) } else { 1.0 };
        let (rho1, rho2) = if finite_curv.len() == t_len {
            let lo = finite_curv.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = finite_curv.iter().copied().fold(0.0, f64::max);
            let rho1 = (lo * (hi + 4.0 * self.beta1)).sqrt() * rho_scale;
            (rho1, if coupled { rho1 / gram } else { 0.0 })
        } else if coupled {
            let level = self.couple(&start).norm().max(self.weight * f64::EPSILON);
            let rho2 = rho_scale * self.weight / level;
            (rho2 * gram, rho2)
        } else {
            (rho_scale, 0.0)
        };
        let mut factor = Factor::new(self, rho1, rho2, coupled)?;

        let mut y = start;
        let mut u = DMatrix::zeros(t_len, n);
        let mut s = self.couple(&y);
        let mut v = DVector::zeros(m);
        let abs_tol = opts.offline_tol * ((t_len * n + m) as f64).sqrt();
        let rel_tol = opts.offline_tol;
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;

        for k in 1..=opts.offline_max_iters {
            iterations = k;
            let (rho1, rho2) = (factor.rho1, factor.rho2);
            let mut rhs = &self.linear + (&y - &u) * rho1;
            if coupled {
                self.add_couple_adjoint(&(&s - &v), rho2, &mut rhs);
            }
            let x = factor.solve(self, rhs);
            let y_old = std::mem::replace(&mut y, self.project_rows(&(&x + &u))?);
            u += &x - &y;
            let r1 = (&x - &y).norm();
            let d1 = (&y - &y_old).norm() * rho1;
            let eps_pri1 = abs_tol + rel_tol * x.norm().max(y.norm());
            let eps_dual1 = abs_tol + rel_tol * rho1 * u.norm();
            let (mut r2, mut d2, mut eps_pri2, mut eps_dual2) = (0.0, 0.0, 1.0, 1.0);
            if coupled {
                let kx = self.couple(&x);
                let s_old = std::mem::replace(&mut s, prox_norm(&(&kx + &v), self.weight / rho2, self.p));
                v += &kx - &s;
                r2 = (&kx - &s).norm();
                d2 = self.couple_adjoint(&(&s - &s_old)).norm() * rho2;
                eps_pri2 = abs_tol + rel_tol * kx.norm().max(s.norm());
                eps_dual2 = abs_tol + rel_tol * rho2 * self.couple_adjoint(&v).norm();
            }
            residual = r1.hypot(r2);
            if !residual.is_finite() || !d1.is_finite() || !d2.is_finite() {
                return Err(Error::non_finite("offline splitting iterate"));
            }
            if r1 <= eps_pri1 && d1 <= eps_dual1 && r2 <= eps_pri2 && d2 <= eps_dual2 {
                converged = true;
                break;
            }
            if k % 25 == 0 {
                let tau = |r: f64, eps_r: f64, d: f64, eps_d: f64| {
                    let ratio = (r / eps_r) / (d / eps_d).max(f64::MIN_POSITIVE);
                    if ratio > 10.0 {
                        2.0
                    } else if ratio < 0.1 {
                        0.5
                    } else {
                        1.0
                    }
                };
                let tau1 = tau(r1, eps_pri1, d1, eps_dual1);
                let tau2 = if coupled { tau(r2, eps_pri2, d2, eps_dual2) } else { 1.0 };
                if tau1 != 1.0 || tau2 != 1.0 {
                    u /= tau1;
                    v /= tau2;
                    factor = Factor::new(self, rho1 * tau1, rho2 * tau2, coupled)?;
                }
            }
        }

        let scale = 1.0 + y.norm();
        if residual > 1e-3 * scale {
            return Err(Error::Convergence { iterations, residual });
        }
        let warning = (!converged).then(|| {
            format!("offline splitting stopped at the iteration cap {iterations} with primal residual {residual:.3e}")
        });
        Ok(RunOutcome {
            trajectory: self.rows(&y),
            iterations,
            residual,
            warning,
        })
    }

    fn objective(&self, x: &DMatrix<f64>) -> Result<f64> {
        Ok(total_cost(self.episode, &self.rows(x))?.total * self.horizon as f64)
    }

    fn subgradient(&self, start: DMatrix<f64>, opts: &SolveOptions) -> Result<RunOutcome> {
        let with_smooth = self.beta1 > 0.0 || self.curvature.iter().any(|&c| c > 0.0);
        let fairness_only = |x: &DMatrix<f64>| -> f64 { self.weight * crate::model::p_norm(&self.couple(x), self.p) };
        let value = |x: &DMatrix<f64>| -> Result<f64> {
            if with_smooth {
                self.objective(x)
            } else {
                Ok(fairness_only(x))
            }
        };
        let radius = self
            .episode
            .action_sets()
            .iter()
            .map(|s| s.diameter_bound().powi(2))
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let spec = self.episode.fairness();
        let mut x = start;
        let mut best = x.clone();
        let mut best_value = value(&x)?;
        let mut last_norm = 0.0;
        for k in 1..=opts.offline_max_iters {
            let mut g = if with_smooth { self.smooth_gradient(&x) } else { DMatrix::zeros(self.horizon, self.n) };
            if self.weight > 0.0 {
                g += self.couple_adjoint(&spec.subgradient(&self.couple(&x)));
            }
            last_norm = g.norm();
            if last_norm == 0.0 {
                break;
            }
            x = self.project_rows(&(&x - g * (radius / (last_norm * (k as f64).sqrt()))))?;
            let val = value(&x)?;
            if val < best_value {
                best_value = val;
                best = x.clone();
            }
        }
        Ok(RunOutcome {
            trajectory: self.rows(&best),
            iterations: opts.offline_max_iters,
            residual: last_norm,
            warning: None,
        })
    }
}

/// Cached solver for `(H + ρ₁I + ρ₂KᵀK) X = R`.
///
/// `H + ρ₁I` acts identically on every action coordinate as a tridiagonal
/// `T × T` matrix, so it is factored once; the rank-`M` coupling term is
/// handled by the Woodbury identity.
struct Factor {
    rho1: f64,
    rho2: f64,
    off: f64,
    sub_pivot: Vec<f64>,
    denom: Vec<f64>,
    /// `(H + ρ₁I)⁻¹Kᵀe_j` for each fairness coordinate.
    columns: Vec<DMatrix<f64>>,
    capacitance: Option<nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl Factor {
    fn new(problem: &Stacked<'_>, rho1: f64, rho2: f64, coupled: bool) -> Result<Self> {
        let t_len = problem.horizon;
        let off = -problem.beta1;
        let mut sub_pivot = vec![0.0; t_len];
        let mut denom = vec![0.0; t_len];
        for t in 0..t_len {
            let last = t + 1 == t_len;
            let diag = problem.curvature[t] + problem.beta1 * if last { 1.0 } else { 2.0 } + rho1;
            denom[t] = if t == 0 { diag } else { diag - off * sub_pivot[t - 1] };
            sub_pivot[t] = off / denom[t];
        }
        let mut factor = Factor {
            rho1,
            rho2,
            off,
            sub_pivot,
            denom,
            columns: Vec::new(),
            capacitance: None,
        };
        if coupled {
            let m = problem.m;
            let mut columns = Vec::with_capacity(m);
            let mut cap = DMatrix::identity(m, m) / rho2;
            for j in 0..m {
                let mut e = DVector::zeros(m);
                e[j] = 1.0;
                let mut col = problem.couple_adjoint(&e);
                factor.tridiagonal_solve(&mut col);
                let kc = problem.couple(&col);
                for i in 0..m {
                    cap[(i, j)] += kc[i];
                }
                columns.push(col);
            }
            factor.columns = columns;
            factor.capacitance = Some(cap.lu());
        }
        Ok(factor)
    }

    fn tridiagonal_solve(&self, rhs: &mut DMatrix<f64>) {
        let t_len = self.denom.len();
        for mut col in rhs.column_iter_mut() {
            col[0] /= self.denom[0];
            for t in 1..t_len {
                col[t] = (col[t] - self.off * col[t - 1]) / self.denom[t];
            }
            for t in (0..t_len - 1).rev() {
                col[t] -= self.sub_pivot[t] * col[t + 1];
            }
        }
    }

    fn solve(&self, problem: &Stacked<'_>, mut rhs: DMatrix<f64>) -> DMatrix<f64> {
        self.tridiagonal_solve(&mut rhs);
        if let Some(cap) = &self.capacitance {
            let k = problem.couple(&rhs);
            if let Some(alpha) = cap.solve(&k) {
                for (j, col) in self.columns.iter().enumerate() {
                    for (r, c) in rhs.iter_mut().zip(col.iter()) {
                        *r -= alpha[j] * c;
                    }
                }
            }
        }
        rhs
    }
}

/// `prox_{λ‖·‖_p}(v)` for `p ∈ {1, 2, ∞}` via the Moreau decomposition.
fn prox_norm(v: &DVector<f64>, lambda: f64, p: f64) -> DVector<f64> {
    if lambda == 0.0 {
        return v.clone();
    }
    if p == 1.0 {
        v.map(|a| a.signum() * (a.abs() - lambda).max(0.0))
    } else if p == 2.0 {
        let norm = v.norm();
        if norm <= lambda {
            DVector::zeros(v.len())
        } else {
            v * (1.0 - lambda / norm)
        }
    } else {
        v - project_l1_ball(v, lambda)
    }
}

fn project_l1_ball(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    if v.iter().map(|a| a.abs()).sum::<f64>() <= radius {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|a| a.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - radius) / (j as f64 + 1.0);
        if u > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    v.map(|a| a.signum() * (a.abs() - theta).max(0.0))
}
