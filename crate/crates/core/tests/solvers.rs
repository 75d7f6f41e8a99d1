mod common;

use common::{brute_force_budget, brute_force_over, episode_cost, hitting, mat_vec, norm, sq_dist, to_vecs, uniform};
use fairobd::solvers::{
    hitting_minimizer, solve_fair_opt, solve_offline_opt, solve_per_round, OfflineMethod, PerRoundProblem,
};
use fairobd::synthetic::{random_instance, InstanceSpec};
use fairobd::{run_episode, HyperParams, PolicyKind, SolveOptions};
use nalgebra::DVector;

fn instance(seed: u64, n: usize, p: f64) -> fairobd::Episode {
    let spec = InstanceSpec {
        action_dim: n,
        fairness_dim: 2,
        horizon: 1,
        p,
        sets: fairobd::synthetic::SetFamily::UnitBox,
        linear_scale: 2.0,
        ..InstanceSpec::default()
    };
    random_instance(&spec, seed).unwrap()
}

#[test]
fn per_round_solution_is_within_grid_tolerance() {
    let opts = SolveOptions::default();
    for seed in 0..30u64 {
        let n = 1 + (seed % 3) as usize;
        let p = [1.0, 2.0, f64::INFINITY, 3.0][(seed % 4) as usize];
        let ep = instance(seed, n, p);
        let mut rng = common::rng(seed);
        let kappa = DVector::from_fn(2, |_, _| uniform(&mut rng, -3.0, 3.0));
        let x_prev = DVector::from_fn(n, |_, _| uniform(&mut rng, 0.0, 1.0));
        let (lambda1, lambda2) = (uniform(&mut rng, 0.1, 1.0), uniform(&mut rng, 0.0, 5.0));
        let beta1 = ep.switching_weight() / 1000.0;
        let problem = PerRoundProblem {
            step: ep.step(0),
            action_set: ep.action_set(0),
            aux_box: ep.aux_box(),
            fairness: ep.fairness(),
            x_prev: &x_prev,
            kappa: &kappa,
            lambda1,
            lambda2,
            beta1,
        };
        let sol = solve_per_round(&problem, &opts).unwrap();

        let set = ep.action_set(0);
        let (_, v) = brute_force_over(set, |x| hitting(&ep, 0, x));
        let a = &ep.step(0).fairness_matrix;
        let k: Vec<f64> = kappa.iter().copied().collect();
        let xp: Vec<f64> = x_prev.iter().copied().collect();
        let objective = |x: &[f64]| {
            hitting(&ep, 0, x)
                + 0.5 * lambda1 * beta1 * sq_dist(x, &xp)
                + 0.5 * lambda2 * sq_dist(x, &v)
                + mat_vec(a, x).iter().zip(&k).map(|(u, w)| u * w).sum::<f64>()
        };
        let (grid_best, _) = brute_force_over(set, objective);
        let x: Vec<f64> = sol.x.iter().copied().collect();
        assert!(objective(&x) <= grid_best + 1e-4, "seed {seed}: x objective {} vs grid {grid_best}", objective(&x));

        let aux = ep.aux_box();
        let lo: Vec<f64> = aux.lower.iter().copied().collect();
        let hi: Vec<f64> = aux.upper.iter().copied().collect();
        let w = ep.fairness().weight;
        let z: Vec<f64> = sol.z.iter().copied().collect();
        let z_value = w * norm(&z, p) - z.iter().zip(&k).map(|(u, w)| u * w).sum::<f64>();
        let z_grid = brute_force_budget(w, p, &k, &lo, &hi);
        assert!(z_value <= z_grid + 1e-4, "seed {seed}: z objective {z_value} vs grid {z_grid}");
    }
}

#[test]
fn hitting_minimizer_matches_grid() {
    let opts = SolveOptions::default();
    for seed in 0..20u64 {
        let ep = instance(100 + seed, 2, 2.0);
        let x = hitting_minimizer(ep.step(0), ep.action_set(0), &opts).unwrap();
        let (best, _) = brute_force_over(ep.action_set(0), |y| hitting(&ep, 0, y));
        let got = hitting(&ep, 0, x.as_slice());
        assert!(got <= best + 1e-9 && got >= best - 1e-6, "seed {seed}: {got} vs {best}");
    }
}

#[test]
fn offline_benchmarks_dominate_online_trajectories() {
    let spec = InstanceSpec {
        action_dim: 3,
        fairness_dim: 3,
        horizon: 16,
        ..InstanceSpec::default()
    };
    let opts = SolveOptions::default();
    for seed in 0..6u64 {
        let ep = random_instance(&spec, seed).unwrap();
        let opt = solve_offline_opt(&ep, &opts).unwrap();
        let fair = solve_fair_opt(&ep, &opts).unwrap();
        let opt_cost = episode_cost(&ep, &to_vecs(&opt.trajectory));
        assert!((opt_cost - opt.cost.total).abs() <= 1e-9 * (1.0 + opt_cost));
        assert!(fair.cost.fairness <= opt.cost.fairness + 1e-6);
        let hyper = HyperParams::theorem(ep.min_curvature(), ep.switching_weight()).unwrap();
        for kind in PolicyKind::ALL {
            let run = run_episode(kind, &ep, &hyper, &opts).unwrap();
            assert!(opt.cost.total <= run.cost.total + 1e-6, "seed {seed}: OPT above {kind}");
            assert!(fair.cost.fairness <= run.cost.fairness + 1e-6, "seed {seed}: FairOPT above {kind}");
        }
    }
}

#[test]
fn splitting_and_subgradient_agree() {
    let spec = InstanceSpec {
        action_dim: 2,
        fairness_dim: 2,
        horizon: 8,
        switching: (0.0, 20.0),
        ..InstanceSpec::default()
    };
    let admm = SolveOptions::default();
    let sub = SolveOptions {
        offline: OfflineMethod::Subgradient,
        offline_restart: false,
        ..SolveOptions::default()
    };
    for seed in 0..5u64 {
        let ep = random_instance(&spec, seed).unwrap();
        let a = solve_offline_opt(&ep, &admm).unwrap().cost.total;
        let b = solve_offline_opt(&ep, &sub).unwrap().cost.total;
        assert!(a <= b + 1e-7 * (1.0 + b), "seed {seed}: splitting {a} above subgradient {b}");
        assert!(b - a <= 1e-2 * (1.0 + a), "seed {seed}: subgradient {b} far from splitting {a}");
    }
}
