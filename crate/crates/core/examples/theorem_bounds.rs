//! Evaluates the competitive constants and the additive slack for one
//! instance and compares them with a measured FairOBD run.

use fairobd::policies::{competitive_constant, optimal_lambdas, theorem_bound, theoretical_cr, BoundParams};
use fairobd::solvers::solve_offline_opt;
use fairobd::synthetic::{random_instance, InstanceSpec};
use fairobd::{fairness_deviation, run_episode, HyperParams, PolicyKind, SolveOptions};

fn main() -> fairobd::Result<()> {
    for (m, beta1) in [(1.0, 2.0), (20.0, 1000.0)] {
        let (l1, l2) = optimal_lambdas(m, beta1)?;
        println!(
            "m = {m}, β₁ = {beta1}: λ = ({l1}, {l2:.3}), C = {:.4}, balanced CR = {:.4}",
            competitive_constant(m, beta1, l1, l2)?,
            theoretical_cr(m, beta1)?
        );
    }

    let spec = InstanceSpec {
        horizon: 96,
        action_dim: 3,
        fairness_dim: 3,
        ..InstanceSpec::default()
    };
    let episode = random_instance(&spec, 5)?;
    let (m, beta1) = (episode.min_curvature(), episode.switching_weight());
    let hyper = HyperParams::theorem(m, beta1)?;
    let opts = SolveOptions::default();
    let online = run_episode(PolicyKind::FairObd, &episode, &hyper, &opts)?;
    let opt = solve_offline_opt(&episode, &opts)?;

    let frame = 24;
    let t = episode.horizon() as f64;
    let bound = theorem_bound(&BoundParams {
        eta: hyper.eta.value(episode.horizon()),
        l: hyper.reference.l,
        beta2: hyper.reference.beta2,
        diameter: episode.diameter(),
        lipschitz: episode.lipschitz(),
        frame: frame as f64,
        kappa1_norm: 0.0,
        delta: fairness_deviation(&episode, &opt.trajectory, frame)?,
        lambda1: hyper.lambda1,
        horizon: t,
    });
    let c = competitive_constant(m, beta1, hyper.lambda1, hyper.lambda2)?;
    println!("FairOBD {:.4} ≤ C·OPT + bound = {c:.3}·{:.4} + {bound:.4}", online.cost.total, opt.cost.total);
    Ok(())
}
