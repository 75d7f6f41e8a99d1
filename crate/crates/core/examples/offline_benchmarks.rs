//! Offline OPT and FairOPT on a seeded instance, with both solver methods.

use fairobd::solvers::{solve_fair_opt, solve_offline_opt, OfflineMethod};
use fairobd::synthetic::{random_instance, InstanceSpec};
use fairobd::SolveOptions;

fn main() -> fairobd::Result<()> {
    let spec = InstanceSpec {
        horizon: 24,
        action_dim: 4,
        fairness_dim: 4,
        ..InstanceSpec::default()
    };
    let episode = random_instance(&spec, 3)?;

    let admm = SolveOptions::default();
    let opt = solve_offline_opt(&episode, &admm)?;
    println!(
        "OPT (splitting)    total {:.6} after {} iterations, residual {:.1e}, restart total {:?}",
        opt.cost.total, opt.iterations, opt.residual, opt.restart_total
    );

    let subgradient = SolveOptions {
        offline: OfflineMethod::Subgradient,
        offline_restart: false,
        ..SolveOptions::default()
    };
    let slow = solve_offline_opt(&episode, &subgradient)?;
    println!("OPT (subgradient)  total {:.6}", slow.cost.total);

    let fair = solve_fair_opt(&episode, &admm)?;
    println!(
        "FairOPT            fairness {:.6} (OPT has {:.6}), total {:.6}",
        fair.cost.fairness, opt.cost.fairness, fair.cost.total
    );
    if let Some(w) = opt.warning.or(fair.warning) {
        println!("warning: {w}");
    }
    Ok(())
}
