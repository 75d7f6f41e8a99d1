//! Runs every online policy on one seeded instance and prints the per-policy
//! cost breakdown together with FairOBD's dual trace.

use fairobd::synthetic::{random_instance, InstanceSpec};
use fairobd::{run_episode, HyperParams, PolicyKind, SolveOptions};

fn main() -> fairobd::Result<()> {
    let spec = InstanceSpec {
        horizon: 48,
        ..InstanceSpec::default()
    };
    let episode = random_instance(&spec, 7)?;
    let m = episode.min_curvature();
    let beta1 = episode.switching_weight();
    println!("N = {}, T = {}, m = {m:.2}, β₁ = {beta1:.1}", episode.action_dim(), episode.horizon());

    let opts = SolveOptions::default();
    for kind in PolicyKind::ALL {
        let hyper = match kind {
            PolicyKind::FairObd | PolicyKind::Robd => HyperParams::theorem(m, beta1)?,
            _ => HyperParams::theorem(m, beta1)?.with_eta(0.05),
        };
        let run = run_episode(kind, &episode, &hyper, &opts)?;
        let c = run.cost;
        println!(
            "{:<8} hitting {:>9.4} switching {:>9.4} fairness {:>8.4} total {:>9.4}",
            kind.name(),
            c.hitting,
            c.switching,
            c.fairness,
            c.total
        );
        if kind == PolicyKind::FairObd {
            let norms: Vec<String> = run
                .diagnostics
                .iter()
                .step_by(8)
                .map(|r| format!("{:.3}", r.kappa.norm()))
                .collect();
            println!("         ‖κ_t‖ every 8 rounds: {}", norms.join(" "));
        }
    }
    Ok(())
}
