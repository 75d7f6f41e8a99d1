//! Plays both adaptive lower-bound games against every online policy.

use fairobd::adversary::{cr_game, regret_game, GameConfig};
use fairobd::PolicyKind;

fn main() -> fairobd::Result<()> {
    let horizon = 2000;
    for kind in PolicyKind::ALL {
        let config = GameConfig::new(kind, horizon, 2.0)?;
        let regret = regret_game(&config)?;
        let cr = cr_game(&config)?;
        let ratio = if cr.is_infinite() {
            format!("unbounded (deviation at round {:?})", cr.deviation_round)
        } else {
            format!("{:.2}", cr.certified)
        };
        println!(
            "{:<8} regret {:.5} (floor {:.5}, option {})  ratio {ratio}",
            kind.name(),
            regret.certified,
            regret.theoretical_bound,
            regret.chosen_option
        );
    }
    Ok(())
}
