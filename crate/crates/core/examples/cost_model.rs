//! Builds a two-round instance by hand and evaluates the three cost
//! components of a trajectory.

use fairobd::model::decomposed_cost;
use fairobd::{fairness_deviation, total_cost, ContextStep, Episode, FairnessSpec, FeasibleSet, QuadraticHitting};
use nalgebra::{DMatrix, DVector};

fn main() -> fairobd::Result<()> {
    let n = 2;
    let steps = vec![
        ContextStep::new(
            QuadraticHitting::new(DVector::from_vec(vec![0.2, 0.8]), 2.0, DVector::from_vec(vec![0.1, 0.0]), 0.0)?,
            DMatrix::identity(n, n),
        ),
        ContextStep::new(
            QuadraticHitting::centered(DVector::from_vec(vec![0.9, 0.1]), 2.0),
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5])),
        ),
    ];
    let sets = vec![FeasibleSet::unit_box(n), FeasibleSet::capped_simplex(1.0, DVector::from_element(n, 1.0))];
    let episode = Episode::new(steps, DVector::zeros(n), 4.0, FairnessSpec::max_norm(1.5), sets)?;

    println!("aux box diagonal Z = {:.4}", episode.diameter());
    println!("Lipschitz constant L = {:.4}", episode.lipschitz());

    let trajectory = vec![DVector::from_vec(vec![0.2, 0.8]), DVector::from_vec(vec![0.7, 0.3])];
    let cost = total_cost(&episode, &trajectory)?;
    println!(
        "hitting {:.4}  switching {:.4}  fairness {:.4}  total {:.4}",
        cost.hitting, cost.switching, cost.fairness, cost.total
    );
    let average = episode.average_fairness_vector(&trajectory)?;
    println!("(1/T) Σ A_t x_t = {:?}", average.as_slice());

    // Per-round budgets that sum to Σ A_t x_t leave the decomposed cost at
    // or above the true cost by convexity of the norm.
    let budgets = episode.fairness_vectors(&trajectory)?;
    println!("decomposed cost with z_t = A_t x_t: {:.4}", decomposed_cost(&episode, &trajectory, &budgets)?);
    println!("frame deviation at R = 1: {:.4}", fairness_deviation(&episode, &trajectory, 1)?);
    Ok(())
}
