//! Euclidean projections onto boxes and capped simplices.

use fairobd::geometry::{is_feasible, project};
use fairobd::FeasibleSet;
use nalgebra::DVector;

fn main() -> fairobd::Result<()> {
    let point = DVector::from_vec(vec![1.4, -0.3, 0.6]);

    let cube = FeasibleSet::unit_box(3);
    let p = project(&cube, &point)?;
    println!("unit box:        {:?}", p.as_slice());

    let caps = DVector::from_vec(vec![0.5, 1.0, 1.0]);
    let simplex = FeasibleSet::capped_simplex(1.2, caps);
    let q = project(&simplex, &point)?;
    println!("capped simplex:  {:?}  sum {:.12}", q.as_slice(), q.sum());
    println!("feasible: {}", is_feasible(&simplex, &q, 1e-9));
    println!("distance moved by a second projection: {:.1e}", (project(&simplex, &q)? - &q).norm());

    let direction = DVector::from_vec(vec![0.3, -1.0, 0.2]);
    let vertex = simplex.linear_minimizer(&direction)?;
    let (lo, hi) = simplex.linear_range(&direction)?;
    println!("argmin d·x = {:?}, range of d·x = [{lo:.3}, {hi:.3}]", vertex.as_slice());

    match FeasibleSet::capped_simplex(3.0, DVector::from_element(2, 1.0)).validate() {
        Ok(()) => println!("unexpected: oversized total accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
