//! Dual mirror-descent steps under both reference functions.

use fairobd::mirror::dual_update;
use fairobd::{DualState, ReferenceFunction};
use nalgebra::DVector;

fn main() -> fairobd::Result<()> {
    let d = DVector::from_vec(vec![0.5, -2.0, 1.0]);
    let eta = 0.1;

    let l2 = ReferenceFunction::squared_l2();
    let mut clamped = DualState::new(DVector::from_vec(vec![0.02, 1.0, 0.3]), true);
    let mut free = DualState::new(clamped.kappa.clone(), false);
    for _ in 0..3 {
        clamped = dual_update(&l2, &clamped, &d, eta)?;
        free = dual_update(&l2, &free, &d, eta)?;
    }
    println!("squared l2, clamped:   {:?}", clamped.kappa.as_slice());
    println!("squared l2, unclamped: {:?}", free.kappa.as_slice());

    let entropy = ReferenceFunction::negative_entropy(1e-6, 1e6)?;
    let start = DualState::new(DVector::from_element(3, 1.0), false);
    let next = dual_update(&entropy, &start, &d, eta)?;
    println!("entropy step:          {:?}", next.kappa.as_slice());
    println!(
        "Bregman divergences from the start: l2 {:.5}, entropy {:.5}",
        l2.bregman(&free.kappa, &start.kappa)?,
        entropy.bregman(&next.kappa, &start.kappa)?
    );
    Ok(())
}
