//! Fixtures shared by the benchmarks.

use contnest_core::oracle::{build_mstar, matfac_objective, quadratic_objective, MatFacProblem};
use contnest_core::rng::Seed;
use contnest_core::{ObjectiveHandle, Point};

/// Matrix factorization instance with its objective and a random start.
pub struct MatfacFixture {
    pub problem: MatFacProblem,
    pub handle: ObjectiveHandle,
    pub x0: Point,
}

pub fn matfac(d: usize, r: usize) -> MatfacFixture {
    let problem = build_mstar(Seed(1), d, r).expect("valid size");
    let handle = matfac_objective(&problem);
    let std = (problem.gamma_cap / (2.0 * (d * r) as f64)).sqrt();
    let x0 = problem.random_factor(Seed(2), std);
    MatfacFixture { problem, handle, x0 }
}

/// Unit quadratic in `d` dimensions started from the all-ones point.
pub fn unit_quadratic(d: usize) -> (ObjectiveHandle, Point) {
    let h = quadratic_objective(&vec![1.0; d]).expect("positive eigenvalues");
    (h, Point::from_elem(d, 1.0))
}
