//! Warm-starting the active-set iteration: when the density changes a
//! little, the previous contact set is a much better initial guess than the
//! empty mask, and the iteration both shrinks and lands on the same fixed
//! point. Capture tests run before release tests, so a slightly stale mask
//! cannot poison the virtual-load test and oscillate.

use obslab::fixtures::radial_profile;
use obslab::solver::{solve_no_sign, SolveParams};
use obslab::{Grid, ScalarField};

fn main() -> obslab::Result<()> {
    let g = Grid::centered(129, 1.0)?;
    let bd = ScalarField::from_fn(g, "g", |x, y| radial_profile(0.5, x.hypot(y)))?;

    let f0 = ScalarField::constant(g, "f", 1.0)?;
    let base = solve_no_sign(&f0, &bd, &SolveParams::default())?;
    println!("base solve (f = 1.00): {} outer iterations", base.outer_iters);

    let f1 = ScalarField::constant(g, "f", 1.08)?;
    let cold = solve_no_sign(&f1, &bd, &SolveParams::default())?;
    let warm = solve_no_sign(
        &f1,
        &bd,
        &SolveParams { initial_mask: Some(base.zero_set.clone()), ..SolveParams::default() },
    )?;
    println!("perturbed solve (f = 1.08):");
    println!("  cold start: {} outer iterations", cold.outer_iters);
    println!("  warm start: {} outer iterations", warm.outer_iters);

    let mut gap: f64 = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            gap = gap.max((cold.u.at(i, j) - warm.u.at(i, j)).abs());
        }
    }
    println!("  max gap between the two solutions: {gap:.2e}");
    println!(
        "  contact nodes: cold {}, warm {}",
        cold.zero_set.count(),
        warm.zero_set.count()
    );
    Ok(())
}
