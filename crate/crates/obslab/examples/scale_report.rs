//! The full dyadic pipeline on a solved problem: solve the dead-disk case,
//! pick an interface point, and walk the halving radii collecting the
//! projection magnitude, contact density, thickness, energies, and the
//! scale-gap constants. Radii that fall under the four-cell resolution
//! floor are flagged, never extrapolated.

use obslab::fixtures::radial_profile;
use obslab::pipeline::{
    regularity_report, rows_to_csv, s_boundedness_check, thickness_classify, PipelineConfig,
};
use obslab::solver::{solve_no_sign, SolveParams};
use obslab::{Grid, Point, ScalarField};

fn main() -> obslab::Result<()> {
    let g = Grid::centered(129, 1.0)?;
    let f = ScalarField::constant(g, "f", 1.0)?;
    let bd = ScalarField::from_fn(g, "g", |x, y| radial_profile(0.5, x.hypot(y)))?;
    let result = solve_no_sign(&f, &bd, &SolveParams::default())?;

    // For f = 1 the analytic potential |x|^2/4 spares the kernel summation.
    let v = ScalarField::from_fn(g, "v", |x, y| (x * x + y * y) / 4.0)?;

    let near = Point::new(0.5, 0.0);
    let center = *result
        .free_boundary
        .iter()
        .min_by(|a, b| a.dist(near).total_cmp(&b.dist(near)))
        .expect("dead disk has an interface");
    println!("center: ({:.6}, {:.6})\n", center.x, center.y);

    let cfg = PipelineConfig::default();
    let rows = regularity_report(&result, &v, &f, center, 0.3, 4, &cfg)?;
    print!("{}", rows_to_csv(&rows));

    let bound = s_boundedness_check(&rows, &cfg)?;
    let exp = bound
        .dyadic_exponent
        .map(|e| format!("{e:.3}"))
        .unwrap_or_else(|| "n/a (needs 4 resolved scales)".to_string());
    println!(
        "\nprojection magnitude: max {:.4}, median {:.4}, dyadic exponent {exp} -> {}",
        bound.max_s,
        bound.median_s,
        if bound.bounded { "bounded" } else { "UNBOUNDED" }
    );

    let verdict = thickness_classify(&result, center, 0.2, &cfg)?;
    println!("thickness verdict: {} (delta = {:.3})", verdict.verdict.as_str(), verdict.delta);
    Ok(())
}
