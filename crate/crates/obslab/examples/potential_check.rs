//! Newtonian potential by direct kernel summation: second-order interior
//! residual on a smooth compactly supported density. The summation is
//! quadratic in the node count, so this path is for modest grids; supply an
//! analytic potential to the diagnostics whenever one is available.

use obslab::potential::{hessian_sup_norm, newtonian_potential};
use obslab::{Grid, ScalarField};

fn main() -> obslab::Result<()> {
    println!("{:>5}  {:>12}  {:>5}  {:>10}  {:>7}", "n", "residual", "rate", "sup |D2 v|", "secs");
    let mut prev: Option<f64> = None;
    for n in [33usize, 65, 129] {
        let g = Grid::centered(n, 1.0)?;
        // Smooth bump supported in the disk of radius 0.5.
        let f = ScalarField::from_fn(g, "f", |x, y| {
            let q = 1.0 - (x * x + y * y) / 0.25;
            if q > 0.0 { q * q } else { 0.0 }
        })?;
        let clock = std::time::Instant::now();
        let p = newtonian_potential(&f)?;
        let secs = clock.elapsed().as_secs_f64();
        let rate = match prev {
            Some(prev) => format!("{:5.2}", (prev / p.residual_norm).log2()),
            None => "    -".to_string(),
        };
        println!(
            "{n:>5}  {:>12.3e}  {rate}  {:>10.6}  {secs:>7.2}",
            p.residual_norm,
            hessian_sup_norm(&p.v)
        );
        prev = Some(p.residual_norm);
    }
    Ok(())
}
