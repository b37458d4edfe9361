//! Harmonic projection magnitudes across dyadic radii. The trace-free part
//! of the ball-averaged Hessian has closed-form Frobenius magnitudes on the
//! model profiles: 2*sqrt(2) for the saddle x^2 - y^2, sqrt(2)/2 for the
//! full quadratic x^2/2, and sqrt(2)/4 for the half-space profile at a wall
//! point, independent of radius.

use obslab::fixtures::{make_fixture, FixtureKind, FixtureSpec};
use obslab::projection::project_hessian;
use obslab::{hessian_field, Grid, Point, ScalarField};

fn main() -> obslab::Result<()> {
    let g = Grid::centered(257, 1.0)?;
    let radii = [0.4, 0.2, 0.1, 0.05];

    let saddle = ScalarField::from_fn(g, "saddle", |x, y| x * x - y * y)?;
    let half = make_fixture(&FixtureSpec::plain(FixtureKind::HalfSpace), g)?;
    let poly = make_fixture(&FixtureSpec::plain(FixtureKind::Polynomial), g)?;

    let rows: [(&str, &ScalarField, f64); 3] = [
        ("saddle x^2 - y^2", &saddle, 2.0 * 2.0f64.sqrt()),
        ("half-space (x+)^2/2", &half.result.u, 2.0f64.sqrt() / 4.0),
        ("polynomial x^2/2", &poly.result.u, 2.0f64.sqrt() / 2.0),
    ];

    print!("{:<22} {:>10}", "profile", "exact");
    for r in radii {
        print!("  {:>10}", format!("S(r={r})"));
    }
    println!();
    for (name, u, exact) in rows {
        let hess = hessian_field(u);
        print!("{name:<22} {exact:>10.6}");
        for r in radii {
            let p = project_hessian(&hess, Point::new(0.0, 0.0), r)?;
            print!("  {:>10.6}", p.s);
        }
        println!();
    }

    // The shape matrix is scale-free too: the saddle stays the saddle.
    let p = project_hessian(&hessian_field(&saddle), Point::new(0.0, 0.0), 0.2)?;
    println!(
        "\nsaddle shape P at r = 0.2: [[{:+.4}, {:+.4}], [{:+.4}, {:+.4}]]",
        p.p.xx, p.p.xy, p.p.xy, p.p.yy
    );
    Ok(())
}
