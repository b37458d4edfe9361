//! The scaled frequency energy separates the two homogeneous blow-up
//! families by a clean factor of two: the full quadratic plateaus at twice
//! the half-space value under either boundary sign convention. On the
//! radial solution the minus convention is monotone in the radius, which is
//! what makes it usable as a scale-selection functional.

use obslab::diagnostics::{weiss, weiss_limit, BoundarySign};
use obslab::fixtures::{make_fixture, FixtureKind, FixtureSpec};
use obslab::{Grid, Point};

fn main() -> obslab::Result<()> {
    let g = Grid::centered(513, 1.0)?;
    let half = make_fixture(&FixtureSpec::plain(FixtureKind::HalfSpace), g)?;
    let poly = make_fixture(&FixtureSpec::plain(FixtureKind::Polynomial), g)?;
    let origin = Point::new(0.0, 0.0);

    let pi = std::f64::consts::PI;
    println!("plateau references: poly 5pi/8 = {:.6}, -pi/8 = {:.6};", 5.0 * pi / 8.0, -pi / 8.0);
    println!("                    half 5pi/16 = {:.6}, -pi/16 = {:.6}\n", 5.0 * pi / 16.0, -pi / 16.0);

    for sign in [BoundarySign::Plus, BoundarySign::Minus] {
        println!("{:?} convention:", sign);
        println!("{:>6}  {:>12}  {:>12}  {:>8}", "r", "W(poly)", "W(half)", "ratio");
        for r in [0.4, 0.2, 0.1] {
            let wp = weiss(&poly.result.u, &poly.f, origin, r, sign)?.value;
            let wh = weiss(&half.result.u, &half.f, origin, r, sign)?.value;
            println!("{r:>6.2}  {wp:>12.6}  {wh:>12.6}  {:>8.4}", wp / wh);
        }
        let radii = [0.4, 0.3, 0.2, 0.15, 0.1];
        let lp = weiss_limit(&poly.result.u, &poly.f, origin, &radii, sign)?;
        let lh = weiss_limit(&half.result.u, &half.f, origin, &radii, sign)?;
        println!(
            "  extrapolated limits: poly {:.6}, half {:.6}, ratio {:.4}\n",
            lp.value,
            lh.value,
            lp.value / lh.value
        );
    }

    // Monotonicity on the curved interface of the dead-disk solution.
    let gr = Grid::centered(257, 1.0)?;
    let radial = make_fixture(&FixtureSpec::plain(FixtureKind::Radial { a: 0.5 }), gr)?;
    let center = Point::new(0.5, 0.0);
    println!("radial solution at an interface point, 12 log-spaced radii:");
    for sign in [BoundarySign::Plus, BoundarySign::Minus] {
        let w: Vec<f64> = (0..12)
            .map(|k| {
                let r = 0.05 * (0.4f64 / 0.05).powf(k as f64 / 11.0);
                weiss(&radial.result.u, &radial.f, center, r, sign).map(|s| s.value)
            })
            .collect::<obslab::Result<_>>()?;
        let max_drop = w
            .windows(2)
            .map(|p| (p[0] - p[1]).max(0.0) / p[0].abs().max(p[1].abs()))
            .fold(0.0, f64::max);
        println!(
            "  {:?}: W(0.05) = {:+.6} ... W(0.4) = {:+.6}, worst relative decrease {:.2e}",
            sign,
            w[0],
            w[11],
            max_drop
        );
    }
    Ok(())
}
