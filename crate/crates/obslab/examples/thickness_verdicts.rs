//! Thickness classification at interface points: the dead disk carries a
//! fat contact set (regular-candidate), the polynomial profile's zero line
//! bounds no area (thin-candidate), and both survive a rigid repositioning
//! of the fixture frame.

use obslab::fixtures::{make_fixture, FixtureKind, FixtureSpec};
use obslab::pipeline::{thickness_classify, PipelineConfig};
use obslab::{Grid, Point};

fn main() -> obslab::Result<()> {
    let g = Grid::centered(257, 1.0)?;
    let cfg = PipelineConfig::default();

    let cases = [
        ("radial disk", FixtureSpec::plain(FixtureKind::Radial { a: 0.5 }), Point::new(0.5, 0.0)),
        ("half-space", FixtureSpec::plain(FixtureKind::HalfSpace), Point::new(0.0, 0.0)),
        ("polynomial line", FixtureSpec::plain(FixtureKind::Polynomial), Point::new(0.0, 0.0)),
        (
            "posed disk",
            FixtureSpec::posed(FixtureKind::Radial { a: 0.5 }, Point::new(0.15, -0.1), 0.5),
            Point::new(0.15 + 0.5 * 0.5f64.cos(), -0.1 + 0.5 * 0.5f64.sin()),
        ),
    ];

    println!(
        "{:<16} {:>18} {:>8} {:>11} {:>10}",
        "case", "verdict", "delta", "min u", "graph rms"
    );
    for (name, spec, center) in cases {
        let fix = make_fixture(&spec, g)?;
        let v = thickness_classify(&fix.result, center, 0.2, &cfg)?;
        let rms = v
            .graph
            .as_ref()
            .map(|f| format!("{:.4}", f.rms))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{name:<16} {:>18} {:>8.3} {:>11.2e} {rms:>10}",
            v.verdict.as_str(),
            v.delta,
            v.min_u_half
        );
    }

    // The machine-readable form carried in diagnose artifacts.
    let fix = make_fixture(&FixtureSpec::plain(FixtureKind::Radial { a: 0.5 }), g)?;
    let v = thickness_classify(&fix.result, Point::new(0.5, 0.0), 0.2, &cfg)?;
    println!("\nverdict.json for the radial case:\n{}", v.to_json());
    Ok(())
}
