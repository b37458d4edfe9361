//! Modulus-of-continuity integrals with tail estimation: power-law moduli
//! integrate to closed-form values, while a logarithmic modulus has a
//! divergent integral and is reported as such rather than silently
//! truncated at the smallest sampled radius.

use obslab::diagnostics::dini_integral;

fn log_spaced(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    (0..=n).map(|k| lo * 10f64.powf(decades * k as f64 / n as f64)).collect()
}

type Case = (&'static str, fn(f64) -> f64, Option<f64>);

fn main() -> obslab::Result<()> {
    let rs = log_spaced(1e-6, 0.5, 20);
    let cases: [Case; 4] = [
        ("sqrt(r)", |r| r.sqrt(), Some(2.0 * 0.5f64.sqrt())),
        ("r", |r| r, Some(0.5)),
        ("r^(1/4)", |r| r.powf(0.25), Some(4.0 * 0.5f64.powf(0.25))),
        ("1 / ln(1/r)", |r| 1.0 / (1.0 / r).ln(), None),
    ];
    println!(
        "{:<14} {:>11} {:>10} {:>11} {:>11}  verdict",
        "modulus", "quadrature", "tail", "total", "exact"
    );
    for (name, sigma, exact) in cases {
        let samples: Vec<(f64, f64)> = rs.iter().map(|&r| (r, sigma(r))).collect();
        let d = dini_integral(&samples)?;
        let exact_txt = exact.map(|e| format!("{e:>11.6}")).unwrap_or_else(|| format!("{:>11}", "inf"));
        println!(
            "{name:<14} {:>11.6} {:>10.6} {:>11.6} {exact_txt}  {}",
            d.quadrature,
            d.tail,
            d.total,
            if d.converged { "converged" } else { "diverged" }
        );
    }
    Ok(())
}
