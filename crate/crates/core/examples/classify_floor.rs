//! Classify `alpha + floor(r)` on `(-inf, -1/50] u [-1/100, 0]` with
//! `g(t) = t - 1/50`, then recheck a hand-picked triple.

use xconvex::{classify, evaluate_triple, verify_witness, ConvexityClass, DomainSet, GMap, ScalarFn, Setting};

fn main() -> xconvex::Result<()> {
    let domain = DomainSet::closed_intervals(&[(f64::NEG_INFINITY, -0.02), (-0.01, 0.0)])?;
    let setting = Setting::new(domain, GMap::shift(1, -0.02))?.with_refine(true);
    let phi = ScalarFn::parse("alpha + floor(r)", 1, &[("alpha", 0.5)])?;

    let c = classify(&phi, &setting)?;
    println!("{} points x {} deltas", c.points, c.deltas);
    for v in &c.verdicts {
        let margin = v.margin().map(|m| format!("{m:+.3e}")).unwrap_or_default();
        println!("  {:30} {:24} {margin}", v.class.name(), v.status.name());
    }

    let x = c.verdict(ConvexityClass::XConvex);
    if let Some(w) = &x.witness {
        println!(
            "x_convex witness: r = {:?}, t = {:?}, delta = {}, lhs = {}, rhs = {}, verified = {}",
            w.r,
            w.t,
            w.delta,
            w.lhs,
            w.rhs,
            verify_witness(&phi, &setting, ConvexityClass::XConvex, w)?
        );
    }

    let hand = evaluate_triple(&phi, &setting, ConvexityClass::XConvex, &[-1.5], &[-2.5], 0.502)?;
    println!(
        "triple r = -1.5, t = -2.5, delta = 0.502: lhs = {}, rhs = {}, gap = {:.4} ({})",
        hand.lhs,
        hand.rhs,
        hand.gap,
        if hand.gap > setting.tol.eps_ineq { "violation" } else { "no violation" }
    );
    Ok(())
}
