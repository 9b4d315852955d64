//! Composition, sums, scaling and conic combinations of X-convex functions.

use xconvex::algebra::{theorem_closure_harness, ClosureInput, OuterFn};
use xconvex::{DomainSet, EscapePolicy, GMap, ScalarFn, Setting, TheoremId};

fn main() -> xconvex::Result<()> {
    let domain = DomainSet::closed_intervals(&[(0.0, 10.0)])?;
    let setting = Setting::new(domain, GMap::shift(1, -1.0))?.with_escape(EscapePolicy::Extend);
    let id = ScalarFn::parse("r", 1, &[])?;
    let one = ScalarFn::parse("1", 1, &[])?;
    let exp = OuterFn::new(ScalarFn::parse("exp(r)", 1, &[])?, true, true)?;

    let runs = [
        (TheoremId::T42, ClosureInput::Compose { theta: exp, phi: id.clone() }),
        (TheoremId::T43a, ClosureInput::Sum(id.clone(), one.clone())),
        (TheoremId::T43b, ClosureInput::Scale(2.5, id.clone())),
        (TheoremId::T43c, ClosureInput::Conic(vec![1.0, 2.0], vec![id, one])),
    ];
    for (theorem, input) in &runs {
        let r = theorem_closure_harness(input, &setting, *theorem, "identity, g(t) = t - 1")?;
        let concl = &r.conclusions[0];
        println!(
            "{theorem:5} {:?}: {} is {} ({})",
            r.status, r.details["composite"], concl.class, concl.status
        );
    }

    let falling = OuterFn::new(ScalarFn::parse("-r", 1, &[])?, true, true)?;
    let bad = ClosureInput::Compose { theta: falling, phi: ScalarFn::parse("r", 1, &[])? };
    match theorem_closure_harness(&bad, &setting, TheoremId::T42, "falling") {
        Err(e) => println!("-r flagged as non-decreasing: {e}"),
        Ok(r) => println!("-r flagged as non-decreasing: {:?}", r.status),
    }
    Ok(())
}
