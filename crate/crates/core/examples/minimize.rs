//! Sampled minima, the ball condition, and the local-to-global harnesses.

use xconvex::optimize::{
    check_ball_condition, global_min_search, local_global_harness, local_minima, minimum_set_x_convex_harness,
    uniqueness_harness, LocalGlobalMode,
};
use xconvex::{catalog, DomainSet, EscapePolicy, GMap, ScalarFn, Setting, TheoremId};

fn main() -> xconvex::Result<()> {
    let w = catalog("w_shape", &[])?.into_scalar()?;
    let setting = Setting::new(DomainSet::closed_intervals(&[(-2.0, 2.0)])?, GMap::identity(1))?;
    println!("W: global min {:?}", global_min_search(&w, &setting)?);
    println!("W: local minima within 0.3 {:?}", local_minima(&w, &setting, 0.3, false)?);

    let unit = Setting::new(DomainSet::closed_intervals(&[(0.0, 1.0)])?, GMap::identity(1))?;
    for nu in [2.0, 0.5] {
        let b = check_ball_condition(&unit, nu)?;
        println!("ball condition on [0, 1], nu = {nu}: max {} holds {}", b.max_observed, b.holds_on_samples);
    }

    let id = ScalarFn::parse("r", 1, &[])?;
    let shifted = Setting::new(DomainSet::closed_intervals(&[(0.0, 10.0)])?, GMap::shift(1, -1.0))?
        .with_escape(EscapePolicy::Extend);
    let lg = local_global_harness(&id, &shifted, 20.0, LocalGlobalMode::Xconvex, "identity")?;
    println!("local-to-global: {:?}, argmins {}", lg.status, lg.details["argmin_count"]);
    let u = uniqueness_harness(&id, &shifted, TheoremId::T48, "identity")?;
    println!("uniqueness: {:?} {}", u.status, u.details["argmins"]);
    let m = minimum_set_x_convex_harness(&id, &shifted, TheoremId::T45MinSet, "identity")?;
    println!("minimum set: {:?}", m.status);
    for note in &m.notes {
        println!("  {note}");
    }
    Ok(())
}
