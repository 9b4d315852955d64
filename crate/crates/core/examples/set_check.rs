//! A non-convex union of intervals that is X-convex for a shift map.

use xconvex::{check_x_convex_set, DomainSet, GMap, Setting};

fn main() -> xconvex::Result<()> {
    let domain = DomainSet::closed_intervals(&[(1.0, 2.0), (3.0, f64::INFINITY)])?;
    for (label, g) in [("t + 3", GMap::shift(1, 3.0)), ("identity", GMap::identity(1))] {
        let setting = Setting::new(domain.clone(), g)?;
        let v = check_x_convex_set(&setting)?;
        println!("g = {label:9} {} over {} triples", v.status, v.triples_checked);
        if let Some(w) = &v.witness {
            println!(
                "  r = {:?}, t = {:?}, delta = {} gives {:?}, at distance {} from M",
                w.r, w.t, w.delta, w.combo, w.lhs
            );
        }
    }
    Ok(())
}
