//! Lower level sets, epigraphs, and quasi-X-convexity through level sets.

use xconvex::sets::{check_epigraph_x_convex, check_levelset_x_convex, quasi_iff_levelsets_harness};
use xconvex::{catalog, DomainSet, GMap, Setting};

fn main() -> xconvex::Result<()> {
    let floor = catalog("floor_alpha", &[("alpha", 0.5)])?.into_scalar()?;
    let domain = DomainSet::closed_intervals(&[(f64::NEG_INFINITY, -3.0), (-2.0, -1.0)])?;
    let setting = Setting::new(domain, GMap::shift(1, -3.0))?;
    for eta in [-9.5, -2.5, -1.5] {
        let v = check_levelset_x_convex(&floor, &setting, eta)?;
        println!("floor level set at {eta:5}: {} ({} triples)", v.status, v.triples_checked);
    }
    let epi = check_epigraph_x_convex(&floor, &setting)?;
    println!("floor epigraph: {}", epi.status);

    let spike = catalog("piecewise_3_2", &[])?.into_scalar()?;
    let domain = DomainSet::closed_intervals(&[(-1.0, -0.5), (0.0, f64::INFINITY)])?;
    let setting = Setting::new(domain, GMap::shift(1, 1.0))?;
    let report = quasi_iff_levelsets_harness(&spike, &setting, None, "spike")?;
    println!(
        "spike: quasi {}, failing level sets at {}, harness {:?}",
        report.hypotheses[0].status, report.details["failing_etas"], report.status
    );
    Ok(())
}
