//! Efficient points of two objectives and a weighted-sum check.

use xconvex::optimize::{efficiency_scan, efficiency_theorem_harness, ObjectiveVector};
use xconvex::{DomainSet, GMap, SamplePlan, ScalarFn, Setting, TheoremId};

fn main() -> xconvex::Result<()> {
    let plan = SamplePlan {
        breakpoints: vec![vec![0.0, 0.5, 1.0]],
        ..SamplePlan::default()
    };
    let setting = Setting::new(DomainSet::closed_intervals(&[(-1.0, 2.0)])?, GMap::identity(1))?.with_plan(plan);
    let phi = ObjectiveVector::new(vec![ScalarFn::parse("r^2", 1, &[])?, ScalarFn::parse("(r - 1)^2", 1, &[])?])?;

    let scan = efficiency_scan(&phi, &setting, 0.2)?;
    let efficient: Vec<f64> = scan.iter().filter(|v| v.global_efficient).map(|v| v.r[0]).collect();
    println!(
        "{} of {} sampled points are efficient, from {} to {}",
        efficient.len(),
        scan.len(),
        efficient[0],
        efficient[efficient.len() - 1]
    );
    if let Some(v) = scan.iter().find(|v| !v.global_efficient) {
        println!("  {:?} is dominated by {:?}", v.r, v.global_dominator);
    }

    let report = efficiency_theorem_harness(&phi, &setting, 0.2, TheoremId::T54, Some(&[0.5, 0.5]), "quadratics")?;
    println!(
        "weighted sum (0.5, 0.5): local minima {} are efficient: {:?}",
        report.details["scalarized_local_minima"], report.status
    );
    Ok(())
}
