//! Parse, print and evaluate expressions; look up catalog entries.

use xconvex::lang::catalog_names;
use xconvex::{catalog, GMap, ScalarFn};

fn main() -> xconvex::Result<()> {
    let phi = ScalarFn::parse("alpha + floor(r)", 1, &[("alpha", 0.5)])?;
    println!("{phi}");
    for r in [-2.5, -1.0, -0.01] {
        println!("  phi({r}) = {}", phi.eval(&[r])?);
    }

    let bump = ScalarFn::parse("piecewise((x1 <= 0, abs(x2)), x1^2 + abs(x2))", 2, &[])?;
    println!("{bump}  at (1, -2): {}", bump.eval(&[1.0, -2.0])?);

    let g = GMap::parse(&["x1 + 2", "x2"], &[])?;
    println!("g = {g}, g(0.5, 0.5) = {:?}", g.eval(&[0.5, 0.5])?);

    match ScalarFn::parse("r +* 2", 1, &[]) {
        Ok(_) => unreachable!(),
        Err(e) => println!("parse error: {e}"),
    }

    println!("catalog:");
    for name in catalog_names() {
        let params: &[(&str, f64)] = &[("c", 1.0), ("alpha", 0.5)];
        match catalog(name, params)? {
            xconvex::lang::CatalogItem::Scalar(f) => println!("  {name:14} function {f}"),
            xconvex::lang::CatalogItem::Map(m) => println!("  {name:14} map      {m}"),
        }
    }
    Ok(())
}
