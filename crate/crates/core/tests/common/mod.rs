#![allow(dead_code)]

use xconvex::{ConvexityClass, GMap, Point, ScalarFn, Tolerances};

pub type Combo<'a> = dyn Fn(&[f64], &[f64], f64) -> Point + 'a;

/// Brute-force verdicts on given points and δ values: `true` means no
/// triple exceeds the class threshold. Combinations come from `combo`;
/// every class is checked straight from its defining inequality.
pub fn brute_classes(
    phi: &ScalarFn,
    combo: &Combo<'_>,
    points: &[Point],
    deltas: &[f64],
    tol: &Tolerances,
) -> Vec<(ConvexityClass, bool)> {
    let f: Vec<f64> = points.iter().map(|p| phi.eval(p).unwrap()).collect();
    let mut out = Vec::new();
    for class in ConvexityClass::FUNCTION_CLASSES {
        let sign = if class.is_concave() { -1.0 } else { 1.0 };
        let strict = class.is_strict();
        let mut ok = true;
        'search: for (i, r) in points.iter().enumerate() {
            for (j, t) in points.iter().enumerate() {
                for &d in deltas {
                    if strict && (i == j || d <= 0.0 || d >= 1.0) {
                        continue;
                    }
                    let (fr, ft) = (sign * f[i], sign * f[j]);
                    let base = class.convex_counterpart();
                    let semi = base == ConvexityClass::SemistrictlyQuasiXConvex;
                    if semi && ((fr - ft).abs() <= tol.eps_val_eq || d <= 0.0 || d >= 1.0) {
                        continue;
                    }
                    let fc = sign * phi.eval(&combo(r, t, d)).unwrap();
                    let rhs = match base {
                        ConvexityClass::XConvex | ConvexityClass::StrictlyXConvex => d * fr + (1.0 - d) * ft,
                        _ => fr.max(ft),
                    };
                    let limit = if strict { -tol.eps_strict } else { tol.eps_ineq };
                    if fc - rhs > limit {
                        ok = false;
                        break 'search;
                    }
                }
            }
        }
        out.push((class, ok));
    }
    out
}

/// `δ(r − t) + g(t)` with the endpoints taken exactly.
pub fn shift_combo(g: &GMap) -> impl Fn(&[f64], &[f64], f64) -> Point + '_ {
    move |r, t, d| {
        let gt = g.eval(t).unwrap();
        r.iter()
            .zip(t)
            .zip(&gt)
            .map(|((r, t), gt)| {
                if d == 0.0 {
                    *gt
                } else if d == 1.0 {
                    r + (gt - t)
                } else {
                    d.mul_add(r - t, *gt)
                }
            })
            .collect()
    }
}

/// Random polynomial of degree at most four in one variable.
pub fn poly_expr(coeffs: &[f64]) -> String {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        let c = format!("({c})");
        terms.push(match k {
            0 => c,
            1 => format!("{c} * r"),
            _ => format!("{c} * r^{k}"),
        });
    }
    terms.join(" + ")
}
