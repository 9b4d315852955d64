//! The worked examples with their stated classes, checked one by one.

use xconvex::cli::run_corpus;

fn main() -> xconvex::Result<()> {
    let report = run_corpus(None)?;
    let table = report.corpus.expect("corpus table");
    for row in &table.rows {
        println!("{:9} {:24} {:50} expected {:9} observed {}", row.agreement, row.case, row.claim, row.expected, row.observed);
    }
    println!("{} agree, {} disagree", table.agree, table.disagree);
    Ok(())
}
