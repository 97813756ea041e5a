//! Runs every acceptance criterion at its stated tolerance and prints one
//! pass/fail line per criterion. Exits nonzero if any criterion fails.

use eigenbound::verify::{self, CRITERIA};

fn main() {
    let mut failed = Vec::new();
    for &(id, _) in CRITERIA.iter() {
        let r = verify::run(id, None);
        println!(
            "criterion {} [{}] {}: {} ({:.2} s)",
            r.criterion,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            r.seconds
        );
        if !r.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
