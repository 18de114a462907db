//! Fit c_1(k) and c_2(k) in the binomial basis C(k,j) from k = 0..=6,
//! predict k = 7, and set the c_2 fit beside the published expansion.
//!
//!     cargo run --release --example coefficient_fit

use setfree::arrangement::LatticeOptions;
use setfree::coeff::{fit_and_verify, reference_expansion};
use setfree::family::Schema;
use setfree::linalg::{Prime, PrimeField};

fn main() -> setfree::Result<()> {
    let field = PrimeField::new(Prime::new(3)?);
    let (schema, _) = Schema::set().validate_in(field)?;

    for i in 1..=2 {
        let report = fit_and_verify(&schema, i, 6, 7, reference_expansion(i), LatticeOptions::default())?;
        println!("c_{i}(k) = {}", report.fitted);
        for p in &report.predictions {
            println!("  k = {}: predicted {}, computed {}", p.k, p.predicted, p.actual);
        }
        if let Some(cmp) = &report.comparison {
            println!("  published: {}", cmp.reference);
            match cmp.first_disagreement() {
                Some(k) => println!("  first disagreement at k = {k}"),
                None => println!("  agrees"),
            }
        }
    }
    Ok(())
}
