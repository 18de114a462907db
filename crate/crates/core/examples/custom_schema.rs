//! A user-defined family read from JSON: k-subsets of F_5^n with no
//! solution to x + 2y = 3z. Validation adds the missing difference
//! generator.
//!
//!     cargo run --release --example custom_schema

use setfree::arrangement::FlatLattice;
use setfree::family::Schema;
use setfree::linalg::{Prime, PrimeField};
use setfree::oracle::{count_avoiders, CountMode, CountQuery};

const SCHEMA: &str = r#"{ "name": "x+2y=3z", "p": 5, "generators": [[1, 2, -3]] }"#;

fn main() -> setfree::Result<()> {
    let schema = Schema::from_json(SCHEMA)?;
    let (gs, report) = schema.validate_in(PrimeField::new(Prime::new(5)?))?;
    println!("{report}");
    for k in 0..=4 {
        let chi = FlatLattice::build(&gs.expand(k))?.char_poly()?;
        let count = count_avoiders(&gs, CountQuery::new(1, k, CountMode::Ordered))?;
        println!(
            "k = {k}: chi = {chi}, chi(5) = {}, enumerated {}",
            chi.point_count(5)?,
            count.ordered
        );
    }
    Ok(())
}
