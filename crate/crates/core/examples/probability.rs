//! Monte Carlo estimate of the chance that k random cards of F_3^n hold no
//! SET, next to the exact value where enumeration is cheap.
//!
//!     cargo run --release --example probability [samples] [seed]

use setfree::family::Schema;
use setfree::linalg::{Prime, PrimeField};
use setfree::oracle::{count_avoiders, estimate_probability, exact_probability, CountMode, CountQuery};

fn main() -> setfree::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: u64 = args.next().map_or(100_000, |s| s.parse().expect("samples"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let field = PrimeField::new(Prime::new(3)?);
    let (schema, _) = Schema::set().validate_in(field)?;

    for (n, k) in [(2, 3), (2, 4), (3, 5), (4, 12)] {
        let e = estimate_probability(&schema, n, k, samples, seed)?;
        print!("n = {n}, k = {k}: {:.5} ± {:.5}", e.estimate, e.std_error);
        if let Ok(res) = count_avoiders(
            &schema,
            CountQuery::new(n, k, CountMode::Unordered).with_budget(20_000_000),
        ) {
            print!("  (exact {:.5})", exact_probability(&res.unordered, res.q, k));
        }
        println!();
    }
    Ok(())
}
