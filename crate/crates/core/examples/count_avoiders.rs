//! Count SET-free k-subsets of F_3^n by enumeration and check each count
//! against chi(3^n).
//!
//!     cargo run --release --example count_avoiders

use setfree::arrangement::FlatLattice;
use setfree::family::Schema;
use setfree::linalg::{Prime, PrimeField};
use setfree::oracle::{count_avoiders, CountMode, CountQuery};

fn main() -> setfree::Result<()> {
    let field = PrimeField::new(Prime::new(3)?);
    let (schema, _) = Schema::set().validate_in(field)?;

    for (n, k) in [(2, 3), (2, 4), (3, 3), (3, 4), (4, 2)] {
        let res = count_avoiders(&schema, CountQuery::new(n, k, CountMode::Unordered))?;
        let chi = FlatLattice::build(&schema.expand(k))?.char_poly()?;
        let predicted = chi.point_count(res.q)?;
        println!(
            "n = {n}, k = {k}: {} subsets, {} ordered tuples, chi({}) = {predicted} [{:.2?}]",
            res.unordered, res.ordered, res.q, res.elapsed
        );
        assert_eq!(predicted, res.ordered.clone().into());
    }
    Ok(())
}
