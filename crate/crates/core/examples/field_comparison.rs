//! The same generator schema read over F_3, F_5 and Q. Over F_3 the three
//! sum hyperplanes of H_3 meet in a common line, so the lattices differ.
//!
//!     cargo run --release --example field_comparison

use setfree::arrangement::FlatLattice;
use setfree::family::Schema;
use setfree::linalg::{Field, FieldSpec, Prime, PrimeField, Rationals};

fn describe<F: Field>(schema: &Schema, field: F, k: usize) -> setfree::Result<String> {
    let (gs, _) = schema.validate_in(field)?;
    let lattice = FlatLattice::build(&gs.expand(k))?;
    Ok(format!(
        "{} flats {:?}, chi = {}",
        lattice.len(),
        lattice.level_sizes(),
        lattice.char_poly()?
    ))
}

fn main() -> setfree::Result<()> {
    for k in 2..=5 {
        println!("k = {k}");
        for p in [3, 5] {
            let schema = Schema::set().over(FieldSpec::prime(p)?);
            println!("  F_{p}: {}", describe(&schema, PrimeField::new(Prime::new(p)?), k)?);
        }
        let schema = Schema::set().over(FieldSpec::Generic);
        println!("  Q:   {}", describe(&schema, Rationals, k)?);
    }
    Ok(())
}
