//! Characteristic polynomial of the SET arrangement for k = 0..=6, with
//! the lattice of flats behind it.
//!
//!     cargo run --release --example characteristic_polynomial [kmax]

use setfree::arrangement::FlatLattice;
use setfree::family::Schema;
use setfree::linalg::{Prime, PrimeField};

fn main() -> setfree::Result<()> {
    let kmax: usize = std::env::args().nth(1).map_or(6, |s| s.parse().expect("kmax"));
    let field = PrimeField::new(Prime::new(3)?);
    let (schema, _) = Schema::set().validate_in(field)?;

    for k in 0..=kmax {
        let arrangement = schema.expand(k);
        let lattice = FlatLattice::build(&arrangement)?;
        let chi = lattice.char_poly()?;
        println!("k = {k}: {} hyperplanes, {} flats", arrangement.len(), lattice.len());
        println!("  chi(t) = {chi}");
        println!("  flats by codimension: {:?}", lattice.level_sizes());
        println!("  chi(3) = {}, chi(9) = {}", chi.point_count(3)?, chi.point_count(9)?);
    }
    Ok(())
}
