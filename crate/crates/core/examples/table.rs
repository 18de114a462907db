//! The CSV table the `setfree table` command writes: chi coefficients,
//! chi(q) and enumerated counts side by side.
//!
//!     cargo run --release --example table [family]

use setfree::cli::{table_report, Format};
use setfree::family::Family;

fn main() -> setfree::Result<()> {
    let family: Family = std::env::args().nth(1).unwrap_or_else(|| "set".into()).parse()?;
    let report = table_report(&family.schema()?, 4, 2, setfree::DEFAULT_BUDGET)?;
    print!("{}", report.render(Format::Csv)?);
    std::process::exit(report.exit_code());
}
