//! Regenerates `fixtures/credit_like.csv` from the in-code synthetic fixture.
//!
//! cargo run -p fairthresh --example write_credit_fixture -- fixtures/credit_like.csv

use fairthresh::cli::emit_distribution_csv;
use fairthresh::fixtures::{credit_like, credit_like_grid};
use fairthresh::Group;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/credit_like.csv".into());
    let inst = credit_like(-4.0)?;
    let groups: Vec<_> =
        [Group::A, Group::B].iter().map(|&g| (inst.group(g).name.as_str(), inst.dist(g), &inst.group(g).rho)).collect();
    let file = std::fs::File::create(&path)?;
    emit_distribution_csv(file, credit_like_grid().labels(), &groups)?;
    eprintln!("wrote {path}");
    Ok(())
}
