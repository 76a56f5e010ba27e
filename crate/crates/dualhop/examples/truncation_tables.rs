//! Recompute the three truncation tables.

fn main() -> dualhop::Result<()> {
    for which in 1..=3 {
        print!("{}", dualhop::cli::cmd_tables(which)?.render());
        println!();
    }
    Ok(())
}
