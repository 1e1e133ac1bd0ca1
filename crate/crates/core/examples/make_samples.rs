//! Regenerates the bundled sample databases under `data/`.
//!
//! cargo run -p artsel --example make_samples

use std::path::Path;

use artsel::corpus::write_db;
use artsel::synthetic::{label_sample, rule_corpus};

fn main() -> artsel::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    artsel::write_atomic(dir.join("baseline_sample.db"), write_db(&label_sample(672, 328, 1)).as_bytes())?;
    artsel::write_atomic(dir.join("synthetic.db"), write_db(&rule_corpus(4, 200, 7)).as_bytes())?;
    Ok(())
}
