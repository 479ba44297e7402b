//! Regenerates the `witnesses/` registry shipped at the repository root.
//! All entries are decomposable sanity witnesses (identity, transpose and
//! two reduction-style maps); they cannot fire on PPT states, which is the
//! point of keeping them in the default battery.
//!
//! Usage: `cargo run -p pptsq-cli --example gen_witness_registry [DIR]`

use pptsq_core::io::save_witness_registry;
use pptsq_core::witness::builtin_registry;
use std::path::PathBuf;

fn main() {
    let root: PathBuf = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| PathBuf::from("witnesses"));
    for n in [2usize, 3, 4] {
        let dir = root.join(format!("m{n}"));
        save_witness_registry(&dir, &builtin_registry(n)).expect("write registry");
        println!("wrote {}", dir.display());
    }
}
