//! Stable seed derivation. A cell's seed depends only on its own key, so
//! growing a sweep never shifts the seeds of existing cells.

use sha2::{Digest, Sha256};

/// Hashes `(master, parts...)` into a 64-bit seed.
pub fn derive(master: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for p in parts {
        // Length prefix keeps ("ab", "c") apart from ("a", "bc").
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Seed of one episode cell.
pub fn cell_seed(master: u64, env: &str, algo: &str, alpha: Option<f64>, pair: usize, episode: usize) -> u64 {
    let alpha = alpha.map(f64::to_bits).unwrap_or(u64::MAX).to_le_bytes();
    derive(
        master,
        &[env.as_bytes(), algo.as_bytes(), &alpha, &(pair as u64).to_le_bytes(), &(episode as u64).to_le_bytes()],
    )
}

/// Separate streams for the world and the planner of one cell.
pub fn split(seed: u64) -> (u64, u64) {
    (derive(seed, &[b"env"]), derive(seed, &[b"planner"]))
}
