//! Library side of the `richards-uq` command line tool.

pub mod config;
pub mod run;

pub use config::CampaignConfig;
pub use run::{config_hash, exit_code, run, Command, RunReport};

/// Sets the size of the global worker pool; 0 keeps the default.
pub fn set_threads(threads: usize) {
    if threads > 0 {
        // Fails only if the pool was already built, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}
