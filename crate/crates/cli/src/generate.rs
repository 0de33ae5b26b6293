use std::path::{Path, PathBuf};

use isbjssp_core::seeding::derive_seed;
use isbjssp_core::{DisjunctiveGraph, Instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Writes `count` random instances named `gen_j{n}_m{m}_s{seed}_{i}.txt`,
/// plus an edge-list dump of each initial graph when `graphs` is set.
pub fn generate(
    count: usize,
    machines: usize,
    jobs: usize,
    seed: u64,
    out_dir: &Path,
    graphs: bool,
) -> Result<Vec<PathBuf>, CliError> {
    if machines == 0 || jobs == 0 {
        return Err(CliError::Usage("--machines and --jobs must be positive".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let mut written = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "generate", i as u64));
        let inst = Instance::generate(machines, jobs, &mut rng);
        let stem = format!("gen_j{jobs}_m{machines}_s{seed}_{i:03}");
        let path = out_dir.join(format!("{stem}.txt"));
        std::fs::write(&path, inst.to_text()).map_err(CliError::io(&path))?;
        if graphs {
            let graph_path = out_dir.join(format!("{stem}.graph"));
            std::fs::write(&graph_path, DisjunctiveGraph::build(&inst).dump()).map_err(CliError::io(&graph_path))?;
        }
        written.push(path);
    }
    Ok(written)
}
