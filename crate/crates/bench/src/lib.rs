//! Fixtures shared by the benchmarks.

use pwca_core::dataio::{self, AlignedDataset, SyntheticConfig};
use pwca_core::{kernels, KernelMatrix, KernelSpec};

/// Noisy synthetic views with `l` rows and one view per entry of `dims`.
pub fn dataset(l: usize, dims: &[usize], seed: u64) -> AlignedDataset {
    let cfg = SyntheticConfig::new(l, 10.min(dims.iter().copied().min().unwrap_or(1)), dims.to_vec(), 0.3, seed);
    dataio::synth_generate(&cfg).expect("valid synthetic configuration")
}

/// Linear kernels of [`dataset`].
pub fn linear_kernels(l: usize, dims: &[usize], seed: u64) -> Vec<KernelMatrix> {
    dataset(l, dims, seed)
        .views
        .iter()
        .map(|v| kernels::gram(v, &KernelSpec::linear()).expect("finite views"))
        .collect()
}
