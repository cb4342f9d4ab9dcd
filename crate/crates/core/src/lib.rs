//! Pairwise cluster analysis (PWCA) for aligned multi-view data.
//!
//! Each view contributes a kernel matrix; PWCA finds dual weightings that
//! agree across views by solving the block generalized eigenproblem
//! `A x = γ B x` with `A = blockdiag(K_1, …, K_s)` and
//! `B = (1 1ᵀ) ⊗ I + τ I`. A regularized kernel CCA baseline, mate-retrieval
//! evaluation, PAC-Bayes diagnostics and dataset tooling sit on top.
//!
//! ```
//! use pwca_core::{dataio, pwca, retrieval, KernelSpec};
//!
//! let cfg = dataio::SyntheticConfig::new(60, 3, vec![6, 7], 0.05, 1);
//! let ds = dataio::synth_generate(&cfg).unwrap();
//! let split = dataio::SplitSpec { n_train: 40, n_test: 20, seed: 1 };
//! let (train, test) = dataio::split(&ds, &split).unwrap();
//! let model = pwca::train_pwca(&train.views, &KernelSpec::linear(), 0.01, 10).unwrap();
//! let report = retrieval::mate_retrieval(&model, &test.views, 0, 1).unwrap();
//! assert!(report.ap > retrieval::expected_random_ap(20));
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod dataio;
pub mod eigsolve;
pub mod error;
pub mod kcca;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod pacbayes;
pub mod pwca;
pub mod retrieval;

pub use eigsolve::{solve_gsym_eig, EigConfig, EigenPairs};
pub use error::{Error, ErrorClass, Result};
pub use kernels::{KernelKind, KernelMatrix, KernelSpec, ViewMatrix};
pub use linalg::{Matrix, SymMatrix};
pub use model::{assign_cluster, project, similarity, Embedding, Method, PwcaModel};
pub use pwca::Components;
pub use retrieval::RetrievalReport;
