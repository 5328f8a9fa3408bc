//! Multipartite entanglement detection for pure qubit states from bipartite
//! correlations.
//!
//! The pipeline is: build a [`PureState`], reduce it to single- and two-qubit
//! marginals ([`tensor`]), rotate every qubit into its preferred frame where
//! the local Bloch vector points along +z ([`frames`]), sum the squared
//! in-plane pair correlations into `M^(pb)` and compare that value against the
//! k-separability bounds of every integer partition of the qubits
//! ([`detector`]). [`families`] carries closed-form predictions used as
//! analytic oracles, and [`cli`] is the command-line surface.

pub mod cli;
pub mod detector;
pub mod error;
pub mod families;
pub mod frames;
pub mod statevec;
pub mod tensor;

pub use detector::{DetectionReport, MonogamyReport, Partition};
pub use error::{Error, Result};
pub use frames::{LocalFrame, ZeroPolicy};
pub use statevec::PureState;
pub use tensor::{BlochVector, DensityMatrix, PairBlock};

/// Binomial coefficient `C(n, k)` as an exact integer.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}
