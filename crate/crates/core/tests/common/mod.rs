#![allow(dead_code)]

use entmon::detector::{enumerate_partitions, Partition};
use entmon::statevec::{make_random_haar, PureState};
use entmon::tensor::bloch_of;
use rand::seq::SliceRandom;
use rand::Rng;

/// Product of Haar-random factors, one per part, in shuffled order. Returns
/// the state and its (sorted) partition type.
pub fn random_product<R: Rng>(n: usize, rng: &mut R) -> (PureState, Partition) {
    let candidates: Vec<Partition> = enumerate_partitions(n, None)
        .unwrap()
        .into_iter()
        .filter(|p| !p.is_trivial())
        .collect();
    let partition = candidates[rng.random_range(0..candidates.len())].clone();
    let mut parts = partition.parts().to_vec();
    parts.shuffle(rng);
    let mut state: Option<PureState> = None;
    for r in parts {
        let factor = make_random_haar(r, rng.random()).unwrap();
        state = Some(match state {
            None => factor,
            Some(s) => s.tensor(&factor).unwrap(),
        });
    }
    (state.unwrap(), partition)
}

/// Haar-random state whose single-qubit Bloch vectors all exceed `min_norm`,
/// drawn by rejection from consecutive seeds.
pub fn haar_with_bloch(n: usize, mut seed: u64, min_norm: f64) -> PureState {
    loop {
        let s = make_random_haar(n, seed).unwrap();
        if (0..n).all(|k| bloch_of(&s, k).unwrap().norm() > min_norm) {
            return s;
        }
        seed = seed.wrapping_add(0x9E37_79B9);
    }
}

/// Bound of a partition given as any list of part sizes, computed directly:
/// Σ r(r−1)/2 plus one for each part of size two.
pub fn bound_oracle(parts: &[usize]) -> u64 {
    parts
        .iter()
        .map(|&r| (r * r.saturating_sub(1) / 2 + usize::from(r == 2)) as u64)
        .sum()
}

/// All compositions of `n` (ordered sums of positive integers).
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
