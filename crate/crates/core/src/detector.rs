//! Pair-correlation sums, monogamy checks, separability thresholds and the
//! partition-exclusion report.
//!
//! `M_kl` is the sum of the four squared in-plane components of the pair
//! block of qubits `k` and `l` after both are rotated into their local
//! frames. Summed over all pairs in the preferred frames it gives `M^(pb)`.
//! A pure state that factors as a product over a partition `r_1 + … + r_k`
//! has `M^(pb) ≤ Σ C(r_m, 2) + #{m : r_m = 2}`, so any value above that bound
//! rules the partition out.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{invalid, Result};
use crate::frames::{preferred_frame, rotate_block, LocalFrame, ZeroPolicy, EPS_BLOCH};
use crate::statevec::{make_random_haar, PureState};
use crate::tensor::{bloch_of, pair_block_of, BlochVector, PairBlock};

/// Margin on every strict `>` comparison against a bound.
pub const EPS_DET: f64 = 1e-9;
/// Largest qubit count for exhaustive partition work.
pub const MAX_PARTITION_N: usize = 20;
/// Random starting configurations used by the maximize policy, on top of
/// the canonical start.
pub const MAXIMIZE_RESTARTS: usize = 8;
const MAXIMIZE_MAX_SWEEPS: usize = 200;

/// An integer partition `r_1 ≥ r_2 ≥ … ≥ r_k ≥ 1` labelling a k-product
/// hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Parts must already be sorted non-increasing and positive.
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return invalid("a partition needs at least one part");
        }
        if parts.contains(&0) {
            return invalid(format!("partition {parts:?} has a zero part"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return invalid(format!("partition {parts:?} is not sorted non-increasing"));
        }
        Ok(Self(parts))
    }

    /// Sorts the parts before validating.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn largest(&self) -> usize {
        self.0[0]
    }

    pub fn is_trivial(&self) -> bool {
        self.0.len() == 1
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = crate::Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let body: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", body.join("+"))
    }
}

fn check_frames(state: &PureState, frames: &[LocalFrame]) -> Result<()> {
    if frames.len() != state.num_qubits() {
        return invalid(format!(
            "{} frames given for a {}-qubit state",
            frames.len(),
            state.num_qubits()
        ));
    }
    Ok(())
}

fn check_pair(state: &PureState, k: usize, l: usize) -> Result<()> {
    let n = state.num_qubits();
    if k >= l || l >= n {
        return invalid(format!("need k < l < {n}, got ({k}, {l})"));
    }
    Ok(())
}

fn pair_indices(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|k| (k + 1..n).map(move |l| (k, l))).collect()
}

/// Computational-frame pair blocks for every `k < l`, in row-major pair order.
pub fn all_pair_blocks(state: &PureState) -> Result<Vec<((usize, usize), PairBlock)>> {
    pair_indices(state.num_qubits())
        .into_par_iter()
        .map(|(k, l)| Ok(((k, l), pair_block_of(state, k, l)?)))
        .collect()
}

pub fn all_bloch_vectors(state: &PureState) -> Result<Vec<BlochVector>> {
    (0..state.num_qubits()).map(|k| bloch_of(state, k)).collect()
}

fn m_from_block(t: &PairBlock, fk: &LocalFrame, fl: &LocalFrame) -> f64 {
    rotate_block(t, fk, fl).in_plane_sqr()
}

fn total_from_blocks(blocks: &[((usize, usize), PairBlock)], frames: &[LocalFrame]) -> f64 {
    blocks
        .iter()
        .map(|((k, l), t)| m_from_block(t, &frames[*k], &frames[*l]))
        .sum()
}

/// `M_kl` in the given local frames.
pub fn m_kl(state: &PureState, frames: &[LocalFrame], k: usize, l: usize) -> Result<f64> {
    check_frames(state, frames)?;
    check_pair(state, k, l)?;
    Ok(m_from_block(&pair_block_of(state, k, l)?, &frames[k], &frames[l]))
}

/// `M = Σ_{k<l} M_kl` in the given local frames.
pub fn m_total(state: &PureState, frames: &[LocalFrame]) -> Result<f64> {
    check_frames(state, frames)?;
    Ok(total_from_blocks(&all_pair_blocks(state)?, frames))
}

/// Upper bound on `M` for any `n`-qubit state: 2 for two qubits, `C(n, 2)`
/// otherwise.
pub fn m_total_bound(n: usize) -> f64 {
    if n == 2 {
        2.0
    } else {
        binomial(n, 2) as f64
    }
}

/// `M^(pb)` together with the frames that produced it.
#[derive(Clone, Debug)]
pub struct PreferredBasisValue {
    pub value: f64,
    pub frames: Vec<LocalFrame>,
    /// Qubits whose Bloch vector vanished (norm ≤ `EPS_BLOCH`).
    pub zero_bloch: Vec<usize>,
}

/// `M^(pb)` under the given zero-Bloch policy.
pub fn m_pb(state: &PureState, policy: &ZeroPolicy) -> Result<f64> {
    Ok(m_pb_detailed(state, policy)?.value)
}

/// Like [`m_pb`] but also returns the frames.
///
/// With [`ZeroPolicy::Maximize`] the +z axes of zero-Bloch qubits are chosen
/// by coordinate ascent over a fixed candidate pool per qubit (the six
/// signed coordinate axes plus `samples` random unit vectors), from the
/// canonical start and [`MAXIMIZE_RESTARTS`] random starts. The result is
/// the best value found, a lower bound on the supremum over axes.
pub fn m_pb_detailed(state: &PureState, policy: &ZeroPolicy) -> Result<PreferredBasisValue> {
    policy.validate()?;
    let blochs = all_bloch_vectors(state)?;
    let blocks = all_pair_blocks(state)?;
    let mut frames: Vec<LocalFrame> = blochs.iter().map(|b| preferred_frame(*b, policy)).collect();
    let zero_bloch: Vec<usize> = blochs
        .iter()
        .enumerate()
        .filter(|(_, b)| b.norm() <= EPS_BLOCH)
        .map(|(k, _)| k)
        .collect();

    if let ZeroPolicy::Maximize { samples, seed } = *policy {
        if !zero_bloch.is_empty() {
            frames = maximize_zero_axes(state.num_qubits(), &blocks, frames, &zero_bloch, samples, seed);
        }
    }
    let value = total_from_blocks(&blocks, &frames);
    Ok(PreferredBasisValue {
        value,
        frames,
        zero_bloch,
    })
}

fn maximize_zero_axes(
    n: usize,
    blocks: &[((usize, usize), PairBlock)],
    base: Vec<LocalFrame>,
    zero: &[usize],
    samples: usize,
    seed: u64,
) -> Vec<LocalFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signed_axes = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let pools: Vec<Vec<LocalFrame>> = zero
        .iter()
        .map(|_| {
            let mut pool: Vec<LocalFrame> = signed_axes
                .iter()
                .map(|a| LocalFrame::minimal_to_z(*a).expect("unit axis"))
                .collect();
            pool.extend((0..samples).map(|_| {
                let axis = LocalFrame::random(&mut rng).z_axis();
                LocalFrame::minimal_to_z(axis).expect("unit axis")
            }));
            pool
        })
        .collect();

    // blocks touching each qubit
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, ((k, l), _)) in blocks.iter().enumerate() {
        touching[*k].push(idx);
        touching[*l].push(idx);
    }
    let contribution = |frames: &[LocalFrame], q: usize| -> f64 {
        touching[q]
            .iter()
            .map(|&i| {
                let ((k, l), t) = &blocks[i];
                m_from_block(t, &frames[*k], &frames[*l])
            })
            .sum()
    };

    let ascend = |mut frames: Vec<LocalFrame>| -> (f64, Vec<LocalFrame>) {
        let mut total = total_from_blocks(blocks, &frames);
        for _ in 0..MAXIMIZE_MAX_SWEEPS {
            let before = total;
            for (slot, &q) in zero.iter().enumerate() {
                let current = contribution(&frames, q);
                let mut best = (current, frames[q]);
                for cand in &pools[slot] {
                    frames[q] = *cand;
                    let v = contribution(&frames, q);
                    if v > best.0 {
                        best = (v, *cand);
                    }
                }
                frames[q] = best.1;
                total += best.0 - current;
            }
            if total - before < 1e-9 {
                break;
            }
        }
        (total_from_blocks(blocks, &frames), frames)
    };

    let mut best = ascend(base.clone());
    for _ in 0..MAXIMIZE_RESTARTS {
        let mut start = base.clone();
        for (slot, &q) in zero.iter().enumerate() {
            start[q] = pools[slot][rng.random_range(0..pools[slot].len())];
        }
        let candidate = ascend(start);
        if candidate.0 > best.0 {
            best = candidate;
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

/// `M_ck + M_cl` for two pairs sharing the qubit `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTermSum {
    pub center: usize,
    pub a: usize,
    pub b: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleSum {
    pub qubits: [usize; 3],
    pub sum: f64,
}

/// Every monogamy quantity of one state in one choice of frames. Slacks are
/// `bound − value`, minimized over each family; negative means violated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub n: usize,
    pub pairs: Vec<PairValue>,
    pub two_term: Vec<TwoTermSum>,
    pub three_term: Vec<TripleSum>,
    pub total: f64,
    pub total_bound: f64,
    pub pair_slack: f64,
    pub two_term_slack: Option<f64>,
    pub three_term_slack: Option<f64>,
    pub total_slack: f64,
}

impl MonogamyReport {
    pub fn min_slack(&self) -> f64 {
        [
            Some(self.pair_slack),
            self.two_term_slack,
            self.three_term_slack,
            Some(self.total_slack),
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn max_pair(&self) -> f64 {
        self.pairs.iter().map(|p| p.value).fold(0.0, f64::max)
    }

    /// Builds the report from a symmetric table of `M_kl` values.
    fn from_table(n: usize, m: &[Vec<f64>]) -> Self {
        let pairs: Vec<PairValue> = pair_indices(n)
            .into_iter()
            .map(|(k, l)| PairValue { k, l, value: m[k][l] })
            .collect();
        let mut two_term = Vec::new();
        for center in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    if a != center && b != center {
                        two_term.push(TwoTermSum {
                            center,
                            a,
                            b,
                            sum: m[center][a] + m[center][b],
                        });
                    }
                }
            }
        }
        let mut three_term = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    three_term.push(TripleSum {
                        qubits: [a, b, c],
                        sum: m[a][b] + m[b][c] + m[a][c],
                    });
                }
            }
        }
        let total: f64 = pairs.iter().map(|p| p.value).sum();
        let total_bound = m_total_bound(n);
        let min_slack = |bound: f64, vals: &mut dyn Iterator<Item = f64>| {
            vals.map(|v| bound - v).reduce(f64::min)
        };
        MonogamyReport {
            n,
            pair_slack: min_slack(2.0, &mut pairs.iter().map(|p| p.value)).unwrap_or(2.0),
            two_term_slack: min_slack(2.0, &mut two_term.iter().map(|t| t.sum)),
            three_term_slack: min_slack(3.0, &mut three_term.iter().map(|t| t.sum)),
            total_slack: total_bound - total,
            pairs,
            two_term,
            three_term,
            total,
            total_bound,
        }
    }
}

/// Evaluates the pair bound `M_kl ≤ 2`, the shared-qubit bound
/// `M_kl + M_lm ≤ 2`, the triangle bound `M_kl + M_lm + M_km ≤ 3` and the
/// global bound on `M`.
pub fn monogamy_check(state: &PureState, frames: &[LocalFrame]) -> Result<MonogamyReport> {
    check_frames(state, frames)?;
    let n = state.num_qubits();
    if n < 2 {
        return invalid("monogamy needs at least two qubits");
    }
    let blocks = all_pair_blocks(state)?;
    let mut table = vec![vec![0.0; n]; n];
    for ((k, l), t) in &blocks {
        let v = m_from_block(t, &frames[*k], &frames[*l]);
        table[*k][*l] = v;
        table[*l][*k] = v;
    }
    Ok(MonogamyReport::from_table(n, &table))
}

/// `Σ_m C(r_m, 2) + d` with `d` the number of parts equal to 2, exact.
pub fn partition_bound_exact(p: &Partition) -> u64 {
    p.parts()
        .iter()
        .map(|&r| binomial(r, 2) + u64::from(r == 2))
        .sum()
}

/// Largest `M^(pb)` a product state of type `p` can have.
pub fn partition_bound(p: &Partition) -> f64 {
    partition_bound_exact(p) as f64
}

/// Threshold above which a pure `n`-qubit state cannot be k-product:
/// 2 at `k = n−1`, 4 at `k = n−2`, `C(n−k+1, 2)` below that.
pub fn s_threshold(n: usize, k: usize) -> Result<f64> {
    if n < 3 {
        return invalid(format!("s_k needs n >= 3, got {n}"));
    }
    if k < 2 || k > n - 1 {
        return invalid(format!("k must lie in 2..={}, got {k}", n - 1));
    }
    Ok(if k == n - 1 {
        2.0
    } else if k == n - 2 {
        4.0
    } else {
        binomial(n - k + 1, 2) as f64
    })
}

/// Threshold above which a pure state is genuinely n-partite entangled.
pub fn genuine_threshold(n: usize) -> Result<f64> {
    match n {
        0..=2 => invalid(format!("genuine threshold needs n >= 3, got {n}")),
        3 => Ok(2.0),
        4 => Ok(4.0),
        _ => Ok(binomial(n - 1, 2) as f64),
    }
}

/// Bound of the bipartition `(m, n−m)`: `C(m,2) + C(n−m,2) + [m = 2]`,
/// defined for `n ≥ 5` and `1 ≤ m ≤ ⌊n/2⌋ − 1`.
pub fn depth_threshold(n: usize, m: usize) -> Result<f64> {
    if n < 5 {
        return invalid(format!("depth thresholds need n >= 5, got {n}"));
    }
    let hi = n / 2 - 1;
    if m < 1 || m > hi {
        return invalid(format!("m must lie in 1..={hi} for n = {n}, got {m}"));
    }
    Ok((binomial(m, 2) + binomial(n - m, 2) + u64::from(m == 2)) as f64)
}

/// `⌈n/(k−1)⌉`: smallest mutually entangled subset of a state that is not
/// k-product.
pub fn min_entangled_block(n: usize, k: usize) -> Result<usize> {
    if k < 2 {
        return invalid(format!("k must be at least 2, got {k}"));
    }
    Ok(n.div_ceil(k - 1))
}

/// All partitions of `n` (into exactly `k` parts if given), in
/// reverse-lexicographic order.
pub fn enumerate_partitions(n: usize, k: Option<usize>) -> Result<Vec<Partition>> {
    if n < 1 {
        return invalid("n must be at least 1");
    }
    if n > MAX_PARTITION_N {
        return invalid(format!("partition enumeration is limited to n <= {MAX_PARTITION_N}"));
    }
    if let Some(k) = k {
        if k < 1 || k > n {
            return invalid(format!("k must lie in 1..={n}, got {k}"));
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    extend_partitions(n, n, k, &mut prefix, &mut out);
    Ok(out)
}

fn extend_partitions(
    remaining: usize,
    max_part: usize,
    parts_left: Option<usize>,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        if parts_left.is_none_or(|p| p == 0) {
            out.push(Partition(prefix.clone()));
        }
        return;
    }
    let (lo, hi) = match parts_left {
        None => (1, max_part.min(remaining)),
        Some(0) => return,
        Some(p) => {
            // the first part must leave at least one unit per remaining part
            // and be large enough that p parts ≤ first can cover the rest
            let hi = max_part.min(remaining - (p - 1));
            let lo = remaining.div_ceil(p);
            (lo, hi)
        }
    };
    for first in (lo..=hi).rev() {
        prefix.push(first);
        extend_partitions(
            remaining - first,
            first,
            parts_left.map(|p| p - 1),
            prefix,
            out,
        );
        prefix.pop();
    }
}

/// Outcome of checking the partition-maximization lemma by enumeration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Check {
    pub n: usize,
    pub k: usize,
    /// `max Σ C(r_m, 2)` over all k-part partitions.
    pub max_sum: u64,
    /// First partition in enumeration order attaining the maximum.
    pub maximizer: Partition,
    /// `C(n−k+1, 2)`.
    pub bound: u64,
    /// Whether `(n−k+1, 1, …, 1)` attains the maximum.
    pub extremal_attains: bool,
    pub holds: bool,
}

pub fn lemma1_bruteforce(n: usize, k: usize) -> Result<Lemma1Check> {
    if !(3..=MAX_PARTITION_N).contains(&n) {
        return invalid(format!("n must lie in 3..={MAX_PARTITION_N}, got {n}"));
    }
    if k < 2 || k > n {
        return invalid(format!("k must lie in 2..={n}, got {k}"));
    }
    let sum = |p: &Partition| p.parts().iter().map(|&r| binomial(r, 2)).sum::<u64>();
    let mut best: Option<(u64, Partition)> = None;
    for p in enumerate_partitions(n, Some(k))? {
        let s = sum(&p);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, p));
        }
    }
    let (max_sum, maximizer) = best.expect("k <= n always has a partition");
    let mut extremal = vec![1; k];
    extremal[0] = n - k + 1;
    let extremal_sum = sum(&Partition(extremal));
    let bound = binomial(n - k + 1, 2);
    Ok(Lemma1Check {
        n,
        k,
        max_sum,
        maximizer,
        bound,
        extremal_attains: extremal_sum == max_sum,
        holds: max_sum == bound,
    })
}

/// `max_{i,j} |T_ij − b_i^(k) b_j^(l)|` in the computational frame. Zero for
/// any state that is a product across a cut separating `k` from `l`.
pub fn factorization_residual(state: &PureState, k: usize, l: usize) -> Result<f64> {
    check_pair(state, k, l)?;
    let t = pair_block_of(state, k, l)?;
    Ok(residual(&t, bloch_of(state, k)?, bloch_of(state, l)?))
}

fn residual(t: &PairBlock, bk: BlochVector, bl: BlochVector) -> f64 {
    let (bk, bl) = (bk.to_array(), bl.to_array());
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((t.get(i, j) - bk[i] * bl[j]).abs());
        }
    }
    worst
}

/// A partition together with its bound; serializes as `[[parts…], bound]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionBound(pub Partition, pub f64);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// `s_k` for `k = 2 … n−1`.
    pub s_k: BTreeMap<usize, f64>,
    /// Genuine n-partite threshold, absent for `n < 3`.
    pub genuine: Option<f64>,
    /// Bipartition thresholds by smaller side `m`, present for `n ≥ 5`.
    pub depth: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionReport {
    pub n: usize,
    pub policy: String,
    pub m_pb: f64,
    /// Bound on `M` valid in any frames: 2 for `n = 2`, `C(n, 2)` otherwise.
    pub m_bound: f64,
    pub thresholds: Thresholds,
    pub excluded_partitions: Vec<PartitionBound>,
    /// Non-trivial partitions not ruled out. The trivial partition `(n)` is
    /// never listed and never excluded.
    pub surviving_partitions: Vec<PartitionBound>,
    /// Every `k` for which all k-part partitions are excluded.
    pub not_k_product: Vec<usize>,
    /// Minimum over surviving partitions (and `(n)`) of the largest part.
    pub entangled_subset_guarantee: usize,
    /// `m + 1` for the smallest `m` whose bipartition threshold is exceeded.
    pub depth_guarantee: Option<usize>,
    /// The same conclusion read as "genuinely m-partite".
    pub depth_guarantee_as_stated: Option<usize>,
    pub genuine_multipartite: bool,
    pub max_factorization_residual: f64,
    pub max_residual_pair: Option<(usize, usize)>,
    pub notes: Vec<String>,
}

/// Evaluates `M^(pb)` and every separability bound for `state`.
pub fn exclusion_report(state: &PureState, policy: &ZeroPolicy) -> Result<DetectionReport> {
    let n = state.num_qubits();
    if n < 2 {
        return invalid("exclusion report needs at least two qubits");
    }
    if n > MAX_PARTITION_N {
        return invalid(format!("exclusion report is limited to n <= {MAX_PARTITION_N}"));
    }
    let v = m_pb(state, policy)?;
    let mut report = classify_value(n, v, policy.to_string())?;

    let blochs = all_bloch_vectors(state)?;
    for ((k, l), t) in all_pair_blocks(state)? {
        let r = residual(&t, blochs[k], blochs[l]);
        if report.max_residual_pair.is_none() || r > report.max_factorization_residual {
            report.max_factorization_residual = r;
            report.max_residual_pair = Some((k, l));
        }
    }
    Ok(report)
}

/// Compares a given `M^(pb)` value against every partition bound and
/// threshold for `n` qubits. The factorization fields are left empty.
pub fn classify_value(n: usize, v: f64, policy: String) -> Result<DetectionReport> {
    if !(2..=MAX_PARTITION_N).contains(&n) {
        return invalid(format!("need 2 <= n <= {MAX_PARTITION_N}, got {n}"));
    }
    if !v.is_finite() {
        return invalid(format!("M value must be finite, got {v}"));
    }
    let mut report = DetectionReport {
        n,
        policy,
        m_pb: v,
        m_bound: m_total_bound(n),
        thresholds: Thresholds::default(),
        excluded_partitions: Vec::new(),
        surviving_partitions: Vec::new(),
        not_k_product: Vec::new(),
        entangled_subset_guarantee: 1,
        depth_guarantee: None,
        depth_guarantee_as_stated: None,
        genuine_multipartite: false,
        max_factorization_residual: 0.0,
        max_residual_pair: None,
        notes: Vec::new(),
    };

    if n < 3 {
        report.notes.push(
            "partition, s_k, genuine and depth thresholds need n >= 3; only the global bound \
             on M and the factorization residual apply"
                .into(),
        );
        report.surviving_partitions = enumerate_partitions(n, None)?
            .into_iter()
            .filter(|p| !p.is_trivial())
            .map(|p| {
                let b = partition_bound(&p);
                PartitionBound(p, b)
            })
            .collect();
        return Ok(report);
    }

    for k in 2..n {
        report.thresholds.s_k.insert(k, s_threshold(n, k)?);
    }
    let genuine = genuine_threshold(n)?;
    report.thresholds.genuine = Some(genuine);
    if n >= 5 {
        for m in 1..n / 2 {
            report.thresholds.depth.insert(m, depth_threshold(n, m)?);
        }
    }

    let mut all_excluded_by_k: BTreeMap<usize, bool> = BTreeMap::new();
    for p in enumerate_partitions(n, None)? {
        if p.is_trivial() {
            continue;
        }
        let bound = partition_bound(&p);
        let excluded = v > bound + EPS_DET;
        let entry = all_excluded_by_k.entry(p.k()).or_insert(true);
        *entry &= excluded;
        let item = PartitionBound(p, bound);
        if excluded {
            report.excluded_partitions.push(item);
        } else {
            report.surviving_partitions.push(item);
        }
    }

    report.not_k_product = all_excluded_by_k
        .iter()
        .filter(|(_, all)| **all)
        .map(|(k, _)| *k)
        .collect();
    if report.not_k_product.windows(2).any(|w| w[1] != w[0] + 1)
        || report.not_k_product.last().is_some_and(|&k| k != n)
    {
        report
            .notes
            .push("k-product exclusions are not monotone in k".into());
    }
    for (&k, &s) in &report.thresholds.s_k {
        let by_threshold = v > s + EPS_DET;
        if by_threshold != report.not_k_product.contains(&k) {
            report.notes.push(format!(
                "s_{k} = {s} disagrees with the partition enumeration"
            ));
        }
    }

    report.entangled_subset_guarantee = report
        .surviving_partitions
        .iter()
        .map(|pb| pb.0.largest())
        .chain(std::iter::once(n))
        .min()
        .unwrap_or(n);

    report.genuine_multipartite = v > genuine + EPS_DET;
    if report.genuine_multipartite != (report.surviving_partitions.is_empty()) {
        report
            .notes
            .push("genuine threshold disagrees with the partition enumeration".into());
    }

    if let Some((&m, _)) = report
        .thresholds
        .depth
        .iter()
        .find(|(_, &d)| v > d + EPS_DET)
    {
        report.depth_guarantee = Some(m + 1);
        report.depth_guarantee_as_stated = Some(m);
    }
    if let Some(g) = report.depth_guarantee {
        if g > report.entangled_subset_guarantee {
            report.notes.push(format!(
                "bipartition ordering argument claims {g} but enumeration only supports {}",
                report.entangled_subset_guarantee
            ));
        }
    }
    Ok(report)
}

/// Minimum slacks and violation counts over a batch of random states in
/// random local frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressSummary {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_pair_slack: f64,
    pub min_two_term_slack: Option<f64>,
    pub min_three_term_slack: Option<f64>,
    pub min_total_slack: f64,
    pub max_pair_value: f64,
    pub max_total: f64,
    pub total_bound: f64,
    pub pair_violations: usize,
    pub two_term_violations: usize,
    pub three_term_violations: usize,
    pub total_violations: usize,
}

impl StressSummary {
    pub fn violations(&self) -> usize {
        self.pair_violations
            + self.two_term_violations
            + self.three_term_violations
            + self.total_violations
    }
}

/// Trial `i` uses the Haar state seeded with `seed + i` and random frames
/// from a separate stream of the same seed, so results do not depend on
/// scheduling.
pub fn trial_inputs(n: usize, seed: u64, trial: usize) -> Result<(PureState, Vec<LocalFrame>)> {
    let trial_seed = seed.wrapping_add(trial as u64);
    let state = make_random_haar(n, trial_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(1);
    let frames = (0..n).map(|_| LocalFrame::random(&mut rng)).collect();
    Ok((state, frames))
}

/// Runs [`monogamy_check`] on `trials` random states with random frames.
pub fn stress(n: usize, trials: usize, seed: u64) -> Result<StressSummary> {
    if !(2..=10).contains(&n) {
        return invalid(format!("stress runs need 2 <= n <= 10, got {n}"));
    }
    let reports: Vec<MonogamyReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (state, frames) = trial_inputs(n, seed, t)?;
            monogamy_check(&state, &frames)
        })
        .collect::<Result<_>>()?;

    let opt_min = |acc: Option<f64>, v: Option<f64>| match (acc, v) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let mut s = StressSummary {
        n,
        trials,
        seed,
        min_pair_slack: f64::INFINITY,
        min_two_term_slack: None,
        min_three_term_slack: None,
        min_total_slack: f64::INFINITY,
        max_pair_value: 0.0,
        max_total: 0.0,
        total_bound: m_total_bound(n),
        pair_violations: 0,
        two_term_violations: 0,
        three_term_violations: 0,
        total_violations: 0,
    };
    let violated = |slack: f64| slack < -EPS_DET;
    for r in &reports {
        s.min_pair_slack = s.min_pair_slack.min(r.pair_slack);
        s.min_two_term_slack = opt_min(s.min_two_term_slack, r.two_term_slack);
        s.min_three_term_slack = opt_min(s.min_three_term_slack, r.three_term_slack);
        s.min_total_slack = s.min_total_slack.min(r.total_slack);
        s.max_pair_value = s.max_pair_value.max(r.max_pair());
        s.max_total = s.max_total.max(r.total);
        s.pair_violations += r.pairs.iter().filter(|p| violated(2.0 - p.value)).count();
        s.two_term_violations += r.two_term.iter().filter(|t| violated(2.0 - t.sum)).count();
        s.three_term_violations += r.three_term.iter().filter(|t| violated(3.0 - t.sum)).count();
        s.total_violations += usize::from(violated(r.total_slack));
    }
    if trials == 0 {
        s.min_pair_slack = 2.0;
        s.min_total_slack = s.total_bound;
    }
    Ok(s)
}
