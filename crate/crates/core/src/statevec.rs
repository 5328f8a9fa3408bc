//! Dense pure states of `n` qubits.
//!
//! Basis index convention: qubit 0 is the most significant bit of the index,
//! i.e. the leftmost tensor factor. Every other module relies on this.

use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Squared-norm tolerance guaranteed by every constructor.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance of the unitarity check in [`PureState::apply_local_unitary`].
pub const UNITARY_TOL: f64 = 1e-10;
/// State files whose norm deviates by less than this are accepted silently.
pub const LOAD_NORM_TOL: f64 = 1e-9;
/// State files whose norm deviates by less than this are renormalized with a
/// warning; anything beyond is rejected.
pub const LOAD_RENORM_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_QUBITS: usize = 20;
pub const MAX_QUBITS_ENV: &str = "ENTMON_MAX_QUBITS";

/// 2x2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Largest qubit count any constructor accepts. Defaults to
/// [`DEFAULT_MAX_QUBITS`]; overridden once per process by `ENTMON_MAX_QUBITS`.
pub fn max_qubits() -> usize {
    static CAP: OnceLock<usize> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(MAX_QUBITS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v >= 1 && v < usize::BITS as usize)
            .unwrap_or(DEFAULT_MAX_QUBITS)
    })
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("a state needs at least one qubit");
    }
    let cap = max_qubits();
    if n > cap {
        return invalid(format!(
            "{n} qubits exceeds the cap of {cap} (set {MAX_QUBITS_ENV} to raise it)"
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector that is already normalized within
    /// [`NORM_TOL`].
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        check_qubits(n)?;
        let sq = norm_sqr(&amps);
        if (sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Norm { norm: sq.sqrt() });
        }
        Ok(Self { n, amps })
    }

    /// Rescales any non-zero amplitude vector to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        check_qubits(n)?;
        let norm = norm_sqr(&amps).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Norm { norm });
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Bit position of `qubit` inside a basis index.
    pub(crate) fn shift(&self, qubit: usize) -> usize {
        self.n - 1 - qubit
    }

    pub(crate) fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return invalid(format!(
                "qubit index {qubit} out of range for a {}-qubit state",
                self.n
            ));
        }
        Ok(())
    }

    /// Applies a single-qubit unitary to the tensor factor `qubit`.
    pub fn apply_local_unitary(&self, qubit: usize, u: &Matrix2) -> Result<Self> {
        self.check_qubit(qubit)?;
        check_unitary(u)?;
        let bit = 1usize << self.shift(qubit);
        let mut out = self.amps.clone();
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | bit];
            out[i] = u[0][0] * a0 + u[0][1] * a1;
            out[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(Self { n: self.n, amps: out })
    }

    /// `self ⊗ other`, with `self`'s qubits first.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        check_qubits(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self {
            n: self.n + other.n,
            amps,
        })
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return invalid(format!(
            "amplitude vector length {len} is not 2^n with n >= 1"
        ));
    }
    Ok(len.trailing_zeros() as usize)
}

fn check_unitary(u: &Matrix2) -> Result<()> {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            // (U†U)_ij
            let v = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    if worst > UNITARY_TOL || !worst.is_finite() {
        return invalid(format!("matrix is not unitary (deviation {worst:e})"));
    }
    Ok(())
}

pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    a.tensor(b)
}

pub fn apply_local_unitary(state: &PureState, qubit: usize, u: &Matrix2) -> Result<PureState> {
    state.apply_local_unitary(qubit, u)
}

/// Computational basis state. `bits[0]` is qubit 0.
pub fn make_basis_state(n: usize, bits: &str) -> Result<PureState> {
    check_qubits(n)?;
    if bits.len() != n {
        return invalid(format!("bit string {bits:?} does not have length {n}"));
    }
    let mut index = 0usize;
    for c in bits.chars() {
        index <<= 1;
        match c {
            '0' => {}
            '1' => index |= 1,
            _ => return invalid(format!("bit string {bits:?} contains {c:?}")),
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[index] = Complex64::new(1.0, 0.0);
    Ok(PureState { n, amps })
}

/// Dicke state with `e` excitations: equal weight on every basis index of
/// Hamming weight `e`.
pub fn make_dicke(n: usize, e: usize) -> Result<PureState> {
    check_qubits(n)?;
    if e > n {
        return invalid(format!("excitation count {e} exceeds qubit count {n}"));
    }
    let weight = 1.0 / (crate::binomial(n, e) as f64).sqrt();
    let amps = (0..1usize << n)
        .map(|i| {
            if i.count_ones() as usize == e {
                Complex64::new(weight, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(PureState { n, amps })
}

pub fn make_ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return invalid("GHZ state needs at least two qubits");
    }
    check_qubits(n)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(h, 0.0);
    amps[(1 << n) - 1] = Complex64::new(h, 0.0);
    Ok(PureState { n, amps })
}

/// `|+⟩^⊗n`.
pub fn make_plus_product(n: usize) -> Result<PureState> {
    check_qubits(n)?;
    let w = (0.5f64).powf(n as f64 / 2.0);
    Ok(PureState {
        n,
        amps: vec![Complex64::new(w, 0.0); 1 << n],
    })
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
/// Deterministic in `seed`.
pub fn make_random_haar(n: usize, seed: u64) -> Result<PureState> {
    check_qubits(n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    PureState::normalized(amps)
}

/// On-disk representation: `{"n": <int>, "amplitudes": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&PureState> for StateFile {
    fn from(state: &PureState) -> Self {
        StateFile {
            n: state.n,
            amplitudes: state.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// Result of loading a state file. `renormalized_from` carries the original
/// norm when it had to be corrected beyond [`LOAD_NORM_TOL`].
#[derive(Clone, Debug)]
pub struct LoadedState {
    pub state: PureState,
    pub renormalized_from: Option<f64>,
}

impl StateFile {
    pub fn into_state(self) -> Result<LoadedState> {
        check_qubits(self.n)?;
        let expected = 1usize << self.n;
        if self.amplitudes.len() != expected {
            return invalid(format!(
                "n = {} requires {expected} amplitude pairs, found {}",
                self.n,
                self.amplitudes.len()
            ));
        }
        if self.amplitudes.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("amplitudes must be finite");
        }
        let amps: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let norm = norm_sqr(&amps).sqrt();
        let deviation = (norm - 1.0).abs();
        if deviation > LOAD_RENORM_TOL {
            return Err(Error::Norm { norm });
        }
        let state = PureState::normalized(amps)?;
        Ok(LoadedState {
            state,
            renormalized_from: (deviation > LOAD_NORM_TOL).then_some(norm),
        })
    }
}

pub fn parse_state_json(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text)?;
    file.into_state()
}

pub fn load_state_file(path: impl AsRef<Path>) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)?;
    parse_state_json(&text)
}

pub fn state_to_json(state: &PureState) -> String {
    serde_json::to_string(&StateFile::from(state)).expect("state file serialization")
}

/// Common single-qubit gates.
pub mod gates {
    use super::Matrix2;
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const I1: Complex64 = Complex64::new(1.0, 0.0);

    pub fn identity() -> Matrix2 {
        [[I1, O], [O, I1]]
    }

    pub fn hadamard() -> Matrix2 {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }

    pub fn pauli_x() -> Matrix2 {
        [[O, I1], [I1, O]]
    }

    pub fn pauli_y() -> Matrix2 {
        let i = Complex64::new(0.0, 1.0);
        [[O, -i], [i, O]]
    }

    pub fn pauli_z() -> Matrix2 {
        [[I1, O], [O, -I1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;
    const S2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_amps(state: &PureState, expected: &[Complex64]) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (i, (a, b)) in state.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - b).norm() < TOL, "index {i}: {a} vs {b}");
        }
    }

    fn support(state: &PureState, value: f64, indices: &[usize]) {
        for (i, a) in state.amplitudes().iter().enumerate() {
            let want = if indices.contains(&i) { value } else { 0.0 };
            assert!((a - c(want)).norm() < TOL, "index {i}: {a} vs {want}");
        }
    }

    fn max_diff(a: &PureState, b: &PureState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn basis_states_follow_msb_convention() {
        assert_amps(&make_basis_state(1, "0").unwrap(), &[c(1.0), c(0.0)]);
        support(&make_basis_state(2, "10").unwrap(), 1.0, &[2]);
        support(&make_basis_state(3, "111").unwrap(), 1.0, &[7]);
    }

    #[test]
    fn basis_state_rejects_bad_bits() {
        assert!(matches!(
            make_basis_state(2, "1"),
            Err(Error::InvalidArgument(_))
        ));
        assert!(make_basis_state(2, "12").is_err());
        assert!(make_basis_state(0, "").is_err());
    }

    #[test]
    fn dicke_examples() {
        support(&make_dicke(3, 1).unwrap(), 1.0 / 3f64.sqrt(), &[1, 2, 4]);
        support(&make_dicke(4, 0).unwrap(), 1.0, &[0]);
        support(
            &make_dicke(4, 2).unwrap(),
            1.0 / 6f64.sqrt(),
            &[3, 5, 6, 9, 10, 12],
        );
        support(&make_dicke(3, 3).unwrap(), 1.0, &[7]);
        assert!(make_dicke(3, 4).is_err());
    }

    #[test]
    fn dicke_one_is_w_state() {
        for n in 2..8 {
            let w: Vec<usize> = (0..n).map(|q| 1 << q).collect();
            support(&make_dicke(n, 1).unwrap(), 1.0 / (n as f64).sqrt(), &w);
        }
    }

    #[test]
    fn ghz_examples() {
        assert_amps(&make_ghz(2).unwrap(), &[c(S2), c(0.0), c(0.0), c(S2)]);
        support(&make_ghz(3).unwrap(), S2, &[0, 7]);
        support(&make_ghz(5).unwrap(), S2, &[0, 31]);
        assert!(make_ghz(1).is_err());
    }

    #[test]
    fn plus_product_examples() {
        assert_amps(&make_plus_product(1).unwrap(), &[c(S2), c(S2)]);
        assert_amps(&make_plus_product(2).unwrap(), &[c(0.5); 4]);
        let w = 1.0 / (2.0 * 2f64.sqrt());
        assert_amps(&make_plus_product(3).unwrap(), &[c(w); 8]);
    }

    #[test]
    fn haar_is_deterministic_and_normalized() {
        let a = make_random_haar(3, 99).unwrap();
        let b = make_random_haar(3, 99).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < TOL);
        assert_ne!(a, make_random_haar(3, 100).unwrap());
    }

    #[test]
    fn haar_first_amplitude_mean_is_quarter() {
        // Monte-Carlo oracle: by unitary invariance E|ψ_0|² = 1/2^n.
        let draws = 10_000;
        let samples: Vec<f64> = (draws..2 * draws)
            .map(|s| make_random_haar(2, s).unwrap().amplitudes()[0].norm_sqr())
            .collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let stderr = (var / draws as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * stderr, "mean {mean} stderr {stderr}");
    }

    #[test]
    fn tensor_product_examples() {
        let zero = make_basis_state(1, "0").unwrap();
        let one = make_basis_state(1, "1").unwrap();
        assert_eq!(zero.tensor(&one).unwrap(), make_basis_state(2, "01").unwrap());

        let plus = make_plus_product(1).unwrap();
        assert!(max_diff(&plus.tensor(&plus).unwrap(), &make_plus_product(2).unwrap()) < TOL);

        // (|01⟩+|10⟩)/√2 ⊗ |0⟩ = (|010⟩+|100⟩)/√2
        let d = make_dicke(2, 1).unwrap().tensor(&zero).unwrap();
        support(&d, S2, &[2, 4]);
    }

    #[test]
    fn local_unitary_examples() {
        let zero = make_basis_state(1, "0").unwrap();
        assert_eq!(
            zero.apply_local_unitary(0, &gates::identity()).unwrap(),
            zero
        );
        let plus = zero.apply_local_unitary(0, &gates::hadamard()).unwrap();
        assert!(max_diff(&plus, &make_plus_product(1).unwrap()) < TOL);

        // X on qubit 1 of GHZ_3 flips the middle bit: 000 -> 010, 111 -> 101.
        let flipped = make_ghz(3)
            .unwrap()
            .apply_local_unitary(1, &gates::pauli_x())
            .unwrap();
        support(&flipped, S2, &[2, 5]);
    }

    #[test]
    fn local_unitary_rejects_bad_input() {
        let s = make_ghz(3).unwrap();
        assert!(s.apply_local_unitary(3, &gates::hadamard()).is_err());
        let mut bad = gates::hadamard();
        bad[0][0] = c(1.0);
        assert!(matches!(
            s.apply_local_unitary(0, &bad),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn state_file_round_trip_and_validation() {
        let s = make_dicke(3, 1).unwrap();
        let loaded = parse_state_json(&state_to_json(&s)).unwrap();
        assert!(loaded.renormalized_from.is_none());
        assert!(max_diff(&loaded.state, &s) < TOL);

        // slightly off: renormalized with a note
        let text = r#"{"n": 1, "amplitudes": [[1.0000005, 0.0], [0.0, 0.0]]}"#;
        let loaded = parse_state_json(text).unwrap();
        assert!(loaded.renormalized_from.is_some());
        assert!((loaded.state.norm_sqr() - 1.0).abs() < TOL);

        let text = r#"{"n": 1, "amplitudes": [[1.1, 0.0], [0.0, 0.0]]}"#;
        assert!(matches!(parse_state_json(text), Err(Error::Norm { .. })));

        let text = r#"{"n": 2, "amplitudes": [[1.0, 0.0], [0.0, 0.0]]}"#;
        assert!(matches!(
            parse_state_json(text),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(parse_state_json("{"), Err(Error::Json(_))));
    }

    fn arb_state(max_n: usize) -> impl Strategy<Value = PureState> {
        (1..=max_n, any::<u64>()).prop_map(|(n, seed)| make_random_haar(n, seed).unwrap())
    }

    fn arb_unitary() -> impl Strategy<Value = Matrix2> {
        // exp(-iθ n·σ/2) with a random global phase
        (0.0..std::f64::consts::TAU, -1.0..1.0f64, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU)
            .prop_map(|(theta, cz, phi, phase): (f64, f64, f64, f64)| {
                let sz = (1.0 - cz * cz).sqrt();
                let (nx, ny, nz) = (sz * phi.cos(), sz * phi.sin(), cz);
                let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let g = Complex64::from_polar(1.0, phase);
                let i = Complex64::new(0.0, 1.0);
                [
                    [g * (c(cs) - i * sn * nz), g * (-i * sn * Complex64::new(nx, -ny))],
                    [g * (-i * sn * Complex64::new(nx, ny)), g * (c(cs) + i * sn * nz)],
                ]
            })
    }

    proptest! {
        #[test]
        fn tensor_product_is_associative(a in arb_state(3), b in arb_state(3), c in arb_state(3)) {
            let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
            let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
            prop_assert!(max_diff(&left, &right) < TOL);
            prop_assert!((left.norm_sqr() - 1.0).abs() < TOL);
        }

        #[test]
        fn local_unitaries_on_distinct_qubits_commute(
            seed in any::<u64>(),
            u in arb_unitary(),
            v in arb_unitary(),
            i in 0usize..4,
            j in 0usize..4,
        ) {
            prop_assume!(i != j);
            let s = make_random_haar(4, seed).unwrap();
            let uv = s.apply_local_unitary(i, &u).unwrap().apply_local_unitary(j, &v).unwrap();
            let vu = s.apply_local_unitary(j, &v).unwrap().apply_local_unitary(i, &u).unwrap();
            prop_assert!(max_diff(&uv, &vu) < TOL);
            prop_assert!((uv.norm_sqr() - 1.0).abs() < TOL);
        }
    }
}
