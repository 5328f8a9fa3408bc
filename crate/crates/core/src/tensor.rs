//! Marginals and correlation tensor components.
//!
//! Two independent routes to the two-index components `T_{0..i..j..0}`:
//! the fast route reduces the state to a two-qubit density matrix by index
//! bit manipulation and reads off `Tr(ρ σ_i⊗σ_j)`; the oracle route
//! ([`correlation_component`]) builds the full `2^n x 2^n` Pauli string and
//! takes its expectation value. The oracle is only meant for small `n`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::statevec::PureState;

/// Imaginary residue tolerated on quantities that must be real.
pub const REAL_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest qubit count accepted by the full Kronecker oracle.
pub const ORACLE_MAX_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pauli matrix by index: 0 ↦ identity, 1 ↦ σx, 2 ↦ σy, 3 ↦ σz.
pub fn pauli(index: usize) -> [[Complex64; 2]; 2] {
    let o = ZERO;
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match index {
        0 => [[one, o], [o, one]],
        1 => [[o, one], [one, o]],
        2 => [[o, -i], [i, o]],
        3 => [[one, o], [o, -one]],
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Reduced density matrix of one or two qubits, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return invalid(format!("density matrix dimension must be 2 or 4, got {dim}"));
        }
        if entries.len() != dim * dim {
            return invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            ));
        }
        Ok(Self { dim, entries })
    }

    /// `|v⟩⟨v|` for a normalized vector of length 2 or 4.
    pub fn from_pure(v: &[Complex64]) -> Result<Self> {
        let dim = v.len();
        let entries = v
            .iter()
            .flat_map(|a| v.iter().map(move |b| a * b.conj()))
            .collect();
        Self::from_entries(dim, entries)
    }

    /// Kronecker product of two single-qubit matrices.
    pub fn kron(a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if a.dim != 2 || b.dim != 2 {
            return invalid("kron expects two single-qubit density matrices");
        }
        let mut entries = vec![ZERO; 16];
        for (r, c) in (0..4).flat_map(|r| (0..4).map(move |c| (r, c))) {
            entries[r * 4 + c] = a.get(r / 2, c / 2) * b.get(r % 2, c % 2);
        }
        Self::from_entries(4, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        let mut acc = ZERO;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += self.get(i, j) * self.get(j, i);
            }
        }
        acc.re
    }

    /// `Tr(ρ O)` for an operator given row-major with the same dimension.
    fn expectation(&self, op: &[Complex64]) -> Complex64 {
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.get(i, j) * op[j * d + i];
            }
        }
        acc
    }

    fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL || !defect.is_finite() {
            return invalid(format!("density matrix is not Hermitian (defect {defect:e})"));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order. Uses the real symmetric embedding
    /// `[[A, −B], [B, A]]` of `A + iB`, whose spectrum is that of the
    /// Hermitian matrix with every eigenvalue doubled.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let d = self.dim;
        let m = 2 * d;
        let mut a = vec![0.0; m * m];
        for i in 0..d {
            for j in 0..d {
                // symmetrize to the Hermitian part first
                let h = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                a[i * m + j] = h.re;
                a[(i + d) * m + (j + d)] = h.re;
                a[i * m + (j + d)] = -h.im;
                a[(i + d) * m + j] = h.im;
            }
        }
        let mut ev = jacobi_eigenvalues(&mut a, m);
        ev.sort_by(|x, y| x.total_cmp(y));
        Ok(ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
    }

    /// Checks Hermiticity, unit trace and positivity, each within 1e-10.
    pub fn check_invariants(&self) -> Result<()> {
        self.require_hermitian()?;
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return invalid(format!("trace {tr} differs from 1"));
        }
        let min = self.eigenvalues()?[0];
        if min < -1e-10 {
            return invalid(format!("negative eigenvalue {min:e}"));
        }
        Ok(())
    }
}

/// Cyclic Jacobi rotations on a dense real symmetric matrix (row-major,
/// destroyed). Returns the diagonal after convergence.
fn jacobi_eigenvalues(a: &mut [f64], m: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Two-qubit correlation block `T[i][j] = ⟨σ_i ⊗ σ_j⟩`, with `i, j` over
/// x, y, z.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PairBlock(pub [[f64; 3]; 3]);

impl PairBlock {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    /// Sum of squares of the xx, xy, yx, yy entries.
    pub fn in_plane_sqr(&self) -> f64 {
        let t = &self.0;
        t[0][0].powi(2) + t[0][1].powi(2) + t[1][0].powi(2) + t[1][1].powi(2)
    }

    pub fn max_abs_diff(&self, other: &PairBlock) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn real_part(v: Complex64, what: &'static str) -> Result<f64> {
    if v.im.abs() > REAL_TOL || !v.im.is_finite() {
        return Err(Error::NonReal {
            what,
            residue: v.im,
        });
    }
    Ok(v.re)
}

/// Partial trace onto qubit `k`.
pub fn reduced_density_single(state: &PureState, k: usize) -> Result<DensityMatrix> {
    state.check_qubit(k)?;
    let amps = state.amplitudes();
    let bit = 1usize << state.shift(k);
    let (mut r00, mut r01, mut r11) = (0.0, ZERO, 0.0);
    for i in (0..amps.len()).filter(|i| i & bit == 0) {
        let a0 = amps[i];
        let a1 = amps[i | bit];
        r00 += a0.norm_sqr();
        r11 += a1.norm_sqr();
        r01 += a0 * a1.conj();
    }
    let entries = vec![
        Complex64::new(r00, 0.0),
        r01,
        r01.conj(),
        Complex64::new(r11, 0.0),
    ];
    DensityMatrix::from_entries(2, entries)
}

/// Partial trace onto qubits `k < l`; `k` indexes the more significant factor
/// of the four-dimensional space.
pub fn reduced_density_pair(state: &PureState, k: usize, l: usize) -> Result<DensityMatrix> {
    state.check_qubit(k)?;
    state.check_qubit(l)?;
    if k >= l {
        return invalid(format!("pair indices must satisfy k < l, got ({k}, {l})"));
    }
    let amps = state.amplitudes();
    let bk = 1usize << state.shift(k);
    let bl = 1usize << state.shift(l);
    let mut acc = [[ZERO; 4]; 4];
    for i in (0..amps.len()).filter(|i| i & (bk | bl) == 0) {
        let v = [amps[i], amps[i | bl], amps[i | bk], amps[i | bk | bl]];
        for r in 0..4 {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..4 {
                acc[r][c] += v[r] * v[c].conj();
            }
        }
    }
    DensityMatrix::from_entries(4, acc.iter().flatten().copied().collect())
}

/// `b_i = Tr(ρ σ_i)`.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return invalid("bloch_vector expects a single-qubit density matrix");
    }
    rho.require_hermitian()?;
    let mut b = [0.0; 3];
    for (i, slot) in b.iter_mut().enumerate() {
        let op: Vec<Complex64> = pauli(i + 1).iter().flatten().copied().collect();
        *slot = real_part(rho.expectation(&op), "Bloch component")?;
    }
    Ok(BlochVector::from_array(b))
}

/// `T[i][j] = Tr(ρ σ_i⊗σ_j)`.
pub fn pair_block(rho: &DensityMatrix) -> Result<PairBlock> {
    if rho.dim() != 4 {
        return invalid("pair_block expects a two-qubit density matrix");
    }
    rho.require_hermitian()?;
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let op = kron2(&pauli(i + 1), &pauli(j + 1));
            t[i][j] = real_part(rho.expectation(&op), "pair correlation")?;
        }
    }
    Ok(PairBlock(t))
}

fn kron2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> Vec<Complex64> {
    let mut out = vec![ZERO; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    out
}

/// Single-qubit Bloch vector of qubit `k` straight from the state.
pub fn bloch_of(state: &PureState, k: usize) -> Result<BlochVector> {
    bloch_vector(&reduced_density_single(state, k)?)
}

/// Two-qubit correlation block of qubits `k < l` straight from the state.
pub fn pair_block_of(state: &PureState, k: usize, l: usize) -> Result<PairBlock> {
    pair_block(&reduced_density_pair(state, k, l)?)
}

/// Full correlation tensor component `⟨ψ| σ_{μ1}⊗…⊗σ_{μn} |ψ⟩`, computed by
/// materializing the Kronecker product. For cross-validation only.
pub fn correlation_component(state: &PureState, mu: &[usize]) -> Result<f64> {
    let n = state.num_qubits();
    if mu.len() != n {
        return invalid(format!("index vector has length {}, state has {n} qubits", mu.len()));
    }
    if n > ORACLE_MAX_QUBITS {
        return invalid(format!(
            "full-tensor oracle is limited to {ORACLE_MAX_QUBITS} qubits"
        ));
    }
    if let Some(bad) = mu.iter().find(|&&m| m > 3) {
        return invalid(format!("Pauli index {bad} out of range 0..=3"));
    }

    // Kronecker product, leftmost factor = qubit 0.
    let mut op = vec![Complex64::new(1.0, 0.0)];
    let mut dim = 1usize;
    for &m in mu {
        let p = pauli(m);
        let nd = dim * 2;
        let mut next = vec![ZERO; nd * nd];
        for r in 0..dim {
            for c in 0..dim {
                let v = op[r * dim + c];
                if v == ZERO {
                    continue;
                }
                for pr in 0..2 {
                    for pc in 0..2 {
                        next[(2 * r + pr) * nd + (2 * c + pc)] = v * p[pr][pc];
                    }
                }
            }
        }
        op = next;
        dim = nd;
    }

    let psi = state.amplitudes();
    let mut acc = ZERO;
    for r in 0..dim {
        let row: Complex64 = (0..dim).map(|c| op[r * dim + c] * psi[c]).sum();
        acc += psi[r].conj() * row;
    }
    real_part(acc, "correlation component")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{
        make_basis_state, make_dicke, make_ghz, make_plus_product, make_random_haar,
    };

    const TOL: f64 = 1e-10;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_matrix(rho: &DensityMatrix, expected: &[f64]) {
        let d = rho.dim();
        for r in 0..d {
            for col in 0..d {
                let got = rho.get(r, col);
                assert!(
                    (got - c(expected[r * d + col])).norm() < TOL,
                    "({r},{col}): {got} vs {}",
                    expected[r * d + col]
                );
            }
        }
    }

    fn assert_bloch(b: BlochVector, expected: [f64; 3]) {
        for (g, e) in b.to_array().iter().zip(expected) {
            assert!((g - e).abs() < TOL, "{b:?} vs {expected:?}");
        }
    }

    fn assert_block(t: &PairBlock, expected: [[f64; 3]; 3]) {
        assert!(t.max_abs_diff(&PairBlock(expected)) < TOL, "{t:?} vs {expected:?}");
    }

    #[test]
    fn single_marginals() {
        let zp = make_basis_state(1, "0")
            .unwrap()
            .tensor(&make_plus_product(1).unwrap())
            .unwrap();
        assert_matrix(&reduced_density_single(&zp, 0).unwrap(), &[1.0, 0.0, 0.0, 0.0]);

        let ghz = make_ghz(3).unwrap();
        for k in 0..3 {
            assert_matrix(&reduced_density_single(&ghz, k).unwrap(), &[0.5, 0.0, 0.0, 0.5]);
        }

        // W: qubit 0 excited in one of three terms.
        let w = make_dicke(3, 1).unwrap();
        assert_matrix(
            &reduced_density_single(&w, 0).unwrap(),
            &[2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0],
        );
        assert!(reduced_density_single(&w, 3).is_err());
    }

    #[test]
    fn pair_marginals() {
        let s = make_basis_state(2, "00")
            .unwrap()
            .tensor(&make_plus_product(1).unwrap())
            .unwrap();
        let mut expected = [0.0; 16];
        expected[0] = 1.0;
        assert_matrix(&reduced_density_pair(&s, 0, 1).unwrap(), &expected);

        let mut expected = [0.0; 16];
        expected[0] = 0.5;
        expected[15] = 0.5;
        assert_matrix(&reduced_density_pair(&make_ghz(3).unwrap(), 0, 1).unwrap(), &expected);

        // (1/3)(|01⟩+|10⟩)(⟨01|+⟨10|) + (1/3)|00⟩⟨00|
        let t = 1.0 / 3.0;
        let expected = [
            t, 0.0, 0.0, 0.0, //
            0.0, t, t, 0.0, //
            0.0, t, t, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        ];
        assert_matrix(&reduced_density_pair(&make_dicke(3, 1).unwrap(), 0, 1).unwrap(), &expected);
    }

    #[test]
    fn pair_marginal_rejects_bad_indices() {
        let s = make_ghz(3).unwrap();
        assert!(reduced_density_pair(&s, 1, 1).is_err());
        assert!(reduced_density_pair(&s, 2, 1).is_err());
        assert!(reduced_density_pair(&s, 0, 3).is_err());
    }

    #[test]
    fn bloch_examples() {
        let mixed = DensityMatrix::from_entries(2, vec![c(0.5), c(0.0), c(0.0), c(0.5)]).unwrap();
        assert_bloch(bloch_vector(&mixed).unwrap(), [0.0, 0.0, 0.0]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(&[c(h), c(h)]).unwrap();
        assert_bloch(bloch_vector(&plus).unwrap(), [1.0, 0.0, 0.0]);

        let diag =
            DensityMatrix::from_entries(2, vec![c(2.0 / 3.0), c(0.0), c(0.0), c(1.0 / 3.0)])
                .unwrap();
        assert_bloch(bloch_vector(&diag).unwrap(), [0.0, 0.0, 1.0 / 3.0]);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let bad = DensityMatrix::from_entries(2, vec![c(0.5), c(0.3), c(0.0), c(0.5)]).unwrap();
        assert!(matches!(bloch_vector(&bad), Err(Error::InvalidArgument(_))));
        let mut entries = vec![c(0.0); 16];
        entries[0] = c(1.0);
        entries[1] = Complex64::new(0.0, 0.2);
        let bad = DensityMatrix::from_entries(4, entries).unwrap();
        assert!(pair_block(&bad).is_err());
        assert!(pair_block(&DensityMatrix::from_entries(2, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap()).is_err());
    }

    #[test]
    fn pair_block_examples() {
        let ghz = pair_block_of(&make_ghz(3).unwrap(), 0, 1).unwrap();
        assert_block(&ghz, [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(&[c(h), c(h)]).unwrap();
        let pp = DensityMatrix::kron(&plus, &plus).unwrap();
        assert_block(
            &pair_block(&pp).unwrap(),
            [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        );

        let w = pair_block_of(&make_dicke(3, 1).unwrap(), 0, 2).unwrap();
        let t = 2.0 / 3.0;
        assert_block(&w, [[t, 0.0, 0.0], [0.0, t, 0.0], [0.0, 0.0, -1.0 / 3.0]]);
    }

    #[test]
    fn correlation_component_examples() {
        for seed in 0..5 {
            let s = make_random_haar(3, seed).unwrap();
            assert!((correlation_component(&s, &[0, 0, 0]).unwrap() - 1.0).abs() < TOL);
        }
        let plus = make_plus_product(3).unwrap();
        assert!((correlation_component(&plus, &[1, 1, 0]).unwrap() - 1.0).abs() < TOL);
        let ghz = make_ghz(3).unwrap();
        assert!((correlation_component(&ghz, &[1, 1, 1]).unwrap() - 1.0).abs() < TOL);
        assert!(correlation_component(&ghz, &[1, 1]).is_err());
        assert!(correlation_component(&ghz, &[1, 4, 0]).is_err());
    }

    #[test]
    fn marginals_satisfy_density_invariants() {
        for seed in 0..20 {
            let s = make_random_haar(4, seed).unwrap();
            for k in 0..4 {
                let rho = reduced_density_single(&s, k).unwrap();
                rho.check_invariants().unwrap();
                assert!(bloch_vector(&rho).unwrap().norm() <= 1.0 + 1e-10);
                for l in k + 1..4 {
                    let rho = reduced_density_pair(&s, k, l).unwrap();
                    rho.check_invariants().unwrap();
                    let t = pair_block(&rho).unwrap();
                    assert!(t.0.iter().flatten().all(|v| v.abs() <= 1.0 + 1e-10));
                    assert!(t.frobenius_sqr() <= 3.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let w = reduced_density_pair(&make_dicke(3, 1).unwrap(), 0, 1).unwrap();
        let ev = w.eigenvalues().unwrap();
        let expected = [0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        let bad = DensityMatrix::from_entries(2, vec![c(1.5), c(0.0), c(0.0), c(-0.5)]).unwrap();
        assert!(bad.check_invariants().is_err());
    }

    #[test]
    fn ghz_marginals_are_mixed() {
        let ghz = make_ghz(3).unwrap();
        assert!((reduced_density_single(&ghz, 1).unwrap().purity() - 0.5).abs() < TOL);
        assert!((reduced_density_pair(&ghz, 0, 2).unwrap().purity() - 0.5).abs() < TOL);
    }

    #[test]
    fn marginal_consistency_with_oracle() {
        for seed in 0..10 {
            let s = make_random_haar(4, 1000 + seed).unwrap();
            for k in 0..4 {
                let b = bloch_of(&s, k).unwrap().to_array();
                for i in 0..3 {
                    let mut mu = vec![0; 4];
                    mu[k] = i + 1;
                    let oracle = correlation_component(&s, &mu).unwrap();
                    assert!((b[i] - oracle).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn product_states_factorize() {
        for seed in 0..10 {
            let a = make_random_haar(2, 2 * seed).unwrap();
            let b = make_random_haar(2, 2 * seed + 1).unwrap();
            let s = a.tensor(&b).unwrap();
            for k in 0..2 {
                for l in 2..4 {
                    let t = pair_block_of(&s, k, l).unwrap();
                    let bk = bloch_of(&s, k).unwrap().to_array();
                    let bl = bloch_of(&s, l).unwrap().to_array();
                    for i in 0..3 {
                        for j in 0..3 {
                            assert!((t.get(i, j) - bk[i] * bl[j]).abs() < TOL);
                        }
                    }
                }
            }
        }
    }
}
