//! Preferred local frames: per-qubit rotations that bring the local Bloch
//! vector onto +z.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::statevec::{Matrix2, PureState};
use crate::tensor::{bloch_of, BlochVector, PairBlock};

/// Bloch vectors at or below this length count as vanishing.
pub const EPS_BLOCH: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-10;
/// Default number of random candidate axes per zero-Bloch qubit for
/// [`ZeroPolicy::Maximize`].
pub const DEFAULT_MAXIMIZE_SAMPLES: usize = 64;

type Mat3 = [[f64; 3]; 3];

const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Proper rotation taking computational-frame vectors to local-frame ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFrame {
    r: Mat3,
}

impl Default for LocalFrame {
    fn default() -> Self {
        Self::identity()
    }
}

impl LocalFrame {
    pub fn identity() -> Self {
        Self { r: IDENTITY }
    }

    /// Validates orthogonality and `det = +1` within 1e-10.
    pub fn from_matrix(r: Mat3) -> Result<Self> {
        let frame = Self { r };
        let defect = frame.orthogonality_defect();
        if defect > ORTHO_TOL || !defect.is_finite() {
            return invalid(format!("matrix is not orthogonal (defect {defect:e})"));
        }
        let det = frame.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return invalid(format!("matrix has determinant {det}, expected +1"));
        }
        Ok(frame)
    }

    /// Rotation by `angle` (right-handed) about `axis`, which need not be
    /// normalized.
    pub fn about_axis(axis: [f64; 3], angle: f64) -> Result<Self> {
        let len = norm(axis);
        if !(len > 0.0 && len.is_finite()) {
            return invalid("rotation axis must be a non-zero finite vector");
        }
        let k = axis.map(|v| v / len);
        Ok(Self {
            r: rodrigues(k, angle.cos(), angle.sin()),
        })
    }

    /// The minimal rotation taking the direction of `a` onto +z, i.e. the
    /// rotation about `a × z`. Antiparallel input resolves to π about x.
    pub fn minimal_to_z(a: [f64; 3]) -> Result<Self> {
        let len = norm(a);
        if !(len > 0.0 && len.is_finite()) {
            return invalid("cannot align a zero vector");
        }
        let u = a.map(|v| v / len);
        // u × z = (u_y, −u_x, 0)
        let v = [u[1], -u[0], 0.0];
        let s = norm(v);
        let c = u[2];
        if s < 1e-15 {
            return Ok(if c > 0.0 {
                Self::identity()
            } else {
                Self {
                    r: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
                }
            });
        }
        Ok(Self {
            r: rodrigues(v.map(|x| x / s), c, s),
        })
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.r
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let r = &self.r;
        [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
    }

    /// The computational-frame direction that this frame calls +z.
    pub fn z_axis(&self) -> [f64; 3] {
        self.r[2]
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &LocalFrame) -> LocalFrame {
        LocalFrame {
            r: matmul(&other.r, &self.r),
        }
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let rt_r = matmul(&transpose(&self.r), &self.r);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((rt_r[i][j] - IDENTITY[i][j]).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.r;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Unit quaternion `(w, x, y, z)` with `w ≥ 0`.
    fn quaternion(&self) -> [f64; 4] {
        let r = &self.r;
        let tr = r[0][0] + r[1][1] + r[2][2];
        let q = if tr > 0.0 {
            let s = 2.0 * (1.0 + tr).sqrt();
            [
                s / 4.0,
                (r[2][1] - r[1][2]) / s,
                (r[0][2] - r[2][0]) / s,
                (r[1][0] - r[0][1]) / s,
            ]
        } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
            let s = 2.0 * (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt();
            [
                (r[2][1] - r[1][2]) / s,
                s / 4.0,
                (r[0][1] + r[1][0]) / s,
                (r[0][2] + r[2][0]) / s,
            ]
        } else if r[1][1] > r[2][2] {
            let s = 2.0 * (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt();
            [
                (r[0][2] - r[2][0]) / s,
                (r[0][1] + r[1][0]) / s,
                s / 4.0,
                (r[1][2] + r[2][1]) / s,
            ]
        } else {
            let s = 2.0 * (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt();
            [
                (r[1][0] - r[0][1]) / s,
                (r[0][2] + r[2][0]) / s,
                (r[1][2] + r[2][1]) / s,
                s / 4.0,
            ]
        };
        let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sign = if q[0] < 0.0 { -1.0 } else { 1.0 };
        q.map(|v| sign * v / len)
    }

    /// SU(2) lift `U = cos(θ/2) I − i sin(θ/2) n·σ` of the rotation by θ
    /// about n, so that `U (v·σ) U† = (R v)·σ`. The sign is fixed by taking
    /// `cos(θ/2) ≥ 0`.
    pub fn to_su2(&self) -> Matrix2 {
        let [w, x, y, z] = self.quaternion();
        [
            [Complex64::new(w, -z), Complex64::new(-y, -x)],
            [Complex64::new(y, -x), Complex64::new(w, z)],
        ]
    }

    /// Haar-random rotation.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|v| v / len);
        Self {
            r: [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - w * z),
                    2.0 * (x * z + w * y),
                ],
                [
                    2.0 * (x * y + w * z),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - w * x),
                ],
                [
                    2.0 * (x * z - w * y),
                    2.0 * (y * z + w * x),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ],
        }
    }
}

/// `c I + s [k]× + (1 − c) k kᵀ` for unit `k`.
fn rodrigues(k: [f64; 3], c: f64, s: f64) -> Mat3 {
    let t = 1.0 - c;
    let [x, y, z] = k;
    [
        [c + t * x * x, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, c + t * y * y, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, c + t * z * z],
    ]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|m| a[i][m] * b[m][j]).sum();
        }
    }
    out
}

fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// How to pick the +z axis of a qubit whose Bloch vector vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroPolicy {
    /// Keep the computational frame.
    Canonical,
    /// Use the given unit vector as +z.
    FixedAxis([f64; 3]),
    /// Search axes for the largest `M^(pb)`; see [`crate::detector::m_pb`].
    Maximize { samples: usize, seed: u64 },
}

impl Default for ZeroPolicy {
    fn default() -> Self {
        ZeroPolicy::Canonical
    }
}

impl ZeroPolicy {
    /// Fixed-axis policy; the axis is normalized.
    pub fn fixed_axis(axis: [f64; 3]) -> Result<Self> {
        let len = norm(axis);
        if !(len > 0.0 && len.is_finite()) {
            return invalid("fixed axis must be a non-zero finite vector");
        }
        Ok(ZeroPolicy::FixedAxis(axis.map(|v| v / len)))
    }

    pub fn maximize(samples: usize, seed: u64) -> Self {
        ZeroPolicy::Maximize { samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if let ZeroPolicy::FixedAxis(a) = self {
            if (norm(*a) - 1.0).abs() > 1e-10 {
                return invalid("fixed axis must have unit norm");
            }
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            ZeroPolicy::Maximize { samples, .. } => ZeroPolicy::Maximize { samples, seed },
            other => other,
        }
    }
}

impl fmt::Display for ZeroPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroPolicy::Canonical => write!(f, "canonical"),
            ZeroPolicy::FixedAxis([x, y, z]) => write!(f, "axis={x},{y},{z}"),
            ZeroPolicy::Maximize { samples, seed } => write!(f, "maximize:{samples}@{seed}"),
        }
    }
}

/// Parses `canonical`, `axis=x,y,z` and `maximize[:samples]`. The seed of a
/// maximize policy starts at 0; see [`ZeroPolicy::with_seed`].
impl FromStr for ZeroPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "canonical" {
            return Ok(ZeroPolicy::Canonical);
        }
        if let Some(rest) = s.strip_prefix("axis=") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("bad axis {rest:?}: {e}")))?;
            if parts.len() != 3 {
                return invalid(format!("axis needs three components, got {rest:?}"));
            }
            return ZeroPolicy::fixed_axis([parts[0], parts[1], parts[2]]);
        }
        if let Some(rest) = s.strip_prefix("maximize") {
            let samples = match rest.strip_prefix(':') {
                Some(v) => v
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidArgument(format!("bad sample count {v:?}: {e}")))?,
                None if rest.is_empty() => DEFAULT_MAXIMIZE_SAMPLES,
                None => return invalid(format!("unknown zero policy {s:?}")),
            };
            return Ok(ZeroPolicy::maximize(samples, 0));
        }
        invalid(format!(
            "unknown zero policy {s:?} (expected canonical, axis=x,y,z or maximize[:samples])"
        ))
    }
}

/// Frame for one qubit given its Bloch vector. Non-vanishing vectors are
/// taken to +z by the minimal rotation. Vanishing ones follow the policy;
/// `Maximize` falls back to the identity here, the detector does the search.
pub fn preferred_frame(b: BlochVector, policy: &ZeroPolicy) -> LocalFrame {
    if b.norm() > EPS_BLOCH {
        return LocalFrame::minimal_to_z(b.to_array()).expect("non-zero Bloch vector");
    }
    match policy {
        ZeroPolicy::Canonical | ZeroPolicy::Maximize { .. } => LocalFrame::identity(),
        ZeroPolicy::FixedAxis(a) => LocalFrame::minimal_to_z(*a).unwrap_or_default(),
    }
}

pub fn preferred_frames(state: &PureState, policy: &ZeroPolicy) -> Result<Vec<LocalFrame>> {
    (0..state.num_qubits())
        .map(|k| Ok(preferred_frame(bloch_of(state, k)?, policy)))
        .collect()
}

/// `R_k T R_lᵀ`.
pub fn rotate_block(t: &PairBlock, rk: &LocalFrame, rl: &LocalFrame) -> PairBlock {
    PairBlock(matmul(&matmul(&rk.r, &t.0), &transpose(&rl.r)))
}
