//! Closed-form `M^(pb)` for named state families.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frames::ZeroPolicy;
use crate::statevec::{make_dicke, make_ghz, make_plus_product, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Dicke { n: usize, e: usize },
    Ghz { n: usize },
    W { n: usize },
    PlusProduct { n: usize },
}

impl FamilySpec {
    /// Builds a spec from a family name as accepted on the command line.
    pub fn from_name(name: &str, n: usize, e: Option<usize>) -> Result<Self> {
        let spec = match name {
            "dicke" => match e {
                Some(e) => FamilySpec::Dicke { n, e },
                None => return invalid("the dicke family needs an excitation count"),
            },
            "ghz" => FamilySpec::Ghz { n },
            "w" => FamilySpec::W { n },
            "plus" | "plus-product" => FamilySpec::PlusProduct { n },
            other => {
                return invalid(format!(
                    "unknown family {other:?} (expected dicke, ghz, w or plus)"
                ))
            }
        };
        if e.is_some() && !matches!(spec, FamilySpec::Dicke { .. }) {
            return invalid(format!("family {name:?} takes no excitation count"));
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        match *self {
            FamilySpec::Dicke { n, .. }
            | FamilySpec::Ghz { n }
            | FamilySpec::W { n }
            | FamilySpec::PlusProduct { n } => n,
        }
    }

    pub fn build(&self) -> Result<PureState> {
        match *self {
            FamilySpec::Dicke { n, e } => make_dicke(n, e),
            FamilySpec::Ghz { n } => make_ghz(n),
            FamilySpec::W { n } => make_dicke(n, 1),
            FamilySpec::PlusProduct { n } => make_plus_product(n),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Dicke { n, e } => write!(f, "dicke(n={n}, e={e})"),
            FamilySpec::Ghz { n } => write!(f, "ghz(n={n})"),
            FamilySpec::W { n } => write!(f, "w(n={n})"),
            FamilySpec::PlusProduct { n } => write!(f, "plus-product(n={n})"),
        }
    }
}

/// A closed-form value together with whether the arguments lie in the domain
/// for which the formula is asserted (odd `n`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    pub in_stated_domain: bool,
}

/// `4 e² (n−e)² / (n (n−1))`.
pub fn dicke_m_pb(n: usize, e: usize) -> Result<ClosedForm> {
    if n < 2 {
        return invalid(format!("dicke closed form needs n >= 2, got {n}"));
    }
    if e > n {
        return invalid(format!("excitation count {e} exceeds n = {n}"));
    }
    let (nf, ef) = (n as f64, e as f64);
    Ok(ClosedForm {
        value: 4.0 * ef * ef * (nf - ef).powi(2) / (nf * (nf - 1.0)),
        in_stated_domain: n % 2 == 1,
    })
}

/// Maximizing excitation `(n−1)/2` and `(n+1)²(n−1)/(4n)` for odd `n ≥ 3`.
pub fn dicke_max_m_pb(n: usize) -> Result<(usize, f64)> {
    if n < 3 || n % 2 == 0 {
        return invalid(format!("dicke maximum is stated for odd n >= 3, got {n}"));
    }
    let nf = n as f64;
    Ok(((n - 1) / 2, (nf + 1.0).powi(2) * (nf - 1.0) / (4.0 * nf)))
}

/// Analytic `M^(pb)` where one exists for the family and policy.
pub fn predicted_m_pb(spec: &FamilySpec, policy: &ZeroPolicy) -> Option<f64> {
    match *spec {
        FamilySpec::Dicke { n, e } => dicke_prediction(n, e, policy),
        FamilySpec::W { n } => dicke_prediction(n, 1, policy),
        FamilySpec::PlusProduct { .. } => Some(0.0),
        FamilySpec::Ghz { .. } => matches!(policy, ZeroPolicy::Canonical).then_some(0.0),
    }
}

fn dicke_prediction(n: usize, e: usize, policy: &ZeroPolicy) -> Option<f64> {
    // With 2e = n every Bloch vector vanishes and the value depends on the
    // chosen axes; the formula holds for the computational z axis only.
    if 2 * e == n && !matches!(policy, ZeroPolicy::Canonical) {
        return None;
    }
    dicke_m_pb(n, e).ok().map(|c| c.value)
}
