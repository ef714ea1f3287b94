//! Group backend: the two supported compact groups (SU(2) and 𝕋ⁿ), their
//! unitary irreducible representations, element algebra, Casimir weights,
//! and the distinguished family Δ₀ of low irreps used to build first-order
//! difference operators.

pub mod su2;

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::linalg::CMat;
use ndarray::Array2;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

// ---------------------------------------------------------------------------
// Groups
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupId {
    Su2,
    /// Flat torus ℝⁿ/ℤⁿ with characters e^{2πik·x}.
    Torus(usize),
}

impl GroupId {
    /// Manifold dimension (3 for SU(2), n for 𝕋ⁿ).
    pub fn dimension(&self) -> usize {
        match self {
            GroupId::Su2 => 3,
            GroupId::Torus(n) => *n,
        }
    }

    /// Number of left-invariant derivative axes (equals the dimension).
    pub fn n_axes(&self) -> usize {
        self.dimension()
    }

    pub fn parse(s: &str) -> Result<GroupId> {
        let s = s.trim().to_ascii_lowercase();
        if s == "su2" {
            return Ok(GroupId::Su2);
        }
        let n = if let Some(rest) = s.strip_prefix("torus:") {
            rest.parse::<usize>().ok()
        } else if let Some(rest) = s.strip_prefix('t') {
            rest.parse::<usize>().ok()
        } else {
            None
        };
        match n {
            Some(n) if n >= 1 => Ok(GroupId::Torus(n)),
            _ => Err(Error::Parse(format!("unknown group '{s}' (expected su2, t1, t2, ...)"))),
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Su2 => write!(f, "su2"),
            GroupId::Torus(n) => write!(f, "t{n}"),
        }
    }
}

impl Serialize for GroupId {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        GroupId::parse(&s).map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Irrep labels
// ---------------------------------------------------------------------------

/// Label of a unitary irreducible representation: a spin l ∈ ½ℤ for SU(2),
/// a frequency vector k ∈ ℤⁿ for the torus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IrrepLabel {
    Su2 { two_l: u32 },
    Torus { k: Vec<i64> },
}

impl IrrepLabel {
    pub fn su2(l: HalfInt) -> Result<IrrepLabel> {
        if l.twice() < 0 {
            return Err(Error::InvalidLabel(format!("negative spin {l}")));
        }
        Ok(IrrepLabel::Su2 { two_l: l.twice() as u32 })
    }

    pub fn torus(k: Vec<i64>) -> IrrepLabel {
        IrrepLabel::Torus { k }
    }

    pub fn dim(&self) -> usize {
        match self {
            IrrepLabel::Su2 { two_l } => *two_l as usize + 1,
            IrrepLabel::Torus { .. } => 1,
        }
    }

    pub fn group_of(&self) -> GroupId {
        match self {
            IrrepLabel::Su2 { .. } => GroupId::Su2,
            IrrepLabel::Torus { k } => GroupId::Torus(k.len()),
        }
    }

    pub fn validate(&self, group: GroupId) -> Result<()> {
        match (self, group) {
            (IrrepLabel::Su2 { .. }, GroupId::Su2) => Ok(()),
            (IrrepLabel::Torus { k }, GroupId::Torus(n)) if k.len() == n => Ok(()),
            _ => Err(Error::GroupMismatch {
                expected: group.to_string(),
                got: format!("{self}"),
            }),
        }
    }

    /// −λ² is the Casimir eigenvalue on this irrep: λ² = l(l+1) for SU(2),
    /// λ² = |k|² on the torus.
    pub fn lambda_sq(&self) -> f64 {
        match self {
            IrrepLabel::Su2 { two_l } => {
                let t = *two_l as f64;
                t * (t + 2.0) / 4.0
            }
            IrrepLabel::Torus { k } => k.iter().map(|&ki| (ki * ki) as f64).sum(),
        }
    }

    /// ⟨ξ⟩ = max(1, λ).
    pub fn weight(&self) -> f64 {
        self.lambda_sq().sqrt().max(1.0)
    }

    /// Largest half-integer extent of the label: l for SU(2), ‖k‖_∞ for the
    /// torus. This is the quantity compared against band limits and cutoffs.
    pub fn extent(&self) -> HalfInt {
        match self {
            IrrepLabel::Su2 { two_l } => HalfInt::from_twice(*two_l as i64),
            IrrepLabel::Torus { k } => {
                HalfInt::from_int(k.iter().map(|ki| ki.abs()).max().unwrap_or(0))
            }
        }
    }

    pub fn within(&self, cutoff: HalfInt) -> bool {
        self.extent() <= cutoff
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Su2 { two_l } => {
                write!(f, "l={}", HalfInt::from_twice(*two_l as i64))
            }
            IrrepLabel::Torus { k } => {
                let parts: Vec<String> = k.iter().map(|ki| ki.to_string()).collect();
                write!(f, "k=({})", parts.join(","))
            }
        }
    }
}

// Wire format: {"l": 1.5} or {"k": [1, 0, -2]}.
impl Serialize for IrrepLabel {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct L {
            l: HalfInt,
        }
        #[derive(Serialize)]
        struct K<'a> {
            k: &'a Vec<i64>,
        }
        match self {
            IrrepLabel::Su2 { two_l } => L { l: HalfInt::from_twice(*two_l as i64) }.serialize(ser),
            IrrepLabel::Torus { k } => K { k }.serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for IrrepLabel {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            l: Option<HalfInt>,
            k: Option<Vec<i64>>,
        }
        let r = Repr::deserialize(de)?;
        match (r.l, r.k) {
            (Some(l), None) => {
                IrrepLabel::su2(l).map_err(|e| D::Error::custom(e.to_string()))
            }
            (None, Some(k)) => Ok(IrrepLabel::torus(k)),
            _ => Err(D::Error::custom("label must have exactly one of 'l' or 'k'")),
        }
    }
}

/// All labels of extent ≤ `cutoff`, in canonical (ascending) order: spins
/// ascending for SU(2), lexicographic over the cube for the torus.
pub fn enumerate_labels(group: GroupId, cutoff: HalfInt) -> Result<Vec<IrrepLabel>> {
    if cutoff.twice() < 0 {
        return Ok(Vec::new());
    }
    match group {
        GroupId::Su2 => Ok((0..=cutoff.twice())
            .map(|t| IrrepLabel::Su2 { two_l: t as u32 })
            .collect()),
        GroupId::Torus(n) => {
            let b = cutoff
                .as_int()
                .ok_or_else(|| Error::InvalidLabel(format!("torus cutoff {cutoff} must be an integer")))?;
            let mut out = Vec::new();
            let mut k = vec![-b; n];
            loop {
                out.push(IrrepLabel::torus(k.clone()));
                // Odometer increment in lexicographic order.
                let mut axis = n;
                loop {
                    if axis == 0 {
                        return Ok(out);
                    }
                    axis -= 1;
                    if k[axis] < b {
                        k[axis] += 1;
                        for item in k.iter_mut().skip(axis + 1) {
                            *item = -b;
                        }
                        break;
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Group elements
// ---------------------------------------------------------------------------

/// A point of the group. SU(2) uses z-y-z Euler angles with γ running over
/// [0, 4π) so half-integer representations are single-valued; the torus uses
/// coordinates in [0, 1)ⁿ.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    Su2 { alpha: f64, beta: f64, gamma: f64 },
    Torus { x: Vec<f64> },
}

impl GroupElement {
    pub fn validate(&self, group: GroupId) -> Result<()> {
        match (self, group) {
            (GroupElement::Su2 { .. }, GroupId::Su2) => Ok(()),
            (GroupElement::Torus { x }, GroupId::Torus(n)) if x.len() == n => Ok(()),
            _ => Err(Error::GroupMismatch {
                expected: group.to_string(),
                got: "element of another group".into(),
            }),
        }
    }
}

pub fn identity(group: GroupId) -> GroupElement {
    match group {
        GroupId::Su2 => GroupElement::Su2 { alpha: 0.0, beta: 0.0, gamma: 0.0 },
        GroupId::Torus(n) => GroupElement::Torus { x: vec![0.0; n] },
    }
}

pub fn compose(group: GroupId, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    a.validate(group)?;
    b.validate(group)?;
    match (a, b) {
        (GroupElement::Su2 { .. }, GroupElement::Su2 { .. }) => {
            let ua = su2::matrix2(a);
            let ub = su2::matrix2(b);
            Ok(su2::element_from_matrix2(&ua.dot(&ub)))
        }
        (GroupElement::Torus { x }, GroupElement::Torus { x: y }) => Ok(GroupElement::Torus {
            x: x.iter().zip(y).map(|(xi, yi)| (xi + yi).rem_euclid(1.0)).collect(),
        }),
        _ => unreachable!("validated above"),
    }
}

pub fn inverse_element(group: GroupId, a: &GroupElement) -> Result<GroupElement> {
    a.validate(group)?;
    match a {
        GroupElement::Su2 { .. } => {
            let u = su2::matrix2(a);
            Ok(su2::element_from_matrix2(&crate::linalg::adjoint(&u)))
        }
        GroupElement::Torus { x } => Ok(GroupElement::Torus {
            x: x.iter().map(|xi| (-xi).rem_euclid(1.0)).collect(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Representations
// ---------------------------------------------------------------------------

/// The unitary matrix ξ(x) of the irrep `label` at the element `x`.
///
/// SU(2) follows the z-y-z convention ξ(α,β,γ) = e^{−iαJ₃} e^{−iβJ₂} e^{−iγJ₃}
/// with rows and columns indexed by m = −l..l ascending; torus irreps are the
/// 1×1 characters e^{2πik·x}.
pub fn irrep_matrix(group: GroupId, label: &IrrepLabel, x: &GroupElement) -> Result<CMat> {
    label.validate(group)?;
    x.validate(group)?;
    match (label, x) {
        (IrrepLabel::Su2 { two_l }, GroupElement::Su2 { alpha, beta, gamma }) => {
            Ok(su2::wigner_matrix(*two_l, *alpha, *beta, *gamma))
        }
        (IrrepLabel::Torus { k }, GroupElement::Torus { x }) => {
            let phase: f64 = k.iter().zip(x).map(|(&ki, xi)| ki as f64 * xi).sum();
            let mut m = Array2::zeros((1, 1));
            m[(0, 0)] = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase);
            Ok(m)
        }
        _ => unreachable!("validated above"),
    }
}

/// ⟨ξ⟩ = max(1, λ_ξ) where −λ_ξ² is the Casimir eigenvalue.
pub fn casimir_weight(group: GroupId, label: &IrrepLabel) -> Result<f64> {
    label.validate(group)?;
    Ok(label.weight())
}

/// Symbol of the left-invariant derivative along `axis` (1-based) on the
/// irrep `label`: i·J_axis for SU(2) (so axis 3 gives diag(im)), 2πi k_axis
/// for the torus.
pub fn derivative_symbol(group: GroupId, axis: usize, label: &IrrepLabel) -> Result<CMat> {
    label.validate(group)?;
    let n = group.n_axes();
    if axis == 0 || axis > n {
        return Err(Error::AxisOutOfRange { axis, n });
    }
    match label {
        IrrepLabel::Su2 { two_l } => Ok(su2::angular_momentum(*two_l, axis).mapv(|v| v * Complex64::i())),
        IrrepLabel::Torus { k } => {
            let mut m = Array2::zeros((1, 1));
            m[(0, 0)] = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k[axis - 1] as f64);
            Ok(m)
        }
    }
}

// ---------------------------------------------------------------------------
// The distinguished family Δ₀ and ρ²
// ---------------------------------------------------------------------------

/// Labels of the irreps generating the first-order difference family: for
/// SU(2) the adjoint irrep l=1 together with l=½ (which separates the
/// center), for 𝕋ⁿ the 2n characters ±e_j (listed +e_j, −e_j per axis).
pub fn delta0_labels(group: GroupId) -> Vec<IrrepLabel> {
    match group {
        GroupId::Su2 => vec![IrrepLabel::Su2 { two_l: 2 }, IrrepLabel::Su2 { two_l: 1 }],
        GroupId::Torus(n) => {
            let mut out = Vec::with_capacity(2 * n);
            for j in 0..n {
                for sign in [1i64, -1] {
                    let mut k = vec![0i64; n];
                    k[j] = sign;
                    out.push(IrrepLabel::torus(k));
                }
            }
            out
        }
    }
}

/// All first-order difference components (ξ₀, i, j) with 1-based matrix
/// indices: 3·3 + 2·2 = 13 triples for SU(2), 2n for the torus.
pub fn delta0_components(group: GroupId) -> Vec<(IrrepLabel, usize, usize)> {
    let mut out = Vec::new();
    for label in delta0_labels(group) {
        let d = label.dim();
        for i in 1..=d {
            for j in 1..=d {
                out.push((label.clone(), i, j));
            }
        }
    }
    out
}

/// ρ²(x) = Σ_{ξ∈Δ₀} (d_ξ − tr ξ(x)): a smooth, non-negative function
/// vanishing (to second order) only at the identity.
pub fn rho_squared(group: GroupId, x: &GroupElement) -> Result<f64> {
    x.validate(group)?;
    let mut total = Complex64::new(0.0, 0.0);
    for label in delta0_labels(group) {
        let m = irrep_matrix(group, &label, x)?;
        total += Complex64::new(label.dim() as f64, 0.0) - crate::linalg::trace(&m);
    }
    // Individual torus characters are complex; the ±k pairs make the sum real.
    debug_assert!(total.im.abs() < 1e-9, "rho^2 should be real, got {total}");
    Ok(total.re)
}
