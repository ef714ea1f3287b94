//! Named operators and their invariant symbols: the left-invariant vector
//! fields `D₁, D₂, D₃`, the Laplacian `𝓛 = D₁²+D₂²+D₃²`, the sub-Laplacian
//! `𝓛ₛ = D₁²+D₂²` and heat-type model `𝓗 = D₃ − D₁² − D₂²` on SU(2), the
//! shifted fields `X + c` with their exceptional shift set, and exact
//! truncated parametrices for the two hypoelliptic examples.
//!
//! Basis convention: `D₃` generates the diagonal one-parameter subgroup (the
//! α/γ Euler direction), so every SU(2) zoo symbol except `D₁`/`D₂`
//! themselves is diagonal in the standard ascending-`m` basis.

use num_complex::Complex64;

use crate::group::{derivative_symbol, enumerate_labels, GroupId, IrrepLabel};
use crate::linalg::{eye, hermitian_eigen, zeros, CMat};
use crate::symbols::InvariantSymbol;
use crate::{Error, HalfInt, Result};

/// Shifts closer than this to the exceptional lattice are rejected as
/// non-invertible.
pub const SINGULAR_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorId {
    /// Left-invariant field `D_axis` (1-based axis).
    VectorField(usize),
    Laplacian,
    /// `D₁² + D₂²` (SU(2) only).
    SubLaplacian,
    /// `D₃ − D₁² − D₂²` (SU(2) only).
    Heat,
    /// `D_axis + c`.
    XPlusC { axis: usize, c: Complex64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NamedOperator {
    pub id: OperatorId,
    pub group: GroupId,
}

impl NamedOperator {
    pub fn new(group: GroupId, id: OperatorId) -> Result<Self> {
        match id {
            OperatorId::SubLaplacian | OperatorId::Heat if group != GroupId::Su2 => {
                return Err(Error::UnsupportedOperator {
                    op: format!("{id:?}"),
                    group: group.to_string(),
                })
            }
            OperatorId::VectorField(axis) | OperatorId::XPlusC { axis, .. } => {
                let n = group.n_axes();
                if axis == 0 || axis > n {
                    return Err(Error::AxisOutOfRange { axis, n });
                }
            }
            _ => {}
        }
        Ok(NamedOperator { id, group })
    }

    /// Differential order of the operator (1 for fields and shifts, 2 for
    /// the second-order examples).
    pub fn order(&self) -> f64 {
        match self.id {
            OperatorId::VectorField(_) | OperatorId::XPlusC { .. } => 1.0,
            OperatorId::Laplacian | OperatorId::SubLaplacian | OperatorId::Heat => 2.0,
        }
    }
}

/// Diagonal entries of the SU(2) sub-Laplacian symbol at `(l, m)`, computed
/// in integer arithmetic: `m² − l(l+1)` as an exact quarter-integer.
fn sub_laplacian_entry(two_l: i64, two_m: i64) -> f64 {
    (two_m * two_m - two_l * (two_l + 2)) as f64 / 4.0
}

/// The symbol of a named operator on the labels up to `cutoff`.
///
/// SU(2) closed forms in the ascending-`m` basis: `D₃ ↦ diag(im)`,
/// `𝓛 ↦ −l(l+1)·I`, `𝓛ₛ ↦ diag(m² − l(l+1))`, `𝓗 ↦ diag(im + l(l+1) − m²)`;
/// `D₁`, `D₂` are the (non-diagonal) generator images. On the torus every
/// field is the character derivative `2πik_j`.
pub fn named_symbol(op: &NamedOperator, cutoff: HalfInt) -> Result<InvariantSymbol> {
    let group = op.group;
    let mut sigma = InvariantSymbol::zero(group, cutoff);
    for label in enumerate_labels(group, cutoff)? {
        let d = label.dim();
        let mat: CMat = match op.id {
            OperatorId::VectorField(axis) => derivative_symbol(group, axis, &label)?,
            OperatorId::XPlusC { axis, c } => {
                let mut m = derivative_symbol(group, axis, &label)?;
                for i in 0..d {
                    m[(i, i)] += c;
                }
                m
            }
            OperatorId::Laplacian => {
                let mut m = zeros(d, d);
                for i in 0..d {
                    m[(i, i)] = Complex64::new(-label.lambda_sq(), 0.0);
                }
                m
            }
            OperatorId::SubLaplacian => {
                let IrrepLabel::Su2 { two_l } = label else { unreachable!("validated") };
                let two_l = two_l as i64;
                let mut m = zeros(d, d);
                for i in 0..d {
                    let two_m = 2 * i as i64 - two_l;
                    m[(i, i)] = Complex64::new(sub_laplacian_entry(two_l, two_m), 0.0);
                }
                m
            }
            OperatorId::Heat => {
                let IrrepLabel::Su2 { two_l } = label else { unreachable!("validated") };
                let two_l = two_l as i64;
                let mut m = zeros(d, d);
                for i in 0..d {
                    let two_m = 2 * i as i64 - two_l;
                    m[(i, i)] = Complex64::new(
                        -sub_laplacian_entry(two_l, two_m),
                        two_m as f64 / 2.0,
                    );
                }
                m
            }
        };
        sigma.insert(label, mat)?;
    }
    Ok(sigma.with_declared_order(op.order()))
}

// ---------------------------------------------------------------------------
// Exceptional set and shifted-field inversion
// ---------------------------------------------------------------------------

/// The set of shifts `c` for which `D_axis + c` fails to be invertible: the
/// closure of the spectra of `σ_{D_axis}(ξ)` over all labels, negated. For
/// every basis axis on SU(2) this is the half-integer imaginary lattice
/// `i·½ℤ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalSet {
    /// Lattice description: `offset + i·step·ℤ`.
    pub offset: Complex64,
    pub step: f64,
    /// Explicit members with `|Im c| ≤ window`, ascending.
    pub members: Vec<Complex64>,
}

/// Compute the exceptional shifts of `X = D_axis` on SU(2) within the given
/// imaginary window, by accumulating the spectrum of the field symbol label
/// by label until the window is exhausted.
pub fn exceptional_set(axis: usize, window: f64) -> Result<ExceptionalSet> {
    let group = GroupId::Su2;
    let n = group.n_axes();
    if axis == 0 || axis > n {
        return Err(Error::AxisOutOfRange { axis, n });
    }
    if !window.is_finite() || window < 0.0 {
        return Err(Error::InvalidExponent(window));
    }
    // σ_X has spectrum i·{−l..l}; labels up to l = ⌈window⌉ (in half steps)
    // already reach every member of the window.
    let cutoff = HalfInt::from_twice((2.0 * window).ceil() as i64);
    let mut imag_parts: Vec<f64> = Vec::new();
    for label in enumerate_labels(group, cutoff)? {
        let sym = derivative_symbol(group, axis, &label)?;
        // iJ_axis is skew-Hermitian; its spectrum is i times the spectrum of
        // the Hermitian generator J_axis.
        let herm = sym.mapv(|v| v * Complex64::new(0.0, -1.0));
        let (eigs, _) = hermitian_eigen(&herm, false);
        for e in eigs {
            // X + c is singular when c = −i·e; the lattice is symmetric so
            // the sign is cosmetic, but keep the definition honest.
            let member = -e;
            if member.abs() <= window + 1e-12
                && !imag_parts.iter().any(|x| (x - member).abs() < 1e-9)
            {
                imag_parts.push(member);
            }
        }
    }
    imag_parts.sort_by(f64::total_cmp);
    Ok(ExceptionalSet {
        offset: Complex64::new(0.0, 0.0),
        step: 0.5,
        members: imag_parts
            .into_iter()
            .map(|im| Complex64::new(0.0, im))
            .collect(),
    })
}

/// Distance from `c` to the exceptional lattice `i·½ℤ`.
pub fn distance_to_exceptional(c: Complex64) -> f64 {
    let nearest = (2.0 * c.im).round() / 2.0;
    (c - Complex64::new(0.0, nearest)).norm()
}

/// The inverse symbol of `X + c` for `X = D_axis` on SU(2), truncated at
/// `cutoff`. Axis 3 inverts the diagonal entries `im + c` directly; the
/// other axes invert the shifted generator per label.
pub fn invert_x_plus_c(axis: usize, c: Complex64, cutoff: HalfInt) -> Result<InvariantSymbol> {
    let group = GroupId::Su2;
    let n = group.n_axes();
    if axis == 0 || axis > n {
        return Err(Error::AxisOutOfRange { axis, n });
    }
    if distance_to_exceptional(c) <= SINGULAR_MARGIN {
        // Name the first singular matrix entry: im + c = 0 at m = −Im c,
        // which first occurs at l = |m|.
        let two_m = (-2.0 * c.im).round() as i64;
        let m = HalfInt::from_twice(two_m);
        return Err(Error::SingularShift {
            c: format!("{c}"),
            l: m.abs(),
            m,
        });
    }
    let mut sigma = InvariantSymbol::zero(group, cutoff);
    for label in enumerate_labels(group, cutoff)? {
        let d = label.dim();
        let mat = if axis == 3 {
            let IrrepLabel::Su2 { two_l } = label else { unreachable!() };
            let two_l = two_l as i64;
            let mut m = zeros(d, d);
            for i in 0..d {
                let two_m = 2 * i as i64 - two_l;
                m[(i, i)] = Complex64::new(1.0, 0.0)
                    / (Complex64::new(0.0, two_m as f64 / 2.0) + c);
            }
            m
        } else {
            let mut shifted = derivative_symbol(group, axis, &label)?;
            for i in 0..d {
                shifted[(i, i)] += c;
            }
            crate::linalg::inverse(&shifted).ok_or_else(|| Error::SingularShift {
                c: format!("{c}"),
                l: label.extent(),
                m: HalfInt::ZERO,
            })?
        };
        sigma.insert(label, mat)?;
    }
    Ok(sigma.with_declared_order(-1.0))
}

// ---------------------------------------------------------------------------
// Parametrices
// ---------------------------------------------------------------------------

/// Exact truncated parametrix of `SubLaplacian` or `Heat`: the entrywise
/// reciprocal of the diagonal symbol where it is nonzero, and a zero block
/// at `l = 0` (the kernel, the constants). Composing the operator symbol
/// with this one gives the identity minus the `l = 0` projector — exactly,
/// as a rational identity; in floating point each diagonal product is the
/// nearest float to 1.
pub fn parametrix_symbol(op: &NamedOperator, cutoff: HalfInt) -> Result<InvariantSymbol> {
    if op.group != GroupId::Su2
        || !matches!(op.id, OperatorId::SubLaplacian | OperatorId::Heat)
    {
        return Err(Error::UnsupportedOperator {
            op: format!("{:?}", op.id),
            group: op.group.to_string(),
        });
    }
    let forward = named_symbol(op, cutoff)?;
    let mut sigma = InvariantSymbol::zero(GroupId::Su2, cutoff);
    for (label, mat) in forward.iter() {
        let d = label.dim();
        let mut inv = zeros(d, d);
        if label.extent() > HalfInt::ZERO {
            for i in 0..d {
                inv[(i, i)] = Complex64::new(1.0, 0.0) / mat[(i, i)];
            }
        }
        sigma.insert(label.clone(), inv)?;
    }
    Ok(sigma.with_declared_order(-1.0))
}

// ---------------------------------------------------------------------------
// Name registry (CLI surface)
// ---------------------------------------------------------------------------

/// Resolve a textual operator name to its symbol. Recognized names:
/// `identity`, `d<axis>`, `laplacian`, `sublaplacian`, `heat`,
/// `sublaplacian-parametrix`, `heat-parametrix`.
pub fn symbol_by_name(group: GroupId, name: &str, cutoff: HalfInt) -> Result<InvariantSymbol> {
    let lower = name.trim().to_ascii_lowercase();
    let unsupported = || Error::UnsupportedOperator {
        op: lower.clone(),
        group: group.to_string(),
    };
    match lower.as_str() {
        "identity" => {
            let mut sigma = InvariantSymbol::zero(group, cutoff);
            for label in enumerate_labels(group, cutoff)? {
                sigma.insert(label.clone(), eye(label.dim()))?;
            }
            Ok(sigma.with_declared_order(0.0))
        }
        "laplacian" => named_symbol(&NamedOperator::new(group, OperatorId::Laplacian)?, cutoff),
        "sublaplacian" => {
            named_symbol(&NamedOperator::new(group, OperatorId::SubLaplacian)?, cutoff)
        }
        "heat" => named_symbol(&NamedOperator::new(group, OperatorId::Heat)?, cutoff),
        "sublaplacian-parametrix" => {
            parametrix_symbol(&NamedOperator::new(group, OperatorId::SubLaplacian)?, cutoff)
        }
        "heat-parametrix" => {
            parametrix_symbol(&NamedOperator::new(group, OperatorId::Heat)?, cutoff)
        }
        _ => {
            if let Some(axis) = lower.strip_prefix('d').and_then(|a| a.parse::<usize>().ok()) {
                named_symbol(
                    &NamedOperator::new(group, OperatorId::VectorField(axis))?,
                    cutoff,
                )
            } else {
                Err(unsupported())
            }
        }
    }
}

/// The names `symbol_by_name` accepts for the given group, for help text.
pub fn known_names(group: GroupId) -> Vec<String> {
    let mut names: Vec<String> = vec!["identity".into(), "laplacian".into()];
    for axis in 1..=group.n_axes() {
        names.push(format!("d{axis}"));
    }
    if group == GroupId::Su2 {
        names.extend(
            ["sublaplacian", "heat", "sublaplacian-parametrix", "heat-parametrix"]
                .map(String::from),
        );
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{forward, inverse, left_derivative, FourierCoefficients};
    use crate::grid::QuadratureGrid;
    use crate::linalg::opnorm;
    use crate::symbols::{symbol_of, Symbol};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn su2_op(id: OperatorId) -> NamedOperator {
        NamedOperator::new(GroupId::Su2, id).unwrap()
    }

    #[test]
    fn closed_forms_match_the_stated_diagonals() {
        let cutoff = HalfInt::from_int(2);
        let d3 = named_symbol(&su2_op(OperatorId::VectorField(3)), cutoff).unwrap();
        let lap = named_symbol(&su2_op(OperatorId::Laplacian), cutoff).unwrap();
        let sub = named_symbol(&su2_op(OperatorId::SubLaplacian), cutoff).unwrap();
        let heat = named_symbol(&su2_op(OperatorId::Heat), cutoff).unwrap();

        // l = 2: 𝓛 ↦ −6·I₅ exactly.
        let l2 = IrrepLabel::Su2 { two_l: 4 };
        let lap2 = lap.entry(&l2).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { Complex64::new(-6.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                assert_eq!(lap2[(i, j)], expect);
            }
        }
        // l = 1: 𝓛ₛ ↦ diag(−1, −2, −1) at m = (−1, 0, 1), exactly.
        let l1 = IrrepLabel::Su2 { two_l: 2 };
        let sub1 = sub.entry(&l1).unwrap();
        for (i, expect) in [-1.0, -2.0, -1.0].into_iter().enumerate() {
            assert_eq!(sub1[(i, i)], Complex64::new(expect, 0.0));
        }
        // D₃ ↦ diag(im) and 𝓗 = D₃ − 𝓛ₛ entrywise.
        for label in enumerate_labels(GroupId::Su2, cutoff).unwrap() {
            let d = label.dim();
            let two_l = (d - 1) as i64;
            let d3m = d3.entry(&label).unwrap();
            let subm = sub.entry(&label).unwrap();
            let heatm = heat.entry(&label).unwrap();
            for i in 0..d {
                let m = (2 * i as i64 - two_l) as f64 / 2.0;
                assert_eq!(d3m[(i, i)], Complex64::new(0.0, m));
                assert_eq!(heatm[(i, i)], d3m[(i, i)] - subm[(i, i)]);
            }
        }
        // Torus: D_j ↦ [2πi k_j] exactly.
        let t2 = NamedOperator::new(GroupId::Torus(2), OperatorId::VectorField(2)).unwrap();
        let sym = named_symbol(&t2, HalfInt::from_int(3)).unwrap();
        let k = IrrepLabel::torus(vec![1, -3]);
        assert_eq!(
            sym.entry(&k).unwrap()[(0, 0)],
            Complex64::new(0.0, 2.0 * std::f64::consts::PI * -3.0)
        );
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        assert!(NamedOperator::new(GroupId::Torus(2), OperatorId::SubLaplacian).is_err());
        assert!(NamedOperator::new(GroupId::Torus(2), OperatorId::Heat).is_err());
        assert!(NamedOperator::new(GroupId::Su2, OperatorId::VectorField(4)).is_err());
        assert!(NamedOperator::new(GroupId::Torus(3), OperatorId::VectorField(3)).is_ok());
    }

    #[test]
    fn named_symbols_agree_with_probed_grid_operators() {
        // Realize 𝓛ₛ, 𝓗 and 𝓛 as compositions of left derivatives on a
        // grid and probe their symbols; the closed forms must match to 1e-9
        // on l ≤ 4. This pins the basis convention end to end.
        let cutoff = HalfInt::from_int(4);
        let grid = QuadratureGrid::get(GroupId::Su2, cutoff).unwrap();
        let labels = enumerate_labels(GroupId::Su2, cutoff).unwrap();

        type Op = Box<dyn Fn(&crate::fourier::GridFunction) -> crate::error::Result<crate::fourier::GridFunction> + Sync>;
        let sub_op: Op = Box::new(|f| {
            let d1 = left_derivative(f, 1)?;
            let d2 = left_derivative(f, 2)?;
            Ok(left_derivative(&d1, 1)?.add(&left_derivative(&d2, 2)?)?)
        });
        let heat_op: Op = Box::new(|f| {
            let d1 = left_derivative(f, 1)?;
            let d2 = left_derivative(f, 2)?;
            let second = left_derivative(&d1, 1)?.add(&left_derivative(&d2, 2)?)?;
            Ok(left_derivative(f, 3)?.sub(&second)?)
        });
        let lap_op: Op = Box::new(|f| {
            let d1 = left_derivative(f, 1)?;
            let d2 = left_derivative(f, 2)?;
            let d3 = left_derivative(f, 3)?;
            Ok(left_derivative(&d1, 1)?
                .add(&left_derivative(&d2, 2)?)?
                .add(&left_derivative(&d3, 3)?)?)
        });

        for (name, op, id) in [
            ("sublaplacian", &sub_op, OperatorId::SubLaplacian),
            ("heat", &heat_op, OperatorId::Heat),
            ("laplacian", &lap_op, OperatorId::Laplacian),
        ] {
            let probed = symbol_of(&grid, &labels, |f| op(f)).unwrap();
            let Symbol::Invariant(probed) = probed else {
                panic!("left-invariant operator probed as x-dependent");
            };
            let closed = named_symbol(&su2_op(id), cutoff).unwrap();
            for label in &labels {
                let diff = &probed.entry_or_zero(label) - &closed.entry_or_zero(label);
                let worst = diff.iter().fold(0.0f64, |m, v| m.max(v.norm()));
                assert!(worst < 1e-9, "{name} at {label}: {worst:.2e}");
            }
        }
    }

    #[test]
    fn exceptional_set_is_the_half_integer_imaginary_lattice() {
        let set = exceptional_set(3, 2.0).unwrap();
        assert_eq!(set.members.len(), 9);
        assert_eq!(set.step, 0.5);
        for (i, member) in set.members.iter().enumerate() {
            let expect = Complex64::new(0.0, -2.0 + 0.5 * i as f64);
            assert!((member - expect).norm() < 1e-12, "member {i}: {member}");
        }
        // The other axes are unitarily equivalent and give the same set.
        let set1 = exceptional_set(1, 2.0).unwrap();
        assert_eq!(set1.members.len(), 9);
        for (a, b) in set.members.iter().zip(&set1.members) {
            assert!((a - b).norm() < 1e-9);
        }
        // A real nonzero shift is never exceptional.
        assert!(distance_to_exceptional(Complex64::new(0.3, 0.0)) > 0.29);
        assert!(exceptional_set(4, 1.0).is_err());
    }

    #[test]
    fn shifted_field_inversion_matches_the_diagonal_formula() {
        let cutoff = HalfInt::from_int(3);
        let inv = invert_x_plus_c(3, Complex64::new(1.0, 0.0), cutoff).unwrap();
        for label in enumerate_labels(GroupId::Su2, cutoff).unwrap() {
            let d = label.dim();
            let two_l = (d - 1) as i64;
            let m = inv.entry(&label).unwrap();
            for i in 0..d {
                let mm = (2 * i as i64 - two_l) as f64 / 2.0;
                let expect = Complex64::new(1.0, 0.0) / Complex64::new(1.0, mm);
                assert_eq!(m[(i, i)], expect);
            }
            // ‖(X+1)⁻¹‖ per label = 1/√(m²_min + 1) ≤ 1.
            assert!(opnorm(m) <= 1.0 + 1e-15, "label {label}");
        }
    }

    #[test]
    fn gap_midpoint_norm_is_reciprocal_distance() {
        let c = Complex64::new(0.0, 0.25);
        let cutoff = HalfInt::from_int(2);
        let inv = invert_x_plus_c(3, c, cutoff).unwrap();
        let sup = enumerate_labels(GroupId::Su2, cutoff)
            .unwrap()
            .iter()
            .map(|l| opnorm(&inv.entry_or_zero(l)))
            .fold(0.0f64, f64::max);
        assert!(
            (sup - 1.0 / distance_to_exceptional(c)).abs() < 1e-12,
            "sup {sup} vs 1/dist {}",
            1.0 / distance_to_exceptional(c)
        );
        assert!((sup - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singular_shifts_are_named() {
        let err = invert_x_plus_c(3, Complex64::new(0.0, 0.5), HalfInt::from_int(2));
        match err {
            Err(Error::SingularShift { l, m, .. }) => {
                assert_eq!(l, HalfInt::from_twice(1));
                assert_eq!(m, HalfInt::from_twice(-1));
            }
            other => panic!("expected SingularShift, got {other:?}"),
        }
        // Within the margin counts as singular too.
        assert!(invert_x_plus_c(3, Complex64::new(0.0, 0.5 + 5e-10), HalfInt::ONE).is_err());
        assert!(invert_x_plus_c(3, Complex64::new(0.0, 0.5 + 5e-9), HalfInt::ONE).is_ok());
    }

    #[test]
    fn off_axis_inversion_round_trips() {
        let c = Complex64::new(0.7, 0.1);
        let cutoff = HalfInt::from_int(3);
        let inv = invert_x_plus_c(1, c, cutoff).unwrap();
        let fwd = named_symbol(
            &su2_op(OperatorId::XPlusC { axis: 1, c }),
            cutoff,
        )
        .unwrap();
        for label in enumerate_labels(GroupId::Su2, cutoff).unwrap() {
            let prod = fwd.entry_or_zero(&label).dot(&inv.entry_or_zero(&label));
            let d = label.dim();
            let resid = &prod - &eye(d);
            let worst = resid.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            assert!(worst < 1e-12, "label {label}: {worst:.2e}");
        }
    }

    #[test]
    fn shifted_inverse_round_trips_through_the_operator() {
        let cutoff = HalfInt::from_int(3);
        let grid = QuadratureGrid::get(GroupId::Su2, cutoff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let coeffs = FourierCoefficients::random(GroupId::Su2, cutoff, &mut rng).unwrap();
        let phi = inverse(&coeffs, &grid).unwrap();
        let c = Complex64::new(1.0, 0.0);
        let fwd = named_symbol(&su2_op(OperatorId::XPlusC { axis: 3, c }), cutoff).unwrap();
        let inv = invert_x_plus_c(3, c, cutoff).unwrap();
        let back = inv.op_apply(&fwd.op_apply(&phi).unwrap()).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in back.values().iter().zip(phi.values()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-9, "round trip residual {worst:.2e}");
    }

    #[test]
    fn parametrix_is_the_exact_reciprocal_off_the_kernel() {
        let cutoff = HalfInt::from_int(5);
        for id in [OperatorId::SubLaplacian, OperatorId::Heat] {
            let op = su2_op(id);
            let sigma = named_symbol(&op, cutoff).unwrap();
            let par = parametrix_symbol(&op, cutoff).unwrap();
            // l = 0 block is zero.
            assert_eq!(
                par.entry(&IrrepLabel::Su2 { two_l: 0 }).unwrap()[(0, 0)],
                Complex64::new(0.0, 0.0)
            );
            for label in enumerate_labels(GroupId::Su2, cutoff).unwrap() {
                let IrrepLabel::Su2 { two_l } = label else { unreachable!() };
                if two_l == 0 {
                    continue;
                }
                let a = sigma.entry(&label).unwrap();
                let b = par.entry(&label).unwrap();
                let prod = a.dot(b);
                let d = label.dim();
                for i in 0..d {
                    for j in 0..d {
                        if i != j {
                            // Diagonal times diagonal: off-diagonal entries
                            // are exact zeros.
                            assert_eq!(prod[(i, j)], Complex64::new(0.0, 0.0));
                        } else {
                            // The stored entries are exactly n/4 and its
                            // reciprocal, so the rational product is exactly
                            // 1; the float product is within an ulp of it.
                            assert!(
                                (prod[(i, i)] - Complex64::new(1.0, 0.0)).norm()
                                    <= 4.0 * f64::EPSILON,
                                "diag product at {label}: {}",
                                prod[(i, i)]
                            );
                            assert_eq!(
                                b[(i, i)],
                                Complex64::new(1.0, 0.0) / a[(i, i)],
                                "entry is the rounded exact reciprocal"
                            );
                        }
                    }
                }
            }
        }
        // Example value: (SubLaplacian parametrix, l=1, m=0) = 1/(0−2) = −1/2.
        let par = parametrix_symbol(&su2_op(OperatorId::SubLaplacian), HalfInt::ONE).unwrap();
        assert_eq!(
            par.entry(&IrrepLabel::Su2 { two_l: 2 }).unwrap()[(1, 1)],
            Complex64::new(-0.5, 0.0)
        );
    }

    #[test]
    fn parametrix_inverts_on_the_orthocomplement_of_constants() {
        let cutoff = HalfInt::from_int(4);
        let grid = QuadratureGrid::get(GroupId::Su2, cutoff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let mut coeffs = FourierCoefficients::random(GroupId::Su2, cutoff, &mut rng).unwrap();
        coeffs
            .insert(IrrepLabel::Su2 { two_l: 0 }, zeros(1, 1))
            .unwrap();
        let phi = inverse(&coeffs, &grid).unwrap();
        let op = su2_op(OperatorId::SubLaplacian);
        let sigma = named_symbol(&op, cutoff).unwrap();
        let par = parametrix_symbol(&op, cutoff).unwrap();
        let back = par.op_apply(&sigma.op_apply(&phi).unwrap()).unwrap();
        let resid = back.sub(&phi).unwrap();
        let scale = phi.l2_norm().max(1.0);
        assert!(
            resid.l2_norm() / scale < 1e-9,
            "residual {:.2e}",
            resid.l2_norm() / scale
        );
        // And the composed symbol kills constants: applying to 1 gives 0.
        let one = crate::fourier::GridFunction::constant(
            Arc::clone(&grid),
            Complex64::new(1.0, 0.0),
        );
        let killed = par.op_apply(&sigma.op_apply(&one).unwrap()).unwrap();
        assert!(killed.max_abs() < 1e-12);
    }

    #[test]
    fn sub_elliptic_inequality_holds_at_p_two() {
        // For u ⟂ constants: sobolev_norm(û, 1) ≤ C‖𝓛ₛ u‖₂. With the
        // ⟨ξ⟩ = max(1, λ) weight the sharp per-label constant is
        // max ⟨l⟩/(l(l+1) − m²) = 2, attained at (l, m) = (1/2, ±1/2).
        let cutoff = HalfInt::from_int(4);
        let op = su2_op(OperatorId::SubLaplacian);
        let sigma = named_symbol(&op, cutoff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let sharp = 2.0;
        for trial in 0..5 {
            let mut coeffs = FourierCoefficients::random(GroupId::Su2, cutoff, &mut rng).unwrap();
            coeffs
                .insert(IrrepLabel::Su2 { two_l: 0 }, zeros(1, 1))
                .unwrap();
            let image = sigma.apply_to_coefficients(&coeffs).unwrap();
            let lhs = crate::fourier::sobolev_norm(&coeffs, 1.0);
            let rhs = crate::fourier::plancherel_norm(&image);
            assert!(
                lhs <= sharp * rhs * (1.0 + 1e-12),
                "trial {trial}: {lhs} vs {}",
                sharp * rhs
            );
        }
        // The constant is attained: a lone coefficient at (1/2, ±1/2).
        let mut attain = FourierCoefficients::zero(GroupId::Su2, cutoff);
        let mut m = zeros(2, 2);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        attain.insert(IrrepLabel::Su2 { two_l: 1 }, m).unwrap();
        let image = sigma.apply_to_coefficients(&attain).unwrap();
        let ratio = crate::fourier::sobolev_norm(&attain, 1.0)
            / crate::fourier::plancherel_norm(&image);
        assert!((ratio - sharp).abs() < 1e-12, "ratio {ratio} vs {sharp}");
    }

    #[test]
    fn registry_resolves_names() {
        let cutoff = HalfInt::from_int(2);
        for name in known_names(GroupId::Su2) {
            assert!(
                symbol_by_name(GroupId::Su2, &name, cutoff).is_ok(),
                "name {name}"
            );
        }
        for name in known_names(GroupId::Torus(2)) {
            assert!(
                symbol_by_name(GroupId::Torus(2), &name, cutoff).is_ok(),
                "name {name}"
            );
        }
        assert!(symbol_by_name(GroupId::Torus(2), "sublaplacian", cutoff).is_err());
        assert!(symbol_by_name(GroupId::Su2, "d7", cutoff).is_err());
        assert!(symbol_by_name(GroupId::Su2, "frobnicate", cutoff).is_err());
        // forward(op_apply) of d3 matches the derivative directly.
        let grid = QuadratureGrid::get(GroupId::Su2, cutoff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let coeffs = FourierCoefficients::random(GroupId::Su2, cutoff, &mut rng).unwrap();
        let phi = inverse(&coeffs, &grid).unwrap();
        let d3 = symbol_by_name(GroupId::Su2, "d3", cutoff).unwrap();
        let via_symbol = forward(&d3.op_apply(&phi).unwrap()).unwrap();
        let via_derivative = forward(&left_derivative(&phi, 3).unwrap()).unwrap();
        for (label, mat) in via_symbol.iter() {
            let diff = mat - &via_derivative.entry_or_zero(label);
            let worst = diff.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            assert!(worst < 1e-10, "{label}: {worst:.2e}");
        }
    }
}
