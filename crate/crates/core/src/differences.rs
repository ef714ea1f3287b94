//! Difference operators acting on invariant symbols.
//!
//! The general definition is the conjugated multiplication of Eq.-(5) type:
//! `Qσ = 𝓕(q · 𝓕⁻¹σ)`, where `q` vanishes at the identity to the order of
//! the difference. The first-order family comes from the matrix
//! coefficients of the Δ₀ representations, `q_{ij}(x) = ξ₀(x)_{ij} − δ_{ij}`,
//! and the second-order `laplace_difference` from `ρ²(x) = Σ_{Δ₀}(d_ξ − tr ξ(x))`.
//!
//! On the torus every character multiplication is an exact index shift on
//! the dual lattice, so the named operators use the closed forms
//! (`first_difference` with label `κ` maps `σ(k) ↦ σ(k−κ) − σ(k)`; note the
//! label `−e_j` therefore produces the forward difference
//! `σ(k+e_j) − σ(k)`), while the generic [`difference_apply`] always runs
//! the spatial transform–multiply–transform route; the two agree to
//! rounding, which the tests pin down.
//!
//! Truncation bookkeeping: applying a factor of band `b` grows the stored
//! range by `b` (the output grid pairs the product exactly) and shrinks the
//! trusted range by `b`, unless the input symbol is exactly supported, in
//! which case everything stays exact.

use num_complex::Complex64;

use crate::fourier::{forward, inverse, synth_at, FourierCoefficients, GridFunction};
use crate::grid::QuadratureGrid;
use crate::group::{delta0_components, identity, irrep_matrix, GroupElement, GroupId, IrrepLabel};
use crate::symbols::InvariantSymbol;
use crate::{Error, HalfInt, Result};

/// Threshold for the vanishing check `q(identity) = 0` on factors claiming
/// order ≥ 1.
const ORDER_TOL: f64 = 1e-12;

/// An ordered list of first-order difference factors `(ξ₀, i, j)`; powers
/// are expressed by repetition. The composite order is the list length.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceSpec {
    group: GroupId,
    factors: Vec<(IrrepLabel, usize, usize)>,
}

impl DifferenceSpec {
    pub fn new(group: GroupId, factors: Vec<(IrrepLabel, usize, usize)>) -> Result<Self> {
        let allowed = delta0_components(group);
        for f in &factors {
            if !allowed.contains(f) {
                return Err(Error::InvalidDifferenceFactor(format!(
                    "({}, {}, {})",
                    f.0, f.1, f.2
                )));
            }
        }
        Ok(DifferenceSpec { group, factors })
    }

    pub fn empty(group: GroupId) -> Self {
        DifferenceSpec {
            group,
            factors: Vec::new(),
        }
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn factors(&self) -> &[(IrrepLabel, usize, usize)] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// Total label growth of the composite: the sum of factor extents.
    pub fn band(&self) -> HalfInt {
        self.factors
            .iter()
            .fold(HalfInt::ZERO, |acc, f| acc + f.0.extent())
    }

    /// Parse the CLI textual form: whitespace-separated factors
    /// `group:label:(i,j)[^power]`, e.g. `su2:1:(2,3)^2 su2:1/2:(1,1)` or
    /// `t3:+e2:(1,1)`. Torus labels are written `+ej` / `-ej`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut group: Option<GroupId> = None;
        let mut factors = Vec::new();
        for token in text.split_whitespace() {
            let (body, power) = match token.split_once('^') {
                Some((b, p)) => (
                    b,
                    p.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad power in `{token}`")))?,
                ),
                None => (token, 1),
            };
            let mut parts = body.splitn(3, ':');
            let group_str = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("empty factor `{token}`")))?;
            let label_str = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing label in `{token}`")))?;
            let idx_str = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("missing (i,j) in `{token}`")))?;
            let g = GroupId::parse(group_str)?;
            match group {
                None => group = Some(g),
                Some(prev) if prev != g => {
                    return Err(Error::GroupMismatch {
                        expected: prev.to_string(),
                        got: g.to_string(),
                    })
                }
                _ => {}
            }
            let label = match g {
                GroupId::Su2 => {
                    let l = HalfInt::parse(label_str)
                        .ok_or_else(|| Error::Parse(format!("spin label `{label_str}`")))?;
                    IrrepLabel::su2(l)?
                }
                GroupId::Torus(n) => {
                    let (sign, rest) = if let Some(r) = label_str.strip_prefix('+') {
                        (1i64, r)
                    } else if let Some(r) = label_str.strip_prefix('-') {
                        (-1i64, r)
                    } else {
                        return Err(Error::Parse(format!("torus label `{label_str}`")));
                    };
                    let axis: usize = rest
                        .strip_prefix('e')
                        .and_then(|a| a.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("torus label `{label_str}`")))?;
                    if axis == 0 || axis > n {
                        return Err(Error::AxisOutOfRange { axis, n });
                    }
                    let mut k = vec![0i64; n];
                    k[axis - 1] = sign;
                    IrrepLabel::torus(k)
                }
            };
            let inner = idx_str
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("indices `{idx_str}`")))?;
            let (i_str, j_str) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("indices `{idx_str}`")))?;
            let i: usize = i_str
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("index `{i_str}`")))?;
            let j: usize = j_str
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("index `{j_str}`")))?;
            for _ in 0..power {
                factors.push((label.clone(), i, j));
            }
        }
        let group = group.ok_or_else(|| Error::Parse("empty difference spec".into()))?;
        DifferenceSpec::new(group, factors)
    }
}

impl std::fmt::Display for DifferenceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "id");
        }
        let mut first = true;
        for (label, i, j) in &self.factors {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            match label {
                IrrepLabel::Su2 { .. } => {
                    write!(f, "{}:{}:({},{})", self.group, label.extent(), i, j)?
                }
                IrrepLabel::Torus { k } => {
                    let axis = k.iter().position(|&v| v != 0).unwrap_or(0);
                    let sign = if k.get(axis).copied().unwrap_or(0) >= 0 { '+' } else { '-' };
                    write!(f, "{}:{}e{}:({},{})", self.group, sign, axis + 1, i, j)?
                }
            }
        }
        Ok(())
    }
}

fn shrink_trust(sigma: &InvariantSymbol, band: HalfInt, stored_out: HalfInt) -> Result<HalfInt> {
    if sigma.exact_support() {
        return Ok(stored_out);
    }
    let trusted = sigma.trusted_limit() - band;
    if trusted < HalfInt::ZERO {
        return Err(Error::BudgetExhausted {
            trusted: sigma.trusted_limit(),
            shrink: band,
        });
    }
    Ok(trusted)
}

/// The spatial route shared by the named SU(2) differences: synthesize the
/// kernel on a grid that pairs the product exactly, multiply by `q`, and
/// transform back.
fn spatial_difference<Q>(sigma: &InvariantSymbol, q_band: HalfInt, qfn: Q) -> Result<InvariantSymbol>
where
    Q: Fn(&GroupElement) -> Complex64 + Sync,
{
    let stored_out = sigma.support_limit() + q_band;
    let trusted_out = shrink_trust(sigma, q_band, stored_out)?;
    let grid = QuadratureGrid::get(sigma.group(), stored_out)?;
    let kernel = inverse(&sigma.kernel_coefficients(), &grid)?;
    let q = GridFunction::from_fn(std::sync::Arc::clone(&grid), qfn).with_band_hint(q_band);
    let product = kernel.mul_pointwise(&q)?;
    let out_hat = forward(&product)?;
    let mut out = InvariantSymbol::from_coefficients(&out_hat, sigma.exact_support());
    out.set_trusted_limit(trusted_out);
    Ok(out)
}

/// Generic difference operator `Qσ = 𝓕(q · 𝓕⁻¹σ)`.
///
/// `q` may live on any grid of the same group; it is re-synthesized onto a
/// grid large enough to pair `q · 𝓕⁻¹σ` exactly. Its band is taken from the
/// band hint when present, else from its grid. With `claimed_order ≥ 1`,
/// `q(identity)` must vanish (|q(1)| ≤ 1e-12), otherwise the call is
/// rejected: a "difference" whose factor does not vanish at the identity
/// has order zero.
pub fn difference_apply(
    q: &GridFunction,
    sigma: &InvariantSymbol,
    claimed_order: usize,
) -> Result<InvariantSymbol> {
    if q.group() != sigma.group() {
        return Err(Error::GroupMismatch {
            expected: sigma.group().to_string(),
            got: q.group().to_string(),
        });
    }
    let q_hat = forward(q)?;
    if claimed_order >= 1 {
        let q_at_identity = synth_at(&q_hat, &identity(q.group()))?;
        if q_at_identity.norm() > ORDER_TOL {
            return Err(Error::OrderViolation {
                value: q_at_identity.norm(),
            });
        }
    }
    let q_band = q.band_limit_hint().unwrap_or_else(|| q.grid().band_limit());
    // Trim the coefficients to the declared band; content beyond the hint is
    // the caller's rounding noise by contract.
    let mut q_trim = FourierCoefficients::zero(q.group(), q_band);
    for (label, mat) in q_hat.iter() {
        if label.extent() <= q_band {
            q_trim.insert(label.clone(), mat.clone())?;
        }
    }
    let stored_out = sigma.support_limit() + q_band;
    let trusted_out = shrink_trust(sigma, q_band, stored_out)?;
    let grid = QuadratureGrid::get(sigma.group(), stored_out)?;
    let kernel = inverse(&sigma.kernel_coefficients(), &grid)?;
    let q_big = inverse(&q_trim, &grid)?;
    let product = kernel.mul_pointwise(&q_big)?;
    let out_hat = forward(&product)?;
    let mut out = InvariantSymbol::from_coefficients(&out_hat, sigma.exact_support());
    out.set_trusted_limit(trusted_out);
    Ok(out)
}

/// First-order difference for one Δ₀ component `(ξ₀, i, j)` (1-based matrix
/// indices), with `q_{ij}(x) = ξ₀(x)_{ij} − δ_{ij}`.
///
/// On the torus this is the exact index shift `σ(k−κ) − σ(k)` for the
/// character label `κ`; on SU(2) it runs the spatial route.
pub fn first_difference(
    factor: &(IrrepLabel, usize, usize),
    sigma: &InvariantSymbol,
) -> Result<InvariantSymbol> {
    let group = sigma.group();
    if !delta0_components(group).contains(factor) {
        return Err(Error::InvalidDifferenceFactor(format!(
            "({}, {}, {})",
            factor.0, factor.1, factor.2
        )));
    }
    let (label0, i, j) = factor.clone();
    match group {
        GroupId::Torus(_) => {
            let IrrepLabel::Torus { k: kappa } = &label0 else {
                unreachable!("Δ₀ labels match the group");
            };
            let stored_out = sigma.support_limit() + HalfInt::ONE;
            let trusted_out = shrink_trust(sigma, HalfInt::ONE, stored_out)?;
            let mut out = InvariantSymbol::zero(group, stored_out);
            for label in crate::group::enumerate_labels(group, stored_out)? {
                let IrrepLabel::Torus { k } = &label else { unreachable!() };
                let shifted: Vec<i64> = k.iter().zip(kappa).map(|(a, b)| a - b).collect();
                let value = &sigma.entry_or_zero(&IrrepLabel::torus(shifted)) - &sigma.entry_or_zero(&label);
                out.insert(label, value)?;
            }
            out.set_trusted_limit(trusted_out);
            Ok(out)
        }
        GroupId::Su2 => {
            let q_band = label0.extent();
            let (row, col) = (i - 1, j - 1);
            let delta = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            spatial_difference(sigma, q_band, move |x| {
                irrep_matrix(group, &label0, x).expect("Δ₀ label is valid")[(row, col)] - delta
            })
        }
    }
}

/// Second-order difference associated to `ρ²`: on the torus the literal
/// closed form `2n σ(k) − Σ_j (σ(k+e_j) + σ(k−e_j))`, on SU(2) the spatial
/// route with `q = ρ²`.
pub fn laplace_difference(sigma: &InvariantSymbol) -> Result<InvariantSymbol> {
    let group = sigma.group();
    match group {
        GroupId::Torus(n) => {
            let stored_out = sigma.support_limit() + HalfInt::ONE;
            let trusted_out = shrink_trust(sigma, HalfInt::ONE, stored_out)?;
            let mut out = InvariantSymbol::zero(group, stored_out);
            for label in crate::group::enumerate_labels(group, stored_out)? {
                let IrrepLabel::Torus { k } = &label else { unreachable!() };
                let mut value = sigma.entry_or_zero(&label).mapv(|v| v * (2 * n) as f64);
                for axis in 0..n {
                    for sign in [1i64, -1] {
                        let mut shifted = k.clone();
                        shifted[axis] += sign;
                        value = &value - &sigma.entry_or_zero(&IrrepLabel::torus(shifted));
                    }
                }
                out.insert(label, value)?;
            }
            out.set_trusted_limit(trusted_out);
            Ok(out)
        }
        GroupId::Su2 => {
            debug_assert!(
                crate::group::rho_squared(group, &identity(group)).unwrap().abs() < 1e-12
            );
            spatial_difference(sigma, HalfInt::ONE, move |x| {
                Complex64::new(
                    crate::group::rho_squared(group, x).expect("grid elements are valid"),
                    0.0,
                )
            })
        }
    }
}

/// Composite difference: the factors of `spec` applied in list order (the
/// first factor acts first). Factor order is preserved as given; no
/// canonical reordering happens even though the operators commute in exact
/// arithmetic.
pub fn multi_difference(spec: &DifferenceSpec, sigma: &InvariantSymbol) -> Result<InvariantSymbol> {
    if spec.group() != sigma.group() {
        return Err(Error::GroupMismatch {
            expected: sigma.group().to_string(),
            got: spec.group().to_string(),
        });
    }
    let mut current = sigma.clone();
    for factor in spec.factors() {
        current = first_difference(factor, &current)?;
    }
    Ok(current)
}

/// First-order difference of an x-dependent symbol: the factor acts on the
/// frequency dependence of every node slice independently.
pub fn full_first_difference(
    factor: &(IrrepLabel, usize, usize),
    sigma: &crate::symbols::FullSymbol,
) -> Result<crate::symbols::FullSymbol> {
    let slices = (0..sigma.node_count())
        .map(|node| first_difference(factor, sigma.slice(node)))
        .collect::<Result<Vec<_>>>()?;
    crate::symbols::FullSymbol::new(std::sync::Arc::clone(sigma.grid()), slices)
}

/// Composite difference of an x-dependent symbol, factors applied in list
/// order per node slice.
pub fn full_multi_difference(
    spec: &DifferenceSpec,
    sigma: &crate::symbols::FullSymbol,
) -> Result<crate::symbols::FullSymbol> {
    if spec.group() != sigma.group() {
        return Err(Error::GroupMismatch {
            expected: sigma.group().to_string(),
            got: spec.group().to_string(),
        });
    }
    let slices = (0..sigma.node_count())
        .map(|node| multi_difference(spec, sigma.slice(node)))
        .collect::<Result<Vec<_>>>()?;
    crate::symbols::FullSymbol::new(std::sync::Arc::clone(sigma.grid()), slices)
}

/// The Torus(3) combination `σ(k) − (1/6) Σ_j (σ(k+e_j) + σ(k−e_j))`,
/// computed as `laplace_difference / 6` (the two coincide identically for
/// `n = 3` since `2n = 6`).
pub fn t3_second_difference(sigma: &InvariantSymbol) -> Result<InvariantSymbol> {
    if sigma.group() != GroupId::Torus(3) {
        return Err(Error::GroupMismatch {
            expected: "t3".into(),
            got: sigma.group().to_string(),
        });
    }
    Ok(laplace_difference(sigma)?.scale(Complex64::new(1.0 / 6.0, 0.0)))
}
