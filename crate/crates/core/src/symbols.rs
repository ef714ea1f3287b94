//! Matrix-valued symbols and the quantization that turns them into
//! operators.
//!
//! An operator `A` acting on functions over the group is characterised by
//! `σ_A(x, ξ) = ξ(x)* (Aξ)(x)`, where `A` is applied entrywise to the matrix
//! coefficients of `ξ`; the operator is recovered by
//! `Aφ(x) = Σ_ξ d_ξ tr(ξ(x) σ_A(x,ξ) φ̂(ξ))`. When `σ` does not depend on
//! `x` (a Fourier multiplier) the application reduces to coefficient-wise
//! left multiplication `φ̂(ξ) ↦ σ(ξ) φ̂(ξ)`.
//!
//! Truncation bookkeeping: a symbol stores entries densely up to
//! `support_limit`; entries up to `trusted_limit` carry correct values of
//! the underlying symbol, while entries between the two are artifacts of a
//! finite computation (kept for transparency, excluded from suprema).
//! `exact_support = true` asserts the underlying symbol is literally zero
//! beyond `support_limit`, in which case everything stored is exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::fourier::{forward, inverse, FourierCoefficients, GridFunction};
use crate::grid::QuadratureGrid;
use crate::group::{enumerate_labels, irrep_matrix, GroupId, IrrepLabel};
use crate::linalg::{adjoint, CMat};
use crate::{Error, HalfInt, Result};

#[derive(Clone, Debug)]
pub struct InvariantSymbol {
    group: GroupId,
    entries: BTreeMap<IrrepLabel, CMat>,
    support_limit: HalfInt,
    trusted_limit: HalfInt,
    exact_support: bool,
    declared_order: Option<f64>,
}

impl InvariantSymbol {
    /// A symbol with no entries (reads as zero everywhere within the limit).
    pub fn zero(group: GroupId, support_limit: HalfInt) -> Self {
        InvariantSymbol {
            group,
            entries: BTreeMap::new(),
            support_limit,
            trusted_limit: support_limit,
            exact_support: true,
            declared_order: None,
        }
    }

    /// Build from explicit entries. `exact_support = false` marks the symbol
    /// as a truncation of something extending past `support_limit`.
    pub fn from_entries(
        group: GroupId,
        support_limit: HalfInt,
        entries: BTreeMap<IrrepLabel, CMat>,
        exact_support: bool,
    ) -> Result<Self> {
        for (label, m) in &entries {
            label.validate(group)?;
            if label.extent() > support_limit {
                return Err(Error::SupportExceedsGrid {
                    support: label.extent(),
                    band_limit: support_limit,
                });
            }
            let d = label.dim();
            if m.dim() != (d, d) {
                return Err(Error::InvalidLabel(format!(
                    "matrix shape {:?} does not match dim {d} of {label}",
                    m.dim()
                )));
            }
        }
        Ok(InvariantSymbol {
            group,
            entries,
            support_limit,
            trusted_limit: support_limit,
            exact_support,
            declared_order: None,
        })
    }

    pub fn from_coefficients(c: &FourierCoefficients, exact_support: bool) -> Self {
        InvariantSymbol {
            group: c.group(),
            entries: c.iter().map(|(l, m)| (l.clone(), m.clone())).collect(),
            support_limit: c.support_limit(),
            trusted_limit: c.support_limit(),
            exact_support,
            declared_order: None,
        }
    }

    /// View the entry table as Fourier coefficients of the convolution
    /// kernel (same data, different hat).
    pub fn kernel_coefficients(&self) -> FourierCoefficients {
        let mut c = FourierCoefficients::zero(self.group, self.support_limit);
        for (l, m) in &self.entries {
            c.insert(l.clone(), m.clone()).expect("entries validated at construction");
        }
        c
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn support_limit(&self) -> HalfInt {
        self.support_limit
    }

    pub fn trusted_limit(&self) -> HalfInt {
        self.trusted_limit
    }

    pub fn exact_support(&self) -> bool {
        self.exact_support
    }

    pub fn declared_order(&self) -> Option<f64> {
        self.declared_order
    }

    pub fn with_declared_order(mut self, n: f64) -> Self {
        self.declared_order = Some(n);
        self
    }

    pub(crate) fn set_trusted_limit(&mut self, t: HalfInt) {
        self.trusted_limit = t;
    }

    pub fn entry(&self, label: &IrrepLabel) -> Option<&CMat> {
        self.entries.get(label)
    }

    pub fn entry_or_zero(&self, label: &IrrepLabel) -> CMat {
        match self.entries.get(label) {
            Some(m) => m.clone(),
            None => Array2::zeros((label.dim(), label.dim())),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IrrepLabel, &CMat)> {
        self.entries.iter()
    }

    pub fn insert(&mut self, label: IrrepLabel, m: CMat) -> Result<()> {
        label.validate(self.group)?;
        if label.extent() > self.support_limit {
            return Err(Error::SupportExceedsGrid {
                support: label.extent(),
                band_limit: self.support_limit,
            });
        }
        self.entries.insert(label, m);
        Ok(())
    }

    /// Entrywise conjugate transpose — the symbol of the adjoint operator.
    pub fn adjoint_symbol(&self) -> Self {
        InvariantSymbol {
            group: self.group,
            entries: self
                .entries
                .iter()
                .map(|(l, m)| (l.clone(), adjoint(m)))
                .collect(),
            support_limit: self.support_limit,
            trusted_limit: self.trusted_limit,
            exact_support: self.exact_support,
            declared_order: self.declared_order,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        InvariantSymbol {
            group: self.group,
            entries: self
                .entries
                .iter()
                .map(|(l, m)| (l.clone(), m.mapv(|v| v * c)))
                .collect(),
            support_limit: self.support_limit,
            trusted_limit: self.trusted_limit,
            exact_support: self.exact_support,
            declared_order: self.declared_order,
        }
    }

    /// Verify the symbol stores an entry for every label up to `cutoff`.
    pub fn require_dense(&self, cutoff: HalfInt) -> Result<()> {
        // Exactly supported symbols read as zero beyond their entries by
        // definition, so density is automatic.
        if self.exact_support {
            return Ok(());
        }
        let mut missing = Vec::new();
        for label in enumerate_labels(self.group, cutoff)? {
            if !self.entries.contains_key(&label) {
                missing.push(label.to_string());
                if missing.len() > 3 {
                    missing.push("…".into());
                    break;
                }
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::NotDense {
                needed: cutoff,
                missing: missing.join(", "),
            })
        }
    }

    /// Apply the multiplier to a band-limited function: transform, multiply
    /// each coefficient by `σ(ξ)` on the left, synthesize on the same grid.
    pub fn op_apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        if phi.group() != self.group {
            return Err(Error::GroupMismatch {
                expected: self.group.to_string(),
                got: phi.group().to_string(),
            });
        }
        if phi.grid().band_limit() > self.support_limit {
            return Err(Error::LabelRangeInsufficient {
                limit: self.support_limit,
                needed: phi.grid().band_limit(),
            });
        }
        let c = forward(phi)?;
        inverse(&self.apply_to_coefficients(&c)?, phi.grid())
    }

    /// The coefficient-side action `φ̂(ξ) ↦ σ(ξ)·φ̂(ξ)` without any grid
    /// round trip.
    pub fn apply_to_coefficients(&self, c: &FourierCoefficients) -> Result<FourierCoefficients> {
        if c.group() != self.group {
            return Err(Error::GroupMismatch {
                expected: self.group.to_string(),
                got: c.group().to_string(),
            });
        }
        if c.support_limit() > self.support_limit {
            return Err(Error::LabelRangeInsufficient {
                limit: self.support_limit,
                needed: c.support_limit(),
            });
        }
        let mut out = FourierCoefficients::zero(self.group, c.support_limit());
        for (label, mat) in c.iter() {
            let sigma = self.entry_or_zero(label);
            out.insert(label.clone(), sigma.dot(mat))?;
        }
        Ok(out)
    }
}

/// An `x`-dependent symbol: one invariant slice per grid node, over a common
/// label range.
#[derive(Clone, Debug)]
pub struct FullSymbol {
    grid: Arc<QuadratureGrid>,
    slices: Vec<InvariantSymbol>,
}

impl FullSymbol {
    pub fn new(grid: Arc<QuadratureGrid>, slices: Vec<InvariantSymbol>) -> Result<Self> {
        if slices.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} symbol slices for {} nodes",
                slices.len(),
                grid.node_count()
            )));
        }
        let group = grid.group();
        for s in &slices {
            if s.group() != group {
                return Err(Error::GroupMismatch {
                    expected: group.to_string(),
                    got: s.group().to_string(),
                });
            }
        }
        Ok(FullSymbol { grid, slices })
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn group(&self) -> GroupId {
        self.grid.group()
    }

    pub fn slice(&self, node: usize) -> &InvariantSymbol {
        &self.slices[node]
    }

    pub fn node_count(&self) -> usize {
        self.slices.len()
    }

    pub fn support_limit(&self) -> HalfInt {
        self.slices
            .iter()
            .map(|s| s.support_limit())
            .min()
            .unwrap_or(HalfInt::ZERO)
    }

    pub fn trusted_limit(&self) -> HalfInt {
        self.slices
            .iter()
            .map(|s| s.trusted_limit())
            .min()
            .unwrap_or(HalfInt::ZERO)
    }

    /// The node-dependence of one symbol entry as a grid function.
    pub fn entry_function(&self, label: &IrrepLabel, i: usize, j: usize) -> Result<GridFunction> {
        let values: Vec<Complex64> = self
            .slices
            .iter()
            .map(|s| s.entry_or_zero(label)[(i, j)])
            .collect();
        GridFunction::new(Arc::clone(&self.grid), values)
    }

    /// Check every entry's node-dependence is band-limited on this grid:
    /// the forward/inverse round trip must reproduce it to `tol` relative.
    pub fn validate_x_band_limited(&self, tol: f64) -> Result<()> {
        let labels: Vec<IrrepLabel> = self.slices[0].iter().map(|(l, _)| l.clone()).collect();
        for label in &labels {
            let d = label.dim();
            for i in 0..d {
                for j in 0..d {
                    let f = self.entry_function(label, i, j)?;
                    let back = inverse(&forward(&f)?, &self.grid)?;
                    let scale = f.l2_norm().max(1e-300);
                    let residual = f.sub(&back)?.l2_norm() / scale;
                    if residual > tol {
                        return Err(Error::Aliasing {
                            residual,
                            context: format!("x-dependence of σ(·,{label})[{i},{j}]"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply a left-invariant x-derivative to the node dependence of every
    /// entry, spectrally. The label dependence is untouched.
    pub fn x_derivative(&self, axis: usize) -> Result<FullSymbol> {
        let labels: Vec<IrrepLabel> = self.slices[0].iter().map(|(l, _)| l.clone()).collect();
        let mut new_entries: Vec<BTreeMap<IrrepLabel, CMat>> =
            vec![BTreeMap::new(); self.slices.len()];
        for label in &labels {
            let d = label.dim();
            for node_map in new_entries.iter_mut() {
                node_map.insert(label.clone(), Array2::zeros((d, d)));
            }
            for i in 0..d {
                for j in 0..d {
                    let f = self.entry_function(label, i, j)?;
                    let df = crate::fourier::left_derivative(&f, axis)?;
                    for (node, v) in df.values().iter().enumerate() {
                        new_entries[node].get_mut(label).unwrap()[(i, j)] = *v;
                    }
                }
            }
        }
        let template = &self.slices[0];
        let slices = new_entries
            .into_iter()
            .map(|entries| {
                let mut s = InvariantSymbol::from_entries(
                    self.group(),
                    template.support_limit(),
                    entries,
                    template.exact_support(),
                )
                .expect("labels copied from a valid symbol");
                s.set_trusted_limit(template.trusted_limit());
                s
            })
            .collect();
        FullSymbol::new(Arc::clone(&self.grid), slices)
    }

    /// `Aφ(x) = Σ_ξ d_ξ tr(ξ(x) σ(x,ξ) φ̂(ξ))`, node by node.
    ///
    /// The sum runs over the labels the symbol carries: a probed symbol only
    /// represents the operator on its own label set, so modes of `phi`
    /// beyond that support are annihilated.
    pub fn op_apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        if !Arc::ptr_eq(phi.grid(), &self.grid) {
            return Err(Error::GridMismatch(
                "function and full symbol live on different grids".into(),
            ));
        }
        let c = forward(phi)?;
        let limit = self.support_limit();
        let labels: Vec<(IrrepLabel, CMat)> = c
            .iter()
            .filter(|(l, _)| l.extent() <= limit)
            .map(|(l, m)| (l.clone(), m.clone()))
            .collect();
        let values: Vec<Complex64> = (0..self.grid.node_count())
            .into_par_iter()
            .map(|node| {
                let x = self.grid.element(node);
                let slice = &self.slices[node];
                let mut acc = Complex64::new(0.0, 0.0);
                for (label, phat) in &labels {
                    let xi = irrep_matrix(self.group(), label, &x)
                        .expect("labels validated against group");
                    let sp = slice.entry_or_zero(label).dot(phat);
                    let d = label.dim();
                    let mut tr = Complex64::new(0.0, 0.0);
                    for i in 0..d {
                        for k in 0..d {
                            tr += xi[(i, k)] * sp[(k, i)];
                        }
                    }
                    acc += tr * d as f64;
                }
                acc
            })
            .collect();
        GridFunction::new(Arc::clone(&self.grid), values)
    }
}

/// Either kind of symbol, as returned by [`symbol_of`].
#[derive(Clone, Debug)]
pub enum Symbol {
    Invariant(InvariantSymbol),
    Full(FullSymbol),
}

impl Symbol {
    pub fn op_apply(&self, phi: &GridFunction) -> Result<GridFunction> {
        match self {
            Symbol::Invariant(s) => s.op_apply(phi),
            Symbol::Full(s) => s.op_apply(phi),
        }
    }

    pub fn expect_invariant(self) -> InvariantSymbol {
        match self {
            Symbol::Invariant(s) => s,
            Symbol::Full(_) => panic!("expected an invariant symbol"),
        }
    }

    pub fn expect_full(self) -> FullSymbol {
        match self {
            Symbol::Full(s) => s,
            Symbol::Invariant(_) => panic!("expected a full (x-dependent) symbol"),
        }
    }
}

/// Node-to-node deviation threshold, relative to the symbol's scale, below
/// which `symbol_of` declares the recovered symbol invariant.
const INVARIANCE_TOL: f64 = 1e-9;
/// Relative round-trip residual above which the probed operator is deemed
/// to leak outside the grid's band-limited space.
const ALIASING_TOL: f64 = 1e-9;

/// Recover the symbol of a black-box linear operator by probing it with the
/// matrix coefficients of each requested label: `σ_A(x,ξ) = ξ(x)* (Aξ)(x)`.
///
/// If the recovered symbol's node dependence is below `1e-9` relative at
/// every label, the invariant symbol (Haar average over nodes) is returned;
/// otherwise the full per-node symbol is. Operators whose output leaks
/// outside the grid's band-limited space are rejected with an aliasing
/// error, detected via the forward/inverse round-trip residual. Torus grids
/// are critically sampled (the round trip is the DFT, a bijection on node
/// values), so only oversampled grids — SU(2) — can trip the detector.
pub fn symbol_of<F>(
    grid: &Arc<QuadratureGrid>,
    labels: &[IrrepLabel],
    a: F,
) -> Result<Symbol>
where
    F: Fn(&GridFunction) -> Result<GridFunction> + Sync,
{
    let group = grid.group();
    let n_nodes = grid.node_count();
    let mut support = HalfInt::ZERO;
    for label in labels {
        label.validate(group)?;
        support = support.max(label.extent());
    }
    if support > grid.band_limit() {
        return Err(Error::SupportExceedsGrid {
            support,
            band_limit: grid.band_limit(),
        });
    }

    // Per label: probe, then per-node σ(x) = ξ(x)* (Aξ)(x).
    struct Probed {
        label: IrrepLabel,
        per_node: Vec<CMat>,
        mean: CMat,
        deviation: f64,
        scale: f64,
    }
    let probed: Vec<Result<Probed>> = labels
        .par_iter()
        .map(|label| {
            let d = label.dim();
            // ξ evaluated at every node, reused for probing and for ξ(x)*.
            let xi_at: Vec<CMat> = (0..n_nodes)
                .map(|node| irrep_matrix(group, label, &grid.element(node)))
                .collect::<Result<_>>()?;
            let mut a_of_xi: Vec<CMat> = vec![Array2::zeros((d, d)); n_nodes];
            for i in 0..d {
                for j in 0..d {
                    let u = GridFunction::new(
                        Arc::clone(grid),
                        xi_at.iter().map(|m| m[(i, j)]).collect(),
                    )?;
                    let w = a(&u)?;
                    let round = inverse(&forward(&w)?, grid)?;
                    let scale = w.l2_norm().max(1e-300);
                    let residual = w.sub(&round)?.l2_norm() / scale;
                    if residual > ALIASING_TOL {
                        return Err(Error::Aliasing {
                            residual,
                            context: format!("A applied to coefficient ({label})[{i},{j}]"),
                        });
                    }
                    for (node, v) in w.values().iter().enumerate() {
                        a_of_xi[node][(i, j)] = *v;
                    }
                }
            }
            let per_node: Vec<CMat> = (0..n_nodes)
                .map(|node| adjoint(&xi_at[node]).dot(&a_of_xi[node]))
                .collect();
            // Haar-weighted node average and worst node deviation from it.
            let mut mean: CMat = Array2::zeros((d, d));
            for (node, m) in per_node.iter().enumerate() {
                let w = grid.haar_weight(node);
                mean = &mean + &m.mapv(|v| v * w);
            }
            let mut deviation = 0.0f64;
            let mut scale = 0.0f64;
            for m in &per_node {
                for (v, mu) in m.iter().zip(mean.iter()) {
                    deviation = deviation.max((v - mu).norm());
                    scale = scale.max(v.norm());
                }
            }
            Ok(Probed {
                label: label.clone(),
                per_node,
                mean,
                deviation,
                scale,
            })
        })
        .collect();
    let probed: Vec<Probed> = probed.into_iter().collect::<Result<_>>()?;

    let overall_scale = probed.iter().fold(0.0f64, |m, p| m.max(p.scale)).max(1e-300);
    let invariant = probed
        .iter()
        .all(|p| p.deviation <= INVARIANCE_TOL * overall_scale);

    if invariant {
        let mut entries = BTreeMap::new();
        for p in probed {
            entries.insert(p.label, p.mean);
        }
        Ok(Symbol::Invariant(InvariantSymbol::from_entries(
            group, support, entries, false,
        )?))
    } else {
        let mut slices = Vec::with_capacity(n_nodes);
        for node in 0..n_nodes {
            let entries: BTreeMap<IrrepLabel, CMat> = probed
                .iter()
                .map(|p| (p.label.clone(), p.per_node[node].clone()))
                .collect();
            slices.push(InvariantSymbol::from_entries(
                group, support, entries, false,
            )?);
        }
        Ok(Symbol::Full(FullSymbol::new(Arc::clone(grid), slices)?))
    }
}

/// Diagonal symbol `g(ξ)·I` from a scalar function of the label.
pub fn spectral_multiplier(
    group: GroupId,
    cutoff: HalfInt,
    g: impl Fn(&IrrepLabel) -> Complex64,
) -> Result<InvariantSymbol> {
    let mut entries = BTreeMap::new();
    for label in enumerate_labels(group, cutoff)? {
        let d = label.dim();
        let v = g(&label);
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            m[(i, i)] = v;
        }
        entries.insert(label, m);
    }
    InvariantSymbol::from_entries(group, cutoff, entries, false)
}

/// Diagonal symbol from a scalar function of the label and the diagonal
/// microlabel: for SU(2) the closure receives `m = −l..l`; on the torus the
/// label itself is the microlabel and the second argument is always 0.
pub fn diagonal_multiplier(
    group: GroupId,
    cutoff: HalfInt,
    g: impl Fn(&IrrepLabel, HalfInt) -> Complex64,
) -> Result<InvariantSymbol> {
    let mut entries = BTreeMap::new();
    for label in enumerate_labels(group, cutoff)? {
        let d = label.dim();
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            let micro = match &label {
                IrrepLabel::Su2 { two_l } => HalfInt::from_twice(2 * i as i64 - *two_l as i64),
                IrrepLabel::Torus { .. } => HalfInt::ZERO,
            };
            m[(i, i)] = g(&label, micro);
        }
        entries.insert(label, m);
    }
    InvariantSymbol::from_entries(group, cutoff, entries, false)
}

/// Least-squares fit of `log‖σ(ξ)‖_op = N·log⟨ξ⟩ + log C` over trusted,
/// nonzero entries. Diagnostic only. Returns `(C, N)`; an all-zero symbol
/// yields `(0, −∞)`.
pub fn moderate_fit(sigma: &InvariantSymbol) -> Result<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (label, m) in sigma.iter() {
        if label.extent() > sigma.trusted_limit() {
            continue;
        }
        let norm = crate::linalg::opnorm(m);
        if norm > 0.0 {
            points.push((label.weight().ln(), norm.ln()));
        }
    }
    if points.is_empty() {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(distinct.len()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok((intercept.exp(), slope))
}
