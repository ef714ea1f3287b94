//! Finite-band verification of multiplier and symbol-class conditions.
//!
//! Every check here evaluates suprema of weighted difference norms over the
//! labels up to a band cutoff and reports the resulting constants. A finite
//! band cannot prove a condition that quantifies over all of the dual, so
//! the reports carry a stability diagnostic: each constant is recomputed at
//! half the cutoff, and a verdict of `Pass` is only issued when the
//! constants look converged (relative change ≤ 25% when the cutoff
//! doubles). Constants that blow past the cap produce `Fail`; constants
//! that are still drifting produce `Inconclusive`.

use serde::{Deserialize, Serialize};

use crate::differences::{
    first_difference, full_first_difference, laplace_difference, DifferenceSpec,
};
use crate::group::{delta0_components, GroupId, IrrepLabel};
use crate::linalg::opnorm;
use crate::symbols::{FullSymbol, InvariantSymbol};
use crate::{Error, HalfInt, Result};

/// Relative drift between the half-cutoff and full-cutoff constants above
/// which a check refuses to certify (`Inconclusive`).
pub const STABILITY_LIMIT: f64 = 0.25;

/// Ratio applied to the zeroth-order constant when no explicit cap is given.
pub const DEFAULT_CAP_RATIO: f64 = 10.0;

/// Constants below this fraction of the zeroth-order constant count as
/// exact zeros when judging stability: quadrature leaves ~1e-14 relative
/// residue, and no meaningful constant sits between that and this floor.
pub const NOISE_RATIO: f64 = 1e-10;

const X_ALIASING_TOL: f64 = 1e-9;

/// Smallest even integer strictly greater than `n/2`.
pub fn kappa(n: usize) -> usize {
    2 * (n / 4) + 2
}

/// Smallest integer strictly greater than `n/p` (the number of x-derivatives
/// demanded by the non-invariant condition at integrability `p`).
pub fn x_derivative_order(n: usize, p: f64) -> usize {
    (n as f64 / p).floor() as usize + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One inequality of a check: `‖…σ(ξ)‖ ≤ C·⟨ξ⟩^(−weight_exponent)`, with the
/// best (smallest) constant observed on the evaluated band.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub id: String,
    /// Power of ⟨ξ⟩ that multiplies the norm when forming the constant.
    pub weight_exponent: f64,
    pub constant: f64,
    pub half_cutoff_constant: f64,
    /// `|C − C_half| / C_half`; infinite when the half-cutoff constant
    /// vanishes but the full one does not.
    pub instability: f64,
    pub argmax_label: Option<IrrepLabel>,
    /// For x-dependent checks: the grid node where the supremum is attained.
    pub argmax_node: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub check: String,
    pub group: GroupId,
    pub cutoff: HalfInt,
    pub half_cutoff: HalfInt,
    pub cap: f64,
    pub conditions: Vec<ConditionRecord>,
    pub verdict: Verdict,
    pub caveats: Vec<String>,
}

impl MultiplierReport {
    pub fn worst_instability(&self) -> f64 {
        self.conditions
            .iter()
            .map(|c| c.instability)
            .fold(0.0, f64::max)
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

fn relative_change(half: f64, full: f64) -> f64 {
    if half == 0.0 && full == 0.0 {
        0.0
    } else if half == 0.0 {
        f64::INFINITY
    } else {
        (full - half).abs() / half
    }
}

fn half_cutoff(group: GroupId, cutoff: HalfInt) -> HalfInt {
    let mut h = HalfInt::from_twice(cutoff.twice() / 2);
    if matches!(group, GroupId::Torus(_)) && h.twice() % 2 != 0 {
        h = HalfInt::from_twice(h.twice() - 1);
    }
    h
}

/// Density and trust prerequisite: the symbol must genuinely cover
/// `cutoff + order_budget` so every differenced symbol is still trustworthy
/// on the evaluated band.
fn ensure_coverage(sigma: &InvariantSymbol, cutoff: HalfInt, order_budget: usize) -> Result<()> {
    let needed = cutoff + HalfInt::from_int(order_budget as i64);
    sigma.require_dense(needed)?;
    if !sigma.exact_support() && sigma.trusted_limit() < needed {
        return Err(Error::NotDense {
            needed,
            missing: format!("trusted range ends at {}", sigma.trusted_limit()),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Difference-norm table
// ---------------------------------------------------------------------------

/// Per-label operator norms of one iterated difference `𝔻^α σ`.
pub struct NormRow {
    pub id: String,
    /// Multiset of Δ₀ component indices (sorted), or the explicit factor
    /// count for ρ²-powers.
    pub key: Vec<usize>,
    pub order: usize,
    norms: Vec<(IrrepLabel, f64)>,
}

impl NormRow {
    /// Supremum of `⟨ξ⟩^weight_exponent · ‖𝔻^α σ(ξ)‖` over the band.
    pub fn sup(&self, weight_exponent: f64, band: HalfInt) -> (f64, Option<IrrepLabel>) {
        let mut best = 0.0f64;
        let mut argmax = None;
        for (label, norm) in &self.norms {
            if label.extent() > band {
                continue;
            }
            let value = label.weight().powf(weight_exponent) * norm;
            if value > best {
                best = value;
                argmax = Some(label.clone());
            }
        }
        (best, argmax)
    }
}

/// All iterated first-difference norms of one symbol up to a given order,
/// plus powers of the second-order ρ²-difference. Built once per symbol and
/// evaluated at several cutoffs/weights afterwards; shared prefixes of the
/// multisets are computed once.
pub struct DifferenceNormTable {
    group: GroupId,
    cutoff: HalfInt,
    rows: Vec<NormRow>,
    laplace_rows: Vec<NormRow>,
}

impl DifferenceNormTable {
    pub fn build(
        sigma: &InvariantSymbol,
        max_order: usize,
        laplace_power: usize,
        cutoff: HalfInt,
    ) -> Result<Self> {
        let group = sigma.group();
        let components = delta0_components(group);
        let mut rows = Vec::new();
        dfs_rows(sigma, &components, 0, max_order, &mut Vec::new(), cutoff, &mut rows)?;
        rows.sort_by(|a, b| (a.order, &a.key).cmp(&(b.order, &b.key)));

        let mut laplace_rows = Vec::new();
        let mut current = sigma.clone();
        for power in 1..=laplace_power {
            current = laplace_difference(&current)?;
            laplace_rows.push(NormRow {
                id: format!("laplace^{power}"),
                key: vec![power],
                order: 2 * power,
                norms: norm_row(&current, cutoff)?,
            });
        }
        Ok(DifferenceNormTable {
            group,
            cutoff,
            rows,
            laplace_rows,
        })
    }

    pub fn rows(&self) -> &[NormRow] {
        &self.rows
    }

    pub fn laplace_rows(&self) -> &[NormRow] {
        &self.laplace_rows
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn cutoff(&self) -> HalfInt {
        self.cutoff
    }
}

fn norm_row(sigma: &InvariantSymbol, cutoff: HalfInt) -> Result<Vec<(IrrepLabel, f64)>> {
    if !sigma.exact_support() && sigma.trusted_limit() < cutoff {
        return Err(Error::NotDense {
            needed: cutoff,
            missing: format!(
                "trust eroded to {} after differencing",
                sigma.trusted_limit()
            ),
        });
    }
    crate::group::enumerate_labels(sigma.group(), cutoff)?
        .into_iter()
        .map(|label| {
            let n = opnorm(&sigma.entry_or_zero(&label));
            Ok((label, n))
        })
        .collect()
}

fn multiset_id(group: GroupId, components: &[(IrrepLabel, usize, usize)], key: &[usize]) -> String {
    if key.is_empty() {
        return "id".into();
    }
    let factors: Vec<_> = key.iter().map(|&i| components[i].clone()).collect();
    let spec = DifferenceSpec::new(group, factors).expect("components come from Δ₀");
    format!("D[{spec}]")
}

fn dfs_rows(
    sigma: &InvariantSymbol,
    components: &[(IrrepLabel, usize, usize)],
    start: usize,
    remaining: usize,
    key: &mut Vec<usize>,
    cutoff: HalfInt,
    out: &mut Vec<NormRow>,
) -> Result<()> {
    out.push(NormRow {
        id: multiset_id(sigma.group(), components, key),
        key: key.clone(),
        order: key.len(),
        norms: norm_row(sigma, cutoff)?,
    });
    if remaining == 0 {
        return Ok(());
    }
    for idx in start..components.len() {
        let child = first_difference(&components[idx], sigma)?;
        key.push(idx);
        dfs_rows(&child, components, idx, remaining - 1, key, cutoff, out)?;
        key.pop();
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

fn make_condition(
    row: &NormRow,
    weight_exponent: f64,
    cutoff: HalfInt,
    half: HalfInt,
) -> ConditionRecord {
    let (constant, argmax_label) = row.sup(weight_exponent, cutoff);
    let (half_constant, _) = row.sup(weight_exponent, half);
    ConditionRecord {
        id: row.id.clone(),
        weight_exponent,
        constant,
        half_cutoff_constant: half_constant,
        instability: relative_change(half_constant, constant),
        argmax_label,
        argmax_node: None,
    }
}

fn assemble(
    check: String,
    group: GroupId,
    cutoff: HalfInt,
    cap: Option<f64>,
    mut conditions: Vec<ConditionRecord>,
    mut caveats: Vec<String>,
) -> MultiplierReport {
    let base = conditions.first().map(|c| c.constant).unwrap_or(0.0);
    // Constants that are pure quadrature roundoff (identity differences,
    // say) would otherwise report huge relative drift between two noise
    // values; below this floor a condition counts as stably zero.
    let noise = NOISE_RATIO * base.abs();
    for c in conditions.iter_mut() {
        if c.constant.abs() <= noise && c.half_cutoff_constant.abs() <= noise {
            c.instability = 0.0;
        }
    }
    let cap_value = match cap {
        Some(c) => c,
        None => {
            let c = DEFAULT_CAP_RATIO * base;
            caveats.push(format!(
                "cap defaulted to {DEFAULT_CAP_RATIO} x the zeroth-order constant = {c:.6e}"
            ));
            c
        }
    };
    let mut verdict = Verdict::Pass;
    if let Some(worst) = conditions
        .iter()
        .filter(|c| c.constant > cap_value)
        .max_by(|a, b| a.constant.total_cmp(&b.constant))
    {
        verdict = Verdict::Fail;
        caveats.push(format!(
            "constant for {} exceeds the cap: {:.6e} > {:.6e}",
            worst.id, worst.constant, cap_value
        ));
    } else {
        let drift = conditions
            .iter()
            .map(|c| c.instability)
            .fold(0.0f64, f64::max);
        if drift > STABILITY_LIMIT {
            verdict = Verdict::Inconclusive;
            let worst = conditions
                .iter()
                .max_by(|a, b| a.instability.total_cmp(&b.instability))
                .expect("nonempty conditions");
            caveats.push(format!(
                "constants have not stabilized: {} changed by {:.1}% between band {} and band {}",
                worst.id,
                worst.instability * 100.0,
                half_cutoff(group, cutoff),
                cutoff
            ));
        }
    }
    caveats.push(format!(
        "finite-band evaluation at cutoff {cutoff}; constants are lower bounds for the true suprema"
    ));
    MultiplierReport {
        check,
        group,
        cutoff,
        half_cutoff: half_cutoff(group, cutoff),
        cap: cap_value,
        conditions,
        verdict,
        caveats,
    }
}

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

/// Mikhlin-type invariant multiplier check: with `κ = kappa(dim G)`, the
/// conditions are `‖(ρ²-difference)^{κ/2} σ(ξ)‖ ≤ C⟨ξ⟩^{−κ}` together with
/// `‖𝔻^α σ(ξ)‖ ≤ C_α ⟨ξ⟩^{−|α|}` for every Δ₀ multiset with `|α| ≤ κ−1`.
pub fn check_hm(
    sigma: &InvariantSymbol,
    cutoff: HalfInt,
    cap: Option<f64>,
) -> Result<MultiplierReport> {
    check_hm_with(&hm_table(sigma, cutoff)?, cutoff, cap)
}

/// Build the table the Mikhlin check evaluates: difference orders up to
/// κ−1 plus the (ρ²-difference)^{κ/2} power, norms recorded per label out
/// to `cutoff`. One table serves [`check_hm_with`] at every smaller cutoff.
pub fn hm_table(sigma: &InvariantSymbol, cutoff: HalfInt) -> Result<DifferenceNormTable> {
    let k = kappa(sigma.group().dimension());
    ensure_coverage(sigma, cutoff, k)?;
    DifferenceNormTable::build(sigma, k - 1, k / 2, cutoff)
}

/// Evaluate the Mikhlin conditions from a prebuilt table at any cutoff up
/// to the table's own, amortizing the expensive difference pass across a
/// cutoff ladder. Constants are identical to a fresh [`check_hm`] run.
pub fn check_hm_with(
    table: &DifferenceNormTable,
    cutoff: HalfInt,
    cap: Option<f64>,
) -> Result<MultiplierReport> {
    require_within(table, cutoff)?;
    let group = table.group();
    let k = kappa(group.dimension());
    let half = half_cutoff(group, cutoff);
    let mut conditions: Vec<ConditionRecord> = table
        .rows()
        .iter()
        .map(|row| make_condition(row, row.order as f64, cutoff, half))
        .collect();
    let top = table.laplace_rows().last().ok_or_else(|| {
        Error::InvalidDifferenceFactor("table lacks the ρ²-difference row".into())
    })?;
    conditions.push(make_condition(top, k as f64, cutoff, half));
    Ok(assemble(
        format!("hormander-mikhlin(kappa={k})"),
        group,
        cutoff,
        cap,
        conditions,
        Vec::new(),
    ))
}

/// Symbol-class membership check: `‖𝔻^α σ(ξ)‖ ≤ C_α ⟨ξ⟩^{m − ρ|α|}` for all
/// Δ₀ multisets with `|α| ≤ max_order`.
pub fn check_class(
    sigma: &InvariantSymbol,
    m: f64,
    rho: f64,
    max_order: usize,
    cutoff: HalfInt,
    cap: Option<f64>,
) -> Result<MultiplierReport> {
    check_class_with(&class_table(sigma, max_order, cutoff)?, m, rho, cutoff, cap)
}

/// Difference table for class checks: all Δ₀ multisets with `|α| ≤
/// max_order`, no ρ²-difference rows. The weights (m, ρ) enter only at
/// evaluation, so one table serves any (m, ρ) and any cutoff up to its own.
pub fn class_table(
    sigma: &InvariantSymbol,
    max_order: usize,
    cutoff: HalfInt,
) -> Result<DifferenceNormTable> {
    ensure_coverage(sigma, cutoff, max_order)?;
    DifferenceNormTable::build(sigma, max_order, 0, cutoff)
}

/// Evaluate class membership from a prebuilt table. Constants are
/// identical to a fresh [`check_class`] run at the same cutoff.
pub fn check_class_with(
    table: &DifferenceNormTable,
    m: f64,
    rho: f64,
    cutoff: HalfInt,
    cap: Option<f64>,
) -> Result<MultiplierReport> {
    if !m.is_finite() {
        return Err(Error::InvalidExponent(m));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidExponent(rho));
    }
    require_within(table, cutoff)?;
    let group = table.group();
    let max_order = table.rows().iter().map(|r| r.order).max().unwrap_or(0);
    let half = half_cutoff(group, cutoff);
    let conditions: Vec<ConditionRecord> = table
        .rows()
        .iter()
        .map(|row| make_condition(row, rho * row.order as f64 - m, cutoff, half))
        .collect();
    Ok(assemble(
        format!("class(m={m},rho={rho},order<={max_order})"),
        group,
        cutoff,
        cap,
        conditions,
        Vec::new(),
    ))
}

fn require_within(table: &DifferenceNormTable, cutoff: HalfInt) -> Result<()> {
    if cutoff > table.cutoff() {
        return Err(Error::NotDense {
            needed: cutoff,
            missing: format!("norm table only reaches cutoff {}", table.cutoff()),
        });
    }
    Ok(())
}

fn full_sup(
    sigma: &FullSymbol,
    weight_exponent: f64,
    cutoff: HalfInt,
    half: HalfInt,
) -> Result<(f64, Option<IrrepLabel>, Option<usize>, f64)> {
    let group = sigma.group();
    if !sigma.slice(0).exact_support() && sigma.trusted_limit() < cutoff {
        return Err(Error::NotDense {
            needed: cutoff,
            missing: format!(
                "trust eroded to {} after differencing",
                sigma.trusted_limit()
            ),
        });
    }
    let labels = crate::group::enumerate_labels(group, cutoff)?;
    let mut best = 0.0f64;
    let mut best_half = 0.0f64;
    let mut argmax = None;
    let mut argmax_node = None;
    for node in 0..sigma.node_count() {
        let slice = sigma.slice(node);
        for label in &labels {
            let value = label.weight().powf(weight_exponent) * opnorm(&slice.entry_or_zero(label));
            if value > best {
                best = value;
                argmax = Some(label.clone());
                argmax_node = Some(node);
            }
            if label.extent() <= half && value > best_half {
                best_half = value;
            }
        }
    }
    Ok((best, argmax, argmax_node, best_half))
}

fn beta_ids(beta: &[usize], diff_id: &str) -> String {
    let dx = if beta.iter().all(|&b| b == 0) {
        String::new()
    } else {
        let coords: Vec<String> = beta.iter().map(|b| b.to_string()).collect();
        format!("dx^({})", coords.join(","))
    };
    match (dx.is_empty(), diff_id == "id") {
        (true, true) => "id".into(),
        (true, false) => diff_id.into(),
        (false, true) => dx,
        (false, false) => format!("{dx} {diff_id}"),
    }
}

/// Enumerate x-derivative multi-indices `β` with `|β| ≤ budget`, applying
/// the axes in the fixed order `D₁^{β₁}∘…∘Dₙ^{βₙ}` (axis `n` acts first) so
/// sibling branches share the already-derived suffix.
fn beta_dfs(
    axis: usize,
    budget: usize,
    current: &FullSymbol,
    beta_suffix: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, FullSymbol)>,
) -> Result<()> {
    if axis == 0 {
        let mut beta: Vec<usize> = beta_suffix.clone();
        beta.reverse();
        out.push((beta, current.clone()));
        return Ok(());
    }
    let mut s = current.clone();
    for count in 0..=budget {
        if count > 0 {
            s = s.x_derivative(axis)?;
        }
        beta_suffix.push(count);
        beta_dfs(axis - 1, budget - count, &s, beta_suffix, out)?;
        beta_suffix.pop();
    }
    Ok(())
}

fn full_dfs_conditions(
    sigma: &FullSymbol,
    components: &[(IrrepLabel, usize, usize)],
    start: usize,
    remaining: usize,
    key: &mut Vec<usize>,
    x_order: usize,
    cutoff: HalfInt,
    half: HalfInt,
    out: &mut Vec<(Vec<usize>, Vec<usize>, ConditionRecord)>,
) -> Result<()> {
    let group = sigma.group();
    let diff_id = multiset_id(group, components, key);
    let n_axes = group.n_axes();
    let mut derived = Vec::new();
    beta_dfs(n_axes, x_order, sigma, &mut Vec::new(), &mut derived)?;
    for (beta, symbol) in derived {
        let weight = key.len() as f64;
        let (constant, argmax_label, argmax_node, half_constant) =
            full_sup(&symbol, weight, cutoff, half)?;
        out.push((
            key.clone(),
            beta.clone(),
            ConditionRecord {
                id: beta_ids(&beta, &diff_id),
                weight_exponent: weight,
                constant,
                half_cutoff_constant: half_constant,
                instability: relative_change(half_constant, constant),
                argmax_label,
                argmax_node,
            },
        ));
    }
    if remaining == 0 {
        return Ok(());
    }
    for idx in start..components.len() {
        let child = full_first_difference(&components[idx], sigma)?;
        key.push(idx);
        full_dfs_conditions(
            &child, components, idx, remaining - 1, key, x_order, cutoff, half, out,
        )?;
        key.pop();
    }
    Ok(())
}

/// Non-invariant (x-dependent) multiplier check at integrability `p`: with
/// `κ = kappa(dim G)` and `l` the smallest integer exceeding `dim G / p`,
/// the conditions are `‖∂_x^β 𝔻^α σ(x,ξ)‖ ≤ C ⟨ξ⟩^{−|α|}` for `|α| ≤ κ`,
/// `|β| ≤ l`, uniformly over the grid nodes.
pub fn check_noninvariant(
    sigma: &FullSymbol,
    p: f64,
    cutoff: HalfInt,
    cap: Option<f64>,
) -> Result<MultiplierReport> {
    if !(1.0..f64::INFINITY).contains(&p) {
        return Err(Error::InvalidExponent(p));
    }
    let group = sigma.group();
    let n = group.dimension();
    let k = kappa(n);
    let l = x_derivative_order(n, p);
    sigma.validate_x_band_limited(X_ALIASING_TOL)?;
    let needed = cutoff + HalfInt::from_int(k as i64);
    for node in 0..sigma.node_count() {
        sigma.slice(node).require_dense(needed)?;
    }
    if !sigma.slice(0).exact_support() && sigma.trusted_limit() < needed {
        return Err(Error::NotDense {
            needed,
            missing: format!("trusted range ends at {}", sigma.trusted_limit()),
        });
    }
    let half = half_cutoff(group, cutoff);
    let components = delta0_components(group);
    let mut records = Vec::new();
    full_dfs_conditions(
        sigma,
        &components,
        0,
        k,
        &mut Vec::new(),
        l,
        cutoff,
        half,
        &mut records,
    )?;
    records.sort_by(|a, b| {
        let ka = (a.0.len(), &a.0, a.1.iter().sum::<usize>(), &a.1);
        let kb = (b.0.len(), &b.0, b.1.iter().sum::<usize>(), &b.1);
        ka.cmp(&kb)
    });
    let conditions: Vec<ConditionRecord> = records.into_iter().map(|r| r.2).collect();
    Ok(assemble(
        format!("noninvariant(p={p},kappa={k},dx<={l})"),
        group,
        cutoff,
        cap,
        conditions,
        Vec::new(),
    ))
}
