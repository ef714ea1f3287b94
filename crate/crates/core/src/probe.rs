//! Numerical L^p probes.
//!
//! Two kinds of experiment live here: seeded random lower bounds on the
//! L^p operator norm of an invariant symbol, and ratio probes for the
//! a-priori inequalities satisfied by the model operators (the
//! sub-Laplacian and shifted vector fields on SU(2)).  Every probe is
//! repeated over a list of band limits so growth or stability of the
//! statistic is visible, and a log-log trend is fitted when at least
//! three band limits are available.
//!
//! Randomness is ChaCha8 with one stream per trial, split off a single
//! master seed.  Trials are therefore independent of evaluation order
//! and of the rayon thread count, and a probe re-run with the same
//! arguments reproduces its statistics bit for bit.

use crate::error::{Error, Result};
use crate::fourier::{inverse, plancherel_norm, FourierCoefficients, GridFunction};
use crate::grid::QuadratureGrid;
use crate::group::{enumerate_labels, GroupId, IrrepLabel};
use crate::halfint::HalfInt;
use crate::linalg::{zeros, Neumaier};
use crate::multiplier::kappa;
use crate::symbols::{spectral_multiplier, InvariantSymbol};
use crate::zoo::{distance_to_exceptional, named_symbol, NamedOperator, OperatorId, SINGULAR_MARGIN};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Coefficient draws whose Plancherel norm falls below this are redrawn.
const DEGENERATE_TOL: f64 = 1e-12;
const MAX_REDRAWS: usize = 16;

/// Weighted L^p norm of a grid function: `(Σ_i w_i |f(x_i)|^p)^{1/p}`,
/// with `p = ∞` meaning the maximum over quadrature nodes.  The grid
/// weights sum to one, so constants come out at their absolute value.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let grid = f.grid();
    let mut sum = Neumaier::new();
    if p == 2.0 {
        for (i, v) in f.values().iter().enumerate() {
            sum.add(grid.haar_weight(i) * v.norm_sqr());
        }
        Ok(sum.value().max(0.0).sqrt())
    } else {
        for (i, v) in f.values().iter().enumerate() {
            sum.add(grid.haar_weight(i) * v.norm().powf(p));
        }
        Ok(sum.value().max(0.0).powf(1.0 / p))
    }
}

/// Sobolev-weighted L^p norm `‖(I − 𝓛)^{r/2} f‖_p`, realised by the
/// diagonal multiplier `(1 + λ_ξ²)^{r/2}` at the band limit of `f`'s
/// grid.  At `r = 0` the multiplier is identically one and the value
/// matches `lp_norm` up to transform round-off.
pub fn wpr_norm(f: &GridFunction, p: f64, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    let weight = spectral_multiplier(f.group(), f.grid().band_limit(), |label| {
        Complex64::new((1.0 + label.lambda_sq()).powf(r / 2.0), 0.0)
    })?;
    lp_norm(&weight.op_apply(f)?, p)
}

/// Outcome of a probe: one statistic per band limit, plus the fitted
/// log-log trend when at least three usable band limits were given.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeResult {
    /// What was probed, e.g. `opnorm-lower-bound` or `apriori-subelliptic`.
    pub kind: String,
    pub group: GroupId,
    pub p: f64,
    pub band_limits: Vec<HalfInt>,
    /// One value per entry of `band_limits`, in the same order.
    pub statistics: Vec<f64>,
    /// Least-squares slope of `log statistic` against `log band limit`;
    /// `None` when fewer than three positive points are available.
    pub trend: Option<f64>,
    /// `random-trials` or `exact-enumeration`.
    pub method: String,
    pub trials: usize,
    pub seed: u64,
}

impl ProbeResult {
    /// Largest statistic across the probed band limits.
    pub fn max_statistic(&self) -> f64 {
        self.statistics.iter().copied().fold(0.0, f64::max)
    }
}

fn log_log_slope(bands: &[HalfInt], stats: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = bands
        .iter()
        .zip(stats)
        .filter(|(b, s)| b.twice() > 0 && **s > 0.0)
        .map(|(b, s)| ((b.twice() as f64 / 2.0).ln(), s.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / n;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// One ChaCha8 stream per trial, all split from the master seed; trial
/// draws are reproducible regardless of scheduling.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn trivial_label(group: GroupId) -> IrrepLabel {
    match group {
        GroupId::Su2 => IrrepLabel::Su2 { two_l: 0 },
        GroupId::Torus(n) => IrrepLabel::Torus { k: vec![0; n] },
    }
}

/// Random band-limited coefficients, redrawn while degenerate.  With
/// `kill_constants` the trivial-label block is zeroed first, keeping
/// the draw orthogonal to constant functions.
fn draw_nonzero(
    group: GroupId,
    band: HalfInt,
    rng: &mut ChaCha8Rng,
    kill_constants: bool,
) -> Result<FourierCoefficients> {
    for _ in 0..MAX_REDRAWS {
        let mut c = FourierCoefficients::random(group, band, rng)?;
        if kill_constants {
            c.insert(trivial_label(group), zeros(1, 1))?;
        }
        if plancherel_norm(&c) > DEGENERATE_TOL {
            return Ok(c);
        }
    }
    Err(Error::InsufficientData(MAX_REDRAWS))
}

fn validate_probe_inputs(p: f64, band_limits: &[HalfInt], trials: usize) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if band_limits.is_empty() || trials == 0 {
        return Err(Error::InsufficientData(0));
    }
    Ok(())
}

/// Monte-Carlo lower bound for the L^p → L^p operator norm of an
/// invariant symbol: the best ratio `‖Aφ‖_p / ‖φ‖_p` over seeded random
/// band-limited `φ`, reported per band limit.  The statistic can only
/// underestimate the true norm; growth across band limits is evidence
/// of unboundedness, stability is consistent with a bounded operator.
pub fn opnorm_lower_bound(
    sigma: &InvariantSymbol,
    p: f64,
    band_limits: &[HalfInt],
    trials: usize,
    seed: u64,
) -> Result<ProbeResult> {
    validate_probe_inputs(p, band_limits, trials)?;
    let group = sigma.group();
    let mut statistics = Vec::with_capacity(band_limits.len());
    for &band in band_limits {
        sigma.require_dense(band)?;
        let grid = QuadratureGrid::get(group, band)?;
        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<f64> {
                let mut rng = trial_rng(seed, t);
                let coeffs = draw_nonzero(group, band, &mut rng, false)?;
                let phi = inverse(&coeffs, &grid)?;
                let denom = lp_norm(&phi, p)?;
                let image = inverse(&sigma.apply_to_coefficients(&coeffs)?, &grid)?;
                Ok(lp_norm(&image, p)? / denom)
            })
            .collect::<Result<Vec<_>>>()?;
        statistics.push(ratios.into_iter().fold(0.0, f64::max));
    }
    let trend = log_log_slope(band_limits, &statistics);
    Ok(ProbeResult {
        kind: "opnorm-lower-bound".into(),
        group,
        p,
        band_limits: band_limits.to_vec(),
        statistics,
        trend,
        method: "random-trials".into(),
        trials,
        seed,
    })
}

/// Which a-priori inequality to probe.  Both live on SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AprioriKind {
    /// `‖u‖_{W^{p,r}} ≤ C ‖𝓛ₛ u‖_p` over `u ⟂ constants`, with the
    /// sub-elliptic order `r = 1 − |1/p − 1/2|`.
    SubElliptic,
    /// `‖f‖_p ≤ C ‖(∂_axis + c) f‖_{W^{p,r}}` with `r = κ·|1/p − 1/2|`
    /// (κ = 2 for SU(2)), valid whenever `c` avoids the exceptional set
    /// `i·½ℤ`.
    XPlusC { axis: usize, c: Complex64 },
}

/// Per-basis-vector ratio for the sub-elliptic inequality at `p = 2`:
/// `√(1 + l(l+1)) / (l(l+1) − m²)` for a lone coefficient at `(l, m)`.
pub fn subelliptic_basis_ratio(l: HalfInt, m: HalfInt) -> Result<f64> {
    if l.twice() <= 0 || m.abs() > l {
        return Err(Error::InvalidLabel(format!("(l, m) = ({l}, {m})")));
    }
    let lf = l.twice() as f64 / 2.0;
    let mf = m.twice() as f64 / 2.0;
    let casimir = lf * (lf + 1.0);
    Ok((1.0 + casimir).sqrt() / (casimir - mf * mf))
}

fn subelliptic_exact_sup(band: HalfInt) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for label in enumerate_labels(GroupId::Su2, band)? {
        let IrrepLabel::Su2 { two_l } = label else { unreachable!() };
        if two_l == 0 {
            continue;
        }
        let l = HalfInt::from_twice(two_l as i64);
        let mut two_m = -(two_l as i64);
        while two_m <= two_l as i64 {
            best = best.max(subelliptic_basis_ratio(l, HalfInt::from_twice(two_m))?);
            two_m += 2;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidLabel(format!(
            "sub-elliptic probe needs band limit >= 1/2, got {band}"
        )))
    }
}

/// At `p = 2` the shift `i∂_axis + c` has eigenvalues `im + c` over the
/// half-integer microlabels `|m| ≤ l ≤ band` (the same spectrum for
/// every axis), so the sharp ratio is `max_m 1/|im + c|`.
fn xplusc_exact_sup(c: Complex64, band: HalfInt) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut two_m = -band.twice();
    while two_m <= band.twice() {
        let m = two_m as f64 / 2.0;
        best = best.max(1.0 / (Complex64::new(0.0, m) + c).norm());
        two_m += 1;
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidLabel(format!("empty microlabel range at band {band}")))
    }
}

fn singular_shift_error(c: Complex64) -> Error {
    let two_m = (-2.0 * c.im).round() as i64;
    let m = HalfInt::from_twice(two_m);
    Error::SingularShift {
        c: format!("{c}"),
        l: m.abs(),
        m,
    }
}

/// Ratio probe for an a-priori inequality: the worst (largest) ratio of
/// the left-hand side to the right-hand side over seeded random
/// band-limited test functions, per band limit.  At `p = 2` both sides
/// are diagonal in the Fourier basis, the supremum is attained at a
/// single coefficient, and the probe switches to exact enumeration over
/// the labels instead of sampling.
pub fn apriori_ratio(
    kind: AprioriKind,
    p: f64,
    band_limits: &[HalfInt],
    trials: usize,
    seed: u64,
) -> Result<ProbeResult> {
    validate_probe_inputs(p, band_limits, trials)?;
    if p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    let group = GroupId::Su2;
    let (kind_name, r, op): (String, f64, NamedOperator) = match kind {
        AprioriKind::SubElliptic => (
            "apriori-subelliptic".into(),
            1.0 - (1.0 / p - 0.5).abs(),
            NamedOperator::new(group, OperatorId::SubLaplacian)?,
        ),
        AprioriKind::XPlusC { axis, c } => {
            if distance_to_exceptional(c) <= SINGULAR_MARGIN {
                return Err(singular_shift_error(c));
            }
            (
                format!("apriori-xplusc(axis={axis},c={c})"),
                kappa(3) as f64 * (1.0 / p - 0.5).abs(),
                NamedOperator::new(group, OperatorId::XPlusC { axis, c })?,
            )
        }
    };
    let exact = p == 2.0;
    let mut statistics = Vec::with_capacity(band_limits.len());
    for &band in band_limits {
        if exact {
            statistics.push(match kind {
                AprioriKind::SubElliptic => subelliptic_exact_sup(band)?,
                AprioriKind::XPlusC { c, .. } => xplusc_exact_sup(c, band)?,
            });
            continue;
        }
        let grid = QuadratureGrid::get(group, band)?;
        let sigma_op = named_symbol(&op, band)?;
        let ratios: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<f64> {
                let mut rng = trial_rng(seed, t);
                match kind {
                    AprioriKind::SubElliptic => {
                        let coeffs = draw_nonzero(group, band, &mut rng, true)?;
                        let u = inverse(&coeffs, &grid)?;
                        let image = inverse(&sigma_op.apply_to_coefficients(&coeffs)?, &grid)?;
                        Ok(wpr_norm(&u, p, r)? / lp_norm(&image, p)?)
                    }
                    AprioriKind::XPlusC { .. } => {
                        let coeffs = draw_nonzero(group, band, &mut rng, false)?;
                        let f = inverse(&coeffs, &grid)?;
                        let image = inverse(&sigma_op.apply_to_coefficients(&coeffs)?, &grid)?;
                        Ok(lp_norm(&f, p)? / wpr_norm(&image, p, r)?)
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        statistics.push(ratios.into_iter().fold(0.0, f64::max));
    }
    let trend = log_log_slope(band_limits, &statistics);
    Ok(ProbeResult {
        kind: kind_name,
        group,
        p,
        band_limits: band_limits.to_vec(),
        statistics,
        trend,
        method: if exact { "exact-enumeration" } else { "random-trials" }.into(),
        trials,
        seed,
    })
}
