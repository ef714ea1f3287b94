//! The group Fourier transform pair, Plancherel/Sobolev norms, and spectral
//! derivatives.
//!
//! Conventions (pinned by the translation-covariance test below):
//!
//! * analysis: `φ̂(ξ) = ∫ φ(x) ξ(x)* dx`, so `φ̂(ξ)_{ij} = ∫ φ · conj(ξ_{ji})`;
//! * synthesis: `φ(x) = Σ_ξ d_ξ tr(ξ(x) φ̂(ξ))`;
//! * left translation `x ↦ φ(y·x)` multiplies `φ̂(ξ)` by `ξ(y)` on the right.
//!
//! On SU(2) both directions are evaluated as three nested one-dimensional
//! contractions (γ, then α, then the Wigner-d contraction in β), which keeps
//! the cost near `O(B⁴)` per transform without any FFT machinery. On the
//! torus the same is done axis by axis. All reductions run in a fixed order
//! (or are embarrassingly parallel per output element), so results do not
//! depend on the thread count.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::grid::{GridKind, QuadratureGrid};
use crate::group::{
    derivative_symbol, enumerate_labels, irrep_matrix, GroupElement, GroupId, IrrepLabel,
};
use crate::linalg::{CMat, Neumaier};
use crate::{Error, HalfInt, Result};

/// Complex function values on a quadrature grid, one value per node in the
/// grid's canonical flat order.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<QuadratureGrid>,
    values: Vec<Complex64>,
    band_limit_hint: Option<HalfInt>,
}

impl GridFunction {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "value vector length {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(GridFunction {
            grid,
            values,
            band_limit_hint: None,
        })
    }

    /// Evaluate `f` at every node, in parallel, preserving node order.
    pub fn from_fn(
        grid: Arc<QuadratureGrid>,
        f: impl Fn(&GroupElement) -> Complex64 + Sync,
    ) -> Self {
        let values: Vec<Complex64> = (0..grid.node_count())
            .into_par_iter()
            .map(|i| f(&grid.element(i)))
            .collect();
        GridFunction {
            grid,
            values,
            band_limit_hint: None,
        }
    }

    pub fn constant(grid: Arc<QuadratureGrid>, c: Complex64) -> Self {
        let n = grid.node_count();
        GridFunction {
            grid,
            values: vec![c; n],
            band_limit_hint: Some(HalfInt::ZERO),
        }
    }

    pub fn from_values(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(GridFunction {
            grid,
            values,
            band_limit_hint: None,
        })
    }

    pub fn with_band_hint(mut self, hint: HalfInt) -> Self {
        self.band_limit_hint = Some(hint);
        self
    }

    pub fn band_limit_hint(&self) -> Option<HalfInt> {
        self.band_limit_hint
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn group(&self) -> GroupId {
        self.grid.group()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch(
                "operands live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// Pointwise product. The band hint of the product is the sum of the
    /// operand hints when both are known (trigonometric degree adds).
    pub fn mul_pointwise(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        let hint = match (self.band_limit_hint, other.band_limit_hint) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
            band_limit_hint: hint,
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
            band_limit_hint: self.band_limit_hint.max(other.band_limit_hint),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
            band_limit_hint: self.band_limit_hint.max(other.band_limit_hint),
        })
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v * c).collect(),
            band_limit_hint: self.band_limit_hint,
        }
    }

    /// Quadrature-weighted L² norm.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = Neumaier::new();
        for (i, v) in self.values.iter().enumerate() {
            acc.add(self.grid.haar_weight(i) * v.norm_sqr());
        }
        acc.value().max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

/// A finitely supported map from irreducible-representation labels to
/// matrices: a truncated Fourier coefficient sequence. Labels with extent up
/// to `support_limit` may be stored; a missing label within the limit reads
/// as the zero matrix.
#[derive(Clone, Debug)]
pub struct FourierCoefficients {
    group: GroupId,
    support_limit: HalfInt,
    entries: BTreeMap<IrrepLabel, CMat>,
}

impl FourierCoefficients {
    pub fn zero(group: GroupId, support_limit: HalfInt) -> Self {
        FourierCoefficients {
            group,
            support_limit,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, label: IrrepLabel, matrix: CMat) -> Result<()> {
        label.validate(self.group)?;
        if label.extent() > self.support_limit {
            return Err(Error::SupportExceedsGrid {
                support: label.extent(),
                band_limit: self.support_limit,
            });
        }
        let d = label.dim();
        if matrix.dim() != (d, d) {
            return Err(Error::InvalidLabel(format!(
                "matrix shape {:?} does not match dim {d} of {label}",
                matrix.dim()
            )));
        }
        self.entries.insert(label, matrix);
        Ok(())
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn support_limit(&self) -> HalfInt {
        self.support_limit
    }

    pub fn get(&self, label: &IrrepLabel) -> Option<&CMat> {
        self.entries.get(label)
    }

    /// The stored matrix, or zeros of the right dimension within the support
    /// limit. Labels beyond the limit are a caller error surfaced as `None`
    /// by [`Self::get`]; here they also return zeros for convenience.
    pub fn entry_or_zero(&self, label: &IrrepLabel) -> CMat {
        match self.entries.get(label) {
            Some(m) => m.clone(),
            None => Array2::zeros((label.dim(), label.dim())),
        }
    }

    /// Stored entries in canonical label order.
    pub fn iter(&self) -> impl Iterator<Item = (&IrrepLabel, &CMat)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FourierCoefficients {
            group: self.group,
            support_limit: self.support_limit,
            entries: self
                .entries
                .iter()
                .map(|(l, m)| (l.clone(), m.mapv(|v| v * c)))
                .collect(),
        }
    }

    pub fn add(&self, other: &FourierCoefficients) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group.to_string(),
                got: other.group.to_string(),
            });
        }
        let mut out = FourierCoefficients::zero(self.group, self.support_limit.max(other.support_limit));
        for (l, m) in &self.entries {
            out.entries.insert(l.clone(), m.clone());
        }
        for (l, m) in &other.entries {
            match out.entries.get_mut(l) {
                Some(existing) => *existing = &*existing + m,
                None => {
                    out.entries.insert(l.clone(), m.clone());
                }
            }
        }
        Ok(out)
    }

    /// Largest stored label extent with an entry above `threshold` in
    /// max-abs, or `None` if everything is below it.
    pub fn effective_support(&self, threshold: f64) -> Option<HalfInt> {
        self.entries
            .iter()
            .filter(|(_, m)| m.iter().any(|v| v.norm() > threshold))
            .map(|(l, _)| l.extent())
            .max()
    }

    /// Coefficients with i.i.d. standard complex normal entries on every
    /// label of extent ≤ `limit` — the invariant random ensemble used by the
    /// probing code. Draws happen in canonical label order, so the result is
    /// a pure function of the RNG state.
    pub fn random(group: GroupId, limit: HalfInt, rng: &mut impl Rng) -> Result<Self> {
        let mut out = FourierCoefficients::zero(group, limit);
        for label in enumerate_labels(group, limit)? {
            let d = label.dim();
            let mut m = Array2::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    m[(i, j)] = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
                }
            }
            out.entries.insert(label, m);
        }
        Ok(out)
    }
}

/// `φ̂(ξ) = Σ_nodes w · φ(x) · ξ(x)*` for every label within the grid's band
/// limit. Exact (to rounding) whenever `φ` is band-limited within the grid.
pub fn forward(f: &GridFunction) -> Result<FourierCoefficients> {
    let grid = f.grid();
    if let Some(hint) = f.band_limit_hint {
        if hint > grid.band_limit() {
            return Err(Error::SupportExceedsGrid {
                support: hint,
                band_limit: grid.band_limit(),
            });
        }
    }
    match grid.kind() {
        GridKind::Su2 { .. } => forward_su2(f),
        GridKind::Torus { .. } => forward_torus(f),
    }
}

/// Pointwise synthesis `φ(x) = Σ d_ξ tr(ξ(x) φ̂(ξ))` at every node.
pub fn inverse(c: &FourierCoefficients, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    if c.group != grid.group() {
        return Err(Error::GroupMismatch {
            expected: grid.group().to_string(),
            got: c.group.to_string(),
        });
    }
    if c.support_limit > grid.band_limit() {
        return Err(Error::SupportExceedsGrid {
            support: c.support_limit,
            band_limit: grid.band_limit(),
        });
    }
    let mut out = match grid.kind() {
        GridKind::Su2 { .. } => inverse_su2(c, grid),
        GridKind::Torus { .. } => inverse_torus(c, grid),
    }?;
    out.band_limit_hint = Some(c.support_limit);
    Ok(out)
}

/// Synthesis at an arbitrary (off-grid) group element.
pub fn synth_at(c: &FourierCoefficients, x: &GroupElement) -> Result<Complex64> {
    let mut acc_re = Neumaier::new();
    let mut acc_im = Neumaier::new();
    for (label, mat) in c.iter() {
        let xi = irrep_matrix(c.group, label, x)?;
        let d = label.dim();
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                tr += xi[(i, k)] * mat[(k, i)];
            }
        }
        let v = tr * d as f64;
        acc_re.add(v.re);
        acc_im.add(v.im);
    }
    Ok(Complex64::new(acc_re.value(), acc_im.value()))
}

/// `√(Σ_ξ d_ξ ‖φ̂(ξ)‖²_HS)` — equals the grid L² norm of the synthesis.
pub fn plancherel_norm(c: &FourierCoefficients) -> f64 {
    let mut acc = Neumaier::new();
    for (label, mat) in c.iter() {
        let d = label.dim() as f64;
        for v in mat.iter() {
            acc.add(d * v.norm_sqr());
        }
    }
    acc.value().max(0.0).sqrt()
}

/// Sobolev norm of smoothness `s`: Plancherel norm of `⟨ξ⟩^s φ̂(ξ)`.
pub fn sobolev_norm(c: &FourierCoefficients, s: f64) -> f64 {
    let mut acc = Neumaier::new();
    for (label, mat) in c.iter() {
        let d = label.dim() as f64;
        let w = label.weight().powf(2.0 * s);
        for v in mat.iter() {
            acc.add(d * w * v.norm_sqr());
        }
    }
    acc.value().max(0.0).sqrt()
}

/// Left-invariant derivative along basis axis `axis`, computed spectrally:
/// transform, multiply each coefficient by the derivative symbol on the
/// left, synthesize. Exact on band-limited inputs; general inputs are
/// projected onto the grid's band-limited space first.
pub fn left_derivative(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    let c = forward(f)?;
    let mut out = FourierCoefficients::zero(c.group, c.support_limit);
    for (label, mat) in c.iter() {
        let sym = derivative_symbol(c.group, axis, label)?;
        out.entries.insert(label.clone(), sym.dot(mat));
    }
    inverse(&out, f.grid())
}

// ---------------------------------------------------------------------------
// SU(2) transform internals
// ---------------------------------------------------------------------------

struct Su2Dims {
    n_alpha: usize,
    n_beta: usize,
    n_gamma: usize,
    two_b: i64,
}

fn su2_dims(grid: &QuadratureGrid) -> Su2Dims {
    let GridKind::Su2 {
        alphas,
        betas,
        gammas,
        ..
    } = grid.kind()
    else {
        unreachable!("caller matched on grid kind");
    };
    Su2Dims {
        n_alpha: alphas.len(),
        n_beta: betas.len(),
        n_gamma: gammas.len(),
        two_b: grid.band_limit().twice(),
    }
}

fn forward_su2(f: &GridFunction) -> Result<FourierCoefficients> {
    let grid = f.grid();
    let GridKind::Su2 {
        beta_weights,
        wigner,
        w_gamma,
        w_half_alpha,
        ..
    } = grid.kind()
    else {
        unreachable!();
    };
    let Su2Dims {
        n_alpha,
        n_beta,
        n_gamma,
        two_b,
    } = su2_dims(grid);
    let v = f.values();

    // Step 1 (γ): g1[a][b][jm] = Σ_c v(a,b,c) e^{i m γ_c}, jm = two_m + two_b.
    let g1: Vec<Complex64> = (0..n_alpha * n_beta * n_gamma)
        .into_par_iter()
        .map(|flat| {
            let jm = flat % n_gamma;
            let b = (flat / n_gamma) % n_beta;
            let a = flat / (n_gamma * n_beta);
            let two_m = jm as i64 - two_b;
            let base = (a * n_beta + b) * n_gamma;
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..n_gamma {
                let tw = w_gamma[(two_m * c as i64).rem_euclid(n_gamma as i64) as usize];
                acc += v[base + c] * tw;
            }
            acc
        })
        .collect();

    // Step 2 (α): g2[jmp][b][jm] = Σ_a g1[a][b][jm] e^{i m' α_a}.
    let g2: Vec<Complex64> = (0..n_gamma * n_beta * n_gamma)
        .into_par_iter()
        .map(|flat| {
            let jm = flat % n_gamma;
            let b = (flat / n_gamma) % n_beta;
            let jmp = flat / (n_gamma * n_beta);
            let two_mp = jmp as i64 - two_b;
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n_alpha {
                let tw =
                    w_half_alpha[(two_mp * a as i64).rem_euclid(2 * n_alpha as i64) as usize];
                acc += g1[(a * n_beta + b) * n_gamma + jm] * tw;
            }
            acc
        })
        .collect();

    // Step 3 (β): contract against the Wigner-d tables with Haar weights.
    // φ̂(l)[i_m][i_mp] = Σ_b w_b d^l_{m' m}(β_b) g2[jmp][b][jm].
    let norm = 1.0 / (n_alpha * n_gamma) as f64;
    let per_label: Vec<(IrrepLabel, CMat)> = (0..=two_b as usize)
        .into_par_iter()
        .map(|two_l| {
            let dim = two_l + 1;
            let table = &wigner[two_l];
            let mut mat = Array2::zeros((dim, dim));
            for i_m in 0..dim {
                let two_m = 2 * i_m as i64 - two_l as i64;
                let jm = (two_m + two_b) as usize;
                for i_mp in 0..dim {
                    let two_mp = 2 * i_mp as i64 - two_l as i64;
                    let jmp = (two_mp + two_b) as usize;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..n_beta {
                        acc += g2[(jmp * n_beta + b) * n_gamma + jm]
                            * (beta_weights[b] * table[(b, i_mp, i_m)]);
                    }
                    mat[(i_m, i_mp)] = acc * norm;
                }
            }
            (
                IrrepLabel::Su2 {
                    two_l: two_l as u32,
                },
                mat,
            )
        })
        .collect();

    let mut out = FourierCoefficients::zero(GroupId::Su2, grid.band_limit());
    out.entries.extend(per_label);
    Ok(out)
}

fn inverse_su2(c: &FourierCoefficients, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    let GridKind::Su2 {
        wigner,
        w_gamma,
        w_half_alpha,
        ..
    } = grid.kind()
    else {
        unreachable!();
    };
    let Su2Dims {
        n_alpha,
        n_beta,
        n_gamma,
        two_b,
    } = su2_dims(grid);

    // Dense per-two_l access to the coefficients.
    let two_s = c.support_limit.twice().max(0) as usize;
    let mut by_two_l: Vec<Option<&CMat>> = vec![None; two_s + 1];
    for (label, mat) in c.iter() {
        if let IrrepLabel::Su2 { two_l } = label {
            by_two_l[*two_l as usize] = Some(mat);
        }
    }

    // Step 1 (β, l-sum): f1[jmp][b][jm] = Σ_l (two_l+1) d^l_{m'm}(β_b) ĉ_l[i_m][i_mp].
    let f1: Vec<Complex64> = (0..n_gamma * n_beta * n_gamma)
        .into_par_iter()
        .map(|flat| {
            let jm = flat % n_gamma;
            let b = (flat / n_gamma) % n_beta;
            let jmp = flat / (n_gamma * n_beta);
            let two_m = jm as i64 - two_b;
            let two_mp = jmp as i64 - two_b;
            // No spin carries a mixed-parity (m, m') pair.
            if (two_m - two_mp).rem_euclid(2) != 0 {
                return Complex64::new(0.0, 0.0);
            }
            let start = two_m.abs().max(two_mp.abs());
            let mut acc = Complex64::new(0.0, 0.0);
            let mut two_l = start;
            // Match spin parity to the m parity.
            if two_l.rem_euclid(2) != two_m.rem_euclid(2) {
                two_l += 1;
            }
            while two_l <= two_s as i64 {
                if let Some(mat) = by_two_l[two_l as usize] {
                    let i_m = ((two_m + two_l) / 2) as usize;
                    let i_mp = ((two_mp + two_l) / 2) as usize;
                    acc += mat[(i_m, i_mp)]
                        * ((two_l + 1) as f64 * wigner[two_l as usize][(b, i_mp, i_m)]);
                }
                two_l += 2;
            }
            acc
        })
        .collect();

    // Step 2 (α synthesis): f2[a][b][jm] = Σ_jmp e^{−i m' α_a} f1[jmp][b][jm].
    let f2: Vec<Complex64> = (0..n_alpha * n_beta * n_gamma)
        .into_par_iter()
        .map(|flat| {
            let jm = flat % n_gamma;
            let b = (flat / n_gamma) % n_beta;
            let a = flat / (n_gamma * n_beta);
            let mut acc = Complex64::new(0.0, 0.0);
            for jmp in 0..n_gamma {
                let two_mp = jmp as i64 - two_b;
                let tw = w_half_alpha
                    [(two_mp * a as i64).rem_euclid(2 * n_alpha as i64) as usize]
                .conj();
                acc += f1[(jmp * n_beta + b) * n_gamma + jm] * tw;
            }
            acc
        })
        .collect();

    // Step 3 (γ synthesis): out(a,b,c) = Σ_jm e^{−i m γ_c} f2[a][b][jm].
    let values: Vec<Complex64> = (0..n_alpha * n_beta * n_gamma)
        .into_par_iter()
        .map(|flat| {
            let cc = flat % n_gamma;
            let b = (flat / n_gamma) % n_beta;
            let a = flat / (n_gamma * n_beta);
            let mut acc = Complex64::new(0.0, 0.0);
            for jm in 0..n_gamma {
                let two_m = jm as i64 - two_b;
                let tw = w_gamma[(two_m * cc as i64).rem_euclid(n_gamma as i64) as usize].conj();
                acc += f2[(a * n_beta + b) * n_gamma + jm] * tw;
            }
            acc
        })
        .collect();

    GridFunction::new(Arc::clone(grid), values)
}

// ---------------------------------------------------------------------------
// Torus transform internals
// ---------------------------------------------------------------------------

/// One-dimensional DFT along `axis` of a row-major n-dimensional array with
/// `points` entries per axis. `twiddles[j] = exp(sign · 2πi j / points)`.
fn torus_dft_axis(
    data: &[Complex64],
    n: usize,
    points: usize,
    axis: usize,
    twiddles: &[Complex64],
) -> Vec<Complex64> {
    // Row-major strides: axis j has stride points^(n-1-j).
    let stride = points.pow((n - 1 - axis) as u32);
    (0..data.len())
        .into_par_iter()
        .map(|flat| {
            let pos = (flat / stride) % points;
            let base = flat - pos * stride;
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..points {
                acc += data[base + t * stride] * twiddles[(pos * t) % points];
            }
            acc
        })
        .collect()
}

fn torus_twiddles(points: usize, sign: f64) -> Vec<Complex64> {
    (0..points)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * j as f64 / points as f64))
        .collect()
}

fn forward_torus(f: &GridFunction) -> Result<FourierCoefficients> {
    let grid = f.grid();
    let GridKind::Torus { n, points_per_axis } = grid.kind() else {
        unreachable!();
    };
    let (n, points) = (*n, *points_per_axis);
    let tw = torus_twiddles(points, -1.0);
    let mut data = f.values().to_vec();
    for axis in 0..n {
        data = torus_dft_axis(&data, n, points, axis, &tw);
    }
    let b = grid.band_limit().as_int().unwrap();
    let norm = 1.0 / grid.node_count() as f64;
    let mut out = FourierCoefficients::zero(grid.group(), grid.band_limit());
    // Frequency index per axis: 0..points ↔ k = idx (idx ≤ B) or idx − points.
    for (flat, value) in data.iter().enumerate() {
        let mut k = vec![0i64; n];
        let mut rest = flat;
        for j in (0..n).rev() {
            let idx = (rest % points) as i64;
            rest /= points;
            k[j] = if idx <= b { idx } else { idx - points as i64 };
        }
        let mut m = Array2::zeros((1, 1));
        m[(0, 0)] = value * norm;
        out.entries.insert(IrrepLabel::torus(k), m);
    }
    Ok(out)
}

fn inverse_torus(c: &FourierCoefficients, grid: &Arc<QuadratureGrid>) -> Result<GridFunction> {
    let GridKind::Torus { n, points_per_axis } = grid.kind() else {
        unreachable!();
    };
    let (n, points) = (*n, *points_per_axis);
    // Scatter coefficients onto the frequency array, then run inverse DFTs.
    let mut data = vec![Complex64::new(0.0, 0.0); grid.node_count()];
    for (label, mat) in c.iter() {
        let IrrepLabel::Torus { k } = label else {
            unreachable!("group checked by caller");
        };
        let mut flat = 0usize;
        for &kj in k.iter() {
            flat = flat * points + kj.rem_euclid(points as i64) as usize;
        }
        data[flat] = mat[(0, 0)];
    }
    let tw = torus_twiddles(points, 1.0);
    for axis in 0..n {
        data = torus_dft_axis(&data, n, points, axis, &tw);
    }
    GridFunction::new(Arc::clone(grid), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::compose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coeff_distance(a: &FourierCoefficients, b: &FourierCoefficients) -> f64 {
        let mut worst = 0.0f64;
        let limit = a.support_limit().min(b.support_limit());
        for label in enumerate_labels(a.group(), limit).unwrap() {
            let ma = a.entry_or_zero(&label);
            let mb = b.entry_or_zero(&label);
            for (x, y) in ma.iter().zip(mb.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    #[test]
    fn constant_function_transforms_to_trivial_label() {
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_int(3)).unwrap();
        let f = GridFunction::constant(Arc::clone(&grid), Complex64::new(2.0, -1.0));
        let c = forward(&f).unwrap();
        let trivial = c.entry_or_zero(&IrrepLabel::Su2 { two_l: 0 });
        assert!((trivial[(0, 0)] - Complex64::new(2.0, -1.0)).norm() < 1e-12);
        for (label, mat) in c.iter() {
            if label.extent() > HalfInt::ZERO {
                assert!(mat.iter().all(|v| v.norm() < 1e-12), "leak into {label}");
            }
        }
    }

    #[test]
    fn spinor_coefficient_lands_at_transposed_entry() {
        // φ(x) = ξ(x)_{12} at l = 1/2 has φ̂(1/2) = E_{21}/2: the analysis
        // pairing transposes indices and divides by the dimension.
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_twice(1)).unwrap();
        let label = IrrepLabel::Su2 { two_l: 1 };
        let f = GridFunction::from_fn(Arc::clone(&grid), |x| {
            irrep_matrix(GroupId::Su2, &label, x).unwrap()[(0, 1)]
        });
        let c = forward(&f).unwrap();
        let m = c.entry_or_zero(&label);
        assert!((m[(1, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!(m[(0, 0)].norm() < 1e-13 && m[(0, 1)].norm() < 1e-13 && m[(1, 1)].norm() < 1e-13);
    }

    #[test]
    fn torus_character_transforms_to_unit_coefficient() {
        let grid = QuadratureGrid::get(GroupId::Torus(1), HalfInt::from_int(4)).unwrap();
        let f = GridFunction::from_fn(Arc::clone(&grid), |x| {
            let GroupElement::Torus { x } = x else { unreachable!() };
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x[0])
        });
        let c = forward(&f).unwrap();
        for (label, mat) in c.iter() {
            let IrrepLabel::Torus { k } = label else { unreachable!() };
            let expect = if k[0] == 1 { 1.0 } else { 0.0 };
            assert!(
                (mat[(0, 0)] - Complex64::new(expect, 0.0)).norm() < 1e-13,
                "coefficient at k={k:?}",
            );
        }
    }

    #[test]
    fn round_trip_is_identity_on_band_limited_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (group, limit) in [
            (GroupId::Su2, HalfInt::from_twice(7)),
            (GroupId::Torus(2), HalfInt::from_int(3)),
        ] {
            let grid = QuadratureGrid::get(group, limit).unwrap();
            let c = FourierCoefficients::random(group, limit, &mut rng).unwrap();
            let f = inverse(&c, &grid).unwrap();
            let back = forward(&f).unwrap();
            let scale = plancherel_norm(&c);
            assert!(
                coeff_distance(&c, &back) < 1e-11 * scale,
                "inverse∘forward on {group}"
            );
            let f2 = inverse(&back, &grid).unwrap();
            let worst = f
                .values()
                .iter()
                .zip(f2.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(worst < 1e-11 * scale, "forward∘inverse on {group}");
        }
    }

    #[test]
    fn plancherel_matches_grid_l2() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (group, limit) in [
            (GroupId::Su2, HalfInt::from_int(4)),
            (GroupId::Torus(3), HalfInt::from_int(2)),
        ] {
            let grid = QuadratureGrid::get(group, limit).unwrap();
            let c = FourierCoefficients::random(group, limit, &mut rng).unwrap();
            let f = inverse(&c, &grid).unwrap();
            let lhs = plancherel_norm(&c);
            let rhs = f.l2_norm();
            assert!(
                (lhs - rhs).abs() <= 1e-9 * rhs,
                "Plancherel on {group}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn translation_covariance_pins_the_convention() {
        // For g(x) = φ(y·x): ĝ(ξ) = φ̂(ξ) ξ(y).
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (group, limit) in [
            (GroupId::Su2, HalfInt::from_twice(5)),
            (GroupId::Torus(2), HalfInt::from_int(2)),
        ] {
            let grid = QuadratureGrid::get(group, limit).unwrap();
            let c = FourierCoefficients::random(group, limit, &mut rng).unwrap();
            let y = match group {
                GroupId::Su2 => GroupElement::Su2 {
                    alpha: 1.1,
                    beta: 0.7,
                    gamma: 2.9,
                },
                GroupId::Torus(_) => GroupElement::Torus { x: vec![0.31, 0.62] },
            };
            let translated = GridFunction::from_fn(Arc::clone(&grid), |x| {
                let yx = compose(group, &y, x).unwrap();
                synth_at(&c, &yx).unwrap()
            });
            let got = forward(&translated).unwrap();
            let scale = plancherel_norm(&c);
            for (label, mat) in c.iter() {
                let xi_y = irrep_matrix(group, label, &y).unwrap();
                let expect = mat.dot(&xi_y);
                let diff = &got.entry_or_zero(label) - &expect;
                let worst = diff.iter().fold(0.0f64, |m, v| m.max(v.norm()));
                assert!(worst < 1e-9 * scale, "covariance at {label} on {group}");
            }
        }
    }

    #[test]
    fn sobolev_norm_weights_by_casimir() {
        let mut c = FourierCoefficients::zero(GroupId::Torus(1), HalfInt::from_int(5));
        let mut m = Array2::zeros((1, 1));
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        c.insert(IrrepLabel::torus(vec![5]), m).unwrap();
        assert!((sobolev_norm(&c, 2.0) - 25.0).abs() < 1e-12);
        assert!((sobolev_norm(&c, 0.0) - plancherel_norm(&c)).abs() < 1e-15);
        let mut trivial = FourierCoefficients::zero(GroupId::Su2, HalfInt::ZERO);
        let mut one = Array2::zeros((1, 1));
        one[(0, 0)] = Complex64::new(1.0, 0.0);
        trivial.insert(IrrepLabel::Su2 { two_l: 0 }, one).unwrap();
        for s in [-3.0, 0.0, 2.5] {
            assert!((sobolev_norm(&trivial, s) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn left_derivative_satisfies_eigen_relations() {
        // Torus: characters are eigenfunctions with eigenvalue 2πik_j.
        let grid = QuadratureGrid::get(GroupId::Torus(2), HalfInt::from_int(3)).unwrap();
        let f = GridFunction::from_fn(Arc::clone(&grid), |x| {
            let GroupElement::Torus { x } = x else { unreachable!() };
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (3.0 * x[0] - x[1]))
        });
        let df = left_derivative(&f, 1).unwrap();
        let expect = f.scale(Complex64::new(0.0, 6.0 * std::f64::consts::PI));
        let worst = df
            .values()
            .iter()
            .zip(expect.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(worst < 1e-10);

        // SU(2): D₃ on the first column of the spinor, eigenvalue ±i/2 per row;
        // checked against a central finite difference along the subgroup.
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_twice(3)).unwrap();
        let label = IrrepLabel::Su2 { two_l: 1 };
        let f = GridFunction::from_fn(Arc::clone(&grid), |x| {
            irrep_matrix(GroupId::Su2, &label, x).unwrap()[(0, 0)]
        });
        let df = left_derivative(&f, 3).unwrap();
        let expect = f.scale(Complex64::new(0.0, -0.5));
        let worst = df
            .values()
            .iter()
            .zip(expect.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(worst < 1e-10, "D₃ eigenvalue on spinor: worst {worst:.2e}");
        let h = 1e-5;
        let x0 = grid.element(17);
        let fd = (synth_at(&forward(&f).unwrap(), &compose(GroupId::Su2, &x0, &crate::group::su2::exp_axis(3, h)).unwrap()).unwrap()
            - synth_at(&forward(&f).unwrap(), &compose(GroupId::Su2, &x0, &crate::group::su2::exp_axis(3, -h)).unwrap()).unwrap())
            / (2.0 * h);
        let spectral = synth_at(&forward(&df).unwrap(), &x0).unwrap();
        assert!((fd - spectral).norm() < 1e-8);
    }

    #[test]
    fn conjugation_commutes_with_real_vector_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_int(2)).unwrap();
        let c = FourierCoefficients::random(GroupId::Su2, HalfInt::from_int(2), &mut rng).unwrap();
        let f = inverse(&c, &grid).unwrap();
        for axis in 1..=3 {
            let lhs = {
                let conj = GridFunction::new(
                    Arc::clone(&grid),
                    f.values().iter().map(|v| v.conj()).collect(),
                )
                .unwrap();
                left_derivative(&conj, axis).unwrap()
            };
            let rhs = left_derivative(&f, axis).unwrap();
            let worst = lhs
                .values()
                .iter()
                .zip(rhs.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b.conj()).norm()));
            assert!(worst < 1e-10, "axis {axis}: ∂(conj f) vs conj(∂f)");
        }
    }

    #[test]
    fn transforms_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_twice(5)).unwrap();
        let c1 = FourierCoefficients::random(GroupId::Su2, HalfInt::from_twice(5), &mut rng).unwrap();
        let c2 = FourierCoefficients::random(GroupId::Su2, HalfInt::from_twice(5), &mut rng).unwrap();
        let s = Complex64::new(0.3, -1.2);
        let f1 = inverse(&c1, &grid).unwrap();
        let f2 = inverse(&c2, &grid).unwrap();
        let combo = f1.scale(s).add(&f2).unwrap();
        let direct = forward(&combo).unwrap();
        let expect = c1.scale(s).add(&c2).unwrap();
        assert!(coeff_distance(&direct, &expect) < 1e-12 * (1.0 + plancherel_norm(&expect)));
    }

    #[test]
    fn support_limit_is_enforced() {
        let grid = QuadratureGrid::get(GroupId::Su2, HalfInt::from_int(1)).unwrap();
        let c = FourierCoefficients::zero(GroupId::Su2, HalfInt::from_int(4));
        assert!(matches!(
            inverse(&c, &grid),
            Err(Error::SupportExceedsGrid { .. })
        ));
        let mut small = FourierCoefficients::zero(GroupId::Su2, HalfInt::from_int(1));
        assert!(small
            .insert(IrrepLabel::Su2 { two_l: 6 }, Array2::zeros((7, 7)))
            .is_err());
    }
}
