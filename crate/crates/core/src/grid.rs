//! Quadrature grids that pair band-limited functions exactly.
//!
//! A grid at band limit `B` integrates products of two matrix coefficients
//! whose labels both lie within `B` without discretization error, so the
//! analysis/synthesis pair on such grids round-trips to rounding noise.
//!
//! * SU(2): a product grid in Euler angles. `α` and `γ` are equispaced
//!   (`γ` runs over `[0, 4π)` so the two spin parities decouple exactly),
//!   `β` uses Gauss–Legendre in `cos β`. After the `γ` sum forces the column
//!   frequencies to match, the surviving `β`-integrand is a polynomial in
//!   `cos β` of degree at most `2B`, which the rule handles exactly.
//! * Torus(n): `2B+1` equispaced points per axis with uniform weights.
//!
//! Grids carry the Wigner-d tables and twiddle factors the transforms need,
//! so they are cached globally per `(group, band limit)` and shared as
//! `Arc`s.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use ndarray::Array3;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::group::{su2, GroupElement, GroupId};
use crate::linalg::gauss_legendre;
use crate::{Error, HalfInt, Result};

/// Upper bound on quadrature nodes per grid. Keeps an accidental
/// `--cutoff 500` from exhausting memory before it exhausts patience.
pub const NODE_BUDGET: u128 = 1 << 24;

#[derive(Debug)]
pub struct QuadratureGrid {
    group: GroupId,
    band_limit: HalfInt,
    kind: GridKind,
}

#[derive(Debug)]
pub(crate) enum GridKind {
    Su2 {
        alphas: Vec<f64>,
        betas: Vec<f64>,
        /// Gauss–Legendre weights divided by 2, so they sum to one; the full
        /// Haar weight of node `(a, b, c)` is `beta_weights[b] / (N_α N_γ)`.
        beta_weights: Vec<f64>,
        gammas: Vec<f64>,
        /// `wigner[two_l]` has shape `(n_β, two_l+1, two_l+1)`.
        wigner: Vec<Array3<f64>>,
        /// `w_gamma[j] = exp(2πi j / N_γ)`; `e^{i m γ_c} = w_gamma[two_m · c mod N_γ]`.
        w_gamma: Vec<Complex64>,
        /// `w_half_alpha[j] = exp(πi j / N_α)`; `e^{i m' α_a} = w_half_alpha[two_m' · a mod 2N_α]`.
        w_half_alpha: Vec<Complex64>,
    },
    Torus {
        n: usize,
        points_per_axis: usize,
    },
}

static GRID_CACHE: Lazy<Mutex<BTreeMap<(GroupId, i64), Arc<QuadratureGrid>>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// Drop all cached grids. Useful between large runs with different cutoffs.
pub fn clear_grid_cache() {
    GRID_CACHE.lock().unwrap().clear();
}

impl QuadratureGrid {
    /// Fetch (or build and cache) the grid for `group` at band limit `band_limit`.
    pub fn get(group: GroupId, band_limit: HalfInt) -> Result<Arc<Self>> {
        if band_limit < HalfInt::ZERO {
            return Err(Error::InvalidLabel(format!(
                "band limit {band_limit} must be nonnegative"
            )));
        }
        if matches!(group, GroupId::Torus(_)) && !band_limit.is_integer() {
            return Err(Error::InvalidLabel(format!(
                "torus band limit {band_limit} must be an integer"
            )));
        }
        let key = (group, band_limit.twice());
        if let Some(found) = GRID_CACHE.lock().unwrap().get(&key) {
            return Ok(Arc::clone(found));
        }
        let built = Arc::new(Self::build(group, band_limit)?);
        let mut cache = GRID_CACHE.lock().unwrap();
        // A racing builder may have inserted meanwhile; keep the first.
        Ok(Arc::clone(
            cache.entry(key).or_insert_with(|| Arc::clone(&built)),
        ))
    }

    fn build(group: GroupId, band_limit: HalfInt) -> Result<Self> {
        let nodes = Self::node_count_for(group, band_limit);
        if nodes > NODE_BUDGET {
            return Err(Error::MemoryBudget {
                requested: band_limit,
                nodes,
                budget: NODE_BUDGET,
            });
        }
        let kind = match group {
            GroupId::Su2 => {
                let two_b = band_limit.twice() as usize;
                let n_alpha = two_b + 1;
                let n_beta = two_b / 2 + 1;
                let n_gamma = 2 * two_b + 1;
                let alphas: Vec<f64> = (0..n_alpha)
                    .map(|a| 2.0 * std::f64::consts::PI * a as f64 / n_alpha as f64)
                    .collect();
                let gammas: Vec<f64> = (0..n_gamma)
                    .map(|c| 4.0 * std::f64::consts::PI * c as f64 / n_gamma as f64)
                    .collect();
                let (u, w) = gauss_legendre(n_beta);
                // Ascending u = cos β means descending β; flip to ascending β.
                let mut betas: Vec<f64> = u.iter().rev().map(|&ui| ui.acos()).collect();
                let beta_weights: Vec<f64> = w.iter().rev().map(|&wi| wi / 2.0).collect();
                // Guard against acos rounding drifting outside (0, π).
                for b in betas.iter_mut() {
                    *b = b.clamp(0.0, std::f64::consts::PI);
                }
                let wigner: Vec<Array3<f64>> = (0..=two_b)
                    .into_par_iter()
                    .map(|two_l| {
                        let dim = two_l + 1;
                        let mut table = Array3::zeros((n_beta, dim, dim));
                        for (b, &beta) in betas.iter().enumerate() {
                            let d = su2::wigner_d(two_l as u32, beta);
                            table.index_axis_mut(ndarray::Axis(0), b).assign(&d);
                        }
                        table
                    })
                    .collect();
                let w_gamma: Vec<Complex64> = (0..n_gamma)
                    .map(|j| {
                        Complex64::from_polar(
                            1.0,
                            2.0 * std::f64::consts::PI * j as f64 / n_gamma as f64,
                        )
                    })
                    .collect();
                let w_half_alpha: Vec<Complex64> = (0..2 * n_alpha)
                    .map(|j| {
                        Complex64::from_polar(
                            1.0,
                            std::f64::consts::PI * j as f64 / n_alpha as f64,
                        )
                    })
                    .collect();
                GridKind::Su2 {
                    alphas,
                    betas,
                    beta_weights,
                    gammas,
                    wigner,
                    w_gamma,
                    w_half_alpha,
                }
            }
            GroupId::Torus(n) => GridKind::Torus {
                n,
                points_per_axis: 2 * band_limit.as_int().unwrap() as usize + 1,
            },
        };
        Ok(QuadratureGrid {
            group,
            band_limit,
            kind,
        })
    }

    fn node_count_for(group: GroupId, band_limit: HalfInt) -> u128 {
        match group {
            GroupId::Su2 => {
                let two_b = band_limit.twice() as u128;
                (two_b + 1) * (two_b / 2 + 1) * (2 * two_b + 1)
            }
            GroupId::Torus(n) => {
                let per_axis = 2 * band_limit.twice().div_euclid(2).unsigned_abs() as u128 + 1;
                per_axis.pow(n as u32)
            }
        }
    }

    pub fn group(&self) -> GroupId {
        self.group
    }

    pub fn band_limit(&self) -> HalfInt {
        self.band_limit
    }

    pub(crate) fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            GridKind::Su2 {
                alphas,
                betas,
                gammas,
                ..
            } => alphas.len() * betas.len() * gammas.len(),
            GridKind::Torus { n, points_per_axis } => points_per_axis.pow(*n as u32),
        }
    }

    /// Shape of the index space: SU(2) is `(N_α, n_β, N_γ)`, Torus(n) is
    /// `n` copies of the per-axis point count.
    pub fn index_shape(&self) -> Vec<usize> {
        match &self.kind {
            GridKind::Su2 {
                alphas,
                betas,
                gammas,
                ..
            } => vec![alphas.len(), betas.len(), gammas.len()],
            GridKind::Torus { n, points_per_axis } => vec![*points_per_axis; *n],
        }
    }

    /// The group element at a flat node index. Flat indices run in row-major
    /// (odometer, last axis fastest) order over [`Self::index_shape`].
    pub fn element(&self, flat: usize) -> GroupElement {
        match &self.kind {
            GridKind::Su2 {
                alphas,
                betas,
                gammas,
                ..
            } => {
                let n_gamma = gammas.len();
                let n_beta = betas.len();
                let c = flat % n_gamma;
                let b = (flat / n_gamma) % n_beta;
                let a = flat / (n_gamma * n_beta);
                GroupElement::Su2 {
                    alpha: alphas[a],
                    beta: betas[b],
                    gamma: gammas[c],
                }
            }
            GridKind::Torus { n, points_per_axis } => {
                let mut rest = flat;
                let mut coords = vec![0.0; *n];
                for j in (0..*n).rev() {
                    coords[j] = (rest % points_per_axis) as f64 / *points_per_axis as f64;
                    rest /= points_per_axis;
                }
                GroupElement::Torus { x: coords }
            }
        }
    }

    /// Normalized Haar weight of the node at a flat index; weights sum to 1.
    pub fn haar_weight(&self, flat: usize) -> f64 {
        match &self.kind {
            GridKind::Su2 {
                alphas,
                betas,
                beta_weights,
                gammas,
                ..
            } => {
                let n_gamma = gammas.len();
                let b = (flat / n_gamma) % betas.len();
                beta_weights[b] / (alphas.len() * n_gamma) as f64
            }
            GridKind::Torus { .. } => 1.0 / self.node_count() as f64,
        }
    }
}
