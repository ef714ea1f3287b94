//! SU(2) internals: z-y-z Euler parametrization with γ ∈ [0, 4π) (so the
//! group, not SO(3), is covered), angular momentum matrices, and Wigner
//! matrices t^l evaluated through an eigendecomposition of J₂.
//!
//! The eigendecomposition route keeps t^l unitary to ~d·ε at every spin used
//! here (the classical factorial-sum formula loses digits past l ≈ 25, which
//! would violate the 1e-12 orthogonality budget of the quadrature grids).

use crate::group::GroupElement;
use crate::linalg::{self, CMat};
use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// m-values of the spin-l irrep in row/column order (ascending, −l..l, as
/// twice their value).
pub fn two_m_values(two_l: u32) -> Vec<i64> {
    let t = two_l as i64;
    (0..=t).map(|i| -t + 2 * i).collect()
}

/// Angular momentum matrix J_axis (axis 1,2,3 = x,y,z) on the spin-l irrep,
/// in the ladder-operator convention with basis m = −l..l ascending.
pub fn angular_momentum(two_l: u32, axis: usize) -> CMat {
    let d = two_l as usize + 1;
    let mut m = Array2::zeros((d, d));
    match axis {
        3 => {
            for (i, tm) in two_m_values(two_l).iter().enumerate() {
                m[(i, i)] = Complex64::new(*tm as f64 / 2.0, 0.0);
            }
        }
        1 | 2 => {
            // Off-diagonal ladder amplitudes a_i = sqrt(l(l+1) − m(m+1)).
            let tl = two_l as i64;
            for i in 0..d.saturating_sub(1) {
                let tm = -tl + 2 * i as i64;
                let a = (((tl * (tl + 2) - tm * (tm + 2)) as f64) / 4.0).sqrt();
                if axis == 1 {
                    m[(i + 1, i)] = Complex64::new(a / 2.0, 0.0);
                    m[(i, i + 1)] = Complex64::new(a / 2.0, 0.0);
                } else {
                    m[(i + 1, i)] = Complex64::new(0.0, -a / 2.0);
                    m[(i, i + 1)] = Complex64::new(0.0, a / 2.0);
                }
            }
        }
        _ => panic!("SU(2) axis must be 1..=3"),
    }
    m
}

/// Cached eigendecomposition of J₂ with eigenvalues snapped to the exact
/// ladder −l..l. Shared by every grid and every direct evaluation.
struct J2Eigen {
    vectors: CMat,
    /// Exact eigenvalues m = −l..l.
    m: Vec<f64>,
}

static J2_CACHE: Lazy<Mutex<BTreeMap<u32, Arc<J2Eigen>>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

fn j2_eigen(two_l: u32) -> Arc<J2Eigen> {
    if let Some(e) = J2_CACHE.lock().unwrap().get(&two_l) {
        return Arc::clone(e);
    }
    let jy = angular_momentum(two_l, 2);
    let (_, v) = linalg::hermitian_eigen(&jy, true);
    let eig = Arc::new(J2Eigen {
        vectors: v.expect("eigenvectors requested"),
        m: two_m_values(two_l).iter().map(|&tm| tm as f64 / 2.0).collect(),
    });
    J2_CACHE.lock().unwrap().entry(two_l).or_insert_with(|| Arc::clone(&eig));
    eig
}

/// The (real) Wigner matrix d^l(β) = exp(−iβJ₂).
pub fn wigner_d(two_l: u32, beta: f64) -> Array2<f64> {
    let d = two_l as usize + 1;
    if two_l == 0 {
        let mut m = Array2::zeros((1, 1));
        m[(0, 0)] = 1.0;
        return m;
    }
    let eig = j2_eigen(two_l);
    let v = &eig.vectors;
    let phases: Vec<Complex64> = eig.m.iter().map(|&m| Complex64::from_polar(1.0, -beta * m)).collect();
    let mut out = Array2::zeros((d, d));
    for j in 0..d {
        for k in 0..d {
            let mut s = Complex64::new(0.0, 0.0);
            for (idx, ph) in phases.iter().enumerate() {
                s += v[(j, idx)] * ph * v[(k, idx)].conj();
            }
            debug_assert!(
                s.im.abs() < 1e-10,
                "d^l entries are real; got {s} at two_l={two_l} beta={beta} ({j},{k})"
            );
            out[(j, k)] = s.re;
        }
    }
    out
}

/// Full Wigner matrix t^l(α,β,γ) = diag(e^{−im'α}) · d^l(β) · diag(e^{−imγ}).
pub fn wigner_matrix(two_l: u32, alpha: f64, beta: f64, gamma: f64) -> CMat {
    let d = two_l as usize + 1;
    let small = wigner_d(two_l, beta);
    let tms = two_m_values(two_l);
    let row: Vec<Complex64> = tms
        .iter()
        .map(|&tm| Complex64::from_polar(1.0, -alpha * tm as f64 / 2.0))
        .collect();
    let col: Vec<Complex64> = tms
        .iter()
        .map(|&tm| Complex64::from_polar(1.0, -gamma * tm as f64 / 2.0))
        .collect();
    let mut out = Array2::zeros((d, d));
    for j in 0..d {
        for k in 0..d {
            out[(j, k)] = row[j] * small[(j, k)] * col[k];
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 2×2 realization and Euler extraction
// ---------------------------------------------------------------------------

/// The defining 2×2 matrix (the l=½ irrep) in closed form.
pub fn matrix2(x: &GroupElement) -> CMat {
    let GroupElement::Su2 { alpha, beta, gamma } = x else {
        panic!("matrix2 expects an SU(2) element");
    };
    let c = (beta / 2.0).cos();
    let s = (beta / 2.0).sin();
    let mut u = Array2::zeros((2, 2));
    u[(0, 0)] = Complex64::from_polar(c, (alpha + gamma) / 2.0);
    u[(0, 1)] = Complex64::from_polar(s, (alpha - gamma) / 2.0);
    u[(1, 0)] = -Complex64::from_polar(s, -(alpha - gamma) / 2.0);
    u[(1, 1)] = Complex64::from_polar(c, -(alpha + gamma) / 2.0);
    u
}

/// Euler angles (α ∈ [0,2π), β ∈ [0,π], γ ∈ [0,4π)) of a unitary 2×2 matrix
/// with the layout produced by [`matrix2`]. The γ branch is chosen so the
/// half-integer irreps are single-valued.
pub fn element_from_matrix2(u: &CMat) -> GroupElement {
    let a = u[(0, 0)];
    let b = u[(0, 1)];
    let beta = 2.0 * b.norm().atan2(a.norm());
    let phi1 = if a.norm() > 1e-14 { a.arg() } else { 0.0 };
    let phi2 = if b.norm() > 1e-14 { b.arg() } else { 0.0 };
    let sum = phi1 + phi2; // (α+γ)/2 up to 2πℤ
    let diff = phi1 - phi2; // (α−γ)/2 up to 2πℤ
    let mut alpha = sum.rem_euclid(2.0 * PI);
    if alpha >= 2.0 * PI {
        // rem_euclid of a tiny negative rounds up to exactly 2π.
        alpha = 0.0;
    }
    // α = sum + 2π·p; recover p from the value actually stored so the
    // γ-branch parity stays consistent with any rounding fixup above.
    let p = ((alpha - sum) / (2.0 * PI)).round() as i64;
    let mut gamma = diff.rem_euclid(4.0 * PI);
    if gamma >= 4.0 * PI {
        gamma = 0.0;
    }
    // γ's 2π-ambiguity must match p's parity for ±U single-valuedness.
    if p.rem_euclid(2) == 1 {
        gamma = if gamma < 2.0 * PI { gamma + 2.0 * PI } else { gamma - 2.0 * PI };
    }
    GroupElement::Su2 { alpha, beta, gamma }
}

/// Rotation angle θ ∈ [0, 2π] of the conjugacy class (the eigenvalues of the
/// 2×2 realization are e^{±iθ/2}); also the geodesic distance to the
/// identity in the bi-invariant metric normalized to λ² = l(l+1).
pub fn rotation_angle(x: &GroupElement) -> f64 {
    let u = matrix2(x);
    let half_trace = (u[(0, 0)] + u[(1, 1)]).re / 2.0;
    2.0 * half_trace.clamp(-1.0, 1.0).acos()
}

/// The one-parameter subgroup exp(t·X_axis) where X_axis is the basis vector
/// whose derivative symbol is i·J_axis. Used by finite-difference tests.
pub fn exp_axis(axis: usize, t: f64) -> GroupElement {
    // exp(it J^{(1/2)}_axis) = cos(t/2) I + i sin(t/2) (2 J^{(1/2)}_axis).
    let j = angular_momentum(1, axis);
    let c = (t / 2.0).cos();
    let s = (t / 2.0).sin();
    let mut u = Array2::zeros((2, 2));
    for i in 0..2 {
        u[(i, i)] = Complex64::new(c, 0.0);
        for k in 0..2 {
            u[(i, k)] += Complex64::i() * s * (j[(i, k)] * 2.0);
        }
    }
    element_from_matrix2(&u)
}

#[cfg(test)]
pub fn random_element(rng: &mut impl rand::Rng) -> GroupElement {
    // Haar-uniform: normalize a complex Gaussian pair into the first row.
    loop {
        let g = |r: &mut dyn FnMut() -> f64| Complex64::new(r(), r());
        let mut draw = || rng.sample::<f64, _>(rand_distr::StandardNormal);
        let a = g(&mut draw);
        let b = g(&mut draw);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n > 1e-6 {
            let mut u = Array2::zeros((2, 2));
            u[(0, 0)] = a / n;
            u[(0, 1)] = b / n;
            u[(1, 0)] = -(b / n).conj();
            u[(1, 1)] = (a / n).conj();
            return element_from_matrix2(&u);
        }
    }
}

