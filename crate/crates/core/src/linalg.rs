//! Small dense complex linear algebra: the matrix alias used throughout,
//! compensated summation, Gauss–Legendre rules, a cyclic Jacobi eigensolver
//! for Hermitian matrices, and the operator norm built on it.
//!
//! Everything here is deterministic: fixed sweep orders, fixed summation
//! orders, no randomized pivoting.

use ndarray::Array2;
use num_complex::Complex64;

/// Dense complex matrix; irrep dimensions stay small (≤ a few hundred).
pub type CMat = Array2<Complex64>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Array2::zeros((rows, cols))
}

pub fn eye(d: usize) -> CMat {
    let mut m = Array2::zeros((d, d));
    for i in 0..d {
        m[(i, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn adjoint(a: &CMat) -> CMat {
    let (r, c) = a.dim();
    let mut out = Array2::zeros((c, r));
    for i in 0..r {
        for j in 0..c {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

pub fn trace(a: &CMat) -> Complex64 {
    let mut t = czero();
    for i in 0..a.nrows().min(a.ncols()) {
        t += a[(i, i)];
    }
    t
}

/// Hilbert–Schmidt (Frobenius) norm, compensated.
pub fn hs_norm(a: &CMat) -> f64 {
    let mut s = Neumaier::new();
    for v in a.iter() {
        s.add(v.norm_sqr());
    }
    s.value().sqrt()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator. Used for norms and quadrature totals so
/// results do not depend on how rounding errors pile up in long sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Neumaier { sum: 0.0, comp: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// ---------------------------------------------------------------------------
// Gauss–Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// exact for polynomials of degree ≤ 2n−1. Newton iteration on Pₙ.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        // Guesses run from +1 side down; store ascending.
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) and, optionally, eigenvectors of a Hermitian
/// matrix via cyclic Jacobi with complex rotations. Deterministic sweep
/// order; off-diagonal mass is driven below `1e-14 * ||H||_F`.
pub fn hermitian_eigen(h: &CMat, with_vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let d = h.nrows();
    assert_eq!(d, h.ncols(), "hermitian_eigen needs a square matrix");
    let mut a = h.clone();
    let mut v = with_vectors.then(|| eye(d));
    let scale = hs_norm(h).max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    for _sweep in 0..40 {
        let mut off = Neumaier::new();
        for p in 0..d {
            for q in (p + 1)..d {
                off.add(a[(p, q)].norm_sqr());
            }
        }
        if (2.0 * off.value()).sqrt() <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let z = a[(p, q)];
                let r = z.norm();
                if r <= tol / (d as f64) {
                    continue;
                }
                let phase = z / r; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Strip the phase (P = diag(1, e^{−iφ}) on the pivot pair),
                // then the real Givens angle for [[app, r], [r, aqq]].
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = P·G: (col_p, col_q) <- (c col_p − s e^{−iφ} col_q,
                //                             s col_p + c e^{−iφ} col_q)
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * phase.conj() * s;
                    a[(k, q)] = akp * s + akq * phase.conj() * c;
                }
                // Rows pick up J†: (row_p, row_q) <- (c row_p − s e^{iφ} row_q,
                //                                     s row_p + c e^{iφ} row_q)
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                // Clean up what should be exactly zero / real.
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                if let Some(vm) = v.as_mut() {
                    for k in 0..d {
                        let vkp = vm[(k, p)];
                        let vkq = vm[(k, q)];
                        vm[(k, p)] = vkp * c - vkq * phase.conj() * s;
                        vm[(k, q)] = vkp * s + vkq * phase.conj() * c;
                    }
                }
            }
        }
    }

    // Quadratic convergence makes 40 sweeps generous for any irrep
    // dimension in use; a hot loop above can only exit early.
    let mut residual = Neumaier::new();
    for p in 0..d {
        for q in (p + 1)..d {
            residual.add(a[(p, q)].norm_sqr());
        }
    }
    debug_assert!(
        (2.0 * residual.value()).sqrt() <= 1e-10 * scale,
        "Jacobi sweeps did not converge: off-diagonal {:.3e} of scale {:.3e}",
        (2.0 * residual.value()).sqrt(),
        scale
    );

    let mut idx: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let lambda: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|vm| {
        let mut out = Array2::zeros((d, d));
        for (new_col, &old_col) in idx.iter().enumerate() {
            for k in 0..d {
                out[(k, new_col)] = vm[(k, old_col)];
            }
        }
        out
    });
    (lambda, vecs)
}

// ---------------------------------------------------------------------------
// Operator norm
// ---------------------------------------------------------------------------

/// Largest singular value. Exact closed forms for 1×1 and 2×2; otherwise the
/// Jacobi eigensolver on A*A (deterministic, accurate to ~1e-12 relative).
pub fn opnorm(a: &CMat) -> f64 {
    let (r, c) = a.dim();
    if r == 0 || c == 0 {
        return 0.0;
    }
    if r == 1 && c == 1 {
        return a[(0, 0)].norm();
    }
    if r == 2 && c == 2 {
        // Largest eigenvalue of A*A in closed form.
        let g = gram(a);
        let t = g[(0, 0)].re + g[(1, 1)].re;
        let diff = g[(0, 0)].re - g[(1, 1)].re;
        let disc = (diff * diff + 4.0 * g[(0, 1)].norm_sqr()).sqrt();
        return (0.5 * (t + disc)).max(0.0).sqrt();
    }
    let g = gram(a);
    let (lambda, _) = hermitian_eigen(&g, false);
    lambda.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

fn gram(a: &CMat) -> CMat {
    let (r, c) = a.dim();
    let mut g = Array2::zeros((c, c));
    for i in 0..c {
        for j in 0..c {
            let mut s = czero();
            for k in 0..r {
                s += a[(k, i)].conj() * a[(k, j)];
            }
            g[(i, j)] = s;
        }
    }
    g
}

// ---------------------------------------------------------------------------
// Linear solves
// ---------------------------------------------------------------------------

/// Matrix inverse via LU with partial pivoting. Intended for the small,
/// well-conditioned resolvent matrices in the operator zoo.
pub fn inverse(a: &CMat) -> Option<CMat> {
    let d = a.nrows();
    assert_eq!(d, a.ncols());
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..d).collect();
    for col in 0..d {
        let (mut piv, mut best) = (col, lu[(col, col)].norm());
        for row in (col + 1)..d {
            let v = lu[(row, col)].norm();
            if v > best {
                piv = row;
                best = v;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != col {
            perm.swap(piv, col);
            for j in 0..d {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
        }
        let diag = lu[(col, col)];
        for row in (col + 1)..d {
            let f = lu[(row, col)] / diag;
            lu[(row, col)] = f;
            for j in (col + 1)..d {
                let sub = f * lu[(col, j)];
                lu[(row, j)] -= sub;
            }
        }
    }
    // Solve for each unit vector.
    let mut inv = Array2::zeros((d, d));
    for e in 0..d {
        let mut y = vec![czero(); d];
        for i in 0..d {
            let mut s = if perm[i] == e {
                Complex64::new(1.0, 0.0)
            } else {
                czero()
            };
            for j in 0..i {
                s -= lu[(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..d).rev() {
            let mut s = y[i];
            for j in (i + 1)..d {
                s -= lu[(i, j)] * inv[(j, e)];
            }
            inv[(i, e)] = s / lu[(i, i)];
        }
    }
    Some(inv)
}
