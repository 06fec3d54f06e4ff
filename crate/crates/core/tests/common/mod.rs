#![allow(dead_code)]

use cpmean_core::hermlinalg::{c64, max_abs, CMatrix, PsdMatrix};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

/// Eigenvalues and eigenvectors of the Hermitian part of `m`, via a Jacobi
/// sweep on the real form `[[X, -Y], [Y, X]]`. Each eigenvalue appears twice
/// there; the complex images of the real eigenvectors are thinned out with
/// pivoted Gram–Schmidt.
pub fn eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * c64(0.5, 0.0);
    let n = h.nrows();
    let mut a = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut v = DMatrix::<f64>::identity(2 * n, 2 * n);
    jacobi(&mut a, &mut v);
    let mut cand: Vec<CMatrix> =
        (0..2 * n).map(|k| CMatrix::from_fn(n, 1, |i, _| c64(v[(i, k)], v[(i + n, k)]))).collect();
    let mut out: Vec<(f64, CMatrix)> = Vec::new();
    while out.len() < n {
        let best = (0..cand.len()).max_by(|&x, &y| cand[x].norm().total_cmp(&cand[y].norm())).unwrap();
        let z = cand.swap_remove(best);
        let q = &z / c64(z.norm(), 0.0);
        for c in cand.iter_mut() {
            let p = (q.adjoint() * &*c)[(0, 0)];
            *c -= &q * p;
        }
        out.push(((q.adjoint() * &h * &q)[(0, 0)].re, q));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values = out.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| out[k].1[(i, 0)]);
    (values, vectors)
}

/// Cyclic two-sided Jacobi on a real symmetric matrix, accumulating rotations in `v`.
fn jacobi(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        let total: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total || off == 0.0 {
            return;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eig(m: &CMatrix) -> f64 {
    eig(m).0[0]
}

pub fn max_eig(m: &CMatrix) -> f64 {
    *eig(m).0.last().unwrap()
}

/// `a ≤ b` in the Löwner order up to `slack`.
pub fn loewner_leq(a: &CMatrix, b: &CMatrix, slack: f64) -> bool {
    min_eig(&(b - a)) >= -slack
}

/// `U f(Λ) U*` from a fresh eigendecomposition.
pub fn fun(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, u) = eig(m);
    let d =
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(values.len(), values.iter().map(|&l| c64(f(l), 0.0))));
    &u * d * u.adjoint()
}

/// Connection `A σ B` through the Radon–Nikodym route: with `C = A + B` and
/// `A' = C^{+1/2} A C^{+1/2}`, `A σ B = C^{1/2} g(A') C^{1/2}` where
/// `g(x) = x f((1-x)/x)`.
pub fn rn_connection(a: &CMatrix, b: &CMatrix, g: impl Fn(f64) -> f64) -> CMatrix {
    let c = a + b;
    let scale = max_eig(&c).max(0.0);
    let cut = 1e-10 * scale;
    let half = fun(&c, |l| if l > cut { l.sqrt() } else { 0.0 });
    let inv_half = fun(&c, |l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
    let a_prime = &inv_half * a * &inv_half;
    let ga = fun(&a_prime, |x| {
        // snap rounding noise at the endpoints, where g may be non-Lipschitz
        let x = if x < 1e-12 {
            0.0
        } else if x > 1.0 - 1e-12 {
            1.0
        } else {
            x
        };
        g(x)
    });
    // g is only meaningful on the support of C
    &half * ga * &half
}

/// `A #_α B` via the Radon–Nikodym route with `g(x) = x^{1-α} (1-x)^α`.
pub fn rn_power_mean(a: &CMatrix, b: &CMatrix, alpha: f64) -> CMatrix {
    rn_connection(a, b, |x| x.powf(1.0 - alpha) * (1.0 - x).powf(alpha))
}

pub fn psd(m: CMatrix) -> PsdMatrix {
    PsdMatrix::from_matrix(m).expect("PSD test matrix")
}

pub fn real_diag(d: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| c64(x, 0.0))))
}
