//! Random instances for property tests and example runs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cpmaps::{CpMap, DensityFunctional};
use crate::hermlinalg::{c64, CMatrix, PsdMatrix};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) / c64(2f64.sqrt(), 0.0)
    })
}

/// Haar-random unitary via QR with the phase correction on `R`'s diagonal.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c64(d.norm(), 0.0) } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `G G*` with `G` an `n×rank` Gaussian matrix; full rank when `rank ≥ n`.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> PsdMatrix {
    let g = gaussian(rng, n, rank);
    PsdMatrix::trusted(&g * g.adjoint())
}

/// `U diag(λ) U*` for Haar `U`; the spectrum is padded with zeros up to `n`.
pub fn psd_with_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize, eigenvalues: &[f64]) -> PsdMatrix {
    assert!(eigenvalues.len() <= n && eigenvalues.iter().all(|&l| l >= 0.0));
    let u = unitary(rng, n);
    let mut d = CMatrix::zeros(n, n);
    for (i, &l) in eigenvalues.iter().enumerate() {
        d[(i, i)] = c64(l, 0.0);
    }
    PsdMatrix::trusted(&u * d * u.adjoint())
}

/// Rank-`rank` PSD matrix whose nonzero eigenvalues are drawn from `[lo, hi]`.
pub fn psd_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize, lo: f64, hi: f64) -> PsdMatrix {
    let spectrum: Vec<f64> = (0..rank.min(n)).map(|_| rng.gen_range(lo..=hi)).collect();
    psd_with_spectrum(rng, n, &spectrum)
}

/// Positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn pd<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> PsdMatrix {
    psd_conditioned(rng, n, n, lo, hi)
}

/// CP map `M_m → M_n` with `kraus_rank` Gaussian Kraus operators.
pub fn cp_map<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, kraus_rank: usize) -> CpMap {
    let kraus = (0..kraus_rank).map(|_| gaussian(rng, n, m)).collect();
    CpMap::from_kraus(m, n, kraus).expect("Kraus shapes match")
}

/// CP map whose Choi matrix has rank `rank` and nonzero spectrum in `[lo, hi]`.
pub fn cp_map_conditioned<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, rank: usize, lo: f64, hi: f64) -> CpMap {
    CpMap::from_choi_psd(m, n, psd_conditioned(rng, m * n, rank, lo, hi)).expect("Choi size matches")
}

/// Unital mixture of `terms` unitary conjugations on `M_n`.
pub fn unital_channel<R: Rng + ?Sized>(rng: &mut R, n: usize, terms: usize) -> CpMap {
    let w: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let kraus = w.iter().map(|&p| unitary(rng, n) * c64((p / total).sqrt(), 0.0)).collect();
    CpMap::from_kraus(n, n, kraus).expect("Kraus shapes match")
}

/// Full-rank density matrix of trace one.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityFunctional {
    let p = psd(rng, n, n);
    let t = p.trace();
    DensityFunctional::new(p.scale(1.0 / t).expect("positive trace")).expect("PSD")
}
