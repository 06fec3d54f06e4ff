mod common;

use common::*;
use cpmean_core::cpmaps::{leq_cp, zoo, CpMap, DensityFunctional};
use cpmean_core::hermlinalg::{c64, proj_intersection, support_projection, CMatrix, RANK_RTOL};
use cpmean_core::lebesgue::{
    ac_part, ac_part_oracle, decompose, is_abs_continuous, is_singular, rn_pair, support_inclusion,
    supports_orthogonal, tol_lim,
};
use cpmean_core::opmeans::parallel_sum;
use cpmean_core::sampling;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `Φ` with Choi spectrum in `[0.5, 2]` on a random `k`-dimensional subspace,
/// and `Ψ = G G*` whose columns mix vectors inside `ran C_Φ` with generic ones.
fn planted(r: &mut ChaCha8Rng, m: usize, n: usize) -> (CpMap, CpMap) {
    let d = m * n;
    let u = sampling::unitary(r, d);
    let k = r.gen_range(1..d);
    let spectrum: Vec<f64> = (0..k).map(|_| r.gen_range(0.5..2.0)).collect();
    let basis = u.columns(0, k).into_owned();
    let c_phi = &basis * real_diag(&spectrum) * basis.adjoint();
    let inside = r.gen_range(0..=k);
    let outside = r.gen_range(0..=(d - k).min(2));
    let mut cols = Vec::new();
    if inside > 0 {
        let g = &basis * sampling::gaussian(r, k, inside);
        cols.extend(g.column_iter().map(|c| c.into_owned()));
    }
    if outside > 0 {
        let g = sampling::gaussian(r, d, outside);
        cols.extend(g.column_iter().map(|c| c.into_owned()));
    }
    let c_psi = if cols.is_empty() {
        CMatrix::zeros(d, d)
    } else {
        let g = CMatrix::from_columns(&cols);
        &g * g.adjoint()
    };
    (CpMap::from_choi(m, n, c_phi).unwrap(), CpMap::from_choi(m, n, c_psi).unwrap())
}

/// Pairs on which `nΦ : Ψ` settles within `tol_lim` by `n = 2^20`: the part of
/// `Ψ` on `ran C_Φ` stays below `Φ`, and the rest leans only slightly into it.
fn balanced(r: &mut ChaCha8Rng, m: usize, n: usize) -> (CpMap, CpMap) {
    let d = m * n;
    let u = sampling::unitary(r, d);
    let k = r.gen_range(1..d);
    let inside = u.columns(0, k).into_owned();
    let outside = u.columns(k, d - k).into_owned();
    let spectrum: Vec<f64> = (0..k).map(|_| r.gen_range(1.0..2.0)).collect();
    let c_phi = &inside * real_diag(&spectrum) * inside.adjoint();
    let mut cols = Vec::new();
    for _ in 0..r.gen_range(0..=k) {
        let g = &inside * sampling::gaussian(r, k, 1);
        let norm = g.norm();
        cols.push(g * c64(r.gen_range(0.2..0.6) / norm, 0.0));
    }
    for _ in 0..r.gen_range(0..=(d - k).min(2)) {
        let g = &outside * sampling::gaussian(r, d - k, 1);
        let tilt = &inside * sampling::gaussian(r, k, 1);
        let (gn, tn) = (g.norm(), tilt.norm());
        cols.push(g * c64(1.0 / gn, 0.0) + tilt * c64(0.2 / tn, 0.0));
    }
    let c_psi = if cols.is_empty() {
        CMatrix::zeros(d, d)
    } else {
        let g = CMatrix::from_fn(d, cols.len(), |i, j| cols[j][(i, 0)]);
        &g * g.adjoint()
    };
    (CpMap::from_choi(m, n, c_phi).unwrap(), CpMap::from_choi(m, n, c_psi).unwrap())
}

fn dims(trial: usize) -> (usize, usize) {
    [(1, 2), (2, 1), (2, 2), (1, 3), (2, 3), (3, 2), (3, 3)][trial % 7]
}

fn scale(psi: &CpMap) -> f64 {
    psi.choi().norm().max(1.0)
}

/// Short of `B` to the subspace `S`: `B - B Q (Q B Q)⁺ Q B` with `Q` the
/// projection onto `S^⊥`.
fn short(b: &CMatrix, s_projection: &CMatrix) -> CMatrix {
    let d = b.nrows();
    let q = CMatrix::identity(d, d) - s_projection;
    let qbq = &q * b * &q;
    let cut = 1e-10 * max_eig(b).max(f64::MIN_POSITIVE);
    let inv = fun(&qbq, |l| if l > cut { 1.0 / l } else { 0.0 });
    b - b * &q * inv * &q * b
}

fn projection_onto(m: &CMatrix, cutoff: f64) -> CMatrix {
    fun(m, |l| if l > cutoff { 1.0 } else { 0.0 })
}

#[test]
fn planted_pairs_split_additively_and_singularly() {
    let mut r = rng(51);
    for trial in 0..40 {
        let (m, n) = dims(trial);
        let (phi, psi) = planted(&mut r, m, n);
        let split = decompose(&phi, &psi).unwrap();
        let sum = split.ac.choi().matrix() + split.sing.choi().matrix();
        assert!(dist(&sum, psi.choi().matrix()) <= 1e-9 * scale(&psi), "trial {trial}");
        assert!(is_singular(&phi, &split.sing, 1e-8 * scale(&psi)).unwrap(), "trial {trial}");
        assert!(leq_cp(&split.ac, &psi, 1e-9).unwrap());
        assert!(split.alpha_min.is_finite(), "trial {trial}");

        // independent oracle: the short of C_Ψ to ran C_Φ
        let p_phi = projection_onto(phi.choi().matrix(), 1e-10 * phi.choi().norm());
        let want = short(psi.choi().matrix(), &p_phi);
        assert!(dist(split.ac.choi().matrix(), &want) <= 1e-7 * scale(&psi), "trial {trial}");
    }
}

#[test]
fn oracle_agrees_on_planted_pairs() {
    let mut r = rng(52);
    for trial in 0..40 {
        let (m, n) = dims(trial);
        let (phi, psi) = balanced(&mut r, m, n);
        let ac = ac_part(&phi, &psi).unwrap();
        let oracle = ac_part_oracle(&phi, &psi, 1 << 20).unwrap();
        let err = dist(ac.choi().matrix(), oracle.choi().matrix());
        assert!(err <= tol_lim(&psi), "trial {trial}: {err:e}");
    }
}

#[test]
fn ac_part_dominates_every_competitor() {
    let mut r = rng(53);
    for trial in 0..20 {
        let (m, n) = dims(trial);
        let (phi, psi) = planted(&mut r, m, n);
        let ac = ac_part(&phi, &psi).unwrap();
        let meet =
            proj_intersection(&support_projection(phi.choi(), RANK_RTOL), &support_projection(psi.choi(), RANK_RTOL))
                .unwrap();
        let mut competitors = Vec::new();
        for _ in 0..10 {
            let c = r.gen_range(0.05..=1.0);
            if meet.rank() > 0 {
                // short of C_Ψ to a random subspace W of ran C_Φ ∩ ran C_Ψ
                let q = r.gen_range(1..=meet.rank());
                let w = (meet.basis() * sampling::gaussian(&mut r, meet.rank(), q)).qr().q();
                let compressed = w.adjoint()
                    * fun(psi.choi().matrix(), |l| if l > 1e-10 * psi.choi().norm() { 1.0 / l } else { 0.0 })
                    * &w;
                let theta = &w * fun(&compressed, |l| 1.0 / l) * w.adjoint() * c64(c, 0.0);
                competitors.push(theta);
            }
            let scale_n = 2f64.powi(r.gen_range(0..12));
            let p = parallel_sum(&phi.choi().scale(scale_n).unwrap(), psi.choi()).unwrap();
            competitors.push(p.matrix() * c64(c, 0.0));
        }
        for theta in competitors {
            let theta = CpMap::from_choi(m, n, theta).unwrap();
            // each competitor is dominated by Ψ and absolutely continuous with respect to Φ
            assert!(leq_cp(&theta, &psi, 1e-8).unwrap());
            assert!(is_abs_continuous(&theta, &phi, 1e-7 * scale(&psi)).unwrap());
            assert!(leq_cp(&theta, &ac, 1e-8).unwrap(), "trial {trial}");
        }
    }
}

#[test]
fn alpha_min_is_the_least_domination_constant() {
    let mut r = rng(54);
    let mut nontrivial = 0;
    for trial in 0..30 {
        let (m, n) = dims(trial);
        let (phi, psi) = planted(&mut r, m, n);
        let split = decompose(&phi, &psi).unwrap();
        let alpha = split.alpha_min;
        let ac = split.ac.choi().matrix();
        if split.ac.choi().norm() == 0.0 {
            assert_eq!(alpha, 0.0);
            continue;
        }
        nontrivial += 1;
        let c_phi = phi.choi().matrix();
        let slack = 1e-9 * scale(&psi);
        assert!(min_eig(&(c_phi * c64(alpha, 0.0) - ac)) >= -slack, "trial {trial}");
        let below = c_phi * c64(alpha * (1.0 - 1e-6), 0.0) - ac;
        assert!(min_eig(&below) < 0.0, "trial {trial}: α = {alpha} is not minimal");

        // oracle: largest generalized eigenvalue through C_Φ^{+1/2}
        let cut = 1e-10 * phi.choi().norm();
        let inv_half = fun(c_phi, |l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
        let want = max_eig(&(&inv_half * ac * &inv_half));
        assert!((alpha - want).abs() <= 1e-6 * want, "trial {trial}: {alpha} vs {want}");
    }
    assert!(nontrivial >= 15);
}

#[test]
fn radon_nikodym_pair_invariants() {
    let mut r = rng(55);
    for trial in 0..20 {
        let (m, n) = dims(trial);
        let (phi, psi) = planted(&mut r, m, n);
        let pair = rn_pair(&phi, &psi).unwrap();
        let tol = 1e-8 * scale(&psi).max(phi.choi().norm());
        let (a, b) = (pair.a_prime.matrix(), pair.b_prime.matrix());
        assert!(dist(&(a + b), pair.support.matrix()) <= tol);
        assert!(dist(&(a * b), &(b * a)) <= tol);
        let half = pair.c_half.matrix();
        assert!(dist(&(half * a * half), phi.choi().matrix()) <= tol);
        assert!(dist(&(half * b * half), psi.choi().matrix()) <= tol);

        let ac_exact = is_abs_continuous(&psi, &phi, 1e-7 * scale(&psi)).unwrap();
        assert_eq!(ac_exact, support_inclusion(&pair), "trial {trial}");
        let singular = is_singular(&phi, &psi, 1e-8 * scale(&psi)).unwrap();
        assert_eq!(singular, supports_orthogonal(&pair, 1e-8), "trial {trial}");
    }
}

#[test]
fn mutually_singular_and_dominated_pairs() {
    let mut r = rng(56);
    for n in 2..=4 {
        let u = sampling::unitary(&mut r, n);
        let k = n / 2;
        let p = psd(u.columns(0, k) * u.columns(0, k).adjoint());
        let q = psd(u.columns(k, n - k) * u.columns(k, n - k).adjoint());
        let phi = zoo::scalar_embedding(&p.scale(2.0).unwrap()).unwrap();
        let psi = zoo::scalar_embedding(&q.scale(0.7).unwrap()).unwrap();
        let split = decompose(&phi, &psi).unwrap();
        assert!(split.ac.choi().norm() <= 1e-12);
        assert_eq!(split.alpha_min, 0.0);
        assert!(is_singular(&phi, &psi, 1e-10).unwrap());

        // Ψ ≤ 3Φ is absolutely continuous
        let dominated = CpMap::from_choi(1, n, p.matrix() * c64(0.4, 0.0)).unwrap();
        let split = decompose(&phi, &dominated).unwrap();
        assert!(split.sing.choi().norm() <= 1e-10);
        assert!((split.alpha_min - 0.2).abs() <= 1e-9);
    }
}

#[test]
fn normal_functional_specialization() {
    // φ = Tr(ρ ·), ψ = Tr(σ ·) in the standard form of M_n: with ω = ρ + σ and
    // h_φ = ω^{-1/2} ρ ω^{-1/2}, the ac density is ω^{1/2} e_φ h_ψ ω^{1/2}
    let mut r = rng(57);
    for trial in 0..30 {
        let n = 2 + trial % 3;
        let rho = sampling::psd(&mut r, n, 1 + trial % n).into_matrix();
        let sigma = sampling::psd(&mut r, n, 1 + (trial / 3) % n).into_matrix();
        let phi = zoo::functional(&DensityFunctional::new(psd(rho.clone())).unwrap()).unwrap();
        let psi = zoo::functional(&DensityFunctional::new(psd(sigma.clone())).unwrap()).unwrap();

        let omega = &rho + &sigma;
        let cut = 1e-10 * max_eig(&omega);
        let half = fun(&omega, |l| if l > cut { l.sqrt() } else { 0.0 });
        let inv_half = fun(&omega, |l| if l > cut { 1.0 / l.sqrt() } else { 0.0 });
        let h_phi = &inv_half * &rho * &inv_half;
        let h_psi = &inv_half * &sigma * &inv_half;
        let e_phi = projection_onto(&h_phi, 1e-10);
        let ac_density = &half * &e_phi * &h_psi * &half;

        let split = decompose(&phi, &psi).unwrap();
        // functional Choi matrices are transposed densities
        let err = dist(&split.ac.choi().matrix().transpose(), &ac_density);
        assert!(err <= tol_lim(&psi), "trial {trial}: {err:e}");
        let sing_density = &half * (CMatrix::identity(n, n) - &e_phi) * &h_psi * &half;
        assert!(dist(&split.sing.choi().matrix().transpose(), &sing_density) <= tol_lim(&psi));
    }
}

#[test]
fn ando_recovery() {
    let mut r = rng(58);
    for trial in 0..50 {
        let n = 4;
        let a = sampling::psd(&mut r, n, 1 + trial % n);
        let b = sampling::psd(&mut r, n, 1 + (trial / 4) % n);
        let phi_a = zoo::scalar_embedding(&a).unwrap();
        let phi_b = zoo::scalar_embedding(&b).unwrap();
        let ac = ac_part(&phi_a, &phi_b).unwrap();
        let want = short(b.matrix(), &projection_onto(a.matrix(), 1e-10 * a.norm()));
        assert!(dist(ac.choi().matrix(), &want) <= 1e-6, "trial {trial}");

        let p = parallel_sum(&a, &b).unwrap();
        let c = a.matrix() + b.matrix();
        let pinv = fun(&c, |l| if l > 1e-10 * max_eig(&c) { 1.0 / l } else { 0.0 });
        let direct = a.matrix() * pinv * b.matrix();
        assert!(dist(p.matrix(), &direct) <= 1e-9 * a.norm().max(b.norm()).max(1.0), "trial {trial}");
        assert!(leq_cp(&ac, &phi_b, 1e-9).unwrap());
    }
}
