use cvsep_core::channel::{evolve, BathSpec, RegularizedTime};
use cvsep_core::linalg::{self, Mat};
use cvsep_core::separability::{k_extendibility, lmi_separability, Separability, SepOptions};
use cvsep_core::states::{adesso, random_mixed_goe, random_pure, seeded_rng, RandomKind, RandomSpec};
use cvsep_core::symplectic::{
    beam_splitter, enumerate_bipartitions, omega, partial_transpose, permute_modes, ppt_check,
    single_mode_squeezer, two_mode_squeezer, Bipartition, CovMat, SympMat,
};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

fn random_state(seed: u64, pure: bool) -> CovMat {
    let mut rng = seeded_rng(seed, 0);
    if pure {
        random_pure(4, 14.0, &mut rng).unwrap()
    } else {
        random_mixed_goe(4, &mut rng).unwrap()
    }
}

fn random_mode_set(mask: u8) -> Vec<usize> {
    let mask = if mask % 16 == 0 { 1 } else { mask % 16 };
    (0..4).filter(|m| mask & (1 << m) != 0).collect()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_embedding_doubles_the_hermitian_spectrum(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = seeded_rng(seed, 1);
        let g = |rng: &mut rand_chacha::ChaCha8Rng| {
            use rand::Rng;
            Mat::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0))
        };
        let a = g(&mut rng);
        let b = g(&mut rng);
        let r = &a + a.transpose();
        let s = &b - b.transpose();
        let h = DMatrix::from_fn(d, d, |i, j| Complex::new(r[(i, j)], s[(i, j)]));
        let mut want: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().flat_map(|&x| [x, x]).collect();
        want = sorted(want);
        let got = sorted(linalg::sym_eigenvalues(&linalg::real_embed(&r, &s).unwrap()));
        for (x, y) in got.iter().zip(&want) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), pure in any::<bool>(), k in 0usize..7) {
        let v = random_state(seed, pure);
        let cut = &enumerate_bipartitions(4).unwrap()[k];
        let back = partial_transpose(&partial_transpose(&v, cut).unwrap(), cut).unwrap();
        prop_assert_eq!(back.matrix(), v.matrix());
    }

    #[test]
    fn ppt_test_does_not_depend_on_the_flipped_side(seed in any::<u64>(), pure in any::<bool>(), k in 0usize..7) {
        let v = random_state(seed, pure);
        let cut = &enumerate_bipartitions(4).unwrap()[k];
        let flipped_b = -cut.signed_form();
        let min_b = linalg::min_eigenvalue(&linalg::real_embed(v.matrix(), &flipped_b).unwrap());
        let min_a = ppt_check(&v, cut, 1e-9).unwrap().min_eig;
        prop_assert!((min_a - min_b).abs() < 1e-10);
        let via_pt = partial_transpose(&v, cut).unwrap().physicality(1e-9).min_eig;
        prop_assert!((min_a - via_pt).abs() < 1e-10);
    }

    #[test]
    fn circuit_elements_are_symplectic(theta in -3.2f64..3.2, r in -1.5f64..1.5, i in 0usize..4, j in 0usize..4) {
        prop_assume!(i != j);
        for s in [
            beam_splitter(4, i, j, theta).unwrap(),
            two_mode_squeezer(4, i, j, r).unwrap(),
            single_mode_squeezer(4, i, r).unwrap(),
        ] {
            let m = s.matrix();
            let err = linalg::max_abs_diff(&(m * omega(4) * m.transpose()), &omega(4));
            prop_assert!(err < 1e-12 * (1.0 + linalg::max_abs(m).powi(2)));
        }
    }

    #[test]
    fn random_pure_states_are_pure_with_the_requested_trace(seed in any::<u64>(), energy in 8.0f64..20.0) {
        let mut rng = seeded_rng(seed, 2);
        let v = random_pure(4, energy, &mut rng).unwrap();
        prop_assert!((v.trace() - energy).abs() < 1e-9 * energy);
        for nu in v.symplectic_eigenvalues().unwrap() {
            prop_assert!((nu - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn channel_composes_as_a_semigroup(
        seed in any::<u64>(), pure in any::<bool>(), mask in any::<u8>(),
        n in 0.0f64..10.0, t1 in 0.0f64..0.95, t2 in 0.0f64..0.95,
    ) {
        let v = random_state(seed, pure);
        let bath = BathSpec::new(n, &random_mode_set(mask)).unwrap();
        let two = evolve(
            &evolve(&v, &bath, RegularizedTime::new(t1).unwrap()).unwrap(),
            &bath,
            RegularizedTime::new(t2).unwrap(),
        ).unwrap();
        let t12 = 1.0 - (1.0 - t1) * (1.0 - t2);
        let one = evolve(&v, &bath, RegularizedTime::new(t12).unwrap()).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-10);
    }

    #[test]
    fn quiet_blocks_are_untouched(seed in any::<u64>(), mode in 0usize..4, tau in 0.0f64..0.999) {
        let v = random_state(seed, true);
        let out = evolve(&v, &BathSpec::new(4.0, &[mode]).unwrap(), RegularizedTime::new(tau).unwrap()).unwrap();
        for i in (0..4).filter(|&i| i != mode) {
            for j in (0..4).filter(|&j| j != mode) {
                prop_assert_eq!(out.block(i, j), v.block(i, j));
            }
        }
    }

    #[test]
    fn channel_commutes_with_mode_permutations(
        seed in any::<u64>(), mask in any::<u8>(), tau in 0.0f64..0.999, shift in 0usize..24,
    ) {
        let perms: Vec<Vec<usize>> = permutations4();
        let perm = &perms[shift];
        let v = random_state(seed, false);
        let bath = BathSpec::new(2.0, &random_mode_set(mask)).unwrap();
        let t = RegularizedTime::new(tau).unwrap();
        let lhs = evolve(&permute_modes(&v, perm).unwrap(), &bath.permuted(perm).unwrap(), t).unwrap();
        let rhs = permute_modes(&evolve(&v, &bath, t).unwrap(), perm).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn evolution_stays_physical(seed in any::<u64>(), pure in any::<bool>(), mask in any::<u8>(), n in 0.5f64..10.0, tau in 0.0f64..0.9999) {
        let v = random_state(seed, pure);
        let bath = BathSpec::new(n, &random_mode_set(mask)).unwrap();
        let out = evolve(&v, &bath, RegularizedTime::new(tau).unwrap()).unwrap();
        prop_assert!(out.is_physical(1e-9));
    }

    #[test]
    fn local_symplectics_preserve_ppt(seed in any::<u64>(), theta in -1.0f64..1.0, r in -0.8f64..0.8) {
        let v = random_state(seed, false);
        let cut = Bipartition::parse(4, "12:34").unwrap();
        // Local operations on 12 and on 34 separately.
        let local = beam_splitter(4, 0, 1, theta).unwrap()
            .then_after(&two_mode_squeezer(4, 2, 3, r).unwrap())
            .then_after(&single_mode_squeezer(4, 0, 0.5 * r).unwrap());
        let w = v.transformed(&local).unwrap();
        let before = ppt_check(&v, &cut, 1e-9).unwrap();
        let after = ppt_check(&w, &cut, 1e-9).unwrap();
        prop_assert!(before.min_eig.abs() < 1e-7 || before.passed == after.passed);
    }
}

fn permutations4() -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = vec![a, b, c, d];
                    let mut s = p.clone();
                    s.sort();
                    s.dedup();
                    if s.len() == 4 {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn adesso_is_symmetric_under_the_outer_and_inner_swap() {
    for (s, a) in [(0.6, 0.6), (0.3, 1.1), (1.0, 0.2)] {
        let v = adesso(s, a).unwrap();
        let swapped = permute_modes(&v, &[3, 2, 1, 0]).unwrap();
        assert!(v.max_abs_diff(&swapped) < 1e-12);
    }
}

#[test]
fn fixed_point_is_approached_monotonically() {
    for seed in 0..5 {
        let v = random_state(seed, seed % 2 == 0);
        let bath = BathSpec::all_modes(4.0, 4).unwrap();
        let target = Mat::identity(8, 8) * 4.5;
        let mut last = f64::INFINITY;
        for k in 0..100 {
            let tau = k as f64 * 0.01;
            let out = evolve(&v, &bath, RegularizedTime::new(tau).unwrap()).unwrap();
            let d = (out.matrix() - &target).norm();
            assert!(d <= last + 1e-12);
            last = d;
        }
    }
}

/// Inputs near the PPT boundary: random states partially thermalized.
fn lmi_test_states(count: u64) -> Vec<CovMat> {
    let pure = RandomSpec { modes: 4, kind: RandomKind::PureHaar { energy: 12.0 }, seed: 5 };
    let mixed = RandomSpec { modes: 4, kind: RandomKind::MixedGoe, seed: 6 };
    (0..count)
        .map(|i| {
            let v = if i % 2 == 0 { pure.sample(i) } else { mixed.sample(i) }.unwrap();
            let tau = (i % 10) as f64 * 0.07;
            let bath = BathSpec::new(2.0, &random_mode_set(i as u8 + 1)).unwrap();
            evolve(&v, &bath, RegularizedTime::new(tau).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn lmi_agrees_with_ppt_on_single_mode_cuts() {
    let opts = SepOptions::default();
    let cuts: Vec<Bipartition> = enumerate_bipartitions(4).unwrap().into_iter().filter(|c| c.is_single_mode()).collect();
    let mut checked = 0;
    for v in lmi_test_states(200) {
        for cut in &cuts {
            let ppt = ppt_check(&v, cut, 1e-9).unwrap();
            if ppt.min_eig.abs() < 1e-6 {
                continue;
            }
            let lmi = lmi_separability(&v, cut, &opts).unwrap();
            let sep = lmi.decision == Some(Separability::Separable);
            assert_eq!(sep, ppt.passed, "cut {cut}: min PT eig {}, lmi {:?}", ppt.min_eig, lmi.verdict.eta_star);
            checked += 1;
        }
    }
    assert!(checked > 700);
}

#[test]
fn lmi_agrees_with_ppt_for_two_modes() {
    let cut = Bipartition::parse(2, "1:2").unwrap();
    let opts = SepOptions::default();
    for i in 0..40u64 {
        let mut rng = seeded_rng(77, i);
        let v = random_mixed_goe(2, &mut rng).unwrap();
        let ppt = ppt_check(&v, &cut, 1e-9).unwrap();
        if ppt.min_eig.abs() < 1e-6 {
            continue;
        }
        let lmi = lmi_separability(&v, &cut, &opts).unwrap();
        assert_eq!(lmi.decision == Some(Separability::Separable), ppt.passed);
    }
}

#[test]
fn extendibility_margin_shrinks_with_k() {
    let opts = SepOptions::default();
    let cut = Bipartition::parse(4, "12:34").unwrap();
    for (i, v) in lmi_test_states(6).into_iter().enumerate() {
        let etas: Vec<f64> = (1..=4)
            .map(|k| {
                let r = k_extendibility(&v, &cut, k, &opts).unwrap();
                r.verdict.eta_star.or(r.verdict.eta_lower).unwrap()
            })
            .collect();
        for w in etas.windows(2) {
            assert!(w[1] <= w[0] + 1e-7, "state {i}: {etas:?}");
        }
    }
}

#[test]
fn ortho_symplectic_matrices_are_orthogonal() {
    let mut rng = seeded_rng(3, 3);
    let s: SympMat = cvsep_core::states::haar_ortho_symplectic(4, &mut rng).unwrap();
    let m = s.matrix();
    assert!(linalg::max_abs_diff(&(m * m.transpose()), &Mat::identity(8, 8)) < 1e-12);
    assert!(s.symplectic_error() < 1e-12);
}
