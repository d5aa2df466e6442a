//! Randomized algebraic properties of the transform and solver kernels.
//!
//! The unit tests pin hand-sized examples; these run the same identities
//! over generated shapes and values. Tolerances are relative throughout.

use jdsim_core::baseline::{jd_chol, CholDepth};
use jdsim_core::cmat::{solve_hermitian, CMat, OpTally};
use jdsim_core::detector::{
    detect_fields, BinSolveMode, FieldWindows, JdfftOptions, MatchedFilterMode,
};
use jdsim_core::fft::FftPlan;
use jdsim_core::signal::{
    build_transfer_blocks, despread_field, spread_field, CodeSet,
};
use jdsim_core::structured::{
    correlation_spectrum, dense_block_dft_matrix, dense_circulant_a, dense_circulant_r,
    BlockBandSet,
};
use jdsim_core::{Cpx, SlotConfig};
use proptest::prelude::*;

fn cpx_strategy() -> impl Strategy<Value = Cpx> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Cpx::new(re, im))
}

fn cvec(len: usize) -> impl Strategy<Value = Vec<Cpx>> {
    proptest::collection::vec(cpx_strategy(), len)
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    cvec(rows * cols).prop_map(move |v| CMat::from_fn(rows, cols, |r, c| v[r * cols + c]))
}

/// Random band set with a Hermitian (not necessarily definite) zero band.
fn band_set(k: usize, l: usize) -> impl Strategy<Value = BlockBandSet> {
    proptest::collection::vec(cmat(k, k), l + 1).prop_map(move |mut blocks| {
        blocks[0].hermitize();
        BlockBandSet::from_blocks(blocks, 0.0).unwrap()
    })
}

fn norm(v: &[Cpx]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 32, failure_persistence: None, ..ProptestConfig::default()
    })]

    /// The circulant extension of any band set is diagonalized by the block
    /// DFT: `R_c = (1/P) D Lambda D^H`, with `D^H D = P I`.
    #[test]
    fn spectrum_diagonalizes_every_circulant_extension(
        (k, _l, p, bands) in (1usize..=4, 0usize..=3)
            .prop_flat_map(|(k, l)| {
                ((2 * l + 1).max(2)..=32usize)
                    .prop_flat_map(move |p| (Just(k), Just(l), Just(p), band_set(k, l)))
            })
    ) {
        let mut tally = OpTally::default();
        let spec = correlation_spectrum(&bands, p, &mut tally).unwrap();
        let rc = dense_circulant_r(&bands, p).unwrap();
        let d = dense_block_dft_matrix(p, k);

        let mut lambda = CMat::zeros(p * k, p * k);
        for bin in 0..p {
            for a in 0..k {
                for b in 0..k {
                    lambda.set(bin * k + a, bin * k + b, spec.block(bin).get(a, b));
                }
            }
        }
        let mut recon = d.mul(&lambda).mul(&d.adjoint());
        recon.scale(Cpx::new(1.0 / p as f64, 0.0));
        prop_assert!(recon.sub(&rc).frob() <= 1e-9 * rc.frob().max(1e-30));

        let mut gram = d.adjoint().mul(&d);
        gram.add_diag(-(p as f64));
        prop_assert!(gram.frob() <= 1e-10 * (p as f64) * (p * k) as f64);
    }

    /// Forward-then-inverse is the identity and the forward transform obeys
    /// Parseval with the unscaled-forward convention, at every length.
    #[test]
    fn dft_roundtrip_and_parseval_any_length(
        (n, x) in (1usize..=64).prop_flat_map(|n| (Just(n), cvec(n)))
    ) {
        let plan = FftPlan::new(n);
        let mut tally = OpTally::default();
        let mut y = x.clone();
        plan.transform(&mut y, false, &mut tally);
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((ey - n as f64 * ex).abs() <= 1e-9 * ey.max(1e-30));
        plan.transform(&mut y, true, &mut tally);
        for (a, b) in y.iter().zip(x.iter()) {
            prop_assert!((a - b).norm() <= 1e-12 * norm(&x).max(1.0));
        }
    }

    /// The transform is linear: `F(a x + y) = a F(x) + F(y)`.
    #[test]
    fn dft_is_linear(
        (n, x, y, a) in (2usize..=48)
            .prop_flat_map(|n| (Just(n), cvec(n), cvec(n), cpx_strategy()))
    ) {
        let plan = FftPlan::new(n);
        let mut tally = OpTally::default();
        let mut combined: Vec<Cpx> =
            x.iter().zip(y.iter()).map(|(xv, yv)| a * xv + yv).collect();
        plan.transform(&mut combined, false, &mut tally);
        let mut fx = x.clone();
        plan.transform(&mut fx, false, &mut tally);
        let mut fy = y.clone();
        plan.transform(&mut fy, false, &mut tally);
        let scale = norm(&combined).max(1.0);
        for i in 0..n {
            prop_assert!((combined[i] - (a * fx[i] + fy[i])).norm() <= 1e-11 * scale);
        }
    }

    /// Despreading inverts spreading up to the code energy `sf` when the
    /// code set is orthogonal.
    #[test]
    fn despread_inverts_spread_on_orthogonal_codes(
        (sf, k, d) in (0usize..=3, 1usize..=4)
            .prop_flat_map(|(logsf, k)| {
                let sf = 1usize << logsf;
                let k = k.min(sf);
                (Just(sf), Just(k), cvec(k * 4))
            })
    ) {
        let codes = CodeSet::walsh(sf, k).unwrap();
        let chips = spread_field(&d, &codes);
        let back = despread_field(&chips, &codes);
        prop_assert_eq!(back.len(), d.len());
        for (got, want) in back.iter().zip(d.iter()) {
            prop_assert!((got - want * sf as f64).norm() <= 1e-12 * sf as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 12, failure_persistence: None, ..ProptestConfig::default()
    })]

    /// Full-depth banded Cholesky actually solves the banded system: apply
    /// the dense matrix to the solution and recover the right-hand side.
    #[test]
    fn full_depth_solve_satisfies_the_normal_equations(
        (k, l, n_blocks, bands, v) in (1usize..=3, 0usize..=2)
            .prop_flat_map(|(k, l)| {
                ((l + 1)..=6usize).prop_flat_map(move |n| {
                    (Just(k), Just(l), Just(n), band_set(k, l), cvec(n * k))
                })
            })
    ) {
        // Diagonal dominance makes the random band set positive definite.
        let boost: f64 = (0..=l).map(|m| bands.band(m).frob()).sum::<f64>() * 2.0 + 1.0;
        let mut blocks: Vec<CMat> = (0..=l).map(|m| bands.band(m).clone()).collect();
        blocks[0].add_diag(boost);
        let bands = BlockBandSet::from_blocks(blocks, 0.0).unwrap();

        let mut tally = OpTally::default();
        let x = jd_chol(&bands, &v, CholDepth::Full, &mut tally).unwrap();
        let dense = bands.dense(n_blocks);
        let back = dense.matvec(&x);
        let scale = norm(&v).max(1.0);
        for (got, want) in back.iter().zip(v.iter()) {
            prop_assert!((got - want).norm() <= 1e-9 * scale);
        }
        let _ = (k, l);
    }

    /// On an exactly circulant observation the frequency-domain pipeline
    /// reproduces the dense regularized solve to rounding, for both bin
    /// solver variants.
    #[test]
    fn pipeline_matches_dense_solve_on_wrapped_observations(
        (sf, k, p, w, seedish, d) in (1usize..=2, 1usize..=3)
            .prop_flat_map(|(logsf, k)| {
                let sf = 1usize << logsf;
                let k = k.min(sf);
                (4usize..=8, 1usize..=4, 0u64..1000, Just((sf, k)))
                    .prop_flat_map(move |(p, w, seed, (sf, k))| {
                        (Just(sf), Just(k), Just(p), Just(w), Just(seed), cvec(p * k))
                    })
            })
    ) {
        let cfg = SlotConfig::new(sf, k, p, w, 1, (0..k).collect()).unwrap();
        // Both band wings must fit the processing length for the wrap to hold.
        prop_assume!(p >= 2 * cfg.delay_blocks() + 1);
        let codes = CodeSet::walsh_scrambled(sf, k, seedish).unwrap();
        let taps: Vec<Vec<Vec<Cpx>>> = (0..k)
            .map(|u| {
                vec![(0..w)
                    .map(|t| Cpx::new(
                        ((seedish + u as u64 * 37 + t as u64 * 11) % 19) as f64 / 19.0 + 0.1,
                        ((seedish + u as u64 * 13 + t as u64 * 7) % 17) as f64 / 17.0 - 0.5,
                    ))
                    .collect()]
            })
            .collect();
        let tb = build_transfer_blocks(&codes, &taps, &cfg).unwrap();
        let ac = dense_circulant_a(&tb, 0, p).unwrap();
        let r = ac.matvec(&d);
        let sigma2 = 0.05;
        let mut rc = ac.adjoint().mul(&ac);
        rc.add_diag(sigma2);
        let rhs = ac.adjoint_matvec(&r);
        let want = solve_hermitian(&rc, &rhs).unwrap();

        // Zero tail past the wrapped chips: folding then reads them back.
        let mut window = r;
        window.resize(p * sf + w - 1, Cpx::new(0.0, 0.0));
        let windows = FieldWindows { windows: [vec![window.clone()], vec![window]] };
        let scale = norm(&want).max(1.0);
        for solve in [BinSolveMode::Lu, BinSolveMode::ExplicitInverse] {
            let opts = JdfftOptions {
                p,
                matched_filter: MatchedFilterMode::Fft,
                bin_solve: solve,
                window_extension: true,
            };
            let out = detect_fields(&windows, &tb, sigma2, &cfg, &opts).unwrap();
            for f in 0..2 {
                prop_assert_eq!(out.soft[f].len(), p * k);
                for (got, want) in out.soft[f].iter().zip(want.iter()) {
                    prop_assert!(
                        (got - want).norm() <= 1e-9 * scale,
                        "field {} symbol error {}", f, (got - want).norm()
                    );
                }
            }
        }
    }
}
