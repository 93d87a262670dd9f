use num_complex::Complex;
use proptest::prelude::*;

use qnd_core::analysis::{
    martingale_defect, product_form_populations, recurrence_residuals, region_scan, relative_entropy, AxisRange,
    Extended, Grid, OutcomeDistribution,
};
use qnd_core::channel::ImperfectChannel;
use qnd_core::linalg::{fidelity, hermitian_eigen, psd_sqrt, ComplexMatrix, DensityMatrix};
use qnd_core::photon_box::{build_channel, build_eta, build_ideal_kraus, fock_basis, phase_factory, PhotonBoxParams};
use qnd_core::rng::RngStream;
use qnd_core::trajectory::{run, TrajectoryConfig};

fn hermitian(dim: usize, raw: &[f64]) -> ComplexMatrix<f64> {
    let m = ComplexMatrix::from_fn(dim, dim, |r, c| Complex::new(raw[2 * (r * dim + c)], raw[2 * (r * dim + c) + 1]));
    m.hermitized()
}

/// Convex mixture of a few seeded random pure states.
fn mixed_state(dim: usize, seed: u64) -> DensityMatrix<f64> {
    let mut rng = RngStream::new(seed);
    let k = 1 + (seed % 3) as usize;
    let weights: Vec<f64> = (0..k).map(|_| rng.uniform() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for w in weights {
        let psi = DensityMatrix::random_pure(dim, &mut rng).unwrap();
        acc = acc.add(&psi.matrix().scaled(w / total)).unwrap();
    }
    DensityMatrix::new(acc.hermitized()).unwrap()
}

fn distribution(raw: &[f64]) -> OutcomeDistribution<f64> {
    let s: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let labels = (0..raw.len()).map(|i| i.to_string()).collect();
    OutcomeDistribution::new(labels, probs).unwrap()
}

fn valid_params() -> impl Strategy<Value = PhotonBoxParams<f64>> {
    (
        1usize..7,
        0.0f64..1.0,
        0.0f64..1.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
        0.0f64..=1.0,
        0.0f64..=1.0,
        0.0f64..=1.0,
    )
        .prop_map(|(n_max, a, b, phi0, phi_r, eps_d, eta_g, eta_e)| {
            let p0 = a;
            let p1 = (1.0 - a) * b;
            PhotonBoxParams {
                n_max,
                p0,
                p1,
                p2: 1.0 - p0 - p1,
                phi0,
                phi_r,
                eps_d,
                eta_g,
                eta_e,
            }
        })
}

fn photon_box() -> (PhotonBoxParams<f64>, ImperfectChannel<f64>) {
    let p = PhotonBoxParams::default();
    let ch = build_channel(&p, None).unwrap();
    (p, ch)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstructs(dim in 1usize..7, raw in prop::collection::vec(-1.0f64..1.0, 72)) {
        let h = hermitian(dim, &raw);
        let e = hermitian_eigen(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h).unwrap() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let v = ComplexMatrix::from_fn(dim, dim, |r, c| e.vectors.get(r, c));
        let vv = v.adjoint().matmul(&v).unwrap();
        prop_assert!(vv.max_abs_diff(&ComplexMatrix::identity(dim)).unwrap() < 1e-10);
    }

    #[test]
    fn sqrt_squares_back(dim in 1usize..7, raw in prop::collection::vec(-1.0f64..1.0, 72)) {
        let h = hermitian(dim, &raw);
        let psd = h.matmul(&h).unwrap();
        let s = psd_sqrt(&psd).unwrap();
        prop_assert!(s.matmul(&s).unwrap().max_abs_diff(&psd).unwrap() < 1e-9);
    }

    #[test]
    fn fidelity_symmetric_and_bounded(dim in 2usize..6, a in any::<u64>(), b in any::<u64>()) {
        let rho = mixed_state(dim, a);
        let sigma = mixed_state(dim, b);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gibbs_inequality(p in prop::collection::vec(0.0f64..1.0, 2..8), seed in any::<u64>()) {
        prop_assume!(p.iter().sum::<f64>() > 1e-3);
        let mut rng = RngStream::new(seed);
        let q: Vec<f64> = p.iter().map(|_| rng.uniform() + 1e-3).collect();
        let (p, q) = (distribution(&p), distribution(&q));
        let s = relative_entropy(&p, &q).unwrap();
        prop_assert!(s >= Extended::Finite(0.0));
        prop_assert_eq!(relative_entropy(&p, &p).unwrap(), Extended::Finite(0.0));
        let equal = p.probs().iter().zip(q.probs()).all(|(a, b)| (a - b).abs() < 1e-12);
        if !equal {
            prop_assert!(s > Extended::Finite(0.0));
        }
    }

    #[test]
    fn eta_columns_stochastic(eps_d in 0.0f64..=1.0, eta_g in 0.0f64..=1.0, eta_e in 0.0f64..=1.0) {
        let p = PhotonBoxParams { eps_d, eta_g, eta_e, ..PhotonBoxParams::default() };
        let eta = build_eta(&p).unwrap();
        for j in 0..7 {
            prop_assert!((eta.column_sum(j) - 1.0).abs() < 1e-12);
        }
        for i in 0..6 {
            prop_assert_eq!(eta.get(i, 4), eta.get(i, 5));
        }
    }

    #[test]
    fn kraus_complete_and_diagonal(p in valid_params()) {
        let k = build_ideal_kraus(&p).unwrap();
        prop_assert!(k.completeness_deviation() < 1e-12);
        let n = ComplexMatrix::from_real_diagonal(&(0..p.dim()).map(|x| x as f64).collect::<Vec<_>>());
        for v in k.operators() {
            let comm = v.matmul(&n).unwrap().sub(&n.matmul(v).unwrap()).unwrap();
            prop_assert!(comm.max_abs() < 1e-12);
        }
    }

    #[test]
    fn branch_weights_sum_to_one(seed in any::<u64>()) {
        let (p, ch) = photon_box();
        let rho = mixed_state(p.dim(), seed);
        let total: f64 = (0..ch.outcomes().len()).map(|i| ch.apply_phi(i, &rho).unwrap().1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_step_martingale(seed in any::<u64>(), p in valid_params()) {
        let ch = build_channel(&p, None).unwrap();
        let rho = mixed_state(p.dim(), seed);
        let defect = martingale_defect(&ch, &fock_basis(&p), &rho).unwrap();
        prop_assert!(defect.iter().all(|d| *d < 1e-9));
    }

    #[test]
    fn snapshot_round_trip(p in valid_params(), noisy in any::<bool>()) {
        let dec = qnd_core::photon_box::DecoherenceParams { eps: 0.02, n_th: 0.03 };
        let ch = build_channel(&p, noisy.then_some(&dec)).unwrap();
        let back = ImperfectChannel::<f64>::from_json(&ch.to_json()).unwrap();
        prop_assert_eq!(back, ch);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn recurrence_and_product_form(seed in any::<u64>()) {
        let (p, ch) = photon_box();
        let basis = fock_basis(&p);
        let rho0 = mixed_state(p.dim(), seed);
        let mut cfg = TrajectoryConfig::new(200, seed, ch.clone(), rho0.clone());
        cfg.keep_states = true;
        let rec = run(&cfg, Some(&basis)).unwrap();
        let states = rec.true_states.as_ref().unwrap();
        let res = recurrence_residuals(&ch, &basis, states, &rec.outcomes).unwrap();
        prop_assert!(res.iter().all(|r| *r < 1e-9));

        let pointer = ch.pointer_distributions(&basis).unwrap();
        let q0 = basis.populations(&rho0);
        let product = product_form_populations(&q0, &pointer, &rec.outcomes);
        let recursion = rec.populations.as_ref().unwrap();
        for (a, b) in product.iter().zip(recursion) {
            for (x, y) in a.iter().zip(b) {
                // relative error, floored to absorb populations near zero
                prop_assert!((x - y).abs() <= 1e-7 * y.abs().max(1e-12) + 1e-15, "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let (p, ch) = photon_box();
        let rho0 = mixed_state(p.dim(), seed ^ 0x5eed);
        let cfg = TrajectoryConfig::new(300, seed, ch.clone(), rho0)
            .with_filter("hat", ch, DensityMatrix::maximally_mixed(p.dim()));
        let a = run(&cfg, Some(&fock_basis(&p))).unwrap();
        let b = run(&cfg, Some(&fock_basis(&p))).unwrap();
        prop_assert_eq!(&a.outcomes, &b.outcomes);
        prop_assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}

#[test]
fn scan_is_pure_and_holds_at_truth() {
    let p = PhotonBoxParams::default();
    let truth = build_channel(&p, None).unwrap();
    let basis = fock_basis(&p);
    let grid = Grid { phi0: AxisRange::new(0.6, 1.0, 9), phi_r: AxisRange::new(-0.6, -0.3, 7) };
    let a = region_scan(&truth, &basis, &grid, phase_factory(p, None)).unwrap();
    let b = region_scan(&truth, &basis, &grid, phase_factory(p, None)).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.nodes.len(), 63);

    let at_truth = Grid { phi0: AxisRange::new(p.phi0, p.phi0, 1), phi_r: AxisRange::new(p.phi_r, p.phi_r, 1) };
    for n_max in [1, 2, 4, 6, 9] {
        let q = p.with_n_max(n_max);
        let truth = build_channel(&q, None).unwrap();
        let basis = fock_basis(&q);
        if !qnd_core::channel::check_nondegeneracy(&truth, &basis).unwrap().passed {
            continue;
        }
        let r = region_scan(&truth, &basis, &at_truth, phase_factory(q, None)).unwrap();
        assert_eq!(r.nodes[0].verdict, Ok(qnd_core::analysis::Verdict::Holds), "n_max={n_max}");
    }
}

#[test]
fn single_precision_tracks_double() {
    let p32 = PhotonBoxParams::<f32>::default();
    let p64 = PhotonBoxParams::<f64>::default();
    let ch32 = build_channel(&p32, None).unwrap();
    let ch64 = build_channel(&p64, None).unwrap();
    let d32 = ch32.pointer_distributions(&fock_basis(&p32)).unwrap();
    let d64 = ch64.pointer_distributions(&fock_basis(&p64)).unwrap();
    for (a, b) in d32.iter().zip(&d64) {
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((*x as f64 - y).abs() < 1e-6);
        }
    }
    let cfg = TrajectoryConfig::new(500, 9, ch32.clone(), DensityMatrix::<f32>::maximally_mixed(5))
        .with_filter("hat", ch32, DensityMatrix::maximally_mixed(5));
    let rec = run(&cfg, Some(&fock_basis(&p32))).unwrap();
    let f = rec.final_fidelity(0).unwrap();
    // near-pure states: the square roots amplify f32 rounding to about sqrt(eps)
    assert!((f - 1.0).abs() < 2e-3, "{f}");
}
