//! Library results checked against the independent reference computations
//! in `common`, plus property tests over random inputs.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeMap;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qwalk::coin::{CoinAssignment, CoinMatrix};
use qwalk::entanglement::{meyer_wallach_single, shannon_entropy};
use qwalk::evolution::{evolve_series, step, InitialState, Preset};
use qwalk::multiwalker::{meyer_wallach_two, post_select, two_photon_map};
use qwalk::optical::{circuit_unitary, export_circuit, import_circuit, to_circuit};
use qwalk::spectral::{analyze, eigen_spectrum, rationalize, revival_time};
use qwalk::sweep::{entanglement_sweep, grid, line_walk};
use qwalk::{
    BasisIndex, Execution, GlobalUnitary, Graph, Metric, TwoWalkerState, WalkerState, C64,
};
use rand::Rng;

fn random_coins(g: &Graph, seed: u64) -> CoinAssignment {
    let mut rng = rng(seed);
    let m = (1..=g.n_vertices())
        .map(|x| (x, random_unitary(g.degree(x), &mut rng)))
        .collect();
    CoinAssignment::from_matrices(g, m).unwrap()
}

fn physical_state(g: &Graph, seed: u64) -> BTreeMap<(usize, usize), C64> {
    let mut rng = rng(seed);
    let mut terms = BTreeMap::new();
    for x in 1..=g.n_vertices() {
        for &c in g.in_coins(x) {
            terms.insert((x, c), random_complex(&mut rng));
        }
    }
    let norm = terms.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    terms.values_mut().for_each(|a| *a /= norm);
    terms
}

fn test_graphs() -> Vec<Graph> {
    let mut out: Vec<Graph> = (2..=6).map(|n| Graph::line(n).unwrap()).collect();
    out.push(Graph::from_neighborhoods(vec![vec![2, 3], vec![1, 3], vec![1, 2]]).unwrap());
    out.push(Graph::from_neighborhoods(vec![vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]]).unwrap());
    // directed 4-cycle with self-loops
    out.push(
        Graph::from_neighborhoods(vec![vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 1]]).unwrap(),
    );
    out
}

#[test]
fn step_matches_walker_rewriting_on_physical_states() {
    for (k, g) in test_graphs().into_iter().enumerate() {
        let coins = random_coins(&g, 100 + k as u64);
        let u = GlobalUnitary::build(&g, &coins).unwrap();
        let mut terms = physical_state(&g, 200 + k as u64);
        let mut s = WalkerState::new(terms_to_vec(g.n_vertices(), &terms)).unwrap();
        for t in 0..20 {
            terms = rewrite_step(&g, &coins, &terms);
            s = step(&u, &s).unwrap();
            let want = terms_to_vec(g.n_vertices(), &terms);
            let diff = max_vec_diff(s.amplitudes(), &want);
            assert!(diff < 1e-12, "graph {k} step {t}: {diff:e}");
        }
    }
}

#[test]
fn physical_states_never_leak_into_unphysical_slots() {
    for (k, g) in test_graphs().into_iter().enumerate() {
        let coins = random_coins(&g, 300 + k as u64);
        let u = GlobalUnitary::build(&g, &coins).unwrap();
        let s0 =
            WalkerState::new(terms_to_vec(g.n_vertices(), &physical_state(&g, k as u64))).unwrap();
        for s in evolve_series(&u, &s0, 30).unwrap() {
            for (i, a) in s.amplitudes().iter().enumerate() {
                let b = BasisIndex::from_offset(i, g.n_vertices());
                if !g.is_physical(b.position, b.coin) {
                    assert_eq!(*a, C64::new(0.0, 0.0));
                }
            }
        }
    }
}

#[test]
fn physical_pair_count_is_twice_the_size_on_lines() {
    for n in 2..=10 {
        let g = Graph::line(n).unwrap();
        let count = (1..=n)
            .flat_map(|x| (1..=n).map(move |c| (x, c)))
            .filter(|&(x, c)| g.neighborhood(c).contains(&x))
            .count();
        assert_eq!(count, 2 * n);
        assert_eq!(g.physical_count(), count);
    }
}

#[test]
fn unitarity_holds_for_random_coins_on_all_test_graphs() {
    for (k, g) in test_graphs().into_iter().enumerate() {
        let u = GlobalUnitary::build(&g, &random_coins(&g, 400 + k as u64)).unwrap();
        assert!(u.unitarity_deviation() < 1e-12, "graph {k}");
        let dense = u.to_dense();
        let gram = dense.adjoint() * &dense;
        assert!(max_diff(&gram, &DMatrix::identity(g.dim(), g.dim())) < 1e-12);
    }
}

#[test]
fn eigenvalues_reproduce_trace_moments() {
    for n in 2..=6 {
        for delta in [0.2, 0.5, 0.85] {
            let (_, u) = line_walk(n, delta).unwrap();
            let spec = eigen_spectrum(&u).unwrap();
            let dense = u.to_dense();
            let mut power = dense.clone();
            for k in 1..=3 {
                let tr = power.trace();
                let sum: C64 = spec.eigenvalues.iter().map(|l| l.powi(k)).sum();
                assert!((tr - sum).norm() < 1e-8, "n={n} delta={delta} k={k}");
                power = &power * &dense;
            }
            for l in &spec.eigenvalues {
                assert!((l.norm() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn predicted_periods_are_minimal() {
    for n in [2, 4] {
        let (_, u) = line_walk(n, 0.5).unwrap();
        let spec = analyze(&u, 100, 1e-9).unwrap();
        let full = spec.predicted_period.unwrap() as usize;
        let phase_only = spec.period_up_to_phase.unwrap() as usize;
        let dense = u.to_dense();
        let id = DMatrix::<C64>::identity(dense.nrows(), dense.ncols());
        let mut p = id.clone();
        let mut first_identity = None;
        let mut first_scalar = None;
        for t in 1..=full {
            p = &dense * &p;
            let phase = p[(0, 0)];
            if first_scalar.is_none() && max_diff(&p, &(&id * phase)) < 1e-9 {
                first_scalar = Some(t);
            }
            if first_identity.is_none() && max_diff(&p, &id) < 1e-9 {
                first_identity = Some(t);
            }
        }
        assert_eq!(first_identity, Some(full), "n={n}");
        assert_eq!(first_scalar, Some(phase_only), "n={n}");
    }
}

#[test]
fn revival_time_matches_exhaustive_fidelity_scan() {
    let (g, u) = line_walk(3, 0.5).unwrap();
    let dense = u.to_dense();
    for threshold in [0.5, 0.9, 0.99] {
        for x in 1..=3 {
            for &c in g.in_coins(x) {
                let s0 = WalkerState::localized(&g, x, c).unwrap();
                let v0 = nalgebra::DVector::from_column_slice(s0.amplitudes());
                let mut v = v0.clone();
                let mut want = None;
                for t in 1..=500 {
                    v = &dense * v;
                    if v0.dotc(&v).norm() >= threshold {
                        want = Some(t);
                        break;
                    }
                }
                let got = revival_time(&u, &s0, threshold, 500).unwrap().map(|r| r.t);
                assert_eq!(got, want, "start ({x},{c}) threshold {threshold}");
            }
        }
    }
}

#[test]
fn two_photon_map_matches_fock_expansion_for_random_unitaries() {
    let mut rng = rng(11);
    for n in 2..=5 {
        let u = random_unitary(n, &mut rng);
        for (i, j) in TwoWalkerState::pairs(n) {
            let input = TwoWalkerState::input(n, i, j).unwrap();
            let got = two_photon_map(&u, input.coefficients()).unwrap();
            let want = fock_evolve(&u, input.coefficients());
            assert!(max_vec_diff(&got, &want) < 1e-12);
        }
    }
}

#[test]
fn post_selection_matches_fock_marginals() {
    let mut rng = rng(12);
    for n in [2, 3, 4, 9] {
        let dense = random_unitary(n, &mut rng);
        let u = GlobalUnitary::from_dense(&dense).unwrap();
        for (i, j) in TwoWalkerState::pairs(n) {
            let input = TwoWalkerState::input(n, i, j).unwrap();
            let out = fock_evolve(&dense, input.coefficients());
            let amp = |a: usize, b: usize| {
                let (k, l) = if a <= b { (a, b) } else { (b, a) };
                let idx = TwoWalkerState::pairs(n).position(|p| p == (k, l)).unwrap();
                out[idx]
            };
            for m in 1..=n {
                let want: f64 = (1..=n)
                    .filter(|&k| k != m)
                    .map(|k| amp(m, k).norm_sqr())
                    .sum();
                let got = post_select(&u, i, j, m).unwrap();
                assert!(
                    (got.probability - want).abs() < 1e-12,
                    "n={n} ({i},{j}) m={m}"
                );
                if let Some(state) = got.conditional_state {
                    let scale = want.sqrt();
                    for k in 1..=n {
                        let expect = if k == m {
                            C64::new(0.0, 0.0)
                        } else {
                            amp(m, k) / scale
                        };
                        assert!((state.amplitudes()[k - 1] - expect).norm() < 1e-10);
                    }
                }
            }
        }
    }
}

/// Meyer-Wallach of a two-photon state by partial trace over the full
/// `3^N` qutrit occupation space.
fn meyer_wallach_qutrits(n: usize, coeffs: &[C64]) -> f64 {
    let dim = 3usize.pow(n as u32);
    let mut full = vec![C64::new(0.0, 0.0); dim];
    for ((k, l), &c) in TwoWalkerState::pairs(n).zip(coeffs) {
        let mut idx = 3usize.pow(k as u32 - 1);
        idx += 3usize.pow(l as u32 - 1);
        full[idx] += c;
    }
    let mut purity = 0.0;
    for mode in 0..n {
        let w = 3usize.pow(mode as u32);
        let mut rho = [[C64::new(0.0, 0.0); 3]; 3];
        for env in 0..dim {
            if !(env / w).is_multiple_of(3) {
                continue;
            }
            for a in 0..3 {
                for b in 0..3 {
                    rho[a][b] += full[env + a * w] * full[env + b * w].conj();
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                purity += (rho[a][b] * rho[b][a]).re;
            }
        }
    }
    1.0 - purity / n as f64
}

#[test]
fn two_walker_meyer_wallach_matches_qutrit_partial_trace() {
    let mut rng = rng(13);
    for n in 2..=6 {
        for _ in 0..10 {
            let coeffs = random_state(n * (n + 1) / 2, &mut rng);
            let s = TwoWalkerState::new(n, coeffs.clone()).unwrap();
            let want = meyer_wallach_qutrits(n, &coeffs);
            assert!((meyer_wallach_two(&s) - want).abs() < 1e-12, "n={n}");
        }
    }
}

#[test]
fn circuit_roundtrip_keeps_the_unitary() {
    for n in 2..=5 {
        let g = Graph::line(n).unwrap();
        let coins = random_coins(&g, 500 + n as u64);
        let c = to_circuit(&g, &coins).unwrap();
        let back = import_circuit(&export_circuit(&c)).unwrap();
        let a = circuit_unitary(&c).to_dense();
        let b = circuit_unitary(&back).to_dense();
        assert!(max_diff(&a, &b) < 1e-15);
        let built = GlobalUnitary::build(&g, &coins).unwrap().to_dense();
        assert!(max_diff(&a, &built) < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_execution_agree() {
    let points = grid(&[3, 5, 8], &[0.3, 0.5]);
    let initial = InitialState::Preset(Preset::Middle);
    let a =
        entanglement_sweep(Execution::Sequential, &points, initial, Metric::Shannon, 40).unwrap();
    let b =
        entanglement_sweep(Execution::default(), &points, initial, Metric::Shannon, 40).unwrap();
    assert_eq!(a, b);

    let (g, u) = line_walk(40, 0.5).unwrap();
    let s = WalkerState::new(random_state(g.dim(), &mut rng(14))).unwrap();
    let mut x = vec![C64::new(0.0, 0.0); g.dim()];
    let mut y = x.clone();
    u.apply_with(Execution::Sequential, s.amplitudes(), &mut x);
    u.apply_with(Execution::default(), s.amplitudes(), &mut y);
    assert_eq!(x, y);
}

#[test]
fn coin_grid_is_unitary_and_involutive() {
    for k in 0..=100 {
        let delta = k as f64 / 100.0;
        let h = CoinMatrix::hadamard_biased(delta).unwrap();
        let m = h.matrix();
        assert!(qwalk::linalg::unitarity_deviation(m) < 1e-12);
        assert!(max_diff(&(m * m), &DMatrix::identity(2, 2)) < 1e-12);
    }
}

fn complex_vec(max_len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=max_len).prop_filter_map(
        "zero vector",
        |v| {
            let v: Vec<C64> = v.into_iter().map(|(re, im)| C64::new(re, im)).collect();
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| v.into_iter().map(|a| a / norm).collect())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_index_is_a_bijection(d in 1usize..40, x in 1usize..40, c in 1usize..40) {
        prop_assume!(x <= d && c <= d);
        let b = BasisIndex::new(x, c);
        let flat = b.flat(d);
        prop_assert!((1..=d * d).contains(&flat));
        prop_assert_eq!(BasisIndex::from_flat(flat, d), b);
    }

    #[test]
    fn shannon_is_invariant_under_permutation_and_phase(v in complex_vec(25), seed in any::<u64>(), theta in 0.0f64..6.3) {
        let s = WalkerState::new(v.clone()).unwrap();
        let mut shuffled = v.clone();
        let mut r = rng(seed);
        for i in (1..shuffled.len()).rev() {
            let j = r.random_range(0..=i);
            shuffled.swap(i, j);
        }
        let phase = C64::from_polar(1.0, theta);
        let t = WalkerState::new(shuffled.into_iter().map(|a| a * phase).collect()).unwrap();
        let a = shannon_entropy(&s).unwrap();
        let b = shannon_entropy(&t).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!(a >= -1e-15 && a <= (v.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn meyer_wallach_closed_form_matches_partial_trace(v in complex_vec(12)) {
        let s = WalkerState::new(v).unwrap();
        let want = meyer_wallach_partial_trace(s.amplitudes());
        prop_assert!((meyer_wallach_single(&s).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rationalize_finds_the_smallest_denominator(x in 0.0f64..1.0, q_max in 1u64..300, k in 2i32..7) {
        let eps = 10f64.powi(-k);
        prop_assert_eq!(rationalize(x, q_max, eps), scan_rational(x, q_max, eps));
    }

    #[test]
    fn rationalize_recovers_exact_fractions(q in 1u64..2000, p_raw in 0u64..2000) {
        let p = p_raw % q;
        let g = gcd(p, q);
        let x = p as f64 / q as f64;
        prop_assert_eq!(rationalize(x, 10_000, 1e-9), Some((p / g, q / g)));
    }

    #[test]
    fn two_photon_map_is_linear(seed in any::<u64>(), n in 2usize..6, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut r = rng(seed);
        let u = random_unitary(n, &mut r);
        let len = n * (n + 1) / 2;
        let x: Vec<C64> = (0..len).map(|_| random_complex(&mut r)).collect();
        let y: Vec<C64> = (0..len).map(|_| random_complex(&mut r)).collect();
        let (ca, cb) = (C64::new(a, 0.5), C64::new(-0.25, b));
        let mix: Vec<C64> = x.iter().zip(&y).map(|(p, q)| ca * p + cb * q).collect();
        let lhs = two_photon_map(&u, &mix).unwrap();
        let fx = two_photon_map(&u, &x).unwrap();
        let fy = two_photon_map(&u, &y).unwrap();
        let rhs: Vec<C64> = fx.iter().zip(&fy).map(|(p, q)| ca * p + cb * q).collect();
        prop_assert!(max_vec_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn single_walker_norm_is_conserved(n in 2usize..12, delta in 0.0f64..=1.0, seed in any::<u64>()) {
        let (g, u) = line_walk(n, delta).unwrap();
        let s0 = WalkerState::new(random_state(g.dim(), &mut rng(seed))).unwrap();
        for s in evolve_series(&u, &s0, 50).unwrap() {
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
