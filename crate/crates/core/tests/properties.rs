mod common;

use delaysync::dde::{integrate, DelaySystem, IntegratorConfig};
use delaysync::graph::{builtin, laplacian, laplacian_eigenvalues, spectrum};
use delaysync::models::{HindmarshRose, NodeModel};
use delaysync::network::{initial_condition, reduced_laplacian, synchronized_state, NetworkSystem, StateBox};
use delaysync::sweep::{run_sweep, InitialConditions, NetworkTemplate, SweepGrid};
use delaysync::SyncConfig;
use proptest::prelude::*;

use common::{char_poly, random_connected_graph, real_roots};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_scales_with_weights(seed in any::<u64>(), c in 0.1..10.0f64) {
        let g = random_connected_graph(seed, 8);
        let base = laplacian_eigenvalues(&laplacian(&g)).unwrap();
        let scaled = laplacian_eigenvalues(&laplacian(&g.scaled(c).unwrap())).unwrap();
        let norm = base.iter().cloned().fold(0.0, f64::max);
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((c * a - b).abs() <= 1e-10 * c * norm.max(1.0));
        }
        let s = spectrum(&laplacian(&g)).unwrap();
        let t = spectrum(&laplacian(&g.scaled(c).unwrap())).unwrap();
        prop_assert!((s.quotient - t.quotient).abs() <= 1e-9 * s.quotient);
    }

    #[test]
    fn jacobi_matches_characteristic_polynomial(seed in any::<u64>()) {
        let g = random_connected_graph(seed, 4);
        let l = laplacian(&g);
        let eig = laplacian_eigenvalues(&l).unwrap();
        let poly = char_poly(l.matrix());
        let hi = 2.0 * g.max_degree() + 0.5;
        let roots = real_roots(&poly, -0.5, hi, 20_000);
        // Nearly repeated eigenvalues defeat the sign-change oracle.
        prop_assume!(roots.len() == g.k());
        for (r, e) in roots.iter().zip(&eig) {
            prop_assert!((r - e).abs() < 1e-9, "root {r} vs eigenvalue {e}");
        }
    }

    #[test]
    fn jacobi_matches_nalgebra(seed in any::<u64>()) {
        let g = random_connected_graph(seed, 8);
        let l = laplacian(&g);
        let k = g.k();
        let m = nalgebra::DMatrix::from_fn(k, k, |i, j| l.matrix()[(i, j)]);
        let mut reference: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let eig = laplacian_eigenvalues(&l).unwrap();
        for (a, b) in eig.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn reduced_laplacian_drops_the_zero_eigenvalue(seed in any::<u64>()) {
        let g = random_connected_graph(seed, 8);
        let l = laplacian(&g);
        let lt = reduced_laplacian(&l).unwrap();
        let k = g.k() - 1;
        let m = nalgebra::DMatrix::from_fn(k, k, |i, j| lt[(i, j)]);
        let ev = m.complex_eigenvalues();
        let mut re: Vec<f64> = ev.iter().map(|c| c.re).collect();
        re.sort_by(f64::total_cmp);
        let full = laplacian_eigenvalues(&l).unwrap();
        for (a, b) in re.iter().zip(&full[1..]) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(ev.iter().all(|c| c.im.abs() < 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synchronized_history_stays_synchronized(
        gamma in 0.0..12.0f64, tau in 0.0..6.0f64, seed in any::<u64>(), name in prop::sample::select(vec!["g1", "g2", "g4", "g7"])
    ) {
        let g = builtin(name).unwrap();
        let k = g.k();
        let node = initial_condition(1, &HindmarshRose.state_box(), &[], seed);
        let net = NetworkSystem::new(HindmarshRose, g, gamma, tau).unwrap();
        let cfg = IntegratorConfig::new(delaysync::dde::default_step(tau), 20.0, 50).unwrap();
        let traj = integrate(&net, &synchronized_state(k, &node), &cfg).unwrap();
        for (_, x) in traj.iter() {
            for i in 1..k {
                prop_assert_eq!(&x[..3], &x[3 * i..3 * i + 3]);
            }
        }
    }
}

struct Solo(f64);

impl DelaySystem for Solo {
    fn dim(&self) -> usize {
        3
    }
    fn delay(&self) -> f64 {
        self.0
    }
    fn derivative(&self, _t: f64, x: &[f64], _xd: &[f64], dx: &mut [f64]) {
        HindmarshRose.derivative(x, &[0.0], dx);
    }
}

#[test]
fn uncoupled_network_equals_independent_nodes() {
    for tau in [0.0, 0.7] {
        let g = builtin("g5").unwrap();
        let x0 = initial_condition(4, &HindmarshRose.state_box(), &[0, 1, 2], 11);
        let net = NetworkSystem::new(HindmarshRose, g, 0.0, tau).unwrap();
        let h = delaysync::dde::default_step(tau);
        let cfg = IntegratorConfig::new(h, 30.0, 7).unwrap();
        let traj = integrate(&net, &x0, &cfg).unwrap();
        for node in 0..4 {
            let solo = integrate(&Solo(tau), &x0[3 * node..3 * node + 3], &cfg).unwrap();
            for ((t, x), (ts, xs)) in traj.iter().zip(solo.iter()) {
                assert_eq!(t, ts);
                assert_eq!(&x[3 * node..3 * node + 3], xs);
            }
        }
    }
}

#[test]
fn sweeps_are_deterministic() {
    let template = NetworkTemplate {
        model: HindmarshRose,
        graph: builtin("path3").unwrap(),
        graph_id: "path3".into(),
    };
    let grid = SweepGrid::from_ranges((2.0, 8.0, 2.0), (0.0, 1.0, 0.5)).unwrap();
    let sync = SyncConfig {
        transient: 100.0,
        window: 20.0,
        ..SyncConfig::default()
    };
    let ics = InitialConditions {
        seeds: vec![1, 2],
        perturbed: vec![0, 2],
    };
    let first = run_sweep(&template, &grid, &sync, &ics, 1, None).unwrap();
    for workers in [1, 2, 5] {
        let again = run_sweep(&template, &grid, &sync, &ics, workers, None).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&first).unwrap());
    }
}

#[test]
fn sweep_rejects_bad_inputs() {
    let template = NetworkTemplate {
        model: HindmarshRose,
        graph: builtin("k2").unwrap(),
        graph_id: "k2".into(),
    };
    let grid = SweepGrid::from_ranges((1.0, 2.0, 1.0), (0.0, 0.0, 1.0)).unwrap();
    let sync = SyncConfig::default();
    assert!(run_sweep(&template, &grid, &sync, &InitialConditions::single(1), 0, None).is_err());
    let no_seeds = InitialConditions {
        seeds: vec![],
        perturbed: vec![0],
    };
    assert!(run_sweep(&template, &grid, &sync, &no_seeds, 1, None).is_err());
    let bad_component = InitialConditions {
        seeds: vec![1],
        perturbed: vec![3],
    };
    assert!(run_sweep(&template, &grid, &sync, &bad_component, 1, None).is_err());
}

#[test]
fn coupling_off_means_no_synchronization() {
    let template = NetworkTemplate {
        model: HindmarshRose,
        graph: builtin("k2").unwrap(),
        graph_id: "k2".into(),
    };
    let grid = SweepGrid::new(vec![0.0, 2.0], vec![0.0]).unwrap();
    let r = run_sweep(&template, &grid, &SyncConfig::default(), &InitialConditions::single(1), 1, None).unwrap();
    assert_eq!(r.verdicts, vec![vec![false], vec![true]]);
}
