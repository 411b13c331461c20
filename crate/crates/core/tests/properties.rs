use dephase_core::kinetics::{
    boltzmann_rhs_fermion_boson, boltzmann_rhs_three_phonon, bose_einstein, build_kinetic_q, fermi_dirac,
    mean_occupations, FockBasis, ModeSpec, ProcessKind, ProcessSpec, ThreePhononChannel,
};
use dephase_core::master::{build_q_matrix, evolve_master_trajectory, Method, SystemSpec, Window};
use dephase_core::spectral::{apply_noncoherent, hadamard_square, random_hermitian, ProbabilityVector, UnitaryMatrix};
use dephase_core::stats::{sample_rng, Moments};
use dephase_core::timescale::{applicability_window, chi, DEFAULT_MARGIN};
use dephase_core::C64;
use proptest::prelude::*;
use rand::Rng;

fn random_probability(n: usize, seed: u64) -> ProbabilityVector {
    let mut rng = sample_rng(seed, 1);
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.iter().map(|x| x / s).collect()).unwrap()
}

fn random_spec(n: usize, scale: f64, seed: u64) -> SystemSpec {
    let mut rng = sample_rng(seed, 0);
    let energies: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut v = random_hermitian(n, &mut rng) * C64::new(scale, 0.0);
    for i in 0..n {
        v[(i, i)] = C64::new(0.0, 0.0);
    }
    SystemSpec::new(energies, v, 1.0, Window::HalfWidth(0.5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hadamard_square_is_bistochastic(n in 2usize..40, t in 0.01f64..5.0, seed in any::<u64>()) {
        let u = UnitaryMatrix::random(n, t, &mut sample_rng(seed, 0));
        let m = hadamard_square(&u);
        let (rows, cols) = m.sum_deviation();
        prop_assert!(rows < 1e-10 && cols < 1e-10);
        prop_assert!(m.matrix().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn noncoherent_step_keeps_mass_and_raises_entropy(n in 2usize..30, seed in any::<u64>()) {
        let u = UnitaryMatrix::random(n, 1.0, &mut sample_rng(seed, 0));
        let p = random_probability(n, seed);
        let out = apply_noncoherent(&hadamard_square(&u), &p).unwrap();
        prop_assert!((out.total() - 1.0).abs() < 1e-12);
        prop_assert!(out.entropy() >= p.entropy() - 1e-12);
    }

    #[test]
    fn bistochastic_non_permutations_have_no_stochastic_inverse(n in 2usize..12, seed in any::<u64>()) {
        let t = hadamard_square(&UnitaryMatrix::random(n, 1.0, &mut sample_rng(seed, 0)));
        prop_assume!(!t.is_permutation());
        match t.matrix().clone().try_inverse() {
            None => {}
            Some(inv) => prop_assert!(inv.iter().any(|&x| x < 0.0)),
        }
    }

    #[test]
    fn q_matrix_is_exactly_symmetric(n in 2usize..24, scale in 0.001f64..1.0, seed in any::<u64>()) {
        let q = build_q_matrix(&random_spec(n, scale, seed)).to_dense();
        for i in 0..n {
            prop_assert!(q.column(i).sum().abs() < 1e-12 * (1.0 + q[(i, i)].abs()));
            for j in 0..n {
                prop_assert_eq!(q[(i, j)], q[(j, i)]);
                if i != j {
                    prop_assert!(q[(i, j)] >= 0.0);
                }
            }
        }
    }

    #[test]
    fn master_trajectories_stay_on_simplex_with_rising_entropy(n in 2usize..24, seed in any::<u64>()) {
        let q = build_q_matrix(&random_spec(n, 0.5, seed));
        let p0 = random_probability(n, seed ^ 0x55);
        let times: Vec<f64> = (0..12).map(|k| 0.5 * k as f64).collect();
        let traj = evolve_master_trajectory(&q, &p0, &times, Method::Expm).unwrap();
        let mut last = p0.entropy();
        for p in &traj {
            prop_assert!((p.total() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!(p.entropy() >= last - 1e-12);
            last = p.entropy();
        }
    }

    #[test]
    fn chi_is_bounded_and_conjugate_symmetric(de in -1e3f64..1e3, dt in 0.01f64..10.0, hbar in 0.1f64..3.0) {
        let c = chi(de, dt, hbar);
        prop_assert!(c.norm() <= 1.0 + 1e-15);
        prop_assert!((chi(-de, dt, hbar) - c.conj()).norm() < 1e-15);
    }

    #[test]
    fn stronger_coupling_never_lengthens_t_a(n in 2usize..12, scale in 0.001f64..0.1, factor in 1.0f64..20.0, seed in any::<u64>()) {
        let spec = random_spec(n, scale, seed);
        let weak = applicability_window(&spec, DEFAULT_MARGIN).unwrap();
        let strong = applicability_window(&spec.with_coupling_scale(factor).unwrap(), DEFAULT_MARGIN).unwrap();
        prop_assert!(strong.t_a <= weak.t_a);
    }

    #[test]
    fn chunked_moments_match_single_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..300), split in 1usize..299) {
        let split = split.min(xs.len() - 1);
        let mut whole = Moments::new(1);
        xs.iter().for_each(|x| whole.push(&[*x]));
        let (mut a, mut b) = (Moments::new(1), Moments::new(1));
        xs[..split].iter().for_each(|x| a.push(&[*x]));
        xs[split..].iter().for_each(|x| b.push(&[*x]));
        a.merge(&b);
        prop_assert!((a.mean()[0] - whole.mean()[0]).abs() < 1e-9);
        prop_assert!((a.standard_error()[0] - whole.standard_error()[0]).abs() < 1e-9 * (1.0 + whole.standard_error()[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fermion_boson_rhs_vanishes_at_equilibrium(t in 0.1f64..5.0, mu in -2.0f64..2.0, hw in 0.05f64..3.0, e in -2.0f64..2.0) {
        let r = boltzmann_rhs_fermion_boson(fermi_dirac(e, mu, t), fermi_dirac(e + hw, mu, t), bose_einstein(hw, t), 1.0).unwrap();
        prop_assert!(r.abs() < 1e-12, "residual {}", r);
    }

    #[test]
    fn three_phonon_rhs_vanishes_at_equilibrium(t in 0.2f64..5.0, w1 in 0.05f64..2.0, w2 in 0.05f64..2.0) {
        let (n1, n2, n3) = (bose_einstein(w1, t), bose_einstein(w2, t), bose_einstein(w1 + w2, t));
        let merge = boltzmann_rhs_three_phonon(n1, n2, n3, 1.0, ThreePhononChannel::Merge).unwrap();
        let decay = boltzmann_rhs_three_phonon(n3, n1, n2, 1.0, ThreePhononChannel::Decay).unwrap();
        let scale = (n1 + 1.0) * (n2 + 1.0) * (n3 + 1.0);
        prop_assert!(merge.abs() < 1e-12 * scale.max(1.0), "merge {}", merge);
        prop_assert!(decay.abs() < 1e-12 * scale.max(1.0), "decay {}", decay);
    }
}

fn phonon_network(n_max: usize) -> (FockBasis, Vec<ProcessSpec>) {
    let basis = FockBasis::new((1..=4).map(|w| ModeSpec::boson(w as f64, n_max)).collect()).unwrap();
    let procs = [(0, 1, 2), (0, 2, 3)]
        .iter()
        .map(|&(a, b, c)| ProcessSpec::new(ProcessKind::Merge { a, b, c }, 0.5))
        .chain([ProcessSpec::new(ProcessKind::Decay { source: 3, a: 0, b: 2 }, 0.25)])
        .collect();
    (basis, procs)
}

#[test]
fn kinetic_generator_never_crosses_energy_shells() {
    for n_max in [2, 3, 5] {
        let (basis, procs) = phonon_network(n_max);
        let q = build_kinetic_q(&basis, &procs).unwrap().q;
        for &(i, j, _) in q.pairs() {
            assert!((basis.total_energy(i) - basis.total_energy(j)).abs() < 1e-9);
        }
    }
    let basis = FockBasis::new(vec![ModeSpec::fermion(0.0), ModeSpec::fermion(0.7), ModeSpec::boson(0.7, 6)]).unwrap();
    let procs = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 1.0)];
    for &(i, j, _) in build_kinetic_q(&basis, &procs).unwrap().q.pairs() {
        assert!((basis.total_energy(i) - basis.total_energy(j)).abs() < 1e-9);
    }
}

#[test]
fn mean_occupations_stay_in_range_along_exact_evolution() {
    let basis = FockBasis::new(vec![
        ModeSpec::fermion(0.0),
        ModeSpec::fermion(1.0),
        ModeSpec::fermion(0.5),
        ModeSpec::boson(1.0, 4),
        ModeSpec::boson(0.5, 4),
    ])
    .unwrap();
    let procs = [
        ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 3 }, 1.0),
        ProcessSpec::new(ProcessKind::FermionBoson { lower: 2, upper: 1, boson: 4 }, 0.6),
        ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 2, boson: 4 }, 0.3),
    ];
    let q = build_kinetic_q(&basis, &procs).unwrap().q;
    let p0 = ProbabilityVector::delta(basis.dim(), basis.index_of(&[0, 1, 0, 0, 2]).unwrap()).unwrap();
    let times: Vec<f64> = (0..20).map(|k| 0.3 * k as f64).collect();
    for p in evolve_master_trajectory(&q, &p0, &times, Method::Uniformization).unwrap() {
        let m = mean_occupations(&p, &basis).unwrap();
        for (v, spec) in m.values.iter().zip(basis.modes()) {
            assert!(*v >= -1e-10);
            if spec.is_fermion() {
                assert!(*v <= 1.0 + 1e-10);
            }
        }
    }
}

#[test]
fn unitary_matrix_of_size_256_squares_to_bistochastic() {
    let u = UnitaryMatrix::random(256, 1.0, &mut sample_rng(9, 0));
    let (rows, cols) = hadamard_square(&u).sum_deviation();
    assert!(rows < 1e-10 && cols < 1e-10);
}
