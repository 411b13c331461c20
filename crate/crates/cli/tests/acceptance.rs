//! Acceptance suite: one PASS/FAIL line per criterion, each with the measured
//! quantity, its tolerance and the wall time against the budget.
//!
//! The process exits nonzero when a measured quantity misses its tolerance.
//! A criterion that is numerically met but over its time budget is printed
//! as FAIL with the reason, and does not change the exit code unless
//! `DEPHASE_STRICT_TIMING` is set.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dephase_core::kinetics::{
    boltzmann_rhs_fermion_boson, boltzmann_rhs_three_phonon, bose_einstein, diagram_commutativity, fermi_dirac,
    geometric_marginal_with_mean, product_state, thermal_marginal, verify_derivative_consistency, FockBasis, ModeSpec,
    ProcessKind, ProcessSpec, ShellSelector, ThreePhononChannel,
};
use dephase_core::master::{
    build_q_matrix, evolve_master_trajectory, fermi_rate, phase_scramble_evolution, stationary_analysis, Method,
    RateMatrix, ScrambleSettings, SystemSpec, Window,
};
use dephase_core::spectral::{
    apply_noncoherent, hadamard_square, phase_average_mc, random_hermitian, ProbabilityVector, UnitaryMatrix,
};
use dephase_core::stats::sample_rng;
use dephase_core::timescale::{applicability_window, chi_bar_sq_integral, chi_sq_integral, DEFAULT_MARGIN};
use dephase_core::C64;
use nalgebra::DMatrix;
use rand::Rng;

struct Verdict {
    met: bool,
    summary: String,
}

fn verdict(met: bool, summary: String) -> Verdict {
    Verdict { met, summary }
}

fn random_probability(n: usize, rng: &mut impl Rng) -> ProbabilityVector {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.iter().map(|x| x / s).collect()).unwrap()
}

fn bistochasticity() -> Verdict {
    let (mut worst_dev, mut worst_min, mut count) = (0.0f64, f64::INFINITY, 0u64);
    for n in [2, 8, 64, 256] {
        for _ in 0..200 {
            let t = hadamard_square(&UnitaryMatrix::random(n, 1.0, &mut sample_rng(1, count)));
            let (r, c) = t.sum_deviation();
            worst_dev = worst_dev.max(r).max(c);
            worst_min = worst_min.min(t.matrix().min());
            count += 1;
        }
    }
    verdict(
        worst_dev <= 1e-10 && worst_min >= 0.0,
        format!("{count} unitaries, max row/column deviation {worst_dev:.2e} (tol 1e-10), min entry {worst_min:.2e}"),
    )
}

fn phase_averaging() -> Verdict {
    let (mut inside, mut total) = (0, 0);
    for s in 0..20u64 {
        let mut rng = sample_rng(100 + s, 0);
        let u = UnitaryMatrix::random(8, 1.0, &mut rng);
        let p = random_probability(8, &mut rng);
        let exact = apply_noncoherent(&hadamard_square(&u), &p).unwrap();
        let mc = phase_average_mc(&u, &p, 100_000, 200 + s).unwrap();
        for i in 0..8 {
            inside += usize::from((mc.estimate[i] - exact[i]).abs() <= 4.0 * mc.standard_error[i]);
            total += 1;
        }
    }
    let frac = inside as f64 / total as f64;
    verdict(frac >= 0.95, format!("{inside}/{total} entries within 4 standard errors ({:.1}%, need 95%)", 100.0 * frac))
}

fn random_connected_generator(n: usize, rng: &mut impl Rng) -> RateMatrix {
    let mut pairs = Vec::new();
    for i in 0..n {
        if i + 1 < n {
            pairs.push((i, i + 1, 0.05 + rng.random::<f64>()));
        }
        for j in (i + 2)..n {
            if rng.random::<f64>() < 0.15 {
                pairs.push((i, j, rng.random::<f64>()));
            }
        }
    }
    RateMatrix::from_pairs(n, pairs).unwrap()
}

fn microcanonical() -> Verdict {
    let (mut worst_dist, mut worst_drop) = (0.0f64, 0.0f64);
    for k in 0..50u64 {
        let mut rng = sample_rng(3, k);
        let n = rng.random_range(2..=64);
        let q = random_connected_generator(n, &mut rng);
        let gap = stationary_analysis(&q).spectral_gap.unwrap();
        let p0 = random_probability(n, &mut rng);
        let times: Vec<f64> = (0..=40).map(|j| 20.0 / gap * j as f64 / 40.0).collect();
        let traj = evolve_master_trajectory(&q, &p0, &times, Method::Expm).unwrap();
        let mut last = p0.entropy();
        for p in &traj {
            worst_drop = worst_drop.max(last - p.entropy());
            last = p.entropy();
        }
        worst_dist = worst_dist.max(traj.last().unwrap().sup_distance(&ProbabilityVector::uniform(n).unwrap()));
    }
    verdict(
        worst_dist <= 1e-8 && worst_drop <= 1e-12,
        format!("50 chains, max distance to uniform at 20/gap {worst_dist:.2e} (tol 1e-8), max entropy drop {worst_drop:.2e} (slack 1e-12)"),
    )
}

fn fermi_consistency() -> Verdict {
    let mut worst = 0.0f64;
    for (hbar, v_sq, width, m) in [(1.0, 1e-3f64, 0.5, 10), (0.8, 3e-3, 0.25, 12), (2.0, 1e-4, 1.5, 40)] {
        let n = m + 1;
        let mut v = DMatrix::zeros(n, n);
        for k in 1..n {
            v[(0, k)] = C64::from_polar(v_sq.sqrt(), 0.7 * k as f64);
            v[(k, 0)] = v[(0, k)].conj();
        }
        let spec = SystemSpec::new(vec![0.0; n], v, hbar, Window::HalfWidth(width)).unwrap();
        let departure = -build_q_matrix(&spec).diagonal()[0];
        let expect = fermi_rate(v_sq, m as f64 / width, hbar).unwrap();
        worst = worst.max((departure - expect).abs() / expect);
    }
    verdict(worst <= 1e-12, format!("shell departure rate vs golden rule, max relative error {worst:.2e} (tol 1e-12)"))
}

/// Sixteen states inside one shell, weak random coupling.
fn bridge_system(scale: f64) -> SystemSpec {
    let mut rng = sample_rng(2024, 0);
    let energies: Vec<f64> = (0..16).map(|_| rng.random::<f64>() * 0.01 * PI).collect();
    let mut v = random_hermitian(16, &mut rng) * C64::new(0.02 * scale, 0.0);
    for i in 0..16 {
        v[(i, i)] = C64::new(0.0, 0.0);
    }
    SystemSpec::new(energies, v, 1.0, Window::Dt(1.0)).unwrap()
}

/// Largest per-time deviation, and its largest ratio to `max(5 se, 0.02)`.
fn bridge_deviation(spec: &SystemSpec, horizon_periods: f64) -> (f64, f64) {
    let settings = ScrambleSettings::rate_matched(spec, 20_000, 7);
    let p0 = ProbabilityVector::delta(16, 0).unwrap();
    let scr = phase_scramble_evolution(spec, &p0, horizon_periods * settings.period, &settings).unwrap();
    let exact = evolve_master_trajectory(&build_q_matrix(spec), &p0, &scr.times, Method::Expm).unwrap();
    let (mut dev, mut ratio) = (0.0f64, 0.0f64);
    for ((p, q), se) in exact.iter().zip(&scr.mean).zip(&scr.standard_error) {
        let d = p.sup_distance(q);
        let se = se.iter().copied().fold(0.0, f64::max);
        dev = dev.max(d);
        ratio = ratio.max(d / (5.0 * se).max(0.02));
    }
    (dev, ratio)
}

fn scramble_bridge() -> Verdict {
    let weak = bridge_system(1.0);
    let report = applicability_window(&weak, DEFAULT_MARGIN).unwrap();
    let gap = stationary_analysis(&build_q_matrix(&weak)).spectral_gap.unwrap();
    let periods = (3.0 / gap / (2.0 * weak.dt())).ceil();
    let (dev, ratio) = bridge_deviation(&weak, periods);
    let (strong_dev, _) = bridge_deviation(&bridge_system(10.0), periods);
    let visibly = strong_dev >= 2.0 * dev;
    verdict(
        report.admissible && ratio <= 1.0 && visibly,
        format!(
            "margin {:.1} (need 10), max deviation {dev:.2e} = {ratio:.2} of allowance; 10x coupling {strong_dev:.2e} ({:.1}x, need 2x)",
            report.achieved_margin,
            strong_dev / dev
        ),
    )
}

fn window_normalization() -> Verdict {
    let mut worst = 0.0f64;
    for (dt, hbar) in [(1.0, 1.0), (0.3, 1.0), (2.5, 0.7), (1e-3, 1.0)] {
        let expect = 2.0 * PI * hbar / dt;
        let a = chi_sq_integral(dt, hbar).unwrap().value;
        let b = chi_bar_sq_integral(dt, hbar).unwrap().value;
        worst = worst.max((a - expect).abs() / expect).max((b - expect).abs() / expect).max((a - b).abs() / expect);
    }
    verdict(worst <= 1e-6, format!("max relative error of both norms vs 2 pi hbar/dt {worst:.2e} (tol 1e-6)"))
}

fn collision_fixed_points() -> Verdict {
    let mut rng = sample_rng(7, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.random_range(0.1..5.0);
        let mu = rng.random_range(-2.0..2.0);
        let (w1, w2) = (rng.random_range(0.05..3.0), rng.random_range(0.05..3.0));
        let e = rng.random_range(-2.0..2.0);
        let fb = boltzmann_rhs_fermion_boson(fermi_dirac(e, mu, t), fermi_dirac(e + w1, mu, t), bose_einstein(w1, t), 1.0)
            .unwrap();
        let (n1, n2, n3) = (bose_einstein(w1, t), bose_einstein(w2, t), bose_einstein(w1 + w2, t));
        let merge = boltzmann_rhs_three_phonon(n1, n2, n3, 1.0, ThreePhononChannel::Merge).unwrap();
        let decay = boltzmann_rhs_three_phonon(n3, n1, n2, 1.0, ThreePhononChannel::Decay).unwrap();
        worst = worst.max(fb.abs()).max(merge.abs()).max(decay.abs());
    }
    verdict(worst < 1e-12, format!("300 residuals over 100 draws, max {worst:.2e} (tol 1e-12)"))
}

fn derivation_consistency() -> Verdict {
    let two_level = {
        let modes = vec![ModeSpec::fermion(0.0), ModeSpec::fermion(1.0), ModeSpec::boson(1.0, 60)];
        let marg = vec![vec![0.7, 0.3], vec![0.4, 0.6], thermal_marginal(1.0, 1.5, 60).unwrap()];
        let procs = [ProcessSpec::new(ProcessKind::FermionBoson { lower: 0, upper: 1, boson: 2 }, 1.0)];
        (modes, marg, procs)
    };
    let three_phonon = {
        let modes = vec![ModeSpec::boson(1.0, 60), ModeSpec::boson(2.0, 60), ModeSpec::boson(3.0, 60)];
        let marg = vec![
            geometric_marginal_with_mean(0.5, 60).unwrap(),
            thermal_marginal(2.0, 1.5, 60).unwrap(),
            geometric_marginal_with_mean(0.3, 60).unwrap(),
        ];
        let procs = [ProcessSpec::new(ProcessKind::Merge { a: 0, b: 1, c: 2 }, 1.0)];
        (modes, marg, procs)
    };
    let mut parts = Vec::new();
    let mut met = true;
    for (label, (modes, marg, procs)) in [("two-level+boson", two_level), ("three-phonon", three_phonon)] {
        let basis = FockBasis::new(modes).unwrap();
        let p0 = product_state(&basis, &marg).unwrap();
        let r = verify_derivative_consistency(&basis, &procs, &p0).unwrap();
        met &= r.max_discrepancy <= 1e-8 && r.tail_mass < 1e-12;
        parts.push(format!("{label} {:.2e} (tail {:.1e})", r.max_discrepancy, r.tail_mass));
    }
    verdict(met, format!("n_max 60 discrepancy {} (tol 1e-8, tail < 1e-12)", parts.join(", ")))
}

fn commutativity() -> Verdict {
    let mut gaps = Vec::new();
    for n_max in [4, 6, 8] {
        let basis = FockBasis::new((1..=5).map(|w| ModeSpec::boson(w as f64, n_max)).collect()).unwrap();
        let procs: Vec<ProcessSpec> = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (1, 2, 4)]
            .iter()
            .map(|&(a, b, c)| ProcessSpec::new(ProcessKind::Merge { a, b, c }, 1.0))
            .collect();
        let rep = diagram_commutativity(&basis, &procs, &ShellSelector::State(vec![1; 5])).unwrap();
        gaps.push(rep.max_gap());
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    verdict(monotone, format!("gap at n_max 4/6/8: {:.4} / {:.4} / {:.4}, strictly decreasing", gaps[0], gaps[1], gaps[2]))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_dephase");
    let work = tempfile::tempdir().unwrap();
    let mut configs: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    configs.sort();
    let (mut same, mut problems) = (0, Vec::new());
    for cfg in &configs {
        let name = cfg.file_stem().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(cfg).unwrap();
        let cmd = if text.contains("\n[sweep]") { "sweep" } else { "run" };
        let (first, second) = (work.path().join(format!("{name}-a")), work.path().join(format!("{name}-b")));
        let a = Command::new(bin).args([cmd, "--quiet", "--config"]).arg(cfg).arg("--out").arg(&first).status().unwrap();
        let manifest = first.join("manifest.json");
        let b = Command::new(bin).args(["run", "--quiet", "--config"]).arg(&manifest).arg("--out").arg(&second).status().unwrap();
        let (fa, fb) = (csv_files(&first), csv_files(&second));
        if a.success() && b.success() && !fa.is_empty() && fa == fb {
            same += 1;
        } else {
            problems.push(format!("{name} (exit {:?}/{:?}, {} vs {} files)", a.code(), b.code(), fa.len(), fb.len()));
        }
    }
    verdict(
        problems.is_empty(),
        format!("{same}/{} scenarios re-run from their manifests byte-identical{}", configs.len(), if problems.is_empty() { String::new() } else { format!("; differing: {}", problems.join(", ")) }),
    )
}

type Criterion = (u32, &'static str, u64, fn() -> Verdict);

fn main() {
    let strict_timing = std::env::var_os("DEPHASE_STRICT_TIMING").is_some();
    let criteria: [Criterion; 10] = [
        (1, "bistochasticity", 10, bistochasticity),
        (2, "phase-averaging exactness", 30, phase_averaging),
        (3, "microcanonical convergence", 30, microcanonical),
        (4, "rate matrix vs golden rule", 1, fermi_consistency),
        (5, "scramble-vs-master bridge", 300, scramble_bridge),
        (6, "window normalization", 1, window_normalization),
        (7, "collision-integral fixed points", 1, collision_fixed_points),
        (8, "derivation consistency", 60, derivation_consistency),
        (9, "commutativity gap", 120, commutativity),
        (10, "determinism from manifests", 600, determinism),
    ];
    let (mut numeric_failures, mut slow) = (0, 0);
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let status = if v.met && in_time { "PASS" } else { "FAIL" };
        let timing = format!("{:.2} s / budget {budget} s", elapsed.as_secs_f64());
        let note = match (v.met, in_time) {
            (true, false) => " [over time budget]",
            (false, _) => " [tolerance missed]",
            _ => "",
        };
        println!("{status} {id:>2} {name}: {} [{timing}]{note}", v.summary);
        numeric_failures += usize::from(!v.met);
        slow += usize::from(v.met && !in_time);
    }
    println!("acceptance: {numeric_failures} tolerance failures, {slow} over time budget");
    if numeric_failures > 0 || (strict_timing && slow > 0) {
        std::process::exit(1);
    }
}
