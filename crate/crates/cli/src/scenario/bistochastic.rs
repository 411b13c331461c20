use dephase_core::spectral::{apply_noncoherent, hadamard_square, phase_average_mc, ProbabilityVector, UnitaryMatrix};
use dephase_core::stats::sample_rng;
use rand::Rng;
use serde_json::json;

use crate::config::{ExperimentConfig, PhaseAverageSection};
use crate::outcome::{Cell, Check, Failure, Outcome, Table};

/// Stream offset separating phase-average problem draws from the unitaries.
const PHASE_STREAM: u64 = 1 << 40;

pub fn run(config: &ExperimentConfig) -> Result<Outcome, Failure> {
    let b = config.bistochastic.as_ref().expect("validated");
    let mut out = Outcome::default();
    let mut table = Table::new("unitaries", &["size", "index", "row_deviation", "column_deviation", "min_entry"]);

    let (mut worst_dev, mut worst_min) = (0.0f64, f64::INFINITY);
    let mut stream = 0u64;
    for &n in &b.sizes {
        for k in 0..b.count {
            let u = UnitaryMatrix::random(n, b.generator_time, &mut sample_rng(config.seed, stream));
            stream += 1;
            let t = hadamard_square(&u);
            let (rows, cols) = t.sum_deviation();
            let min = t.matrix().min();
            worst_dev = worst_dev.max(rows).max(cols);
            worst_min = worst_min.min(min);
            table.push(vec![n.into(), k.into(), rows.into(), cols.into(), min.into()]);
            out.series.extend([rows, cols]);
        }
    }
    out.tables.push(table);
    out.checks.push(Check::at_most("row_and_column_sums", worst_dev, b.tolerance));
    out.checks.push(Check::at_least("nonnegative_entries", worst_min, 0.0));
    out.metric("max_sum_deviation", worst_dev);
    out.metric("min_entry", worst_min);
    let mut report = json!({ "unitaries": b.sizes.len() * b.count, "max_sum_deviation": worst_dev, "min_entry": worst_min });

    if let Some(pa) = &b.phase_average {
        let (table, coverage, max_z) = phase_average(config.seed, pa)?;
        out.tables.push(table);
        out.checks.push(
            Check::at_least("phase_average_coverage", coverage, pa.coverage)
                .with_detail(format!("fraction of entries within {} standard errors", pa.sigmas)),
        );
        out.metric("phase_average_coverage", coverage);
        out.metric("phase_average_max_z", max_z);
        report["phase_average"] = json!({ "coverage": coverage, "max_z": max_z, "samples": pa.samples, "seeds": pa.seeds });
    }
    out.report = report;
    Ok(out)
}

/// Compares the Monte Carlo phase average against the bistochastic map on
/// `seeds` random problems. Returns the table, the fraction of entries within
/// `sigmas` standard errors and the largest z-score.
fn phase_average(seed: u64, pa: &PhaseAverageSection) -> Result<(Table, f64, f64), Failure> {
    let mut table = Table::new("phase_average", &["problem", "state", "exact", "estimate", "stderr", "z"]);
    let (mut inside, mut total, mut max_z) = (0usize, 0usize, 0.0f64);
    for s in 0..pa.seeds {
        let mut rng = sample_rng(seed, PHASE_STREAM + s as u64);
        let u = UnitaryMatrix::random(pa.dim, 1.0, &mut rng);
        let raw: Vec<f64> = (0..pa.dim).map(|_| rng.random::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        let p = ProbabilityVector::new(raw.iter().map(|x| x / sum).collect())?;
        let exact = apply_noncoherent(&hadamard_square(&u), &p)?;
        let mc = phase_average_mc(&u, &p, pa.samples, seed.wrapping_add(s as u64 + 1))?;
        for i in 0..pa.dim {
            let (e, m, se) = (exact[i], mc.estimate[i], mc.standard_error[i]);
            let diff = (e - m).abs();
            let z = if se > 0.0 { diff / se } else if diff <= 1e-12 { 0.0 } else { f64::INFINITY };
            inside += usize::from(z <= pa.sigmas);
            total += 1;
            max_z = max_z.max(z);
            table.push(vec![Cell::from(s), i.into(), e.into(), m.into(), se.into(), z.into()]);
        }
    }
    Ok((table, inside as f64 / total as f64, max_z))
}
