//! Statistical and end-to-end checks of sampling, estimation, inference and experiments.

mod common;

use std::path::Path;

use archicop::estimation::{
    initial_box_gig, initial_box_opc, initial_interval_1p, loglik_at, mle_1p, pairwise_tau_hat, IntervalPolicy,
    PseudoSample,
};
use archicop::experiments::{plan_cells, run, ExperimentConfig};
use archicop::families::{log_gen_deriv, mc_gen_deriv, FamilyId};
use archicop::inference::{
    ci_information, ci_likelihood_ratio, info_expected_mc, info_observed, info_score_outer,
};
use archicop::io::{read_matrix, write_matrix};
use archicop::sampling::{sample_copula, RandomStream};
use archicop::ModelKind;

use common::theta_grid;

fn sample(kind: ModelKind, p: &[f64], n: usize, d: usize, seed: u64, id: u64) -> PseudoSample {
    let c = kind.with_params(p).unwrap();
    PseudoSample::from_uniforms(sample_copula(&c, n, d, &mut RandomStream::new(seed, id)).unwrap()).unwrap()
}

#[test]
fn monte_carlo_derivatives_agree_with_closed_forms() {
    // 5 families x 5 parameters x 2 orders; at 4 standard errors a miss is a 1-in-15000 event
    // per case for normal errors, so at most 2 of 50 may miss
    let mut hits = 0;
    let mut case = 0;
    for f in FamilyId::ALL {
        for th in theta_grid(f) {
            for (d, t) in [(3usize, 0.5), (6, 2.0)] {
                let exact = log_gen_deriv(f, th, d, t).unwrap().exp();
                let e = mc_gen_deriv(f, th, d, t, 200_000, &mut RandomStream::new(31, case)).unwrap();
                hits += usize::from((e.log_value.exp() - exact).abs() <= 4.0 * e.se);
                case += 1;
            }
        }
    }
    assert!(hits >= 48, "{hits} of 50 within 4 SE");
}

#[test]
fn fitted_loglik_dominates_a_grid_over_the_interval() {
    for f in FamilyId::ALL {
        let th = match f { FamilyId::Amh => 0.5, FamilyId::Gumbel | FamilyId::Joe => 2.0, _ => 3.0 };
        let u = sample(ModelKind::Family(f), &[th], 150, 5, 41, 0);
        let iv = initial_interval_1p(f, pairwise_tau_hat(&u), 0.25, IntervalPolicy::Clamp).unwrap();
        let fit = mle_1p(f, &u, iv).unwrap();
        for k in 0..100 {
            let x = iv.lower + (iv.upper - iv.lower) * k as f64 / 99.0;
            let l = loglik_at(fit.model, &u, &[x]);
            assert!(fit.loglik >= l - 1e-7 * l.abs().max(1.0), "{f}: l({x}) = {l} > {}", fit.loglik);
        }
    }
}

#[test]
fn initial_regions_cover_the_truth() {
    let reps = 200;
    let mut one = 0;
    let mut opc = 0;
    let mut gig = 0;
    for r in 0..reps {
        let u = sample(ModelKind::Family(FamilyId::Clayton), &[2.0], 100, 10, 51, r);
        let iv = initial_interval_1p(FamilyId::Clayton, pairwise_tau_hat(&u), 0.25, IntervalPolicy::Clamp).unwrap();
        one += usize::from(iv.contains(2.0));
        let u = sample(ModelKind::OpClayton, &[1.0, 4.0 / 3.0], 100, 10, 52, r);
        opc += usize::from(initial_box_opc(pairwise_tau_hat(&u), 0.4, 0.0, 0.005).unwrap().contains(&[1.0, 4.0 / 3.0]));
        let u = sample(ModelKind::Gig, &[0.05, 0.0968], 100, 10, 53, r);
        gig += usize::from(initial_box_gig(pairwise_tau_hat(&u), 0.15, 0.15, 0.005).unwrap().contains(&[0.05, 0.0968]));
    }
    let need = (0.95 * reps as f64) as usize;
    assert!(one >= need && opc >= need && gig >= need, "clayton {one}, opC {opc}, gig {gig} of {reps}");
}

#[test]
fn interval_methods_agree_to_first_order() {
    let u = sample(ModelKind::Family(FamilyId::Clayton), &[2.0], 10_000, 5, 61, 0);
    let iv = initial_interval_1p(FamilyId::Clayton, pairwise_tau_hat(&u), 0.1, IntervalPolicy::Clamp).unwrap();
    let fit = mle_1p(FamilyId::Clayton, &u, iv).unwrap();
    let c = fit.copula().unwrap();
    let th = fit.params[0];
    let widths = [
        ci_information(th, &info_expected_mc(&c, 5, 20_000, &mut RandomStream::new(62, 0)).unwrap(), u.n(), 0.95).unwrap().half_width(),
        ci_information(th, &info_score_outer(&c, &u).unwrap(), u.n(), 0.95).unwrap().half_width(),
        ci_information(th, &info_observed(&c, &u).unwrap(), u.n(), 0.95).unwrap().half_width(),
        ci_likelihood_ratio(&u, &fit, 0.95).unwrap().half_width(),
    ];
    let (lo, hi) = widths.iter().fold((f64::INFINITY, 0.0f64), |(a, b), w| (a.min(*w), b.max(*w)));
    assert!(hi / lo <= 1.15, "{widths:?}");
}

#[test]
fn experiment_records_conserve_work() {
    let cfg = ExperimentConfig::from_toml_str(
        "kind = \"rmse_scaling\"\nfamilies = [\"joe\", \"frank\"]\ntaus = [0.2, 0.6]\nns = [25]\nds = [3, 4]\nreplications = 7\nworkers = 3\n",
    )
    .unwrap();
    let out = run(&cfg).unwrap();
    let (cells, _) = plan_cells(&cfg).unwrap();
    let failures: usize = out.summary.cells.iter().map(|c| c.failures).sum();
    let ok = out.records.iter().filter(|r| r.error.is_none()).count();
    assert_eq!(out.records.len(), cells.len() * cfg.replications);
    assert_eq!(ok, cells.len() * cfg.replications - failures);
}

fn corpus(name: &str) -> Vec<Vec<u8>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(name);
    let mut files: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

#[test]
fn fuzz_corpus_seeds_keep_their_properties() {
    let mut parsed = 0;
    for data in corpus("csv_matrix") {
        if let Ok(m) = read_matrix(data.as_slice()) {
            parsed += 1;
            let mut buf = Vec::new();
            write_matrix(&mut buf, &m.matrix, "x").unwrap();
            assert_eq!(read_matrix(buf.as_slice()).unwrap().matrix, m.matrix);
        }
    }
    assert!(parsed >= 2);
    let configs: Vec<bool> = corpus("experiment_config")
        .iter()
        .map(|d| ExperimentConfig::from_toml_str(std::str::from_utf8(d).unwrap()).is_ok_and(|c| plan_cells(&c).is_ok()))
        .collect();
    assert_eq!(configs.iter().filter(|b| **b).count(), 3, "{configs:?}");
}
