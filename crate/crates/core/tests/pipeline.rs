use mpent_core::analysis::{distribution, summarize};
use mpent_core::io::{fmt_mask, read_masks, read_state, write_state};
use mpent_core::ising::IsingParameters;
use mpent_core::measures::{entropy, purity, schmidt_weights};
use mpent_core::partition::{balanced_bipartitions, explicit};
use mpent_core::solver::{ground_state, SolverChoice, SolverOptions};
use mpent_core::state::haar_random_state;

#[test]
fn ground_state_distribution_survives_file_round_trip() {
    let gs = ground_state(&IsingParameters::new(8, 0.6, 1e-3).unwrap(), &SolverOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_state(&gs.state, &mut buf).unwrap();
    let back = read_state(buf.as_slice()).unwrap();

    let fam = balanced_bipartitions(8).unwrap();
    let a = distribution(&gs.state, &fam, 20, true).unwrap();
    let b = distribution(&back, &fam, 20, true).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.summary, b.summary);
}

#[test]
fn summary_matches_records() {
    let s = haar_random_state(9, 5).unwrap();
    let d = distribution(&s, &balanced_bipartitions(9).unwrap(), 10, false).unwrap();
    let values: Vec<f64> = d.records.iter().map(|r| r.participation).collect();
    assert_eq!(summarize(&values, 10).unwrap(), d.summary);
    assert_eq!(d.summary.histogram.iter().map(|b| b.count).sum::<usize>(), 126);
}

#[test]
fn mask_file_family_matches_balanced_subset() {
    let fam = balanced_bipartitions(6).unwrap();
    let picked: Vec<usize> = fam.iter().step_by(4).map(|p| p.mask()).collect();
    let text: String = picked.iter().map(|&m| fmt_mask(m, 6) + "\n").collect();
    let masks = read_masks(text.as_bytes()).unwrap();
    assert_eq!(masks, picked);

    let s = haar_random_state(6, 2).unwrap();
    let sub = distribution(&s, &explicit(6, masks).unwrap(), 5, false).unwrap();
    let full = distribution(&s, &fam, 5, false).unwrap();
    for (r, want) in sub.records.iter().zip(full.records.iter().step_by(4)) {
        assert_eq!(r, want);
    }
}

#[test]
fn schmidt_spectrum_reproduces_purity_and_entropy() {
    let gs = ground_state(
        &IsingParameters::new(10, 0.55, 0.0).unwrap(),
        &SolverOptions { choice: SolverChoice::Lanczos, ..SolverOptions::default() },
    )
    .unwrap();
    for part in balanced_bipartitions(10).unwrap().iter().step_by(17) {
        let w = schmidt_weights(&gs.state, &part).unwrap();
        let p: f64 = w.iter().map(|x| x * x).sum();
        let s: f64 = -w.iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>();
        assert!((p - purity(&gs.state, &part).unwrap()).abs() < 1e-12);
        assert!((s - entropy(&gs.state, &part).unwrap()).abs() < 1e-9);
    }
}
