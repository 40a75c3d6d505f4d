use postselect::detection::{self, DetectorModel};
use postselect::fidelity::{closed_form_fc, closed_form_pr00};
use postselect::scenarios::{self, coherent_comparison, ComparisonResult};
use postselect::DenominatorSign;

const DIM: usize = 64;
const GAINS: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];
const ETAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

fn run(alpha: f64, eta: f64, gain: f64) -> ComparisonResult {
    coherent_comparison(alpha, eta, gain, DIM, DenominatorSign::Plus).unwrap()
}

#[test]
fn gain_helps_only_lossy_detectors() {
    for eta in ETAS {
        let curve: Vec<ComparisonResult> = GAINS.iter().map(|&g| run(1.0, eta, g)).collect();
        for pair in curve.windows(2) {
            if eta == 1.0 {
                assert!((pair[1].f_c - pair[0].f_c).abs() < 1e-9);
            } else {
                assert!(pair[1].f_c > pair[0].f_c);
            }
            assert!(pair[1].p_zero_counts < pair[0].p_zero_counts);
        }
        for r in &curve {
            assert!(r.f_c <= r.p_max + 1e-12);
            assert!(r.f_c <= r.f_uhlmann + 1e-8);
            let closed = closed_form_fc(1.0, eta, r.gain, DenominatorSign::Plus).unwrap();
            assert!((r.f_c - closed).abs() < 1e-8);
        }
    }
}

#[test]
fn povm_retrodiction_matches_explicit_prior() {
    for &(alpha, eta, gain) in &[(0.5, 0.25, 3.0), (2.0, 0.75, 1.5), (1.0, 0.5, 1.0)] {
        let joint = scenarios::comparison_output_evolved(alpha, DIM).unwrap();
        let prior = scenarios::comparison_prior(&joint.second_marginal()).unwrap();
        let d = DetectorModel::new(eta, gain).unwrap();
        let explicit = detection::retrodictive_prob(&d, &prior, 0, 0).unwrap();
        let closed = closed_form_pr00(alpha, eta, gain, DenominatorSign::Plus).unwrap();
        assert!((explicit - closed).abs() < 1e-8);
        assert!((run(alpha, eta, gain).pr00_povm - explicit).abs() < 1e-14);
    }
}

#[test]
fn printed_denominator_disagrees_with_povms() {
    let r = coherent_comparison(1.0, 0.5, 1.5, DIM, DenominatorSign::Minus).unwrap();
    assert!((r.pr00_closed - r.pr00_povm).abs() > 1e-3);
}

#[test]
fn zero_count_probability_orders_by_efficiency() {
    for g in GAINS {
        let p: Vec<f64> = ETAS.iter().map(|&e| run(1.0, e, g).p_zero_counts).collect();
        assert!(p.windows(2).all(|w| w[0] > w[1]));
    }
}

#[test]
fn information_decreases_through_processing() {
    for i in 0..=15 {
        let r = run(0.2 * i as f64, 0.9, 1.5);
        assert!(r.chi_unprocessed + 1e-9 >= r.chi_attenuated);
        assert!(r.chi_attenuated + 1e-9 >= r.chi_amp_att);
    }
    assert!(run(0.0, 0.9, 1.5).chi_unprocessed.abs() < 1e-9);
}

#[test]
fn good_detectors_lift_standard_fidelity_above_pmax() {
    for eta in [0.9, 0.95, 1.0] {
        let r = run(1.0, eta, 1.0);
        assert!(r.f_uhlmann > r.p_max);
    }
}

#[test]
fn truncation_guard_reports() {
    let err = coherent_comparison(4.0, 0.5, 1.0, 16, DenominatorSign::Plus).unwrap_err();
    assert!(err.is_numerical_guard());
}
