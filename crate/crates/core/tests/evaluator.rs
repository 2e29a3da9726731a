use neurodiff::evaluator::{accuracy_ci, ci_half_width, evaluate_labels};
use proptest::prelude::*;

fn data(n: usize) -> impl Strategy<Value = (Vec<u8>, Vec<f32>)> {
    proptest::collection::vec((0u8..=1, 0.0f32..=1.0), 1..n).prop_map(|v| v.into_iter().unzip())
}

#[test]
fn reference_ci_half_widths() {
    assert!((ci_half_width(0.5, 1_000_000) - 0.00098).abs() < 1e-12);
    let hw = ci_half_width(0.7224, 1_000_000);
    assert!((hw - 0.000878).abs() < 1e-6, "{hw}");
}

proptest! {
    #[test]
    fn joint_permutation_invariance((labels, preds) in data(300), seed: u64) {
        let base = evaluate_labels(&labels, &preds, 0.5).unwrap();
        let mut idx: Vec<usize> = (0..labels.len()).collect();
        let mut rng = neurodiff::rng::StreamRng::new(seed, neurodiff::rng::Domain::Audit, 0);
        for i in (1..idx.len()).rev() {
            idx.swap(i, rng.below(i as u64 + 1) as usize);
        }
        let l2: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
        let p2: Vec<f32> = idx.iter().map(|&i| preds[i]).collect();
        let permuted = evaluate_labels(&l2, &p2, 0.5).unwrap();
        // Compare counts: the rates may be NaN when a class is absent.
        prop_assert_eq!(
            (permuted.tp, permuted.tn, permuted.fp, permuted.fn_),
            (base.tp, base.tn, base.fp, base.fn_)
        );
        prop_assert_eq!(permuted.accuracy, base.accuracy);
    }

    #[test]
    fn counts_are_consistent((labels, preds) in data(300), t in 0.0f64..=1.0) {
        let r = evaluate_labels(&labels, &preds, t).unwrap();
        prop_assert_eq!(r.tp + r.tn + r.fp + r.fn_, r.n);
        prop_assert_eq!(r.accuracy, (r.tp + r.tn) as f64 / r.n as f64);
        let (lo, hi) = accuracy_ci(&r);
        prop_assert!(0.0 <= lo && lo <= r.accuracy && r.accuracy <= hi && hi <= 1.0);
    }

    /// Flipping predictions and labels together swaps the class rates.
    #[test]
    fn complement_swaps_rates(half in proptest::collection::vec(0.0f32..=1.0, 1..100)) {
        // Balanced labels: the first half positive, the second negative.
        let n = half.len();
        let labels: Vec<u8> = (0..2 * n).map(|i| (i < n) as u8).collect();
        let mut preds = half.clone();
        preds.extend(half.iter().rev());
        // Avoid the ambiguous tie at the threshold.
        let preds: Vec<f32> = preds.iter().map(|&p| if p == 0.5 { 0.75 } else { p }).collect();
        let r = evaluate_labels(&labels, &preds, 0.5).unwrap();

        let flipped_preds: Vec<f32> = preds.iter().map(|&p| 1.0 - p).collect();
        let flipped_labels: Vec<u8> = labels.iter().map(|&y| 1 - y).collect();
        let f = evaluate_labels(&flipped_labels, &flipped_preds, 0.5).unwrap();
        prop_assert_eq!(f.tpr, r.tnr);
        prop_assert_eq!(f.tnr, r.tpr);

        let lo = r.tpr.min(r.tnr);
        let hi = r.tpr.max(r.tnr);
        prop_assert!(lo - 1e-12 <= r.accuracy && r.accuracy <= hi + 1e-12);
    }
}
