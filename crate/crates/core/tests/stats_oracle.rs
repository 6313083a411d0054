//! Statistics checked against hand values, reference survival values and
//! the Pearson definition.

use lrlkit::stats::{chi2_1_sf, mcnemar, multishot_benefit, paired_chi_squared, point_biserial, PairedOutcome};
use proptest::prelude::*;

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

fn table(b: u64, c: u64) -> PairedOutcome {
    PairedOutcome { b, c, both_correct: 7, both_wrong: 3 }
}

#[test]
fn corrected_statistic_hand_values() {
    assert!((mcnemar(table(10, 2), true).statistic - 49.0 / 12.0).abs() < 1e-9);
    assert!((mcnemar(table(5, 5), true).statistic - 0.1).abs() < 1e-9);
    assert_eq!(mcnemar(table(0, 0), true).p_value, 1.0);
}

#[test]
fn survival_function_reference_values() {
    // Frozen from scipy.stats.chi2.sf(x, df=1).
    let reference = [
        (49.0 / 12.0, 0.04330814281079206),
        (0.1, 0.7518296340458492),
        (64.0 / 12.0, 0.020921335337794035),
        (1.0, 0.31731050786291115),
        (10.0, 0.001565402258002549),
    ];
    for (x, p) in reference {
        assert!((chi2_1_sf(x) - p).abs() < 1e-10, "x = {x}: {} vs {p}", chi2_1_sf(x));
    }
}

#[test]
fn records_with_ten_and_two_discordant_pairs() {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let ids: Vec<String> = (0..30).map(|i| format!("ex{i}")).collect();
    for (i, id) in ids.iter().enumerate() {
        let (ra, rb) = match i {
            0..=9 => (true, false),
            10..=11 => (false, true),
            12..=20 => (true, true),
            _ => (false, false),
        };
        a.push((id.as_str(), ra));
        b.push((id.as_str(), rb));
    }
    let r = paired_chi_squared(a.clone(), b.clone(), true).unwrap();
    assert_eq!((r.table.b, r.table.c, r.table.both_correct, r.table.both_wrong), (10, 2, 9, 9));
    assert!((r.p_value - 0.04330814281079206).abs() < 1e-10);
    let swapped = paired_chi_squared(b.clone(), a.clone(), true).unwrap();
    assert_eq!(swapped.statistic, r.statistic);
    a.reverse();
    assert_eq!(paired_chi_squared(a, b, true).unwrap().statistic, r.statistic);
}

#[test]
fn multishot_definition() {
    assert!(multishot_benefit(0.40, &[0.41, 0.42, 0.39, 0.43]).unwrap());
    assert!(!multishot_benefit(0.5, &[0.5, 0.5, 0.5, 0.5]).unwrap());
    assert!(!multishot_benefit(0.40, &[0.41, 0.41, 0.38, 0.38]).unwrap());
    assert!(multishot_benefit(0.40, &[0.41, 0.42, 0.43, 0.44, 0.45]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn point_biserial_equals_pearson(
        pairs in prop::collection::vec((0u8..=1, -100.0f64..100.0), 3..60)
    ) {
        let binary: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let cont: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(binary.contains(&0) && binary.contains(&1));
        let r = point_biserial(&binary, &cont).unwrap();
        let x: Vec<f64> = binary.iter().map(|&b| b as f64).collect();
        prop_assert!((r - pearson(&x, &cont)).abs() < 1e-9);
    }

    #[test]
    fn mcnemar_is_symmetric(b in 0u64..500, c in 0u64..500, corr in any::<bool>()) {
        let t = table(b, c);
        prop_assert_eq!(mcnemar(t, corr).statistic, mcnemar(t.swapped(), corr).statistic);
        let p = mcnemar(t, corr).p_value;
        prop_assert!((0.0..=1.0).contains(&p));
    }
}
