//! Cohort bucketing against two independent restatements of the rule, plus
//! invariance checks on data where floating point is exact.

use duplex_core::attributes::{bucketize, RelativeBucket, BOUNDARY_TOLERANCE, MIN_COHORT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K1: f64 = 0.8;
const K2: f64 = 1.2;

/// Straight-line f64 restatement: insertion sort, explicit quartile positions.
fn straight_line(values: &[f64], target: usize) -> RelativeBucket {
    let n = values.len();
    let mut s = values.to_vec();
    for i in 1..n {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut total = 0.0;
    for v in values {
        total += v;
    }
    let mean = total / n as f64;
    let q = |p: f64| {
        let pos = p * (n as f64 - 1.0);
        let i = pos as usize;
        if i + 1 >= n {
            s[n - 1]
        } else {
            s[i] + (pos - i as f64) * (s[i + 1] - s[i])
        }
    };
    let iqr = q(0.75) - q(0.25);
    let d = values[target] - mean;
    let m = if d < 0.0 { -d } else { d };
    let mut scale = if mean < 0.0 { -mean } else { mean };
    let v = if values[target] < 0.0 { -values[target] } else { values[target] };
    if v > scale {
        scale = v;
    }
    if iqr > scale {
        scale = iqr;
    }
    let slack = BOUNDARY_TOLERANCE * scale;
    if m <= K1 * iqr + slack {
        RelativeBucket::Normal
    } else if m <= K2 * iqr + slack {
        if d > 0.0 { RelativeBucket::High } else { RelativeBucket::Low }
    } else if d > 0.0 {
        RelativeBucket::VeryHigh
    } else {
        RelativeBucket::VeryLow
    }
}

/// Exact rational restatement for integer cohorts with k1 = 4/5, k2 = 6/5.
fn exact_integer(values: &[i64], target: usize) -> RelativeBucket {
    let n = values.len() as i128;
    let mut s: Vec<i128> = values.iter().map(|&v| v as i128).collect();
    s.sort();
    let total: i128 = s.iter().sum();
    // four times the quantile at p = num/4
    let q4 = |num: i128| {
        let pos4 = num * (n - 1);
        let (lo, frac) = ((pos4 / 4) as usize, pos4 % 4);
        let hi = if frac == 0 { lo } else { lo + 1 };
        4 * s[lo] + frac * (s[hi] - s[lo])
    };
    let iqr4 = q4(3) - q4(1);
    let dn = n * values[target] as i128 - total; // d · n
    // |d| <= (a/b)·q  <=>  4·b·|d·n| <= a·n·(4q)
    let within = |a: i128, b: i128| 4 * b * dn.abs() <= a * n * iqr4;
    if within(4, 5) {
        RelativeBucket::Normal
    } else if within(6, 5) {
        if dn > 0 { RelativeBucket::High } else { RelativeBucket::Low }
    } else if dn > 0 {
        RelativeBucket::VeryHigh
    } else {
        RelativeBucket::VeryLow
    }
}

#[test]
fn five_hundred_cohorts_match_straight_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0C7);
    let mut checked = 0;
    for cohort in 0..500 {
        let n = rng.gen_range(MIN_COHORT..60);
        let scale = 10f64.powi(rng.gen_range(-3..4));
        let values: Vec<f64> = (0..n)
            .map(|_| match cohort % 3 {
                0 => rng.gen::<f64>() * scale,
                1 => rng.gen_range(0..6) as f64,
                _ => (rng.gen::<f64>() - 0.5).powi(3) * scale,
            })
            .collect();
        for t in 0..n {
            assert_eq!(bucketize(&values, t, K1, K2).unwrap(), straight_line(&values, t), "cohort {cohort} {values:?} target {t}");
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn integer_cohorts_match_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut boundary_hits = 0;
    for cohort in 0..500 {
        let n = rng.gen_range(MIN_COHORT..30);
        let values: Vec<i64> = (0..n).map(|_| rng.gen_range(0..12)).collect();
        let as_f: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        for t in 0..n {
            let want = exact_integer(&values, t);
            assert_eq!(bucketize(&as_f, t, K1, K2).unwrap(), want, "cohort {cohort} {values:?} target {t}");
            let scaled = exact_integer(&values.iter().map(|v| v * 1000).collect::<Vec<_>>(), t);
            assert_eq!(scaled, want);
            boundary_hits += usize::from(want != RelativeBucket::Normal);
        }
    }
    assert!(boundary_hits > 0);
}

/// Multiples of 1/8 below 2^16 in a power-of-two cohort: sums, means,
/// quartiles, translations and power-of-two scalings are all exact.
fn dyadic_cohort(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = 1usize << rng.gen_range(2..6);
    (0..n).map(|_| rng.gen_range(-4096i64..4096) as f64 / 8.0).collect()
}

#[test]
fn translation_invariance_200_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for check in 0..200 {
        let values = dyadic_cohort(&mut rng);
        let shift = rng.gen_range(-8192i64..8192) as f64 / 4.0;
        let moved: Vec<f64> = values.iter().map(|v| v + shift).collect();
        for t in 0..values.len() {
            assert_eq!(bucketize(&values, t, K1, K2).unwrap(), bucketize(&moved, t, K1, K2).unwrap(), "check {check}");
        }
    }
}

#[test]
fn scale_invariance_200_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    for check in 0..200 {
        let values = dyadic_cohort(&mut rng);
        let c = 2f64.powi(rng.gen_range(-10..11));
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        for t in 0..values.len() {
            assert_eq!(bucketize(&values, t, K1, K2).unwrap(), bucketize(&scaled, t, K1, K2).unwrap(), "check {check}");
        }
    }
}

#[test]
fn identical_speakers_are_normal() {
    let values = [3.5; 7];
    for t in 0..values.len() {
        assert_eq!(bucketize(&values, t, K1, K2).unwrap(), RelativeBucket::Normal);
    }
    assert!(bucketize(&values[..3], 0, K1, K2).is_err());
}
