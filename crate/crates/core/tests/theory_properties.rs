use sketchcpd::theory::{
    arl_fixed, calibrate_b, edd_fixed, log_arl_fixed, log_arl_minimizer, walk_corrections, ArlQuery,
    EddQuery,
};
use sketchcpd::numerics::RngStream;

#[test]
fn calibrated_threshold_is_linear_in_m() {
    let ms: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
    let bs: Vec<f64> = ms
        .iter()
        .map(|&m| calibrate_b(m as usize, 200, 5000.0).unwrap())
        .collect();
    let n = ms.len() as f64;
    let mx = ms.iter().sum::<f64>() / n;
    let my = bs.iter().sum::<f64>() / n;
    let sxy: f64 = ms.iter().zip(&bs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = ms.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = bs.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 >= 0.995, "R^2 = {r2}");
}

#[test]
fn strictly_increasing_right_of_minimum() {
    for &(m, w) in &[(10, 200), (50, 200), (100, 50), (300, 200)] {
        let (b_min, _) = log_arl_minimizer(m, w).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..200 {
            let b = b_min + 0.05 + 0.5 * i as f64;
            let v = log_arl_fixed(ArlQuery::new(m, b, w)).unwrap();
            assert!(v > prev, "M={m} b={b}");
            prev = v;
        }
    }
    assert!(
        arl_fixed(ArlQuery::new(50, 52.0, 200)).unwrap() > arl_fixed(ArlQuery::new(50, 51.0, 200)).unwrap()
    );
}

#[test]
fn finite_for_large_arguments() {
    for &m in &[1usize, 10, 300, 1000, 5000] {
        for &b in &[2500.5, 3000.0, 5000.0] {
            if b <= 0.5 * m as f64 {
                continue;
            }
            let v = log_arl_fixed(ArlQuery::new(m, b, 200)).unwrap();
            assert!(v.is_finite(), "M={m} b={b}");
        }
    }
}

#[test]
fn log_arl_slope_matches_leading_order() {
    // At fixed x = M/2b, log ARL ≈ b (1 - x + x log x) + O(log b).
    for &x in &[0.3, 0.5, 0.7] {
        let b1 = 2000.0;
        let b2 = 4000.0;
        let m1 = (2.0 * x * b1) as usize;
        let m2 = (2.0 * x * b2) as usize;
        let l1 = log_arl_fixed(ArlQuery::new(m1, m1 as f64 / (2.0 * x), 200)).unwrap();
        let l2 = log_arl_fixed(ArlQuery::new(m2, m2 as f64 / (2.0 * x), 200)).unwrap();
        let slope = (l2 - l1) / (b2 - b1);
        let rate = 1.0 - x + x * x.ln();
        assert!((slope / rate - 1.0).abs() < 0.02, "x={x}: {slope} vs {rate}");
    }
}

#[test]
fn table_edd_first_rows() {
    let c = walk_corrections(5.0, &mut RngStream::new(9, 0), 100_000).unwrap();
    let edd = edd_fixed(&EddQuery { b: 84.65, m: 100, delta: 5.0, corrections: Some(c) }).unwrap();
    assert!((edd - 3.4).abs() <= 0.5, "{edd}");
}
