//! Frozen results of the default water-vapor scenario.
//!
//! The magnitudes were spot-checked against hand calculations first (mean
//! free time 4.898e-6 s, effective spread 8.638e-5 m, slab population
//! 24469, first-order attenuation exp(-sum P) at each size), then the run
//! was snapshotted. Any drift in sampling, spread resolution, or the
//! closed forms shows up here as a diff against these numbers.

use smeared_gas::harness::{parse_config, run_ratio, run_sweep};

fn assert_close(got: f64, want: f64, rel: f64, what: &str) {
    let denom = want.abs().max(f64::MIN_POSITIVE);
    assert!(
        ((got - want) / denom).abs() <= rel,
        "{what}: got {got:e}, snapshot {want:e}"
    );
}

#[test]
fn default_sweep_aggregates() {
    let config = parse_config("").unwrap();
    let table = run_sweep(&config, &config.sweep).unwrap();
    let snapshot: [(f64, f64, f64); 7] = [
        (1e-6, 0.9999034734222599, 1.15860606009977e-6),
        (2e-6, 0.9996139492739562, 4.6331385207546264e-6),
        (5e-6, 0.997589612944341, 2.8900931021994418e-5),
        (1e-5, 0.9903930600908207, 1.148048270993297e-4),
        (2e-5, 0.9621194278132421, 4.4666681275333503e-4),
        (5e-5, 0.7854559736963469, 2.3006302514605895e-3),
        (1e-4, 0.3799130275832673, 4.56907054069595e-3),
    ];
    assert_eq!(table.aggregates.len(), snapshot.len());
    for (agg, (size, mean_tr, stdev_tr)) in table.aggregates.iter().zip(snapshot) {
        assert_eq!(agg.size_m, size);
        assert_close(agg.mean_tr, mean_tr, 1e-12, "mean TR");
        assert_close(agg.stdev_tr, stdev_tr, 1e-9, "stdev TR");
    }
}

#[test]
fn default_ratio_report() {
    let config = parse_config("").unwrap();
    let report = run_ratio(&config, 1e-6, 1e-4, 32, 1).unwrap();
    assert_close(report.tr_small.mean, 0.9999022865403072, 1e-12, "tr_small mean");
    assert_close(report.tr_large.mean, 0.37619913896562307, 1e-12, "tr_large mean");
    assert_close(report.ratio.mean, 2.6583721442754347, 1e-12, "ratio mean");
    assert_close(report.ratio.stdev, 0.035714735091634385, 1e-9, "ratio stdev");
    assert_close(
        report.z_score.unwrap(),
        262.6694412688413,
        1e-9,
        "z-score",
    );
}
