use sppa::ode_lab::{integrate_halpern_limit, integrate_yosida_flow, IntegratorConfig, SystemKind};
use sppa::operators::L1Norm;
use sppa::Vector;

#[test]
fn trajectories_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("yosida.csv");
    let x0 = Vector::from_vec(vec![2.0, -0.5]);
    let cfg = IntegratorConfig::new(0.05, 1.0).unwrap();
    let tr = integrate_yosida_flow(&L1Norm::new(2, 1.0), &x0, &Vector::zeros(2), &cfg).unwrap();
    tr.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), tr.samples.len());
    let last = rows.last().unwrap();
    assert_eq!(last[0], 1.0);
    assert_eq!(last[1], tr.last().x[0]);
    assert_eq!(last.len(), 1 + 2 * 2 + tr.columns.len());
}

#[test]
fn halpern_limit_meets_its_terminal_rate() {
    // The anchored limit trades speed on easy problems for a worst-case
    // O(1/t²) residual; the unanchored flow only guarantees O(1/t).
    let l1 = L1Norm::new(3, 1.0);
    let x0 = Vector::from_vec(vec![4.0, -3.0, 2.5]);
    let d0 = x0.norm_squared();
    let cfg = IntegratorConfig::new(1e-3, 10.0).unwrap();
    let plain = integrate_yosida_flow(&l1, &x0, &Vector::zeros(3), &cfg).unwrap();
    let fast = integrate_halpern_limit(&l1, &x0, &Vector::zeros(3), &cfg).unwrap();
    assert!(plain.passed() && fast.passed());
    assert_eq!(fast.system, SystemKind::HalpernLimit.as_str());
    let tail = *fast.column("res_sq").unwrap().last().unwrap();
    assert!(tail <= d0 / (100.0 + 20.0));
}
