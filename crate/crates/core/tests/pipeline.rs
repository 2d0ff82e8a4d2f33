use soc_cavity::drift::ep::{drift_family, scan_exceptional_points};
use soc_cavity::io::{parse_config, serialize_config, spectral_json, spectral_table, Table};
use soc_cavity::spectra::psd_map;
use soc_cavity::sweep::make_grid;
use soc_cavity::topology::chern_marker_from_psd;
use soc_cavity::{derive, PhysicalParams};

const PAPER_STYLE: &str = "\
kappa = 1
gamma = 2
Delta_a = 1
N = 1
g_a = 0.5
U = 0.3
epsilon = 0
Omega_z = 3
delta = 0
alpha_tilde = 1.5
P = 6.5
omega_p = 1
k_count = 12
omega_count = 20
";

#[test]
fn config_to_csv_and_back() {
    let doc = parse_config(PAPER_STYLE).unwrap();
    let map = psd_map(&doc.params, &doc.k_grid().unwrap(), &doc.omega_grid().unwrap()).unwrap();
    let marker = chern_marker_from_psd(&map, &doc.params).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    spectral_table(&map, Some(&marker)).unwrap().write(&first).unwrap();
    let reread = Table::read(&first).unwrap();
    assert_eq!(reread.rows.len(), 12 * 20);
    assert!(reread.rows.iter().all(|r| r.len() == reread.header.len()));
    reread.write(&second).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn derived_detuning_is_echoed_in_meta() {
    let doc = parse_config(PAPER_STYLE).unwrap();
    let map = psd_map(&doc.params, &[0.0], &[0.5]).unwrap();
    let v = spectral_json(&map, None, false).into_value();
    // Δ = Δ̃ + g_a·N by hand
    let expected = 1.0 + 0.5 * 1.0;
    assert_eq!(v["meta"]["derived"]["delta"].as_f64().unwrap(), expected);
    assert_eq!(derive(&doc.params).delta, expected);
}

#[test]
fn canonical_text_is_a_fixed_point() {
    let doc = parse_config(PAPER_STYLE).unwrap();
    let text = serialize_config(&doc);
    let again = parse_config(&text).unwrap();
    assert_eq!(again, doc);
    assert_eq!(serialize_config(&again), text);
}

#[test]
fn spin_spectra_stay_finite_on_the_loss_dominated_grid() {
    let p = PhysicalParams::default();
    let map = psd_map(&p, &make_grid(-3.0, 3.0, 32).unwrap(), &make_grid(-3.0, 3.0, 64).unwrap()).unwrap();
    let finite = map
        .values
        .iter()
        .filter(|pt| pt.flag.is_ok())
        .all(|pt| pt.s_up.is_finite() && pt.s_dn.is_finite() && pt.s_out.is_finite());
    assert!(finite);
    let negative = map.values.iter().filter(|pt| pt.flag.is_ok() && pt.s_out < 0.0).count();
    assert_eq!(negative, map.negative_count);
}

#[test]
fn drift_exceptional_points_mirror_in_momentum() {
    let p = PhysicalParams::gain_dominated();
    let d = derive(&p);
    let ks = make_grid(-3.0, 3.0, 241).unwrap();
    let step = ks[1] - ks[0];
    let forward = scan_exceptional_points(drift_family(&d, &p), &ks, 1e-3).unwrap();
    // the same scan with the family reflected through k = 0
    let reflected = scan_exceptional_points(|k| drift_family(&d, &p)(-k), &ks, 1e-3).unwrap();
    assert_eq!(forward.len(), reflected.len());
    for e in &forward {
        assert!(reflected.iter().any(|r| (r.k_at + e.k_at).abs() < 2.0 * step), "unmatched EP at {}", e.k_at);
    }
}
