use nalgebra::Matrix6;
use proptest::prelude::*;

use soc_cavity::io::{parse_config, serialize_config, ConfigDocument, JobConfig};
use soc_cavity::sweep::{run_sweep, Axis, AxisName, Output, SweepSpec};
use soc_cavity::{DriftMatrix, PhysicalParams};

/// Real matrix with eigenvalues {re_i ± i·im_i}, hidden behind a well-conditioned similarity.
fn stable_matrix(re: [f64; 3], im: [f64; 3], mix: [f64; 36]) -> Matrix6<f64> {
    let mut core = Matrix6::zeros();
    for b in 0..3 {
        let i = 2 * b;
        core[(i, i)] = re[b];
        core[(i + 1, i + 1)] = re[b];
        core[(i, i + 1)] = im[b];
        core[(i + 1, i)] = -im[b];
    }
    let s = Matrix6::identity() + Matrix6::from_column_slice(&mix) * 0.1;
    let inv = s.try_inverse().expect("near-identity similarity is invertible");
    s * core * inv
}

fn params() -> impl Strategy<Value = PhysicalParams> {
    (
        (0.1f64..3.0, 0.0f64..3.0, -3.0f64..3.0, 0.5f64..5.0, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..2.0),
        (0.0f64..5.0, -2.0f64..2.0, 0.0f64..4.0, 0.0f64..10.0, 0.5f64..2.0, 0.0f64..2.0, 0.1f64..1.0, 0.1f64..1.0),
    )
        .prop_map(|((kappa, gamma, da, n, ga, u, eps), (oz, delta, alpha, p, wp, t, eta, frac))| PhysicalParams {
            kappa,
            gamma,
            bare_detuning: da,
            atom_number: n,
            atom_coupling: ga,
            interaction: u,
            epsilon: eps,
            omega_z: oz,
            raman_detuning: delta,
            soc_strength: alpha,
            power: p,
            pump_frequency: wp,
            theta: t,
            eta_det: eta,
            kappa_ext: frac * kappa,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stable_spectra_are_certified(
        re in proptest::array::uniform3(-2.0f64..-0.1),
        im in proptest::array::uniform3(0.0f64..3.0),
        mix in proptest::array::uniform32(-1.0f64..1.0),
        tail in proptest::array::uniform4(-1.0f64..1.0),
    ) {
        let mut m = [0.0; 36];
        m[..32].copy_from_slice(&mix);
        m[32..].copy_from_slice(&tail);
        let r = DriftMatrix::from_matrix(stable_matrix(re, im, m)).stability_report(1e-9).unwrap();
        prop_assert!(r.eigen_stable);
        prop_assert!(r.rh_stable);
    }

    #[test]
    fn config_text_round_trips(p in params()) {
        let doc = ConfigDocument { params: p, job: JobConfig::default() };
        let parsed = parse_config(&serialize_config(&doc)).unwrap();
        prop_assert_eq!(parsed, doc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweeps_ignore_worker_count(p in params(), workers in 2usize..6) {
        let spec = SweepSpec::new(
            p,
            Axis::new(AxisName::Momentum, -2.0, 2.0, 6),
            Some(Axis::new(AxisName::Power, 0.1, 5.0, 5)),
            &[Output::Psd, Output::Chern, Output::Stability],
        );
        let a = run_sweep(&spec, 1).unwrap();
        let b = run_sweep(&spec, workers).unwrap();
        prop_assert!(a.same_data(&b));
    }
}
