use qneclab::verify::{known_unattainable, run_suite, Suite, VerifyConfig};

#[test]
fn every_suite_passes_for_two_seeds() {
    for seed in [0, 42] {
        let cfg = VerifyConfig { seed, samples: 2, ..VerifyConfig::default() };
        for suite in Suite::ALL {
            for o in run_suite(suite, &cfg) {
                eprintln!("{seed} {:<12} {:<26} {:>4} {:.3e} <= {:.1e} {}", o.suite, o.property, o.checks, o.max_residual, o.tolerance, o.error.clone().unwrap_or_default());
                if known_unattainable(suite, &o.property).is_some() {
                    assert!(o.error.is_none(), "seed {seed}: {o:?}");
                    continue;
                }
                assert!(o.pass, "seed {seed}: {o:?}");
            }
        }
    }
}

#[test]
fn extensivity_bound_is_violated_for_seed_42() {
    let cfg = VerifyConfig { seed: 42, samples: 2, ..VerifyConfig::default() };
    let o = run_suite(Suite::Asymptotics, &cfg).into_iter().find(|o| o.property == "extensivity_bound").unwrap();
    assert!(!o.pass && o.max_residual > 1e-4, "{o:?}");
}
