use heatkernel::verify::{bond_martingale, VerifyOptions};

fn opts(broken: bool) -> VerifyOptions {
    VerifyOptions {
        paths: 20_000,
        break_b_sign: broken,
        ..VerifyOptions::default()
    }
}

#[test]
fn deflated_bond_martingale_holds_for_the_reference_model() {
    let checks = bond_martingale(&opts(false));
    assert!(checks.iter().all(|c| c.pass), "{checks:?}");
}

#[test]
fn flipped_coefficient_sign_is_detected() {
    let checks = bond_martingale(&opts(true));
    assert!(!checks.is_empty());
    assert!(checks.iter().any(|c| !c.pass), "{checks:?}");
}
