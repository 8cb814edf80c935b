mod common;

#[test]
fn geweke_successive_conditional() {
    let r = common::geweke(10, 10_000, 2024);
    for (name, z) in &r.z {
        println!("{name:<16} z = {z:+.3}");
    }
    assert!(r.max_abs_z() < 4.0, "max |z| = {}", r.max_abs_z());
}
