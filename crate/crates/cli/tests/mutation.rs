use hlm_cli::acceptance::{Suite, TABLE_LIMIT};
use hlm_core::arith::ArithTable;

#[test]
fn absolute_mobius_breaks_the_decay_criterion() {
    let good = ArithTable::build(TABLE_LIMIT).unwrap();
    let mobius: Vec<i8> = (0..=TABLE_LIMIT).map(|n| if n == 0 { 0 } else { good.mobius(n).abs() }).collect();
    let bad = ArithTable::from_parts(good.is_prime_raw().to_vec(), mobius, good.vonmangoldt_raw().to_vec()).unwrap();
    let suite = Suite::with_table(bad).unwrap();
    let o = suite.run(6);
    assert!(!o.passed, "{}", o.line());
    assert!(!o.check("at 1e6").unwrap().passed);
    // Criteria that never read μ are unaffected.
    assert!(suite.run(5).passed);
}

#[test]
fn undersized_tables_are_rejected() {
    assert!(Suite::with_table(ArithTable::build(1000).unwrap()).is_err());
}
