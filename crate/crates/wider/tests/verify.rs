use upw_wider::*;

#[test]
fn worker_count_does_not_change_the_verified_set() {
    let txs = make_signed_txs(2000, 97, 11);
    let base = verify_parallel(&txs, 1).verified;
    assert_eq!(base.len(), 2000 - 2000 / 97);
    for w in 2..=4 {
        assert_eq!(verify_parallel(&txs, w).verified, base);
    }
}

#[test]
fn bad_signature_excluded_under_any_worker_count() {
    let txs = make_signed_txs(64, 8, 1);
    let bad: Vec<_> = txs.iter().filter(|t| !t.verify_signature()).map(|t| t.hash()).collect();
    assert_eq!(bad.len(), 8);
    for w in 1..=5 {
        let out = verify_parallel(&txs, w);
        assert!(bad.iter().all(|h| !out.verified.contains(h)));
        assert_eq!(out.verified.len(), 56);
    }
}

#[test]
fn more_workers_than_transactions() {
    let txs = make_signed_txs(3, 0, 2);
    assert_eq!(verify_parallel(&txs, 8).verified.len(), 3);
    assert!(verify_parallel(&[], 4).verified.is_empty());
}
