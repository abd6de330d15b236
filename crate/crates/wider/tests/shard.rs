use proptest::prelude::*;
use upw_wider::*;

fn accounts(n: u64) -> Vec<AccountId> {
    (0..n).map(|i| Wallet::from_seed(i).id()).collect()
}

#[test]
fn first_joins_split_the_root() {
    let mut t = ShardTree::new();
    assert_eq!(t.node(0).label, "");
    assert_eq!(t.shard_assign().1, "0");
    assert_eq!(t.shard_assign().1, "1");
    for a in accounts(64) {
        assert_eq!(t.hosts(1, &a), !a.bit(0));
        assert_eq!(t.hosts(2, &a), a.bit(0));
    }
}

#[test]
fn child_hosts_about_half_of_parent() {
    let mut t = ShardTree::new();
    for _ in 0..6 {
        t.shard_assign();
    }
    let accts = accounts(4000);
    for n in &t.nodes()[1..] {
        let p = n.parent.unwrap();
        let parent = accts.iter().filter(|a| t.hosts(p, a)).count() as f64;
        let child = accts.iter().filter(|a| t.hosts(n.id, a)).count() as f64;
        assert!(accts.iter().filter(|a| t.hosts(n.id, a)).all(|a| t.hosts(p, a)));
        assert!((child / parent - 0.5).abs() < 0.06, "{} {child}/{parent}", n.label);
    }
}

#[test]
fn full_tree_leaves_cover_once() {
    let mut t = ShardTree::new();
    for _ in 0..14 {
        t.shard_assign();
    }
    assert_eq!(t.leaves().len(), 8);
    let accts = accounts(500);
    assert!(t.leaf_coverage(&accts).values().all(|&c| c == 1));
}

#[test]
fn sharding_nodes_store_less() {
    let cfg = TpsConfig { width: 40, avg_txs: 4, block_size: None, interval: 15, blocks: 10, seed: 3 };
    let (chain, _) = run_trace(&cfg);
    let full = chain.storage_bytes("");
    let half = chain.storage_bytes("0");
    let quarter = chain.storage_bytes("00");
    assert_eq!(full.main_chain, half.main_chain);
    assert_eq!(full.state, quarter.state);
    assert!(half.total() < full.total());
    assert!(quarter.total() < half.total());
    assert!(full.subchains > 0);
}

proptest! {
    #[test]
    fn every_account_has_exactly_one_responsible_node(joins in 0usize..40, seeds in proptest::collection::vec(any::<u64>(), 1..40)) {
        let mut t = ShardTree::new();
        for _ in 0..joins {
            t.shard_assign();
        }
        let accts: Vec<AccountId> = seeds.into_iter().map(|s| Wallet::from_seed(s).id()).collect();
        for (a, n) in t.coverage(&accts) {
            prop_assert_eq!(n, 1);
            let r = t.responsible(&a);
            prop_assert!(t.hosts(r, &a));
        }
        for n in t.nodes().iter().skip(1) {
            let p = &t.node(n.parent.unwrap()).label;
            prop_assert!(n.label.len() == p.len() + 1 && n.label.starts_with(p.as_str()));
        }
    }
}
