use std::collections::BTreeMap;

use ed25519_dalek::SigningKey;
use upw_core::porep::{FailReason, Verdict};
use upw_storage::*;

fn params(chunk_size: u64, price: Price) -> NetParams {
    NetParams { difficulty: 8, q: 32, deadline_factor: 16, price, verifier_reward: 5, chunk_size }
}

struct World {
    net: Network,
    key: SigningKey,
}

impl World {
    fn new(seed: u64, nodes: usize, providers: usize, p: NetParams) -> Self {
        let mut net = Network::new(p, seed);
        for i in 0..nodes {
            net.register_node(&format!("N{i}"));
        }
        for i in 0..providers {
            net.register_provider(&format!("P{i}"), ProviderMode::Honest);
        }
        net.register_verifier("V0", true);
        let key = SigningKey::from_bytes(&[9; 32]);
        net.register_user("U0", key.verifying_key());
        World { net, key }
    }

    fn op(&mut self, op: UserOp) -> Result<OpOutcome, StorageError> {
        let v = self.net.file_space("U0").map(|s| s.version).unwrap_or(0) + 1;
        let sig = op.sign("U0", v, &self.key);
        self.net.user_op("U0", &op, &sig)
    }
}

fn upload(path: &str, n: usize) -> UserOp {
    UserOp::Upload { path: path.into(), bytes: (0..n).map(|i| (i * 7 + 3) as u8).collect() }
}

#[test]
fn setup_picks_primary_and_backups() {
    let mut w = World::new(1, 4, 3, params(1024, Price::default()));
    let rec = w.net.setup("U0", 3, 100).unwrap();
    assert_eq!(rec.backup_nodes.len(), 2);
    let mut all = rec.backup_nodes.clone();
    all.push(rec.primary_node.clone());
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 3);
    assert_eq!(w.net.ledger().record("U0"), Some(&rec));
    assert_eq!(rec.storage_start_time(), 0);

    let again = World::new(1, 4, 3, params(1024, Price::default())).net.setup("U0", 3, 100).unwrap();
    assert_eq!(again, rec);
}

#[test]
fn setup_errors() {
    let mut w = World::new(1, 4, 3, params(1024, Price::default()));
    assert!(matches!(w.net.setup("U0", 3, 0), Err(StorageError::InsufficientPrepay { got: 0, .. })));
    let mut empty = World::new(1, 0, 3, params(1024, Price::default()));
    assert_eq!(empty.net.setup("U0", 3, 10), Err(StorageError::NoNodesRegistered));
    assert_eq!(w.net.setup("nobody", 3, 10), Err(StorageError::UnknownUser("nobody".into())));
    let mut pricey = World::new(1, 4, 3, params(1024, Price { units: 10, per_bytes: 1024 }));
    assert_eq!(pricey.net.setup("U0", 3, 29), Err(StorageError::InsufficientPrepay { min: 30, got: 29 }));
}

#[test]
fn four_chunk_upload_gives_twelve_replicas() {
    let mut w = World::new(2, 4, 4, params(1024, Price::default()));
    w.net.setup("U0", 3, 100).unwrap();
    let out = w.op(upload("/f", 4096)).unwrap();
    assert_eq!(out.version, 1);
    assert_eq!(out.new_chunks.len(), 4);
    let replicas: usize = out.new_chunks.iter().map(|(_, ps)| ps.len()).sum();
    assert_eq!(replicas, 12);
    for (_, ps) in &out.new_chunks {
        let mut d = ps.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 3, "duplicate provider in {ps:?}");
    }
    assert_eq!(w.net.assignments().len(), 4);
    assert_eq!(w.net.ledger().record("U0").unwrap().data_size, 4096);
    assert!(w.net.hash_ops().values().sum::<u64>() > 12 * 1024 * 200);
}

#[test]
fn rename_of_removed_path_is_unknown() {
    let mut w = World::new(3, 3, 3, params(256, Price::default()));
    w.net.setup("U0", 1, 100).unwrap();
    w.op(upload("/a", 100)).unwrap();
    w.op(UserOp::Remove { path: "/a".into() }).unwrap();
    let e = w.op(UserOp::Rename { from: "/a".into(), to: "/b".into() }).unwrap_err();
    assert_eq!(e, StorageError::UnknownPath("/a".into()));
    assert_eq!(w.net.file_space("U0").unwrap().version, 2);
}

#[test]
fn data_size_returns_after_upload_and_remove() {
    let mut w = World::new(4, 3, 3, params(256, Price::default()));
    w.net.setup("U0", 2, 100).unwrap();
    w.op(upload("/keep", 300)).unwrap();
    let before = w.net.ledger().record("U0").unwrap().data_size;
    let head_before = w.net.file_space("U0").unwrap().files.clone();
    w.op(upload("/tmp", 700)).unwrap();
    assert_eq!(w.net.ledger().record("U0").unwrap().data_size, before + 700);
    w.op(UserOp::Remove { path: "/tmp".into() }).unwrap();
    assert_eq!(w.net.ledger().record("U0").unwrap().data_size, before);
    assert_eq!(w.net.file_space("U0").unwrap().files, head_before);
    assert_eq!(w.net.assignments().len(), 2);
}

#[test]
fn rename_moves_and_versions_increase() {
    let mut w = World::new(5, 3, 3, params(256, Price::default()));
    w.net.setup("U0", 1, 100).unwrap();
    let a = w.op(upload("/a", 10)).unwrap();
    let b = w.op(UserOp::Rename { from: "/a".into(), to: "/b".into() }).unwrap();
    assert!(b.version > a.version);
    assert_ne!(a.head, b.head);
    let fs = w.net.file_space("U0").unwrap();
    assert!(fs.files.contains_key("/b") && !fs.files.contains_key("/a"));
    assert_eq!(b.data_size, 10);
}

#[test]
fn bad_signature_is_rejected() {
    let mut w = World::new(6, 3, 3, params(256, Price::default()));
    w.net.setup("U0", 1, 100).unwrap();
    let op = upload("/a", 10);
    let wrong_version = op.sign("U0", 7, &w.key);
    assert_eq!(w.net.user_op("U0", &op, &wrong_version), Err(StorageError::BadSignature));
    let other = SigningKey::from_bytes(&[1; 32]);
    assert_eq!(w.net.user_op("U0", &op, &op.sign("U0", 1, &other)), Err(StorageError::BadSignature));
    assert_eq!(w.net.file_space("U0").unwrap().version, 0);
}

#[test]
fn not_enough_providers() {
    let mut w = World::new(7, 3, 1, params(256, Price::default()));
    w.net.setup("U0", 2, 100).unwrap();
    assert_eq!(w.op(upload("/a", 10)), Err(StorageError::NotEnoughProviders { need: 2, have: 1 }));
}

#[test]
fn settle_pays_one_unit_per_mib() {
    let mut w = World::new(8, 1, 1, params(1 << 20, Price { units: 1, per_bytes: 1 << 20 }));
    w.net.setup("U0", 1, 10).unwrap();
    w.op(upload("/m", 1 << 20)).unwrap();
    let out = w.net.epoch_settle(100);
    assert_eq!(out.payments, vec![Payment { user: "U0".into(), provider: "P0".into(), amount: 1 }]);
    assert_eq!(w.net.ledger().record("U0").unwrap().prepaid_balance, 9);
    assert_eq!(w.net.ledger().record("U0").unwrap().last_payment_time, 100);
}

#[test]
fn prepay_five_at_two_per_epoch_suspends_at_epoch_three() {
    let mut w = World::new(9, 1, 1, params(1024, Price { units: 2, per_bytes: 1024 }));
    w.net.setup("U0", 1, 5).unwrap();
    w.op(upload("/x", 1024)).unwrap();
    let mut suspended_at = None;
    for epoch in 1..=4u64 {
        let out = w.net.epoch_settle(epoch * 10);
        if !out.suspended.is_empty() {
            suspended_at.get_or_insert(epoch);
        }
    }
    let rec = w.net.ledger().record("U0").unwrap();
    assert_eq!(suspended_at, Some(3));
    assert!(rec.suspended);
    assert_eq!(rec.prepaid_balance, 1);
    assert_eq!(rec.last_payment_time, 20);
    assert_eq!(w.op(upload("/y", 1)), Err(StorageError::Suspended("U0".into())));
    assert!(w.net.ledger().conserved());
}

#[test]
fn paused_provider_gets_nothing() {
    let mut w = World::new(10, 2, 3, params(1024, Price { units: 1, per_bytes: 1024 }));
    w.net.setup("U0", 2, 100).unwrap();
    let out = w.op(upload("/x", 1024)).unwrap();
    let victim = out.new_chunks[0].1[0].clone();
    w.net.pause_provider(&victim, 1);
    let pay = w.net.epoch_settle(10);
    assert!(pay.payments.iter().all(|p| p.provider != victim));
    assert_eq!(pay.payments.len(), 2);
    assert_eq!(w.net.ledger().balance(&victim), 0);
}

#[test]
fn honest_round_has_no_action() {
    let mut w = World::new(11, 3, 3, params(256, Price { units: 1, per_bytes: 256 }));
    w.net.setup("U0", 3, 100).unwrap();
    w.op(upload("/x", 512)).unwrap();
    let rows = w.net.run_challenge_round(1);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.claimed.is_pass() && r.action == RoundAction::None && r.hash_ops_spent == 0));
    assert!(w.net.reassignments().is_empty());
    let pay = w.net.epoch_settle(10);
    assert_eq!(pay.payments.len(), 3);
    assert!(pay.payments.iter().all(|p| p.amount == 2));
}

fn cheater_world(seed: u64, kind: CheatKind) -> Network {
    let mut net = Network::new(params(256, Price { units: 1, per_bytes: 256 }), seed);
    for i in 0..3 {
        net.register_node(&format!("N{i}"));
    }
    net.register_provider("P0", ProviderMode::Cheat { kind, from_epoch: 1 });
    for i in 1..4 {
        net.register_provider(&format!("P{i}"), ProviderMode::Honest);
    }
    net.register_verifier("V0", true);
    let key = SigningKey::from_bytes(&[seed as u8; 32]);
    net.register_user("U0", key.verifying_key());
    net.setup("U0", 4, 1000).unwrap();
    let op = UserOp::Upload { path: "/c".into(), bytes: (0..256).map(|i| (i as u64 * seed) as u8).collect() };
    net.user_op("U0", &op, &op.sign("U0", 1, &key)).unwrap();
    net
}

#[test]
fn source_only_cheater_is_flagged_in_one_round() {
    let runs = 100;
    let mut flagged = 0;
    for seed in 0..runs {
        let mut net = cheater_world(seed, CheatKind::SourceOnly);
        let rows = net.run_challenge_round(1);
        let row = rows.iter().find(|r| r.provider == "P0").unwrap();
        if row.action == RoundAction::ProviderPaused {
            flagged += 1;
            assert!(matches!(row.claimed, Verdict::Fail(FailReason::DeadlineExceeded { .. })));
            assert_eq!(net.paused().get("P0"), Some(&1));
        }
        assert!(rows.iter().filter(|r| r.provider != "P0").all(|r| r.claimed.is_pass()));
    }
    assert!(flagged * 100 >= runs * 99, "flagged {flagged}/{runs}");
}

#[test]
fn catching_a_cheater_rewards_and_reassigns() {
    let mut net = Network::new(params(256, Price { units: 1, per_bytes: 256 }), 5);
    for i in 0..3 {
        net.register_node(&format!("N{i}"));
    }
    net.register_provider("P0", ProviderMode::Cheat { kind: CheatKind::Nothing, from_epoch: 1 });
    for i in 1..5 {
        net.register_provider(&format!("P{i}"), ProviderMode::Honest);
    }
    net.register_verifier("V0", true);
    let key = SigningKey::from_bytes(&[3; 32]);
    net.register_user("U0", key.verifying_key());
    net.setup("U0", 3, 1000).unwrap();
    let op = UserOp::Upload { path: "/c".into(), bytes: vec![1; 256 * 4] };
    net.user_op("U0", &op, &op.sign("U0", 1, &key)).unwrap();
    let held = net.assignments().values().filter(|a| a.providers.contains(&"P0".to_string())).count();
    assert!(held > 0);
    let before = net.hash_ops().values().sum::<u64>();

    let rows = net.run_challenge_round(1);
    let caught = rows.iter().filter(|r| r.provider == "P0").collect::<Vec<_>>();
    assert_eq!(caught.len(), 1, "one catch transfers every duty");
    assert_eq!(caught[0].claimed, Verdict::Fail(FailReason::Empty));
    assert_eq!(net.ledger().balance("V0"), 5);
    assert_eq!(net.reassignments().len(), held);
    assert!(net.reassignments().iter().all(|r| r.to.as_deref().is_some_and(|p| p != "P0")));
    assert!(net.availability().values().all(|&n| n == 3));
    assert!(net.actual_replicas().values().all(|&n| n == 3));
    let after = net.hash_ops().values().sum::<u64>();
    assert!(after - before >= held as u64 * 256 * 100, "re-sealing must cost");
    for a in net.assignments().values() {
        let mut d = a.providers.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), a.providers.len());
    }
    assert!(net.ledger().conserved());
}

#[test]
fn false_accusation_is_overridden() {
    let mut w = World::new(12, 3, 3, params(256, Price { units: 1, per_bytes: 256 }));
    w.net.register_verifier("V0", false);
    w.net.setup("U0", 2, 100).unwrap();
    w.op(upload("/x", 256)).unwrap();
    let rows = w.net.run_challenge_round(1);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(!r.claimed.is_pass());
        assert_eq!(r.recheck, Some(Verdict::Pass));
        assert_eq!(r.action, RoundAction::AccusationOverridden);
    }
    assert!(w.net.paused().is_empty());
    assert_eq!(w.net.ledger().balance("V0"), 0);
}

#[test]
fn recheck_waits_for_an_online_primary() {
    let mut w = World::new(13, 3, 3, params(256, Price::default()));
    w.net.register_verifier("V0", false);
    let rec = w.net.setup("U0", 1, 100).unwrap();
    w.op(upload("/x", 256)).unwrap();
    w.net.set_online(&rec.primary_node, false);
    let rows = w.net.run_challenge_round(1);
    assert!(rows.iter().all(|r| r.action == RoundAction::RecheckDeferred && r.recheck.is_none()));
    assert!(w.net.paused().is_empty());
}

fn votes(pairs: &[(&str, bool)]) -> BTreeMap<String, bool> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn failover_threshold_is_strict() {
    let mut w = World::new(14, 4, 4, params(256, Price::default()));
    let rec = w.net.setup("U0", 4, 100).unwrap();
    let b = rec.backup_nodes.clone();
    assert_eq!(b.len(), 3);

    let two = votes(&[(&b[0], true), (&b[1], true), (&b[2], false)]);
    assert_eq!(w.net.failover("U0", &two).unwrap(), FailoverOutcome::NoChange { invalid_votes: 2, backups: 3 });
    assert_eq!(w.net.ledger().record("U0").unwrap().primary_node, rec.primary_node);

    let stranger = votes(&[(&rec.primary_node, true)]);
    assert_eq!(w.net.failover("U0", &stranger), Err(StorageError::UnregisteredVoter(rec.primary_node.clone())));

    let three = votes(&[(&b[0], true), (&b[1], true), (&b[2], true)]);
    let out = w.net.failover("U0", &three).unwrap();
    assert_eq!(out, FailoverOutcome::Promoted { old: rec.primary_node.clone(), new: b[0].clone() });
    let now = w.net.ledger().record("U0").unwrap();
    assert_eq!(now.primary_node, b[0]);
    assert_eq!(now.backup_nodes, vec![b[1].clone(), b[2].clone(), rec.primary_node.clone()]);
}

#[test]
fn user_ops_resume_after_promotion() {
    let mut w = World::new(15, 4, 4, params(256, Price::default()));
    let rec = w.net.setup("U0", 4, 100).unwrap();
    w.net.set_online(&rec.primary_node, false);
    assert_eq!(w.op(upload("/a", 10)), Err(StorageError::PrimaryUnavailable(rec.primary_node.clone())));
    assert!(w.net.heartbeat(2).is_empty());
    let promoted = w.net.heartbeat(2);
    assert_eq!(promoted.len(), 1);
    assert!(matches!(promoted[0].1, FailoverOutcome::Promoted { .. }));
    assert!(w.op(upload("/a", 10)).is_ok());
}

#[test]
fn same_seed_same_log() {
    let run = |seed| {
        let mut w = World::new(seed, 4, 4, params(256, Price { units: 1, per_bytes: 256 }));
        w.net.setup("U0", 3, 100).unwrap();
        w.op(upload("/a", 700)).unwrap();
        w.net.run_challenge_round(1);
        w.net.epoch_settle(10);
        w.net.log().lines().to_vec()
    };
    assert_eq!(run(21), run(21));
    assert_ne!(run(21), run(22));
}
