use proptest::prelude::*;
use upw_storage::*;

fn cheater_config(seed: u64) -> SimConfig {
    let mut cfg = SimConfig::small(seed);
    cfg.cheater_profiles = vec![CheaterProfile { provider: 0, kind: CheatKind::SourceOnly, from_epoch: 1 }];
    cfg
}

#[test]
fn cheater_paused_and_availability_restored() {
    let out = run_sim(&cheater_config(7));
    let r = &out.report;
    assert!(r.conservation_held);
    for line in &out.events {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["conserved"], true, "{line}");
    }
    assert_eq!(r.ops_ok, 1);
    let paused = r.paused.get("P0").copied().expect("cheater paused");
    assert!(paused <= 2);
    assert_eq!(r.paused.len(), 1);
    assert!(r.reassignments >= 1);
    let e3 = r.per_epoch.iter().find(|s| s.epoch == 3).unwrap();
    assert_eq!(e3.min_recorded_replicas, Some(3));
    assert_eq!(e3.min_actual_replicas, Some(3));
    assert_eq!(r.balances["P0"], 0);
    assert!(r.balances["V0"] + r.balances["V1"] >= 5);
    assert!(out.verdicts_csv.contains("deadline_exceeded"));
}

#[test]
fn all_honest_run_pays_everyone_every_epoch() {
    let cfg = SimConfig::small(3);
    let out = run_sim(&cfg);
    assert!(out.report.paused.is_empty());
    assert_eq!(out.report.reassignments, 0);
    // 4 KiB at 3 replicas, 1 unit per KiB.
    for s in &out.report.per_epoch {
        assert_eq!(s.payments, 12);
        assert_eq!(s.min_actual_replicas, Some(3));
    }
    let paid: u64 = out.report.balances.values().sum();
    assert_eq!(paid, 120);
    let rows: Vec<&str> = out.ledger_csv.lines().skip(1).collect();
    assert!(rows[0].contains(",prepay,"));
    assert!(rows[1..].iter().all(|r| r.contains(",provider_payment,")));
    let total: u64 = rows[1..].iter().map(|r| r.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 120);
}

#[test]
fn replay_is_byte_identical() {
    let cfg = cheater_config(11);
    let a = run_sim(&cfg);
    let b = run_sim(&cfg);
    assert_eq!(a.events, b.events);
    assert_eq!(a.ledger_csv, b.ledger_csv);
    assert_eq!(a.verdicts_csv, b.verdicts_csv);
    let c = run_sim(&cheater_config(12));
    assert_ne!(a.events, c.events);
}

#[test]
fn outage_triggers_failover_and_upload_resumes() {
    let mut cfg = SimConfig::small(5);
    cfg.epochs = 5;
    cfg.replication_count = 4;
    cfg.users[0].uploads[0].epoch = 1;
    let probe = run_sim(&cfg);
    let setup: serde_json::Value =
        probe.events.iter().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()).find(|v| v["kind"] == "setup").unwrap();
    let primary: usize = setup["primary"].as_str().unwrap()[1..].parse().unwrap();
    cfg.outages = vec![OutageProfile { node: primary, from_epoch: 1 }];
    let out = run_sim(&cfg);
    let r = &out.report;
    assert_eq!(r.ops_failed.get("PrimaryUnavailable"), Some(&1));
    assert_eq!(r.promotions.len(), 1);
    assert_eq!(r.promotions[0].0, 2);
    assert_eq!(r.ops_ok, 1);
    assert!(r.conservation_held);
}

#[test]
fn false_accuser_never_pauses_anyone() {
    let mut cfg = SimConfig::small(9);
    cfg.epochs = 3;
    cfg.verifiers = 1;
    cfg.false_accusers = vec![0];
    let out = run_sim(&cfg);
    assert!(out.report.paused.is_empty());
    assert!(out.verdicts.iter().all(|v| v.action == RoundAction::AccusationOverridden));
    assert_eq!(out.report.balances["V0"], 0);
}

#[test]
fn outputs_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SimConfig::small(1);
    cfg.epochs = 2;
    let out = run_sim(&cfg);
    out.write_to(dir.path()).unwrap();
    for f in ["events.log", "ledger.csv", "verdicts.csv", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let log = std::fs::read_to_string(dir.path().join("events.log")).unwrap();
    assert_eq!(log.lines().count(), out.events.len());
    assert!(std::fs::read_to_string(dir.path().join("verdicts.csv")).unwrap().starts_with("epoch,chunk,provider"));
}

#[test]
fn small_prepay_suspends_in_sim() {
    let mut cfg = SimConfig::small(2);
    cfg.users[0].prepay = 30;
    let out = run_sim(&cfg);
    // 12 units per epoch: epochs 1 and 2 paid, epoch 3 suspends with 6 left.
    assert_eq!(out.report.suspended.get("U0"), Some(&3));
    assert!(out.report.conservation_held);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conservation_holds_for_random_configs(
        seed in any::<u64>(),
        prepay in 3u64..200,
        reward in 0u64..50,
        cheat in proptest::option::of((0usize..4, prop_oneof![Just(CheatKind::SourceOnly), Just(CheatKind::Nothing)], 1u64..4)),
        accuser in any::<bool>(),
    ) {
        let mut cfg = SimConfig::small(seed);
        cfg.difficulty_l = 4;
        cfg.q = 8;
        cfg.epochs = 4;
        cfg.verifier_reward = reward;
        cfg.users[0].prepay = prepay;
        cfg.users[0].uploads[0].bytes = 2048;
        if let Some((p, kind, from)) = cheat {
            cfg.cheater_profiles = vec![CheaterProfile { provider: p, kind, from_epoch: from }];
        }
        if accuser {
            cfg.false_accusers = vec![1];
        }
        let out = run_sim(&cfg);
        prop_assert!(out.report.conservation_held);
        let paid: u64 = out.report.balances.values().sum();
        prop_assert!(paid <= prepay);
    }

    #[test]
    fn ledger_transfers_conserve(ops in proptest::collection::vec((any::<bool>(), 0u64..40, 0usize..3), 0..60), prepay in 0u64..500) {
        let mut l = Ledger::default();
        l.insert_record(StorageContractRecord::new("u".into(), 1, "n".into(), vec![], prepay, 0), 0);
        for (t, (provider, amount, who)) in ops.into_iter().enumerate() {
            let to = format!("a{who}");
            if provider {
                l.pay_provider("u", &to, amount, t as u64);
            } else {
                l.reward_verifier("u", &to, amount, t as u64);
            }
            prop_assert!(l.conserved());
        }
        prop_assert_eq!(l.total_user_debits, l.total_provider_credits + l.total_verifier_rewards);
    }
}
