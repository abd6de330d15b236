use std::sync::atomic::AtomicBool;

use proptest::prelude::*;
use sha2::{Digest, Sha256};
use upw_core::pow::mining::header_template;
use upw_core::pow::{
    mine_block, mine_body, AcceptResult, Block, Body, ChainStore, DifficultyParams, MineError, MiningJob, Never,
    RejectReason, Target,
};
use upw_core::{HashMeter, H256};

fn easy_store() -> ChainStore {
    ChainStore::new(DifficultyParams::default(), Body::new(b"genesis".to_vec(), vec![]), 0)
}

fn child(store: &ChainStore, parent: H256, tag: &str, ts: u64) -> Block {
    let body = Body::new(tag.as_bytes().to_vec(), vec![tag.as_bytes().to_vec()]);
    mine_body(store, parent, body, ts, u64::MAX, &HashMeter::new()).unwrap().0
}

#[test]
fn accept_everything_target_takes_nonce_zero() {
    let store = easy_store();
    let meter = HashMeter::new();
    let job = MiningJob::new(store.genesis_hash(), &Body::new(b"m".to_vec(), vec![]), 600, 10);
    let mined = mine_block(&store, &job, &Never, &meter).unwrap();
    assert_eq!(mined.header.nonce, 0);
    assert_eq!(mined.hashes, 1);
    assert_eq!(meter.count(), 1);
    assert_eq!(mined.header.prev_hash, store.genesis_hash());
}

#[test]
fn interrupt_before_first_poll() {
    let store = easy_store();
    let flag = AtomicBool::new(true);
    let meter = HashMeter::new();
    let job = MiningJob::new(store.genesis_hash(), &Body::new(b"m".to_vec(), vec![]), 600, 10);
    assert_eq!(mine_block(&store, &job, &flag, &meter), Err(MineError::Interrupted { hashes: 0 }));
    assert_eq!(meter.count(), 0);
    assert_eq!(store.len(), 1);
}

#[test]
fn interrupt_closure_stops_at_next_poll() {
    let params = DifficultyParams { initial_target: Target::pow2(200), ..DifficultyParams::default() };
    let store = ChainStore::new(params, Body::new(b"g".to_vec(), vec![]), 0);
    let meter = HashMeter::new();
    let job = MiningJob::new(store.genesis_hash(), &Body::new(b"m".to_vec(), vec![]), 600, 1_000_000);
    let stop = || meter.count() >= 5;
    assert_eq!(mine_block(&store, &job, &stop, &meter), Err(MineError::Interrupted { hashes: 5 }));
}

#[test]
fn unknown_parent_and_zero_budget() {
    let store = easy_store();
    let body = Body::new(b"m".to_vec(), vec![]);
    let job = MiningJob::new(H256([7; 32]), &body, 1, 10);
    assert_eq!(mine_block(&store, &job, &Never, &HashMeter::new()), Err(MineError::UnknownParent(H256([7; 32]))));
    let job = MiningJob::new(store.genesis_hash(), &body, 1, 0);
    assert_eq!(mine_block(&store, &job, &Never, &HashMeter::new()), Err(MineError::ZeroBudget));
}

#[test]
fn budget_exhausted_reports_exact_count() {
    let params = DifficultyParams { initial_target: Target::pow2(100), ..DifficultyParams::default() };
    let store = ChainStore::new(params, Body::new(b"g".to_vec(), vec![]), 0);
    let meter = HashMeter::new();
    let job = MiningJob::new(store.genesis_hash(), &Body::new(b"m".to_vec(), vec![]), 600, 37);
    assert_eq!(mine_block(&store, &job, &Never, &meter), Err(MineError::BudgetExhausted { hashes: 37 }));
    assert_eq!(meter.count(), 37);
}

/// Reference trial count: hash the serialized header directly, nonce by
/// nonce, with no midstate reuse.
fn reference_trials(template_bytes: &[u8; 88], target: &Target) -> u64 {
    let mut buf = *template_bytes;
    for nonce in 0u64.. {
        buf[80..].copy_from_slice(&nonce.to_le_bytes());
        let h = H256(Sha256::digest(buf).into());
        if target.is_met_by(&h) {
            return nonce + 1;
        }
    }
    unreachable!()
}

#[test]
fn mean_hashes_at_2_pow_248_matches_geometric_law() {
    let target = Target::pow2(248);
    let params = DifficultyParams { initial_target: target, ..DifficultyParams::default() };
    let store = ChainStore::new(params, Body::new(b"g".to_vec(), vec![]), 0);
    let trials = 1000u64;
    let mut total = 0u64;
    let mut oracle_total = 0u64;
    for t in 0..trials {
        let body = Body::new(format!("trial-{t}").into_bytes(), vec![]);
        let job = MiningJob::new(store.genesis_hash(), &body, 600, u64::MAX);
        let mined = mine_block(&store, &job, &Never, &HashMeter::new()).unwrap();
        assert!(mined.hash < H256(target.0));
        let template = header_template(&store, &job).unwrap();
        let oracle = reference_trials(&template.to_bytes(), &target);
        assert_eq!(mined.hashes, oracle, "trial {t}");
        total += mined.hashes;
        oracle_total += oracle;
    }
    assert_eq!(total, oracle_total);
    let mean = total as f64 / trials as f64;
    assert!((0.85 * 256.0..=1.18 * 256.0).contains(&mean), "mean {mean}");
}

#[test]
fn first_seen_wins_equal_height() {
    let mut store = easy_store();
    let g = store.genesis_hash();
    let b1 = child(&store, g, "b1", 600);
    let b2 = child(&store, g, "b2", 600);
    let (h1, h2) = (b1.hash(), b2.hash());
    assert_eq!(store.accept_block(b1), AcceptResult::ExtendedCanonical);
    assert_eq!(store.accept_block(b2), AcceptResult::NewFork);
    assert_eq!(store.canonical_tip(), h1);
    assert_eq!(store.tips(), &[h1, h2]);
}

#[test]
fn longer_fork_reorgs_depth_one() {
    let mut store = easy_store();
    let g = store.genesis_hash();
    let a1 = child(&store, g, "a1", 600);
    let b1 = child(&store, g, "b1", 600);
    let b1h = b1.hash();
    store.accept_block(a1);
    store.accept_block(b1);
    let b2 = child(&store, b1h, "b2", 1200);
    let b2h = b2.hash();
    assert_eq!(store.accept_block(b2), AcceptResult::Reorg { depth: 1, fork_height: 0 });
    assert_eq!(store.canonical_tip(), b2h);
    assert_eq!(store.canonical_chain(), &[g, b1h, b2h]);
    assert!(!store.is_canonical(&store.tips()[0]));
}

#[test]
fn rejections_leave_store_unchanged() {
    let params = DifficultyParams { initial_target: Target::pow2(252), ..DifficultyParams::default() };
    let mut store = ChainStore::new(params, Body::new(b"g".to_vec(), vec![]), 0);
    let g = store.genesis_hash();
    let good = child(&store, g, "x", 600);

    let mut bad_pow = good.clone();
    bad_pow.header.nonce = (0..).find(|n| {
        let mut h = bad_pow.header;
        h.nonce = *n;
        !h.meets_target()
    }).unwrap();
    assert_eq!(store.accept_block(bad_pow), AcceptResult::Rejected(RejectReason::BadPoW));

    let mut orphan = good.clone();
    orphan.header.prev_hash = H256([9; 32]);
    assert_eq!(store.accept_block(orphan), AcceptResult::Rejected(RejectReason::UnknownParent));

    let mut wrong_bits = good.clone();
    wrong_bits.header.bits = Target::MAX.to_compact();
    assert!(matches!(store.accept_block(wrong_bits), AcceptResult::Rejected(RejectReason::BadTarget { .. })));

    let mut wrong_body = good.clone();
    wrong_body.body.records.push(b"extra".to_vec());
    assert_eq!(store.accept_block(wrong_body), AcceptResult::Rejected(RejectReason::BodyMismatch));

    assert_eq!(store.len(), 1);
    assert_eq!(store.tips(), &[g]);
    assert_eq!(store.accept_block(good.clone()), AcceptResult::ExtendedCanonical);
    assert_eq!(store.accept_block(good), AcceptResult::Rejected(RejectReason::DuplicateBlock));
    assert_eq!(store.len(), 2);
}

#[test]
fn retarget_applies_at_interval_boundary() {
    let params = DifficultyParams { retarget_interval: 4, target_spacing: 10, initial_target: Target::pow2(255) };
    let mut store = ChainStore::new(params, Body::new(b"g".to_vec(), vec![]), 0);
    // Blocks every 5 s: twice as fast as intended.
    for h in 1..=3u64 {
        let tip = store.canonical_tip();
        let b = child(&store, tip, &format!("{h}"), h * 5);
        assert_eq!(store.accept_block(b), AcceptResult::ExtendedCanonical);
        assert_eq!(store.next_target(&store.canonical_tip()).unwrap() == Target::pow2(255), h < 3);
    }
    // Span over the 4-header window is 15 s against 40 expected.
    let got = store.next_target(&store.canonical_tip()).unwrap().to_biguint();
    let want = (num_bigint::BigUint::from(1u8) << 255u32) * 15u32 / 40u32;
    let ratio = &got * 1000u32 / &want;
    assert!(ratio >= 999u32.into() && ratio <= 1000u32.into(), "{got} vs {want}");
}

#[test]
fn ancestry_reaches_genesis() {
    let mut store = easy_store();
    for h in 1..=20u64 {
        let tip = store.canonical_tip();
        let b = child(&store, tip, &format!("{h}"), h * 600);
        store.accept_block(b);
    }
    let anc = store.ancestry(&store.canonical_tip());
    assert_eq!(anc.len(), 21);
    assert_eq!(*anc.last().unwrap(), store.genesis_hash());
    let mut seen = std::collections::HashSet::new();
    assert!(anc.iter().all(|h| seen.insert(*h)));
    assert_eq!(store.path_from_genesis(&store.canonical_tip()), store.canonical_chain());
}

#[test]
fn persist_and_load_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = easy_store();
    let g = store.genesis_hash();
    let a = child(&store, g, "a", 600);
    let ah = a.hash();
    store.accept_block(a);
    store.persist(dir.path()).unwrap();
    let b = child(&store, ah, "b", 1200);
    let fork = child(&store, g, "fork", 601);
    store.accept_block(b);
    store.accept_block(fork);
    store.persist(dir.path()).unwrap();

    let loaded = ChainStore::load(dir.path()).unwrap();
    assert_eq!(loaded.canonical_chain(), store.canonical_chain());
    assert_eq!(loaded.tips(), store.tips());
    assert_eq!(loaded.len(), 4);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["canonical_height"], 2);
    assert_eq!(manifest["hash_alg"], "sha256");
}

#[test]
fn load_rejects_truncated_block_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = easy_store();
    let b = child(&store, store.genesis_hash(), "a", 600);
    store.accept_block(b);
    store.persist(dir.path()).unwrap();
    let path = dir.path().join("blocks.dat");
    let data = std::fs::read(&path).unwrap();
    std::fs::write(&path, &data[..data.len() - 3]).unwrap();
    assert!(ChainStore::load(dir.path()).is_err());
}

/// A block tree with distinct heights at every tip, so no tie arises.
fn build_tree(shape: &[usize]) -> (ChainStore, Vec<Block>) {
    let mut store = easy_store();
    let mut all = vec![store.genesis_hash()];
    let mut blocks = vec![];
    for (i, &p) in shape.iter().enumerate() {
        let parent = all[p % all.len()];
        let ts = 600 * (store.height_of(&parent).unwrap() + 1);
        let b = child(&store, parent, &format!("n{i}"), ts);
        all.push(b.hash());
        store.accept_block(b.clone());
        blocks.push(b);
    }
    (store, blocks)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tip_independent_of_arrival_order(
        shape in proptest::collection::vec(0usize..100, 1..12),
        seed in any::<u64>(),
    ) {
        let (reference, blocks) = build_tree(&shape);
        let max_height = reference.tips().iter().map(|t| reference.height_of(t).unwrap()).max().unwrap();
        let top: Vec<_> = reference.tips().iter().filter(|t| reference.height_of(t) == Some(max_height)).collect();
        prop_assume!(top.len() == 1);

        // Random topological order: repeatedly pick any block whose parent is present.
        let mut rng = seed;
        let mut pending = blocks.clone();
        let mut store = easy_store();
        while !pending.is_empty() {
            let ready: Vec<usize> =
                (0..pending.len()).filter(|&i| store.contains(&pending[i].header.prev_hash)).collect();
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let pick = ready[(rng >> 33) as usize % ready.len()];
            let b = pending.swap_remove(pick);
            prop_assert!(store.accept_block(b).is_accepted());
        }
        prop_assert_eq!(store.canonical_tip(), reference.canonical_tip());
        prop_assert_eq!(store.canonical_chain(), reference.canonical_chain());
    }
}
