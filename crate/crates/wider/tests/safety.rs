use std::collections::{BTreeMap, HashMap, HashSet};

use proptest::prelude::*;
use rand::rngs::mock::StepRng;
use upw_core::H256;
use upw_wider::bench::{miner_wallet, TraceDriver};
use upw_wider::*;

#[derive(Debug, Default)]
struct Audit {
    double_spends: u64,
    double_claims: u64,
    bad_claims: u64,
    balances: BTreeMap<AccountId, i128>,
}

/// Replays canonical `body1` records against the raw subchains with plain
/// integer bookkeeping, never touching the global state.
fn audit(chain: &WiderChain, alloc: &BTreeMap<AccountId, u64>) -> Audit {
    let mut a = Audit { balances: alloc.iter().map(|(k, v)| (*k, *v as i128)).collect(), ..Default::default() };
    let mut confirmed: HashMap<AccountId, u64> = HashMap::new();
    let mut confirmed_at: HashMap<H256, u64> = HashMap::new();
    let mut claimed: HashSet<H256> = HashSet::new();
    for (i, b) in chain.canonical_blocks().into_iter().enumerate() {
        let height = i as u64 + 1;
        let mut tips = 0i128;
        for r in &b.body1 {
            let from = confirmed.get(&r.account).copied().unwrap_or(0);
            for seq in from + 1..=r.seq {
                let tx = chain.subchains().get(&r.account, seq).unwrap();
                let bal = a.balances.entry(tx.sender).or_default();
                match tx.kind {
                    TxKind::Transfer { amount, .. } => *bal -= amount as i128,
                    TxKind::Claim { ref_tx, ref_main_height } => {
                        if !claimed.insert(ref_tx) {
                            a.double_claims += 1;
                        }
                        let src = chain.subchains().find(&ref_tx);
                        let ok = match (src, confirmed_at.get(&ref_tx)) {
                            (Some(s), Some(&at)) => {
                                matches!(s.kind, TxKind::Transfer { to, .. } if to == tx.sender)
                                    && at <= ref_main_height
                                    && ref_main_height < height
                            }
                            _ => false,
                        };
                        if !ok {
                            a.bad_claims += 1;
                        }
                        if let Some(TxKind::Transfer { amount, .. }) = src.map(|s| s.kind.clone()) {
                            *bal += amount as i128;
                        }
                    }
                }
                *bal -= tx.fee_tip as i128;
                tips += tx.fee_tip as i128;
                if *bal < 0 {
                    a.double_spends += 1;
                }
                confirmed_at.insert(tx.hash(), height);
            }
            confirmed.insert(r.account, r.seq);
        }
        *a.balances.entry(b.miner).or_default() += tips;
    }
    a
}

fn trace(blocks: u64, width: usize, txs: usize, reorg_every: u64, seed: u64) -> (WiderChain, TraceDriver) {
    let mut d = TraceDriver::new(width, seed);
    let mut chain = WiderChain::new(&d.genesis(), ChainConfig::default());
    let mut ts = 0;
    while chain.height() < blocks {
        for i in 0..width {
            for _ in 0..txs {
                d.issue(&mut chain, i);
            }
        }
        ts += 10;
        if reorg_every > 0 && chain.height() > 3 && chain.height() % reorg_every == 0 {
            d.reorg(&mut chain, 3, ts);
        } else {
            d.step_block(&mut chain, ts);
        }
    }
    (chain, d)
}

#[test]
fn randomized_trace_with_reorgs_is_safe() {
    let (chain, d) = trace(200, 12, 2, 50, 77);
    assert!(chain.store().len() > 200 + 1, "forks were created");
    let a = audit(&chain, &d.genesis());
    assert_eq!((a.double_spends, a.double_claims, a.bad_claims), (0, 0, 0));
    for (acct, bal) in &a.balances {
        assert_eq!(*bal, chain.balance(*acct) as i128, "{acct}");
    }
    let replayed = chain.replay_from_genesis().unwrap();
    assert_eq!(replayed.snapshot(), chain.snapshot());
    assert_eq!(replayed.state_head(), chain.state_head());
}

#[test]
fn reorg_switches_state_to_new_branch() {
    let (mut chain, mut d) = trace(10, 6, 2, 0, 5);
    let old_tip = chain.tip();
    let old = chain.snapshot();
    for i in 0..6 {
        d.issue(&mut chain, i);
    }
    d.reorg(&mut chain, 3, 10_000);
    assert_eq!(chain.height(), 11);
    assert!(!chain.store().is_canonical(&old_tip));
    assert_ne!(chain.snapshot(), old);
    let fresh = chain.replay_from_genesis().unwrap();
    assert_eq!(fresh.snapshot(), chain.snapshot());
    let a = audit(&chain, &d.genesis());
    for (acct, bal) in &a.balances {
        assert_eq!(*bal, chain.balance(*acct) as i128);
    }
}

#[test]
fn forged_double_claim_block_is_refused() {
    let ws: Vec<Wallet> = (0..2).map(Wallet::from_seed).collect();
    let alloc = BTreeMap::from([(ws[0].id(), 50)]);
    let mut c = WiderChain::new(&alloc, ChainConfig::default());
    let t = SubTx::new(&ws[0], 1, H256::ZERO, TxKind::Transfer { to: ws[1].id(), amount: 20 }, 0);
    let th = c.submit_tx(t).unwrap();
    let tip = c.tip();
    let b = c.build_main_block(&tip, miner_wallet().id(), 1);
    c.apply_main_block(&b, ApplyMode::ReExecute, &mut StepRng::new(0, 0)).unwrap();
    let c1 = SubTx::new(&ws[1], 1, H256::ZERO, TxKind::Claim { ref_tx: th, ref_main_height: 1 }, 0);
    let c2 = SubTx::new(&ws[1], 2, c1.hash(), TxKind::Claim { ref_tx: th, ref_main_height: 1 }, 0);
    let head = c2.hash();
    c.subchains_mut().append_unchecked(c1);
    c.subchains_mut().append_unchecked(c2);
    let tip = c.tip();
    let honest = c.build_main_block(&tip, miner_wallet().id(), 2);
    assert_eq!(honest.body1[0].seq, 1);
    let forged = MainBlock {
        header: Default::default(),
        miner: miner_wallet().id(),
        body1: vec![ConfirmationRecord { account: ws[1].id(), head, seq: 2 }],
        body2: None,
    };
    let forged = c.seal(forged, &tip, 3);
    let err = c.apply_main_block(&forged, ApplyMode::ReExecute, &mut StepRng::new(0, 0)).unwrap_err();
    assert!(upw_wider::chain::is_tx_error(&err, TxError::DuplicateClaim), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// However long the receiver waits and whichever confirmed height it
    /// cites, the claim yields the transferred amount.
    #[test]
    fn claim_delay_never_changes_amount(amount in 1u64..1000, delay in 0u64..12, cite_back in 0u64..12, noise in 0usize..3) {
        let ws: Vec<Wallet> = (0..4).map(|i| Wallet::from_seed(300 + i)).collect();
        let alloc: BTreeMap<_, _> = ws.iter().map(|w| (w.id(), 1000)).collect();
        let mut c = WiderChain::new(&alloc, ChainConfig::default());
        let mine = |c: &mut WiderChain| {
            let tip = c.tip();
            let b = c.build_main_block(&tip, miner_wallet().id(), c.height() + 1);
            c.apply_main_block(&b, ApplyMode::ReExecute, &mut StepRng::new(0, 0)).unwrap();
        };
        let next = |c: &WiderChain, w: &Wallet, kind| {
            SubTx::new(w, c.subchains().len(&w.id()) + 1, c.subchains().last_hash(&w.id()), kind, 0)
        };
        let t = c.submit_tx(next(&c, &ws[0], TxKind::Transfer { to: ws[1].id(), amount })).unwrap();
        mine(&mut c);
        for k in 0..delay {
            for j in 0..noise {
                let tx = next(&c, &ws[2 + j % 2], TxKind::Transfer { to: ws[1].id(), amount: 1 + k });
                c.submit_tx(tx).unwrap();
            }
            mine(&mut c);
        }
        let cite = c.height().saturating_sub(cite_back).max(1);
        let before = c.balance(ws[1].id());
        c.submit_tx(next(&c, &ws[1], TxKind::Claim { ref_tx: t, ref_main_height: cite })).unwrap();
        mine(&mut c);
        prop_assert_eq!(c.balance(ws[1].id()), before + amount);
    }
}
