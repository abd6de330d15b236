//! A three-account transfer and claim walkthrough.

use std::collections::BTreeMap;

use rand::rngs::mock::StepRng;

use upw_core::H256;

use crate::account::{AccountId, Wallet};
use crate::chain::{ApplyMode, ChainConfig, TxReject, WiderChain};
use crate::tx::{SubTx, TxKind};

pub struct DemoOutput {
    pub lines: Vec<String>,
    pub balances: BTreeMap<&'static str, u64>,
    pub rejections: Vec<(&'static str, TxReject)>,
    pub chain: WiderChain,
}

const NAMES: [&str; 3] = ["A", "B", "C"];

struct Demo {
    wallets: Vec<Wallet>,
    chain: WiderChain,
    miner: AccountId,
    lines: Vec<String>,
    rejections: Vec<(&'static str, TxReject)>,
}

impl Demo {
    fn id(&self, n: usize) -> AccountId {
        self.wallets[n].id()
    }

    fn name(&self, a: &AccountId) -> &'static str {
        NAMES[self.wallets.iter().position(|w| w.id() == *a).expect("demo account")]
    }

    fn submit(&mut self, from: usize, kind: TxKind, what: &str) -> H256 {
        let w = &self.wallets[from];
        let subs = self.chain.subchains();
        let tx = SubTx::new(w, subs.len(&w.id()) + 1, subs.last_hash(&w.id()), kind, 0);
        let h = tx.hash();
        match self.chain.submit_tx(tx) {
            Ok(_) => self.lines.push(format!("submit {what}: accepted {}", &h.to_hex()[..12])),
            Err(e) => {
                self.lines.push(format!("submit {what}: rejected {} ({e})", e.code()));
                self.rejections.push((NAMES[from], e));
            }
        }
        h
    }

    fn mine(&mut self) -> u64 {
        let tip = self.chain.tip();
        let b = self.chain.build_main_block(&tip, self.miner, self.chain.height() + 1);
        self.chain.apply_main_block(&b, ApplyMode::ReExecute, &mut StepRng::new(0, 0)).expect("demo block");
        let recs: Vec<String> = b.body1.iter().map(|r| format!("{}@{}", self.name(&r.account), r.seq)).collect();
        self.lines.push(format!("main block {} confirms [{}]", self.chain.height(), recs.join(", ")));
        self.chain.height()
    }
}

pub fn run_demo() -> DemoOutput {
    let wallets: Vec<Wallet> = (0..3).map(|i| Wallet::from_seed(1000 + i)).collect();
    let alloc = BTreeMap::from([(wallets[0].id(), 100)]);
    let chain = WiderChain::new(&alloc, ChainConfig::default());
    let mut d = Demo { wallets, chain, miner: Wallet::from_seed(999).id(), lines: vec![], rejections: vec![] };
    for n in 0..3 {
        let line = format!("account {} = {}", NAMES[n], d.id(n));
        d.lines.push(line);
    }
    d.lines.push("genesis: A holds 100".into());

    let (b, c) = (d.id(1), d.id(2));
    let t1 = d.submit(0, TxKind::Transfer { to: b, amount: 60 }, "A->B 60");
    d.submit(0, TxKind::Transfer { to: b, amount: 50 }, "A->B 50");
    d.submit(1, TxKind::Claim { ref_tx: t1, ref_main_height: 0 }, "B claims A->B 60 before confirmation");
    let h1 = d.mine();
    d.submit(1, TxKind::Claim { ref_tx: t1, ref_main_height: h1 }, "B claims A->B 60");
    d.mine();
    d.submit(1, TxKind::Claim { ref_tx: t1, ref_main_height: h1 }, "B claims A->B 60 again");
    let t2 = d.submit(1, TxKind::Transfer { to: c, amount: 25 }, "B->C 25");
    let h3 = d.mine();
    d.mine();
    d.submit(2, TxKind::Claim { ref_tx: t2, ref_main_height: h3 }, "C claims B->C 25");
    d.mine();

    let balances: BTreeMap<&'static str, u64> = (0..3).map(|i| (NAMES[i], d.chain.balance(d.id(i)))).collect();
    d.lines.push(format!("balances: A={} B={} C={}", balances["A"], balances["B"], balances["C"]));
    d.lines.push(format!("state head {}", d.chain.state_head()));
    DemoOutput { lines: d.lines, balances, rejections: d.rejections, chain: d.chain }
}
