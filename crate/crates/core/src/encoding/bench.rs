use std::io::{self, Write};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::codec::{decode, encode, FeedEntry};
use super::params::{BindingMode, EncodingParams};
use super::EncodingError;
use crate::hash::{HashMeter, H256};

/// Expected hashes to seal `symbols` symbols at difficulty `L`: `symbols · 2^L`.
pub fn encode_cost_model(difficulty: u8, symbols: u64) -> u128 {
    (symbols as u128) << difficulty
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub difficulty: u8,
    pub source_bytes: usize,
    pub symbols: u64,
    pub encode_seconds: f64,
    pub decode_seconds: f64,
    pub encode_hashes: u64,
    pub decode_hashes: u64,
    pub model_hashes: u128,
    /// `encode_hashes / decode_hashes`.
    pub hash_ratio: f64,
}

pub const CSV_HEADER: &str =
    "difficulty,source_bytes,symbols,encode_seconds,decode_seconds,encode_hashes,decode_hashes,model_hashes,hash_ratio";

impl BenchRow {
    pub fn encode_hashes_per_byte(&self) -> f64 {
        self.encode_hashes as f64 / self.source_bytes as f64
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{},{},{},{:.4}",
            self.difficulty,
            self.source_bytes,
            self.symbols,
            self.encode_seconds,
            self.decode_seconds,
            self.encode_hashes,
            self.decode_hashes,
            self.model_hashes,
            self.hash_ratio
        )
    }
}

/// Encode and decode one seeded random source per difficulty, timing both
/// and counting hashes exactly.
pub fn bench_asymmetry(difficulties: &[u8], source_size: usize, seed: u64) -> Result<Vec<BenchRow>, EncodingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source = vec![0u8; source_size];
    rng.fill_bytes(&mut source);
    let feed = [FeedEntry::new(H256::ZERO, 0)];
    difficulties
        .iter()
        .map(|&l| {
            let params = EncodingParams::new(l, b"bench".to_vec(), BindingMode::StaticBlock);
            let enc_meter = HashMeter::new();
            let t0 = Instant::now();
            let (replica, stats) = encode(&source, &params, &feed, &enc_meter)?;
            let encode_seconds = t0.elapsed().as_secs_f64();
            let dec_meter = HashMeter::new();
            let t1 = Instant::now();
            let decoded = decode(&replica, &dec_meter)?;
            let decode_seconds = t1.elapsed().as_secs_f64();
            debug_assert_eq!(decoded, source);
            Ok(BenchRow {
                difficulty: l,
                source_bytes: source_size,
                symbols: stats.symbols,
                encode_seconds,
                decode_seconds,
                encode_hashes: enc_meter.count(),
                decode_hashes: dec_meter.count(),
                model_hashes: encode_cost_model(l, stats.symbols),
                hash_ratio: enc_meter.count() as f64 / dec_meter.count() as f64,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}
