//! Splitting a byte stream into `L`-bit symbols (most significant bit first)
//! and joining them back.

/// Number of `L`-bit symbols needed for `byte_len` bytes.
pub fn symbol_count(byte_len: usize, difficulty: u8) -> u64 {
    (byte_len as u64 * 8).div_ceil(difficulty as u64)
}

/// Zero bits appended so that the stream fills whole symbols.
pub fn pad_bits(byte_len: usize, difficulty: u8) -> u8 {
    let bits = byte_len as u64 * 8;
    let l = difficulty as u64;
    ((l - bits % l) % l) as u8
}

pub fn to_symbols(bytes: &[u8], difficulty: u8) -> Vec<u16> {
    let l = difficulty as u32;
    let mut out = Vec::with_capacity(symbol_count(bytes.len(), difficulty) as usize);
    let mut acc: u32 = 0;
    let mut have: u32 = 0;
    for &b in bytes {
        acc = (acc << 8) | b as u32;
        have += 8;
        while have >= l {
            have -= l;
            out.push(((acc >> have) & ((1 << l) - 1)) as u16);
        }
        acc &= (1 << have) - 1;
    }
    if have > 0 {
        out.push(((acc << (l - have)) & ((1 << l) - 1)) as u16);
    }
    out
}

/// Inverse of [`to_symbols`]. Returns `None` when the symbol stream minus
/// `pad_bits` does not end on a byte boundary.
pub fn from_symbols(symbols: &[u16], difficulty: u8, pad_bits: u8) -> Option<Vec<u8>> {
    let l = difficulty as u64;
    let total_bits = (symbols.len() as u64 * l).checked_sub(pad_bits as u64)?;
    if total_bits % 8 != 0 {
        return None;
    }
    let mut out = Vec::with_capacity((total_bits / 8) as usize);
    let mut acc: u32 = 0;
    let mut have: u32 = 0;
    for &s in symbols {
        acc = (acc << l) | s as u32;
        have += l as u32;
        while have >= 8 {
            have -= 8;
            out.push((acc >> have) as u8);
        }
        acc &= (1 << have) - 1;
    }
    out.truncate((total_bits / 8) as usize);
    Some(out)
}

/// Symbols at the given positions, without materializing the whole stream.
pub fn symbols_at(bytes: &[u8], difficulty: u8, indices: &[u64]) -> Vec<u16> {
    let l = difficulty as u64;
    indices
        .iter()
        .map(|&i| {
            let mut v: u16 = 0;
            for bit in i * l..(i + 1) * l {
                let byte = bytes.get((bit / 8) as usize).copied().unwrap_or(0);
                v = (v << 1) | ((byte >> (7 - bit % 8)) & 1) as u16;
            }
            v
        })
        .collect()
}
