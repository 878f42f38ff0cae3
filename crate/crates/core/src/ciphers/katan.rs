//! KATAN32: a 32-bit block split across 13- and 19-bit shift registers,
//! an 80-bit key and 254 rounds of AND/XOR feedback.
//!
//! Bit conventions: plaintext bit `i` is `(pt >> i) & 1`; `L2[i] = p[i]`
//! for `i < 19` and `L1[i] = p[19 + i]` for `i < 13`. Key bit `i` is
//! `(key >> i) & 1`.

use crate::{Error, Result};

pub const KATAN32_ROUNDS: u16 = 254;

const L1_BITS: u32 = 13;
const L2_BITS: u32 = 19;
const L1_MASK: u16 = (1 << L1_BITS) - 1;
const L2_MASK: u32 = (1 << L2_BITS) - 1;

// Feedback taps.
const X1: u32 = 12;
const X2: u32 = 7;
const X3: u32 = 8;
const X4: u32 = 5;
const X5: u32 = 3;
const Y1: u32 = 18;
const Y2: u32 = 7;
const Y3: u32 = 12;
const Y4: u32 = 10;
const Y5: u32 = 8;
const Y6: u32 = 3;

/// Irregular-update sequence: output of the 8-bit LFSR
/// `s[t+8] = s[t] ^ s[t+1] ^ s[t+3] ^ s[t+5]` seeded with `1111_1110`.
const fn build_ir() -> [u8; KATAN32_ROUNDS as usize] {
    let mut s = [0u8; KATAN32_ROUNDS as usize];
    let seed = [1, 1, 1, 1, 1, 1, 1, 0];
    let mut t = 0;
    while t < 8 {
        s[t] = seed[t];
        t += 1;
    }
    while t < KATAN32_ROUNDS as usize {
        s[t] = s[t - 8] ^ s[t - 7] ^ s[t - 5] ^ s[t - 3];
        t += 1;
    }
    s
}

static IR: [u8; KATAN32_ROUNDS as usize] = build_ir();

/// Irregular-update bit for a round.
pub fn irregular_bit(round: u16) -> u8 {
    IR[round as usize]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KatanKey(u128);

impl KatanKey {
    pub fn new(bits: u128) -> Result<Self> {
        if bits >> 80 != 0 {
            return Err(Error::domain("KATAN key exceeds 80 bits"));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> u128 {
        self.0
    }
}

/// 80-bit LFSR key schedule yielding `(k_a, k_b)` per round.
///
/// `k[i] = K[i]` for `i < 80`, then `k[i] = k[i-80] ^ k[i-61] ^ k[i-50] ^ k[i-13]`.
#[derive(Debug, Clone)]
pub struct KatanKeySchedule {
    state: u128,
    emitted: u16,
}

impl KatanKeySchedule {
    pub fn new(key: &KatanKey) -> Self {
        Self {
            state: key.0,
            emitted: 0,
        }
    }

    fn next_bit(&mut self) -> u8 {
        let s = self.state;
        let out = (s & 1) as u8;
        let fb = (s ^ (s >> 19) ^ (s >> 30) ^ (s >> 67)) & 1;
        self.state = (s >> 1) | (fb << 79);
        out
    }
}

impl Iterator for KatanKeySchedule {
    type Item = (u8, u8);

    fn next(&mut self) -> Option<Self::Item> {
        if self.emitted == KATAN32_ROUNDS {
            return None;
        }
        self.emitted += 1;
        let ka = self.next_bit();
        let kb = self.next_bit();
        Some((ka, kb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KatanState {
    l1: u16,
    l2: u32,
    round_index: u16,
}

impl KatanState {
    pub fn load(plaintext: u32) -> Self {
        Self {
            l1: (plaintext >> L2_BITS) as u16 & L1_MASK,
            l2: plaintext & L2_MASK,
            round_index: 0,
        }
    }

    pub fn unload(&self) -> u32 {
        ((self.l1 as u32) << L2_BITS) | self.l2
    }

    pub fn l1(&self) -> u16 {
        self.l1
    }

    pub fn l2(&self) -> u32 {
        self.l2
    }

    /// Rounds applied so far, `0..=254`.
    pub fn round_index(&self) -> u16 {
        self.round_index
    }
}

#[inline]
fn bit16(v: u16, i: u32) -> u8 {
    ((v >> i) & 1) as u8
}

#[inline]
fn bit32(v: u32, i: u32) -> u8 {
    ((v >> i) & 1) as u8
}

/// One round step with subkey bits `k_a` and `k_b`.
pub fn katan_round(s: KatanState, k_a: u8, k_b: u8) -> Result<KatanState> {
    if s.round_index >= KATAN32_ROUNDS {
        return Err(Error::StateExhausted);
    }
    let ir = irregular_bit(s.round_index);
    let (l1, l2) = (s.l1, s.l2);
    let fa = bit16(l1, X1)
        ^ bit16(l1, X2)
        ^ (bit16(l1, X3) & bit16(l1, X4))
        ^ (bit16(l1, X5) & ir)
        ^ (k_a & 1);
    let fb = bit32(l2, Y1)
        ^ bit32(l2, Y2)
        ^ (bit32(l2, Y3) & bit32(l2, Y4))
        ^ (bit32(l2, Y5) & bit32(l2, Y6))
        ^ (k_b & 1);
    Ok(KatanState {
        l1: ((l1 << 1) | fb as u16) & L1_MASK,
        l2: ((l2 << 1) | fa as u32) & L2_MASK,
        round_index: s.round_index + 1,
    })
}

pub fn katan32_encrypt(plaintext: u32, key: &KatanKey) -> u32 {
    let mut s = KatanState::load(plaintext);
    for (ka, kb) in KatanKeySchedule::new(key) {
        s = katan_round(s, ka, kb).expect("schedule yields exactly 254 rounds");
    }
    s.unload()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ir_prefix() {
        let prefix: Vec<u8> = IR[..16].to_vec();
        assert_eq!(prefix, [1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn load_unload_round_trip() {
        for pt in [0u32, 1, 0x8000_0000, 0xdead_beef, u32::MAX] {
            let s = KatanState::load(pt);
            assert_eq!(s.unload(), pt);
            assert_eq!(s.round_index(), 0);
        }
    }

    #[test]
    fn round_preserves_widths_and_counts() {
        let mut s = KatanState::load(u32::MAX);
        for _ in 0..10 {
            s = katan_round(s, 1, 1).unwrap();
            assert!(s.l1() <= L1_MASK);
            assert!(s.l2() <= L2_MASK);
        }
        assert_eq!(s.round_index(), 10);
    }

    #[test]
    fn exhausted_state() {
        let key = KatanKey::new(0).unwrap();
        let mut s = KatanState::load(0);
        for (ka, kb) in KatanKeySchedule::new(&key) {
            s = katan_round(s, ka, kb).unwrap();
        }
        assert_eq!(s.round_index(), KATAN32_ROUNDS);
        assert!(matches!(katan_round(s, 0, 0), Err(Error::StateExhausted)));
    }

    #[test]
    fn schedule_length() {
        let key = KatanKey::new((1 << 80) - 1).unwrap();
        assert_eq!(KatanKeySchedule::new(&key).count(), 254);
        assert!(KatanKey::new(1 << 80).is_err());
    }
}
