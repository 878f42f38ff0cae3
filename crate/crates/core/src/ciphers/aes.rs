//! AES S-Box and a single FIPS-197 round.
//!
//! The round sub-steps are exposed individually so leakage can be tapped
//! after any of them. Key expansion is not modelled; round keys are
//! supplied by the caller.

use crate::{Error, Result};

const fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        let hi = a & 0x80;
        a <<= 1;
        if hi != 0 {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

/// Multiplicative inverse in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1, with 0 ↦ 0.
const fn gf_inv(a: u8) -> u8 {
    // a^254 = a^-1
    let mut result = 1u8;
    let mut base = a;
    let mut e = 254u8;
    while e != 0 {
        if e & 1 != 0 {
            result = gf_mul(result, base);
        }
        base = gf_mul(base, base);
        e >>= 1;
    }
    if a == 0 {
        0
    } else {
        result
    }
}

const fn build_sbox() -> [u8; 256] {
    let mut table = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        let b = gf_inv(i as u8);
        table[i] = b
            ^ b.rotate_left(1)
            ^ b.rotate_left(2)
            ^ b.rotate_left(3)
            ^ b.rotate_left(4)
            ^ 0x63;
        i += 1;
    }
    table
}

const fn invert(table: &[u8; 256]) -> [u8; 256] {
    let mut inv = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        inv[table[i] as usize] = i as u8;
        i += 1;
    }
    inv
}

static SBOX: [u8; 256] = build_sbox();
static INV_SBOX: [u8; 256] = invert(&SBOX);

#[inline]
pub fn sbox(b: u8) -> u8 {
    SBOX[b as usize]
}

#[inline]
pub fn inv_sbox(b: u8) -> u8 {
    INV_SBOX[b as usize]
}

/// The attacked S-Box engine: sixteen parallel lookups of `input ^ key`.
pub fn sbox_engine(input: &[u8; 16], key: &[u8; 16]) -> [u8; 16] {
    std::array::from_fn(|i| sbox(input[i] ^ key[i]))
}

/// 4×4 byte state in column-major order: byte `row + 4·col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AesState(pub [u8; 16]);

impl AesState {
    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[row + 4 * col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.0[row + 4 * col] = v;
    }

    pub fn column(&self, col: usize) -> [u8; 4] {
        std::array::from_fn(|row| self.get(row, col))
    }

    pub fn bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

/// An AES key of 128, 192 or 256 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AesKeySpec {
    key_bytes: Vec<u8>,
}

impl AesKeySpec {
    pub fn new(key_bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let key_bytes = key_bytes.into();
        match key_bytes.len() {
            16 | 24 | 32 => Ok(Self { key_bytes }),
            n => Err(Error::domain(format!("AES key must be 16, 24 or 32 bytes, got {n}"))),
        }
    }

    pub fn length_bits(&self) -> u32 {
        8 * self.key_bytes.len() as u32
    }

    pub fn key_bytes(&self) -> &[u8] {
        &self.key_bytes
    }

    pub fn num_rounds(&self) -> u32 {
        6 + self.length_bits() / 32
    }
}

/// Round count for a key length: six plus the key length in 32-bit words.
pub fn num_rounds(key_length_bits: u32) -> Result<u32> {
    match key_length_bits {
        128 | 192 | 256 => Ok(6 + key_length_bits / 32),
        n => Err(Error::domain(format!("unsupported AES key length {n} bits"))),
    }
}

pub fn sub_bytes(s: &AesState) -> AesState {
    AesState(s.0.map(sbox))
}

/// Row `r` rotates left by `r` positions.
pub fn shift_rows(s: &AesState) -> AesState {
    let mut out = AesState::default();
    for row in 0..4 {
        for col in 0..4 {
            out.set(row, col, s.get(row, (col + row) % 4));
        }
    }
    out
}

fn mix_column(c: [u8; 4], m: [u8; 4]) -> [u8; 4] {
    std::array::from_fn(|row| {
        (0..4).fold(0u8, |acc, k| acc ^ gf_mul(m[(k + 4 - row) % 4], c[k]))
    })
}

fn map_columns(s: &AesState, m: [u8; 4]) -> AesState {
    let mut out = AesState::default();
    for col in 0..4 {
        for (row, v) in mix_column(s.column(col), m).into_iter().enumerate() {
            out.set(row, col, v);
        }
    }
    out
}

pub fn mix_columns(s: &AesState) -> AesState {
    map_columns(s, [0x02, 0x03, 0x01, 0x01])
}

pub fn inv_mix_columns(s: &AesState) -> AesState {
    map_columns(s, [0x0e, 0x0b, 0x0d, 0x09])
}

pub fn add_round_key(s: &AesState, round_key: &[u8; 16]) -> AesState {
    AesState(std::array::from_fn(|i| s.0[i] ^ round_key[i]))
}

/// SubBytes → ShiftRows → MixColumns → AddRoundKey.
pub fn aes_round(s: &AesState, round_key: &[u8; 16]) -> AesState {
    add_round_key(&mix_columns(&shift_rows(&sub_bytes(s))), round_key)
}
