//! Functional models of the attacked circuits.

pub mod aes;
pub mod katan;

pub use aes::{
    add_round_key, aes_round, inv_mix_columns, inv_sbox, mix_columns, num_rounds, sbox,
    sbox_engine, shift_rows, sub_bytes, AesKeySpec, AesState,
};
pub use katan::{katan32_encrypt, katan_round, KatanKey, KatanKeySchedule, KatanState, KATAN32_ROUNDS};
