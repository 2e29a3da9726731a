mod common;

use des::cipher::{Array, BlockCipherEncrypt, KeyInit};
use neurodiff::ciphers::{chaskey, des as ndes, encrypt, present, Block, CipherId, KeyMaterial};
use proptest::prelude::*;

use common::load_vectors;

fn reference_des(key: u64, pt: u64) -> u64 {
    let c = des::Des::new_from_slice(&key.to_be_bytes()).unwrap();
    let mut b = Array::from(pt.to_be_bytes());
    c.encrypt_block(&mut b);
    u64::from_be_bytes(b.into())
}

#[test]
fn full_des_published_vectors() {
    for v in load_vectors("des_full.txt") {
        assert_eq!(v.rounds, 16);
        let out = ndes::full_encrypt(v.key as u64, v.plaintext as u64);
        assert_eq!(out as u128, v.ciphertext, "key {:016x}", v.key);
    }
}

#[test]
fn full_des_matches_independent_implementation() {
    let mut rng = neurodiff::rng::StreamRng::new(5, neurodiff::rng::Domain::Audit, 0);
    for _ in 0..2000 {
        let (k, p) = (rng.next_u64(), rng.next_u64());
        assert_eq!(ndes::full_encrypt(k, p), reference_des(k, p));
    }
}

#[test]
fn reduced_vectors_all_ciphers() {
    for (file, cipher) in [
        ("des_rounds.txt", CipherId::Des),
        ("present.txt", CipherId::Present),
        ("chaskey.txt", CipherId::Chaskey),
    ] {
        for v in load_vectors(file) {
            let key = KeyMaterial::new(v.key, cipher.key_bits()).unwrap();
            let p = Block::new(v.plaintext, cipher.block_bits()).unwrap();
            let c = encrypt(cipher, &key, p, v.rounds).unwrap();
            assert_eq!(c.value(), v.ciphertext, "{file}: rounds {}", v.rounds);
        }
    }
}

#[test]
fn des_complementation() {
    let mut rng = neurodiff::rng::StreamRng::new(6, neurodiff::rng::Domain::Audit, 0);
    for _ in 0..10_000 {
        let (k, p) = (rng.next_u64(), rng.next_u64());
        let r = 1 + rng.below(16) as u32;
        assert_eq!(
            ndes::encrypt(!k, !p, r).unwrap(),
            !ndes::encrypt(k, p, r).unwrap()
        );
    }
}

#[test]
fn present_zero_rounds_is_first_whitening() {
    let ks = present::KeySchedule::new(0xdead_beef_0000_1111_2222);
    assert_eq!(
        present::encrypt(0xdead_beef_0000_1111_2222, 7, 0).unwrap(),
        7 ^ ks.round_key(1)
    );
}

proptest! {
    #[test]
    fn des_round_composition(key: u64, p: u64, r1 in 0u32..=16, r2 in 0u32..=16) {
        prop_assume!(r1 + r2 <= 16);
        let ks = ndes::KeySchedule::new(key);
        let mid = ks.rounds(p, 0..r1);
        prop_assert_eq!(ks.rounds(mid, r1..r1 + r2), ndes::encrypt(key, p, r1 + r2).unwrap());
    }

    #[test]
    fn present_round_composition(key in 0u128..(1 << 80), p: u64, r1 in 0u32..=31, r2 in 0u32..=31) {
        prop_assume!(r1 + r2 <= 31);
        let ks = present::KeySchedule::new(key);
        let mid = ks.rounds(p, 0..r1);
        let end = ks.whiten(ks.rounds(mid, r1..r1 + r2), r1 + r2);
        prop_assert_eq!(end, present::encrypt(key, p, r1 + r2).unwrap());
    }

    #[test]
    fn chaskey_round_composition(key: u128, p: u128, r1 in 0u32..=8, r2 in 0u32..=8) {
        let words = chaskey::u128_to_words;
        let mut v = words(p ^ key);
        chaskey::permute(&mut v, r1);
        chaskey::permute(&mut v, r2);
        let split = chaskey::words_to_u128(v) ^ key;
        let direct = chaskey::encrypt(words(key), words(p), r1 + r2).unwrap();
        prop_assert_eq!(words(split), direct);
    }

    #[test]
    fn zero_difference_and_determinism(key: u128, p: u128, r in 0u32..=16, which in 0usize..3) {
        let cipher = CipherId::ALL[which];
        let kmask = if cipher.key_bits() == 128 { u128::MAX } else { (1u128 << cipher.key_bits()) - 1 };
        let bmask = if cipher.block_bits() == 128 { u128::MAX } else { (1u128 << cipher.block_bits()) - 1 };
        let key = KeyMaterial::new(key & kmask, cipher.key_bits()).unwrap();
        let p = Block::new(p & bmask, cipher.block_bits()).unwrap();
        let a = encrypt(cipher, &key, p, r).unwrap();
        let b = encrypt(cipher, &key, p, r).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.xor(b).unwrap().is_zero());
    }

    #[test]
    fn des_complement_any_rounds(key: u64, p: u64, r in 0u32..=16) {
        let k = KeyMaterial::new(key as u128, 64).unwrap();
        let c = encrypt(CipherId::Des, &k, Block::present(p), r).unwrap();
        let cc = encrypt(CipherId::Des, &k.complement(), Block::present(!p), r).unwrap();
        prop_assert_eq!(cc, c.complement());
    }
}
