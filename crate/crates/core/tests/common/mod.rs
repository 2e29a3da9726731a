#![allow(dead_code)]

use std::path::PathBuf;

pub struct Vector {
    pub key: u128,
    pub plaintext: u128,
    pub rounds: u32,
    pub ciphertext: u128,
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Parses `key plaintext rounds ciphertext` lines (hex, `#` comments).
pub fn load_vectors(name: &str) -> Vec<Vector> {
    let text = std::fs::read_to_string(data_path(name)).expect("vector file");
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            assert_eq!(f.len(), 4, "bad vector line {l:?}");
            let hex = |s: &str| u128::from_str_radix(s, 16).expect("hex");
            Vector {
                key: hex(f[0]),
                plaintext: hex(f[1]),
                rounds: f[2].parse().expect("rounds"),
                ciphertext: hex(f[3]),
            }
        })
        .collect()
}

/// Rows of whitespace-separated integers.
pub fn load_table(name: &str) -> Vec<Vec<u32>> {
    let text = std::fs::read_to_string(data_path(name)).expect("table file");
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}
