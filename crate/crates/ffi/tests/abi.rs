use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use neurodiff_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 512];
    unsafe {
        nd_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn cpath(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn full_des_vector_through_the_abi() {
    // 16 rounds without IP/FP; wrap with neurodiff's permutations to compare
    // against the published ciphertext.
    use neurodiff::ciphers::des;
    let key = 0x1334_5779_9bbc_dff1u64.to_be_bytes();
    let pt = des::initial_permutation(0x0123_4567_89ab_cdef).to_be_bytes();
    let mut out = [0u8; 8];
    let s = unsafe {
        nd_encrypt(
            NdCipher::Des as u32,
            key.as_ptr(),
            8,
            pt.as_ptr(),
            8,
            16,
            out.as_mut_ptr(),
        )
    };
    assert_eq!(s, NdStatus::Ok);
    let state = u64::from_be_bytes(out);
    let c = des::final_permutation(state.rotate_left(32));
    assert_eq!(c, 0x85e8_1354_0f0a_b405);
}

#[test]
fn present_key_is_ten_bytes() {
    assert_eq!(nd_key_bytes(NdCipher::Present as u32), 10);
    assert_eq!(nd_block_bytes(NdCipher::Chaskey as u32), 16);
    assert_eq!(nd_max_rounds(NdCipher::Present as u32), 31);
    assert_eq!(nd_block_bytes(9), 0);
    let key = [0u8; 10];
    let pt = [0u8; 8];
    let mut out = [0u8; 8];
    let s = unsafe { nd_encrypt(3, key.as_ptr(), 10, pt.as_ptr(), 8, 31, out.as_mut_ptr()) };
    assert_eq!(s, NdStatus::Ok);
    assert_eq!(u64::from_be_bytes(out), 0x5579_c138_7b22_8445);
}

#[test]
fn errors_map_to_codes_and_messages() {
    let key = [0u8; 8];
    let mut out = [0u8; 8];
    unsafe {
        assert_eq!(
            nd_encrypt(1, key.as_ptr(), 8, ptr::null(), 8, 3, out.as_mut_ptr()),
            NdStatus::NullPointer
        );
        assert!(last_error().contains("plaintext"));
        assert_eq!(
            nd_encrypt(1, key.as_ptr(), 7, key.as_ptr(), 8, 3, out.as_mut_ptr()),
            NdStatus::Shape
        );
        assert_eq!(
            nd_encrypt(7, key.as_ptr(), 8, key.as_ptr(), 8, 3, out.as_mut_ptr()),
            NdStatus::InvalidArgument
        );

        let mut spec = ptr::null_mut();
        assert_eq!(
            nd_spec_new(1, 3, 3, 10, 0, &mut spec),
            NdStatus::InvalidArgument
        );
        assert!(spec.is_null());
        assert_eq!(nd_spec_new(1, 5, 2, 10, 0, &mut spec), NdStatus::Ok);
        assert!(last_error().is_empty());
        assert_eq!(nd_spec_set_key_mode(spec, 5), NdStatus::InvalidArgument);
        let zero = [0u8; 8];
        assert_eq!(
            nd_spec_set_delta(spec, zero.as_ptr(), 8),
            NdStatus::InvalidArgument
        );
        assert_eq!(nd_spec_set_delta(spec, zero.as_ptr(), 4), NdStatus::Shape);
        assert_eq!(nd_spec_set_omega(spec, 3), NdStatus::Shape);
        let mut small = [0u8; 4];
        let mut label = 0u8;
        let s = nd_generate_group(spec, 0, &mut label, small.as_mut_ptr(), small.len());
        assert_eq!(s, NdStatus::BufferTooSmall);
        assert_eq!(
            nd_generate_group(spec, 10, &mut label, small.as_mut_ptr(), 0),
            NdStatus::Range
        );
        nd_spec_free(spec);

        let missing = CString::new("/nonexistent/neurodiff.bin").unwrap();
        let mut ds = ptr::null_mut();
        assert_eq!(nd_dataset_open(missing.as_ptr(), &mut ds), NdStatus::Io);
        let preds = [0.5f32, 1.5];
        assert_eq!(
            nd_write_predictions(missing.as_ptr(), preds.as_ptr(), 2),
            NdStatus::Range
        );
        let mut report = NdEvalReport::default();
        let labels = [1u8, 0];
        assert_eq!(
            nd_evaluate_labels(labels.as_ptr(), preds.as_ptr(), 1, 0.5, &mut report),
            NdStatus::Ok
        );
        assert_eq!((report.n, report.tp), (1, 1));
        assert!(report.tnr.is_nan());
    }
}

#[test]
fn truncated_message_is_terminated() {
    unsafe {
        nd_spec_new(1, 99, 1, 1, 0, &mut ptr::null_mut());
        let mut buf = [0x7f as c_char; 8];
        let full = nd_last_error_message(buf.as_mut_ptr(), buf.len());
        assert!(full > 7);
        assert_eq!(buf[7], 0);
    }
}

#[test]
fn generated_file_reads_back_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let data = cpath(&dir.path().join("d.bin"));
    unsafe {
        let mut spec = ptr::null_mut();
        assert_eq!(nd_spec_new(2, 4, 8, 300, 5, &mut spec), NdStatus::Ok);
        let delta: Vec<u8> = (1..=16).collect();
        assert_eq!(nd_spec_set_delta(spec, delta.as_ptr(), 16), NdStatus::Ok);
        let mut summary = NdGenSummary::default();
        assert_eq!(
            nd_generate_dataset(spec, data.as_ptr(), 0, &mut summary),
            NdStatus::Ok
        );

        let mut ds = ptr::null_mut();
        assert_eq!(nd_dataset_open(data.as_ptr(), &mut ds), NdStatus::Ok);
        let mut h = NdHeader::default();
        assert_eq!(nd_dataset_header(ds, &mut h), NdStatus::Ok);
        assert_eq!(
            (h.cipher, h.rounds, h.m, h.omega, h.block_bits),
            (2, 4, 8, 32, 128)
        );
        assert_eq!(&h.delta[..], &delta[..]);
        assert_eq!(h.group_bytes as usize, nd_spec_group_bytes(spec));

        let n = h.group_bytes as usize;
        let (mut a, mut b) = (vec![0u8; n], vec![0u8; n]);
        let (mut la, mut lb) = (0u8, 0u8);
        for i in [0, 150, 299] {
            assert_eq!(
                nd_dataset_read_group(ds, i, &mut la, a.as_mut_ptr(), n),
                NdStatus::Ok
            );
            assert_eq!(
                nd_generate_group(spec, i, &mut lb, b.as_mut_ptr(), n),
                NdStatus::Ok
            );
            assert_eq!((la, &a), (lb, &b));
        }
        let mut labels = vec![0u8; 300];
        assert_eq!(
            nd_dataset_read_labels(ds, labels.as_mut_ptr(), 300),
            NdStatus::Ok
        );
        assert_eq!(
            labels.iter().map(|&l| l as u64).sum::<u64>(),
            summary.positives
        );
        nd_dataset_close(ds);
        nd_spec_free(spec);
    }
    assert!((nd_ci_half_width(0.5, 1_000_000) - 0.00098).abs() < 1e-12);
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test-binary>
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libneurodiff_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("run cc");
    assert!(status.success());
    let out = Command::new(&exe)
        .arg(dir.path().join("d.bin"))
        .arg(dir.path().join("p.bin"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
