//! C ABI over `neurodiff`.
//!
//! Every fallible function returns an [`NdStatus`]; on failure the message is
//! kept per thread and can be fetched with [`nd_last_error_message`]. Objects
//! cross the boundary as opaque pointers that the caller frees exactly once
//! with the matching `*_free`/`*_close` function. Blocks and keys are passed as
//! big-endian byte strings of the cipher's width.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use neurodiff::datafmt::{self, FileDatasetReader};
use neurodiff::evaluator::{self, EvalReport};
use neurodiff::sampling::{self, GenSpec, GroupSize, KeyMode};
use neurodiff::{Block, CipherId, Error, KeyMaterial};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RoundRange = 3,
    Shape = 4,
    Format = 5,
    Truncation = 6,
    Range = 7,
    Alignment = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Values for `cipher` parameters; equal to the dataset header tags.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdCipher {
    Des = 1,
    Chaskey = 2,
    Present = 3,
}

/// Values for [`nd_spec_set_key_mode`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NdKeyMode {
    PerGroup = 0,
    PerPair = 1,
}

/// Opaque generation spec.
pub struct NdSpec(GenSpec);

/// Opaque streaming dataset reader.
pub struct NdDataset(FileDatasetReader);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NdHeader {
    pub cipher: u8,
    pub rounds: u8,
    pub m: u16,
    pub omega: u16,
    pub block_bits: u16,
    pub group_count: u64,
    pub seed: u64,
    /// Bytes per packed group tensor.
    pub group_bytes: u64,
    /// Δ, big-endian, `block_bits / 8` bytes used.
    pub delta: [u8; 16],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NdGenSummary {
    pub groups: u64,
    pub positives: u64,
}

/// `tpr`/`tnr` are NaN when the class is absent.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NdEvalReport {
    pub n: u64,
    pub accuracy: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub threshold: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(NdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::RoundRange { .. } => NdStatus::RoundRange,
            Error::Shape(_) => NdStatus::Shape,
            Error::Format(_) => NdStatus::Format,
            Error::Truncation { .. } => NdStatus::Truncation,
            Error::Range(_) => NdStatus::Range,
            Error::Alignment { .. } => NdStatus::Alignment,
            Error::Usage(_) => NdStatus::InvalidArgument,
            Error::IoAt { .. } | Error::Io(_) => NdStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: NdStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NdStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (NdStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(_) => (NdStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn nonnull<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(NdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn nonnull_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(NdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    nonnull(p, what)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    nonnull_mut(p, what)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    nonnull(p, "path")?;
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(NdStatus::InvalidArgument, "path is not valid UTF-8"))
}

// Enum-typed parameters would make out-of-range values from C undefined
// behaviour, so tags arrive as plain integers and are checked here.
fn cipher(tag: u32) -> Result<CipherId, Failure> {
    u8::try_from(tag)
        .ok()
        .and_then(|t| CipherId::from_tag(t).ok())
        .ok_or_else(|| {
            fail(
                NdStatus::InvalidArgument,
                format!("unknown cipher tag {tag}"),
            )
        })
}

fn be_value(bytes: &[u8]) -> u128 {
    bytes.iter().fold(0u128, |acc, &b| acc << 8 | b as u128)
}

fn write_be(value: u128, out: &mut [u8]) {
    let n = out.len();
    out.copy_from_slice(&value.to_be_bytes()[16 - n..]);
}

fn threads(n: u32) -> Option<usize> {
    (n != 0).then_some(n as usize)
}

fn copy_out(src: &[u8], dst: &mut [u8]) -> Result<(), Failure> {
    if dst.len() < src.len() {
        return Err(fail(
            NdStatus::BufferTooSmall,
            format!("buffer holds {} bytes, need {}", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message (NUL-terminated, possibly
/// truncated) into `buf` and returns the full message length without the NUL.
#[no_mangle]
pub unsafe extern "C" fn nd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Block width in bytes; 0 for an unknown tag.
#[no_mangle]
pub extern "C" fn nd_block_bytes(c: u32) -> usize {
    cipher(c).map_or(0, |id| id.block_bits() as usize / 8)
}

/// Key width in bytes (PRESENT keys are 10); 0 for an unknown tag.
#[no_mangle]
pub extern "C" fn nd_key_bytes(c: u32) -> usize {
    cipher(c).map_or(0, |id| id.key_bits() as usize / 8)
}

/// 0 for an unknown tag.
#[no_mangle]
pub extern "C" fn nd_max_rounds(c: u32) -> u32 {
    cipher(c).map_or(0, |id| id.max_rounds())
}

/// Round-reduced encryption. `key`, `plaintext` and `out` must hold exactly
/// the cipher's key and block widths.
#[no_mangle]
pub unsafe extern "C" fn nd_encrypt(
    c: u32,
    key: *const u8,
    key_len: usize,
    plaintext: *const u8,
    block_len: usize,
    rounds: u32,
    out: *mut u8,
) -> NdStatus {
    guard(|| {
        let id = cipher(c)?;
        if key_len * 8 != id.key_bits() as usize || block_len * 8 != id.block_bits() as usize {
            return Err(fail(
                NdStatus::Shape,
                format!(
                    "{id} needs a {}-byte key and {}-byte block",
                    id.key_bits() / 8,
                    id.block_bits() / 8
                ),
            ));
        }
        let key = KeyMaterial::new(be_value(slice(key, key_len, "key")?), id.key_bits())?;
        let p = Block::new(
            be_value(slice(plaintext, block_len, "plaintext")?),
            id.block_bits(),
        )?;
        let out = slice_mut(out, block_len, "out")?;
        let c = neurodiff::ciphers::encrypt(id, &key, p, rounds)?;
        write_be(c.value(), out);
        Ok(())
    })
}

/// Creates a spec with the cipher's default Δ and unit width.
#[no_mangle]
pub unsafe extern "C" fn nd_spec_new(
    c: u32,
    rounds: u32,
    m: u16,
    group_count: u64,
    seed: u64,
    out: *mut *mut NdSpec,
) -> NdStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        let spec = GenSpec::new(cipher(c)?, rounds, GroupSize::new(m)?, group_count, seed)?;
        *out = Box::into_raw(Box::new(NdSpec(spec)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_spec_free(spec: *mut NdSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

#[no_mangle]
pub unsafe extern "C" fn nd_spec_set_delta(
    spec: *mut NdSpec,
    delta: *const u8,
    len: usize,
) -> NdStatus {
    guard(|| {
        let s = nonnull_mut(spec, "spec")?;
        let bits = s.0.cipher.block_bits();
        if len * 8 != bits as usize {
            return Err(fail(
                NdStatus::Shape,
                format!("Δ must be {} bytes", bits / 8),
            ));
        }
        let d = Block::new(be_value(slice(delta, len, "delta")?), bits)?;
        s.0 = s.0.clone().with_delta(d)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_spec_set_omega(spec: *mut NdSpec, omega: u16) -> NdStatus {
    guard(|| {
        let s = nonnull_mut(spec, "spec")?;
        s.0 = s.0.clone().with_omega(omega)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_spec_set_key_mode(spec: *mut NdSpec, mode: u32) -> NdStatus {
    guard(|| {
        let s = nonnull_mut(spec, "spec")?;
        let mode = match mode {
            m if m == NdKeyMode::PerGroup as u32 => KeyMode::PerGroup,
            m if m == NdKeyMode::PerPair as u32 => KeyMode::PerPair,
            m => {
                return Err(fail(
                    NdStatus::InvalidArgument,
                    format!("unknown key mode {m}"),
                ))
            }
        };
        s.0 = s.0.clone().with_key_mode(mode);
        Ok(())
    })
}

/// Bytes per packed group tensor for this spec.
#[no_mangle]
pub unsafe extern "C" fn nd_spec_group_bytes(spec: *const NdSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.0.layout.bytes_per_group())
}

/// Generates group `index` into `tensor` (at least `nd_spec_group_bytes`).
#[no_mangle]
pub unsafe extern "C" fn nd_generate_group(
    spec: *const NdSpec,
    index: u64,
    label: *mut u8,
    tensor: *mut u8,
    tensor_len: usize,
) -> NdStatus {
    guard(|| {
        let s = nonnull(spec, "spec")?;
        let label = nonnull_mut(label, "label")?;
        let dst = slice_mut(tensor, tensor_len, "tensor")?;
        let g = sampling::generate_group(&s.0, index)?;
        copy_out(g.tensor.as_bytes(), dst)?;
        *label = g.label;
        Ok(())
    })
}

/// Writes the whole dataset to `path`. `threads == 0` uses all cores; the
/// bytes do not depend on it. `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn nd_generate_dataset(
    spec: *const NdSpec,
    path_: *const c_char,
    threads_: u32,
    summary: *mut NdGenSummary,
) -> NdStatus {
    guard(|| {
        let s = nonnull(spec, "spec")?;
        let p = path(path_)?;
        let sum = sampling::generate_dataset_file(&s.0, &p, threads(threads_))?;
        if let Some(out) = summary.as_mut() {
            *out = NdGenSummary {
                groups: sum.groups,
                positives: sum.positives,
            };
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_dataset_open(
    path_: *const c_char,
    out: *mut *mut NdDataset,
) -> NdStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        let reader = datafmt::open_dataset(&path(path_)?)?;
        *out = Box::into_raw(Box::new(NdDataset(reader)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_dataset_close(ds: *mut NdDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

#[no_mangle]
pub unsafe extern "C" fn nd_dataset_header(ds: *const NdDataset, out: *mut NdHeader) -> NdStatus {
    guard(|| {
        let d = nonnull(ds, "dataset")?;
        let out = nonnull_mut(out, "out")?;
        let h = d.0.header();
        let mut delta = [0u8; 16];
        let n = h.block_bits as usize / 8;
        write_be(h.delta.value(), &mut delta[..n]);
        *out = NdHeader {
            cipher: h.cipher.tag(),
            rounds: h.rounds,
            m: h.m,
            omega: h.omega,
            block_bits: h.block_bits,
            group_count: h.group_count,
            seed: h.seed,
            group_bytes: h.group_bytes()?,
            delta,
        };
        Ok(())
    })
}

/// Random access to group `index`.
#[no_mangle]
pub unsafe extern "C" fn nd_dataset_read_group(
    ds: *mut NdDataset,
    index: u64,
    label: *mut u8,
    tensor: *mut u8,
    tensor_len: usize,
) -> NdStatus {
    guard(|| {
        let d = nonnull_mut(ds, "dataset")?;
        let label = nonnull_mut(label, "label")?;
        let dst = slice_mut(tensor, tensor_len, "tensor")?;
        let g = d.0.read_group(index)?;
        copy_out(g.tensor.as_bytes(), dst)?;
        *label = g.label;
        Ok(())
    })
}

/// Copies all `group_count` labels into `labels`.
#[no_mangle]
pub unsafe extern "C" fn nd_dataset_read_labels(
    ds: *mut NdDataset,
    labels: *mut u8,
    len: usize,
) -> NdStatus {
    guard(|| {
        let d = nonnull_mut(ds, "dataset")?;
        let dst = slice_mut(labels, len, "labels")?;
        copy_out(&d.0.read_labels()?, dst)
    })
}

#[no_mangle]
pub unsafe extern "C" fn nd_write_predictions(
    path_: *const c_char,
    preds: *const f32,
    n: usize,
) -> NdStatus {
    guard(|| {
        let p = path(path_)?;
        datafmt::write_predictions_file(&p, slice(preds, n, "predictions")?)?;
        Ok(())
    })
}

fn report(r: &EvalReport) -> NdEvalReport {
    let (ci95_low, ci95_high) = evaluator::accuracy_ci(r);
    NdEvalReport {
        n: r.n,
        accuracy: r.accuracy,
        tpr: r.tpr,
        tnr: r.tnr,
        threshold: r.threshold,
        tp: r.tp,
        tn: r.tn,
        fp: r.fp,
        fn_: r.fn_,
        ci95_low,
        ci95_high,
    }
}

/// Scores a prediction file against a dataset's labels.
#[no_mangle]
pub unsafe extern "C" fn nd_evaluate(
    dataset: *const c_char,
    predictions: *const c_char,
    threshold: f64,
    out: *mut NdEvalReport,
) -> NdStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        *out = report(&evaluator::evaluate(
            &path(dataset)?,
            &path(predictions)?,
            threshold,
        )?);
        Ok(())
    })
}

/// In-memory variant of [`nd_evaluate`].
#[no_mangle]
pub unsafe extern "C" fn nd_evaluate_labels(
    labels: *const u8,
    preds: *const f32,
    n: usize,
    threshold: f64,
    out: *mut NdEvalReport,
) -> NdStatus {
    guard(|| {
        let out = nonnull_mut(out, "out")?;
        let r = evaluator::evaluate_labels(
            slice(labels, n, "labels")?,
            slice(preds, n, "predictions")?,
            threshold,
        )?;
        *out = report(&r);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn nd_ci_half_width(accuracy: f64, n: u64) -> f64 {
    evaluator::ci_half_width(accuracy, n)
}
