//! C ABI over `pbs-core`.
//!
//! Every function returns a [`PbsStatus`]; on failure a message is available
//! from [`pbs_last_error_message`] on the same thread. Strings handed out by
//! the library are NUL-terminated and must be released with
//! [`pbs_string_free`]; position arrays with [`pbs_positions_free`]. Handles
//! are opaque and released with their own `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pbs_core::corpus_db::{CorpusDb, DbError};
use pbs_core::detector::{self, DetectorConfig};
use pbs_core::encoder::{encode_document, validate_utf8, write_fasta, Alphabet, OffsetMap};
use pbs_core::fm_index::{FmIndex, IndexError};
use pbs_core::metadata::ResultMetadata;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidAlphabet = 3,
    IllegalCharacter = 4,
    Io = 5,
    Corrupt = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Detector settings for [`pbs_db_search`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbsSearchParams {
    pub seed_k: usize,
    pub max_gap: usize,
    pub min_report: usize,
}

/// Opaque FM-index handle.
pub struct PbsIndex {
    inner: FmIndex,
}

/// Opaque corpus database handle.
pub struct PbsDb {
    inner: CorpusDb,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(PbsStatus, String);

impl Fail {
    fn null(what: &str) -> Self {
        Fail(PbsStatus::NullArgument, format!("{what} is null"))
    }
}

impl From<IndexError> for Fail {
    fn from(e: IndexError) -> Self {
        let status = match e {
            IndexError::IllegalCharacter { .. } => PbsStatus::IllegalCharacter,
            _ => PbsStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

impl From<DbError> for Fail {
    fn from(e: DbError) -> Self {
        let status = match e {
            DbError::Io { .. } => PbsStatus::Io,
            DbError::Index(IndexError::IllegalCharacter { .. }) => PbsStatus::IllegalCharacter,
            DbError::EmptyCorpus | DbError::OutOfRange { .. } => PbsStatus::InvalidArgument,
            _ => PbsStatus::Corrupt,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PbsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PbsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PbsStatus::Panic
        }
    }
}

unsafe fn bytes<'a>(ptr: *const u8, len: usize, what: &str) -> Result<&'a [u8], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Fail::null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(Fail::null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Fail(PbsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn alphabet(size: u32) -> Result<Alphabet, Fail> {
    Alphabet::new(size as usize).map_err(|e| Fail(PbsStatus::InvalidAlphabet, e.to_string()))
}

fn out_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::null(what));
    }
    *out = value;
    Ok(())
}

/// Library version, a static string; do not free.
#[no_mangle]
pub extern "C" fn pbs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread; do not free.
#[no_mangle]
pub extern "C" fn pbs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn pbs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Encodes UTF-8 text to its sequence, one character per word.
#[no_mangle]
pub unsafe extern "C" fn pbs_encode(
    text: *const u8,
    len: usize,
    alphabet_size: u32,
    out_sequence: *mut *mut c_char,
) -> PbsStatus {
    guard(|| {
        let alphabet = alphabet(alphabet_size)?;
        let text = validate_utf8(bytes(text, len, "text")?).map_err(|e| Fail(PbsStatus::InvalidUtf8, e.to_string()))?;
        let doc = encode_document("", text, &alphabet);
        store(out_sequence, out_string(doc.pbs_str().to_string()), "out_sequence")
    })
}

/// Encodes UTF-8 text to a FASTA record named `name` plus the offset-map
/// sidecar text that ties each sequence position back to the source bytes.
#[no_mangle]
pub unsafe extern "C" fn pbs_encode_document(
    text: *const u8,
    len: usize,
    alphabet_size: u32,
    name: *const c_char,
    out_fasta: *mut *mut c_char,
    out_map: *mut *mut c_char,
) -> PbsStatus {
    guard(|| {
        let alphabet = alphabet(alphabet_size)?;
        let name = c_str(name, "name")?;
        let raw = bytes(text, len, "text")?;
        let text = validate_utf8(raw).map_err(|e| Fail(PbsStatus::InvalidUtf8, e.to_string()))?;
        if out_fasta.is_null() || out_map.is_null() {
            return Err(Fail::null("output pointer"));
        }
        let doc = encode_document(name, text, &alphabet);
        let map = OffsetMap::for_document(&doc, name, raw, alphabet.size(), Vec::new());
        *out_fasta = out_string(write_fasta(&doc, name));
        *out_map = out_string(map.to_tsv());
        Ok(())
    })
}

/// Builds an index over an encoded sequence.
#[no_mangle]
pub unsafe extern "C" fn pbs_index_build(
    sequence: *const u8,
    len: usize,
    alphabet_size: u32,
    out_index: *mut *mut PbsIndex,
) -> PbsStatus {
    guard(|| {
        let alphabet = alphabet(alphabet_size)?;
        let index = FmIndex::build(bytes(sequence, len, "sequence")?, &alphabet)?;
        store(out_index, Box::into_raw(Box::new(PbsIndex { inner: index })), "out_index")
    })
}

/// Loads an index saved by [`pbs_index_serialize`].
#[no_mangle]
pub unsafe extern "C" fn pbs_index_deserialize(
    data: *const u8,
    len: usize,
    out_index: *mut *mut PbsIndex,
) -> PbsStatus {
    guard(|| {
        let index = FmIndex::deserialize(bytes(data, len, "data")?).map_err(|e| Fail(PbsStatus::Corrupt, e.to_string()))?;
        store(out_index, Box::into_raw(Box::new(PbsIndex { inner: index })), "out_index")
    })
}

/// Serializes an index; release the buffer with [`pbs_bytes_free`].
#[no_mangle]
pub unsafe extern "C" fn pbs_index_serialize(
    index: *const PbsIndex,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> PbsStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| Fail::null("index"))?;
        if out_data.is_null() || out_len.is_null() {
            return Err(Fail::null("output pointer"));
        }
        let boxed = index.inner.serialize().into_boxed_slice();
        *out_len = boxed.len();
        *out_data = Box::into_raw(boxed) as *mut u8;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbs_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Length of the indexed sequence.
#[no_mangle]
pub unsafe extern "C" fn pbs_index_len(index: *const PbsIndex) -> usize {
    index.as_ref().map_or(0, |i| i.inner.len())
}

/// Number of occurrences of `pattern`.
#[no_mangle]
pub unsafe extern "C" fn pbs_index_count(
    index: *const PbsIndex,
    pattern: *const u8,
    len: usize,
    out_count: *mut usize,
) -> PbsStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| Fail::null("index"))?;
        let n = index.inner.count(bytes(pattern, len, "pattern")?);
        store(out_count, n, "out_count")
    })
}

/// Ascending start positions of `pattern`. Release with
/// [`pbs_positions_free`]; an empty result yields a null array.
#[no_mangle]
pub unsafe extern "C" fn pbs_index_locate(
    index: *const PbsIndex,
    pattern: *const u8,
    len: usize,
    out_positions: *mut *mut u64,
    out_len: *mut usize,
) -> PbsStatus {
    guard(|| {
        let index = index.as_ref().ok_or_else(|| Fail::null("index"))?;
        if out_positions.is_null() || out_len.is_null() {
            return Err(Fail::null("output pointer"));
        }
        let range = index.inner.backward_search(bytes(pattern, len, "pattern")?);
        let positions: Vec<u64> = index.inner.locate(range).into_iter().map(|p| p as u64).collect();
        *out_len = positions.len();
        *out_positions = if positions.is_empty() {
            ptr::null_mut()
        } else {
            Box::into_raw(positions.into_boxed_slice()) as *mut u64
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbs_positions_free(positions: *mut u64, len: usize) {
    if !positions.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(positions, len)));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pbs_index_free(index: *mut PbsIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Opens a corpus database file.
#[no_mangle]
pub unsafe extern "C" fn pbs_db_open(path: *const c_char, out_db: *mut *mut PbsDb) -> PbsStatus {
    guard(|| {
        let db = CorpusDb::load(c_str(path, "path")?)?;
        store(out_db, Box::into_raw(Box::new(PbsDb { inner: db })), "out_db")
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbs_db_document_count(db: *const PbsDb) -> usize {
    db.as_ref().map_or(0, |d| d.inner.document_count())
}

#[no_mangle]
pub unsafe extern "C" fn pbs_db_total_words(db: *const PbsDb) -> usize {
    db.as_ref().map_or(0, |d| d.inner.total_words())
}

/// Default detector settings.
#[no_mangle]
pub extern "C" fn pbs_search_params_default() -> PbsSearchParams {
    let d = DetectorConfig::default();
    PbsSearchParams {
        seed_k: d.seed_k,
        max_gap: d.max_gap,
        min_report: d.min_report,
    }
}

/// Searches an encoded query against the database and returns the result
/// metadata as JSON. `params` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn pbs_db_search(
    db: *const PbsDb,
    query_id: *const c_char,
    sequence: *const u8,
    len: usize,
    params: *const PbsSearchParams,
    out_json: *mut *mut c_char,
) -> PbsStatus {
    guard(|| {
        let db = db.as_ref().ok_or_else(|| Fail::null("db"))?;
        let id = c_str(query_id, "query_id")?;
        let seq = bytes(sequence, len, "sequence")?;
        if let Some(pos) = db.inner.alphabet().first_illegal(seq) {
            return Err(Fail(
                PbsStatus::IllegalCharacter,
                format!("illegal character {:?} at position {pos}", seq[pos] as char),
            ));
        }
        let p = params.as_ref().copied().unwrap_or_else(|| pbs_search_params_default());
        if p.seed_k == 0 {
            return Err(Fail(PbsStatus::InvalidArgument, "seed_k must be at least 1".into()));
        }
        let cfg = DetectorConfig {
            seed_k: p.seed_k,
            max_gap: p.max_gap,
            min_report: p.min_report,
        };
        let report = detector::detect(&db.inner, id, seq, &cfg).map_err(|e| Fail(PbsStatus::InvalidArgument, e.to_string()))?;
        let json = ResultMetadata::from_report(&report, &db.inner, false).to_json();
        store(out_json, out_string(json), "out_json")
    })
}

#[no_mangle]
pub unsafe extern "C" fn pbs_db_free(db: *mut PbsDb) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}
