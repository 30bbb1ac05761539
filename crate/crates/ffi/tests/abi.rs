use std::ffi::{CStr, CString};
use std::ptr;

use pbs_core::corpus_db::CorpusDb;
use pbs_core::encoder::{encode_document, Alphabet};
use pbs_core::metadata::ResultMetadata;
use pbs_core::synth::EnglishGenerator;
use pbs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pbs_last_error_message()) }.to_string_lossy().into_owned()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    pbs_string_free(s);
    out
}

#[test]
fn encode_matches_core() {
    let text = "the quick brown fox";
    let mut out = ptr::null_mut();
    let status = unsafe { pbs_encode(text.as_ptr(), text.len(), 12, &mut out) };
    assert_eq!(status, PbsStatus::Ok);
    let got = unsafe { take(out) };
    let want = encode_document("", text, &Alphabet::new(12).unwrap());
    assert_eq!(got, want.pbs_str());
}

#[test]
fn encode_reports_errors() {
    let mut out = ptr::null_mut();
    let bad = [0xffu8, 0xfe];
    assert_eq!(unsafe { pbs_encode(bad.as_ptr(), 2, 12, &mut out) }, PbsStatus::InvalidUtf8);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { pbs_encode(b"a".as_ptr(), 1, 27, &mut out) }, PbsStatus::InvalidAlphabet);
    assert_eq!(unsafe { pbs_encode(ptr::null(), 3, 12, &mut out) }, PbsStatus::NullArgument);
    assert_eq!(unsafe { pbs_encode(b"a".as_ptr(), 1, 12, ptr::null_mut()) }, PbsStatus::NullArgument);
    // success clears the message
    assert_eq!(unsafe { pbs_encode(b"a".as_ptr(), 1, 12, &mut out) }, PbsStatus::Ok);
    unsafe { pbs_string_free(out) };
    assert_eq!(last_error(), "");
}

#[test]
fn encode_document_emits_fasta_and_map() {
    let text = "alpha beta\ngamma";
    let name = CString::new("doc1").unwrap();
    let (mut fasta, mut map) = (ptr::null_mut(), ptr::null_mut());
    let status = unsafe { pbs_encode_document(text.as_ptr(), text.len(), 12, name.as_ptr(), &mut fasta, &mut map) };
    assert_eq!(status, PbsStatus::Ok);
    let (fasta, map) = unsafe { (take(fasta), take(map)) };
    assert!(fasta.starts_with(">doc1\n"));
    assert_eq!(fasta.lines().nth(1).unwrap().len(), 3);
    assert!(map.starts_with("# pbs-map v1"));
}

#[test]
fn index_count_and_locate() {
    let seq = b"ACDACDACD";
    let mut index = ptr::null_mut();
    assert_eq!(unsafe { pbs_index_build(seq.as_ptr(), seq.len(), 12, &mut index) }, PbsStatus::Ok);
    assert_eq!(unsafe { pbs_index_len(index) }, 9);
    let mut count = 0;
    assert_eq!(unsafe { pbs_index_count(index, b"ACD".as_ptr(), 3, &mut count) }, PbsStatus::Ok);
    assert_eq!(count, 3);
    let (mut pos, mut n) = (ptr::null_mut(), 0usize);
    assert_eq!(unsafe { pbs_index_locate(index, b"CDA".as_ptr(), 3, &mut pos, &mut n) }, PbsStatus::Ok);
    assert_eq!(unsafe { std::slice::from_raw_parts(pos, n) }, &[1, 4]);
    unsafe { pbs_positions_free(pos, n) };
    assert_eq!(unsafe { pbs_index_locate(index, b"RRR".as_ptr(), 3, &mut pos, &mut n) }, PbsStatus::Ok);
    assert_eq!(n, 0);
    assert!(pos.is_null());

    let (mut data, mut len) = (ptr::null_mut(), 0usize);
    assert_eq!(unsafe { pbs_index_serialize(index, &mut data, &mut len) }, PbsStatus::Ok);
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { pbs_index_deserialize(data, len, &mut copy) }, PbsStatus::Ok);
    unsafe { pbs_bytes_free(data, len) };
    assert_eq!(unsafe { pbs_index_count(copy, b"ACD".as_ptr(), 3, &mut count) }, PbsStatus::Ok);
    assert_eq!(count, 3);
    let junk = [1u8, 2, 3];
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { pbs_index_deserialize(junk.as_ptr(), 3, &mut bad) }, PbsStatus::Corrupt);
    unsafe {
        pbs_index_free(index);
        pbs_index_free(copy);
        pbs_index_free(ptr::null_mut());
    }
}

#[test]
fn index_rejects_foreign_characters() {
    let mut index = ptr::null_mut();
    assert_eq!(unsafe { pbs_index_build(b"ACB".as_ptr(), 3, 12, &mut index) }, PbsStatus::IllegalCharacter);
    assert!(index.is_null());
}

#[test]
fn db_search_returns_result_json() {
    let alphabet = Alphabet::new(12).unwrap();
    let mut generator = EnglishGenerator::new(5);
    let texts: Vec<String> = (0..3).map(|_| generator.prose(300, 80)).collect();
    let encoded: Vec<_> = texts.iter().map(|t| encode_document("", t, &alphabet)).collect();
    let db = CorpusDb::from_sequences(
        encoded.iter().enumerate().map(|(i, d)| (["a", "b", "c"][i], d.pbs.as_slice())),
        &alphabet,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.pbsdb");
    db.save(&path).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut handle = ptr::null_mut();
    assert_eq!(unsafe { pbs_db_open(cpath.as_ptr(), &mut handle) }, PbsStatus::Ok);
    assert_eq!(unsafe { pbs_db_document_count(handle) }, 3);
    assert_eq!(unsafe { pbs_db_total_words(handle) }, db.total_words());

    let query = &encoded[1].pbs[40..100];
    let id = CString::new("q").unwrap();
    let mut json = ptr::null_mut();
    let status = unsafe { pbs_db_search(handle, id.as_ptr(), query.as_ptr(), query.len(), ptr::null(), &mut json) };
    assert_eq!(status, PbsStatus::Ok, "{}", last_error());
    let meta = ResultMetadata::from_json(&unsafe { take(json) }).unwrap();
    assert_eq!(meta.query_word_count, 60);
    assert_eq!(meta.longest_ccw, 60);
    assert!(meta.matches.iter().any(|m| m.ref_doc_id == 1 && m.ref_start == 40));

    let params = PbsSearchParams { seed_k: 0, ..pbs_search_params_default() };
    let status = unsafe { pbs_db_search(handle, id.as_ptr(), query.as_ptr(), query.len(), &params, &mut json) };
    assert_eq!(status, PbsStatus::InvalidArgument);
    let status = unsafe { pbs_db_search(handle, id.as_ptr(), b"BBBB".as_ptr(), 4, ptr::null(), &mut json) };
    assert_eq!(status, PbsStatus::IllegalCharacter);
    unsafe { pbs_db_free(handle) };

    let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { pbs_db_open(missing.as_ptr(), &mut handle) }, PbsStatus::Io);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(pbs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
