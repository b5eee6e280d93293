use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use compsum::pipeline::{load_model, summarize, SummarizeConfig, Summary};
use compsum_ffi::*;

fn core_fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = cs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

/// Copies and frees a library-owned string.
fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { cs_string_free(p) };
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn summarize_through_the_abi_matches_the_library() {
    let path = core_fixture("model.json");
    let mut model = ptr::null_mut();
    let status = unsafe { cs_model_load(c(path.to_str().unwrap()).as_ptr(), &mut model) };
    assert_eq!(status, CsStatus::Ok);
    assert!(cs_last_error().is_null());

    let corpus = std::fs::read_to_string(core_fixture("corpus.jsonl")).unwrap();
    let (docs, _) = compsum::corpus::read_corpus(core_fixture("corpus.jsonl")).unwrap();
    let lib_model = load_model(&path).unwrap();
    for (line, doc) in corpus.lines().zip(&docs) {
        let mut out = ptr::null_mut();
        let status = unsafe { cs_summarize(model, c(line).as_ptr(), 2, 0.6, true, &mut out) };
        assert_eq!(status, CsStatus::Ok);
        let got: Summary = serde_json::from_str(&take(out)).unwrap();
        let cfg = SummarizeConfig {
            k: 2,
            tau: 0.6,
            dedup: true,
            ..SummarizeConfig::default()
        };
        assert_eq!(got, summarize(&lib_model, doc, &cfg).unwrap());
    }
    unsafe { cs_model_free(model) };
}

#[test]
fn options_and_scores() {
    let parse = c("(S (NP (NNP John)) (VP (VBD left) (ADVP (RB quickly))) (. .))");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cs_extract_options(parse.as_ptr(), &mut out) },
        CsStatus::Ok
    );
    let opts: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert!(opts.as_array().is_some_and(|a| !a.is_empty()));

    let mut score = CsRougeScore::default();
    let (cand, refr) = (c("the cat sat"), c("the cat sat down"));
    assert_eq!(
        unsafe { cs_rouge(cand.as_ptr(), refr.as_ptr(), 1, &mut score) },
        CsStatus::Ok
    );
    assert_eq!((score.precision, score.recall), (1.0, 0.75));
    assert_eq!(
        unsafe { cs_rouge(cand.as_ptr(), refr.as_ptr(), 0, &mut score) },
        CsStatus::Ok
    );
    assert_eq!(score.recall, 0.75);

    let mut approx = -1.0;
    assert_eq!(
        unsafe { cs_approx_score(refr.as_ptr(), refr.as_ptr(), &mut approx) },
        CsStatus::Ok
    );
    assert_eq!(approx, 1.0);
}

#[test]
fn failures_set_status_and_message() {
    let mut model = ptr::null_mut();
    let status = unsafe { cs_model_load(c("/nonexistent/model.json").as_ptr(), &mut model) };
    assert_eq!(status, CsStatus::Io);
    assert!(model.is_null());
    assert!(last_error().contains("/nonexistent/model.json"));

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cs_extract_options(c("(S (NN a)").as_ptr(), &mut out) },
        CsStatus::Parse
    );
    assert!(out.is_null());

    let mut score = CsRougeScore::default();
    let s = c("a b");
    assert_eq!(
        unsafe { cs_rouge(s.as_ptr(), s.as_ptr(), 3, &mut score) },
        CsStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { cs_rouge(ptr::null(), s.as_ptr(), 1, &mut score) },
        CsStatus::NullPointer
    );
    assert_eq!(
        unsafe { cs_rouge(s.as_ptr(), s.as_ptr(), 1, ptr::null_mut()) },
        CsStatus::NullPointer
    );

    let bad_utf8 = [0xffu8, 0];
    let status = unsafe { cs_approx_score(bad_utf8.as_ptr().cast(), s.as_ptr(), &mut 0.0) };
    assert_eq!(status, CsStatus::InvalidUtf8);

    let status = unsafe { cs_summarize(ptr::null(), s.as_ptr(), 1, 0.5, false, &mut out) };
    assert_eq!(status, CsStatus::NullPointer);

    // A later success clears the message.
    assert_eq!(
        unsafe { cs_rouge(s.as_ptr(), s.as_ptr(), 2, &mut score) },
        CsStatus::Ok
    );
    assert!(cs_last_error().is_null());
}

#[test]
fn freeing_null_is_a_no_op() {
    unsafe {
        cs_model_free(ptr::null_mut());
        cs_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/compsum.h"),
    )
    .unwrap();
    for name in [
        "cs_version",
        "cs_last_error",
        "cs_model_load",
        "cs_model_free",
        "cs_summarize",
        "cs_extract_options",
        "cs_rouge",
        "cs_approx_score",
        "cs_string_free",
        "typedef struct CsModel CsModel;",
        "CS_STATUS_OK = 0",
        "CS_STATUS_INTERNAL = 7",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
