//! C ABI for the summarizer.
//!
//! Every fallible function returns a [`CsStatus`]. On failure the message is
//! kept per thread and can be read with [`cs_last_error`] until the next call
//! on the same thread. Strings handed out by this library are released with
//! [`cs_string_free`]; models with [`cs_model_free`]. Panics never cross the
//! boundary: they surface as `CS_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use compsum::corpus::DocumentRecord;
use compsum::pipeline::{load_model, summarize, SummarizeConfig};
use compsum::rouge::{approx_oracle_score, rouge_l, rouge_n, PreprocessConfig};
use compsum::rules::extract_options;
use compsum::treebank::parse_ptb;
use compsum::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Model = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsRougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// A loaded model. Opaque to C callers.
pub struct CsModel {
    inner: compsum::model::Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } => CsStatus::Io,
            Error::ModelFormat(_) | Error::ModelVersion { .. } => CsStatus::Model,
            Error::Parse { .. }
            | Error::CorpusLine { .. }
            | Error::TokenMismatch { .. }
            | Error::Json(_) => CsStatus::Parse,
            _ => CsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CsStatus::Internal
        }
    }
}

/// # Safety
/// `s` must be null or point to a nul-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(CsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(CsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(CsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(CsStatus::Internal, "output contains a nul byte".into()))
}

fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Library version as a static string; never free it.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a model file. On success `*out` owns the model.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_model_load(path: *const c_char, out: *mut *mut CsModel) -> CsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let path = text(path, "path")?;
        let inner = load_model(path)?;
        *out = Box::into_raw(Box::new(CsModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a pointer from [`cs_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_model_free(model: *mut CsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Summarizes one document given as a JSON corpus record. `*out_json`
/// receives the summary as JSON; free it with [`cs_string_free`].
///
/// # Safety
/// `model` must come from [`cs_model_load`]; `doc_json` must be a
/// nul-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_summarize(
    model: *const CsModel,
    doc_json: *const c_char,
    k: usize,
    tau: f64,
    dedup: bool,
    out_json: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let model = model
            .as_ref()
            .ok_or_else(|| Failure(CsStatus::NullPointer, "model is null".into()))?;
        let record: DocumentRecord =
            serde_json::from_str(text(doc_json, "doc_json")?).map_err(Error::from)?;
        let doc = record.into_document()?;
        let cfg = SummarizeConfig {
            k,
            tau,
            dedup,
            ..SummarizeConfig::default()
        };
        let summary = summarize(&model.inner, &doc, &cfg)?;
        *out_json = to_c_string(serde_json::to_string(&summary).map_err(Error::from)?)?;
        Ok(())
    })
}

/// Compression options of one bracketed parse, as a JSON array.
///
/// # Safety
/// `parse` must be a nul-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_extract_options(
    parse: *const c_char,
    out_json: *mut *mut c_char,
) -> CsStatus {
    guard(|| {
        out_ptr(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let tree = parse_ptb(text(parse, "parse")?)?;
        let opts = extract_options(&tree);
        *out_json = to_c_string(serde_json::to_string(&opts).map_err(Error::from)?)?;
        Ok(())
    })
}

/// ROUGE of whitespace-tokenized `candidate` against `reference`. `n` is
/// 1 or 2 for ROUGE-N, 0 for ROUGE-L.
///
/// # Safety
/// Both strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_rouge(
    candidate: *const c_char,
    reference: *const c_char,
    n: u32,
    out: *mut CsRougeScore,
) -> CsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let c = words(text(candidate, "candidate")?);
        let r = words(text(reference, "reference")?);
        let s = match n {
            0 => rouge_l(&c, &r),
            1 | 2 => rouge_n(&c, &[r], n as usize),
            _ => {
                return Err(Failure(
                    CsStatus::InvalidArgument,
                    format!("n must be 0, 1 or 2 (got {n})"),
                ))
            }
        };
        *out = CsRougeScore {
            precision: s.precision,
            recall: s.recall,
            f1: s.f1,
        };
        Ok(())
    })
}

/// Mean of ROUGE-1 and ROUGE-2 F1 after lowercasing, stopword removal and
/// stemming, as used to build oracles.
///
/// # Safety
/// Both strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cs_approx_score(
    candidate: *const c_char,
    reference: *const c_char,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let c = words(text(candidate, "candidate")?);
        let r = words(text(reference, "reference")?);
        *out = approx_oracle_score(&c, &r, &PreprocessConfig::oracle());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
