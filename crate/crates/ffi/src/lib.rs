//! C ABI over `fl_core`.
//!
//! Every fallible function returns an [`FlStatus`]; on failure a message is
//! available from [`fl_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fl_core::expert::{Answer, ExpertType, GroundTruth, Label};
use fl_core::fpi::{Diagnosis, Fpi};
use fl_core::heuristics::HeuristicId;
use fl_core::logic::AxiomId;
use fl_core::search::SearchConfig;
use fl_core::session::{Session, SessionConfig, Status};
use fl_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NoViolation = 4,
    NoDiagnosis = 5,
    InvalidArgument = 6,
    InvalidAnswer = 7,
    SessionFinished = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

/// A parsed knowledge base.
pub struct FlKb {
    fpi: Fpi,
}

/// An interactive session.
pub struct FlSession {
    session: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse(_) => FlStatus::Parse,
            Error::NoViolation => FlStatus::NoViolation,
            Error::NoDiagnosis => FlStatus::NoDiagnosis,
            Error::InvalidAnswer(_) | Error::UnknownAxiom(_) => FlStatus::InvalidAnswer,
            Error::InvalidConfig(_) | Error::InvalidGroundTruth(_) => FlStatus::InvalidArgument,
            Error::SessionFinished => FlStatus::SessionFinished,
            _ => FlStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: FlStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FlStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(FlStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(FlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().map_or_else(|| fail(FlStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(FlStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(FlStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `ids` into `buf` when it fits; `len` always receives the count.
unsafe fn write_ids(ids: &[AxiomId], buf: *mut u32, cap: usize, len: *mut usize) -> Result<(), Failure> {
    let n = ids.len();
    *out_arg(len, "len")? = n;
    if n > cap {
        return fail(FlStatus::BufferTooSmall, format!("{n} ids do not fit into a buffer of {cap}"));
    }
    if n > 0 && buf.is_null() {
        return fail(FlStatus::NullPointer, "buf is null");
    }
    for (i, id) in ids.iter().enumerate() {
        *buf.add(i) = id.0;
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses KB text. On success `*out` owns a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fl_kb_parse(text: *const c_char, out: *mut *mut FlKb) -> FlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let fpi = Fpi::parse(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(FlKb { fpi }));
        Ok(())
    })
}

/// Number of possibly faulty axioms.
///
/// # Safety
/// `kb` must come from [`fl_kb_parse`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fl_kb_num_axioms(kb: *const FlKb, out: *mut usize) -> FlStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(kb, "kb")?.fpi.o().len();
        Ok(())
    })
}

/// # Safety
/// `kb` must come from [`fl_kb_parse`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fl_kb_free(kb: *mut FlKb) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Starts a session on a copy of `kb`. `heuristic` is one of ENT, SPL, RIO,
/// RND, BME, KL, EMCb.
///
/// # Safety
/// `kb` must be a live handle, `heuristic` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_new(
    kb: *const FlKb,
    heuristic: *const c_char,
    singleton: bool,
    seed: u64,
    out: *mut *mut FlSession,
) -> FlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let kb = ref_arg(kb, "kb")?;
        let h: HeuristicId = str_arg(heuristic, "heuristic")?.parse()?;
        let config = SessionConfig::new(SearchConfig::new(h, singleton, seed), None, seed);
        let session = Session::start(kb.fpi.clone(), config)?;
        *out = Box::into_raw(Box::new(FlSession { session }));
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`fl_session_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fl_session_free(s: *mut FlSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Whether the session still awaits an answer.
///
/// # Safety
/// `s` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_is_running(s: *const FlSession, out: *mut bool) -> FlStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(s, "session")?.session.is_running();
        Ok(())
    })
}

/// Number of answered queries.
///
/// # Safety
/// `s` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_step_count(s: *const FlSession, out: *mut usize) -> FlStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(s, "session")?.session.step_count();
        Ok(())
    })
}

/// Number of diagnoses still considered.
///
/// # Safety
/// `s` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_remaining(s: *const FlSession, out: *mut usize) -> FlStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(s, "session")?.session.diagnoses().len();
        Ok(())
    })
}

/// Axiom ids of the current query. Returns `BufferTooSmall` with `*len` set
/// when `cap` is too small; `*len` is 0 once the session is finished.
///
/// # Safety
/// `s` must be a live handle, `buf` must hold `cap` values, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_query(s: *const FlSession, buf: *mut u32, cap: usize, len: *mut usize) -> FlStatus {
    guard(|| {
        let s = ref_arg(s, "session")?;
        let q = s.session.pending().map(|p| p.query.clone()).unwrap_or_default();
        write_ids(&q, buf, cap, len)
    })
}

/// Answers the current query as a whole: `yes` means every axiom holds.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fl_session_answer_whole(s: *mut FlSession, yes: bool) -> FlStatus {
    guard(|| {
        let s = &mut out_arg(s, "session")?.session;
        let Some(p) = s.pending() else { return Err(Error::SessionFinished.into()) };
        let ans = Answer::whole(&p.query, if yes { Label::Y } else { Label::N });
        Ok(s.submit(ans)?)
    })
}

/// Labels some axioms of the current query; `labels[i]` nonzero means `ids[i]`
/// holds. Some label must be zero unless every query axiom is labelled.
///
/// # Safety
/// `s` must be a live handle; `ids` and `labels` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn fl_session_answer_axioms(
    s: *mut FlSession,
    ids: *const u32,
    labels: *const u8,
    n: usize,
) -> FlStatus {
    guard(|| {
        let s = &mut out_arg(s, "session")?.session;
        let ids = slice_arg(ids, n, "ids")?;
        let labels = slice_arg(labels, n, "labels")?;
        let Some(p) = s.pending() else { return Err(Error::SessionFinished.into()) };
        let pairs: Vec<(AxiomId, Label)> =
            ids.iter().zip(labels).map(|(&i, &l)| (AxiomId(i), if l != 0 { Label::Y } else { Label::N })).collect();
        let ans = Answer::from_labels(&p.query, &pairs)?;
        Ok(s.submit(ans)?)
    })
}

/// Runs the session to the end with a simulated expert of type `expert`
/// (query-based, minimalist, pragmatist, maximalist) answering by the
/// actual diagnosis `truth`.
///
/// # Safety
/// `s` must be a live handle, `truth` must hold `n` ids, `expert` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fl_session_run_simulated(
    s: *mut FlSession,
    truth: *const u32,
    n: usize,
    expert: *const c_char,
) -> FlStatus {
    guard(|| {
        let s = &mut out_arg(s, "session")?.session;
        let truth: Diagnosis = slice_arg(truth, n, "truth")?.iter().map(|&i| AxiomId(i)).collect();
        let t: ExpertType = str_arg(expert, "expert")?.parse()?;
        let gt = GroundTruth::new(truth);
        gt.validate(s.fpi())?;
        Ok(s.run_simulated(&gt, t)?)
    })
}

/// Axiom ids of the final diagnosis. `InvalidArgument` while running.
///
/// # Safety
/// `s` must be a live handle, `buf` must hold `cap` values, `len` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_final_diagnosis(
    s: *const FlSession,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> FlStatus {
    guard(|| match ref_arg(s, "session")?.session.status() {
        Status::Done { final_diagnosis } => write_ids(&final_diagnosis.iter().collect::<Vec<_>>(), buf, cap, len),
        Status::Running => fail(FlStatus::InvalidArgument, "the session is still running"),
        Status::Failed { reason } => fail(FlStatus::Internal, reason.clone()),
    })
}

/// The session log as JSON lines. Release with [`fl_string_free`].
///
/// # Safety
/// `s` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fl_session_log_jsonl(s: *const FlSession, out: *mut *mut c_char) -> FlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let mut buf = Vec::new();
        ref_arg(s, "session")?.session.write_log(&mut buf)?;
        let c = CString::new(buf).or_else(|_| fail(FlStatus::Internal, "log contains NUL"))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_carry_messages() {
        let mut kb = ptr::null_mut();
        let text = CString::new("o: a ->").unwrap();
        assert_eq!(unsafe { fl_kb_parse(text.as_ptr(), &mut kb) }, FlStatus::Parse);
        assert!(kb.is_null());
        let msg = unsafe { CStr::from_ptr(fl_last_error_message()) }.to_str().unwrap();
        assert!(msg.contains("line 1"), "{msg}");
        assert_eq!(unsafe { fl_kb_parse(ptr::null(), &mut kb) }, FlStatus::NullPointer);
    }
}
