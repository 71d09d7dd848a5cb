use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fl_core::examples::RUNNING_EXAMPLE;
use fl_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn parse(text: &str) -> *mut FlKb {
    let mut kb = ptr::null_mut();
    assert_eq!(unsafe { fl_kb_parse(cstr(text).as_ptr(), &mut kb) }, FlStatus::Ok);
    kb
}

fn query(s: *const FlSession) -> Vec<u32> {
    let mut buf = [0u32; 64];
    let mut len = 0;
    assert_eq!(unsafe { fl_session_query(s, buf.as_mut_ptr(), buf.len(), &mut len) }, FlStatus::Ok);
    buf[..len].to_vec()
}

#[test]
fn interactive_session_finds_the_faulty_axiom() {
    let kb = parse(RUNNING_EXAMPLE);
    let mut n = 0;
    assert_eq!(unsafe { fl_kb_num_axioms(kb, &mut n) }, FlStatus::Ok);
    assert_eq!(n, 3);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fl_session_new(kb, cstr("ENT").as_ptr(), true, 5, &mut s) }, FlStatus::Ok);
    unsafe { fl_kb_free(kb) };
    let mut running = false;
    loop {
        assert_eq!(unsafe { fl_session_is_running(s, &mut running) }, FlStatus::Ok);
        if !running {
            break;
        }
        let q = query(s);
        assert_eq!(q.len(), 1);
        let labels: Vec<u8> = q.iter().map(|&id| u8::from(id != 3)).collect();
        assert_eq!(unsafe { fl_session_answer_axioms(s, q.as_ptr(), labels.as_ptr(), q.len()) }, FlStatus::Ok);
    }
    let mut buf = [0u32; 4];
    let mut len = 0;
    assert_eq!(unsafe { fl_session_final_diagnosis(s, buf.as_mut_ptr(), 4, &mut len) }, FlStatus::Ok);
    assert_eq!(&buf[..len], &[3]);
    assert!(query(s).is_empty());
    assert_eq!(unsafe { fl_session_answer_whole(s, true) }, FlStatus::SessionFinished);

    let mut log = ptr::null_mut();
    assert_eq!(unsafe { fl_session_log_jsonl(s, &mut log) }, FlStatus::Ok);
    let text = unsafe { CStr::from_ptr(log) }.to_str().unwrap().to_owned();
    unsafe { fl_string_free(log) };
    assert!(text.lines().count() >= 2);
    assert!(text.lines().next().unwrap().contains("initialDiagnoses"));
    unsafe { fl_session_free(s) };
}

#[test]
fn simulated_session_and_error_codes() {
    let kb = parse(RUNNING_EXAMPLE);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fl_session_new(kb, cstr("nope").as_ptr(), false, 1, &mut s) }, FlStatus::InvalidArgument);
    assert!(s.is_null());
    assert_eq!(unsafe { fl_session_new(kb, cstr("SPL").as_ptr(), false, 1, &mut s) }, FlStatus::Ok);

    let mut len = 0;
    let mut tiny = [0u32; 0];
    let status = unsafe { fl_session_final_diagnosis(s, tiny.as_mut_ptr(), 0, &mut len) };
    assert_eq!(status, FlStatus::InvalidArgument);
    let q = query(s);
    if !q.is_empty() {
        assert_eq!(unsafe { fl_session_query(s, tiny.as_mut_ptr(), 0, &mut len) }, FlStatus::BufferTooSmall);
        assert_eq!(len, q.len());
    }
    let bogus = [99u32];
    let no = [0u8];
    assert_eq!(unsafe { fl_session_answer_axioms(s, bogus.as_ptr(), no.as_ptr(), 1) }, FlStatus::InvalidAnswer);
    assert!(!fl_last_error_message().is_null());

    let truth = [2u32];
    let status = unsafe { fl_session_run_simulated(s, truth.as_ptr(), 1, cstr("pragmatist").as_ptr()) };
    assert_eq!(status, FlStatus::Ok);
    assert!(fl_last_error_message().is_null());
    let mut buf = [0u32; 4];
    assert_eq!(unsafe { fl_session_final_diagnosis(s, buf.as_mut_ptr(), 4, &mut len) }, FlStatus::Ok);
    assert_eq!(&buf[..len], &[2]);
    unsafe {
        fl_session_free(s);
        fl_kb_free(kb);
    }
}

#[test]
fn violation_free_kb_is_reported() {
    let kb = parse("o: a -> b\nb: a\n");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fl_session_new(kb, cstr("ENT").as_ptr(), true, 0, &mut s) }, FlStatus::NoViolation);
    assert_eq!(unsafe { fl_session_new(ptr::null(), cstr("ENT").as_ptr(), true, 0, &mut s) }, FlStatus::NullPointer);
    unsafe { fl_kb_free(kb) };
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fl_ffi.h")
}

#[test]
fn header_declares_the_api_and_compiles() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in ["fl_kb_parse", "fl_session_new", "fl_session_answer_axioms", "fl_last_error_message", "FL_STATUS_OK"] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    for compiler in ["cc", "c++"] {
        let lang = if compiler == "cc" { "c" } else { "c++" };
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header())
            .output()
            .expect("a C compiler on PATH");
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "fl_ffi.h"

int main(void) {
    const char *kb_text = "o: ar -> w\no: w -> au\no: au -> e & p\nb: ar\nn: e\n";
    FlKb *kb = NULL;
    FlSession *s = NULL;
    uint32_t truth[] = {3};
    uint32_t out[8];
    size_t len = 0;
    if (fl_kb_parse(kb_text, &kb) != FL_STATUS_OK) return 1;
    if (fl_session_new(kb, "ENT", true, 7, &s) != FL_STATUS_OK) return 2;
    if (fl_session_run_simulated(s, truth, 1, "minimalist") != FL_STATUS_OK) return 3;
    if (fl_session_final_diagnosis(s, out, 8, &len) != FL_STATUS_OK) return 4;
    printf("%zu:%u\n", len, out[0]);
    fl_session_free(s);
    fl_kb_free(kb);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libfl_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("fl_ffi_smoke.c");
    let bin = dir.join("fl_ffi_smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "1:3");
}
