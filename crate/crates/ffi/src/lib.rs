//! C interface to the logiceval toolkit.
//!
//! Every fallible function returns an [`LeStatus`]; on failure a message is
//! kept per thread and read back with [`le_last_error_message`]. Formulas and
//! chains are opaque handles released with their `_free` function. Strings
//! returned through out-pointers are owned by the caller and released with
//! [`le_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use logiceval::logic::{self, Budget, EntailmentStatus, Formula};
use logiceval::probing::{self, CssReading, PredictionTrace};
use logiceval::proof::{self, Answer, Dialect, ProofChain};
use logiceval::reward::{self, RewardInputs, RewardWeights};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeEntailment {
    Valid = 0,
    Invalid = 1,
    Unknown = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeAnswer {
    /// No marker in the text.
    None = 0,
    Proved = 1,
    Disproved = 2,
    Unknown = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeDialect {
    Symbolic = 0,
    Natural = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeCssReading {
    Suffix = 0,
    Local = 1,
}

/// Search limits. `time_limit_ms == 0` disables the wall-clock cap.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LeBudget {
    pub max_depth: u32,
    pub max_nodes: u64,
    pub time_limit_ms: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LeRewardInputs {
    pub r_acc: f64,
    pub r_valid: f64,
    pub r_relevant: f64,
    pub r_atomic: f64,
    pub r_css: f64,
    /// When false, `r_css` is ignored and counts as 0.
    pub has_css: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct LeRewardWeights {
    pub w_v: f64,
    pub w_r: f64,
    pub w_a: f64,
    pub w_c: f64,
}

/// Opaque parsed formula.
pub struct LeFormula(Formula);

/// Opaque parsed proof chain.
pub struct LeChain(ProofChain);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes replaced"));
}

struct Fail(LeStatus, String);

impl Fail {
    fn null(what: &str) -> Fail {
        Fail(LeStatus::NullPointer, format!("{what} is null"))
    }
    fn arg(msg: impl Into<String>) -> Fail {
        Fail(LeStatus::InvalidArgument, msg.into())
    }
}

/// Runs `f`, records any failure or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LeStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            LeStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(LeStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail::null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes replaced").into_raw()
}

/// Message of the last failed call on this thread, or "" if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn le_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn le_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses formula text (unicode or ASCII operators).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_formula_parse(text_ptr: *const c_char, out_formula: *mut *mut LeFormula) -> LeStatus {
    guard(|| {
        let out_formula = out(out_formula, "out_formula")?;
        *out_formula = ptr::null_mut();
        let t = text(text_ptr, "text")?;
        let f = logic::parse_formula(t).map_err(|e| Fail(LeStatus::ParseError, e.to_string()))?;
        *out_formula = Box::into_raw(Box::new(LeFormula(f)));
        Ok(())
    })
}

/// Canonical text of a formula; free the result with `le_string_free`.
///
/// # Safety
/// `formula` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_formula_print(formula: *const LeFormula, out_text: *mut *mut c_char) -> LeStatus {
    guard(|| {
        let out_text = out(out_text, "out_text")?;
        let f = formula.as_ref().ok_or_else(|| Fail::null("formula"))?;
        *out_text = c_string(&logic::print_formula(&f.0));
        Ok(())
    })
}

/// # Safety
/// `formula` must come from `le_formula_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_formula_free(formula: *mut LeFormula) {
    if !formula.is_null() {
        drop(Box::from_raw(formula));
    }
}

/// Decides whether the premises entail the conclusion. `min_rule_count` is
/// set to the derivation length for valid verdicts and -1 otherwise.
///
/// # Safety
/// `premises` must point to `n_premises` live handles; the other pointers
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn le_entails(
    premises: *const *const LeFormula,
    n_premises: usize,
    conclusion: *const LeFormula,
    budget: LeBudget,
    out_status: *mut LeEntailment,
    out_min_rule_count: *mut i64,
) -> LeStatus {
    guard(|| {
        let out_status = out(out_status, "out_status")?;
        let out_min = out(out_min_rule_count, "out_min_rule_count")?;
        let ps: Vec<Formula> = slice(premises, n_premises, "premises")?
            .iter()
            .map(|p| p.as_ref().map(|f| f.0.clone()).ok_or_else(|| Fail::null("premise")))
            .collect::<Result<_, _>>()?;
        let c = conclusion.as_ref().ok_or_else(|| Fail::null("conclusion"))?;
        let b = Budget {
            max_depth: budget.max_depth as usize,
            max_nodes: usize::try_from(budget.max_nodes).unwrap_or(usize::MAX),
            time_limit: (budget.time_limit_ms > 0).then(|| Duration::from_millis(budget.time_limit_ms)),
        };
        let v = logic::entails(&ps, &c.0, b).map_err(|e| Fail::arg(e.to_string()))?;
        *out_status = match v.status {
            EntailmentStatus::Valid => LeEntailment::Valid,
            EntailmentStatus::Invalid => LeEntailment::Invalid,
            EntailmentStatus::Unknown => LeEntailment::Unknown,
        };
        *out_min = v.min_rule_count.map_or(-1, |n| n as i64);
        Ok(())
    })
}

/// The default search budget.
#[no_mangle]
pub extern "C" fn le_default_budget() -> LeBudget {
    let b = Budget::default();
    LeBudget {
        max_depth: b.max_depth as u32,
        max_nodes: b.max_nodes as u64,
        time_limit_ms: b.time_limit.map_or(0, |d| d.as_millis() as u64),
    }
}

/// Last answer marker in the text.
///
/// # Safety
/// `text` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_extract_answer(text_ptr: *const c_char, out_answer: *mut LeAnswer) -> LeStatus {
    guard(|| {
        let out_answer = out(out_answer, "out_answer")?;
        *out_answer = match proof::extract_answer(text(text_ptr, "text")?) {
            None => LeAnswer::None,
            Some(Answer::Proved) => LeAnswer::Proved,
            Some(Answer::Disproved) => LeAnswer::Disproved,
            Some(Answer::Unknown) => LeAnswer::Unknown,
        };
        Ok(())
    })
}

/// Text after the last occurrence of `tag`; free the result with
/// `le_string_free`.
///
/// # Safety
/// Both strings must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_strip_preamble(text_ptr: *const c_char, tag: *const c_char, out_text: *mut *mut c_char) -> LeStatus {
    guard(|| {
        let out_text = out(out_text, "out_text")?;
        let s = proof::strip_preamble(text(text_ptr, "text")?, text(tag, "tag")?);
        *out_text = c_string(s);
        Ok(())
    })
}

/// Parses a stepwise solution. Never fails on content: malformed chains are
/// flagged inside the JSON form.
///
/// # Safety
/// `text` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_chain_parse(text_ptr: *const c_char, dialect: LeDialect, out_chain: *mut *mut LeChain) -> LeStatus {
    guard(|| {
        let out_chain = out(out_chain, "out_chain")?;
        *out_chain = ptr::null_mut();
        let d = match dialect {
            LeDialect::Symbolic => Dialect::Symbolic,
            LeDialect::Natural => Dialect::Natural,
        };
        *out_chain = Box::into_raw(Box::new(LeChain(proof::parse_proof(text(text_ptr, "text")?, d))));
        Ok(())
    })
}

/// Number of steps in a chain.
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_chain_len(chain: *const LeChain, out_len: *mut usize) -> LeStatus {
    guard(|| {
        let out_len = out(out_len, "out_len")?;
        *out_len = chain.as_ref().ok_or_else(|| Fail::null("chain"))?.0.len();
        Ok(())
    })
}

/// One-line JSON form of a chain; free the result with `le_string_free`.
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn le_chain_to_json(chain: *const LeChain, out_json: *mut *mut c_char) -> LeStatus {
    guard(|| {
        let out_json = out(out_json, "out_json")?;
        let c = chain.as_ref().ok_or_else(|| Fail::null("chain"))?;
        *out_json = c_string(&c.0.to_json_line());
        Ok(())
    })
}

/// # Safety
/// `chain` must come from `le_chain_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn le_chain_free(chain: *mut LeChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Weighted reward total.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn le_compute_reward(inputs: *const LeRewardInputs, weights: *const LeRewardWeights, out_total: *mut f64) -> LeStatus {
    guard(|| {
        let out_total = out(out_total, "out_total")?;
        let i = inputs.as_ref().ok_or_else(|| Fail::null("inputs"))?;
        let w = weights.as_ref().ok_or_else(|| Fail::null("weights"))?;
        let inputs = RewardInputs {
            r_acc: i.r_acc,
            r_valid: i.r_valid,
            r_relevant: i.r_relevant,
            r_atomic: i.r_atomic,
            r_css: i.has_css.then_some(i.r_css),
        };
        let weights = RewardWeights {
            w_v: w.w_v,
            w_r: w.w_r,
            w_a: w.w_a,
            w_c: w.w_c,
        };
        *out_total = reward::compute_reward(&inputs, &weights).map_err(|e| Fail::arg(e.to_string()))?;
        Ok(())
    })
}

/// ½(TPR + TNR) with `true` as the positive class.
///
/// # Safety
/// `predictions` and `labels` must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn le_balanced_accuracy(predictions: *const bool, labels: *const bool, n: usize, out_score: *mut f64) -> LeStatus {
    guard(|| {
        let out_score = out(out_score, "out_score")?;
        let p = slice(predictions, n, "predictions")?;
        let l = slice(labels, n, "labels")?;
        *out_score = probing::balanced_accuracy(p, l).map_err(|e| Fail::arg(e.to_string()))?;
        Ok(())
    })
}

/// Mean span over traces packed back to back: trace `i` has `lengths[i]`
/// entries of `correct`.
///
/// # Safety
/// `lengths` must hold `n_traces` values and `correct` their sum.
#[no_mangle]
pub unsafe extern "C" fn le_css_score(
    correct: *const bool,
    lengths: *const usize,
    n_traces: usize,
    reading: LeCssReading,
    out_score: *mut f64,
) -> LeStatus {
    guard(|| {
        let out_score = out(out_score, "out_score")?;
        let lens = slice(lengths, n_traces, "lengths")?;
        let total = lens
            .iter()
            .try_fold(0usize, |a, &k| a.checked_add(k))
            .ok_or_else(|| Fail::arg("trace lengths overflow"))?;
        let flat = slice(correct, total, "correct")?;
        let mut at = 0;
        let traces: Vec<PredictionTrace> = lens
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let t = PredictionTrace {
                    problem_id: format!("trace{i}"),
                    correct: flat[at..at + k].to_vec(),
                };
                at += k;
                t
            })
            .collect();
        let r = match reading {
            LeCssReading::Suffix => CssReading::Suffix,
            LeCssReading::Local => CssReading::Local,
        };
        *out_score = probing::css_score(&traces, r).map_err(|e| Fail::arg(e.to_string()))?;
        Ok(())
    })
}
