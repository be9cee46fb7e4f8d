//! C ABI over the fairthresh solvers.
//!
//! Instances and solver results are opaque heap handles created by
//! `ft_*_new` / `ft_solve*` and released with the matching `*_free`.
//! Every fallible call returns an [`FtStatus`]; on failure a description
//! is available from [`ft_last_error_message`] until the next failing call
//! on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fairthresh::model::{GroupSpec, Proportion, ScoreDistribution, ScoreGrid, SuccessCurve};
use fairthresh::objectives::{outcome_curve, utility_curve, ConstraintWeights, OutcomeFn, OutcomeRule, UtilityFn};
use fairthresh::solvers::{solve, Criterion, SoftPenalty, SolverResult};
use fairthresh::{Error, Group, Instance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    NullPointer = 1,
    /// Malformed data (bad pmf, size mismatch, unknown enum value).
    InvalidInput = 2,
    /// Well-formed instance that violates a solver precondition.
    Precondition = 3,
    /// Caller buffer too small; the needed length was written.
    BufferTooSmall = 4,
    /// Internal panic caught at the boundary.
    Internal = 5,
}

// Enum arguments cross the boundary as u32 and are range-checked.

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtCriterion {
    MaxUtil = 0,
    DemParity = 1,
    EqOpt = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtGroup {
    A = 0,
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtCurve {
    Outcome = 0,
    Utility = 1,
}

/// Opaque two-group instance.
pub struct FtInstance(Instance);

/// Opaque solver output.
pub struct FtResult(SolverResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FtStatus {
    if e.is_precondition() {
        FtStatus::Precondition
    } else {
        FtStatus::InvalidInput
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), FtStatus>>(f: F) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FtStatus::Internal
        }
    }
}

fn lift<T>(r: fairthresh::Result<T>) -> Result<T, FtStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> FtStatus {
    set_error(format!("{what} is null"));
    FtStatus::NullPointer
}

/// # Safety
/// `p` must be null or point to `n` readable doubles.
unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], FtStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

fn bad_enum(what: &str, v: u32) -> FtStatus {
    set_error(format!("unknown {what} value {v}"));
    FtStatus::InvalidInput
}

fn group_of(g: u32) -> Result<Group, FtStatus> {
    match g {
        x if x == FtGroup::A as u32 => Ok(Group::A),
        x if x == FtGroup::B as u32 => Ok(Group::B),
        _ => Err(bad_enum("group", g)),
    }
}

#[allow(clippy::too_many_arguments)]
unsafe fn build(
    size: usize,
    pmf_a: *const f64,
    rho_a: *const f64,
    pmf_b: *const f64,
    rho_b: *const f64,
    share_a: f64,
    utility: UtilityFn,
    outcome: OutcomeFn,
    out: *mut *mut FtInstance,
) -> Result<(), FtStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    let group = |name: &str, pmf: &[f64], rho: &[f64], share: f64| -> fairthresh::Result<GroupSpec> {
        GroupSpec::new(
            name,
            ScoreDistribution::new(pmf.to_vec())?,
            SuccessCurve::new(rho.to_vec())?,
            Proportion::new(share)?,
        )
    };
    let a = lift(group("A", slice(pmf_a, size, "pmf_a")?, slice(rho_a, size, "rho_a")?, share_a))?;
    let b = lift(group("B", slice(pmf_b, size, "pmf_b")?, slice(rho_b, size, "rho_b")?, 1.0 - share_a))?;
    let grid = lift(ScoreGrid::new(size))?;
    let inst = lift(Instance::new(grid, a, b, utility, outcome))?;
    *out = Box::into_raw(Box::new(FtInstance(inst)));
    Ok(())
}

/// Instance with affine utility `gain*rho + loss*(1-rho)` and affine
/// score change `outcome_gain*rho + outcome_penalty*(1-rho)`.
///
/// # Safety
/// The four arrays must hold `size` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_instance_new_affine(
    size: usize,
    pmf_a: *const f64,
    rho_a: *const f64,
    pmf_b: *const f64,
    rho_b: *const f64,
    share_a: f64,
    utility_gain: f64,
    utility_loss: f64,
    outcome_gain: f64,
    outcome_penalty: f64,
    out: *mut *mut FtInstance,
) -> FtStatus {
    guard(|| {
        build(
            size,
            pmf_a,
            rho_a,
            pmf_b,
            rho_b,
            share_a,
            UtilityFn::Affine { gain: utility_gain, loss: utility_loss },
            OutcomeFn::affine(outcome_gain, outcome_penalty),
            out,
        )
    })
}

/// Instance with per-score utility and score-change tables shared by both
/// groups.
///
/// # Safety
/// All six arrays must hold `size` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_instance_new_tables(
    size: usize,
    pmf_a: *const f64,
    rho_a: *const f64,
    pmf_b: *const f64,
    rho_b: *const f64,
    share_a: f64,
    utility: *const f64,
    outcome: *const f64,
    out: *mut *mut FtInstance,
) -> FtStatus {
    guard(|| {
        let u = slice(utility, size, "utility")?.to_vec();
        let d = slice(outcome, size, "outcome")?.to_vec();
        build(
            size,
            pmf_a,
            rho_a,
            pmf_b,
            rho_b,
            share_a,
            UtilityFn::Table(u),
            OutcomeFn::new(OutcomeRule::Table(d)),
            out,
        )
    })
}

/// # Safety
/// `inst` must come from `ft_instance_new_*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ft_instance_free(inst: *mut FtInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

unsafe fn finish_solve(
    inst: *const FtInstance,
    out: *mut *mut FtResult,
    f: impl FnOnce(&Instance) -> fairthresh::Result<SolverResult>,
) -> FtStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(f(&inst.0))?;
        *out = Box::into_raw(Box::new(FtResult(r)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be a live instance handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_solve(inst: *const FtInstance, criterion: u32, out: *mut *mut FtResult) -> FtStatus {
    let c = match criterion {
        x if x == FtCriterion::MaxUtil as u32 => Criterion::MaxUtil,
        x if x == FtCriterion::DemParity as u32 => Criterion::DemParity,
        x if x == FtCriterion::EqOpt as u32 => Criterion::EqOpt,
        _ => return bad_enum("criterion", criterion),
    };
    finish_solve(inst, out, |i| solve(i, c, None, None, None))
}

/// Soft demographic parity with penalty `lambda * |beta_A - beta_B|`.
///
/// # Safety
/// `inst` must be a live instance handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_solve_soft(inst: *const FtInstance, lambda: f64, out: *mut *mut FtResult) -> FtStatus {
    finish_solve(inst, out, |i| {
        let w = ConstraintWeights::demographic_parity(i.size());
        solve(i, Criterion::Soft, Some(&w), Some(&SoftPenalty::absolute(lambda)?), None)
    })
}

/// Best mean-score change for each group, giving up at most `budget`
/// utility relative to MaxUtil.
///
/// # Safety
/// `inst` must be a live instance handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_solve_outcome_based(
    inst: *const FtInstance,
    budget: f64,
    out: *mut *mut FtResult,
) -> FtStatus {
    finish_solve(inst, out, |i| solve(i, Criterion::OutcomeBased, None, None, Some(budget)))
}

/// # Safety
/// `res` must come from a solve call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ft_result_free(res: *mut FtResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Canonical selection rate, mean-score change and utility of one group.
///
/// # Safety
/// `res` must be a live result handle; output pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn ft_result_group(
    res: *const FtResult,
    group: u32,
    rate: *mut f64,
    outcome: *mut f64,
    utility: *mut f64,
) -> FtStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("result"))?;
        let s = r.0.group(group_of(group)?);
        for (p, v) in [(rate, s.rate), (outcome, s.outcome), (utility, s.utility)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Threshold form of one group's policy: everyone above `cutoff` (1-based)
/// is selected, a `gamma` fraction at `cutoff`.
///
/// # Safety
/// `res` must be a live result handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_result_threshold(
    res: *const FtResult,
    group: u32,
    cutoff: *mut usize,
    gamma: *mut f64,
) -> FtStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("result"))?;
        if cutoff.is_null() || gamma.is_null() {
            return Err(null("output"));
        }
        let p = &r.0.group(group_of(group)?).policy;
        *cutoff = p.cutoff();
        *gamma = p.gamma();
        Ok(())
    })
}

/// Share-weighted utility of the result.
///
/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_result_total_utility(res: *const FtResult, out: *mut f64) -> FtStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = r.0.total_utility;
        Ok(())
    })
}

/// Breakpoints of a group's outcome or utility curve over selection rates.
/// Writes the breakpoint count to `len`; returns `BufferTooSmall` without
/// touching `xs`/`ys` when `capacity` is less than that.
///
/// # Safety
/// `xs` and `ys` must hold `capacity` doubles (may be null when
/// `capacity` is 0); `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_curve(
    inst: *const FtInstance,
    group: u32,
    kind: u32,
    xs: *mut f64,
    ys: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> FtStatus {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        let g = group_of(group)?;
        let curve = lift(match kind {
            x if x == FtCurve::Outcome as u32 => outcome_curve(&inst.0, g),
            x if x == FtCurve::Utility as u32 => utility_curve(&inst.0, g),
            _ => return Err(bad_enum("curve", kind)),
        })?;
        let n = curve.breakpoints().len();
        *len = n;
        if capacity < n {
            set_error(format!("buffer holds {capacity} points, curve has {n}"));
            return Err(FtStatus::BufferTooSmall);
        }
        if xs.is_null() || ys.is_null() {
            return Err(null("xs/ys"));
        }
        ptr::copy_nonoverlapping(curve.breakpoints().as_ptr(), xs, n);
        ptr::copy_nonoverlapping(curve.values().as_ptr(), ys, n);
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
