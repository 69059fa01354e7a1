//! C ABI over `torus_mobius`.
//!
//! Every function returns a [`TmStatus`]; results go through out-pointers.
//! States are opaque handles owned by the caller and released with the
//! matching `*_free`. On failure, [`tm_last_error_message`] describes the
//! most recent error on the calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use torus_mobius::coherent::{
    mobius_coherent, mobius_label_value, overlap_theta, torus_coherent, CoherentLabel, MobiusLabel,
};
use torus_mobius::entangle::{apply_d, apply_m_ss, entropy, ideal_entangled_pair, schmidt};
use torus_mobius::lattice::{self, Axis, LatticeOp, LatticeState, ModeIndex, Sign};
use torus_mobius::theta::{gaussian_lattice_sum, theta3, Theta3Params};
use torus_mobius::two_mode::TwoModeState;
use torus_mobius::Error;

/// Bumped on any incompatible change to the exported signatures.
pub const TM_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Range = 4,
    Contract = 5,
    Singular = 6,
    NoConvergence = 7,
    Panic = 8,
}

impl From<&Error> for TmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => TmStatus::Domain,
            Error::Range { .. } => TmStatus::Range,
            Error::Contract(_) => TmStatus::Contract,
            Error::Singular(_) => TmStatus::Singular,
            Error::NoConvergence { .. } => TmStatus::NoConvergence,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TmComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for TmComplex {
    fn from(z: Complex64) -> Self {
        TmComplex { re: z.re, im: z.im }
    }
}

impl From<TmComplex> for Complex64 {
    fn from(z: TmComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Single-mode lattice state.
pub struct TmLatticeState(LatticeState);

/// Two-mode lattice state.
pub struct TmPairState(TwoModeState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(TmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(TmStatus::from(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(TmStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(TmStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TmStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn lattice_ref<'a>(p: *const TmLatticeState) -> Result<&'a LatticeState, Fail> {
    p.as_ref().map(|s| &s.0).ok_or_else(null)
}

unsafe fn pair_ref<'a>(p: *const TmPairState) -> Result<&'a TwoModeState, Fail> {
    p.as_ref().map(|s| &s.0).ok_or_else(null)
}

fn boxed_lattice(s: LatticeState) -> *mut TmLatticeState {
    Box::into_raw(Box::new(TmLatticeState(s)))
}

fn boxed_pair(s: TwoModeState) -> *mut TmPairState {
    Box::into_raw(Box::new(TmPairState(s)))
}

fn axis(n: u8) -> Result<Axis, Fail> {
    Axis::from_number(n).map_err(Fail::from)
}

fn sign(s: i32) -> Result<Sign, Fail> {
    match s {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(invalid(format!("sign must be +1 or -1, got {s}"))),
    }
}

#[no_mangle]
pub extern "C" fn tm_abi_version() -> u32 {
    TM_ABI_VERSION
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `Θ₃(v|τ)`; requires `Im τ > 0`.
#[no_mangle]
pub unsafe extern "C" fn tm_theta3(v: TmComplex, tau: TmComplex, out: *mut TmComplex) -> TmStatus {
    guard(|| {
        let z = theta3(Theta3Params::new(v.into(), tau.into()))?;
        write(out, z.into())
    })
}

/// `Σ e^{bj − j²}` over all integers.
#[no_mangle]
pub unsafe extern "C" fn tm_gaussian_lattice_sum(b: TmComplex, out: *mut TmComplex) -> TmStatus {
    guard(|| write(out, gaussian_lattice_sum(b.into()).into()))
}

/// Overlap of two torus coherent states via theta functions.
#[no_mangle]
pub unsafe extern "C" fn tm_overlap_theta(
    l1: f64,
    a1: f64,
    l2: f64,
    a2: f64,
    lp1: f64,
    ap1: f64,
    lp2: f64,
    ap2: f64,
    out: *mut TmComplex,
) -> TmStatus {
    guard(|| {
        let z = [CoherentLabel::new(l1, a1)?, CoherentLabel::new(l2, a2)?];
        let zp = [CoherentLabel::new(lp1, ap1)?, CoherentLabel::new(lp2, ap2)?];
        write(out, overlap_theta(&z, &zp)?.into())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tm_mobius_label_value(
    l: f64,
    r: f64,
    phi: f64,
    out: *mut TmComplex,
) -> TmStatus {
    guard(|| {
        let lbl = MobiusLabel::new(l, r, phi)?;
        write(out, mobius_label_value(&lbl).into())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tm_torus_coherent(
    l1: f64,
    a1: f64,
    l2: f64,
    a2: f64,
    cutoff: u32,
    out: *mut *mut TmLatticeState,
) -> TmStatus {
    guard(|| {
        let z = [CoherentLabel::new(l1, a1)?, CoherentLabel::new(l2, a2)?];
        write(out, boxed_lattice(torus_coherent(&z, cutoff)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tm_mobius_coherent(
    l: f64,
    r: f64,
    phi: f64,
    cutoff: u32,
    out: *mut *mut TmLatticeState,
) -> TmStatus {
    guard(|| {
        let lbl = MobiusLabel::new(l, r, phi)?;
        write(out, boxed_lattice(mobius_coherent(&lbl, cutoff)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn tm_basis_state(
    j1: i64,
    j2: i64,
    cutoff: u32,
    out: *mut *mut TmLatticeState,
) -> TmStatus {
    guard(|| {
        write(
            out,
            boxed_lattice(lattice::basis_state(ModeIndex::new(j1, j2), cutoff)?),
        )
    })
}

/// Releases a state; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_state_free(state: *mut TmLatticeState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of stored amplitudes.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_state_len(
    state: *const TmLatticeState,
    out: *mut usize,
) -> TmStatus {
    guard(|| write(out, lattice_ref(state)?.len()))
}

#[no_mangle]
pub unsafe extern "C" fn tm_lattice_state_cutoff(
    state: *const TmLatticeState,
    out: *mut u32,
) -> TmStatus {
    guard(|| write(out, lattice_ref(state)?.cutoff()))
}

/// Amplitude of `|j1, j2⟩`; zero when not stored.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_state_get(
    state: *const TmLatticeState,
    j1: i64,
    j2: i64,
    out: *mut TmComplex,
) -> TmStatus {
    guard(|| write(out, lattice_ref(state)?.get(ModeIndex::new(j1, j2)).into()))
}

/// The `index`-th stored entry in ascending `(j1, j2)` order.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_state_entry(
    state: *const TmLatticeState,
    index: usize,
    j1: *mut i64,
    j2: *mut i64,
    amp: *mut TmComplex,
) -> TmStatus {
    guard(|| {
        let s = lattice_ref(state)?;
        let (j, a) = s
            .iter()
            .nth(index)
            .ok_or_else(|| invalid(format!("entry {index} out of {}", s.len())))?;
        write(j1, j.j1)?;
        write(j2, j.j2)?;
        write(amp, a.into())
    })
}

/// `⟨a|b⟩`; the cutoffs must match.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_inner(
    a: *const TmLatticeState,
    b: *const TmLatticeState,
    out: *mut TmComplex,
) -> TmStatus {
    guard(|| {
        write(
            out,
            lattice::inner(lattice_ref(a)?, lattice_ref(b)?)?.into(),
        )
    })
}

/// Applies an operator given by tag: `identity`, `t`, `ladder+1`, `ladder-2`,
/// `j1`, `m2`, `m1^4`.
#[no_mangle]
pub unsafe extern "C" fn tm_lattice_apply(
    state: *const TmLatticeState,
    op_tag: *const c_char,
    out: *mut *mut TmLatticeState,
) -> TmStatus {
    guard(|| {
        let s = lattice_ref(state)?;
        if op_tag.is_null() {
            return Err(null());
        }
        let tag = CStr::from_ptr(op_tag)
            .to_str()
            .map_err(|_| invalid("operator tag is not UTF-8"))?;
        let op: LatticeOp = tag.parse()?;
        write(out, boxed_lattice(s.apply(op)))
    })
}

/// `(|j⟩|−j′⟩ + |−j⟩|j′⟩)`, normalized.
#[no_mangle]
pub unsafe extern "C" fn tm_pair_ideal(
    j1: i64,
    j2: i64,
    jp1: i64,
    jp2: i64,
    cutoff: u32,
    out: *mut *mut TmPairState,
) -> TmStatus {
    guard(|| {
        let s = ideal_entangled_pair(ModeIndex::new(j1, j2), ModeIndex::new(jp1, jp2), cutoff)?;
        write(out, boxed_pair(s))
    })
}

/// `|a⟩ ⊗ |b⟩`
#[no_mangle]
pub unsafe extern "C" fn tm_pair_product(
    a: *const TmLatticeState,
    b: *const TmLatticeState,
    out: *mut *mut TmPairState,
) -> TmStatus {
    guard(|| {
        write(
            out,
            boxed_pair(TwoModeState::product(lattice_ref(a)?, lattice_ref(b)?)),
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn tm_pair_state_free(state: *mut TmPairState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

#[no_mangle]
pub unsafe extern "C" fn tm_pair_state_len(state: *const TmPairState, out: *mut usize) -> TmStatus {
    guard(|| write(out, pair_ref(state)?.len()))
}

#[no_mangle]
pub unsafe extern "C" fn tm_pair_state_norm(state: *const TmPairState, out: *mut f64) -> TmStatus {
    guard(|| write(out, pair_ref(state)?.norm()))
}

#[no_mangle]
pub unsafe extern "C" fn tm_pair_state_get(
    state: *const TmPairState,
    j1: i64,
    j2: i64,
    jp1: i64,
    jp2: i64,
    out: *mut TmComplex,
) -> TmStatus {
    guard(|| {
        write(
            out,
            pair_ref(state)?
                .get(ModeIndex::new(j1, j2), ModeIndex::new(jp1, jp2))
                .into(),
        )
    })
}

/// `M̂^{(ss′)}` with `s, s′ ∈ {+1, −1}`.
#[no_mangle]
pub unsafe extern "C" fn tm_pair_apply_m_ss(
    state: *const TmPairState,
    s: i32,
    sp: i32,
    out: *mut *mut TmPairState,
) -> TmStatus {
    guard(|| {
        write(
            out,
            boxed_pair(apply_m_ss(sign(s)?, sign(sp)?, pair_ref(state)?)?),
        )
    })
}

/// `D̂ⁿᵢₖ` with axes numbered 1 and 2.
#[no_mangle]
pub unsafe extern "C" fn tm_pair_apply_d(
    state: *const TmPairState,
    n: u32,
    i: u8,
    k: u8,
    out: *mut *mut TmPairState,
) -> TmStatus {
    guard(|| {
        write(
            out,
            boxed_pair(apply_d(n, axis(i)?, axis(k)?, pair_ref(state)?)?),
        )
    })
}

/// Entanglement entropy in nats from the Schmidt spectrum.
#[no_mangle]
pub unsafe extern "C" fn tm_pair_entropy(state: *const TmPairState, out: *mut f64) -> TmStatus {
    guard(|| write(out, entropy(&schmidt(pair_ref(state)?))?))
}
