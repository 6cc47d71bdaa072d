//! Density of cubic-form quotient sets in the p-adic numbers.
//!
//! For an integral cubic form `C`, the quotient set `R(C)` collects the
//! ratios `C(x) / C(y)` over integer points with nonzero denominator. This
//! crate decides whether `R(C)` is dense in `Q_p`, emits machine-checkable
//! certificates for each verdict, constructs explicit approximation
//! witnesses in the dense cases, and audits verdicts empirically by bounded
//! enumeration.
//!
//! ```
//! use qlab::forms::BinaryCubicForm;
//! use qlab::decide::{decide_binary, Status};
//! use qlab::padic::Prime;
//!
//! let p = Prime::new(7)?;
//! let form = BinaryCubicForm::from_i64(1, 2)?;
//! let verdict = decide_binary(&form, p)?;
//! assert_eq!(verdict.status, Status::NotDense);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

mod arith;
mod jsonser;

pub mod decide;
pub mod forms;
pub mod hensel;
pub mod padic;
pub mod residue;
pub mod witness;

pub use decide::{decide_binary, decide_diagonal, decide_form, decide_general, Status, Verdict};
pub use forms::{BinaryCubicForm, CubicForm, DiagonalCubicForm, Form, GeneralCubicForm};
pub use padic::{PAdicApprox, Prime, Valuation};
