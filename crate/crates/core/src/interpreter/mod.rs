//! Reference interpreter for the method subset, used as the semantic oracle
//! for transformations, plus a random program generator and a differential
//! checker built on it.

mod diff;
mod eval;
mod generate;
mod value;

pub use diff::{call_keys, differential_check, random_value, Counterexample, Verdict};
pub use eval::{evaluate, exception_is_a, EvalError, EventKind, Outcome, StubEnv, Trace, TraceEvent, DEFAULT_FUEL};
pub use generate::generate_program;
pub use value::{java_double_string, IntWidth, Value};
