//! Reference interpreter for generated modules, including loop-nest semantics for
//! `linalg.generic` and a sequential thread-grid simulator for kernels.

mod exec;
mod value;

pub use exec::{
    run_function, run_kernel, InterpError, Interpreter, LaunchConfig, ThreadCoord, ThreadOrder, DEFAULT_STEP_LIMIT,
};
pub use value::{parse_input, wrap, Buffer, InputError, RuntimeValue};
