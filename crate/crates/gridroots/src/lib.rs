//! All complex solutions of power-flow polynomial systems.
//!
//! gridroots builds the quadratic power-flow equations of a bus/line
//! network, finds every isolated complex solution by homotopy continuation,
//! classifies the real and structurally trivial ones, counts real solutions
//! a second way through a univariate eliminant, and measures the monodromy
//! group of the parameterized solution set. A seeded Monte-Carlo harness
//! surveys real-count statistics over random susceptance draws.

pub mod classify;
pub mod eliminant;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod monodromy;
pub mod net;
pub mod perm;
pub mod poly;
pub mod rng;
pub mod survey;
pub mod track;

pub use error::{Error, Result};
pub use net::{bezout_bound, complex_bound, Bus, BusKind, Line, PowerSystem};
pub use poly::{Poly, PolySystem, Term};
pub use track::{
    solve_all, solve_once, HomotopyConfig, LinearHomotopy, PathResult, PathStatus, SolutionSet,
};
