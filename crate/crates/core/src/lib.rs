//! Network fairness for proof-of-work blockchains.
//!
//! * [`analytics`]: fail function, frontrunning probability, publishing
//!   fairness of two racing blocks.
//! * [`sim`]: seeded discrete-round mining simulator with petty and
//!   undercutting miners over a block DAG.
//! * [`game`]: fast-vs-slow bimatrix game construction and solving.
//! * [`ohie`]: strategic frontrunning and undercutting in OHIE's parallel
//!   chains.

pub mod analytics;
pub mod game;
pub mod ohie;
pub mod sim;
