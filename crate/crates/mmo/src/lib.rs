//! Closed-form robust MIMO precoder and training design via the
//! matrix-monotonic structure of the underlying optimization problems.
//!
//! The crate splits into:
//!
//! - [`linalg`]: complex dense kernels with pinned ordering conventions;
//! - [`channel`]: the Kronecker-correlated channel ensemble used by the
//!   experiments;
//! - [`mmop`]: the single-variable engine (whitening, water-filling,
//!   structured assembly, bound modes, QoS dual, grid oracle);
//! - [`unitary`]: matrix inequalities and the optimal inner rotation per
//!   objective;
//! - [`objectives`]: the eight objective families and the named scalar
//!   objectives with their allocation rules;
//! - [`multihop`]: per-hop structures, serial relay chains and the parallel
//!   multicarrier form;
//! - [`mod@bench`]: the alternating LMMSE benchmark and the non-robust baseline;
//! - [`verify`]: the runnable invariant suite behind `mmo verify`.

pub mod bench;
pub mod channel;
pub mod guide;
pub mod linalg;
pub mod mmop;
pub mod multihop;
pub mod objectives;
pub mod unitary;
pub mod verify;
