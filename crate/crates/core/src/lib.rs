//! Finite-dimensional operator systems, quantum channels in Kraus form and the
//! correspondence between them.
//!
//! Every operator system `S` in `M_n` is the operator graph `G(Phi) =
//! span{V_a^* V_b}` of some channel `Phi`. The crate builds an effect basis of `S`
//! ([`opsys::duan_effect_basis`], [`opsys::geometric_effect_sequence`]),
//! synthesizes the channel with Kraus operators `i_k A_k^{1/2}`
//! ([`channels::synthesize_channel`]), extracts graphs from arbitrary channels
//! ([`graphs::operator_graph`]) and checks the round trip
//! ([`graphs::verify_round_trip`]).
//!
//! ```
//! use opgraph::graphs::verify_round_trip;
//! use opgraph::numerics::sigma_z;
//! use opgraph::opsys::{EffectKind, OperatorSystem};
//!
//! let s = OperatorSystem::from_generators(2, &[sigma_z()]).unwrap();
//! let report = verify_round_trip(&s, EffectKind::Duan).unwrap();
//! assert!(report.verdict);
//! assert_eq!(report.graph_dim, 2);
//! ```

pub mod channels;
pub mod cli;
pub mod error;
pub mod graphs;
pub mod io;
pub mod numerics;
pub mod opsys;

pub use error::{Error, Result};
