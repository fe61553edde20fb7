//! Time Petri nets and their synchronous products.
//!
//! Component nets are read from a small line-oriented text format, composed
//! by label-synchronised firing sets, and explored as an exact state class
//! graph. Dead and timelocked classes, event reachability and inevitability
//! give a verdict for each model. A parametric generator produces the
//! supply-chain benchmark nets.

pub mod analysis;
pub mod benchmark;
pub mod dbm;
pub mod export;
pub mod model;
pub mod parser;
pub mod product;
pub mod scg;
pub mod time;

pub use analysis::{verdict, AcceptanceSpec, Verdict, VerdictKind};
pub use model::{lift_to_ptpn, FiringSet, Marking, Net, NetBuilder, ProductRelation, Ptpn, TransitionId};
pub use parser::{parse_manifest, parse_net, serialize_manifest, serialize_net, CompositionManifest, ParseError};
pub use product::{binary_product, chain_product, SyncLabelSet};
pub use scg::{build_scg, ExploreOptions, ScGraph};
pub use time::{Bound, Rational, TimeInterval};
