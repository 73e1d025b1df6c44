//! Classical post-processing for Ising optimizer outputs.
//!
//! The centerpiece is multi-qubit correction ([`mqc`]), which merges two runs
//! by choosing, for each connected region where they disagree, whichever side
//! contributes less energy. Around it sit seeded samplers, Chimera and other
//! topologies, local optimization and sample persistence ([`altpp`]), and
//! high precision enhancement ([`hpe`]).
//!
//! ```
//! use mqc_core::{chimera_graph, mqc_reduce, random_problem, simulated_anneal};
//! use mqc_core::{ChimeraSpec, PairingStrategy, ProblemGenSpec, SamplerParams};
//!
//! let graph = chimera_graph(ChimeraSpec::new(2, 2, 4)).unwrap();
//! let problem = random_problem(&graph, &ProblemGenSpec::default()).unwrap();
//! let params = SamplerParams { num_runs: 16, sweeps: 100, ..Default::default() };
//! let runs = simulated_anneal(&problem, &params).unwrap();
//! let (best, _trace) = mqc_reduce(&problem, &runs.runs, PairingStrategy::Sequential).unwrap();
//! assert!(best.energy() <= runs.best().unwrap().energy() + 1e-9);
//! ```

pub mod altpp;
pub mod error;
pub mod hpe;
pub mod io;
pub mod ising;
pub mod mqc;
pub mod rng;
pub mod samplers;
pub mod topology;

pub use altpp::{builtin_opt_pp, decompose_low_treewidth, optimize_subgraph, persistence_fix, sample_persistence};
pub use altpp::{FixedAssignment, Subgraph};
pub use error::{Error, Result};
pub use hpe::{hpe, hpe_from_runs, quantize_problem, scale_problem, HpeOutcome, HpeReport, PrecisionModel, ScaleSet};
pub use ising::{energy, tunnel_contribution, IsingProblem, Spin, SpinConfiguration, Tunnel, ENERGY_TOLERANCE};
pub use mqc::{find_tunnels, mqc_pair, mqc_reduce, pair_runs, PairingStrategy, ReductionTrace};
pub use samplers::{exact_ground_state, gibbs_sample, random_runs, sample, simulated_anneal};
pub use samplers::{Provenance, RunSet, SamplerKind, SamplerParams};
pub use topology::{chimera_graph, complete_graph, connected_components, random_problem};
pub use topology::{ChimeraSpec, Graph, Interval, ProblemGenSpec};
