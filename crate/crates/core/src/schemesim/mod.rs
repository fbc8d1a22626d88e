//! Finite-blocklength simulation of the random-binning schemes.
//!
//! Codebooks are drawn i.i.d. from the auxiliary marginals and binned at
//! random; encoders pick a jointly typical codeword (uniformly among several,
//! uniformly among all when none is typical), and decoders look for the
//! unique typical codeword in the received bin. Long blocks are coded as
//! independent sub-blocks sharing one codebook, which keeps codebooks small
//! enough to search exhaustively.
//!
//! For short blocks the leakage `I(X^n; public index, Z^n) / n` is computed
//! exactly by enumerating every source block against the drawn codebook.

mod codebook;
mod leakage;
mod schemes;
mod typical;

pub use codebook::{seq_from_index, seq_index, Codebook, MAX_SIM_ALPHABET};
pub use leakage::{exact_leakage_by_law, ExactLeakage, MAX_SOURCE_BLOCKS, MAX_TABLE_CELLS};
pub use schemes::{
    mean_exact_leakage, run_exact_leakage, run_one_sided, run_triangular_forwarding,
    run_triangular_keyed, ForwardingScheme, KeyConfig, KeyMode, OneSidedScheme, Scheme,
    SimParams, TrialReport, DEFAULT_MAX_CODEBOOK_BITS, MAX_KEY_TABLE,
};
pub use typical::{typicality_test, TypicalityParam};
