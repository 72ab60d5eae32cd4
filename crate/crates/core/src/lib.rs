//! HQC public-key encryption instantiated with a concatenated
//! Reed-Muller/Reed-Solomon code, together with the tools used to size it:
//! an exact model of the decryption error, analytic failure-rate bounds and
//! a reproducible Monte Carlo simulator.
//!
//! ```
//! use hqc_rmrs::{params, Hqc};
//! use rand_core::SeedableRng;
//!
//! let hqc = Hqc::new(params::scheme(params::HQC_RMRS_128).unwrap());
//! let keys = hqc.keygen_seeded(7);
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
//! let message = [0x5a; 32];
//! let ct = hqc.encrypt(&keys.pk, &message, &mut rng).unwrap();
//! assert_eq!(hqc.decrypt(&keys.sk, &ct, &mut rng).unwrap(), message);
//! ```

pub mod concat;
pub mod dfr;
pub mod error;
pub mod error_model;
pub mod exact;
pub mod gf256;
pub mod hqc;
pub mod params;
pub mod ring;
pub mod rm;
pub mod rng;
pub mod rs;
pub mod sim;

pub use concat::{ConcatCode, Message, MESSAGE_BYTES};
pub use dfr::{concat_dfr, end_to_end_dfr, rm_dfr_improved, rm_dfr_simple, InnerBound};
pub use error::{Error, Result};
pub use error_model::{p_star, p_tilde, BinomialTail, ErrorModelReport};
pub use exact::{ExactProb, Log2Value};
pub use gf256::Gf256;
pub use hqc::{Ciphertext, Hqc, KeyPair, PublicKey, SecretKey};
pub use params::{ErrorProfile, HqcParams};
pub use ring::{RingElement, SparseSupport};
pub use rm::RmCode;
pub use rs::RsCode;
pub use sim::{simulate, Experiment, NoiseChannel, TrialOutcome, TrialPlan, TrialReport};
