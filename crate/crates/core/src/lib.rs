//! Assembly feasibility from dense read spectra under adversarial erasures.
//!
//! * [`sequence`]: circular sequences, erasable strings, FASTA.
//! * [`repeats`]: maximal and interleaved repeats, `l_crit`, `M(d, l)` and the
//!   erasure-robust threshold.
//! * [`reads`]: L-spectra, erasure strategies, budget validation, reads files.
//! * [`assembly`]: consistent-assembly search, spectrum correction, de Bruijn
//!   assembly and certificates.
//! * [`oracle`]: slow brute-force references used by the tests.

pub mod assembly;
pub mod oracle;
pub mod reads;
pub mod repeats;
pub mod rng;
pub mod sequence;
