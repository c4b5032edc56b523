//! Two-stage dual-tree complex wavelet packet transform.
//!
//! Stage one is three undecimated packet levels, stage two four decimated
//! levels, giving 128 uniform subbands of 31.25 Hz at 8 kHz with one complex
//! coefficient every 16 samples per subband. Tree A supplies the real part
//! and tree B the imaginary part. Both trees are orthonormal packet trees
//! (the undecimated levels carry a factor 1/2 on synthesis), so the pair is
//! a tight frame with bound 16 and synthesis is the average of the two
//! inverses.

mod diagnostics;
mod filters;
mod transform;

pub use diagnostics::{
    aggregate_analyticity_db, analyticity_db, complex_response, equivalent_response,
    shift_variation, subband_noise_gain, Envelope,
};
pub use filters::{format_taps, parse_taps, FilterBankSet, QuadFilterPair, Tree, FILTER_FILES};
pub use transform::{
    analyze, analyze_samples, natural_of_sequency, padded_len, sequency_of_natural, synthesize,
    ComplexSubbandGrid, BLOCK, DECIMATED_LEVELS, HOP, LEVELS, MIN_LENGTH, NUM_SUBBANDS,
    UNDECIMATED_LEVELS,
};
