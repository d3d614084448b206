//! Resonance functions, multilinear symbols, the resonance classifier and exhaustive sweeps.

mod census;
mod classify;
mod expand;
pub mod lattice;
mod symbols;
mod tuple;
mod verify;

pub use census::{resonance_census, CensusReport, ClassStats, SohingerRow, TUPLE_GUARD};
pub use classify::{
    classify, classify4, classify6, Classification, ResonantCase, Rule, Thresholds, Verdict,
    Witness,
};
pub use expand::{
    fourier_expand, Coefficient, DecayReport, FourierExpansion, MultiplierBox, BOX_TUPLE_GUARD,
    QUADRATURE_TOLERANCE,
};
pub use symbols::{
    m_multiplier, sigma_tilde, sigma_tilde_via_quotient, x_substitute, SymbolName, SymbolParams,
    SymbolSpec, TupleValues, XSubstituted,
};
pub use tuple::{
    add, alpha, dot, norm_sq, omega, omega_of, sohinger_tuple, FrequencyTuple, KVec,
};
pub use verify::{verify_all, verify_multiplier_bounds, BoundRegion, MaxRatioReport};
