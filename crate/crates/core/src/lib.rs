//! Numerical laboratory for Schur and Fourier multipliers on Schatten classes and on
//! noncommutative Lebesgue spaces of discrete group algebras.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64` aliases at the
//! crate root fix the double-precision instantiation used by the command-line tool.

pub mod classical;
pub mod error;
pub mod extension;
pub mod groupalg;
pub mod lacunary;
pub mod multiplier;
pub mod normest;
pub mod random;
pub mod scalar;
pub mod schatten;
pub mod szego;

pub use classical::{
    convergence_scan, cotlar_recursion, hilbert_norm_formula, hilbert_symbol, riesz_l4_formula, riesz_lp_target,
    riesz_symbol, ClassicalSymbol, ScanRow, TriangularSymbol,
};
pub use error::{Error, Result};
pub use extension::{
    extend_rank_one, phase_sign_decompose, random_rank_one_spec, verify_certificate, ExtensionCertificate, RankOneSpec, SignDecomposition,
    VerificationReport,
};
pub use groupalg::{
    folner_intervals, lp_group_norm, regular_representation, reiter_defect, Element, FolnerNet, FourierSeries,
    GroupKind, GroupModel, GroupWindow, ReiterMean,
};
pub use lacunary::{
    greedy_sumset_select, riesz_obstruction_demo, skipped_block_sums, sumset_lower_bound, ApproximatingSequence,
    ElementStream, SkippedBlocks, SumsetSelection,
};
pub use multiplier::{
    amplify, atomic_action_ratio, atomic_lp_mass, atomic_symbol, fourier_apply, grid_transfer, schur_apply, schur_apply_truncating,
    toeplitz_transfer, AtomicMeasure, FourierSymbol, SchurSymbol, Support,
};
pub use normest::{
    amplified_norm, amplified_norm_chain, brute_oracle_norm, fourier_multiplier_norm, schur_multiplier_norm,
    transfer_inequality_check, unconditional_constant, AscentOptions, Method, NormEstimate, SignMode, Witness,
};
pub use scalar::{Real, C};
pub use schatten::{
    norm_and_gradient, orlicz_trace, schatten_norm, singular_values, spectrum_norm, CMatrix, Convention, Exponent,
    Gauge, SingularSpectrum,
};
pub use szego::{
    compression_embedding_pair, empirical_moments, reiter_embedding_norm, spectral_moments, szego_convergence_report,
    truncate, EmpiricalMoments, SzegoReport, SzegoRow,
};

pub type CMat64 = CMatrix<f64>;
pub type CMat32 = CMatrix<f32>;
pub type Exponent64 = Exponent<f64>;
pub type SchurSymbol64 = SchurSymbol<f64>;
pub type FourierSymbol64 = FourierSymbol<f64>;
pub type FourierSeries64 = FourierSeries<f64>;
pub type NormEstimate64 = NormEstimate<f64>;
