//! Periodic-grid Fourier calculus for Λ-valued fields.

pub mod ffld;
mod fft;
pub mod field;
pub mod multiplier;
pub mod ops;
pub mod psw;
pub mod search;
pub mod symbol;
pub mod trig;

pub use ffld::{load_ffld, read_ffld, save_ffld, write_ffld, FfldHeader};
pub use fft::Spectrum;
pub use field::{lp_norm, lp_norm_with, ComplexField, FormField, Grid};
pub use multiplier::{
    apply_spectral_multiplier, imaginary_power_constant, imaginary_power_constant_closed_form,
    laplace_symbol_eval, LaplaceValue, QuadConfig, SpectralSymbol,
};
pub use ops::{heat_extension, heat_extension_with, spectral_gradient, spectral_gradient_with};
pub use psw::{psw_integral, psw_integral_with, PswConfig, PswResult};
pub use search::{
    norm_search, random_field, s_ratio, stream_rng, NormSearchConfig, NormSearchResult,
    RandomFieldSpec,
};
pub use symbol::{
    apply_s, apply_s_with, grid_symbol_matrix, grid_symbol_sup, symbol_from_contraction,
    symbol_matrix, SymbolMatrix, REAL_OUTPUT_TOL,
};
pub use trig::TrigPolynomial;
