//! Two-variable Fourier data, Poisson extensions and Rudin's construction of
//! functions on the bidisc whose restriction to `(2^{-s}, 3^{-s})` is small
//! in `H^2` yet large along chosen vertical lines.

pub mod cover;
pub mod demo;
pub mod fourier;
pub mod poisson;
pub mod rudin;

pub use cover::{curve_cells, neighbourhood_cover, occupancy, strip_cover, DyadicSquare, DyadicSquareSet};
pub use demo::{
    theorem1_i_demo, theorem1_ii_demo, trace_csv, DeltaMeans, Theorem1IIParams, Theorem1IIReport, Theorem1IParams,
    Theorem1IReport,
};
pub use fourier::{FourierDatum2, FourierRecord};
pub use poisson::{lambda_extend, poisson_extend, poisson_kernel2, PolarPoint, RingMeasure};
pub use rudin::{
    curve_trace, decompose_lsc, exp_series, h2_norm_bidisc, pluriharmonic_complete, ring_orders, rudin_datum,
    BidiscAnalytic, ExpSeries, LscDecomposition, RudinFunction, TraceSample,
};
