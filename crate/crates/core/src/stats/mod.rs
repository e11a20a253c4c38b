//! Empirical summaries, goodness of fit and mutual information estimation.

mod gof;
mod histogram;
mod mi;
mod summary;

pub use gof::{ks_statistic, ks_test, GofResult, Significance};
pub use histogram::histogram_pdf;
pub use mi::{mi_knn, MiEstimate, DEFAULT_K};
pub use summary::{empirical_summary, ComplexMoments, DistributionSummary, MagnitudeMoments, PHASE_BINS};
