//! Random generation: seeded substreams, the frailty laws whose Laplace transforms are
//! the family generators, and the frailty-based copula sampler.

mod copula;
mod frailty;
mod gig;
mod stream;

pub use copula::{sample_copula, sample_copula_row};
pub use frailty::{
    sample_frailty, sample_geometric, sample_log_frailty, sample_log_gamma, sample_log_stable, sample_logarithmic,
    sample_sibuya,
};
pub use gig::sample_gig;
pub use stream::RandomStream;
