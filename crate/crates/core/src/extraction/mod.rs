//! Signal conditioning and derived series: the causal moving average, the
//! backward tail walk and the moving-median Delta series.

pub mod artifact;
pub mod filter;
pub mod tail;

pub use artifact::{extract_fleet, load_tails, persist_tails, TailRecord};
pub use filter::{moving_average, moving_median};
pub use tail::{
    compute_delta, extract_session, extract_tail, extract_tail_from, find_t_start, DeltaSeries,
    SessionExtract, Tail, TailParams,
};
