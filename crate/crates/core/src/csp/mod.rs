//! Cloud service algorithms: similarity search over encrypted indices,
//! token adjustment and policy-gated ASI retrieval.

mod asi;
mod result;
mod search;
mod store;

pub use asi::{asi_search, token_adjust};
pub use result::ResultDict;
pub use search::{insert_conditionally, search, search_merged, SearchMode};
pub use store::{
    prepare_index, ClientId, CspStore, HospitalId, Match, QueryError, QueryRequest, QueryResponse, ReleasedAsi,
};
