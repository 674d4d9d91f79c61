pub mod calendar;
pub mod corpus;
pub mod econometrics;
pub mod error;
pub mod lexicon;
pub mod pipeline;
pub mod sentiment;
pub mod timeseries;
pub mod topics;
