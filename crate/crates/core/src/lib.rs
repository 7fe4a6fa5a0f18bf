pub mod alignment;
pub mod bits;
pub mod cli;
pub mod coding;
pub mod error;
pub mod grammar;
pub mod learner;
pub mod matcher;
pub mod model;
pub mod pipeline;
