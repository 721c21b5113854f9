pub mod agents;
pub mod config;
pub mod gateway;
pub mod http;
pub mod prompts;
pub mod session;
pub mod startup;
