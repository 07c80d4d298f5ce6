//! Operator harness for the encrypted visual feedback pipeline:
//! configuration, the closed-loop simulation runner, the packed-vs-naive
//! benchmark, key file management, and the three-role network deployment.

pub mod bench;
pub mod config;
pub mod keys_io;
pub mod net;
pub mod sim;
