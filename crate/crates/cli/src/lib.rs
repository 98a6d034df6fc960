//! Command-line front-end for `maxjsr`: set files, certificates and commands.

pub mod cert;
pub mod commands;
pub mod setfile;
