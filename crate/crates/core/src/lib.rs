pub mod criteria;
pub mod error;
pub mod io;
pub mod numkit;
pub mod goodpath;
pub mod modifier;
pub mod pathsim;
pub mod suite;
