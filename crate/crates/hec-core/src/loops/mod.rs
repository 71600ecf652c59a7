pub mod pic;
pub mod rsc;
pub mod ric;
