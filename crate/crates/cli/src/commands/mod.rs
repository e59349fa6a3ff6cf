pub mod family;
pub mod mcm;
pub mod sequence;
pub mod sweep;
pub mod verify;
