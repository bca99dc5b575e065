pub mod fit;
pub mod pdf;
pub mod price;
pub mod sample;
pub mod verify;
