pub mod env;
pub mod optimize;
pub mod sensitivity;
pub mod swap;
