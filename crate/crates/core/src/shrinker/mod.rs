pub mod canonical;
pub mod profile;
pub mod residual;
pub mod shooting;
