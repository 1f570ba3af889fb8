//! Free isometric actions of finite groups, their approximating extensions,
//! and the recursive chains built from them.

pub mod action;
pub mod chain;
pub mod extend;
pub mod mass;
