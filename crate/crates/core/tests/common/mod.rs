#![allow(dead_code)]

pub const SIGMOID: &str = include_str!("../../../../fir/sigmoid.fir");
pub const MAX: &str = include_str!("../../../../fir/max.fir");
pub const VADD: &str = include_str!("../../../../fir/vadd.fir");
