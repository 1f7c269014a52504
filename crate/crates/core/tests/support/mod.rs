#![allow(dead_code)]

pub mod tiling;
