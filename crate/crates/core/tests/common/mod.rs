#![allow(dead_code)]

pub mod worked_example;
