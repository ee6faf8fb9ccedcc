//! Reusing verification assertions as hardware-Trojan security checkers.
//!
//! The pipeline: parse a gate-level design ([`netlist`]), compile assertions
//! into monitor circuits and bind them ([`monitorgen`]), decide which design
//! nodes have a functional path to each monitor's `fail` output
//! ([`pathcheck`]), turn the verdicts into security coverage and overheads
//! ([`metrics`]), and pick a checker set under a selection strategy
//! ([`select`]).

pub mod netlist;
pub mod sat;
pub mod pathcheck;
pub mod monitorgen;
pub mod metrics;
pub mod select;
pub mod report;
pub mod cli;
