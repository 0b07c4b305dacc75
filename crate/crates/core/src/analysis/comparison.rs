//! Comparison of `2p^{1/p}` with `π_p` through `x = 1/p`:
//! `2p^{1/p} < π_p ⟺ sin(πx)/(πx) < (1−x)^x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub p: f64,
    pub x: f64,
    /// `sin(πx) / (πx)`.
    pub r: f64,
    /// `(1 − x)^x`.
    pub b: f64,
    pub b_minus_r: f64,
}

pub fn comparison_row(p: f64) -> Result<ComparisonRow> {
    check_exponent(p)?;
    let x = 1.0 / p;
    let r = (PI * x).sin() / (PI * x);
    let b = (x * (-x).ln_1p()).exp();
    Ok(ComparisonRow {
        p,
        x,
        r,
        b,
        b_minus_r: b - r,
    })
}

/// One row per exponent.
pub fn pi_comparison_table(p_grid: &[f64]) -> Result<Vec<ComparisonRow>> {
    p_grid.iter().map(|&p| comparison_row(p)).collect()
}

/// `x_i = i / (n + 1)`, `i = 1..=n`, as exponents `p = 1/x`, in increasing `x`.
pub fn uniform_x_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (n + 1) as f64 / i as f64).collect()
}
