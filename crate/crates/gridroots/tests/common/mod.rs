//! Golden data shared by the integration tests: a fully connected 4-bus
//! network whose susceptances yield 16 real solutions, the solution list,
//! and the univariate eliminants in vq4^2 it induces.
#![allow(dead_code)]

use gridroots::net::{Bus, Line};
use gridroots::PowerSystem;

pub const WITNESS_B: [f64; 6] = [1.612, -4.649, -5.472, -7.504, 10.05, -13.571];

/// Line endpoints matching the order of `WITNESS_B`.
pub const LINE_ENDS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// The 16 real solutions as (vd2, vq2, vd3, vq3, vd4, vq4), five decimals.
/// Row 8 of the source listing repeats row 3's sign pattern; the trivial
/// solutions must cover all eight sign combinations, so it is repaired to
/// the one missing pattern.
pub const WITNESS_REAL: [[f64; 6]; 16] = [
    [1.0, 0.0, 1.0, 0.0, -1.0, 0.0],
    [-1.0, 0.0, 1.0, 0.0, -1.0, 0.0],
    [1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, -1.0, 0.0, -1.0, 0.0],
    [-1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
    [-1.0, 0.0, -1.0, 0.0, -1.0, 0.0],
    [-1.0, 0.0, -1.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, -1.0, 0.0, 1.0, 0.0],
    [0.30976, -0.95082, -0.82212, -0.56932, -0.97906, 0.20359],
    [-0.88313, 0.46912, 0.97310, 0.23039, 0.99834, -0.05754],
    [0.57067, -0.82118, -0.61912, 0.78530, 0.41658, -0.90910],
    [0.89239, -0.45127, 0.84624, -0.53281, -0.94751, 0.31973],
    [-0.88313, -0.46912, 0.97310, -0.23039, 0.99834, 0.05754],
    [0.57067, 0.82118, -0.61912, -0.78530, 0.41658, 0.90910],
    [0.30975, 0.95082, -0.82212, 0.56932, -0.97906, -0.20359],
    [0.89239, 0.45127, 0.84624, 0.53281, -0.94751, -0.31973],
];

/// Sextic in vq4^2 for `WITNESS_B`, descending powers, four decimals.
pub const SEXTIC_DESC: [f64; 7] = [1.0, 13.4913, 136.2685, -144.4123, 18.9004, -0.5871, 0.0017];

/// Quartic in vq4^2 for `WITNESS_B` with b12 = 0, descending powers.
pub const QUARTIC_DESC: [f64; 5] = [1.0, -1.438, 0.611, -0.070, 0.002];

pub fn fourbus(b: [f64; 6]) -> PowerSystem {
    let buses = vec![
        Bus::slack(1, 1.0),
        Bus::pv(2, 1.0, 0.0),
        Bus::pv(3, 1.0, 0.0),
        Bus::pv(4, 1.0, 0.0),
    ];
    let lines = LINE_ENDS
        .iter()
        .zip(&b)
        .map(|(&(from, to), &b)| Line { from, to, b, g: 0.0 })
        .collect();
    PowerSystem::new(buses, lines).unwrap()
}

pub fn witness() -> PowerSystem {
    fourbus(WITNESS_B)
}
