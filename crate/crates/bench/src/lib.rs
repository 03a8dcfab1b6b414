//! Fixtures shared by the benchmarks in `benches/`.

use jellium::edge::{LimitFamily, LimitKind};
use jellium::{BackgroundSpec, Gas, GasParams};

/// Gas of `n` particles on a uniform background on `[-width, 0]` with
/// charge `n + 0.5`.
pub fn uniform_gas(n: usize, width: f64, beta: f64) -> Gas {
    let alpha = n as f64 + 0.5;
    let bg = BackgroundSpec::uniform(-width, 0.0, alpha).expect("valid background");
    Gas::new(bg, GasParams::new(n, beta, alpha).expect("valid params")).expect("admissible gas")
}

pub fn squared_zero(beta: f64) -> LimitFamily {
    LimitFamily::new(LimitKind::SquaredZero { lambda: 1.0 }, beta).expect("valid family")
}
