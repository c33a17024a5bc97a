//! Nine-significant-digit numeric formatting shared by every writer.
//!
//! All emitted numbers (point clouds, pose CSVs, reports, sweep tables) go
//! through [`sig9`] so that re-parsing a file reproduces the same `f64`s on
//! every platform. [`quantize`] applies the same round trip in memory, which
//! lets the pipeline compute residuals from exactly the values it writes.

/// Format with 9 significant digits in scientific notation, e.g. `1.25000000e-2`.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Round-trip a value through its 9-significant-digit representation.
pub fn quantize(x: f64) -> f64 {
    sig9(x).parse().expect("sig9 output is always a valid f64")
}
