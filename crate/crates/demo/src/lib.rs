//! Browser playground for the alignment pipeline.
//!
//! All real work lives in [`ops`], which is plain native Rust returning
//! serializable views; the `wasm` module is a thin JSON shim over it so the
//! same payloads can be exercised by native tests and by the static page in
//! `www/`.

pub mod ops;

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    fn to_json<T: serde::Serialize>(result: toolpath_core::Result<T>) -> String {
        match result {
            Ok(value) => serde_json::to_string(&value)
                .unwrap_or_else(|e| format!("{{\"error\":\"serialization: {e}\"}}")),
            Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
        }
    }

    /// Builds a synthetic scenario and returns its clouds and ground truth.
    #[wasm_bindgen]
    pub fn demo_scenario(task: &str, seed: u32, horizon: u32) -> String {
        to_json(crate::ops::scenario_view(task, seed as u64, horizon as usize))
    }

    /// Runs the full alignment on a scenario and returns the fitted motion.
    #[wasm_bindgen]
    pub fn demo_align(task: &str, seed: u32, horizon: u32, thorough: bool) -> String {
        to_json(crate::ops::align_view(
            task,
            seed as u64,
            horizon as usize,
            thorough,
        ))
    }

    /// Fits a rigid transform to a point flow built from the given motion.
    #[wasm_bindgen]
    pub fn demo_flow_fit(angle_deg: f64, tx: f64, ty: f64, tz: f64) -> String {
        to_json(crate::ops::flow_view(angle_deg, tx, ty, tz))
    }
}
