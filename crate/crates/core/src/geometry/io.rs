//! Plain-text point-cloud format: one `x y z` triple per line, `#` comments
//! and blank lines ignored, nine significant digits on output.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::numfmt::sig9;

use super::PointCloud;

impl PointCloud {
    pub fn read_xyz(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_xyz(&text)
    }

    pub fn parse_xyz(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut coords = [0.0f64; 3];
            let mut fields = line.split_whitespace();
            for slot in &mut coords {
                let token = fields.next().ok_or_else(|| {
                    Error::format("point cloud", idx + 1, "expected three coordinates")
                })?;
                *slot = token.parse().map_err(|_| {
                    Error::format(
                        "point cloud",
                        idx + 1,
                        format!("cannot parse `{token}` as a number"),
                    )
                })?;
                if !slot.is_finite() {
                    return Err(Error::format(
                        "point cloud",
                        idx + 1,
                        format!("non-finite coordinate `{token}`"),
                    ));
                }
            }
            if fields.next().is_some() {
                return Err(Error::format(
                    "point cloud",
                    idx + 1,
                    "expected exactly three coordinates",
                ));
            }
            points.push(Vector3::new(coords[0], coords[1], coords[2]));
        }
        if points.is_empty() {
            return Err(Error::format(
                "point cloud",
                text.lines().count() + 1,
                "no points found",
            ));
        }
        PointCloud::new(points)
    }

    pub fn write_xyz(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_xyz_string())?;
        Ok(())
    }

    pub fn to_xyz_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 48);
        for p in self.points() {
            out.push_str(&sig9(p.x));
            out.push(' ');
            out.push_str(&sig9(p.y));
            out.push(' ');
            out.push_str(&sig9(p.z));
            out.push('\n');
        }
        out
    }
}
