//! CSV emission. Floating-point values are printed with 12 significant
//! digits so independent evaluations can compare outputs byte for byte.

use std::path::PathBuf;

use maclab::regions::{direction_grid, RatePolytope, RegionEnvelope};

use crate::error::Result;
use crate::manifest::RunManifest;

pub fn g12(x: f64) -> String {
    // Canonicalize negative zero so formatted output is sign-stable.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Writes named tables either into an output directory (recording each file
/// in the run manifest) or to stdout when no directory was given.
pub struct Emitter {
    out_dir: Option<PathBuf>,
    pub manifest: RunManifest,
}

impl Emitter {
    pub fn new(out_dir: Option<PathBuf>, manifest: RunManifest) -> Result<Self> {
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self { out_dir, manifest })
    }

    pub fn table(&mut self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        match &self.out_dir {
            Some(dir) => {
                let mut body = String::with_capacity(rows.len() * 32 + header.len() + 1);
                body.push_str(header);
                body.push('\n');
                for r in rows {
                    body.push_str(r);
                    body.push('\n');
                }
                std::fs::write(dir.join(name), body)?;
                self.manifest.record_output(name);
            }
            None => {
                println!("# {name}");
                println!("{header}");
                for r in rows {
                    println!("{r}");
                }
            }
        }
        Ok(())
    }

    /// Write the manifest if an output directory is in use.
    pub fn finish(self) -> Result<()> {
        if let Some(dir) = &self.out_dir {
            self.manifest.write(dir)?;
        }
        Ok(())
    }
}

/// `subset_mask,bound_bits` rows prefixed with a region label.
pub fn bounds_rows(label: &str, p: &RatePolytope) -> Vec<String> {
    (1..(1usize << p.users()))
        .map(|mask| format!("{label},{mask},{}", g12(p.bound(mask))))
        .collect()
}

/// `angle_deg,r1,r2` boundary rows for a two-user envelope: for each sampled
/// direction, the generator attaining the support.
pub fn boundary_rows(label: &str, env: &RegionEnvelope, directions: usize) -> Vec<String> {
    assert_eq!(env.dim(), 2, "angle parameterization is two-dimensional");
    let dirs = direction_grid(2, directions);
    dirs.iter()
        .enumerate()
        .map(|(i, w)| {
            let angle = 90.0 * i as f64 / (directions - 1) as f64;
            let point = env.support_point(w).unwrap_or(&[0.0, 0.0][..]);
            format!("{label},{},{},{}", g12(angle), g12(point[0]), g12(point[1]))
        })
        .collect()
}
