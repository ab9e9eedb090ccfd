//! Seeded synthetic datasets for examples, tests and smoke runs.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::FeatureMatrix;

/// Standard normal draw (Box–Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Two isotropic Gaussian classes whose means differ only on the first
/// `informative` axes, by `±shift/2` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoGaussians {
    pub samples: usize,
    pub features: usize,
    pub informative: usize,
    pub shift: f64,
    pub seed: u64,
}

impl Default for TwoGaussians {
    fn default() -> Self {
        TwoGaussians {
            samples: 200,
            features: 64,
            informative: 4,
            shift: 2.0,
            seed: 7,
        }
    }
}

impl TwoGaussians {
    /// Balanced, interleaved labels (even rows class 0, odd rows class 1).
    pub fn generate(&self) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let labels: Vec<u8> = (0..self.samples).map(|i| (i % 2) as u8).collect();
        let half = self.shift / 2.0;
        let x = FeatureMatrix::from_fn(self.samples, self.features, |i, j| {
            let noise = standard_normal(&mut rng);
            if j < self.informative {
                noise + if labels[i] == 1 { half } else { -half }
            } else {
                noise
            }
        });
        x.with_labels(labels).expect("labels match rows")
    }
}

/// Two well separated 2-D blobs centred at `(±2, ±2)`.
pub fn blobs_2d(samples: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u8> = (0..samples).map(|i| (i % 2) as u8).collect();
    let x = FeatureMatrix::from_fn(samples, 2, |i, _| {
        let centre = if labels[i] == 1 { 2.0 } else { -2.0 };
        centre + 0.5 * standard_normal(&mut rng)
    });
    x.with_labels(labels).expect("labels match rows")
}

/// Writes an 8-bit binary (P5) PGM.
pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if pixels.len() != width * height {
        return Err(Error::Input(format!(
            "{} pixels for a {width}×{height} image",
            pixels.len()
        )));
    }
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a two-class grayscale image folder: `root/class_a` holds a bright
/// blob in the upper-left quadrant, `root/class_b` in the lower-right, both
/// over noisy background.
pub fn write_image_dataset(root: impl AsRef<Path>, per_class: usize, size: usize, seed: u64) -> Result<()> {
    let root = root.as_ref();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (class, name) in ["class_a", "class_b"].iter().enumerate() {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for k in 0..per_class {
            let centre = if class == 0 { 0.3 } else { 0.7 } * size as f64;
            let cx = centre + rng.gen_range(-0.08..0.08) * size as f64;
            let cy = centre + rng.gen_range(-0.08..0.08) * size as f64;
            let radius = rng.gen_range(0.12..0.2) * size as f64;
            let mut pixels = Vec::with_capacity(size * size);
            for y in 0..size {
                for x in 0..size {
                    let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
                    let blob = 170.0 * (-(d / radius).powi(2)).exp();
                    let v = 40.0 + blob + 15.0 * standard_normal(&mut rng);
                    pixels.push(v.clamp(0.0, 255.0) as u8);
                }
            }
            write_pgm(dir.join(format!("img_{k:03}.pgm")), size, size, &pixels)?;
        }
    }
    Ok(())
}
