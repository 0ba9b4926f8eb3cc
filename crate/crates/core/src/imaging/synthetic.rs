//! Synthetic 8-bit test images.

use super::ImageRaster;
use crate::error::{Error, Result};

fn check(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("image size must be positive"));
    }
    Ok(())
}

/// `n × n` board of `block`-pixel squares alternating between 0 and 255.
pub fn checkerboard(n: usize, block: usize) -> Result<ImageRaster> {
    check(n)?;
    if block == 0 {
        return Err(Error::domain("checkerboard block must be positive"));
    }
    let pixels = (0..n * n)
        .map(|p| {
            let (r, c) = (p / n, p % n);
            if (r / block + c / block) % 2 == 0 {
                255
            } else {
                0
            }
        })
        .collect();
    ImageRaster::new(n, n, 255, pixels)
}

/// White disk of radius `n/3` centred in a black `n × n` image.
pub fn disk(n: usize) -> Result<ImageRaster> {
    check(n)?;
    let c = n as f64 / 2.0;
    let r = n as f64 / 3.0;
    let pixels = (0..n * n)
        .map(|p| {
            let (y, x) = ((p / n) as f64 + 0.5, (p % n) as f64 + 0.5);
            if (x - c).powi(2) + (y - c).powi(2) <= r * r {
                255
            } else {
                0
            }
        })
        .collect();
    ImageRaster::new(n, n, 255, pixels)
}

/// Horizontal gray ramp from 0 to 255.
pub fn ramp(n: usize) -> Result<ImageRaster> {
    check(n)?;
    let den = (n.max(2) - 1) as f64;
    let pixels = (0..n * n)
        .map(|p| (255.0 * (p % n) as f64 / den).round() as u16)
        .collect();
    ImageRaster::new(n, n, 255, pixels)
}
