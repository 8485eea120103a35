//! Metric depth images with an invalid-pixel sentinel.

use thiserror::Error;

/// Sentinel for pixels with no depth measurement (or nothing rendered).
pub const INVALID_DEPTH: f64 = 0.0;

/// Row-major grid of metric depth values in meters. `0.0` marks an invalid
/// pixel, the same convention RGB-D sensors use for dropouts.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum DepthError {
    #[error("data length {len} does not match {width}x{height}")]
    LengthMismatch { len: usize, width: u32, height: u32 },
    #[error("pixel ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
}

impl DepthImage {
    /// All-invalid image.
    pub fn new_invalid(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![INVALID_DEPTH; width as usize * height as usize],
        }
    }

    pub fn from_data(width: u32, height: u32, data: Vec<f64>) -> Result<Self, DepthError> {
        if data.len() != width as usize * height as usize {
            return Err(DepthError::LengthMismatch {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, depth: f64) {
        self.data[y as usize * self.width as usize + x as usize] = depth;
    }

    pub fn checked_get(&self, x: u32, y: u32) -> Result<f64, DepthError> {
        if x >= self.width || y >= self.height {
            return Err(DepthError::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.get(x, y))
    }

    /// True when the pixel holds a usable measurement.
    #[inline]
    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        depth_is_valid(self.get(x, y))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|&&d| depth_is_valid(d)).count()
    }

    /// Iterates `(x, y, depth)` over all pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &d)| ((i as u32) % w, (i as u32) / w, d))
    }
}

/// A depth value is valid when finite and strictly positive.
#[inline]
pub fn depth_is_valid(d: f64) -> bool {
    d.is_finite() && d > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_by_default() {
        let img = DepthImage::new_invalid(4, 3);
        assert_eq!(img.valid_count(), 0);
        assert!(!img.is_valid(0, 0));
    }

    #[test]
    fn set_get_round_trip() {
        let mut img = DepthImage::new_invalid(4, 3);
        img.set(3, 2, 1.25);
        assert_eq!(img.get(3, 2), 1.25);
        assert_eq!(img.valid_count(), 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            DepthImage::from_data(2, 2, vec![0.0; 3]).unwrap_err(),
            DepthError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn out_of_bounds_get() {
        let img = DepthImage::new_invalid(2, 2);
        assert!(img.checked_get(2, 0).is_err());
        assert!(img.checked_get(0, 2).is_err());
    }

    #[test]
    fn nan_and_negative_are_invalid() {
        assert!(!depth_is_valid(f64::NAN));
        assert!(!depth_is_valid(-1.0));
        assert!(!depth_is_valid(0.0));
        assert!(depth_is_valid(0.001));
    }
}
