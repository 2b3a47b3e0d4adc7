//! Grayscale PNG input/output (8-bit and 16-bit).

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::scalar::Real;

/// Read an 8-bit or 16-bit grayscale PNG; other layouts are converted to
/// 8-bit luma first. Pixel values come back as their raw integer levels.
pub fn read_gray_png<T: Real>(path: impl AsRef<Path>) -> Result<GrayImage<T>> {
    let dynamic = image::open(path.as_ref())?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let mut img = GrayImage::zeros(w, h);
    match dynamic {
        DynamicImage::ImageLuma16(buf) => {
            for (x, y, p) in buf.enumerate_pixels() {
                img.set(x as usize, y as usize, T::from_f64_lossy(p.0[0] as f64));
            }
        }
        other => {
            let buf = other.to_luma8();
            for (x, y, p) in buf.enumerate_pixels() {
                img.set(x as usize, y as usize, T::from_f64_lossy(p.0[0] as f64));
            }
        }
    }
    Ok(img)
}

/// Write as 8-bit grayscale PNG, rounding and clamping values to 0..=255.
pub fn write_gray_png_u8<T: Real>(img: &GrayImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_fn(img.width() as u32, img.height() as u32, |x, y| {
            let v = img.get(x as usize, y as usize).to_f64_lossy();
            Luma([v.round().clamp(0.0, 255.0) as u8])
        });
    buf.save(path.as_ref()).map_err(Error::from)
}

/// Write as 16-bit grayscale PNG, rounding and clamping to 0..=65535.
pub fn write_gray_png_u16<T: Real>(img: &GrayImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_fn(img.width() as u32, img.height() as u32, |x, y| {
            let v = img.get(x as usize, y as usize).to_f64_lossy();
            Luma([v.round().clamp(0.0, 65535.0) as u16])
        });
    buf.save(path.as_ref()).map_err(Error::from)
}
