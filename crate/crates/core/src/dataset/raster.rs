//! 8-bit grayscale raster import/export.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};

use crate::error::{Error, Result};
use crate::field_math::RealField;

/// `round(255 · clamp(v, 0, 1))` for each pixel.
pub fn to_gray_image(field: &RealField) -> GrayImage {
    let (h, w) = field.dims();
    GrayImage::from_fn(w as u32, h as u32, |x, y| {
        Luma([(field.get(y as usize, x as usize).clamp(0.0, 1.0) * 255.0).round() as u8])
    })
}

pub fn from_gray_image(img: &GrayImage) -> RealField {
    let (w, h) = img.dimensions();
    RealField::from_fn(h as usize, w as usize, |y, x| {
        img.get_pixel(x as u32, y as u32).0[0] as f64 / 255.0
    })
}

/// Write a field as an 8-bit grayscale PNG.
pub fn write_png(field: &RealField, path: impl AsRef<Path>) -> Result<()> {
    to_gray_image(field).save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

/// Read any supported raster and convert it to grayscale in `[0, 1]`.
pub fn read_gray(path: impl AsRef<Path>) -> Result<RealField> {
    let img = image::open(path)?.into_luma8();
    Ok(from_gray_image(&img))
}

/// Raster files of a directory, sorted by name for reproducible indexing.
pub fn list_rasters(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "pgm" | "bmp" | "jpg" | "jpeg"))
                .unwrap_or(false)
        })
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::EmptySource(format!(
            "no raster images in {}",
            dir.as_ref().display()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let f = RealField::from_fn(4, 6, |y, x| (y * 6 + x) as f64 / 23.0);
        write_png(&f, &path).unwrap();
        let back = read_gray(&path).unwrap();
        assert_eq!(back.dims(), (4, 6));
        assert!(back.max_abs_diff(&f) <= 0.5 / 255.0 + 1e-12);
        assert_eq!(to_gray_image(&f).get_pixel(5, 3).0[0], 255);
    }

    #[test]
    fn empty_dir_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(list_rasters(dir.path()), Err(Error::EmptySource(_))));
    }
}
