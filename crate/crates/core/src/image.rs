//! 8-bit grayscale canvas and lossless PNG I/O.

use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, ImageFormat};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_SIDE: u32 = 200;

/// Row-major 8-bit grayscale image; 0 is background.
///
/// The width is always even so that the mid-line reflection
/// `x -> width - 1 - x` pairs every column with a distinct partner.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.foreground_count())
            .finish()
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be positive",
        });
    }
    if width % 2 != 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width must be even",
        });
    }
    Ok(())
}

impl GrayImage {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        check_dims(width, height)?;
        Ok(GrayImage {
            width,
            height,
            pixels: vec![0; (width * height) as usize],
        })
    }

    /// Blank 200x200 canvas.
    pub fn blank() -> Self {
        GrayImage::new(DEFAULT_SIDE, DEFAULT_SIDE).expect("default dimensions are valid")
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "pixel buffer length does not match dimensions",
            });
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        let w = self.width;
        self.pixels[(y * w + x) as usize] = v;
    }

    /// Value at signed coordinates, 0 outside the canvas.
    #[inline]
    pub fn get_or_zero(&self, x: i64, y: i64) -> u8 {
        if self.in_bounds(x, y) {
            self.get(x as u32, y as u32)
        } else {
            0
        }
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let s = (y * self.width) as usize;
        &self.pixels[s..s + self.width as usize]
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v > 0).count()
    }

    pub fn is_blank(&self) -> bool {
        self.pixels.iter().all(|&v| v == 0)
    }

    /// Column reversal.
    pub fn flip_horizontal(&self) -> GrayImage {
        let mut out = self.clone();
        let w = self.width as usize;
        for row in out.pixels.chunks_mut(w) {
            row.reverse();
        }
        out
    }

    /// Row reversal.
    pub fn flip_vertical(&self) -> GrayImage {
        let w = self.width as usize;
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks(w).rev() {
            pixels.extend_from_slice(row);
        }
        GrayImage {
            pixels,
            ..*self
        }
    }

    /// Copy the left half onto the right half, reflected about the mid-line.
    pub fn mirror_left_onto_right(&self) -> GrayImage {
        let mut out = self.clone();
        let w = self.width as usize;
        for row in out.pixels.chunks_mut(w) {
            for x in w / 2..w {
                row[x] = row[w - 1 - x];
            }
        }
        out
    }

    /// Copy the right half onto the left half, reflected about the mid-line.
    pub fn mirror_right_onto_left(&self) -> GrayImage {
        self.flip_horizontal()
            .mirror_left_onto_right()
            .flip_horizontal()
    }

    /// Number of pixels that differ from their mid-line reflection.
    pub fn mirror_mismatches(&self) -> usize {
        let w = self.width as usize;
        self.pixels
            .chunks(w)
            .map(|row| (0..w).filter(|&x| row[x] != row[w - 1 - x]).count())
            .sum()
    }

    /// Lossless 8-bit grayscale PNG.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        PngEncoder::new(&mut buf)
            .write_image(&self.pixels, self.width, self.height, ExtendedColorType::L8)
            .map_err(|e| Error::Encode(e.to_string()))?;
        Ok(buf)
    }

    /// Decode an 8-bit grayscale PNG produced by [`GrayImage::encode_png`].
    pub fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| Error::Decode(e.to_string()))?;
        match img {
            image::DynamicImage::ImageLuma8(buf) => {
                let (w, h) = buf.dimensions();
                GrayImage::from_raw(w, h, buf.into_raw())
            }
            other => Err(Error::Decode(format!(
                "expected 8-bit grayscale, found {:?}",
                other.color()
            ))),
        }
    }

    pub fn save_png(&self, path: &Path) -> Result<Vec<u8>> {
        let bytes = self.encode_png()?;
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        Ok(bytes)
    }

    pub fn load_png(path: &Path) -> Result<GrayImage> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        GrayImage::decode_png(&bytes)
    }

    /// Load any supported raster (PNG, PGM, ...) and convert to grayscale.
    /// An odd trailing column is dropped to keep the width even.
    pub fn load_photo(path: &Path) -> Result<GrayImage> {
        let img = image::open(path).map_err(|e| Error::Decode(format!("{}: {e}", path.display())))?;
        let luma = img.to_luma8();
        let (w, h) = luma.dimensions();
        let even = w - (w % 2);
        if even == 0 {
            return Err(Error::InvalidDimensions {
                width: w,
                height: h,
                reason: "photo is too narrow",
            });
        }
        let raw = luma.into_raw();
        let mut pixels = Vec::with_capacity((even * h) as usize);
        for row in raw.chunks(w as usize) {
            pixels.extend_from_slice(&row[..even as usize]);
        }
        GrayImage::from_raw(even, h, pixels)
    }

    /// Crop `[x0, x0+w) x [y0, y0+h)`; `w` must be even.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> Result<GrayImage> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::OutOfBounds {
                width: self.width,
                height: self.height,
            });
        }
        let mut out = GrayImage::new(w, h)?;
        for y in 0..h {
            let src = &self.row(y0 + y)[x0 as usize..(x0 + w) as usize];
            let s = (y * w) as usize;
            out.pixels[s..s + w as usize].copy_from_slice(src);
        }
        Ok(out)
    }

    pub fn sha256_hex(bytes: &[u8]) -> String {
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_image() -> impl Strategy<Value = GrayImage> {
        (1u32..12, 1u32..12).prop_flat_map(|(hw, h)| {
            let w = hw * 2;
            proptest::collection::vec(any::<u8>(), (w * h) as usize)
                .prop_map(move |px| GrayImage::from_raw(w, h, px).unwrap())
        })
    }

    #[test]
    fn rejects_odd_or_empty() {
        assert!(GrayImage::new(3, 4).is_err());
        assert!(GrayImage::new(0, 4).is_err());
        assert!(GrayImage::new(4, 0).is_err());
        assert!(GrayImage::from_raw(4, 2, vec![0; 7]).is_err());
    }

    #[test]
    fn mirror_of_blank_is_blank() {
        let img = GrayImage::blank();
        assert_eq!(img.mirror_left_onto_right(), img);
    }

    #[test]
    fn flip_moves_single_pixel() {
        let mut img = GrayImage::blank();
        img.set(0, 10, 9);
        let f = img.flip_horizontal();
        assert_eq!(f.get(199, 10), 9);
        assert_eq!(f.foreground_count(), 1);
    }

    #[test]
    fn blank_round_trip_keeps_dims() {
        let img = GrayImage::blank();
        let back = GrayImage::decode_png(&img.encode_png().unwrap()).unwrap();
        assert_eq!((back.width(), back.height()), (200, 200));
        assert_eq!(back, img);
    }

    #[test]
    fn truncated_payload_is_decode_error() {
        let mut img = GrayImage::blank();
        img.set(5, 5, 100);
        let bytes = img.encode_png().unwrap();
        let err = GrayImage::decode_png(&bytes[..bytes.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Decode(_)));
        assert!(GrayImage::decode_png(b"not a png").is_err());
    }

    #[test]
    fn crop_extracts_region() {
        let mut img = GrayImage::blank();
        img.set(11, 21, 7);
        let c = img.crop(10, 20, 4, 3).unwrap();
        assert_eq!(c.get(1, 1), 7);
        assert!(img.crop(198, 0, 4, 1).is_err());
    }

    proptest! {
        #[test]
        fn mirror_is_symmetric_and_idempotent(img in arb_image()) {
            let m = img.mirror_left_onto_right();
            prop_assert_eq!(m.mirror_mismatches(), 0);
            prop_assert_eq!(m.mirror_left_onto_right(), m.clone());
            prop_assert_eq!(m.flip_horizontal(), m);
        }

        #[test]
        fn flips_are_involutions(img in arb_image()) {
            prop_assert_eq!(img.flip_horizontal().flip_horizontal(), img.clone());
            prop_assert_eq!(img.flip_vertical().flip_vertical(), img.clone());
        }

        #[test]
        fn png_round_trip_is_lossless(img in arb_image()) {
            let bytes = img.encode_png().unwrap();
            prop_assert_eq!(GrayImage::decode_png(&bytes).unwrap(), img);
        }
    }
}
