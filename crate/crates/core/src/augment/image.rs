use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Interleaved 8-bit RGB, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::DimMismatch("rgb buffer length != width * height * 3"));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }
}

/// Single-channel 8-bit image; as a mask, `v / 255` is the coverage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimMismatch("gray buffer length != width * height"));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }
}

/// Per-pixel shading values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadingMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ShadingMap {
    pub(crate) fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        Self { width, height, values }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Background, chair, upper-body and lower-body masks of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    pub background: GrayImage,
    pub chair: GrayImage,
    pub upper_body: GrayImage,
    pub lower_body: GrayImage,
}

impl MaskSet {
    /// Checks equal dimensions and that the foreground masks, binarized at
    /// 0.5, do not overlap.
    pub fn new(background: GrayImage, chair: GrayImage, upper_body: GrayImage, lower_body: GrayImage) -> Result<Self> {
        let dims = background.dims();
        if [&chair, &upper_body, &lower_body].iter().any(|m| m.dims() != dims) {
            return Err(Error::DimMismatch("masks differ in size"));
        }
        let set = Self {
            background,
            chair,
            upper_body,
            lower_body,
        };
        let (w, h) = dims;
        for y in 0..h {
            for x in 0..w {
                let on = [&set.chair, &set.upper_body, &set.lower_body]
                    .iter()
                    .filter(|m| m.get(x, y) >= 128)
                    .count();
                if on > 1 {
                    return Err(Error::OverlappingMasks { x, y });
                }
            }
        }
        Ok(set)
    }

    pub fn empty(width: usize, height: usize) -> Self {
        let z = GrayImage::zeros(width, height);
        Self {
            background: z.clone(),
            chair: z.clone(),
            upper_body: z.clone(),
            lower_body: z,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.background.dims()
    }
}
