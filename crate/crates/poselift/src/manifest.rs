//! Augmentation manifests and PNG input/output.
//!
//! A manifest binds every frame to its segmentation masks and lists the
//! texture pools to draw from. Relative paths resolve against the
//! manifest's directory.
//!
//! ```json
//! {
//!   "frames": [
//!     {"id": 0, "image": "frames/000000.png",
//!      "masks": {"background": "masks/000000_bg.png", "upper_body": "masks/000000_up.png"}}
//!   ],
//!   "assets": {"background": ["bg/studio.png"], "chair": [], "upper_body": ["tex/plaid.png"], "lower_body": []}
//! }
//! ```
//!
//! Missing masks count as all-zero. Masks must be 8-bit single-channel
//! PNGs; frames and textures are read as 8-bit RGB.

use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{ColorType, ImageFormat};
use poselift_core::augment::{GrayImage, MaskSet, RgbImage};
use serde::{Deserialize, Serialize};

use crate::write::{read_text, write_atomic};
use crate::{IoError, Location};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chair: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_body: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_body: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFrame {
    pub id: u64,
    pub image: PathBuf,
    #[serde(default)]
    pub masks: MaskPaths,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetPools {
    #[serde(default)]
    pub background: Vec<PathBuf>,
    #[serde(default)]
    pub chair: Vec<PathBuf>,
    #[serde(default)]
    pub upper_body: Vec<PathBuf>,
    #[serde(default)]
    pub lower_body: Vec<PathBuf>,
}

impl AssetPools {
    /// Pools in compositing order: background, chair, upper body, lower body.
    pub fn pools(&self) -> [&[PathBuf]; 4] {
        [&self.background, &self.chair, &self.upper_body, &self.lower_body]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub frames: Vec<ManifestFrame>,
    #[serde(default)]
    pub assets: AssetPools,
    /// Directory relative paths resolve against; not serialized.
    #[serde(skip)]
    pub base: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let mut m: Manifest = serde_json::from_str(&read_text(path)?).map_err(|e| IoError::json(path, &e))?;
        for (i, pair) in m.frames.windows(2).enumerate() {
            if pair[1].id <= pair[0].id {
                return Err(IoError::parse(
                    path,
                    Location::field(format!("frames[{}].id", i + 1)).with_frame(pair[1].id),
                    "frame ids must be strictly increasing",
                ));
            }
        }
        m.base = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok(m)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base.join(p)
        }
    }

    pub fn frame_ids(&self) -> Vec<u64> {
        self.frames.iter().map(|f| f.id).collect()
    }

    /// Reads the masks of `frame`, substituting zeros for absent ones.
    pub fn load_masks(&self, frame: &ManifestFrame, width: usize, height: usize) -> Result<MaskSet, IoError> {
        let m = &frame.masks;
        let load = |p: &Option<PathBuf>| match p {
            Some(p) => read_mask(&self.resolve(p)),
            None => Ok(GrayImage::zeros(width, height)),
        };
        let (bg, chair, upper, lower) = (load(&m.background)?, load(&m.chair)?, load(&m.upper_body)?, load(&m.lower_body)?);
        MaskSet::new(bg, chair, upper, lower).map_err(|source| IoError::Invariant {
            path: self.resolve(&frame.image),
            source,
        })
    }
}

fn decode(path: &Path) -> Result<image::DynamicImage, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| IoError::Image {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

pub fn read_rgb(path: &Path) -> Result<RgbImage, IoError> {
    let img = decode(path)?.into_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w as usize, h as usize, img.into_raw()).map_err(|source| IoError::Invariant {
        path: path.to_owned(),
        source,
    })
}

pub fn read_mask(path: &Path) -> Result<GrayImage, IoError> {
    let img = decode(path)?;
    if img.color() != ColorType::L8 {
        return Err(IoError::Image {
            path: path.to_owned(),
            message: format!("masks must be 8-bit single-channel, found {:?}", img.color()),
        });
    }
    let img = img.into_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w as usize, h as usize, img.into_raw()).map_err(|source| IoError::Invariant {
        path: path.to_owned(),
        source,
    })
}

fn encode(path: &Path, width: usize, height: usize, data: &[u8], color: image::ExtendedColorType) -> Result<Vec<u8>, IoError> {
    let mut out = Cursor::new(Vec::new());
    image::write_buffer_with_format(&mut out, data, width as u32, height as u32, color, ImageFormat::Png).map_err(|e| {
        IoError::Image {
            path: path.to_owned(),
            message: e.to_string(),
        }
    })?;
    Ok(out.into_inner())
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<(), IoError> {
    let (w, h) = img.dims();
    write_atomic(path, &encode(path, w, h, img.as_raw(), image::ExtendedColorType::Rgb8)?)
}

pub fn write_mask(path: &Path, img: &GrayImage) -> Result<(), IoError> {
    let (w, h) = img.dims();
    write_atomic(path, &encode(path, w, h, img.as_raw(), image::ExtendedColorType::L8)?)
}

/// Bilinear resize, used to fit background plates to the frame size.
pub fn resize_rgb(img: &RgbImage, width: usize, height: usize) -> RgbImage {
    if img.dims() == (width, height) {
        return img.clone();
    }
    let src = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.as_raw().to_vec())
        .expect("buffer matches dimensions");
    let out = image::imageops::resize(&src, width as u32, height as u32, image::imageops::FilterType::Triangle);
    RgbImage::new(width, height, out.into_raw()).expect("resize output matches dimensions")
}
