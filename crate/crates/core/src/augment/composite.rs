#[allow(unused_imports)] // supplies f64 math under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::image::{GrayImage, MaskSet, RgbImage, ShadingMap};
use super::plan::AugmentTier;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Background,
    Chair,
    UpperBody,
    LowerBody,
}

/// Replacement imagery for one frame. Missing entries leave that region
/// untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AugmentAssets {
    /// Same size as the frame.
    pub background: Option<RgbImage>,
    /// Textures are tiled over their region.
    pub chair: Option<RgbImage>,
    pub upper_body: Option<RgbImage>,
    pub lower_body: Option<RgbImage>,
}

impl AugmentAssets {
    /// Keeps only the assets a tier is allowed to use.
    pub fn for_tier(&self, tier: AugmentTier) -> Self {
        match tier {
            AugmentTier::None => Self::default(),
            AugmentTier::BackgroundChair => Self {
                background: self.background.clone(),
                chair: self.chair.clone(),
                upper_body: None,
                lower_body: None,
            },
            AugmentTier::Full => self.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeOptions {
    pub seed: u64,
    /// Random integer texture offset per region.
    pub randomize_offsets: bool,
    /// Multiplier on the shading surrogate before texturing, clamped to 1.
    pub gain: f64,
}

impl CompositeOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            randomize_offsets: true,
            gain: 1.0,
        }
    }
}

/// Channel mean normalized to `[0, 1]` where `mask > 0`, zero elsewhere.
pub fn shading_surrogate(frame: &RgbImage, mask: &GrayImage) -> Result<ShadingMap> {
    if frame.dims() != mask.dims() {
        return Err(Error::DimMismatch("frame and mask differ in size"));
    }
    let values = frame
        .as_raw()
        .chunks_exact(3)
        .zip(mask.as_raw())
        .map(|(px, &m)| {
            if m == 0 {
                0.0
            } else {
                (f64::from(px[0]) + f64::from(px[1]) + f64::from(px[2])) / (3.0 * 255.0)
            }
        })
        .collect();
    Ok(ShadingMap::from_values(frame.width(), frame.height(), values))
}

fn blend(under: u8, over: f64, alpha: f64) -> u8 {
    let v = f64::from(under) + (over - f64::from(under)) * alpha;
    v.round().clamp(0.0, 255.0) as u8
}

/// Replaces the background and re-textures chair and body regions.
///
/// Each textured region takes `texture * shading` and is alpha-blended by its
/// mask value. Pixels where every mask is zero are copied unchanged.
pub fn composite(frame: &RgbImage, masks: &MaskSet, assets: &AugmentAssets, options: &CompositeOptions) -> Result<RgbImage> {
    if frame.dims() != masks.dims() {
        return Err(Error::DimMismatch("frame and masks differ in size"));
    }
    if let Some(bg) = &assets.background {
        if bg.dims() != frame.dims() {
            return Err(Error::DimMismatch("background differs from frame in size"));
        }
    }
    let textured = [
        (&masks.chair, &assets.chair),
        (&masks.upper_body, &assets.upper_body),
        (&masks.lower_body, &assets.lower_body),
    ];
    for (_, tex) in &textured {
        if let Some(t) = tex {
            if t.width() == 0 || t.height() == 0 {
                return Err(Error::DimMismatch("empty texture"));
            }
        }
    }

    // Offsets are always drawn so the stream does not depend on which
    // assets are present.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let offsets: [(usize, usize); 3] = core::array::from_fn(|_| {
        let ox = rng.random::<u32>() as usize;
        let oy = rng.random::<u32>() as usize;
        if options.randomize_offsets {
            (ox, oy)
        } else {
            (0, 0)
        }
    });

    let mut out = frame.clone();
    let (w, h) = frame.dims();

    if let Some(bg) = &assets.background {
        for y in 0..h {
            for x in 0..w {
                let m = masks.background.get(x, y);
                if m == 0 {
                    continue;
                }
                let a = f64::from(m) / 255.0;
                let under = out.pixel(x, y);
                let over = bg.pixel(x, y);
                out.set_pixel(x, y, core::array::from_fn(|c| blend(under[c], f64::from(over[c]), a)));
            }
        }
    }

    let gain = options.gain.max(0.0);
    for ((mask, tex), (ox, oy)) in textured.iter().zip(offsets) {
        let Some(tex) = tex else { continue };
        let (ox, oy) = (ox % tex.width(), oy % tex.height());
        for y in 0..h {
            for x in 0..w {
                let m = mask.get(x, y);
                if m == 0 {
                    continue;
                }
                let a = f64::from(m) / 255.0;
                let src = frame.pixel(x, y);
                let shade = ((f64::from(src[0]) + f64::from(src[1]) + f64::from(src[2])) / (3.0 * 255.0) * gain).min(1.0);
                let t = tex.pixel((x + ox) % tex.width(), (y + oy) % tex.height());
                let under = out.pixel(x, y);
                out.set_pixel(x, y, core::array::from_fn(|c| blend(under[c], f64::from(t[c]) * shade, a)));
            }
        }
    }
    Ok(out)
}
