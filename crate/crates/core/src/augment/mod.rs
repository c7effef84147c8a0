//! Appearance augmentation driven by chroma-key masks.
//!
//! Frames recorded against a green screen come with soft masks for the
//! background, a chair and the upper/lower body. Augmentation replaces the
//! background and re-textures the masked regions. Plain clothing carries
//! little texture, so the per-pixel channel mean serves as a shading layer
//! that modulates the pasted texture.
//!
//! All arithmetic is done on 8-bit sRGB values without linearization.

mod composite;
mod image;
mod plan;

pub use composite::{composite, shading_surrogate, AugmentAssets, CompositeOptions, Region};
pub use image::{GrayImage, MaskSet, RgbImage, ShadingMap};
pub use plan::{plan_augmentation, AugmentPlan, AugmentTier, TierProportions};
