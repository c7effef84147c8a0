//! Camera calibration files: a JSON object keyed by camera id,
//! `{"cam0": {"f": 1145.0, "cx": 512.5, "cy": 515.4, "width": 1000, "height": 1002}}`.

use std::path::Path;

use indexmap::IndexMap;
use poselift_core::geometry::CameraIntrinsics;
use serde::{Deserialize, Serialize};

use crate::write::read_text;
use crate::{IoError, Location};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCamera {
    f: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    cameras: IndexMap<String, CameraIntrinsics>,
}

impl Calibration {
    pub fn new(cameras: IndexMap<String, CameraIntrinsics>) -> Self {
        Self { cameras }
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, IoError> {
        let raw: IndexMap<String, RawCamera> = serde_json::from_str(text).map_err(|e| IoError::json(path, &e))?;
        if raw.is_empty() {
            return Err(IoError::parse(path, Location::default(), "no cameras defined"));
        }
        let cameras = raw
            .into_iter()
            .map(|(id, c)| {
                CameraIntrinsics::new(c.f, c.cx, c.cy, c.width, c.height)
                    .map(|cam| (id.clone(), cam))
                    .map_err(|e| IoError::parse(path, Location::field(id), e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { cameras })
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Self::parse(&read_text(path)?, path)
    }

    pub fn get(&self, id: &str) -> Option<&CameraIntrinsics> {
        self.cameras.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.cameras.keys().map(String::as_str)
    }

    /// Picks a camera: an explicit id first, then the id recorded in an
    /// archive, then the only camera of a single-camera file.
    pub fn resolve(&self, requested: Option<&str>, recorded: Option<&str>) -> Result<(String, CameraIntrinsics), String> {
        let id = match requested.or(recorded) {
            Some(id) => id.to_owned(),
            None if self.cameras.len() == 1 => self.cameras.keys().next().cloned().unwrap_or_default(),
            None => return Err(format!("calibration has {} cameras; pick one with --camera", self.cameras.len())),
        };
        self.cameras
            .get(&id)
            .map(|c| (id.clone(), *c))
            .ok_or_else(|| format!("camera `{id}` not found in calibration"))
    }

    pub fn to_json(&self) -> String {
        let raw: IndexMap<&str, RawCamera> = self
            .cameras
            .iter()
            .map(|(id, c)| {
                let pp = c.principal_point();
                let (width, height) = c.image_size();
                (
                    id.as_str(),
                    RawCamera {
                        f: c.focal(),
                        cx: pp.x,
                        cy: pp.y,
                        width,
                        height,
                    },
                )
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("serializing plain data") + "\n"
    }
}
