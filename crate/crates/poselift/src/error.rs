use std::fmt;
use std::path::PathBuf;

/// Where in a file a parse problem was found. Every part is optional; the
/// display form lists the ones that are known.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Location {
    pub line: Option<u64>,
    pub frame: Option<u64>,
    pub field: Option<String>,
}

impl Location {
    pub fn line(line: u64) -> Self {
        Self {
            line: Some(line),
            ..Self::default()
        }
    }

    pub fn field(field: impl Into<String>) -> Self {
        Self {
            field: Some(field.into()),
            ..Self::default()
        }
    }

    pub fn with_frame(mut self, frame: u64) -> Self {
        self.frame = Some(frame);
        self
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(l) = self.line {
            parts.push(format!("line {l}"));
        }
        if let Some(fr) = self.frame {
            parts.push(format!("frame {fr}"));
        }
        if let Some(field) = &self.field {
            parts.push(format!("field `{field}`"));
        }
        if parts.is_empty() {
            f.write_str("<file>")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: parse error at {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        location: Location,
        message: String,
    },
    #[error("{}: skeleton mismatch: file is for `{found}`, expected `{expected}`", path.display())]
    SkeletonMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{}: {source}", path.display())]
    Invariant {
        path: PathBuf,
        #[source]
        source: poselift_core::Error,
    },
    #[error("{}: image: {message}", path.display())]
    Image { path: PathBuf, message: String },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, location: Location, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            location,
            message: message.into(),
        }
    }

    /// Wraps a serde_json error, keeping its line number.
    pub(crate) fn json(path: impl Into<PathBuf>, e: &serde_json::Error) -> Self {
        let location = if e.line() > 0 {
            Location::line(e.line() as u64)
        } else {
            Location::default()
        };
        Self::parse(path, location, e.to_string())
    }
}
