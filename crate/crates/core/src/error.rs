use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    // skeleton
    #[error("skeleton needs at least 2 joints, got {0}")]
    TooFewJoints(usize),
    #[error("joint index {index} out of range for {len} joints ({context})")]
    IndexOutOfRange {
        index: usize,
        len: usize,
        context: &'static str,
    },
    #[error("duplicate joint name `{0}`")]
    DuplicateJointName(String),
    #[error("parent graph contains a cycle through joint {0}")]
    CycleDetected(usize),
    #[error("joints {0} and {1} are both self-parented roots")]
    MultipleRoots(usize, usize),
    #[error("declared root {0} is not its own parent")]
    InvalidRoot(usize),
    #[error("invalid evaluation subset: {0}")]
    InvalidEvalSubset(&'static str),
    #[error("invalid symmetry group `{group}`: {reason}")]
    InvalidSymmetry { group: String, reason: &'static str },

    // poses
    #[error("non-finite coordinate at joint {0}")]
    NonFinite(usize),
    #[error("expected {expected} joints, got {actual}")]
    JointCountMismatch { expected: usize, actual: usize },
    #[error("root-relative pose has nonzero root joint")]
    RootNotAtOrigin,
    #[error("pose is in the wrong coordinate frame")]
    WrongFrame,
    #[error("poses belong to different skeletons")]
    SkeletonMismatch,
    #[error("poses are in different coordinate frames")]
    FrameMismatch,

    // representations
    #[error("fusion weights for joint {0} do not sum to one")]
    NonAffineWeights(usize),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("ridge lambda must be finite and >= 0")]
    BadRegularizer,

    // geometry
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("degenerate centered spread in {0}")]
    DegenerateSpread(&'static str),
    #[error("non-positive depth estimate: 2D and 3D offsets are anti-correlated")]
    NonPositiveDepth,
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("invalid crop box: {0}")]
    InvalidCrop(&'static str),
    #[error("matrix is not a proper rotation")]
    NotARotation,

    // metrics
    #[error("joint subset is empty")]
    EmptySubset,
    #[error("invalid threshold range: {0}")]
    BadRange(&'static str),
    #[error("degenerate joint configuration for similarity alignment")]
    DegenerateConfiguration,
    #[error("no frames left after sampling with stride {0}")]
    EmptyAfterSampling(usize),
    #[error("frame {frame}: {reason}")]
    LabelMismatch { frame: usize, reason: &'static str },

    // analysis
    #[error("k-means needs at least k = {k} poses, got {got}")]
    TooFewPoses { k: usize, got: usize },
    #[error("class map has no entry for cluster {0}")]
    IncompleteMap(usize),
    #[error("need at least {needed} frames, got {got}")]
    InsufficientFrames { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("normal equations are rank deficient")]
    RankDeficient,

    // augment
    #[error("image dimensions do not match: {0}")]
    DimMismatch(&'static str),
    #[error("foreground masks overlap at pixel ({x}, {y})")]
    OverlappingMasks { x: usize, y: usize },
    #[error("proportions must be non-negative and sum to 1")]
    BadProportions,
}
