//! Fin outlines, equal-area segmentation and kinematic skeletons.

mod builtin;
pub mod polygon;
mod rotate;
mod segment;
mod shape;

pub use builtin::{builtin_shape, builtin_shapes, shape_code, SHAPE_CODES};
pub use rotate::{
    embed, rotate_point, rotate_skeleton, skeleton_to_vector, stroke_axis_distance, Point3,
    SkeletonFrame,
};
pub use segment::{segment_fin, FlatSkeleton, DEFAULT_STRIPS};
pub use shape::{AxisFrame, FinShape};
