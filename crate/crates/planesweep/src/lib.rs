//! Camera geometry for plane-sweep stereo: pinhole projection, per-depth
//! sweep homographies, and bilinear warping of feature maps into the
//! reference view.

pub mod camera;
pub mod error;
pub mod homography;
pub mod plan;
pub mod warp;

pub use camera::{format_camera_file, parse_camera_file, rotation_from_angles, CameraModel};
pub use error::{GeometryError, Result};
pub use homography::{sweep_homography, Homography};
pub use plan::{depth_planes, DepthPlan};
pub use warp::{warp_bilinear, warp_with_plan, WarpPlan};
