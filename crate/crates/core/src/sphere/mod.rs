//! Points, tangent vectors and the standard contact frame of the 3-sphere.

mod frame;
mod point;
pub mod poly;

pub use frame::{frame_at, j0, orientation_check, FramePacket};
pub use point::{AmbientVector, CVector, SpherePoint, SPHERE_TOLERANCE};
pub use poly::{frame_bracket_identities, GaussRational, Poly, PolyVectorField};
