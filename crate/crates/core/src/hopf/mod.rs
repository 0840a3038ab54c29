//! The Hopf fibration `p(w) = w2 / w1`: charts on the base sphere, horizontal
//! lifts and their phases, area forms, base metrics, and lifts of base maps.

mod area;
mod basemap;
mod chart;
mod curve;
mod lift;
mod metric;

pub use area::{cap_area, fiber_contraction, gauss_legendre, structure_equation_residual, AreaForm, Region};
pub use basemap::{
    horizontal_lift_vector, lift_base_map, phase_loop, AxisRotation, BaseMap, EquivariantLift, FlowQuotient,
    IdentityMap,
};
pub use chart::{
    angle_between, chart_to_unit, chart_velocity_to_unit, project, project_unit, project_vector, section,
    unit_to_chart, unit_velocity_to_chart, Chart, RiemannSpherePoint, Vec3,
};
pub use curve::BaseCurve;
pub use lift::{horizontal_lift, wrap_angle, LiftResult, DEFAULT_LIFT_STEPS};
pub use metric::{polar_frame, quotient_dilatation, MetricOnS2};
