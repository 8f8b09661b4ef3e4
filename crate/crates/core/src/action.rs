use std::f64::consts::PI;

/// A candidate sensing pose: position in world meters and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub x_m: f64,
    pub y_m: f64,
    /// Heading in radians, normalized to (-pi, pi].
    pub heading_rad: f64,
}

impl Action {
    pub fn new(x_m: f64, y_m: f64, heading_rad: f64) -> Self {
        Self {
            x_m,
            y_m,
            heading_rad: wrap_angle(heading_rad),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x_m.is_finite() && self.y_m.is_finite() && self.heading_rad.is_finite()
    }

    pub fn distance_to(&self, other: &Action) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }

    /// Bitwise identity, used for training-set membership.
    pub fn same_as(&self, other: &Action) -> bool {
        self.x_m.to_bits() == other.x_m.to_bits()
            && self.y_m.to_bits() == other.y_m.to_bits()
            && self.heading_rad.to_bits() == other.heading_rad.to_bits()
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}
