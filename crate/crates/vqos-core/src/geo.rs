//! Small geographic helpers shared by the generator, feature assembly,
//! and the radio environment map.

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance between two WGS-84 points, in meters (haversine).
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().atan2((1.0 - a).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_distance_for_same_point() {
        assert_eq!(haversine_m(51.3, 7.5, 51.3, 7.5), 0.0);
    }

    #[test]
    fn one_degree_latitude_is_about_111_km() {
        let d = haversine_m(51.0, 7.5, 52.0, 7.5);
        assert!((d - 111_195.0).abs() < 100.0, "got {d}");
    }

    #[test]
    fn symmetric() {
        let a = haversine_m(51.3, 7.5, 51.4, 7.6);
        let b = haversine_m(51.4, 7.6, 51.3, 7.5);
        assert!((a - b).abs() < 1e-9);
    }
}
