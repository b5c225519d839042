//! Closed-form envelope of the two-point imaging kernel.
//!
//! For search points `(y, y')` and a source pair `(z, z')` the magnitude of
//! the kernel is of the order of
//!
//! ```text
//! exp{ - |ztil|^2 / (2 gamma X_d^2)
//!      - (z3til - y3til)^2 / (2 (c0/B)^2)
//!      - |ztil - ytil|^2 / (2 (gamma1 L/(k0 a))^2)
//!      - |zbar - ybar|^2 / (2 (L/(k0 X_e))^2)
//!      - (|(zbar, z3bar)| - |(ybar, y3bar)|)^2 / (2 (c0/Omega_e)^2) }
//! ```
//!
//! with `gamma1 = 6 sqrt(2 (1 + |zeta|^2 / (2 theta^2)))` and
//! `zeta = (zbar - ybar) / (L/(k0 X_e))`. The envelope follows from
//! replacing the receiver sum by an integral with Gaussian apodization of
//! standard deviation `a/6`. The multiplicative constant and the phase are
//! not modeled, so only peak-normalized comparisons are meaningful.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use crate::scales::{PhysicsConfig, ScaleReport, GAMMA1_MIN};
use crate::Point;

/// Center and difference of two points, split into cross-range and range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterDiff {
    pub center: [f64; 2],
    pub diff: [f64; 2],
    pub range_center: f64,
    pub range_diff: f64,
}

impl CenterDiff {
    /// Inverse of [`center_diff`].
    pub fn points(&self) -> (Point, Point) {
        let c = Point::new(self.center[0], self.center[1], self.range_center);
        let d = Point::new(self.diff[0], self.diff[1], self.range_diff);
        (c + d * 0.5, c + d * -0.5)
    }
}

/// `((y + y') / 2, y - y')`.
pub fn center_diff(y: Point, yp: Point) -> CenterDiff {
    CenterDiff {
        center: [0.5 * (y.x + yp.x), 0.5 * (y.y + yp.y)],
        diff: [y.x - yp.x, y.y - yp.y],
        range_center: 0.5 * (y.z + yp.z),
        range_diff: y.z - yp.z,
    }
}

/// Search pair and source pair in center/difference form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub search: CenterDiff,
    pub source: CenterDiff,
}

impl KernelPoint {
    pub fn new(y: Point, yp: Point, z: Point, zp: Point) -> Self {
        KernelPoint { search: center_diff(y, yp), source: center_diff(z, zp) }
    }
}

fn norm_sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// `6 sqrt(2 (1 + |zeta|^2 / (2 theta^2)))`, `zeta` in units of `L/(k0 X_e)`.
pub fn gamma1(zeta_sq: f64, theta: f64) -> f64 {
    GAMMA1_MIN * (1.0 + zeta_sq / (2.0 * theta * theta)).sqrt()
}

/// The envelope at `kp`, in `[0, 1]`.
pub fn kernel_envelope(kp: &KernelPoint, scales: &ScaleReport, _cfg: &PhysicsConfig) -> f64 {
    let (y, z) = (&kp.search, &kp.source);
    let fine_x = scales.fine_cross_range_resolution;
    let cint_x = scales.cint_cross_range_resolution;
    let xd2 = scales.decorrelation_length * scales.decorrelation_length;

    let center_off = sub(z.center, y.center);
    let zeta_sq = norm_sq(center_off) / (cint_x * cint_x);
    let g1 = gamma1(zeta_sq, scales.theta) * fine_x;

    let modulus = |c: &CenterDiff| (norm_sq(c.center) + c.range_center * c.range_center).sqrt();
    let dr = modulus(z) - modulus(y);
    let range_fine = z.range_diff - y.range_diff;

    let exponent = norm_sq(z.diff) / (2.0 * scales.gamma * xd2)
        + range_fine * range_fine / (2.0 * scales.fine_range_resolution * scales.fine_range_resolution)
        + norm_sq(sub(z.diff, y.diff)) / (2.0 * g1 * g1)
        + zeta_sq / 2.0
        + dr * dr / (2.0 * scales.cint_range_resolution * scales.cint_range_resolution);
    (-exponent).exp()
}

/// `sum_{s,s'} envelope(y, y'; z_s, z_s')` over all ordered source pairs.
pub fn kernel_sum(y: Point, yp: Point, sources: &[Point], scales: &ScaleReport, cfg: &PhysicsConfig) -> f64 {
    let mut total = 0.0;
    for &z in sources {
        for &zp in sources {
            total += kernel_envelope(&KernelPoint::new(y, yp, z, zp), scales, cfg);
        }
    }
    total
}

/// Number of terms in [`kernel_sum`].
pub fn kernel_terms(sources: &[Point]) -> usize {
    sources.len() * sources.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::compute_scales;

    fn setup() -> (PhysicsConfig, ScaleReport) {
        let cfg = PhysicsConfig::reference_regime();
        let s = compute_scales(&cfg).unwrap();
        (cfg, s)
    }

    #[test]
    fn center_diff_cases() {
        let v = Point::planar(0.3, 800.0);
        let cd = center_diff(v, v);
        assert_eq!((cd.center[0], cd.range_center, cd.diff[0], cd.range_diff), (0.3, 800.0, 0.0, 0.0));
        let cd = center_diff(v, -v);
        assert_eq!((cd.center[0], cd.range_center, cd.diff[0], cd.range_diff), (0.0, 0.0, 0.6, 1600.0));
        let (a, b) = (Point::new(1.0, -2.0, 3.0), Point::new(0.5, 4.0, -1.0));
        assert_eq!(center_diff(a, b).points(), (a, b));
    }

    #[test]
    fn envelope_unity_on_matched_pairs() {
        let (cfg, s) = setup();
        let z = Point::planar(0.001, 800.0);
        assert_eq!(kernel_envelope(&KernelPoint::new(z, z, z, z), &s, &cfg), 1.0);
        // A small source offset barely moves the envelope off one.
        let zp = Point::planar(-0.0005, 800.00002);
        let v = kernel_envelope(&KernelPoint::new(z, zp, z, zp), &s, &cfg);
        assert!(v < 1.0 && v > 0.99);
    }

    #[test]
    fn envelope_source_offset_term() {
        let (cfg, s) = setup();
        let d = s.decorrelation_length * (2.0 * s.gamma).sqrt();
        // Search pair equal to the source pair: only the |ztil| term is active.
        let (z, zp) = (Point::planar(0.5 * d, 800.0), Point::planar(-0.5 * d, 800.0));
        let v = kernel_envelope(&KernelPoint::new(z, zp, z, zp), &s, &cfg);
        assert!((v - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn gamma1_lower_bound() {
        let (_, s) = setup();
        assert_eq!(gamma1(0.0, s.theta), 6.0 * 2f64.sqrt());
        assert!(gamma1(1.0, s.theta) > GAMMA1_MIN);
    }

    #[test]
    fn sum_counts_terms() {
        let (cfg, s) = setup();
        let z = Point::planar(0.0, 800.0);
        assert_eq!(kernel_sum(z, z, &[z], &s, &cfg), 1.0);
        let pts = [z, Point::planar(0.01, 800.0), Point::planar(0.0, 800.001)];
        assert_eq!(kernel_terms(&pts), 9);
        let total = kernel_sum(z, z, &pts, &s, &cfg);
        assert!(total > 1.0 && total < 9.0);
    }
}
