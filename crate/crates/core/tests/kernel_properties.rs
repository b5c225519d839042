use cint_core::kernel::{kernel_envelope, kernel_sum, KernelPoint};
use cint_core::scales::{compute_scales, PhysicsConfig, ScaleReport};
use cint_core::Point;
use proptest::prelude::*;

fn setup() -> (PhysicsConfig, ScaleReport) {
    let cfg = PhysicsConfig::reference_regime();
    let s = compute_scales(&cfg).unwrap();
    (cfg, s)
}

proptest! {
    // Growing the source separation along the cross-range axis with the search
    // pair held at the source pair only increases the |ztil| exponent.
    #[test]
    fn decays_with_source_separation(t in 0.0f64..3.0, dt in 0.0f64..1.0) {
        let (cfg, s) = setup();
        let c = Point::planar(0.0, 800.0);
        let at = |u: f64| {
            let h = Point::planar(0.5 * u * s.decorrelation_length, 0.0);
            kernel_envelope(&KernelPoint::new(c + h, c - h, c + h, c - h), &s, &cfg)
        };
        prop_assert!(at(t + dt) <= at(t));
    }

    // Moving the search center in range away from the source center.
    #[test]
    fn decays_with_range_offset(t in 0.0f64..5.0, dt in 0.0f64..1.0) {
        let (cfg, s) = setup();
        let (z, zp) = (Point::planar(0.0, 800.0), Point::planar(1e-4, 800.00001));
        let at = |u: f64| {
            let d = Point::planar(0.0, u * s.cint_range_resolution);
            kernel_envelope(&KernelPoint::new(z + d, zp + d, z, zp), &s, &cfg)
        };
        prop_assert!(at(t + dt) <= at(t) * (1.0 + 1e-12));
    }

    // Shifting the cross-range of all four points by one vector changes only
    // the modulus term; moving the search pair in range to restore the
    // modulus difference restores the envelope.
    #[test]
    fn invariant_under_common_center_shift(vx in -0.05f64..0.05, ox in -1e-3f64..1e-3, oz in -2e-5f64..2e-5) {
        let (cfg, s) = setup();
        let z = Point::planar(0.0, 800.0);
        let zp = z + Point::planar(3e-4, 1e-5);
        let y = z + Point::planar(ox, oz);
        let yp = zp + Point::planar(0.5 * ox, -oz);
        let base = kernel_envelope(&KernelPoint::new(y, yp, z, zp), &s, &cfg);
        let modulus = |a: Point, b: Point| ((a + b) * 0.5).norm();
        let gap = modulus(z, zp) - modulus(y, yp);
        let v = Point::planar(vx, 0.0);
        let (zs, zps, ys, yps) = (z + v, zp + v, y + v, yp + v);
        let center = (ys + yps) * 0.5;
        let target = modulus(zs, zps) - gap;
        let dz = (target * target - center.x * center.x).sqrt() - center.z;
        let lift = Point::planar(0.0, dz);
        let moved = kernel_envelope(&KernelPoint::new(ys + lift, yps + lift, zs, zps), &s, &cfg);
        prop_assert!((moved - base).abs() <= 1e-6 * base.max(1e-300), "{} vs {}", moved, base);
    }
}

#[test]
fn two_source_sum_peaks_at_offsets() {
    let (cfg, s) = setup();
    let (px, pz) = (3.92 * s.fine_cross_range_resolution, 0.537 * s.fine_range_resolution);
    let y1 = Point::planar(0.0, 800.0);
    let y2 = y1 + Point::planar(6.0 * px, 4.0 * pz);
    let sources = [y1, y2];
    let (nx, nz) = (41usize, 41usize);
    let mut values = vec![0.0; nx * nz];
    for iz in 0..nz {
        for ix in 0..nx {
            let yp = y1 + Point::planar((ix as f64 - 20.0) * px, (iz as f64 - 20.0) * pz);
            values[iz * nx + ix] = kernel_sum(y1, yp, &sources, &s, &cfg);
        }
    }
    let is_local_max = |ix: usize, iz: usize| {
        let v = values[iz * nx + ix];
        (-1i64..=1).all(|dz| {
            (-1i64..=1).all(|dx| {
                let (jx, jz) = (ix as i64 + dx, iz as i64 + dz);
                jx < 0 || jz < 0 || jx >= nx as i64 || jz >= nz as i64 || values[jz as usize * nx + jx as usize] <= v
            })
        })
    };
    let max = values.iter().copied().fold(0.0, f64::max);
    for (ox, oz) in [(0i64, 0i64), (6, 4), (-6, -4)] {
        let (ix, iz) = ((20 + ox) as usize, (20 + oz) as usize);
        assert!(is_local_max(ix, iz), "no local max at ({ox}, {oz})");
        assert!(values[iz * nx + ix] > 0.1 * max);
    }
    assert_eq!(values[20 * nx + 20], max);
}
