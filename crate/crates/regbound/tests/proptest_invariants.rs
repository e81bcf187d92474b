//! Property tests of the model-type invariants.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use regbound::regmodel::{AffineTransform, ControlPointSet, CovarianceSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Weighted and isotropic-weighted specs expand losslessly to general
    /// blocks η_k Ω_{j,0}.
    #[test]
    fn covariance_expansion_is_lossless(
        eta in prop::collection::vec(1e-3f64..1e3, 1..6),
        s1 in 1e-3f64..1e3,
        s2 in 1e-3f64..1e3,
        b in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let k = eta.len();
        let iso = CovarianceSpec::isotropic_weighted(eta.clone(), s1, s2).unwrap();
        let general = iso.expand(2);
        for j in 0..k {
            let o1 = general.omega1(j, 2);
            let o2 = general.omega2(j, 2);
            for i in 0..2 {
                for l in 0..2 {
                    let expect1 = if i == l { eta[j] * s1 } else { 0.0 };
                    let expect2 = if i == l { eta[j] * s2 } else { 0.0 };
                    prop_assert!((o1[(i, l)] - expect1).abs() <= 1e-15 * expect1.abs());
                    prop_assert!((o2[(i, l)] - expect2).abs() <= 1e-15 * expect2.abs());
                }
            }
        }

        // Weighted expansion against the same base matrix.
        let base = DMatrix::from_row_slice(2, 2, &[b[0], b[1], b[2], b[3]]);
        let base = &base * base.transpose() + DMatrix::identity(2, 2);
        let weighted = CovarianceSpec::weighted(eta.clone(), base.clone(), base.clone()).unwrap();
        let general = weighted.expand(2);
        for j in 0..k {
            let o1 = general.omega1(j, 2);
            for i in 0..2 {
                for l in 0..2 {
                    let expect = eta[j] * base[(i, l)];
                    prop_assert!((o1[(i, l)] - expect).abs() <= 1e-15 * expect.abs().max(1e-300));
                }
            }
        }
    }

    /// map_point(t, map_point(t⁻¹, x)) = x for invertible transforms.
    #[test]
    fn map_point_round_trips_through_inverse(
        entries in prop::array::uniform4(-2.0f64..2.0),
        s in prop::array::uniform2(-100.0f64..100.0),
        x in prop::array::uniform2(-1000.0f64..1000.0),
    ) {
        let a = DMatrix::from_row_slice(2, 2, &entries);
        prop_assume!(a.determinant().abs() > 0.05);
        let t = AffineTransform::new(a, DVector::from_column_slice(&s)).unwrap();
        let x = DVector::from_column_slice(&x);
        let inverse = t.inverse().unwrap();
        let back = t.map_point(&inverse.map_point(&x).unwrap()).unwrap();
        let err = (&back - &x).norm() / x.norm().max(1.0);
        prop_assert!(err < 1e-9, "round trip error {err}");
    }

    /// Unit weights reduce the weighted summary to plain moments.
    #[test]
    fn unit_weight_summary_is_plain_moments(
        pts in prop::collection::vec(prop::array::uniform2(-100.0f64..100.0), 2..8),
    ) {
        let cols: Vec<DVector<f64>> =
            pts.iter().map(|p| DVector::from_column_slice(p)).collect();
        let cps = ControlPointSet::from_columns(&cols).unwrap();
        let k = cols.len() as f64;
        let summary = regbound::regmodel::weighted_summary(&cps, &vec![1.0; cols.len()], None).unwrap();
        prop_assert!((summary.gamma() - 1.0).abs() < 1e-15);
        for i in 0..2 {
            let mean: f64 = pts.iter().map(|p| p[i]).sum::<f64>() / k;
            prop_assert!((summary.xbar1()[i] - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            for j in 0..2 {
                let moment: f64 = pts.iter().map(|p| p[i] * p[j]).sum::<f64>() / k;
                prop_assert!((summary.xi()[(i, j)] - moment).abs() <= 1e-12 * moment.abs().max(1.0));
            }
        }
    }
}
