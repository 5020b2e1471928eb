//! Measurement axes through the vertices of regular Platonic solids.
//! Antipodal vertex pairs give one axis each.

use nalgebra::Vector3;

use crate::error::{domain, Result};

const GOLDEN: f64 = 1.618_033_988_749_895;

/// Unit axes for `n ∈ {4, 6, 10}`: cube (4 body diagonals), icosahedron
/// (6 axes) and dodecahedron (10 axes).
pub fn platonic_axes(n: usize) -> Result<Vec<Vector3<f64>>> {
    let p = GOLDEN;
    let raw: Vec<[f64; 3]> = match n {
        4 => cube_diagonals().to_vec(),
        6 => vec![
            [0.0, 1.0, p],
            [0.0, 1.0, -p],
            [1.0, p, 0.0],
            [1.0, -p, 0.0],
            [p, 0.0, 1.0],
            [-p, 0.0, 1.0],
        ],
        10 => {
            let q = 1.0 / p;
            let mut v = cube_diagonals().to_vec();
            v.extend([
                [0.0, q, p],
                [0.0, q, -p],
                [q, p, 0.0],
                [q, -p, 0.0],
                [p, 0.0, q],
                [-p, 0.0, q],
            ]);
            v
        }
        _ => return Err(domain(format!("no Platonic axis set with {n} axes (use 4, 6 or 10)"))),
    };
    Ok(raw.iter().map(|v| Vector3::from(*v).normalize()).collect())
}

fn cube_diagonals() -> [[f64; 3]; 4] {
    [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    #[test]
    fn axes_are_distinct_units_forming_a_frame() {
        for n in [4, 6, 10] {
            let axes = platonic_axes(n).unwrap();
            assert_eq!(axes.len(), n);
            for (i, a) in axes.iter().enumerate() {
                assert!((a.norm() - 1.0).abs() < 1e-15);
                for b in &axes[i + 1..] {
                    assert!(a.dot(b).abs() < 1.0 - 1e-6, "repeated axis in n = {n}");
                }
            }
            // vertex sets of Platonic solids are spherical 2-designs
            let frame: Matrix3<f64> = axes.iter().map(|a| a * a.transpose()).sum();
            let expected = Matrix3::identity() * (n as f64 / 3.0);
            assert!((frame - expected).abs().max() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn equal_angle_sets() {
        // icosahedron axes make equal angles: |cos| = 1/√5
        let axes = platonic_axes(6).unwrap();
        for (i, a) in axes.iter().enumerate() {
            for b in &axes[i + 1..] {
                assert!((a.dot(b).abs() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_counts() {
        assert!(platonic_axes(5).is_err());
        assert!(platonic_axes(3).is_err());
    }
}
