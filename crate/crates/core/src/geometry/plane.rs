use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{GeometryError, PointCloud, Result, Vec3};

/// Plane `normal · x + offset = 0` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFit {
    pub normal: Vec3,
    pub offset: f64,
    /// RMS distance of the fitted points from the plane.
    pub residual_rms: f64,
}

const RELATIVE_EIGEN_TOL: f64 = 1e-12;

/// Total-least-squares plane through `patch`: the normal is the eigenvector
/// of the population covariance with the smallest eigenvalue, flipped so it
/// points against `camera_axis`.
///
/// When several eigenvalues tie for smallest, the candidate eigenvector with
/// the lexicographically largest absolute components wins.
pub fn fit_plane(patch: &PointCloud, camera_axis: &Vec3) -> Result<PlaneFit> {
    let pts = patch.points();
    if pts.len() < 3 {
        return Err(GeometryError::DegeneratePatch("fewer than 3 points"));
    }
    let c = patch.centroid();
    let mut cov = Matrix3::zeros();
    for p in pts {
        let r = p - c;
        cov += r * r.transpose();
    }
    cov /= pts.len() as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lam: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let scale = lam[2];
    if scale <= 0.0 {
        return Err(GeometryError::DegeneratePatch("all points coincide"));
    }
    if lam[1] <= RELATIVE_EIGEN_TOL * scale {
        return Err(GeometryError::DegeneratePatch("points are collinear"));
    }

    let tie_tol = RELATIVE_EIGEN_TOL * scale;
    let mut normal = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i].max(0.0) - lam[0] <= tie_tol)
        .map(|&i| eig.eigenvectors.column(i).normalize())
        .max_by(|a, b| {
            let ka = [a.x.abs(), a.y.abs(), a.z.abs()];
            let kb = [b.x.abs(), b.y.abs(), b.z.abs()];
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one eigenvector");
    if normal.dot(camera_axis) > 0.0 {
        normal = -normal;
    }

    let offset = -normal.dot(&c);
    let residual_rms = (pts.iter().map(|p| normal.dot(&(p - c)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(PlaneFit { normal, offset, residual_rms })
}

/// Points within `radius_factor` times the RMS radius of the centroid.
pub fn select_patch(cloud: &PointCloud, radius_factor: f64) -> PointCloud {
    let c = cloud.centroid();
    let ms = cloud.points().iter().map(|p| (p - c).norm_squared()).sum::<f64>() / cloud.len() as f64;
    let limit = radius_factor * ms.sqrt();
    let points: Vec<Vec3> = cloud.points().iter().filter(|p| (*p - c).norm() <= limit).copied().collect();
    if points.is_empty() {
        // Only possible with a non-positive factor; keep the nearest point.
        let nearest = cloud
            .points()
            .iter()
            .min_by(|a, b| (*a - c).norm().total_cmp(&(*b - c).norm()))
            .copied()
            .expect("non-empty cloud");
        return PointCloud::new(cloud.frame(), vec![nearest]).expect("one point");
    }
    PointCloud::new(cloud.frame(), points).expect("non-empty patch")
}
