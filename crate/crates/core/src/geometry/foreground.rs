use std::collections::VecDeque;

use super::{BoundingBox, DepthImage, GeometryError, Result};

/// Pixels of the segmented object inside a detector box.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundMask {
    /// `(u, v)` pixels, sorted row-major.
    pub pixels: Vec<(u32, u32)>,
    /// Lower median of the valid depths inside the box.
    pub z_m: f64,
    pub band_halfwidth: f64,
    pub center_hit: bool,
}

/// Keeps the pixels whose depth lies within `band_halfwidth` of the box's
/// median depth and returns the 4-connected component through the box center.
/// When the center pixel is not retained, the largest component is returned
/// and `center_hit` is false; equal sizes resolve to the component found first
/// in row-major order.
pub fn extract_foreground(depth: &DepthImage, bbox: &BoundingBox, band_halfwidth: f64) -> Result<ForegroundMask> {
    if !bbox.fits(depth.width(), depth.height()) {
        return Err(GeometryError::InvalidBox(format!(
            "box ({}, {})..({}, {}) exceeds {}x{} image",
            bbox.u_min,
            bbox.v_min,
            bbox.u_max,
            bbox.v_max,
            depth.width(),
            depth.height()
        )));
    }
    if !(band_halfwidth >= 0.0) {
        return Err(GeometryError::InvalidBox(format!("band half-width {band_halfwidth} is negative")));
    }

    let mut valid: Vec<f64> = Vec::new();
    for v in bbox.v_min..=bbox.v_max {
        for u in bbox.u_min..=bbox.u_max {
            let d = depth.get(u, v);
            if d > 0.0 {
                valid.push(d);
            }
        }
    }
    if valid.is_empty() {
        return Err(GeometryError::EmptyBox);
    }
    valid.sort_by(f64::total_cmp);
    let z_m = valid[(valid.len() - 1) / 2];

    let bw = bbox.width() as usize;
    let bh = bbox.height() as usize;
    let retained: Vec<bool> = (0..bw * bh)
        .map(|i| {
            let u = bbox.u_min + (i % bw) as u32;
            let v = bbox.v_min + (i / bw) as u32;
            let d = depth.get(u, v);
            d > 0.0 && (d - z_m).abs() <= band_halfwidth
        })
        .collect();

    // Component labels in row-major discovery order.
    let mut label = vec![usize::MAX; bw * bh];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..bw * bh {
        if !retained[start] || label[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = Vec::new();
        label[start] = id;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (x, y) = (i % bw, i / bw);
            let mut visit = |j: usize| {
                if retained[j] && label[j] == usize::MAX {
                    label[j] = id;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < bw {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - bw);
            }
            if y + 1 < bh {
                visit(i + bw);
            }
        }
        components.push(members);
    }

    let (cu, cv) = bbox.center();
    let center_idx = (cv - bbox.v_min) as usize * bw + (cu - bbox.u_min) as usize;
    let (chosen, center_hit) = if retained[center_idx] {
        (label[center_idx], true)
    } else {
        let mut best = 0;
        for (id, c) in components.iter().enumerate() {
            if c.len() > components[best].len() {
                best = id;
            }
        }
        (best, false)
    };

    let mut members = std::mem::take(&mut components[chosen]);
    members.sort_unstable();
    let pixels = members
        .into_iter()
        .map(|i| (bbox.u_min + (i % bw) as u32, bbox.v_min + (i / bw) as u32))
        .collect();
    Ok(ForegroundMask { pixels, z_m, band_halfwidth, center_hit })
}
