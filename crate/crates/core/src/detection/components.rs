use super::Mask2;
use crate::field::Grid2;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// 1-based label as stored in the label map.
    pub label: u32,
    pub size: usize,
    /// Mean pixel position `(x, y)`.
    pub centroid: (f64, f64),
    /// Inclusive `(x_min, y_min, x_max, y_max)`.
    pub bbox: (usize, usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// 0 for background, otherwise the component label.
    pub labels: Grid2<u32>,
    pub components: Vec<Component>,
}

/// 8-connected labeling. Labels increase in raster order of each
/// component's first pixel.
pub fn connected_components(mask: &Mask2) -> Components {
    let (w, h) = mask.shape();
    let mut labels = Grid2::filled(w, h, 0u32);
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for j0 in 0..h {
        for i0 in 0..w {
            if !mask[(i0, j0)] || labels[(i0, j0)] != 0 {
                continue;
            }
            let label = components.len() as u32 + 1;
            labels[(i0, j0)] = label;
            stack.push((i0, j0));
            let (mut size, mut sx, mut sy) = (0usize, 0.0, 0.0);
            let mut bbox = (i0, j0, i0, j0);
            while let Some((i, j)) = stack.pop() {
                size += 1;
                sx += i as f64;
                sy += j as f64;
                bbox = (bbox.0.min(i), bbox.1.min(j), bbox.2.max(i), bbox.3.max(j));
                for y in j.saturating_sub(1)..=(j + 1).min(h - 1) {
                    for x in i.saturating_sub(1)..=(i + 1).min(w - 1) {
                        if mask[(x, y)] && labels[(x, y)] == 0 {
                            labels[(x, y)] = label;
                            stack.push((x, y));
                        }
                    }
                }
            }
            components.push(Component { label, size, centroid: (sx / size as f64, sy / size as f64), bbox });
        }
    }
    Components { labels, components }
}

/// Clears every component with fewer than `min_size` pixels.
pub fn remove_small_components(mask: &Mask2, min_size: usize) -> Mask2 {
    if min_size <= 1 {
        return mask.clone();
    }
    let cc = connected_components(mask);
    let keep: Vec<bool> = std::iter::once(false).chain(cc.components.iter().map(|c| c.size >= min_size)).collect();
    cc.labels.map(|&l| keep[l as usize])
}
