//! Uniform chunk partition and kernel-sized chunk groups.

use super::cloud::{Point, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn of(points: &[Point]) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in points {
            for d in 0..3 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        Self { min, max }
    }

    pub fn extent(&self, d: usize) -> f64 {
        self.max[d] - self.min[d]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("grid dims must be >= 1 on every axis")]
    ZeroDim,
    #[error("kernel must satisfy 1 <= K <= G on every axis")]
    BadKernel,
    #[error("stride must be >= 1 on every axis")]
    ZeroStride,
}

/// One kernel-sized window of adjacent cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkGroup {
    /// Cell coordinate of the window's lowest corner.
    pub origin: [usize; 3],
    /// Linear cell indices covered by the window.
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkGrid {
    bbox: Aabb,
    dims: [usize; 3],
    kernel: [usize; 3],
    stride: [usize; 3],
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

/// Cell index along one axis. Cells are `(lo, hi]` except the first, which
/// also holds `lo`, so boundary points fall into the lower cell.
fn axis_cell(v: f64, lo: f64, extent: f64, g: usize) -> usize {
    if g == 1 || extent <= 0.0 {
        return 0;
    }
    let t = (v - lo) / extent * g as f64;
    (t.ceil() as i64 - 1).clamp(0, g as i64 - 1) as usize
}

/// Partitions `cloud` into `dims` uniform cells over its bounding box and
/// slides `kernel` over the cells with `stride`. Axes with zero extent fall
/// back to a single cell.
pub fn split_grid(
    cloud: &PointCloud,
    dims: [usize; 3],
    kernel: [usize; 3],
    stride: [usize; 3],
) -> Result<ChunkGrid, GridError> {
    if dims.contains(&0) {
        return Err(GridError::ZeroDim);
    }
    if stride.contains(&0) {
        return Err(GridError::ZeroStride);
    }
    if (0..3).any(|d| kernel[d] == 0 || kernel[d] > dims[d]) {
        return Err(GridError::BadKernel);
    }
    let bbox = Aabb::of(cloud.points());
    let mut dims = dims;
    let mut kernel = kernel;
    for d in 0..3 {
        if bbox.extent(d) <= 0.0 {
            dims[d] = 1;
            kernel[d] = 1;
        }
    }
    let mut cells = vec![Vec::new(); dims.iter().product()];
    let mut cell_of = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points().iter().enumerate() {
        let c: Vec<usize> = (0..3)
            .map(|d| axis_cell(p[d], bbox.min[d], bbox.extent(d), dims[d]))
            .collect();
        let idx = c[0] + dims[0] * (c[1] + dims[1] * c[2]);
        cells[idx].push(i);
        cell_of.push(idx);
    }
    Ok(ChunkGrid {
        bbox,
        dims,
        kernel,
        stride,
        cells,
        cell_of,
    })
}

impl ChunkGrid {
    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    /// Effective dims after collapsing degenerate axes.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn kernel(&self) -> [usize; 3] {
        self.kernel
    }

    pub fn stride(&self) -> [usize; 3] {
        self.stride
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, idx: usize) -> &[usize] {
        &self.cells[idx]
    }

    pub fn cell_of(&self, point: usize) -> usize {
        self.cell_of[point]
    }

    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// `floor((G - K) / S) + 1` per axis.
    pub fn groups_per_axis(&self) -> [usize; 3] {
        let mut n = [0; 3];
        for d in 0..3 {
            n[d] = (self.dims[d] - self.kernel[d]) / self.stride[d] + 1;
        }
        n
    }

    pub fn group_count(&self) -> usize {
        self.groups_per_axis().iter().product()
    }

    /// Groups in x-fastest order.
    pub fn groups(&self) -> Vec<ChunkGroup> {
        let n = self.groups_per_axis();
        let mut out = Vec::with_capacity(self.group_count());
        for gz in 0..n[2] {
            for gy in 0..n[1] {
                for gx in 0..n[0] {
                    let origin = [
                        gx * self.stride[0],
                        gy * self.stride[1],
                        gz * self.stride[2],
                    ];
                    let mut cells = Vec::new();
                    for z in origin[2]..origin[2] + self.kernel[2] {
                        for y in origin[1]..origin[1] + self.kernel[1] {
                            for x in origin[0]..origin[0] + self.kernel[0] {
                                cells.push(self.cell_index([x, y, z]));
                            }
                        }
                    }
                    out.push(ChunkGroup { origin, cells });
                }
            }
        }
        out
    }

    /// Point indices of a group, ascending.
    pub fn group_points(&self, group: &ChunkGroup) -> Vec<usize> {
        let mut pts: Vec<usize> = group
            .cells
            .iter()
            .flat_map(|&c| self.cells[c].iter().copied())
            .collect();
        pts.sort_unstable();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(nx: usize, ny: usize) -> PointCloud {
        let mut pts = Vec::new();
        for y in 0..ny {
            for x in 0..nx {
                pts.push([x as f64 + 0.5, y as f64 + 0.5, 0.0]);
            }
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn three_by_three_kernel_two_gives_four_groups() {
        let c = PointCloud::synthetic(500, 1).unwrap();
        let g = split_grid(&c, [3, 3, 1], [2, 2, 1], [1, 1, 1]).unwrap();
        assert_eq!(g.group_count(), 4);
        let groups = g.groups();
        // Neighbouring groups along x share K - S = 1 column of cells.
        let shared = groups[0]
            .cells
            .iter()
            .filter(|c| groups[1].cells.contains(c))
            .count();
        assert_eq!(shared, 2);
    }

    #[test]
    fn singleton_groups_cover_cloud() {
        let c = PointCloud::synthetic(1000, 2).unwrap();
        let g = split_grid(&c, [4, 3, 1], [1, 1, 1], [1, 1, 1]).unwrap();
        assert_eq!(g.group_count(), 12);
        let total: usize = g.groups().iter().map(|gr| g.group_points(gr).len()).sum();
        assert_eq!(total, 1000);
    }

    #[test]
    fn boundary_points_go_to_lower_cell() {
        let c = PointCloud::new(vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [1.5, 0.0, 0.0],
        ])
        .unwrap();
        let g = split_grid(&c, [2, 1, 1], [1, 1, 1], [1, 1, 1]).unwrap();
        assert_eq!(
            (0..4).map(|i| g.cell_of(i)).collect::<Vec<_>>(),
            vec![0, 0, 1, 1]
        );
    }

    #[test]
    fn degenerate_axis_collapses() {
        let g = split_grid(&lattice(4, 3), [4, 3, 5], [1, 1, 5], [1, 1, 1]).unwrap();
        assert_eq!(g.dims(), [4, 3, 1]);
        assert_eq!(g.cell_count(), 12);
        assert!((0..12).all(|c| g.cell(c).len() == 1));
    }

    #[test]
    fn validation() {
        let c = lattice(2, 2);
        assert_eq!(
            split_grid(&c, [0, 1, 1], [1, 1, 1], [1, 1, 1]),
            Err(GridError::ZeroDim)
        );
        assert_eq!(
            split_grid(&c, [2, 2, 1], [3, 1, 1], [1, 1, 1]),
            Err(GridError::BadKernel)
        );
        assert_eq!(
            split_grid(&c, [2, 2, 1], [1, 1, 1], [0, 1, 1]),
            Err(GridError::ZeroStride)
        );
    }
}
