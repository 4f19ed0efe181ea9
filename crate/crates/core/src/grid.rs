//! Rasterized planar Lipschitz domains.
//!
//! A domain is loaded from a disk, a polygon or an explicit cell mask at a
//! grid spacing `h`. Disks and polygons carry a signed inside function
//! (positive inside, a distance near the boundary) sampled at grid nodes;
//! the boundary is reconstructed per cell from sub-cell zero crossings, so
//! the perimeter of a disk converges to `2 pi R` rather than to the
//! staircase limit. Boundary cells carry fractional areas from the clipped
//! cell polygon, which keeps the domain measure consistent between the grid
//! and the rearrangement profiles. Masks are unions of closed cells, for
//! which the staircase boundary is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::MeasureConstants;
use crate::numeric::csum;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("degenerate polygon")]
    DegeneratePolygon,
    #[error("disk radius must be positive")]
    InvalidRadius,
    #[error("empty mask")]
    EmptyMask,
    #[error("mask rows must be nonempty and of equal length")]
    RaggedMask,
    #[error("rasterized domain is empty")]
    EmptyDomain,
    #[error("domain is not 4-connected")]
    Disconnected,
    #[error("field length {found} does not match domain cell count {expected}")]
    FieldSize { expected: usize, found: usize },
    #[error("field does not belong to this domain")]
    FieldDomainMismatch,
    #[error("field values must be nonnegative and finite (cell {0})")]
    NegativeFieldValue(usize),
    #[error("p must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("domain spec parse error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Shape description of the domain spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", content = "params", rename_all = "lowercase")]
pub enum ShapeSpec {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Row-major 0/1 matrix; row 0 is the bottom row of cells.
    Mask(Vec<Vec<u8>>),
}

/// Domain spec file: `{ "shape": ..., "params": {...}, "h": ... }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    pub h: f64,
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self, GridError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One active cell of the raster.
#[derive(Debug, Clone, Copy)]
pub struct CellInfo {
    pub ix: usize,
    pub iy: usize,
    pub center: [f64; 2],
    /// Cell measure; fractional for boundary cells.
    pub area: f64,
    /// Distance from the cell center to the domain boundary.
    pub boundary_distance: f64,
    /// Inside fraction of the four cell faces, ordered E, W, N, S; flux
    /// areas for cut-cell balances.
    pub face_inside: [f64; 4],
}

/// A reconstructed piece of the domain boundary, attached to an active cell.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySegment {
    pub cell: usize,
    pub midpoint: [f64; 2],
    /// Unit outward normal.
    pub normal: [f64; 2],
    pub length: f64,
}

/// A face of a merged boundary sliver toward an active cell other than its
/// owner. Flux balances over merged control volumes need these couplings.
#[derive(Debug, Clone, Copy)]
pub struct MergedFace {
    pub owner: usize,
    pub other: usize,
    /// Inside fraction of the face.
    pub inside: f64,
}

#[derive(Debug, Clone)]
pub struct GridDomain {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    /// Raster lookup: `iy * nx + ix` to active cell id, -1 when inactive.
    index: Vec<i32>,
    cells: Vec<CellInfo>,
    segments: Vec<BoundarySegment>,
    merged_faces: Vec<MergedFace>,
    area: f64,
    perimeter: f64,
    stamp: u64,
}

const DIRS4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const DIRS8: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, 1),
    (1, -1),
    (-1, -1),
];

impl GridDomain {
    pub fn load(spec: &DomainSpec) -> Result<Self, GridError> {
        if !(spec.h.is_finite() && spec.h > 0.0) {
            return Err(GridError::InvalidSpacing(spec.h));
        }
        match &spec.shape {
            ShapeSpec::Disk { center, radius } => Self::disk(*center, *radius, spec.h),
            ShapeSpec::Polygon { vertices } => Self::polygon(vertices, spec.h),
            ShapeSpec::Mask(rows) => Self::from_mask(rows, spec.h),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GridError> {
        Self::load(&DomainSpec::from_json(text)?)
    }

    pub fn disk(center: [f64; 2], radius: f64, h: f64) -> Result<Self, GridError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GridError::InvalidRadius);
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::InvalidSpacing(h));
        }
        let phi = move |x: f64, y: f64| radius - ((x - center[0]).hypot(y - center[1]));
        let lo = [center[0] - radius, center[1] - radius];
        let hi = [center[0] + radius, center[1] + radius];
        Self::from_implicit(&phi, lo, hi, h)
    }

    pub fn polygon(vertices: &[[f64; 2]], h: f64) -> Result<Self, GridError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::InvalidSpacing(h));
        }
        if vertices.len() < 3 || polygon_area(vertices).abs() < 1e-12 {
            return Err(GridError::DegeneratePolygon);
        }
        let verts = vertices.to_vec();
        let phi = move |x: f64, y: f64| polygon_signed_inside(&verts, x, y);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in vertices {
            lo[0] = lo[0].min(v[0]);
            lo[1] = lo[1].min(v[1]);
            hi[0] = hi[0].max(v[0]);
            hi[1] = hi[1].max(v[1]);
        }
        Self::from_implicit(&phi, lo, hi, h)
    }

    /// Axis-aligned rectangle `[0, w] x [0, d]`.
    pub fn rectangle(w: f64, d: f64, h: f64) -> Result<Self, GridError> {
        Self::polygon(&[[0.0, 0.0], [w, 0.0], [w, d], [0.0, d]], h)
    }

    pub fn unit_square(h: f64) -> Result<Self, GridError> {
        Self::rectangle(1.0, 1.0, h)
    }

    /// Unit square minus its upper-right quarter.
    pub fn l_shape(h: f64) -> Result<Self, GridError> {
        Self::polygon(
            &[
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 0.5],
                [0.5, 0.5],
                [0.5, 1.0],
                [0.0, 1.0],
            ],
            h,
        )
    }

    /// Rasterization of an implicit region `phi >= 0` over the padded
    /// bounding box `[lo, hi]`.
    fn from_implicit(
        phi: &dyn Fn(f64, f64) -> f64,
        lo: [f64; 2],
        hi: [f64; 2],
        h: f64,
    ) -> Result<Self, GridError> {
        let origin = [
            h * ((lo[0] / h).floor() - 2.0),
            h * ((lo[1] / h).floor() - 2.0),
        ];
        let nx = ((hi[0] + 2.0 * h - origin[0]) / h).ceil() as usize + 1;
        let ny = ((hi[1] + 2.0 * h - origin[1]) / h).ceil() as usize + 1;

        // Node values of the inside function.
        let mut node = vec![0.0f64; (nx + 1) * (ny + 1)];
        for jy in 0..=ny {
            for jx in 0..=nx {
                node[jy * (nx + 1) + jx] =
                    phi(origin[0] + jx as f64 * h, origin[1] + jy as f64 * h);
            }
        }

        let raster = |ix: usize, iy: usize| iy * nx + ix;
        let mut active = vec![false; nx * ny];
        let mut raw_area = vec![0.0f64; nx * ny];
        let mut raw_segments: Vec<Vec<RawSegment>> = (0..nx * ny).map(|_| Vec::new()).collect();

        for iy in 0..ny {
            for ix in 0..nx {
                let x0 = origin[0] + ix as f64 * h;
                let y0 = origin[1] + iy as f64 * h;
                let corners = [
                    [x0, y0],
                    [x0 + h, y0],
                    [x0 + h, y0 + h],
                    [x0, y0 + h],
                ];
                let f = [
                    node[iy * (nx + 1) + ix],
                    node[iy * (nx + 1) + ix + 1],
                    node[(iy + 1) * (nx + 1) + ix + 1],
                    node[(iy + 1) * (nx + 1) + ix],
                ];
                let inside = [f[0] >= 0.0, f[1] >= 0.0, f[2] >= 0.0, f[3] >= 0.0];
                let count = inside.iter().filter(|&&b| b).count();

                let cx = x0 + 0.5 * h;
                let cy = y0 + 0.5 * h;
                active[raster(ix, iy)] = phi(cx, cy) > 0.0;

                if count == 0 {
                    continue;
                }
                if count == 4 {
                    raw_area[raster(ix, iy)] = h * h;
                    continue;
                }
                // A mixed cell whose inside corners all sit exactly on the
                // zero level with an outside center only touches the domain
                // along cell edges (a reentrant corner of a grid-aligned
                // polygon). The boundary is those edges, not a chord.
                let touches_only = !active[raster(ix, iy)]
                    && (0..4).all(|k| !inside[k] || f[k] == 0.0);
                if touches_only {
                    for k in 0..4 {
                        let k2 = (k + 1) % 4;
                        if f[k] == 0.0 && f[k2] == 0.0 {
                            if let Some(seg) = make_segment(corners[k], corners[k2], phi, h) {
                                raw_segments[raster(ix, iy)].push(seg);
                            }
                        }
                    }
                    continue;
                }
                let cell = march_cell(&corners, &f, &inside, phi(cx, cy) >= 0.0);
                raw_area[raster(ix, iy)] = cell.area;
                for (p1, p2) in cell.chords {
                    if let Some(seg) = make_segment(p1, p2, phi, h) {
                        raw_segments[raster(ix, iy)].push(seg);
                    }
                }
            }
        }

        // Inside-length fractions of the cell faces, from the same node
        // values that drive the boundary reconstruction.
        let frac = |fa: f64, fb: f64| -> f64 {
            match (fa >= 0.0, fb >= 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                (true, false) => fa / (fa - fb),
                (false, true) => fb / (fb - fa),
            }
        };
        let mut faces = vec![[0.0f64; 4]; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let at = |jx: usize, jy: usize| node[jy * (nx + 1) + jx];
                faces[raster(ix, iy)] = [
                    frac(at(ix + 1, iy), at(ix + 1, iy + 1)), // E
                    frac(at(ix, iy), at(ix, iy + 1)),         // W
                    frac(at(ix, iy + 1), at(ix + 1, iy + 1)), // N
                    frac(at(ix, iy), at(ix + 1, iy)),         // S
                ];
            }
        }

        Self::assemble(
            nx,
            ny,
            h,
            origin,
            active,
            raw_area,
            raw_segments,
            Some(faces),
            Some(phi),
        )
    }

    /// A mask is a union of closed cells; its boundary is exactly the
    /// staircase of exposed faces.
    pub fn from_mask(rows: &[Vec<u8>], h: f64) -> Result<Self, GridError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::InvalidSpacing(h));
        }
        if rows.is_empty() || rows[0].is_empty() {
            return Err(GridError::EmptyMask);
        }
        let nx = rows[0].len();
        let ny = rows.len();
        if rows.iter().any(|r| r.len() != nx) {
            return Err(GridError::RaggedMask);
        }
        if rows.iter().all(|r| r.iter().all(|&v| v == 0)) {
            return Err(GridError::EmptyMask);
        }
        let origin = [0.0, 0.0];
        let raster = |ix: usize, iy: usize| iy * nx + ix;
        let mut active = vec![false; nx * ny];
        let mut raw_area = vec![0.0f64; nx * ny];
        let mut raw_segments: Vec<Vec<RawSegment>> = (0..nx * ny).map(|_| Vec::new()).collect();

        for iy in 0..ny {
            for ix in 0..nx {
                if rows[iy][ix] == 0 {
                    continue;
                }
                active[raster(ix, iy)] = true;
                raw_area[raster(ix, iy)] = h * h;
                let cx = (ix as f64 + 0.5) * h;
                let cy = (iy as f64 + 0.5) * h;
                for (dx, dy) in DIRS4 {
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    let exposed = jx < 0
                        || jy < 0
                        || jx >= nx as i64
                        || jy >= ny as i64
                        || rows[jy as usize][jx as usize] == 0;
                    if exposed {
                        raw_segments[raster(ix, iy)].push(RawSegment {
                            midpoint: [
                                cx + dx as f64 * 0.5 * h,
                                cy + dy as f64 * 0.5 * h,
                            ],
                            normal: [dx as f64, dy as f64],
                            length: h,
                        });
                    }
                }
            }
        }
        Self::assemble(nx, ny, h, origin, active, raw_area, raw_segments, None, None)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        nx: usize,
        ny: usize,
        h: f64,
        origin: [f64; 2],
        active: Vec<bool>,
        raw_area: Vec<f64>,
        raw_segments: Vec<Vec<RawSegment>>,
        faces: Option<Vec<[f64; 4]>>,
        phi: Option<&dyn Fn(f64, f64) -> f64>,
    ) -> Result<Self, GridError> {
        let raster = |ix: usize, iy: usize| iy * nx + ix;
        let center = |ix: usize, iy: usize| {
            [
                origin[0] + (ix as f64 + 0.5) * h,
                origin[1] + (iy as f64 + 0.5) * h,
            ]
        };

        // Compact active cells.
        let mut index = vec![-1i32; nx * ny];
        let mut cells = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let r = raster(ix, iy);
                if active[r] {
                    index[r] = cells.len() as i32;
                    let c = center(ix, iy);
                    cells.push(CellInfo {
                        ix,
                        iy,
                        center: c,
                        area: raw_area[r],
                        boundary_distance: phi.map_or(0.0, |p| p(c[0], c[1]).max(0.0)),
                        face_inside: faces.as_ref().map_or([1.0; 4], |f| f[r]),
                    });
                }
            }
        }
        if cells.is_empty() {
            return Err(GridError::EmptyDomain);
        }

        // Inactive cells with positive clipped area are boundary slivers:
        // each merges into an adjacent active cell, carrying its area, its
        // boundary segments and — for flux balances — its faces toward the
        // other active neighbors. Zero-area cells that only contribute
        // boundary pieces attach each segment to the nearest active cell.
        let mut segments: Vec<BoundarySegment> = Vec::new();
        let mut merged_faces: Vec<MergedFace> = Vec::new();
        let area_eps = 1e-12 * h * h;
        for iy in 0..ny {
            for ix in 0..nx {
                let r = raster(ix, iy);
                if active[r] {
                    for seg in &raw_segments[r] {
                        segments.push(BoundarySegment {
                            cell: index[r] as usize,
                            midpoint: seg.midpoint,
                            normal: seg.normal,
                            length: seg.length,
                        });
                    }
                } else if raw_area[r] > area_eps {
                    let Some(owner) = adopt(&active, &index, nx, ny, ix, iy) else {
                        continue;
                    };
                    cells[owner].area += raw_area[r];
                    for seg in &raw_segments[r] {
                        segments.push(BoundarySegment {
                            cell: owner,
                            midpoint: seg.midpoint,
                            normal: seg.normal,
                            length: seg.length,
                        });
                    }
                    if let Some(faces) = faces.as_ref() {
                        for (k, (dx, dy)) in DIRS4.into_iter().enumerate() {
                            let jx = ix as i64 + dx;
                            let jy = iy as i64 + dy;
                            if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                                continue;
                            }
                            let jr = jy as usize * nx + jx as usize;
                            if !active[jr] {
                                continue;
                            }
                            let other = index[jr] as usize;
                            if other == owner || faces[r][k] <= 0.0 {
                                continue;
                            }
                            merged_faces.push(MergedFace {
                                owner,
                                other,
                                inside: faces[r][k],
                            });
                        }
                    }
                } else {
                    for seg in &raw_segments[r] {
                        let Some(owner) =
                            adopt_near(&active, &index, nx, ny, ix, iy, seg.midpoint, &center)
                        else {
                            continue;
                        };
                        segments.push(BoundarySegment {
                            cell: owner,
                            midpoint: seg.midpoint,
                            normal: seg.normal,
                            length: seg.length,
                        });
                    }
                }
            }
        }

        // Degenerate sub-cell features can leave an active cell with no
        // reconstructed area; cell measures must stay positive.
        let area_floor = 1e-12 * h * h;
        for c in cells.iter_mut() {
            if c.area < area_floor {
                c.area = area_floor;
            }
        }

        let area = csum(cells.iter().map(|c| c.area));
        let perimeter = csum(segments.iter().map(|s| s.length));

        // Masks get the boundary distance from a cell-level breadth-first
        // sweep; implicit shapes already carry the signed distance.
        let mut domain = Self {
            nx,
            ny,
            h,
            origin,
            index,
            cells,
            segments,
            merged_faces,
            area,
            perimeter,
            stamp: 0,
        };
        if phi.is_none() {
            domain.fill_mask_distances();
        }
        domain.check_connected()?;
        domain.stamp = domain.compute_stamp();
        Ok(domain)
    }

    fn fill_mask_distances(&mut self) {
        let mut dist = vec![f64::INFINITY; self.cells.len()];
        let mut queue = std::collections::VecDeque::new();
        for seg in &self.segments {
            if dist[seg.cell].is_infinite() {
                dist[seg.cell] = 0.5 * self.h;
                queue.push_back(seg.cell);
            }
        }
        // Domain with no boundary cannot happen on a bounded raster.
        while let Some(i) = queue.pop_front() {
            for (dx, dy) in DIRS4 {
                if let Some(j) = self.neighbor(i, dx, dy) {
                    if dist[j].is_infinite() {
                        dist[j] = dist[i] + self.h;
                        queue.push_back(j);
                    }
                }
            }
        }
        for (c, d) in self.cells.iter_mut().zip(dist) {
            c.boundary_distance = if d.is_finite() { d } else { 0.5 * self.h };
        }
    }

    fn check_connected(&self) -> Result<(), GridError> {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = std::collections::VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for (dx, dy) in DIRS4 {
                if let Some(j) = self.neighbor(i, dx, dy) {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        if count != self.cells.len() {
            return Err(GridError::Disconnected);
        }
        Ok(())
    }

    fn compute_stamp(&self) -> u64 {
        let mut s: u64 = 0x9E37_79B9_7F4A_7C15;
        for v in [
            self.nx as u64,
            self.ny as u64,
            self.h.to_bits(),
            self.cells.len() as u64,
            self.area.to_bits(),
            self.perimeter.to_bits(),
        ] {
            s ^= v.wrapping_add(0x9E37_79B9_7F4A_7C15)
                .wrapping_mul(0xBF58_476D_1CE4_E5B9);
            s = s.rotate_left(27);
        }
        s
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[CellInfo] {
        &self.cells
    }

    pub fn segments(&self) -> &[BoundarySegment] {
        &self.segments
    }

    /// Couplings induced by merged boundary slivers; empty on masks.
    pub fn merged_faces(&self) -> &[MergedFace] {
        &self.merged_faces
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn raster_size(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Lower-left corner of the raster in domain coordinates.
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub(crate) fn stamp(&self) -> u64 {
        self.stamp
    }

    pub fn cell_at(&self, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return None;
        }
        let v = self.index[iy as usize * self.nx + ix as usize];
        (v >= 0).then_some(v as usize)
    }

    pub fn neighbor(&self, cell: usize, dx: i64, dy: i64) -> Option<usize> {
        let c = &self.cells[cell];
        self.cell_at(c.ix as i64 + dx, c.iy as i64 + dy)
    }

    /// Radius of the ball with the same measure as the domain.
    pub fn schwarz_radius(&self, constants: &MeasureConstants) -> f64 {
        constants.ball_radius(self.area)
    }

    /// Surface measure of the equal-measure ball.
    pub fn schwarz_boundary_measure(&self, constants: &MeasureConstants) -> f64 {
        constants.sphere_measure(self.schwarz_radius(constants))
    }

    /// Bounding box of the active cells (outer cell edges).
    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in &self.cells {
            lo[0] = lo[0].min(c.center[0] - 0.5 * self.h);
            lo[1] = lo[1].min(c.center[1] - 0.5 * self.h);
            hi[0] = hi[0].max(c.center[0] + 0.5 * self.h);
            hi[1] = hi[1].max(c.center[1] + 0.5 * self.h);
        }
        (lo, hi)
    }
}

fn adopt(
    active: &[bool],
    index: &[i32],
    nx: usize,
    ny: usize,
    ix: usize,
    iy: usize,
) -> Option<usize> {
    for (dx, dy) in DIRS4.into_iter().chain(DIRS8.into_iter().skip(4)) {
        let jx = ix as i64 + dx;
        let jy = iy as i64 + dy;
        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
            continue;
        }
        let r = jy as usize * nx + jx as usize;
        if active[r] {
            return Some(index[r] as usize);
        }
    }
    None
}

/// Active neighbor whose center is nearest to `point`; ties resolve in the
/// fixed direction order, keeping the raster deterministic.
#[allow(clippy::too_many_arguments)]
fn adopt_near(
    active: &[bool],
    index: &[i32],
    nx: usize,
    ny: usize,
    ix: usize,
    iy: usize,
    point: [f64; 2],
    center: &impl Fn(usize, usize) -> [f64; 2],
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (dx, dy) in DIRS8 {
        let jx = ix as i64 + dx;
        let jy = iy as i64 + dy;
        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
            continue;
        }
        let r = jy as usize * nx + jx as usize;
        if !active[r] {
            continue;
        }
        let c = center(jx as usize, jy as usize);
        let d = (c[0] - point[0]).powi(2) + (c[1] - point[1]).powi(2);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, index[r] as usize));
        }
    }
    best.map(|(_, id)| id)
}

struct RawSegment {
    midpoint: [f64; 2],
    normal: [f64; 2],
    length: f64,
}

struct MarchedCell {
    area: f64,
    chords: Vec<([f64; 2], [f64; 2])>,
}

fn lerp_zero(pa: [f64; 2], pb: [f64; 2], fa: f64, fb: f64) -> [f64; 2] {
    let t = fa / (fa - fb);
    [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        s += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    0.5 * s
}

/// Clipped polygon and boundary chords of one mixed cell.
fn march_cell(
    corners: &[[f64; 2]; 4],
    f: &[f64; 4],
    inside: &[bool; 4],
    center_inside: bool,
) -> MarchedCell {
    let pattern: u8 = (0..4).map(|k| (inside[k] as u8) << k).sum();
    let cross = |a: usize, b: usize| lerp_zero(corners[a], corners[b], f[a], f[b]);

    // Diagonal saddles need the cell-center sign to resolve the topology.
    if pattern == 0b0101 || pattern == 0b1010 {
        let (i0, i1) = if pattern == 0b0101 { (0, 2) } else { (1, 3) };
        // Crossings on the four edges, indexed by edge start corner.
        let x = [cross(0, 1), cross(1, 2), cross(2, 3), cross(3, 0)];
        // Edges adjacent to an inside corner k are edge k and edge (k+3)%4.
        let adj = |k: usize| (x[k], x[(k + 3) % 4]);
        if center_inside {
            // Connected band through the cell.
            let (a0, a3) = adj(i0);
            let (b0, b3) = adj(i1);
            let hex = [corners[i0], a0, b3, corners[i1], b0, a3];
            MarchedCell {
                area: polygon_area(&hex).abs(),
                chords: vec![(a0, b3), (b0, a3)],
            }
        } else {
            // Two disjoint corner triangles.
            let (a0, a3) = adj(i0);
            let (b0, b3) = adj(i1);
            let t1 = [corners[i0], a0, a3];
            let t2 = [corners[i1], b0, b3];
            MarchedCell {
                area: polygon_area(&t1).abs() + polygon_area(&t2).abs(),
                chords: vec![(a0, a3), (b0, b3)],
            }
        }
    } else {
        // Walk corners and edges in order, collecting the clipped polygon
        // and the (at most two) crossing points.
        let mut poly: Vec<[f64; 2]> = Vec::with_capacity(6);
        let mut crossings: Vec<[f64; 2]> = Vec::with_capacity(2);
        for k in 0..4 {
            if inside[k] {
                poly.push(corners[k]);
            }
            let k2 = (k + 1) % 4;
            if inside[k] != inside[k2] {
                let p = cross(k, k2);
                poly.push(p);
                crossings.push(p);
            }
        }
        let chords = if crossings.len() == 2 {
            vec![(crossings[0], crossings[1])]
        } else {
            Vec::new()
        };
        MarchedCell { area: polygon_area(&poly).abs(), chords }
    }
}

/// Segment record with the outward normal fixed by the inside function.
fn make_segment(
    p1: [f64; 2],
    p2: [f64; 2],
    phi: &dyn Fn(f64, f64) -> f64,
    h: f64,
) -> Option<RawSegment> {
    let dx = p2[0] - p1[0];
    let dy = p2[1] - p1[1];
    let length = dx.hypot(dy);
    if length < 1e-12 * h {
        return None;
    }
    let midpoint = [0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])];
    let mut normal = [dy / length, -dx / length];
    // phi increases inward; the outward normal sees it decrease.
    let eps = 1e-3 * h;
    let grad = [
        (phi(midpoint[0] + eps, midpoint[1]) - phi(midpoint[0] - eps, midpoint[1])) / (2.0 * eps),
        (phi(midpoint[0], midpoint[1] + eps) - phi(midpoint[0], midpoint[1] - eps)) / (2.0 * eps),
    ];
    if normal[0] * grad[0] + normal[1] * grad[1] > 0.0 {
        normal = [-normal[0], -normal[1]];
    }
    Some(RawSegment { midpoint, normal, length })
}

/// Signed inside function of a simple polygon: positive inside, magnitude
/// equal to the distance to the boundary.
fn polygon_signed_inside(verts: &[[f64; 2]], x: f64, y: f64) -> f64 {
    let mut inside = false;
    let mut dist2 = f64::INFINITY;
    let n = verts.len();
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        // Even-odd ray cast along +x.
        if (a[1] > y) != (b[1] > y) {
            let t = (y - a[1]) / (b[1] - a[1]);
            if x < a[0] + t * (b[0] - a[0]) {
                inside = !inside;
            }
        }
        // Distance to the segment.
        let ex = b[0] - a[0];
        let ey = b[1] - a[1];
        let len2 = ex * ex + ey * ey;
        let t = if len2 > 0.0 {
            (((x - a[0]) * ex + (y - a[1]) * ey) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let px = a[0] + t * ex - x;
        let py = a[1] + t * ey - y;
        dist2 = dist2.min(px * px + py * py);
    }
    let d = dist2.sqrt();
    if inside {
        d
    } else {
        -d
    }
}
