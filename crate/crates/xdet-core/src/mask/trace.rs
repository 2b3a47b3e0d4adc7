//! Border following on binary masks.
//!
//! Components are extracted by tracing their outer borders (Suzuki-Abe
//! style, 8-connected foreground). Hole borders are traced only to mark
//! visited pixels so an inner border is never mistaken for a new outer
//! border; they are not reported — downstream we only need bounding
//! boxes, not topology.

use std::collections::VecDeque;

use crate::geometry::BBox;
use crate::mask::{BinaryMask, MaskFrame};
use crate::scalar::Real;

/// One 8-connected foreground component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    /// Outer border pixels in trace order (a closed contour; pixels on
    /// one-pixel-wide spurs appear once per traversal direction).
    pub border: Vec<(usize, usize)>,
    /// All member pixels in scanline order.
    pub pixels: Vec<(usize, usize)>,
    x1: usize,
    y1: usize,
    x2: usize,
    y2: usize,
}

impl Region {
    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Half-open pixel bounds `(x1, y1, x2, y2)`.
    pub fn bounds(&self) -> (usize, usize, usize, usize) {
        (self.x1, self.y1, self.x2, self.y2)
    }

    /// Tight bounding box: a pixel at `(x, y)` covers `[x, x+1) × [y, y+1)`.
    pub fn bbox<T: Real>(&self) -> BBox<T> {
        BBox::new(
            T::from_usize_lossy(self.x1),
            T::from_usize_lossy(self.y1),
            T::from_usize_lossy(self.x2),
            T::from_usize_lossy(self.y2),
        )
        .expect("region bounds enclose at least one pixel")
    }

    /// The region's own pixels as an RoI-frame mask of its bounds size.
    pub fn to_mask(&self) -> BinaryMask {
        let mut m = BinaryMask::with_frame(self.x2 - self.x1, self.y2 - self.y1, MaskFrame::Roi);
        for &(x, y) in &self.pixels {
            m.set(x - self.x1, y - self.y1, 1);
        }
        m
    }
}

// Neighbor directions in clockwise order starting east (y grows down).
const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

struct Tracer {
    width: i64,
    height: i64,
    f: Vec<i32>,
}

impl Tracer {
    fn at(&self, x: i64, y: i64) -> i32 {
        if x < 0 || y < 0 || x >= self.width || y >= self.height {
            0
        } else {
            self.f[(y * self.width + x) as usize]
        }
    }

    fn mark(&mut self, x: i64, y: i64, v: i32) {
        self.f[(y * self.width + x) as usize] = v;
    }

    /// Follow one border starting at `(sx, sy)`; `start_dir` points at the
    /// zero pixel that triggered the start (west for outer borders, east
    /// for hole borders). Visited pixels are marked with `±nbd`.
    fn follow(&mut self, sx: i64, sy: i64, start_dir: usize, nbd: i32) -> Vec<(usize, usize)> {
        // Clockwise hunt for the first nonzero neighbor.
        let mut first = None;
        for k in 0..8 {
            let d = (start_dir + k) % 8;
            let (dx, dy) = DIRS[d];
            if self.at(sx + dx, sy + dy) != 0 {
                first = Some((sx + dx, sy + dy));
                break;
            }
        }
        let Some(p1) = first else {
            // Isolated pixel.
            self.mark(sx, sy, -nbd);
            return vec![(sx as usize, sy as usize)];
        };

        let mut border = Vec::new();
        let mut prev = p1;
        let mut cur = (sx, sy);
        loop {
            // Counterclockwise hunt around `cur`, starting just past `prev`.
            let back = dir_between(cur, prev);
            let mut next = prev;
            let mut east_zero = false;
            for k in 1..=8 {
                let d = (back + 8 - k % 8) % 8;
                let (dx, dy) = DIRS[d];
                let v = self.at(cur.0 + dx, cur.1 + dy);
                if v != 0 {
                    next = (cur.0 + dx, cur.1 + dy);
                    break;
                }
                if d == 0 {
                    east_zero = true;
                }
            }

            if east_zero {
                self.mark(cur.0, cur.1, -nbd);
            } else if self.at(cur.0, cur.1) == 1 {
                self.mark(cur.0, cur.1, nbd);
            }
            border.push((cur.0 as usize, cur.1 as usize));

            if next == (sx, sy) && cur == p1 {
                break;
            }
            prev = cur;
            cur = next;
        }
        border
    }
}

fn dir_between(from: (i64, i64), to: (i64, i64)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&v| v == d).expect("8-neighbors")
}

/// Extract every 8-connected foreground component with its outer border,
/// member pixels, and tight bounding box. Regions come back in scanline
/// order of their first border pixel; holes never split a region.
pub fn trace_regions(m: &BinaryMask) -> Vec<Region> {
    if m.width() == 0 || m.height() == 0 {
        return Vec::new();
    }
    let width = m.width() as i64;
    let height = m.height() as i64;
    let mut tracer = Tracer {
        width,
        height,
        f: (0..m.height())
            .flat_map(|y| (0..m.width()).map(move |x| i32::from(m.get(x, y) != 0)))
            .collect(),
    };

    let mut claimed = vec![false; m.width() * m.height()];
    let mut regions = Vec::new();
    let mut nbd = 1i32;

    for y in 0..height {
        for x in 0..width {
            let v = tracer.at(x, y);
            if v == 0 {
                continue;
            }
            if v == 1 && tracer.at(x - 1, y) == 0 {
                nbd += 1;
                let border = tracer.follow(x, y, 4, nbd);
                regions.push(build_region(&tracer, &mut claimed, border));
            } else if v >= 1 && tracer.at(x + 1, y) == 0 {
                // Hole border: trace for the visited marks only.
                nbd += 1;
                tracer.follow(x, y, 0, nbd);
            }
        }
    }
    regions
}

/// Flood the component containing `border` to collect membership.
///
/// The border belongs to exactly one 8-connected component, so a fill
/// seeded on it and restricted to unclaimed foreground enumerates that
/// component and nothing else.
fn build_region(tracer: &Tracer, claimed: &mut [bool], border: Vec<(usize, usize)>) -> Region {
    let w = tracer.width as usize;
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    for &(x, y) in &border {
        if !claimed[y * w + x] {
            claimed[y * w + x] = true;
            queue.push_back((x, y));
        }
    }
    let mut pixels = Vec::new();
    while let Some((x, y)) = queue.pop_front() {
        pixels.push((x, y));
        for (dx, dy) in DIRS {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if tracer.at(nx, ny) != 0 && !claimed[ny as usize * w + nx as usize] {
                claimed[ny as usize * w + nx as usize] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    pixels.sort_by_key(|&(x, y)| (y, x));

    let x1 = pixels.iter().map(|p| p.0).min().unwrap();
    let x2 = pixels.iter().map(|p| p.0).max().unwrap() + 1;
    let y1 = pixels.iter().map(|p| p.1).min().unwrap();
    let y2 = pixels.iter().map(|p| p.1).max().unwrap() + 1;
    Region {
        border,
        pixels,
        x1,
        y1,
        x2,
        y2,
    }
}

/// Run [`trace_regions`] over a batch of masks and emit one annotation
/// per region: its tight box plus the region's own mask crop.
pub fn masks_to_annotations<T: Real>(masks: &[BinaryMask]) -> Vec<(BBox<T>, BinaryMask)> {
    masks
        .iter()
        .flat_map(|m| {
            trace_regions(m)
                .into_iter()
                .map(|r| (r.bbox::<T>(), r.to_mask()))
        })
        .collect()
}
