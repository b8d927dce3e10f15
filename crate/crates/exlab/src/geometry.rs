//! Board geometry: square and hexagonal grids, canonical cell ordering,
//! neighbourhood offsets and grid symmetries.
//!
//! Cells are addressed by a [`Coord`]. On square grids this is `(x, y)`
//! (column, row); on hexagonal grids it is an axial `(q, r)` pair. All
//! canonical orderings downstream (action ordering, feature element ordering)
//! derive from the scan order produced by [`Geometry::coords`].

/// Grid coordinate. `(x, y)` on square grids, axial `(q, r)` on hex grids.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub const fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub fn add(self, other: Coord) -> Coord {
        Coord::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Coord) -> Coord {
        Coord::new(self.x - other.x, self.y - other.y)
    }
}

/// The two families of grid connectivity we support.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GridKind {
    Square,
    Hex,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Shape {
    /// `cols` x `rows` rectangle with 8-connected neighbourhood for patterns.
    Square { cols: i32, rows: i32 },
    /// Rhombic board of hex cells with side length `side` (the Hex game board).
    HexRhombus { side: i32 },
    /// Regular hexagon of hex cells with side length `side` (e.g. Yavalath).
    HexHexagon { side: i32 },
}

/// A concrete board shape with precomputed coordinate lookups.
#[derive(Clone, Debug)]
pub struct Geometry {
    shape: Shape,
    coords: Vec<Coord>,
    // Dense lookup over the bounding box; -1 marks off-board. Feature
    // matching calls index_of in its innermost loop.
    grid: Vec<i32>,
    min: Coord,
    width: i32,
    height: i32,
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape
    }
}

impl Geometry {
    pub fn square(cols: i32, rows: i32) -> Self {
        assert!(cols > 0 && rows > 0);
        let mut coords = Vec::with_capacity((cols * rows) as usize);
        for y in 0..rows {
            for x in 0..cols {
                coords.push(Coord::new(x, y));
            }
        }
        Self::from_coords(Shape::Square { cols, rows }, coords)
    }

    pub fn hex_rhombus(side: i32) -> Self {
        assert!(side > 0);
        let mut coords = Vec::with_capacity((side * side) as usize);
        for r in 0..side {
            for q in 0..side {
                coords.push(Coord::new(q, r));
            }
        }
        Self::from_coords(Shape::HexRhombus { side }, coords)
    }

    pub fn hex_hexagon(side: i32) -> Self {
        assert!(side > 0);
        let n = side - 1;
        let mut coords = Vec::new();
        for r in -n..=n {
            for q in (-n).max(-r - n)..=n.min(-r + n) {
                coords.push(Coord::new(q, r));
            }
        }
        Self::from_coords(Shape::HexHexagon { side }, coords)
    }

    fn from_coords(shape: Shape, coords: Vec<Coord>) -> Self {
        let min_x = coords.iter().map(|c| c.x).min().unwrap();
        let min_y = coords.iter().map(|c| c.y).min().unwrap();
        let max_x = coords.iter().map(|c| c.x).max().unwrap();
        let max_y = coords.iter().map(|c| c.y).max().unwrap();
        let width = max_x - min_x + 1;
        let height = max_y - min_y + 1;
        let mut grid = vec![-1i32; (width * height) as usize];
        for (i, c) in coords.iter().enumerate() {
            grid[((c.y - min_y) * width + (c.x - min_x)) as usize] = i as i32;
        }
        Geometry {
            shape,
            coords,
            grid,
            min: Coord::new(min_x, min_y),
            width,
            height,
        }
    }

    pub fn kind(&self) -> GridKind {
        match self.shape {
            Shape::Square { .. } => GridKind::Square,
            Shape::HexRhombus { .. } | Shape::HexHexagon { .. } => GridKind::Hex,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.coords.len()
    }

    /// Cells in canonical scan order.
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn coord_of(&self, index: usize) -> Coord {
        self.coords[index]
    }

    /// Cell index for a coordinate, or `None` when it falls off the board.
    #[inline]
    pub fn index_of(&self, coord: Coord) -> Option<usize> {
        let x = coord.x - self.min.x;
        let y = coord.y - self.min.y;
        if x < 0 || y < 0 || x >= self.width || y >= self.height {
            return None;
        }
        let v = self.grid[(y * self.width + x) as usize];
        if v < 0 {
            None
        } else {
            Some(v as usize)
        }
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.index_of(coord).is_some()
    }

    /// Adjacency offsets (excluding the cell itself) used for connectivity,
    /// e.g. win detection in Hex. Square grids use 4-connectivity here; the
    /// 8-neighbourhood is a pattern-matching notion, not adjacency.
    pub fn adjacency_offsets(&self) -> &'static [Coord] {
        match self.kind() {
            GridKind::Square => SQUARE_ADJACENT,
            GridKind::Hex => HEX_NEIGHBORS,
        }
    }

    pub fn square_dims(&self) -> Option<(i32, i32)> {
        match self.shape {
            Shape::Square { cols, rows } => Some((cols, rows)),
            _ => None,
        }
    }
}

const SQUARE_ADJACENT: &[Coord] = &[
    Coord::new(0, -1),
    Coord::new(-1, 0),
    Coord::new(1, 0),
    Coord::new(0, 1),
];

/// The six axial hex directions, in canonical order.
pub const HEX_NEIGHBORS: &[Coord] = &[
    Coord::new(0, -1),
    Coord::new(1, -1),
    Coord::new(-1, 0),
    Coord::new(1, 0),
    Coord::new(-1, 1),
    Coord::new(0, 1),
];

/// The three hex line axes (each covers both directions).
pub const HEX_AXES: &[Coord] = &[Coord::new(1, 0), Coord::new(0, 1), Coord::new(1, -1)];

/// The four square line axes.
pub const SQUARE_AXES: &[Coord] = &[
    Coord::new(1, 0),
    Coord::new(0, 1),
    Coord::new(1, 1),
    Coord::new(1, -1),
];

/// Offsets within geometric distance 1 of a cell, including the cell itself,
/// in canonical (sorted) order. These anchor the atomic pattern features.
pub fn unit_ball_offsets(kind: GridKind) -> Vec<Coord> {
    let mut offsets: Vec<Coord> = match kind {
        GridKind::Square => {
            let mut v = Vec::with_capacity(9);
            for y in -1..=1 {
                for x in -1..=1 {
                    v.push(Coord::new(x, y));
                }
            }
            v
        }
        GridKind::Hex => {
            let mut v = vec![Coord::new(0, 0)];
            v.extend_from_slice(HEX_NEIGHBORS);
            v
        }
    };
    offsets.sort();
    offsets
}

/// Number of point symmetries of the grid: 8 for square (D4), 12 for hex (D6).
pub fn symmetry_count(kind: GridKind) -> usize {
    match kind {
        GridKind::Square => 8,
        GridKind::Hex => 12,
    }
}

/// Apply the `sym`-th grid symmetry (rotation/reflection about the origin)
/// to an offset coordinate.
pub fn apply_symmetry(kind: GridKind, sym: usize, c: Coord) -> Coord {
    match kind {
        GridKind::Square => {
            let (x, y) = (c.x, c.y);
            // 4 rotations, then the same 4 after a reflection across x.
            let (x, y) = if sym >= 4 { (-x, y) } else { (x, y) };
            match sym % 4 {
                0 => Coord::new(x, y),
                1 => Coord::new(-y, x),
                2 => Coord::new(-x, -y),
                _ => Coord::new(y, -x),
            }
        }
        GridKind::Hex => {
            let (mut q, mut r) = (c.x, c.y);
            if sym >= 6 {
                // reflection swapping the q and r axes
                std::mem::swap(&mut q, &mut r);
            }
            // 60-degree axial rotation, applied sym % 6 times
            for _ in 0..(sym % 6) {
                let (nq, nr) = (-r, q + r);
                q = nq;
                r = nr;
            }
            Coord::new(q, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagon_cell_counts() {
        assert_eq!(Geometry::hex_hexagon(5).cell_count(), 61);
        assert_eq!(Geometry::hex_hexagon(2).cell_count(), 7);
        assert_eq!(Geometry::hex_hexagon(1).cell_count(), 1);
    }

    #[test]
    fn square_indexing_round_trips() {
        let g = Geometry::square(7, 6);
        assert_eq!(g.cell_count(), 42);
        for i in 0..g.cell_count() {
            assert_eq!(g.index_of(g.coord_of(i)), Some(i));
        }
        assert_eq!(g.index_of(Coord::new(7, 0)), None);
        assert_eq!(g.index_of(Coord::new(-1, 3)), None);
    }

    #[test]
    fn unit_ball_sizes() {
        assert_eq!(unit_ball_offsets(GridKind::Square).len(), 9);
        assert_eq!(unit_ball_offsets(GridKind::Hex).len(), 7);
    }

    #[test]
    fn symmetries_form_closed_sets() {
        // Each symmetry permutes the unit ball, and all symmetries are distinct
        // as permutations of a generic asymmetric pattern.
        for kind in [GridKind::Square, GridKind::Hex] {
            let ball = unit_ball_offsets(kind);
            let probe: Vec<Coord> = match kind {
                GridKind::Square => vec![Coord::new(1, 0), Coord::new(1, 1)],
                GridKind::Hex => vec![Coord::new(1, 0), Coord::new(1, -1)],
            };
            let mut images = Vec::new();
            for s in 0..symmetry_count(kind) {
                let mut mapped: Vec<Coord> =
                    ball.iter().map(|&c| apply_symmetry(kind, s, c)).collect();
                mapped.sort();
                assert_eq!(mapped, ball, "symmetry {s} must permute the unit ball");
                let img: Vec<Coord> = probe.iter().map(|&c| apply_symmetry(kind, s, c)).collect();
                images.push(img);
            }
            images.sort();
            images.dedup();
            assert_eq!(images.len(), symmetry_count(kind));
        }
    }

    #[test]
    fn hex_rotation_has_order_six() {
        let c = Coord::new(2, -1);
        let mut cur = c;
        for _ in 0..6 {
            cur = apply_symmetry(GridKind::Hex, 1, cur);
        }
        assert_eq!(cur, c);
    }
}
