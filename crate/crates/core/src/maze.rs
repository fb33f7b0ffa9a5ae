//! Static level geometry.
//!
//! A [`Maze`] is parsed from a plain-text grid and is immutable afterwards.
//! Two movement graphs are derived from it: the Pac-Man graph (corridor
//! cells plus teleport links) and the ghost graph (the Pac-Man graph plus the
//! ghost house). All-pairs breadth-first distance tables for both graphs are
//! computed once at load time.

use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// A grid coordinate. Serialized as `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[u16; 2]", into = "[u16; 2]")]
pub struct Cell {
    pub row: u16,
    pub col: u16,
}

impl Cell {
    pub const fn new(row: u16, col: u16) -> Self {
        Self { row, col }
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        (self.row as i32 - other.row as i32).unsigned_abs()
            + (self.col as i32 - other.col as i32).unsigned_abs()
    }
}

impl From<[u16; 2]> for Cell {
    fn from([row, col]: [u16; 2]) -> Self {
        Self { row, col }
    }
}

impl From<Cell> for [u16; 2] {
    fn from(c: Cell) -> Self {
        [c.row, c.col]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Movement direction. The declaration order is the canonical tie-break
/// order used everywhere: Up, Left, Down, Right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heading {
    #[serde(rename = "U")]
    Up,
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "D")]
    Down,
    #[serde(rename = "R")]
    Right,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::Up, Heading::Left, Heading::Down, Heading::Right];

    pub fn reverse(self) -> Heading {
        match self {
            Heading::Up => Heading::Down,
            Heading::Down => Heading::Up,
            Heading::Left => Heading::Right,
            Heading::Right => Heading::Left,
        }
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::Up => (-1, 0),
            Heading::Left => (0, -1),
            Heading::Down => (1, 0),
            Heading::Right => (0, 1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Heading::Up => "Up",
            Heading::Left => "Left",
            Heading::Down => "Down",
            Heading::Right => "Right",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Heading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "u" | "up" => Ok(Heading::Up),
            "l" | "left" => Ok(Heading::Left),
            "d" | "down" => Ok(Heading::Down),
            "r" | "right" => Ok(Heading::Right),
            other => Err(format!("unknown heading `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Wall,
    Corridor,
    /// Ghost-house interior: navigable for ghosts only.
    House,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MazeError {
    #[error("maze file is empty")]
    Empty,
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("unknown glyph {glyph:?} at row {row}, column {col}")]
    UnknownGlyph { glyph: char, row: usize, col: usize },
    #[error("missing Pac-Man start `P`")]
    MissingPacman,
    #[error("duplicate Pac-Man start at row {row}, column {col}")]
    DuplicatePacman { row: usize, col: usize },
    #[error("duplicate fruit cell at row {row}, column {col}")]
    DuplicateFruit { row: usize, col: usize },
    #[error("expected 4 power pills, found {0}")]
    PowerPillCount(usize),
    #[error("expected 4 ghost starts, found {0}")]
    GhostStartCount(usize),
    #[error("unpaired teleport at row {row}, column {col}")]
    UnpairedTeleport { row: usize, col: usize },
    #[error("teleport at row {row}, column {col} is not on a single grid edge")]
    TeleportNotOnEdge { row: usize, col: usize },
    #[error("ghost house has {0} exit cells, expected exactly 1")]
    HouseExits(usize),
}

/// Per-degree counts of navigable cells on the Pac-Man graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdjacencyCensus {
    pub deg2: usize,
    pub deg3: usize,
    pub deg4: usize,
}

impl AdjacencyCensus {
    pub fn total(&self) -> usize {
        self.deg2 + self.deg3 + self.deg4
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("branching rate is undefined for an empty census")]
pub struct EmptyCensus;

/// Weighted mean number of moves available per step to `actors` actors.
pub fn branching_rate(census: &AdjacencyCensus, actors: f64) -> Result<f64, EmptyCensus> {
    let total = census.total();
    if total == 0 {
        return Err(EmptyCensus);
    }
    let weighted = (census.deg2 * 2 + census.deg3 * 3 + census.deg4 * 4) as f64;
    Ok(weighted * actors / total as f64)
}

pub const UNREACHABLE: u16 = u16::MAX;

/// A parsed maze and its derived distance tables.
#[derive(Clone)]
pub struct Maze {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
    teleport_pairs: Vec<(Cell, Cell)>,
    /// Per cell index: teleport partner and the outward heading that reaches it.
    teleport: Vec<Option<(Heading, Cell)>>,
    house: Vec<Cell>,
    house_exit: Option<Cell>,
    pills: BTreeSet<Cell>,
    power_pills: BTreeSet<Cell>,
    fruit_cell: Option<Cell>,
    pacman_start: Cell,
    ghost_starts: Vec<Cell>,
    checksum: String,
    pac_dist: Vec<u16>,
    ghost_dist: Vec<u16>,
    diameter: u16,
}

impl fmt::Debug for Maze {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Maze")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("navigable", &self.navigable_count())
            .field("checksum", &self.checksum)
            .finish()
    }
}

const DEFAULT_MAZE: &str = include_str!("../data/default.maze");

impl Maze {
    /// The bundled maze whose adjacency census is (143, 32, 7) over 182 cells.
    pub fn default_maze() -> Maze {
        Maze::parse(DEFAULT_MAZE).expect("bundled maze is valid")
    }

    pub fn default_maze_text() -> &'static str {
        DEFAULT_MAZE
    }

    pub fn parse(text: &str) -> Result<Maze, MazeError> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        // Trailing blank lines are tolerated; interior ones are ragged rows.
        let end = lines
            .iter()
            .rposition(|l| !l.is_empty())
            .map(|i| i + 1)
            .ok_or(MazeError::Empty)?;
        let lines = &lines[..end];
        let width = lines[0].chars().count();
        let height = lines.len();

        let mut tiles = Vec::with_capacity(width * height);
        let mut pills = BTreeSet::new();
        let mut power_pills = BTreeSet::new();
        let mut fruit_cell = None;
        let mut pacman_start = None;
        let mut ghost_starts = Vec::new();
        let mut house = Vec::new();
        let mut teleports = Vec::new();

        for (row, line) in lines.iter().enumerate() {
            let found = line.chars().count();
            if found != width {
                return Err(MazeError::Ragged { row, found, expected: width });
            }
            for (col, glyph) in line.chars().enumerate() {
                let cell = Cell::new(row as u16, col as u16);
                let tile = match glyph {
                    '#' => Tile::Wall,
                    '.' => {
                        pills.insert(cell);
                        Tile::Corridor
                    }
                    'o' => {
                        power_pills.insert(cell);
                        Tile::Corridor
                    }
                    ' ' => Tile::Corridor,
                    'P' => {
                        if pacman_start.is_some() {
                            return Err(MazeError::DuplicatePacman { row, col });
                        }
                        pacman_start = Some(cell);
                        Tile::Corridor
                    }
                    'F' => {
                        if fruit_cell.is_some() {
                            return Err(MazeError::DuplicateFruit { row, col });
                        }
                        fruit_cell = Some(cell);
                        Tile::Corridor
                    }
                    'T' => {
                        teleports.push(cell);
                        Tile::Corridor
                    }
                    'G' => {
                        ghost_starts.push(cell);
                        house.push(cell);
                        Tile::House
                    }
                    'H' => {
                        house.push(cell);
                        Tile::House
                    }
                    other => return Err(MazeError::UnknownGlyph { glyph: other, row, col }),
                };
                tiles.push(tile);
            }
        }

        let pacman_start = pacman_start.ok_or(MazeError::MissingPacman)?;
        if !power_pills.is_empty() && power_pills.len() != 4 {
            return Err(MazeError::PowerPillCount(power_pills.len()));
        }
        if !ghost_starts.is_empty() && ghost_starts.len() != 4 {
            return Err(MazeError::GhostStartCount(ghost_starts.len()));
        }
        if teleports.len() % 2 == 1 {
            let last = teleports[teleports.len() - 1];
            return Err(MazeError::UnpairedTeleport {
                row: last.row as usize,
                col: last.col as usize,
            });
        }

        let mut teleport = vec![None; width * height];
        let mut teleport_pairs = Vec::new();
        for pair in teleports.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            let ha = outward_heading(a, width, height)?;
            let hb = outward_heading(b, width, height)?;
            teleport[a.row as usize * width + a.col as usize] = Some((ha, b));
            teleport[b.row as usize * width + b.col as usize] = Some((hb, a));
            teleport_pairs.push((a, b));
        }

        let mut maze = Maze {
            width,
            height,
            tiles,
            teleport_pairs,
            teleport,
            house,
            house_exit: None,
            pills,
            power_pills,
            fruit_cell,
            pacman_start,
            ghost_starts,
            checksum: checksum(lines),
            pac_dist: Vec::new(),
            ghost_dist: Vec::new(),
            diameter: 0,
        };

        if !maze.house.is_empty() {
            let m = &maze;
            let exits: BTreeSet<Cell> = m
                .house
                .iter()
                .flat_map(|&h| Heading::ALL.into_iter().filter_map(move |d| m.grid_step(h, d)))
                .filter(|&c| maze.tile(c) == Tile::Corridor)
                .collect();
            if exits.len() != 1 {
                return Err(MazeError::HouseExits(exits.len()));
            }
            maze.house_exit = exits.into_iter().next();
        }

        maze.pac_dist = maze.all_pairs(false);
        maze.ghost_dist = maze.all_pairs(true);
        maze.diameter = maze
            .pac_dist
            .iter()
            .copied()
            .filter(|&d| d != UNREACHABLE)
            .max()
            .unwrap_or(0);
        Ok(maze)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width + cell.col as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index / self.width) as u16, (index % self.width) as u16)
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn tile(&self, cell: Cell) -> Tile {
        self.tiles[self.index(cell)]
    }

    pub fn in_bounds(&self, row: i32, col: i32) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    fn grid_step(&self, cell: Cell, heading: Heading) -> Option<Cell> {
        let (dr, dc) = heading.delta();
        let (r, c) = (cell.row as i32 + dr, cell.col as i32 + dc);
        self.in_bounds(r, c).then(|| Cell::new(r as u16, c as u16))
    }

    /// Neighbor on the Pac-Man graph (corridors and teleports).
    pub fn pac_neighbor(&self, cell: Cell, heading: Heading) -> Option<Cell> {
        if let Some((out, partner)) = self.teleport[self.index(cell)] {
            if out == heading {
                return Some(partner);
            }
        }
        self.grid_step(cell, heading).filter(|&c| self.tile(c) == Tile::Corridor)
    }

    /// Neighbor on the ghost graph (corridors, teleports and the house).
    pub fn ghost_neighbor(&self, cell: Cell, heading: Heading) -> Option<Cell> {
        if let Some((out, partner)) = self.teleport[self.index(cell)] {
            if out == heading {
                return Some(partner);
            }
        }
        self.grid_step(cell, heading).filter(|&c| self.tile(c) != Tile::Wall)
    }

    /// True when moving from `cell` along `heading` crosses a teleport link.
    pub fn is_teleport_move(&self, cell: Cell, heading: Heading) -> bool {
        matches!(self.teleport[self.index(cell)], Some((out, _)) if out == heading)
    }

    pub fn is_navigable(&self, cell: Cell) -> bool {
        self.tile(cell) == Tile::Corridor
    }

    pub fn is_house(&self, cell: Cell) -> bool {
        self.tile(cell) == Tile::House
    }

    pub fn navigable_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count())
            .map(|i| self.cell_at(i))
            .filter(|&c| self.is_navigable(c))
    }

    pub fn navigable_count(&self) -> usize {
        self.tiles.iter().filter(|&&t| t == Tile::Corridor).count()
    }

    pub fn pac_degree(&self, cell: Cell) -> usize {
        Heading::ALL
            .iter()
            .filter(|&&h| self.pac_neighbor(cell, h).is_some())
            .count()
    }

    pub fn teleport_pairs(&self) -> &[(Cell, Cell)] {
        &self.teleport_pairs
    }

    pub fn house(&self) -> &[Cell] {
        &self.house
    }

    pub fn house_exit(&self) -> Option<Cell> {
        self.house_exit
    }

    pub fn pill_layout(&self) -> &BTreeSet<Cell> {
        &self.pills
    }

    pub fn power_pill_layout(&self) -> &BTreeSet<Cell> {
        &self.power_pills
    }

    pub fn fruit_cell(&self) -> Option<Cell> {
        self.fruit_cell
    }

    pub fn pacman_start(&self) -> Cell {
        self.pacman_start
    }

    pub fn ghost_starts(&self) -> &[Cell] {
        &self.ghost_starts
    }

    /// A maze can host a game when it has four ghost starts and a house exit.
    pub fn is_playable(&self) -> bool {
        self.ghost_starts.len() == 4 && self.house_exit.is_some()
    }

    /// Longest finite Pac-Man distance between two navigable cells.
    pub fn diameter(&self) -> u16 {
        self.diameter
    }

    pub fn census(&self) -> AdjacencyCensus {
        adjacency_census(self)
    }

    /// Precomputed Pac-Man graph distance; `None` when unreachable.
    pub fn distance(&self, a: Cell, b: Cell) -> Option<u32> {
        let n = self.cell_count();
        match self.pac_dist[self.index(a) * n + self.index(b)] {
            UNREACHABLE => None,
            d => Some(d as u32),
        }
    }

    /// Raw Pac-Man distance, `UNREACHABLE` when there is no path.
    #[inline]
    pub fn distance_raw(&self, a: Cell, b: Cell) -> u16 {
        self.pac_dist[self.index(a) * self.cell_count() + self.index(b)]
    }

    /// Ghost graph distance (the house is traversable).
    #[inline]
    pub fn ghost_distance_raw(&self, a: Cell, b: Cell) -> u16 {
        self.ghost_dist[self.index(a) * self.cell_count() + self.index(b)]
    }

    /// Nearest navigable cell to an arbitrary grid coordinate (Manhattan,
    /// ties broken by scan order). Used to snap ghost targets onto the graph.
    pub fn nearest_navigable(&self, row: i32, col: i32) -> Cell {
        let mut best = self.pacman_start;
        let mut best_d = u32::MAX;
        for c in self.navigable_cells() {
            let d = (c.row as i32 - row).unsigned_abs() + (c.col as i32 - col).unsigned_abs();
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }

    fn all_pairs(&self, ghost: bool) -> Vec<u16> {
        let n = self.cell_count();
        let mut table = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let start = self.cell_at(src);
            let ok = match self.tile(start) {
                Tile::Corridor => true,
                Tile::House => ghost,
                Tile::Wall => false,
            };
            if !ok {
                continue;
            }
            let row = &mut table[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(start);
            while let Some(cell) = queue.pop_front() {
                let d = row[self.index(cell)];
                for h in Heading::ALL {
                    let next = if ghost {
                        self.ghost_neighbor(cell, h)
                    } else {
                        self.pac_neighbor(cell, h)
                    };
                    if let Some(next) = next {
                        let ni = self.index(next);
                        if row[ni] == UNREACHABLE {
                            row[ni] = d + 1;
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        table
    }

    /// Admissible lower bound on the Pac-Man distance: Manhattan distance,
    /// or a route through any teleport pair if that is shorter.
    fn heuristic(&self, a: Cell, b: Cell) -> u32 {
        let mut h = a.manhattan(b);
        for &(t1, t2) in &self.teleport_pairs {
            h = h.min(a.manhattan(t1) + 1 + t2.manhattan(b));
            h = h.min(a.manhattan(t2) + 1 + t1.manhattan(b));
        }
        h
    }
}

fn outward_heading(cell: Cell, width: usize, height: usize) -> Result<Heading, MazeError> {
    let mut out = Vec::new();
    if cell.row == 0 {
        out.push(Heading::Up);
    }
    if cell.col == 0 {
        out.push(Heading::Left);
    }
    if cell.row as usize == height - 1 {
        out.push(Heading::Down);
    }
    if cell.col as usize == width - 1 {
        out.push(Heading::Right);
    }
    match out.as_slice() {
        [h] => Ok(*h),
        _ => Err(MazeError::TeleportNotOnEdge {
            row: cell.row as usize,
            col: cell.col as usize,
        }),
    }
}

fn checksum(lines: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(&hasher.finalize()[..8])
}

/// Exact per-degree counts of navigable cells, teleport links included.
/// Cells of degree 0, 1 or above 4 are not counted.
pub fn adjacency_census(maze: &Maze) -> AdjacencyCensus {
    let mut census = AdjacencyCensus::default();
    for cell in maze.navigable_cells() {
        match maze.pac_degree(cell) {
            2 => census.deg2 += 1,
            3 => census.deg3 += 1,
            4 => census.deg4 += 1,
            _ => {}
        }
    }
    census
}

/// A* shortest path length between two navigable cells on the Pac-Man graph.
/// Returns `None` for unreachable pairs.
pub fn shortest_distance(maze: &Maze, a: Cell, b: Cell) -> Option<u32> {
    if !maze.is_navigable(a) || !maze.is_navigable(b) {
        return None;
    }
    let mut best = vec![u32::MAX; maze.cell_count()];
    let mut open = BinaryHeap::new();
    best[maze.index(a)] = 0;
    open.push(Reverse((maze.heuristic(a, b), 0u32, a)));
    while let Some(Reverse((_, g, cell))) = open.pop() {
        if cell == b {
            return Some(g);
        }
        if g > best[maze.index(cell)] {
            continue;
        }
        for h in Heading::ALL {
            if let Some(next) = maze.pac_neighbor(cell, h) {
                let ni = maze.index(next);
                if g + 1 < best[ni] {
                    best[ni] = g + 1;
                    open.push(Reverse((g + 1 + maze.heuristic(next, b), g + 1, next)));
                }
            }
        }
    }
    None
}
