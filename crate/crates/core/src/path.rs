//! Tile-level agent pathfinding with simplified jump physics.
//!
//! The agent occupies *supported* traversable cells: a cell it can pass
//! through (empty, coin, path marker, or enemy — enemies neither block nor
//! kill) sitting directly on top of a blocking cell. From a supported cell
//! it can
//!
//! * **walk** one column left or right at the same row,
//! * **jump** along an arc from a configurable offset table, or
//! * **step off an edge and fall**, drifting at most one column per row
//!   fallen, landing on the first supported cell along the way.
//!
//! Every move costs 1. Flat jumps (`dy == 0`) exist only where walking
//! straight across is impossible (a missing floor or an obstacle in the
//! way), so on open ground the agent walks and the jump count measures
//! genuine hurdles. Jump arcs additionally require the interpolated
//! airborne cells to be passable; cells above the top of the grid count as
//! open air.
//!
//! The search starts at the lowest supported cell of column 0 and targets
//! any supported cell in the last column.

use alloc::collections::{BTreeSet, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use thiserror::Error;

use crate::level::{TileCategory, TileGrid, GRID_HEIGHT};

/// Default slack (in moves) used when gathering near-optimal paths.
pub const DEFAULT_SLACK: usize = 10;

/// `(col, row)` cell coordinates, row 0 at the top.
pub type Cell = (usize, usize);

/// Movement capabilities of the simulated agent. The arc table is data:
/// stricter or looser physics is a configuration change, not a code change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovementModel {
    /// Maximum rise of a jump in tiles; clamps arc interpolation peaks.
    pub max_jump_height: usize,
    /// Relative `(dx, dy)` landing offsets reachable by jumping; `dy < 0`
    /// is upward.
    pub jump_arcs: Vec<(i32, i32)>,
    /// Maximum horizontal drift per tile fallen.
    pub max_fall_drift: usize,
}

impl Default for MovementModel {
    fn default() -> Self {
        MovementModel::from_span_and_rise(5, 4)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArcTableError {
    #[error("arc table is empty")]
    Empty,
    #[error("arc offset (0, 0) is a no-op")]
    ZeroOffset,
}

impl MovementModel {
    /// The default arc family, in lexicographic order: flat and descending
    /// offsets use the full span (`1 ≤ |dx| ≤ span`, `0 ≤ dy ≤ rise`);
    /// climbing offsets trade horizontal distance for height
    /// (`|dx| + |dy| ≤ span` for `dy < 0`, with `|dy| ≤ rise`).
    pub fn from_span_and_rise(span: i32, rise: i32) -> MovementModel {
        let mut arcs = Vec::new();
        for dx in -span..=span {
            if dx == 0 {
                continue;
            }
            for dy in -rise..=rise {
                if dy < 0 && dx.abs() + dy.abs() > span {
                    continue;
                }
                arcs.push((dx, dy));
            }
        }
        MovementModel {
            max_jump_height: rise.max(0) as usize,
            jump_arcs: arcs,
            max_fall_drift: 1,
        }
    }

    /// Builds a model from an explicit arc table; the jump height is
    /// inferred from the strongest upward arc.
    pub fn from_arcs(arcs: Vec<(i32, i32)>) -> Result<MovementModel, ArcTableError> {
        if arcs.is_empty() {
            return Err(ArcTableError::Empty);
        }
        if arcs.contains(&(0, 0)) {
            return Err(ArcTableError::ZeroOffset);
        }
        let rise = arcs.iter().map(|&(_, dy)| (-dy).max(0)).max().unwrap_or(0) as usize;
        Ok(MovementModel { max_jump_height: rise.max(1), jump_arcs: arcs, max_fall_drift: 1 })
    }

    /// Largest horizontal distance any single move can cover on a 16-row
    /// grid; used to keep the A* heuristic admissible.
    fn max_column_advance(&self) -> usize {
        let arc = self.jump_arcs.iter().map(|&(dx, _)| dx.unsigned_abs() as usize).max();
        let fall = 1 + self.max_fall_drift * (GRID_HEIGHT - 1);
        arc.unwrap_or(1).max(fall).max(1)
    }
}

/// How a move travels; jump moves are what the `j` metric counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Walk,
    Jump,
    Fall,
}

/// One edge of the move graph.
#[derive(Debug, Clone)]
pub struct Move {
    pub to: usize,
    pub kind: MoveKind,
    /// Airborne cells passed through (excluding the endpoints), in-bounds
    /// only; empty for walks.
    pub traversed: Vec<Cell>,
}

/// The complete move graph of one grid under one movement model.
#[derive(Debug, Clone)]
pub struct MoveGraph {
    width: usize,
    /// `Some(moves)` for supported traversable cells, `None` otherwise.
    moves: Vec<Option<Vec<Move>>>,
    start: Option<usize>,
    goals: Vec<usize>,
}

fn traversable(cat: TileCategory) -> bool {
    matches!(
        cat,
        TileCategory::Empty | TileCategory::Coin | TileCategory::PathMarker | TileCategory::Enemy
    )
}

fn cell_id(width: usize, col: usize, row: usize) -> usize {
    row * width + col
}

fn id_cell(width: usize, id: usize) -> Cell {
    (id % width, id / width)
}

impl MoveGraph {
    pub fn width(&self) -> usize {
        self.width
    }

    /// The start state: the lowest supported traversable cell of column 0.
    pub fn start(&self) -> Option<Cell> {
        self.start.map(|id| id_cell(self.width, id))
    }

    /// Goal states: every supported traversable cell of the last column.
    pub fn goals(&self) -> Vec<Cell> {
        self.goals.iter().map(|&id| id_cell(self.width, id)).collect()
    }

    pub fn is_state(&self, cell: Cell) -> bool {
        self.moves[cell_id(self.width, cell.0, cell.1)].is_some()
    }

    /// All states, in row-major order.
    pub fn states(&self) -> Vec<Cell> {
        (0..self.moves.len())
            .filter(|&id| self.moves[id].is_some())
            .map(|id| id_cell(self.width, id))
            .collect()
    }

    /// Moves available from a state (empty for non-states).
    pub fn moves_from(&self, cell: Cell) -> &[Move] {
        match &self.moves[cell_id(self.width, cell.0, cell.1)] {
            Some(moves) => moves,
            None => &[],
        }
    }

    fn cell_of(&self, id: usize) -> Cell {
        id_cell(self.width, id)
    }
}

/// Builds the move graph for a grid. Exposed so oracle searches in tests
/// can run over exactly the same edges as the production A*.
pub fn build_move_graph(grid: &TileGrid, model: &MovementModel) -> MoveGraph {
    let width = grid.width();
    let pass = |col: i64, row: i64| -> bool {
        col >= 0
            && (col as usize) < width
            && row >= 0
            && (row as usize) < GRID_HEIGHT
            && traversable(grid.get(col as usize, row as usize))
    };
    // A state is a traversable cell directly above a blocking in-bounds cell.
    let supported = |col: i64, row: i64| -> bool {
        pass(col, row)
            && row + 1 < GRID_HEIGHT as i64
            && !traversable(grid.get(col as usize, (row + 1) as usize))
    };

    let mut moves: Vec<Option<Vec<Move>>> = vec![None; width * GRID_HEIGHT];
    for row in 0..GRID_HEIGHT {
        for col in 0..width {
            if !supported(col as i64, row as i64) {
                continue;
            }
            let mut out = Vec::new();
            let (c, r) = (col as i64, row as i64);
            // Walks.
            for dx in [1i64, -1] {
                if supported(c + dx, r) {
                    out.push(Move {
                        to: cell_id(width, (c + dx) as usize, row),
                        kind: MoveKind::Walk,
                        traversed: Vec::new(),
                    });
                }
            }
            // Jump arcs.
            for &(dx, dy) in &model.jump_arcs {
                let (tc, tr) = (c + dx as i64, r + dy as i64);
                if !supported(tc, tr) {
                    continue;
                }
                if dy == 0 && walkable_across(c, tc, r, &supported) {
                    continue; // walking suffices; flat jumps only over hurdles
                }
                let traj = arc_trajectory((col, row), (tc as usize, tr as usize), model);
                let clear = traj.iter().all(|&(ac, ar)| ar < 0 || pass(ac, ar));
                if !clear {
                    continue;
                }
                let traversed = traj
                    .into_iter()
                    .filter(|&(_, ar)| ar >= 0)
                    .map(|(ac, ar)| (ac as usize, ar as usize))
                    .collect();
                out.push(Move {
                    to: cell_id(width, tc as usize, tr as usize),
                    kind: MoveKind::Jump,
                    traversed,
                });
            }
            // Falls: step off either edge into an unsupported passable cell,
            // then descend with bounded drift to the first support.
            for dx in [1i64, -1] {
                let (ec, er) = (c + dx, r);
                if !pass(ec, er) || supported(ec, er) {
                    continue;
                }
                fall_landings(width, (ec, er), model, &pass, &supported, &mut out);
            }
            // When several move kinds land on the same cell, keep the least
            // athletic one (walk, then fall, then jump): stepping down a
            // ledge is not a jump, and the `j` metric depends on that.
            let rank = |k: MoveKind| match k {
                MoveKind::Walk => 0,
                MoveKind::Fall => 1,
                MoveKind::Jump => 2,
            };
            let mut dedup: Vec<Move> = Vec::with_capacity(out.len());
            for mv in out {
                match dedup.iter_mut().find(|m| m.to == mv.to) {
                    Some(existing) => {
                        if rank(mv.kind) < rank(existing.kind) {
                            *existing = mv;
                        }
                    }
                    None => dedup.push(mv),
                }
            }
            // Canonical edge order: rightward targets first, then downward,
            // then discovery order. Deterministic tie-breaking for path
            // reconstruction depends on this.
            let mut indexed: Vec<(usize, Move)> = dedup.into_iter().enumerate().collect();
            indexed.sort_by(|(ia, a), (ib, b)| {
                let (ca, ra) = id_cell(width, a.to);
                let (cb, rb) = id_cell(width, b.to);
                cb.cmp(&ca).then(rb.cmp(&ra)).then(ia.cmp(ib))
            });
            moves[cell_id(width, col, row)] =
                Some(indexed.into_iter().map(|(_, m)| m).collect());
        }
    }

    // Start: lowest supported traversable cell of column 0.
    let start = (0..GRID_HEIGHT)
        .rev()
        .find(|&row| moves[cell_id(width, 0, row)].is_some())
        .map(|row| cell_id(width, 0, row));
    let goals: Vec<usize> = (0..GRID_HEIGHT)
        .filter(|&row| moves[cell_id(width, width - 1, row)].is_some())
        .map(|row| cell_id(width, width - 1, row))
        .collect();
    MoveGraph { width, moves, start, goals }
}

/// True when every strictly-intermediate cell of a same-row crossing is a
/// state, i.e. the agent could simply walk.
fn walkable_across(from_col: i64, to_col: i64, row: i64, supported: &dyn Fn(i64, i64) -> bool) -> bool {
    let (lo, hi) = if from_col < to_col { (from_col, to_col) } else { (to_col, from_col) };
    ((lo + 1)..hi).all(|col| supported(col, row))
}

/// Cells a jump passes through: a vertical rise above the takeoff, then a
/// straight descent line to the landing. The peak is `max(0, −dy)` plus
/// half the horizontal span, clamped to the jump height. May include
/// negative rows (above the grid); endpoints are excluded.
fn arc_trajectory(from: Cell, to: Cell, model: &MovementModel) -> Vec<(i64, i64)> {
    let (c0, r0) = (from.0 as i64, from.1 as i64);
    let (c1, r1) = (to.0 as i64, to.1 as i64);
    let dx = c1 - c0;
    let dy = r1 - r0;
    let span = dx.unsigned_abs() as i64;
    let rise = ((-dy).max(0) + (span + 1) / 2).min(model.max_jump_height as i64).max(1);
    let peak = r0 - rise;
    let mut cells = Vec::new();
    // Rise straight up from the takeoff.
    let mut row = r0 - 1;
    while row >= peak {
        cells.push((c0, row));
        row -= 1;
    }
    if span == 0 {
        // Pure vertical arc: descend in place to the landing.
        for rr in (peak + 1)..r1 {
            cells.push((c0, rr));
        }
        return cells;
    }
    // Straight line from the peak to the landing. The interpolated row is
    // non-decreasing; every cell the line passes through in a column gets
    // visited, including flat stretches.
    let step = if dx > 0 { 1 } else { -1 };
    let mut prev_row = peak;
    for i in 1..=span {
        let col = c0 + step * i;
        let row = peak + ((r1 - peak) * i + span / 2) / span;
        if row == prev_row {
            cells.push((col, row));
        } else {
            for rr in (prev_row + 1)..=row {
                cells.push((col, rr));
            }
        }
        prev_row = row;
    }
    cells.retain(|&cell| cell != (c1, r1));
    cells
}

/// Breadth-first fall exploration from an entry cell. Each landing becomes
/// one `Fall` move whose trajectory is the chain of airborne cells that
/// first reached it.
fn fall_landings(
    width: usize,
    entry: (i64, i64),
    model: &MovementModel,
    pass: &dyn Fn(i64, i64) -> bool,
    supported: &dyn Fn(i64, i64) -> bool,
    out: &mut Vec<Move>,
) {
    let drift = model.max_fall_drift as i64;
    let mut queue = VecDeque::new();
    let mut seen = BTreeSet::new();
    let mut parents: Vec<((i64, i64), Option<usize>)> = Vec::new();
    queue.push_back(0usize);
    parents.push((entry, None));
    seen.insert(entry);
    while let Some(idx) = queue.pop_front() {
        let (x, y) = parents[idx].0;
        let mut deltas = vec![0i64];
        for d in 1..=drift {
            deltas.push(d);
            deltas.push(-d);
        }
        for delta in deltas {
            let (nx, ny) = (x + delta, y + 1);
            if !pass(nx, ny) || seen.contains(&(nx, ny)) {
                continue;
            }
            seen.insert((nx, ny));
            if supported(nx, ny) {
                // Landing: collect the chain of airborne cells.
                let mut traversed = Vec::new();
                let mut cur = Some(idx);
                while let Some(i) = cur {
                    let (tc, tr) = parents[i].0;
                    traversed.push((tc as usize, tr as usize));
                    cur = parents[i].1;
                }
                traversed.reverse();
                out.push(Move {
                    to: cell_id(width, nx as usize, ny as usize),
                    kind: MoveKind::Fall,
                    traversed,
                });
            } else {
                parents.push(((nx, ny), Some(idx)));
                queue.push_back(parents.len() - 1);
            }
        }
    }
}

/// Result of a successful search.
#[derive(Debug, Clone)]
pub struct PathResult {
    /// Minimal number of moves from start to any goal.
    pub optimal_cost: usize,
    /// The states of one deterministic optimal path, start first.
    pub optimal_path: Vec<Cell>,
    /// Kind of each move along `optimal_path` (length
    /// `optimal_path.len() − 1`).
    pub optimal_moves: Vec<MoveKind>,
    /// Airborne cells traversed by each move along the path.
    pub optimal_traversed: Vec<Vec<Cell>>,
    /// Empty-category cells lying on some path within [`DEFAULT_SLACK`]
    /// moves of optimal.
    pub near_optimal_cells: BTreeSet<Cell>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("level is not completable")]
pub struct NotCompletable;

/// A* over the move graph with an admissible heuristic: remaining columns
/// divided by the largest single-move column advance. Returns `None` when
/// no goal is reachable — a verdict, not a failure.
pub fn find_optimal_path(grid: &TileGrid, model: &MovementModel) -> Option<PathResult> {
    let graph = build_move_graph(grid, model);
    find_optimal_path_on(grid, model, &graph)
}

pub(crate) fn find_optimal_path_on(
    grid: &TileGrid,
    model: &MovementModel,
    graph: &MoveGraph,
) -> Option<PathResult> {
    let width = graph.width;
    let start_id = graph.start?;
    if graph.goals.is_empty() {
        return None;
    }
    let advance = model.max_column_advance();
    let h = |id: usize| -> usize {
        let (col, _) = id_cell(width, id);
        (width - 1 - col).div_ceil(advance)
    };
    let mut dist: Vec<Option<usize>> = vec![None; width * GRID_HEIGHT];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; width * GRID_HEIGHT];
    let mut heap: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    let mut seq = 0usize;
    dist[start_id] = Some(0);
    heap.push(Reverse((h(start_id), seq, start_id)));
    let mut goal_hit: Option<usize> = None;
    while let Some(Reverse((f, _, id))) = heap.pop() {
        let g = dist[id].unwrap();
        if f > g + h(id) {
            continue; // stale entry
        }
        if graph.goals.contains(&id) {
            goal_hit = Some(id);
            break;
        }
        let moves = graph.moves[id].as_ref().unwrap();
        for (mi, mv) in moves.iter().enumerate() {
            let ng = g + 1;
            if dist[mv.to].is_none_or(|d| ng < d) {
                dist[mv.to] = Some(ng);
                parent[mv.to] = Some((id, mi));
                seq += 1;
                heap.push(Reverse((ng + h(mv.to), seq, mv.to)));
            }
        }
    }
    let goal = goal_hit?;
    let optimal_cost = dist[goal].unwrap();

    let mut path_ids = vec![goal];
    let mut move_idx = Vec::new();
    let mut cur = goal;
    while let Some((prev, mi)) = parent[cur] {
        path_ids.push(prev);
        move_idx.push(mi);
        cur = prev;
    }
    path_ids.reverse();
    move_idx.reverse();
    let optimal_path: Vec<Cell> = path_ids.iter().map(|&id| graph.cell_of(id)).collect();
    let mut optimal_moves = Vec::with_capacity(move_idx.len());
    let mut optimal_traversed = Vec::with_capacity(move_idx.len());
    for (i, &mi) in move_idx.iter().enumerate() {
        let from = path_ids[i];
        let mv = &graph.moves[from].as_ref().unwrap()[mi];
        optimal_moves.push(mv.kind);
        optimal_traversed.push(mv.traversed.clone());
    }

    let near = near_optimal_states(graph, optimal_cost, DEFAULT_SLACK);
    let near_optimal_cells = near
        .into_iter()
        .filter(|&(c, r)| grid.get(c, r) == TileCategory::Empty)
        .collect();

    Some(PathResult {
        optimal_cost,
        optimal_path,
        optimal_moves,
        optimal_traversed,
        near_optimal_cells,
    })
}

/// Uniform-cost sweep over the move graph from the start (forward) or from
/// all goals over reversed edges (backward). `None` means unreached.
fn sweep(graph: &MoveGraph, backward: bool) -> Vec<Option<usize>> {
    let n = graph.moves.len();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    if backward {
        for &g in &graph.goals {
            dist[g] = Some(0);
            queue.push_back(g);
        }
    } else if let Some(s) = graph.start {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    // Reversed adjacency for the backward sweep.
    let reversed: Option<Vec<Vec<usize>>> = backward.then(|| {
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (id, moves) in graph.moves.iter().enumerate() {
            if let Some(moves) = moves {
                for mv in moves {
                    rev[mv.to].push(id);
                }
            }
        }
        rev
    });
    while let Some(id) = queue.pop_front() {
        let d = dist[id].unwrap();
        let neighbors: Vec<usize> = match &reversed {
            Some(rev) => rev[id].clone(),
            None => graph.moves[id].as_ref().unwrap().iter().map(|m| m.to).collect(),
        };
        for to in neighbors {
            if dist[to].is_none() {
                dist[to] = Some(d + 1);
                queue.push_back(to);
            }
        }
    }
    dist
}

/// States on some start→goal path of cost at most `optimal + slack`:
/// exactly `{ s : g(s) + h*(s) ≤ optimal + slack }` with `g` and `h*`
/// computed by full forward and backward sweeps.
fn near_optimal_states(graph: &MoveGraph, optimal: usize, slack: usize) -> BTreeSet<Cell> {
    let g = sweep(graph, false);
    let hstar = sweep(graph, true);
    let mut out = BTreeSet::new();
    for id in 0..graph.moves.len() {
        if let (Some(a), Some(b)) = (g[id], hstar[id]) {
            if a + b <= optimal + slack {
                out.insert(graph.cell_of(id));
            }
        }
    }
    out
}

/// The set of states lying on some path within `slack` moves of optimal.
pub fn near_optimal_union(
    grid: &TileGrid,
    model: &MovementModel,
    slack: usize,
) -> Result<BTreeSet<Cell>, NotCompletable> {
    let graph = build_move_graph(grid, model);
    let result = find_optimal_path_on(grid, model, &graph).ok_or(NotCompletable)?;
    Ok(near_optimal_states(&graph, result.optimal_cost, slack))
}

/// Annotates a completable grid: every empty cell that a near-optimal path
/// stands on or passes through in the air becomes a path marker. All other
/// cells are unchanged, so the operation is idempotent.
pub fn annotate_paths(
    grid: &TileGrid,
    model: &MovementModel,
    slack: usize,
) -> Result<TileGrid, NotCompletable> {
    let graph = build_move_graph(grid, model);
    let result = find_optimal_path_on(grid, model, &graph).ok_or(NotCompletable)?;
    let bound = result.optimal_cost + slack;
    let g = sweep(&graph, false);
    let hstar = sweep(&graph, true);

    let mut marked: BTreeSet<Cell> = BTreeSet::new();
    for id in 0..graph.moves.len() {
        let Some(ga) = g[id] else { continue };
        if let Some(hb) = hstar[id] {
            if ga + hb <= bound {
                marked.insert(graph.cell_of(id));
            }
        }
        // Airborne cells of edges lying on some near-optimal path.
        if let Some(moves) = &graph.moves[id] {
            for mv in moves {
                if let Some(hb) = hstar[mv.to] {
                    if ga + 1 + hb <= bound {
                        marked.extend(mv.traversed.iter().copied());
                    }
                }
            }
        }
    }

    let mut out = grid.clone();
    for (c, r) in marked {
        if out.get(c, r) == TileCategory::Empty {
            out.set(c, r, TileCategory::PathMarker);
        }
    }
    Ok(out)
}

/// Empty cells the player can actually occupy or pass through: reachable
/// states, the airborne cells of moves available from them, and the cells
/// within a straight vertical jump above them.
pub fn reachable_empty(grid: &TileGrid, model: &MovementModel) -> BTreeSet<Cell> {
    let graph = build_move_graph(grid, model);
    reachable_empty_on(grid, model, &graph)
}

pub(crate) fn reachable_empty_on(
    grid: &TileGrid,
    model: &MovementModel,
    graph: &MoveGraph,
) -> BTreeSet<Cell> {
    let g = sweep(graph, false);
    let mut cells: BTreeSet<Cell> = BTreeSet::new();
    for id in 0..graph.moves.len() {
        if g[id].is_none() {
            continue;
        }
        let (c, r) = graph.cell_of(id);
        cells.insert((c, r));
        // Straight-up jump headroom.
        for up in 1..=model.max_jump_height {
            if up > r {
                break;
            }
            let rr = r - up;
            if !traversable(grid.get(c, rr)) {
                break;
            }
            cells.insert((c, rr));
        }
        for mv in graph.moves[id].as_ref().unwrap() {
            cells.extend(mv.traversed.iter().copied());
        }
    }
    cells
        .into_iter()
        .filter(|&(c, r)| grid.get(c, r) == TileCategory::Empty)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{parse_level, CharMap};
    use alloc::string::String;

    pub(crate) fn grid_from(rows: &[&str]) -> TileGrid {
        let mut text = String::new();
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        parse_level(&text, &CharMap::default()).unwrap()
    }

    fn flat_corridor(width: usize) -> TileGrid {
        let mut grid = TileGrid::filled(width, TileCategory::Empty);
        for c in 0..width {
            grid.set(c, 15, TileCategory::Solid);
        }
        grid
    }

    /// Plain FIFO breadth-first search over the exposed move graph —
    /// independent of the A* implementation it checks.
    pub(crate) fn bfs_oracle_cost(graph: &MoveGraph) -> Option<usize> {
        let start = graph.start()?;
        let goals: BTreeSet<Cell> = graph.goals().into_iter().collect();
        if goals.is_empty() {
            return None;
        }
        let mut dist: alloc::collections::BTreeMap<Cell, usize> =
            alloc::collections::BTreeMap::new();
        let mut queue = VecDeque::new();
        dist.insert(start, 0);
        queue.push_back(start);
        while let Some(cell) = queue.pop_front() {
            let d = dist[&cell];
            if goals.contains(&cell) {
                return Some(d);
            }
            for mv in graph.moves_from(cell) {
                let to = id_cell(graph.width(), mv.to);
                if !dist.contains_key(&to) {
                    dist.insert(to, d + 1);
                    queue.push_back(to);
                }
            }
        }
        None
    }

    #[test]
    fn corridor_walks_to_the_end() {
        let grid = flat_corridor(10);
        let result = find_optimal_path(&grid, &MovementModel::default()).unwrap();
        assert_eq!(result.optimal_cost, 9);
        assert!(result.optimal_path.iter().all(|&(_, r)| r == 14));
        assert!(result.optimal_moves.iter().all(|&k| k == MoveKind::Walk));
    }

    #[test]
    fn corridor_matches_bfs_oracle() {
        let grid = flat_corridor(10);
        let graph = build_move_graph(&grid, &MovementModel::default());
        assert_eq!(bfs_oracle_cost(&graph), Some(9));
    }

    #[test]
    fn sealed_right_wall_is_unreachable() {
        let mut grid = flat_corridor(8);
        for c in 5..8 {
            for r in 0..GRID_HEIGHT {
                grid.set(c, r, TileCategory::Solid);
            }
        }
        assert!(find_optimal_path(&grid, &MovementModel::default()).is_none());
        assert!(matches!(
            near_optimal_union(&grid, &MovementModel::default(), 0),
            Err(NotCompletable)
        ));
    }

    #[test]
    fn gap_is_crossed_by_exactly_one_jump() {
        let grid = grid_from(&[
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "------------",
            "XXXXX--XXXXX",
        ]);
        let result = find_optimal_path(&grid, &MovementModel::default()).unwrap();
        let jumps: Vec<usize> = result
            .optimal_moves
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == MoveKind::Jump)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(jumps.len(), 1, "path {:?}", result.optimal_path);
        // The one jump is a running leap over the gap columns 5-6: takeoff
        // at the last spot a span-5 arc still lands past the gap.
        let i = jumps[0];
        let (from, to) = (result.optimal_path[i], result.optimal_path[i + 1]);
        assert_eq!((from, to), ((2, 14), (7, 14)));
        assert_eq!(result.optimal_cost, 7);
    }

    #[test]
    fn slack_zero_union_of_unique_path_is_the_path() {
        // A single-width bridge forces a unique optimal route.
        let grid = flat_corridor(4);
        let union = near_optimal_union(&grid, &MovementModel::default(), 0).unwrap();
        let result = find_optimal_path(&grid, &MovementModel::default()).unwrap();
        let path: BTreeSet<Cell> = result.optimal_path.iter().copied().collect();
        assert_eq!(union, path);
    }

    #[test]
    fn union_is_monotone_in_slack() {
        let grid = grid_from(&[
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----XX----",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "XXXX--XXXX",
        ]);
        let model = MovementModel::default();
        let u0 = near_optimal_union(&grid, &model, 0).unwrap();
        let u10 = near_optimal_union(&grid, &model, 10).unwrap();
        assert!(u0.is_subset(&u10));
    }

    #[test]
    fn corridor_union_brute_force() {
        // On a 10-column corridor every state sits on the single walking
        // line, so all of them fall within any slack of optimal.
        let grid = flat_corridor(10);
        let union = near_optimal_union(&grid, &MovementModel::default(), 10).unwrap();
        let expected: BTreeSet<Cell> = (0..10).map(|c| (c, 14)).collect();
        assert_eq!(union, expected);
    }

    #[test]
    fn annotation_marks_the_floor_and_is_idempotent() {
        let grid = flat_corridor(6);
        let model = MovementModel::default();
        let annotated = annotate_paths(&grid, &model, DEFAULT_SLACK).unwrap();
        for c in 0..6 {
            assert_eq!(annotated.get(c, 14), TileCategory::PathMarker);
            assert_eq!(annotated.get(c, 15), TileCategory::Solid);
        }
        let twice = annotate_paths(&annotated, &model, DEFAULT_SLACK).unwrap();
        assert_eq!(twice, annotated);
    }

    #[test]
    fn annotation_preserves_non_empty_cells() {
        let mut grid = flat_corridor(6);
        grid.set(2, 14, TileCategory::Coin);
        grid.set(3, 14, TileCategory::Enemy);
        let annotated = annotate_paths(&grid, &MovementModel::default(), 0).unwrap();
        assert_eq!(annotated.get(2, 14), TileCategory::Coin);
        assert_eq!(annotated.get(3, 14), TileCategory::Enemy);
    }

    #[test]
    fn annotation_of_uncompletable_errors() {
        let grid = TileGrid::filled(4, TileCategory::Solid);
        assert_eq!(
            annotate_paths(&grid, &MovementModel::default(), 0),
            Err(NotCompletable)
        );
    }

    #[test]
    fn sealed_hole_is_not_reachable() {
        let mut grid = TileGrid::filled(6, TileCategory::Solid);
        // Open a start ledge and a separate sealed hole.
        grid.set(0, 14, TileCategory::Empty);
        grid.set(3, 7, TileCategory::Empty);
        let cells = reachable_empty(&grid, &MovementModel::default());
        assert!(cells.contains(&(0, 14)));
        assert!(!cells.contains(&(3, 7)));
    }

    #[test]
    fn corridor_reachability_includes_jump_headroom() {
        let grid = flat_corridor(10);
        let cells = reachable_empty(&grid, &MovementModel::default());
        // Floor row and four rows of vertical-jump headroom above it.
        for c in 0..10 {
            for r in 10..=14 {
                assert!(cells.contains(&(c, r)), "({c},{r}) missing");
            }
            assert!(!cells.contains(&(c, 9)));
        }
    }

    #[test]
    fn markers_are_transparent_to_reachability() {
        let grid = flat_corridor(8);
        let model = MovementModel::default();
        let annotated = annotate_paths(&grid, &model, DEFAULT_SLACK).unwrap();
        let plain: BTreeSet<Cell> = reachable_empty(&grid, &model);
        // Marked cells keep their reachability; compare against the
        // annotated grid with markers treated as empty.
        let stripped = crate::codec::strip_path(&annotated);
        let again = reachable_empty(&stripped, &model);
        assert_eq!(plain, again);
    }

    #[test]
    fn unreachable_iff_goal_column_unreached() {
        let mut grid = flat_corridor(8);
        // A 6-tall wall the default arcs cannot clear.
        for r in 9..15 {
            grid.set(4, r, TileCategory::Solid);
        }
        let model = MovementModel::default();
        assert!(find_optimal_path(&grid, &model).is_none());
        let graph = build_move_graph(&grid, &model);
        assert!(bfs_oracle_cost(&graph).is_none());
    }

    #[test]
    fn arc_table_errors() {
        assert_eq!(MovementModel::from_arcs(Vec::new()), Err(ArcTableError::Empty));
        assert_eq!(MovementModel::from_arcs(vec![(0, 0)]), Err(ArcTableError::ZeroOffset));
        let model = MovementModel::from_arcs(vec![(1, -2), (2, 0)]).unwrap();
        assert_eq!(model.max_jump_height, 2);
    }

    #[test]
    fn default_arc_table_shape() {
        let model = MovementModel::default();
        // 50 flat/descending offsets plus 20 climbing ones.
        assert_eq!(model.jump_arcs.len(), 70);
        assert!(model.jump_arcs.iter().all(|&(dx, dy)| dx != 0 && dx.abs() <= 5 && dy.abs() <= 4));
        assert!(model
            .jump_arcs
            .iter()
            .filter(|&&(_, dy)| dy < 0)
            .all(|&(dx, dy)| dx.abs() + dy.abs() <= 5));
        assert_eq!(model.max_jump_height, 4);
    }
}
