//! Handcrafted fixture levels and independent search oracles, shared by
//! this workspace's test and acceptance suites (feature `fixtures`).
//!
//! The oracles deliberately avoid the production search code: plain FIFO
//! breadth-first sweeps over the exposed move graph.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::level::{parse_level, CharMap, TileCategory, TileGrid, GRID_HEIGHT};
use crate::path::{Cell, MoveGraph};

pub fn grid(rows: &[&str]) -> TileGrid {
    let mut text = String::new();
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    parse_level(&text, &CharMap::default()).expect("fixture parses")
}

/// A flat corridor: solid bottom row, everything else empty.
pub fn flat_corridor(width: usize) -> TileGrid {
    let mut g = TileGrid::filled(width, TileCategory::Empty);
    for c in 0..width {
        g.set(c, 15, TileCategory::Solid);
    }
    g
}

/// The pathfinding fixture bank: named levels no wider than 40 columns,
/// mixing completable and uncompletable shapes.
pub fn pathfinding_bank() -> Vec<(&'static str, TileGrid)> {
    let mut out: Vec<(&'static str, TileGrid)> = Vec::new();
    out.push(("corridor_10", flat_corridor(10)));
    out.push(("corridor_40", flat_corridor(40)));
    out.push((
        "flat_gap",
        grid(&[
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
            "---------E--",
            "XXXXX--XXXXX",
        ]),
    ));
    out.push((
        "double_gap",
        grid(&[
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "--------------------",
            "XXXX--XXXXXX---XXXXX",
        ]),
    ));
    let stairs_up = {
        let mut g = TileGrid::filled(8, TileCategory::Empty);
        for c in 0..8 {
            for r in (15 - c)..16 {
                g.set(c, r, TileCategory::Solid);
            }
        }
        g
    };
    out.push(("stairs_up", stairs_up));
    let stairs_down = {
        let mut g = TileGrid::filled(8, TileCategory::Empty);
        for c in 0..8 {
            for r in (8 + c)..16 {
                g.set(c, r, TileCategory::Solid);
            }
        }
        g
    };
    out.push(("stairs_down", stairs_down));
    out.push((
        "pillar_hurdle",
        grid(&[
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "-----X----",
            "-----X----",
            "XXXXXXXXXX",
        ]),
    ));
    out.push((
        "tall_wall_unreachable",
        grid(&[
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "----------",
            "-----X----",
            "-----X----",
            "-----X----",
            "-----X----",
            "-----X----",
            "-----X----",
            "XXXXXXXXXX",
        ]),
    ));
    let sealed_right = {
        let mut g = flat_corridor(8);
        for c in 5..8 {
            for r in 0..GRID_HEIGHT {
                g.set(c, r, TileCategory::Solid);
            }
        }
        g
    };
    out.push(("sealed_right", sealed_right));
    let no_start_solid = {
        let mut g = flat_corridor(6);
        for r in 0..GRID_HEIGHT {
            g.set(0, r, TileCategory::Solid);
        }
        g
    };
    out.push(("no_start_solid_column", no_start_solid));
    let no_start_pit = {
        let mut g = flat_corridor(6);
        g.set(0, 15, TileCategory::Empty);
        g
    };
    out.push(("no_start_bottomless_column", no_start_pit));
    out.push((
        "ceiling_corridor",
        grid(&[
            "XXXXXXXXXXXX",
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
            "XXXXXXXXXXXX",
        ]),
    ));
    out.push((
        "pipe_pair",
        grid(&[
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
            "----<>------",
            "----[]------",
            "----[]------",
            "XXXXXXXXXXXX",
        ]),
    ));
    out.push((
        "bullet_tower",
        grid(&[
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
            "------B-----",
            "------b-----",
            "------b-----",
            "XXXXXXXXXXXX",
        ]),
    ));
    let coin_floor = {
        let mut g = flat_corridor(10);
        for c in 3..7 {
            g.set(c, 14, TileCategory::Coin);
        }
        g
    };
    out.push(("coin_floor", coin_floor));
    let enemy_gauntlet = {
        let mut g = flat_corridor(12);
        for c in [3, 5, 7, 9] {
            g.set(c, 14, TileCategory::Enemy);
        }
        g
    };
    out.push(("enemy_gauntlet", enemy_gauntlet));
    out.push((
        "pit_with_platform",
        grid(&[
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "-----XX-------",
            "--------------",
            "--------------",
            "XXXX------XXXX",
        ]),
    ));
    out.push((
        "drift_fall",
        grid(&[
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "XXX-----------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "---XXXXXXXXXXX",
        ]),
    ));
    out.push(("single_column", {
        let mut g = TileGrid::filled(1, TileCategory::Empty);
        g.set(0, 15, TileCategory::Solid);
        g
    }));
    out.push((
        "two_routes",
        grid(&[
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "--------------",
            "----XXXXXX----",
            "--------------",
            "--------------",
            "--------------",
            "XXXXXXXXXXXXXX",
        ]),
    ));
    out
}

fn cell_of(graph: &MoveGraph, id: usize) -> Cell {
    (id % graph.width(), id / graph.width())
}

/// Independent uniform-cost search: plain FIFO BFS over the exposed move
/// graph.
pub fn bfs_cost(graph: &MoveGraph) -> Option<usize> {
    let start = graph.start()?;
    let goals: BTreeSet<Cell> = graph.goals().into_iter().collect();
    if goals.is_empty() {
        return None;
    }
    let mut dist: BTreeMap<Cell, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    while let Some(cell) = queue.pop_front() {
        let d = dist[&cell];
        if goals.contains(&cell) {
            return Some(d);
        }
        for mv in graph.moves_from(cell) {
            let to = cell_of(graph, mv.to);
            if let alloc::collections::btree_map::Entry::Vacant(e) = dist.entry(to) {
                e.insert(d + 1);
                queue.push_back(to);
            }
        }
    }
    None
}

/// Forward distances from the start over the exposed edges.
pub fn forward_distances(graph: &MoveGraph) -> BTreeMap<Cell, usize> {
    let mut dist = BTreeMap::new();
    let Some(start) = graph.start() else { return dist };
    let mut queue = VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    while let Some(cell) = queue.pop_front() {
        let d = dist[&cell];
        for mv in graph.moves_from(cell) {
            let to = cell_of(graph, mv.to);
            if !dist.contains_key(&to) {
                dist.insert(to, d + 1);
                queue.push_back(to);
            }
        }
    }
    dist
}

/// Backward distances to any goal, over reversed edges built here.
pub fn backward_distances(graph: &MoveGraph) -> BTreeMap<Cell, usize> {
    let mut reverse: BTreeMap<Cell, Vec<Cell>> = BTreeMap::new();
    for from in graph.states() {
        for mv in graph.moves_from(from) {
            reverse.entry(cell_of(graph, mv.to)).or_default().push(from);
        }
    }
    let mut dist = BTreeMap::new();
    let mut queue = VecDeque::new();
    for goal in graph.goals() {
        dist.insert(goal, 0);
        queue.push_back(goal);
    }
    while let Some(cell) = queue.pop_front() {
        let d = dist[&cell];
        if let Some(preds) = reverse.get(&cell) {
            for &p in preds {
                if !dist.contains_key(&p) {
                    dist.insert(p, d + 1);
                    queue.push_back(p);
                }
            }
        }
    }
    dist
}

/// `{ s : g(s) + h*(s) ≤ bound }` computed from the two sweeps above.
pub fn sweep_union(graph: &MoveGraph, bound: usize) -> BTreeSet<Cell> {
    let fwd = forward_distances(graph);
    let bwd = backward_distances(graph);
    graph
        .states()
        .into_iter()
        .filter(|cell| match (fwd.get(cell), bwd.get(cell)) {
            (Some(a), Some(b)) => a + b <= bound,
            _ => false,
        })
        .collect()
}

/// The reachable-empty closure computed independently: forward states,
/// their airborne traversals, and vertical jump headroom, restricted to
/// empty cells.
pub fn closure_reachable_empty(
    grid: &TileGrid,
    graph: &MoveGraph,
    max_jump_height: usize,
) -> BTreeSet<Cell> {
    let traversable = |cell: Cell| {
        matches!(
            grid.get(cell.0, cell.1),
            TileCategory::Empty | TileCategory::Coin | TileCategory::Enemy | TileCategory::PathMarker
        )
    };
    let fwd = forward_distances(graph);
    let mut cells: BTreeSet<Cell> = BTreeSet::new();
    for (&cell, _) in &fwd {
        cells.insert(cell);
        for mv in graph.moves_from(cell) {
            cells.extend(mv.traversed.iter().copied());
        }
        for up in 1..=max_jump_height {
            if up > cell.1 {
                break;
            }
            let above = (cell.0, cell.1 - up);
            if !traversable(above) {
                break;
            }
            cells.insert(above);
        }
    }
    cells
        .into_iter()
        .filter(|&(c, r)| grid.get(c, r) == TileCategory::Empty)
        .collect()
}

/// Random 13-category grid with a mostly-solid floor; `vec` of these backs
/// the randomized codec checks.
pub fn random_grid(rng: &mut impl rand::Rng, max_width: usize) -> TileGrid {
    let width = rng.random_range(1..=max_width);
    let mut grid = TileGrid::filled(width, TileCategory::Empty);
    let deco = [
        TileCategory::Enemy,
        TileCategory::DestructibleBlock,
        TileCategory::QuestionCoin,
        TileCategory::QuestionPowerup,
        TileCategory::Coin,
        TileCategory::BulletTop,
        TileCategory::BulletColumn,
        TileCategory::PipeLeft,
        TileCategory::PipeRight,
        TileCategory::PipeTopLeft,
        TileCategory::PipeTopRight,
    ];
    for col in 0..width {
        if rng.random::<f64>() < 0.85 {
            grid.set(col, 15, TileCategory::Solid);
        }
        for row in 0..15 {
            let r: f64 = rng.random();
            let cat = if r < 0.80 {
                TileCategory::Empty
            } else if r < 0.88 {
                TileCategory::Solid
            } else {
                deco[rng.random_range(0..deco.len())]
            };
            grid.set(col, row, cat);
        }
    }
    grid
}

/// Turns a share of empty cells into path markers so paths-bearing specs
/// can encode the grid; guarantees at least one marker when possible.
pub fn sprinkle_markers(grid: &TileGrid, rng: &mut impl rand::Rng) -> TileGrid {
    let mut out = grid.clone();
    let mut any = false;
    for col in 0..out.width() {
        for row in 0..GRID_HEIGHT {
            if out.get(col, row) == TileCategory::Empty && rng.random::<f64>() < 0.15 {
                out.set(col, row, TileCategory::PathMarker);
                any = true;
            }
        }
    }
    if !any {
        'outer: for col in 0..out.width() {
            for row in 0..GRID_HEIGHT {
                if out.get(col, row) == TileCategory::Empty {
                    out.set(col, row, TileCategory::PathMarker);
                    break 'outer;
                }
            }
        }
    }
    out
}

/// The deliberately-memorizable 20-column level: two coins per column
/// encode the column index, so the column-to-column transition is an
/// injective chain a small model can replay without counting.
pub fn memorization_level() -> TileGrid {
    let mut grid = TileGrid::filled(20, TileCategory::Empty);
    for c in 0..20 {
        grid.set(c, 14, TileCategory::Solid);
        grid.set(c, 15, TileCategory::Solid);
        grid.set(c, 1 + c / 5, TileCategory::Coin);
        grid.set(c, 6 + c % 5, TileCategory::Coin);
    }
    grid
}
