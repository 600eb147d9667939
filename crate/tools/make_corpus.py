#!/usr/bin/env python3
"""Generate the synthetic level corpus shipped under corpus/.

Levels are 16 rows tall, 24-40 columns wide, and engineered to be
completable under the default movement model: variable-height terrain,
gaps of width 1-3 at random positions, pipes, bullet towers, ?-blocks,
brick rows, coin arcs, floating platforms, enemies, and a few ceiling
("underground") levels.

Deterministic: re-running reproduces the exact same files.
"""

import random
from pathlib import Path

HEIGHT = 16
OUT = Path(__file__).resolve().parent.parent / "corpus"

SOLID, ENEMY, BRICK, QCOIN, QPOW, COIN = "X", "E", "S", "?", "Q", "o"
BTOP, BCOL, PL, PR, PTL, PTR, EMPTY = "B", "b", "[", "]", "<", ">", "-"


def make_level(rng, width, underground):
    grid = [[EMPTY] * width for _ in range(HEIGHT)]

    # Terrain: ground_top[c] is the row of the highest solid ground cell.
    top = 14
    ground_top = []
    for c in range(width):
        if c > 3 and rng.random() < 0.22:
            top += rng.choice([-1, -1, 1, 1, 2, -2])
            top = max(11, min(14, top))
        ground_top.append(top)

    # Gaps: 1-3 per level, width 1-3, kept away from the ends and each other.
    gaps = set()
    n_gaps = rng.randint(1, 3)
    attempts = 0
    placed = []
    while len(placed) < n_gaps and attempts < 40:
        attempts += 1
        w = rng.randint(1, 3)
        start = rng.randint(5, width - 5 - w)
        span = set(range(start - 2, start + w + 2))
        if any(span & set(range(s - 2, s + gw + 2)) for s, gw in placed):
            continue
        # Keep takeoff/landing heights compatible: level them.
        level_top = ground_top[start - 1]
        for c in range(start, start + w):
            gaps.add(c)
        for c in range(start - 1, min(width, start + w + 1)):
            ground_top[c] = level_top
        placed.append((start, w))

    for c in range(width):
        if c in gaps:
            continue
        for r in range(ground_top[c], HEIGHT):
            grid[r][c] = SOLID

    if underground:
        for c in range(width):
            grid[0][c] = SOLID

    def ground_cells_free(c, height_needed):
        return c not in gaps and ground_top[c] - height_needed >= (2 if underground else 1)

    # Pipes: two columns wide, 2-3 tall, standing on flat ground.
    c = 6
    while c < width - 6:
        if (
            rng.random() < 0.10
            and ground_top[c] == ground_top[c + 1]
            and ground_cells_free(c, 4)
            and ground_cells_free(c + 1, 4)
            and not any(cc in gaps for cc in range(c - 4, c + 6))
        ):
            h = rng.randint(2, 3)
            base = ground_top[c] - 1
            for k in range(h - 1):
                grid[base - k][c] = PL
                grid[base - k][c + 1] = PR
            grid[base - h + 1][c] = PTL
            grid[base - h + 1][c + 1] = PTR
            c += 6
        else:
            c += 1

    # Bullet towers: 2-3 tall including the head.
    c = 8
    while c < width - 6:
        if (
            rng.random() < 0.06
            and grid[ground_top[c] - 1][c] == EMPTY
            and ground_cells_free(c, 4)
            and not any(cc in gaps for cc in range(c - 4, c + 5))
        ):
            h = rng.randint(2, 3)
            base = ground_top[c] - 1
            for k in range(h - 1):
                grid[base - k][c] = BCOL
            grid[base - h + 1][c] = BTOP
            c += 7
        else:
            c += 1

    # Question blocks and brick rows, 3-4 tiles above the ground.
    c = 4
    while c < width - 4:
        lift = rng.randint(3, 4)
        row = ground_top[c] - lift
        run = min(rng.randint(1, 4), width - 4 - c)
        clear_of_gaps = not any(
            cc in gaps for cc in range(c - 3, c + run + 4)
        )
        if rng.random() < 0.12 and row >= (2 if underground else 1) and clear_of_gaps:
            kinds = []
            for _ in range(run):
                roll = rng.random()
                kinds.append(QPOW if roll < 0.18 else (QCOIN if roll < 0.5 else BRICK))
            if all(grid[row][c + k] == EMPTY for k in range(run)):
                for k, kind in enumerate(kinds):
                    grid[row][c + k] = kind
            c += run + 3
        else:
            c += 1

    # Floating platforms, kept clear of gap approaches.
    c = 5
    while c < width - 5:
        if (
            rng.random() < 0.08
            and not any(cc in gaps for cc in range(c - 5, c + 9))
        ):
            run = rng.randint(2, 4)
            row = ground_top[c] - rng.randint(3, 4)
            if row >= (2 if underground else 1) and all(
                c + k < width and grid[row][c + k] == EMPTY for k in range(run)
            ):
                for k in range(run):
                    grid[row][c + k] = SOLID
            c += run + 4
        else:
            c += 1

    # Coins: short arcs in the air above safe ground.
    c = 4
    while c < width - 4:
        if rng.random() < 0.10 and not any(
            cc in gaps for cc in range(c - 3, c + 6)
        ):
            run = rng.randint(2, 3)
            row = ground_top[c] - rng.randint(2, 3)
            if row >= (2 if underground else 1) and all(
                c + k < width and grid[row][c + k] == EMPTY for k in range(run)
            ):
                for k in range(run):
                    grid[row][c + k] = COIN
            c += run + 2
        else:
            c += 1

    # Enemies on the ground, away from the start.
    for c in range(6, width - 2):
        if c in gaps:
            continue
        row = ground_top[c] - 1
        if grid[row][c] == EMPTY and rng.random() < 0.08:
            grid[row][c] = ENEMY

    return ["".join(row) for row in grid]


FLAT_GAP = [
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
]


def main():
    rng = random.Random(20160212)
    OUT.mkdir(exist_ok=True)
    (OUT / "flat_gap.txt").write_text("\n".join(FLAT_GAP) + "\n")
    count = 23
    made = 0
    while made < count:
        width = rng.randint(24, 40)
        underground = made % 6 == 5
        rows = make_level(rng, width, underground)
        name = f"synthetic_{made:02d}.txt"
        (OUT / name).write_text("\n".join(rows) + "\n")
        made += 1
    print(f"wrote {count + 1} levels to {OUT}")


if __name__ == "__main__":
    main()
