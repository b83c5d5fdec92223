import re

CYCLE_PATTERN = re.compile(r"\(([^()]*)\)")


def identity(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def from_one_line(values: list[int]) -> tuple[int, ...]:
    """1-based one-line notation [σ(1), ..., σ(n)] -> 0-based tuple."""
    return tuple(int(v) - 1 for v in values)


def to_one_line(perm: tuple[int, ...]) -> list[int]:
    return [p + 1 for p in perm]


def from_cycles(text: str, n: int) -> tuple[int, ...]:
    """Parse cycle notation such as "(1,2,3)(4,5)" or "()" into a 0-based tuple."""
    perm = list(range(n))
    for body in CYCLE_PATTERN.findall(text):
        labels = [int(tok) - 1 for tok in re.split(r"[,\s]+", body.strip()) if tok]
        for i, label in enumerate(labels):
            perm[label] = labels[(i + 1) % len(labels)]
    return tuple(perm)


def to_cycles(perm: tuple[int, ...]) -> str:
    seen = set()
    cycles = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cycle = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        cycles.append("(" + ",".join(str(c + 1) for c in cycle) + ")")
    return "".join(cycles) or "()"


def is_bijection(perm: tuple[int, ...], n: int) -> bool:
    return len(perm) == n and sorted(perm) == list(range(n))


def compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """(p ∘ q)(i) = p(q(i))."""
    return tuple(p[q[i]] for i in range(len(q)))


def inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, image in enumerate(p):
        inv[image] = i
    return tuple(inv)
