"""Slow, explicit RePair used as an independent check of the run-based engine.

Bodies are plain lists; every round enumerates all factors of all bodies and
counts them by direct greedy scanning.
"""


def greedy_count(needle, body):
    m = len(needle)
    count = i = 0
    while i + m <= len(body):
        if tuple(body[i:i + m]) == needle:
            count += 1
            i += m
        else:
            i += 1
    return count


def all_counts(bodies, max_len=None):
    """{factor: (total count, first occurrence)} over factors of length >= 2."""
    first = {}
    for b, body in enumerate(bodies):
        for i in range(len(body)):
            top = len(body) if max_len is None else min(len(body), i + max_len)
            for j in range(i + 2, top + 1):
                f = tuple(body[i:j])
                if f not in first:
                    first[f] = (b, i)
    return {f: (sum(greedy_count(f, body) for body in bodies), pos) for f, pos in first.items()}


def choose(bodies, variant):
    counts = all_counts(bodies, 2 if variant == "digram" else None)
    if not counts:
        return None
    t = max(c for c, _ in counts.values())
    if t < 2:
        return None
    best = [f for f, (c, _) in counts.items() if c == t]
    longest = max(map(len, best))
    best = [f for f in best if len(f) == longest]
    f = min(best, key=lambda f: counts[f][1])
    return f, t, counts[f][1]


def replace(body, needle, fresh):
    out, i, m = [], 0, len(needle)
    while i < len(body):
        if tuple(body[i:i + m]) == needle:
            out.append(fresh)
            i += m
        else:
            out.append(body[i])
            i += 1
    return out


def reference_repair(word, variant="mg"):
    """Returns the list of bodies (start first, then rules by creation) and the choices.

    Terminals are ints (bytes), nonterminals are strings ``X1``, ``X2``, ...
    """
    bodies = [list(word)]
    choices = []
    while True:
        pick = choose(bodies, variant)
        if pick is None:
            return bodies, choices
        f, t, pos = pick
        fresh = f"X{len(bodies)}"
        bodies = [replace(body, f, fresh) for body in bodies] + [list(f)]
        choices.append(pick)
