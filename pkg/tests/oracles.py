"""Independent brute-force oracles used by the tests.

These enumerate every edit script recursively, with no dynamic programming
and no shared code with the library's alignment routines.
"""

from typing import Callable, Iterator


def script_costs(n: int, m: int, pair_cost: Callable[[int, int], int]) -> Iterator[int]:
    """Yield the cost of every edit script over an n-item vs m-item pair.

    pair_cost(i, j) is the cost of consuming items i and j together (0 for
    a match, 1 for a substitution); skipping either side costs 1.
    """

    def rec(i: int, j: int, acc: int) -> Iterator[int]:
        if i == n and j == m:
            yield acc
            return
        if i < n and j < m:
            yield from rec(i + 1, j + 1, acc + pair_cost(i, j))
        if i < n:
            yield from rec(i + 1, j, acc + 1)
        if j < m:
            yield from rec(i, j + 1, acc + 1)

    return rec(0, 0, 0)


def brute_min_alignment_cost(ref, hyp) -> int:
    """Minimum edit cost between token sequences, by exhaustive enumeration."""

    def pair_cost(i: int, j: int) -> int:
        return int(
            ref[i].surface != hyp[j].surface or ref[i].lang is not hyp[j].lang
        )

    return min(script_costs(len(ref), len(hyp), pair_cost))


def brute_min_wtn_merge_cost(set_keys, token_keys) -> int:
    """Minimum cost of merging a token sequence into a sequence of
    correspondence sets, where consuming both costs 0 iff the token's
    (surface, lang) key is already present in the set."""

    def pair_cost(i: int, j: int) -> int:
        return int(token_keys[j] not in set_keys[i])

    return min(script_costs(len(set_keys), len(token_keys), pair_cost))
