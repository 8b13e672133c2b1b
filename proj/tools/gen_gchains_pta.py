#!/usr/bin/env python3
"""Writes the selection automaton for "x is the right son of an f node and
some downward path from x to an a node meets an odd number of g nodes".

Trees are over f/2, g/1, a/0 with one mark bit per node; the automaton
accepts exactly the tree whose bit is 1 at the nodes with the property.
A state (rs, E, A) records whether the node is a right son of f, the
parities some path must still realise (E) and those no path may realise (A).
"""
import itertools
import sys

SETS = [frozenset(s) for s in ([], [0], [1], [0, 1])]


def name(rs, e, a):
    def bits(s):
        return "".join("1" if p in s else "0" for p in (0, 1))
    return f"r{rs}e{bits(e)}a{bits(a)}"


def main(out):
    states = [(rs, e, a) for rs in (0, 1) for e in SETS for a in SETS]
    lines = ["; bit 1 exactly at right sons of f with an odd-g path to an a",
             "(alphabet (f[0] 2) (f[1] 2) (g[0] 1) (g[1] 1) (a[0] 0) (a[1] 0))",
             "(states " + " ".join(name(*s) for s in states) + ")",
             "(initial " + name(0, frozenset(), frozenset()) + ")"]
    for rs, e, a in states:
        for b in (0, 1):
            if b and not rs:
                continue
            e1 = e | {1} if b else e
            a1 = a | {1} if rs and not b else a
            src = name(rs, e, a)
            for lab in "fga":
                flip = 1 if lab == "g" else 0
                e2 = frozenset(p ^ flip for p in e1)
                a2 = frozenset(p ^ flip for p in a1)
                sym = f"{lab}[{b}]"
                if lab == "a":
                    if e2 <= {0} and 0 not in a2:
                        lines.append(f"(acc {src} {sym})")
                elif lab == "g":
                    lines.append(f"({src} {sym} {name(0, e2, a2)})")
                else:
                    ps = sorted(e2)
                    for sides in itertools.product((1, 2), repeat=len(ps)):
                        left = frozenset(p for p, s in zip(ps, sides) if s == 1)
                        right = frozenset(p for p, s in zip(ps, sides) if s == 2)
                        lines.append(f"({src} {sym} {name(0, left, a2)} {name(1, right, a2)})")
    with open(out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/gchains-select.pta")
