"""Text formats for complexes, chains, PSLGs and PL currents.

Numbers are written as integers or ``p/q`` rationals and read back exactly;
decimal input such as ``0.25`` is also accepted and taken at face value.

* complex (``.cx``): ``V E T`` header, then ``v id x y``, ``e id v1 v2``,
  ``t id v1 v2 v3`` lines.
* chain (``.csv``): ``simplex_id,coefficient`` rows, optional header.
* PSLG (``.pslg``): ``V S`` header, ``v id x y`` and ``s id v1 v2 [mult]``.
* PL current (``.plc``): one segment per line, ``x1 y1 x2 y2 [mult]``.
* PL region (``.plr``): ``polygon [mult]`` followed by ``x y`` lines, closed
  by ``end``.

Lines starting with ``#`` are comments everywhere.
"""
from __future__ import annotations

import csv
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .complex import Chain, Complex2
from .geom import GeometryError, PLCurrent, PLRegion
from .triangulate import PSLG


class FormatError(ValueError):
    pass


def fmt(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def num(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad number {tok!r}") from exc


def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line.split()


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# -- complexes -----------------------------------------------------------------

def dumps_complex(K: Complex2) -> str:
    out = [f"{K.n_vertices} {K.n_edges} {K.n_triangles}"]
    out += [f"v {i} {fmt(x)} {fmt(y)}" for i, (x, y) in enumerate(K.vertices)]
    out += [f"e {i} {a} {b}" for i, (a, b) in enumerate(K.edges)]
    out += [f"t {i} {a} {b} {c}" for i, (a, b, c) in enumerate(K.triangles)]
    return "\n".join(out) + "\n"


def loads_complex(text: str, check_embedding: bool = True) -> Complex2:
    it = _lines(text)
    try:
        _, head = next(it)
        nv, ne, nt = (int(x) for x in head)
    except (StopIteration, ValueError) as exc:
        raise FormatError("complex header must be 'V E T'") from exc
    verts, edges, tris = {}, {}, {}
    for ln, tok in it:
        kind = tok[0]
        try:
            if kind == "v" and len(tok) == 4:
                verts[int(tok[1])] = (num(tok[2]), num(tok[3]))
            elif kind == "e" and len(tok) == 4:
                edges[int(tok[1])] = (int(tok[2]), int(tok[3]))
            elif kind == "t" and len(tok) == 5:
                tris[int(tok[1])] = (int(tok[2]), int(tok[3]), int(tok[4]))
            else:
                raise FormatError(f"line {ln}: unexpected record {' '.join(tok)!r}")
        except ValueError as exc:
            raise FormatError(f"line {ln}: {exc}") from exc
    if (len(verts), len(edges), len(tris)) != (nv, ne, nt):
        raise FormatError("record counts do not match the header")
    for d, n in ((verts, nv), (edges, ne), (tris, nt)):
        if sorted(d) != list(range(n)):
            raise FormatError("ids must be 0..n-1")
    K = Complex2([verts[i] for i in range(nv)], [tris[i] for i in range(nt)],
                 extra_edges=[edges[i] for i in range(ne)], check_embedding=check_embedding)
    declared = {(min(a, b), max(a, b)) for a, b in edges.values()}
    if declared != set(K.edges):
        raise FormatError("edge list does not match the triangles' edges")
    return K


def save_complex(K: Complex2, path):
    atomic_write(path, dumps_complex(K))


def load_complex(path, check_embedding: bool = True) -> Complex2:
    return loads_complex(Path(path).read_text(), check_embedding)


def edge_id_map(K: Complex2, path_edges) -> dict:
    """Map file edge ids to ``K``'s edge ids (file order may differ)."""
    return {i: K.edge_index[(min(a, b), max(a, b))] for i, (a, b) in enumerate(path_edges)}


# -- chains ----------------------------------------------------------------------

def dumps_chain(chain: Chain) -> str:
    rows = ["simplex_id,coefficient"]
    rows += [f"{i},{fmt(c)}" for i, c in sorted(chain.coeffs.items())]
    return "\n".join(rows) + "\n"


def loads_chain(text: str, K: Complex2, dim: int = 1) -> Chain:
    coeffs = {}
    for row in csv.reader(text.splitlines()):
        if not row or row[0].strip().startswith("#"):
            continue
        if row[0].strip() == "simplex_id":
            continue
        if len(row) != 2:
            raise FormatError(f"bad chain row {row!r}")
        i, c = int(row[0]), num(row[1].strip())
        coeffs[i] = coeffs.get(i, 0) + c
    return Chain(K, dim, coeffs)


def save_chain(chain: Chain, path):
    atomic_write(path, dumps_chain(chain))


def load_chain(path, K: Complex2, dim: int = 1) -> Chain:
    return loads_chain(Path(path).read_text(), K, dim)


# -- PSLG ------------------------------------------------------------------------

def dumps_pslg(p: PSLG, key=0) -> str:
    out = [f"{len(p.vertices)} {len(p.segments)}"]
    out += [f"v {i} {fmt(x)} {fmt(y)}" for i, (x, y) in enumerate(p.vertices)]
    for i, ((a, b), t) in enumerate(zip(p.segments, p.tags)):
        m = t.get(key, 0)
        out.append(f"s {i} {a} {b} {m}" if m != 1 else f"s {i} {a} {b}")
    return "\n".join(out) + "\n"


def loads_pslg(text: str) -> PSLG:
    it = _lines(text)
    try:
        _, head = next(it)
        nv, ns = (int(x) for x in head)
    except (StopIteration, ValueError) as exc:
        raise FormatError("PSLG header must be 'V S'") from exc
    verts, segs = {}, {}
    for ln, tok in it:
        if tok[0] == "v" and len(tok) == 4:
            verts[int(tok[1])] = (num(tok[2]), num(tok[3]))
        elif tok[0] == "s" and len(tok) in (4, 5):
            m = int(tok[4]) if len(tok) == 5 else 1
            segs[int(tok[1])] = ((int(tok[2]), int(tok[3])), m)
        else:
            raise FormatError(f"line {ln}: unexpected record {' '.join(tok)!r}")
    if sorted(verts) != list(range(nv)) or sorted(segs) != list(range(ns)):
        raise FormatError("ids must be 0..n-1 and match the header")
    return PSLG([verts[i] for i in range(nv)], [segs[i][0] for i in range(ns)],
                [({0: segs[i][1]} if segs[i][1] else {}) for i in range(ns)])


def load_pslg(path) -> PSLG:
    return loads_pslg(Path(path).read_text())


def save_pslg(p: PSLG, path):
    atomic_write(path, dumps_pslg(p))


# -- PL currents -----------------------------------------------------------------

def dumps_plc(c: PLCurrent) -> str:
    return "".join(f"{fmt(p[0])} {fmt(p[1])} {fmt(q[0])} {fmt(q[1])} {m}\n"
                   for p, q, m in c.segments)


def loads_plc(text: str) -> PLCurrent:
    segs = []
    for ln, tok in _lines(text):
        if len(tok) not in (4, 5):
            raise FormatError(f"line {ln}: expected 'x1 y1 x2 y2 [mult]'")
        m = int(tok[4]) if len(tok) == 5 else 1
        segs.append(((num(tok[0]), num(tok[1])), (num(tok[2]), num(tok[3])), m))
    try:
        return PLCurrent(tuple(segs))
    except GeometryError as exc:
        raise FormatError(str(exc)) from exc


def dumps_plr(r: PLRegion) -> str:
    out = []
    for verts, m in r.polygons:
        out.append(f"polygon {m}")
        out += [f"{fmt(x)} {fmt(y)}" for x, y in verts]
        out.append("end")
    return "\n".join(out) + "\n"


def loads_plr(text: str) -> PLRegion:
    polys, cur, m = [], None, 1
    for ln, tok in _lines(text):
        if tok[0] == "polygon":
            if cur is not None:
                raise FormatError(f"line {ln}: nested polygon")
            cur, m = [], int(tok[1]) if len(tok) > 1 else 1
        elif tok[0] == "end":
            if cur is None:
                raise FormatError(f"line {ln}: 'end' without 'polygon'")
            polys.append((cur, m))
            cur = None
        elif cur is not None and len(tok) == 2:
            cur.append((num(tok[0]), num(tok[1])))
        else:
            raise FormatError(f"line {ln}: unexpected {' '.join(tok)!r}")
    if cur is not None:
        raise FormatError("unterminated polygon")
    try:
        return PLRegion(tuple(polys))
    except GeometryError as exc:
        raise FormatError(str(exc)) from exc


def load_plc(path) -> PLCurrent:
    return loads_plc(Path(path).read_text())


def load_plr(path) -> PLRegion:
    return loads_plr(Path(path).read_text())


def save_plc(c: PLCurrent, path):
    atomic_write(path, dumps_plc(c))


def save_plr(r: PLRegion, path):
    atomic_write(path, dumps_plr(r))


def write_json(obj, path):
    atomic_write(path, json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, Fraction):
        return float(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
