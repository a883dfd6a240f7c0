"""Line-oriented JSON files for datasets (``.gq``), codebooks (``.gqc``) and plans (``.gqp``).

Dataset and codebook files hold one header object on the first line and one
record per following line.  Floats are written in Python's shortest
round-trip form, so save/load cycles are exact.

Dataset record::

    {"order": 2, "vertex_attrs": [[1.0], [2.0]], "edges": [[1, 2, [0.5]]]}

Edge endpoints are 1-based.  Undirected files store each edge once with
``i < j``; loading mirrors it.
"""

from __future__ import annotations

import json
import os
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, GraphQuantError, InvalidEdge, ParseError
from .graph import AttributedGraph
from .quantizer import Codebook

DATASET_FORMAT = "gq-dataset"
CODEBOOK_FORMAT = "gq-codebook"
PLAN_FORMAT = "gq-plan"


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    yield lineno, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid JSON: {exc.msg}", lineno, os.fspath(path)) from None


# -- datasets -------------------------------------------------------------------


def graph_to_record(g: AttributedGraph) -> dict:
    edges = [[i + 1, j + 1, _floats(a)] for (i, j), a in g.edge_attrs.items() if not (g.undirected and i > j)]
    return {"order": g.order, "vertex_attrs": _floats(g.vertex_attrs), "edges": edges}


def record_to_graph(rec: dict, h: int, undirected: bool) -> AttributedGraph:
    """Validate one record; raises ParseError, DimensionMismatch or InvalidEdge."""
    if not isinstance(rec, dict) or "order" not in rec or "vertex_attrs" not in rec:
        raise ParseError("record needs 'order' and 'vertex_attrs'")
    m = rec["order"]
    if not isinstance(m, int) or m < 1:
        raise ParseError(f"order must be a positive integer, got {m!r}")
    try:
        va = np.array(rec["vertex_attrs"], dtype=float)
    except (TypeError, ValueError):
        raise ParseError("vertex_attrs must be an m x h array of numbers") from None
    if va.ndim != 2 or va.shape[0] != m:
        raise ParseError(f"vertex_attrs must have shape ({m}, h), got {va.shape}")
    if va.shape[1] != h:
        raise DimensionMismatch(f"record has attribute dimension {va.shape[1]}, header says {h}")
    edges = {}
    for e in rec.get("edges", []):
        if not (isinstance(e, list) and len(e) == 3 and isinstance(e[0], int) and isinstance(e[1], int)):
            raise ParseError(f"edge entry must be [i, j, attrs], got {e!r}")
        i, j, a = e
        if not (1 <= i <= m and 1 <= j <= m) or i == j:
            raise InvalidEdge(f"edge ({i}, {j}) invalid for order {m}")
        if undirected and i > j:
            raise ParseError(f"undirected files store edges with i < j, got ({i}, {j})")
        a = np.array(a, dtype=float)
        if a.shape != (h,):
            raise DimensionMismatch(f"edge ({i}, {j}) has dimension {a.shape}, header says {h}")
        key = (i - 1, j - 1)
        if key in edges:
            raise ParseError(f"duplicate edge ({i}, {j})")
        edges[key] = a
        if undirected:
            edges[(j - 1, i - 1)] = a
    return AttributedGraph(va, edges, undirected=undirected)


def read_dataset(path) -> tuple[dict, list[AttributedGraph]]:
    """Header and graphs of a ``.gq`` file."""
    path = os.fspath(path)
    header, graphs = None, []
    for lineno, obj in _read_lines(path):
        if header is None:
            if not isinstance(obj, dict) or obj.get("format") != DATASET_FORMAT:
                raise ParseError(f"first line must be a {DATASET_FORMAT} header", lineno, path)
            h = obj.get("attribute_dim")
            if not isinstance(h, int) or h < 1:
                raise ParseError("header needs a positive integer attribute_dim", lineno, path)
            header = obj
            continue
        try:
            graphs.append(record_to_graph(obj, header["attribute_dim"], bool(header.get("undirected", False))))
        except GraphQuantError as exc:
            if isinstance(exc, ParseError):
                raise ParseError(f"record {len(graphs) + 1}: {exc}", lineno, path) from None
            raise type(exc)(f"{path}:{lineno}: record {len(graphs) + 1}: {exc}") from None
    if header is None:
        raise ParseError("empty dataset file", None, path)
    return header, graphs


def load_dataset(path) -> list[AttributedGraph]:
    return read_dataset(path)[1]


def save_dataset(path, graphs: Sequence[AttributedGraph], name: str = "", undirected: bool | None = None) -> None:
    if not graphs:
        raise ValueError("refusing to write an empty dataset")
    h = graphs[0].dim
    if any(g.dim != h for g in graphs):
        raise DimensionMismatch("all graphs in a dataset must share the attribute dimension")
    if undirected is None:
        undirected = all(g.undirected for g in graphs)
    header = {"format": DATASET_FORMAT, "version": 1, "name": name, "attribute_dim": h, "undirected": bool(undirected)}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for g in graphs:
            if undirected and not g.undirected:
                g = AttributedGraph(g.vertex_attrs, g.edge_attrs, undirected=True)
            fh.write(_dumps(graph_to_record(g)) + "\n")


# -- codebooks -------------------------------------------------------------------


def save_codebook(path, cb: Codebook) -> None:
    header = {
        "format": CODEBOOK_FORMAT, "version": 1, "k": cb.k, "order": cb.order, "attribute_dim": cb.dim,
        "distortion": cb.distortion, "provenance": cb.provenance,
        "distortion_history": [float(v) for v in cb.distortion_history],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for j, y in enumerate(cb.code_graphs):
            fh.write(_dumps({"index": j, "cells": _floats(y)}) + "\n")


def load_codebook(path) -> Codebook:
    path = os.fspath(path)
    header, codes = None, []
    for lineno, obj in _read_lines(path):
        if header is None:
            if not isinstance(obj, dict) or obj.get("format") != CODEBOOK_FORMAT:
                raise ParseError(f"first line must be a {CODEBOOK_FORMAT} header", lineno, path)
            header = obj
            continue
        if obj.get("index") != len(codes):
            raise ParseError(f"expected code graph index {len(codes)}", lineno, path)
        cells = np.array(obj["cells"], dtype=float)
        if cells.shape != (header["order"], header["order"], header["attribute_dim"]):
            raise DimensionMismatch(f"{path}:{lineno}: code graph has shape {cells.shape}")
        codes.append(cells)
    if header is None or len(codes) != header.get("k"):
        raise ParseError("codebook header missing or k does not match the records", None, path)
    return Codebook(codes, header["distortion"], header.get("provenance", {}),
                    list(header.get("distortion_history", [])))


# -- experiment plans ------------------------------------------------------------------


def load_plan(path):
    """Read a ``.gqp`` file (a single JSON object) into an ExperimentPlan."""
    from .harness import plan_from_dict

    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    if not isinstance(obj, dict) or obj.get("format") != PLAN_FORMAT:
        raise ParseError(f"plan must be a {PLAN_FORMAT} object", None, path)
    return plan_from_dict(obj)


def save_plan(path, plan) -> None:
    from .harness import plan_to_dict

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_dict(plan), fh, indent=1, allow_nan=False)
        fh.write("\n")
