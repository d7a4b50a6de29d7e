"""JSON serialization of approximation trees.

Nodes are stored in a flat list in depth-first order with children given as
indices. Leaf samples are base64 strings of little-endian float64 data in
row-major order, so values survive a round trip bit for bit. Coefficients
are stored alongside so evaluation is reproduced exactly as well.
"""

from __future__ import annotations

import base64
import json
from typing import Union

import numpy as np

from .box import Box
from .chebcore import ChebInterpolant, coeffs_to_values
from .errors import InvalidArgumentError
from .tree import BuildParams, LeafPayload, PUFun, TreeNode

FORMAT_VERSION = 1


def encode_array(a) -> str:
    data = np.ascontiguousarray(a, dtype="<f8").tobytes()
    return base64.b64encode(data).decode("ascii")


def decode_array(text: str, shape) -> np.ndarray:
    flat = np.frombuffer(base64.b64decode(text), dtype="<f8")
    return flat.astype(float).reshape(tuple(shape))


def _payload_dict(payload) -> dict:
    coeffs = np.asarray(payload.interpolant.coeffs)
    out = {
        "degrees": list(payload.degrees),
        "values": encode_array(payload.values),
        "coeffs": encode_array(coeffs),
    }
    if hasattr(payload, "residual_rms"):
        out["kind"] = "lsq"
        out["residual_rms"] = float(payload.residual_rms)
    return out


def to_dict(fun: PUFun) -> dict:
    nodes = []

    def visit(node: TreeNode) -> int:
        idx = len(nodes)
        rec = {
            "zone": node.zone.as_list(),
            "domain": node.domain.as_list(),
            "isdone": [bool(b) for b in node.isdone],
            "splitdim": node.splitdim,
            "depth": node.depth,
            "empty": bool(node.empty),
            "payload": _payload_dict(node.payload) if node.payload is not None else None,
            "children": [],
        }
        nodes.append(rec)
        if not node.is_leaf:
            rec["children"] = [visit(c) for c in node.children]
        return idx

    visit(fun.root)
    p = fun.params
    doc = {
        "format": FORMAT_VERSION,
        "omega": fun.omega.as_list(),
        "params": {"N": p.N, "t": p.t, "tol": p.tol, "max_depth": p.max_depth,
                   "max_leaves": p.max_leaves},
        "nodes": nodes,
    }
    spec = getattr(fun, "spec", None)
    if spec is not None:
        doc["region"] = spec.name
    return doc


def _payload_from(rec: dict, domain: Box):
    sizes = [n + 1 for n in rec["degrees"]]
    if rec.get("kind") == "lsq":
        # lsq payloads are rebuilt as plain payloads carrying the fitted coefficients
        coeffs = decode_array(rec["coeffs"], sizes)
        return LeafPayload(coeffs_to_values(coeffs), ChebInterpolant(coeffs, domain))
    values = decode_array(rec["values"], sizes)
    if "coeffs" in rec:
        interp = ChebInterpolant(decode_array(rec["coeffs"], sizes), domain)
    else:
        interp = ChebInterpolant.from_values(values, domain)
    return LeafPayload(values, interp)


def from_dict(doc: dict) -> PUFun:
    if doc.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise InvalidArgumentError(f"unsupported format version {doc.get('format')}")
    recs = doc["nodes"]
    if not recs:
        raise InvalidArgumentError("document has no nodes")

    def make(i: int) -> TreeNode:
        rec = recs[i]
        node = TreeNode(zone=Box.from_list(rec["zone"]), domain=Box.from_list(rec["domain"]),
                        isdone=list(rec["isdone"]), splitdim=rec["splitdim"],
                        depth=rec.get("depth", 0), empty=rec.get("empty", False))
        if rec["children"]:
            node.children = tuple(make(c) for c in rec["children"])
        elif rec["payload"] is not None:
            node.payload = _payload_from(rec["payload"], node.domain)
        return node

    root = make(0)
    params = BuildParams(**doc["params"])
    omega = Box.from_list(doc["omega"])
    region = doc.get("region")
    if region is not None:
        from .extension import ExtensionFun, get_domain
        return ExtensionFun(root, params, get_domain(region))
    return PUFun(root, params, omega)


def dumps(fun: PUFun, **kwargs) -> str:
    return json.dumps(to_dict(fun), **kwargs)


def loads(text: Union[str, bytes]) -> PUFun:
    return from_dict(json.loads(text))


def save(fun: PUFun, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(fun))


def load(path) -> PUFun:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


__all__ = ["decode_array", "dumps", "encode_array", "from_dict", "load", "loads", "save", "to_dict"]
