"""Reading and writing perturbation files.

Format::

    {"order_terms": [{"order": 1, "entries": [{"i": 1, "j": 1, "value": 0.1}, ...]}],
     "A0": 0.2, "B0": 1.0}

Node indices are 1-based; ``A0``/``B0`` are optional and fitted when absent.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import InvalidParameter
from ..graph import MatrixSeries


def parse_perturbation(data: dict, base: np.ndarray) -> MatrixSeries:
    if not isinstance(data, dict) or "order_terms" not in data:
        raise InvalidParameter("perturbation file needs an 'order_terms' list")
    n = base.shape[0]
    terms: dict[int, np.ndarray] = {}
    for block in data["order_terms"]:
        try:
            order = int(block["order"])
            entries = block["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameter(f"malformed order term {block!r}") from exc
        if order < 1:
            raise InvalidParameter(f"orders start at 1, got {order}")
        if order in terms:
            raise InvalidParameter(f"order {order} listed twice")
        M = np.zeros((n, n))
        for e in entries:
            try:
                i, j, value = int(e["i"]), int(e["j"]), float(e["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidParameter(f"malformed entry {e!r}") from exc
            if not (1 <= i <= n and 1 <= j <= n):
                raise InvalidParameter(f"entry ({i},{j}) outside [1,{n}]")
            if M[i - 1, j - 1] != 0:
                raise InvalidParameter(f"entry ({i},{j}) repeated at order {order}")
            M[i - 1, j - 1] = value
        terms[order] = M
    top = max(terms, default=0)
    stack = [terms.get(l, np.zeros((n, n))) for l in range(1, top + 1)]
    A0 = data.get("A0")
    B0 = data.get("B0")
    return MatrixSeries.build(
        base,
        stack,
        None if A0 is None else float(A0),
        None if B0 is None else float(B0),
    )


def load_perturbation(path: str | Path, base: np.ndarray) -> MatrixSeries:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParameter(f"cannot read perturbation file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_perturbation(data, base)


def perturbation_to_dict(gs: MatrixSeries) -> dict:
    blocks = []
    for l, term in enumerate(gs.terms, start=1):
        entries = [
            {"i": int(i) + 1, "j": int(j) + 1, "value": float(term[i, j])}
            for i, j in zip(*np.nonzero(term))
        ]
        blocks.append({"order": l, "entries": entries})
    return {"order_terms": blocks, "A0": gs.bound_A0, "B0": gs.bound_B0}
