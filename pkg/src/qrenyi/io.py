"""JSON wire formats for operators and channels.

Operator: ``{"dim": n, "re": [[...]], "im": [[...]]}`` (``im`` may be omitted).
Channel:  ``{"dim_in": n, "dim_out": m, "kraus": [<operator-like>, ...]}`` where
each Kraus entry uses the same ``re``/``im`` layout with its own row count.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from qrenyi.channels import KrausChannel
from qrenyi.linalg import HermitianOperator

HERMITICITY_WARN = 1e-8


class FormatError(ValueError):
    """Malformed operator or channel document."""


def _complex_array(obj: dict, rows: int, cols: int) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad re/im arrays: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise FormatError(f"expected {rows}x{cols} re/im arrays, got {re.shape} and {im.shape}")
    if not (np.isfinite(re).all() and np.isfinite(im).all()):
        raise FormatError("non-finite matrix entry")
    return re + 1j * im


def operator_from_dict(obj: dict) -> HermitianOperator:
    """Parse an operator document, symmetrizing M <- (M + M^H)/2.

    Warns when the symmetrization moves any entry by more than 1e-8.
    """
    if not isinstance(obj, dict) or "dim" not in obj:
        raise FormatError("operator document needs a 'dim' field")
    n = obj["dim"]
    if not isinstance(n, int) or n < 1:
        raise FormatError(f"dim must be a positive integer, got {n!r}")
    m = _complex_array(obj, n, n)
    correction = float(np.abs(m - m.conj().T).max()) / 2
    if correction > HERMITICITY_WARN:
        warnings.warn(f"input not Hermitian; symmetrization changed entries by up to {correction:.3e}", stacklevel=2)
    return HermitianOperator(m)


def operator_to_dict(op) -> dict:
    m = np.asarray(op.data if isinstance(op, HermitianOperator) else op, dtype=complex)
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def channel_from_dict(obj: dict) -> KrausChannel:
    try:
        dim_in, dim_out, kraus = obj["dim_in"], obj["dim_out"], obj["kraus"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"channel document missing field: {exc}") from exc
    if not kraus:
        raise FormatError("channel needs at least one Kraus operator")
    ks = tuple(_complex_array(k, dim_out, dim_in) for k in kraus)
    return KrausChannel(ks)


def channel_to_dict(channel: KrausChannel) -> dict:
    return {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in channel.kraus],
    }


def load_operator(path) -> HermitianOperator:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    return operator_from_dict(obj)


def save_operator(path, op) -> None:
    Path(path).write_text(json.dumps(operator_to_dict(op)))
