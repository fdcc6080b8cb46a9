"""JSON encodings of the kit's objects and a deterministic writer.

Complex numbers are ``[re, im]`` pairs.  Permutations are written 1-based
(``perm[j]`` is the image of ``j + 1``) and converted to 0-based on load.
:func:`dumps` sorts keys and prints floats with 17 significant digits, so
equal inputs give byte-identical output.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ValidationError
from .linalg import as_density, as_probs, as_state
from .majorization import BirkhoffDecomposition, as_permutation
from .preorder import PairCertificate, PairInstance
from .sio import KrausChannel


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    # keep floats recognizable as floats
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = [_encode(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(inner) + "]"
        return "[\n" + ",\n".join(pad + s for s in inner) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def load_json(path: str | Path) -> Any:
    """Read a JSON file; any read or parse problem becomes ValidationError."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read JSON from {path}: {exc}") from exc


def _require(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise ValidationError(f"missing field {key!r}")
    return obj[key]


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return complex(v[0], v[1])
    raise ValidationError(f"expected a number or [re, im], got {v!r}")


def _complex_vector(values) -> np.ndarray:
    if not isinstance(values, list):
        raise ValidationError("expected a list of [re, im] pairs")
    return np.array([complex_from_json(v) for v in values], dtype=complex)


def _check_dim(obj, n):
    if "dim" in obj and obj["dim"] != n:
        raise ValidationError(f"declared dim {obj['dim']} but found {n} entries")


def state_to_json(v) -> dict:
    v = np.asarray(v, dtype=complex)
    return {"dim": int(v.size), "amplitudes": [complex_to_json(z) for z in v]}


def state_from_json(obj, renormalize: bool = False) -> np.ndarray:
    """Accepts ``{"dim", "amplitudes"}`` or a bare list of amplitudes."""
    amps = obj if isinstance(obj, list) else _require(obj, "amplitudes")
    v = _complex_vector(amps)
    if isinstance(obj, dict):
        _check_dim(obj, v.size)
    return as_state(v, renormalize=renormalize)


def density_to_json(rho) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"dim": int(rho.shape[0]),
            "matrix": [[complex_to_json(z) for z in row] for row in rho]}


def density_from_json(obj) -> np.ndarray:
    rows = _require(obj, "matrix")
    if not isinstance(rows, list):
        raise ValidationError("matrix must be a list of rows")
    rho = np.array([_complex_vector(r) for r in rows])
    _check_dim(obj, rho.shape[0])
    return as_density(rho)


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=float)
    return {"dim": int(M.shape[0]), "rows": M.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    rows = _require(obj, "rows")
    try:
        M = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"rows must be numeric: {exc}") from exc
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("matrix must be square")
    _check_dim(obj, M.shape[0])
    return M


def probs_to_json(p) -> dict:
    p = np.asarray(p, dtype=float)
    return {"dim": int(p.size), "entries": p.tolist()}


def probs_from_json(obj, validate: bool = True) -> np.ndarray:
    """Accepts ``{"dim", "entries"}`` or a bare list."""
    entries = obj if isinstance(obj, list) else _require(obj, "entries")
    try:
        p = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"entries must be numeric: {exc}") from exc
    if isinstance(obj, dict):
        _check_dim(obj, p.size)
    return as_probs(p) if validate else p


def perm_to_json(perm) -> list[int]:
    return [int(i) + 1 for i in perm]


def perm_from_json(values, dim: int | None = None) -> np.ndarray:
    if not isinstance(values, list) or not all(isinstance(i, int) for i in values):
        raise ValidationError("permutation must be a list of integers")
    return as_permutation(np.array(values, dtype=int) - 1, dim)


def birkhoff_to_json(dec: BirkhoffDecomposition) -> dict:
    return {"terms": [{"weight": float(w), "perm": perm_to_json(p)} for w, p in dec]}


def birkhoff_from_json(obj) -> BirkhoffDecomposition:
    terms = _require(obj, "terms")
    if not isinstance(terms, list):
        raise ValidationError("terms must be a list")
    weights, perms = [], []
    for t in terms:
        weights.append(float(_require(t, "weight")))
        perms.append(tuple(int(i) for i in perm_from_json(_require(t, "perm"))))
    if len({len(p) for p in perms}) > 1:
        raise ValidationError("Birkhoff terms have different lengths")
    return BirkhoffDecomposition(tuple(weights), tuple(perms))


def channel_to_json(channel: KrausChannel) -> dict:
    return {"dim": channel.dim,
            "kraus": [[[complex_to_json(z) for z in row] for row in K] for K in channel]}


def channel_from_json(obj, check: bool = True, tol: float | None = None) -> KrausChannel:
    ops = _require(obj, "kraus")
    if not isinstance(ops, list):
        raise ValidationError("kraus must be a list of matrices")
    mats = [np.array([_complex_vector(r) for r in K]) for K in ops]
    ch = KrausChannel(mats, check=check, tol=tol)
    _check_dim(obj, ch.dim)
    return ch


def instance_to_json(inst: PairInstance) -> dict:
    return {k: state_to_json(getattr(inst, k)) for k in ("phi", "psi", "alpha", "beta")}


def instance_from_json(obj) -> PairInstance:
    return PairInstance(*(state_from_json(_require(obj, k)) for k in ("phi", "psi", "alpha", "beta")))


def certificate_to_json(cert: PairCertificate) -> dict:
    return {
        "d1": matrix_to_json(cert.d1), "c": float(cert.c),
        "t_matrix": matrix_to_json(cert.t_matrix),
        "pi1": perm_to_json(cert.pi1), "pi2": perm_to_json(cert.pi2),
        "birkhoff_d1": birkhoff_to_json(cert.birkhoff_d1),
        "birkhoff_t": birkhoff_to_json(cert.birkhoff_t),
        "ratio_t": complex_to_json(cert.ratio_t),
    }


def certificate_from_json(obj) -> PairCertificate:
    d1 = matrix_from_json(_require(obj, "d1"))
    c = _require(obj, "c")
    if not isinstance(c, (int, float)) or isinstance(c, bool):
        raise ValidationError("c must be a number")
    return PairCertificate(
        d1=d1, c=float(c), t_matrix=matrix_from_json(_require(obj, "t_matrix")),
        pi1=perm_from_json(_require(obj, "pi1"), d1.shape[0]),
        pi2=perm_from_json(_require(obj, "pi2"), d1.shape[0]),
        birkhoff_d1=birkhoff_from_json(_require(obj, "birkhoff_d1")),
        birkhoff_t=birkhoff_from_json(_require(obj, "birkhoff_t")),
        ratio_t=complex_from_json(_require(obj, "ratio_t")))


def params_to_json(params, alpha=None) -> dict:
    out = {"d": params.d, "gamma": params.gamma, "lambda1": params.lambda1, "c": params.c,
           "phi": [complex_to_json(z) for z in params.phi],
           "psi": [complex_to_json(z) for z in params.psi]}
    if alpha is not None:
        out["alpha"] = [float(a) for a in alpha]
    return out


def params_from_json(obj):
    """Returns ``(DistillationParams, alpha_or_None)``."""
    from .distill import DistillationParams

    try:
        d = _require(obj, "d")
        params = DistillationParams(
            d=d, gamma=float(_require(obj, "gamma")), lambda1=float(_require(obj, "lambda1")),
            c=float(_require(obj, "c")), phi=_complex_vector(_require(obj, "phi")),
            psi=_complex_vector(_require(obj, "psi")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad distillation parameters: {exc}") from exc
    alpha = obj.get("alpha")
    if alpha is not None:
        alpha = probs_from_json(alpha, validate=False)
    return params, alpha
