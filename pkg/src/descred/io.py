"""JSON formats for systems, reductions and reports.

System files (``schema_version "1"``) hold plain numbers: each matrix entry
is a real number or a ``[re, im]`` pair.  Reduction files store every
floating-point value as a pair of hex-float strings (``float.hex``) so that
they round-trip bit for bit; a decimal mirror sits next to each matrix for
people reading the file.
"""
import hashlib
import json
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from descred.errors import ParseError, SchemaError
from descred.model import DescriptorSystem, IndexReport
from descred.qw import QuasiWeierstrass
from descred.reduction import ReducedSystem, StandardSystem
from descred.switching import SwitchedDescriptorSystem, SwitchedReduction

SCHEMA_VERSION = "1"

try:
    TOOL_VERSION = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    TOOL_VERSION = "0.1.0"


# System files ---------------------------------------------------------------


def _entry(v, where):
    if isinstance(v, bool):
        raise SchemaError(f"{where}: booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in v
    ):
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"{where}: entry must be a number or [re, im], got {v!r}")


def parse_matrix(rows, name, shape=None):
    """Nested list of entries to a ``complex128`` array, checking `shape`."""
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SchemaError(f"{name} must be a list of rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise SchemaError(f"{name} has rows of different lengths")
    out = np.array(
        [[_entry(v, f"{name}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)],
        dtype=np.complex128,
    ).reshape(len(rows), widths.pop() if widths else 0)
    if not np.all(np.isfinite(out)):
        raise SchemaError(f"{name} has non-finite entries")
    if shape is not None and out.shape != shape:
        raise SchemaError(f"{name} has shape {out.shape}, expected {shape}")
    return out


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _require_int(doc, key):
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise SchemaError(f"'{key}' must be a nonnegative integer")
    return v


def system_from_dict(doc):
    """Validate a parsed system file and build the system it describes."""
    if not isinstance(doc, dict):
        raise SchemaError("system file must hold a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    n = _require_int(doc, "n")
    m = _require_int(doc, "m") if "m" in doc else 0
    if n < 1:
        raise SchemaError("'n' must be at least 1")
    has_pair = "E" in doc or "A" in doc
    if has_pair == ("modes" in doc):
        raise SchemaError("give either E and A at top level or a 'modes' list, not both")
    if "modes" in doc:
        modes = doc["modes"]
        if not isinstance(modes, list) or not modes:
            raise SchemaError("'modes' must be a nonempty list")
        if m or "B" in doc:
            raise SchemaError("switched systems take no input")
        systems = []
        for i, mode in enumerate(modes):
            if not isinstance(mode, dict) or set(mode) - {"E", "A"} or len(mode) != 2:
                raise SchemaError(f"mode {i} must be an object with exactly E and A")
            systems.append(
                DescriptorSystem(
                    parse_matrix(mode["E"], f"modes[{i}].E", (n, n)),
                    parse_matrix(mode["A"], f"modes[{i}].A", (n, n)),
                )
            )
        lam = doc.get("lambda")
        return SwitchedDescriptorSystem(systems, None if lam is None else _entry(lam, "lambda"))
    if "E" not in doc or "A" not in doc:
        raise SchemaError("both E and A are required")
    E = parse_matrix(doc["E"], "E", (n, n))
    A = parse_matrix(doc["A"], "A", (n, n))
    B = None
    if "B" in doc and doc["B"] is not None:
        B = parse_matrix(doc["B"], "B", (n, m))
    elif m:
        raise SchemaError(f"m = {m} but no B given")
    return DescriptorSystem(E, A, B)


def parse_system_file(path):
    """Read a system file: a :class:`DescriptorSystem` or a :class:`SwitchedDescriptorSystem`."""
    return system_from_dict(load_json(path))


def _plain(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def system_to_dict(sys):
    def mat(M):
        return [[_plain(v) for v in row] for row in M]

    if isinstance(sys, SwitchedDescriptorSystem):
        doc = {"schema_version": SCHEMA_VERSION, "n": sys.n, "m": 0,
               "modes": [{"E": mat(s.E), "A": mat(s.A)} for s in sys.modes]}
        if sys.lam is not None:
            doc["lambda"] = _plain(sys.lam)
        return doc
    doc = {"schema_version": SCHEMA_VERSION, "n": sys.n, "m": sys.m, "E": mat(sys.E), "A": mat(sys.A)}
    if sys.B is not None:
        doc["B"] = mat(sys.B)
    return doc


def file_sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# Bit-exact encoding ------------------------------------------------------------


def encode_scalar(z):
    z = complex(z)
    return {"hex": [z.real.hex(), z.imag.hex()], "decimal": [z.real, z.imag]}


def decode_scalar(d):
    try:
        re, im = d["hex"]
        return complex(float.fromhex(re), float.fromhex(im))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad encoded scalar {d!r}") from exc


def encode_matrix(M):
    M = np.asarray(M, dtype=np.complex128)
    rows, cols = M.shape
    return {
        "rows": rows,
        "cols": cols,
        "hex": [[v.real.hex(), v.imag.hex()] for v in M.ravel().tolist()],
        "decimal": [[_plain(v) for v in row] for row in M.tolist()],
    }


def decode_matrix(d):
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        vals = [complex(float.fromhex(re), float.fromhex(im)) for re, im in d["hex"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad encoded matrix: {exc}") from exc
    if len(vals) != rows * cols:
        raise SchemaError(f"encoded matrix has {len(vals)} entries, expected {rows * cols}")
    return np.array(vals, dtype=np.complex128).reshape(rows, cols)


# Reduction files ------------------------------------------------------------


def reduction_to_dict(obj, provenance=None):
    """Serialize a reduction result as a ReductionFile document."""
    if isinstance(obj, ReducedSystem):
        kind = "reduced"
        mats = {"F_tilde": obj.F_tilde, "lift": obj.lift, "proj": obj.proj}
        meta = {"k": obj.k_used, "index": obj.index, "side": obj.side}
    elif isinstance(obj, StandardSystem):
        kind = "standard"
        mats = {"A_tilde": obj.A_tilde, "lift": obj.lift, "proj": obj.proj}
        meta = {"index": 0, "side": obj.side}
    elif isinstance(obj, QuasiWeierstrass):
        kind = "qw"
        mats = {
            name: getattr(obj, name)
            for name in ("A_tilde", "B1_tilde", "N_tilde", "B2_tilde", "lift1", "lift2", "proj1", "proj2")
        }
        meta = {"k": obj.k_nilpotent}
    elif isinstance(obj, SwitchedReduction):
        kind = "switched"
        mats = {"X": obj.X}
        mats.update({f"F_tilde_{i}": F for i, F in enumerate(obj.F_tilde_list)})
        meta = {"k_list": list(obj.k_list), "modes": len(obj.F_tilde_list)}
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "lambda": encode_scalar(obj.lam),
        "matrices": {name: encode_matrix(M) for name, M in mats.items()},
    }
    doc.update(meta)
    doc["provenance"] = dict(provenance or {})
    return doc


def reduction_from_dict(doc):
    """Inverse of :func:`reduction_to_dict`; provenance is not part of the result."""
    try:
        kind = doc["kind"]
        lam = decode_scalar(doc["lambda"])
        mats = {name: decode_matrix(d) for name, d in doc["matrices"].items()}
        if kind == "reduced":
            return ReducedSystem(mats["F_tilde"], lam, mats["lift"], mats["proj"],
                                 int(doc["k"]), int(doc["index"]), doc["side"])
        if kind == "standard":
            return StandardSystem(mats["A_tilde"], mats["lift"], mats["proj"], lam, doc["side"])
        if kind == "qw":
            return QuasiWeierstrass(
                A_tilde=mats["A_tilde"], B1_tilde=mats["B1_tilde"], N_tilde=mats["N_tilde"],
                B2_tilde=mats["B2_tilde"], lift1=mats["lift1"], lift2=mats["lift2"],
                proj1=mats["proj1"], proj2=mats["proj2"], k_nilpotent=int(doc["k"]), lam=lam,
            )
        if kind == "switched":
            count = int(doc["modes"])
            return SwitchedReduction(
                X=mats["X"],
                F_tilde_list=[mats[f"F_tilde_{i}"] for i in range(count)],
                k_list=[int(k) for k in doc["k_list"]],
                lam=lam,
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed reduction file: {exc!r}") from exc
    raise SchemaError(f"unknown reduction kind {kind!r}")


def parse_reduction_file(path):
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise SchemaError("reduction file must hold a JSON object")
    return reduction_from_dict(doc), doc.get("provenance", {})


# Reports -------------------------------------------------------------------------


def index_report_to_dict(rep):
    return {
        "regular": rep.is_regular,
        "lambda": encode_scalar(rep.lambda_used),
        "index": rep.k_star,
        "rank_sequence": list(rep.rank_sequence),
        "consistency_dim": rep.consistency_dim,
        "pure": rep.is_pure,
        "cond_estimate": float(rep.cond_estimate).hex(),
    }


def index_report_from_dict(d):
    try:
        return IndexReport(
            k_star=int(d["index"]),
            rank_sequence=[int(r) for r in d["rank_sequence"]],
            consistency_dim=int(d["consistency_dim"]),
            is_pure=bool(d["pure"]),
            is_regular=bool(d["regular"]),
            lambda_used=decode_scalar(d["lambda"]),
            cond_estimate=float.fromhex(d["cond_estimate"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed index report: {exc!r}") from exc


def dumps(doc):
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
