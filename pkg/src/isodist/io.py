"""JSON and CSV formats for states, spectra, Hamiltonians, curves and reports.

Complex matrices are written row-major as ``[[[re, im], ...], ...]``. A state
file is ``{"n": n, "matrix": ...}``; a Hamiltonian file adds
``"hermitian": true``; a purification file adds ``"sigma": [...]``. NaN and
infinities are rejected on input.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .dynamics import LiftedCurve
from .errors import InvalidStateError
from .states import Spectrum, check_density, check_hermitian


def _reject_constant(name):
    raise InvalidStateError(f"non-finite number {name} in input")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InvalidStateError(f"malformed JSON: {exc}") from exc


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(data, shape: tuple[int, int] | None = None) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidStateError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InvalidStateError(f"matrix must be a nested list of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("matrix has non-finite entries")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and out.shape != shape:
        raise InvalidStateError(f"matrix shape {out.shape} does not match declared {shape}")
    return out


def _square_from_doc(doc: dict) -> np.ndarray:
    if not isinstance(doc, dict) or "matrix" not in doc or "n" not in doc:
        raise InvalidStateError('expected an object with keys "n" and "matrix"')
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise InvalidStateError(f'"n" must be a positive integer, got {n!r}')
    return matrix_from_json(doc["matrix"], (n, n))


def state_to_json(rho) -> dict:
    rho = np.asarray(rho)
    return {"n": int(rho.shape[0]), "matrix": matrix_to_json(rho)}


def state_from_json(doc) -> np.ndarray:
    return check_density(_square_from_doc(doc))


def hamiltonian_to_json(h) -> dict:
    return {**state_to_json(h), "hermitian": True}


def hamiltonian_from_json(doc) -> np.ndarray:
    if doc.get("hermitian") is False:
        raise InvalidStateError("Hamiltonian file declares hermitian: false")
    return check_hermitian(_square_from_doc(doc))


def spectrum_to_json(sigma: Spectrum) -> dict:
    return {"values": list(sigma.values)}


def spectrum_from_json(doc) -> Spectrum:
    if not isinstance(doc, dict) or "values" not in doc:
        raise InvalidStateError('expected an object with key "values"')
    return Spectrum(tuple(float(v) for v in doc["values"]))


def purification_to_json(psi, sigma: Spectrum) -> dict:
    psi = np.asarray(psi)
    return {"n": int(psi.shape[0]), "k": int(psi.shape[1]), "matrix": matrix_to_json(psi), "sigma": list(sigma.values)}


def purification_from_json(doc) -> tuple[np.ndarray, Spectrum]:
    from .bundle import check_purification

    sigma = Spectrum(tuple(doc["sigma"]))
    psi = matrix_from_json(doc["matrix"], (doc["n"], doc["k"]))
    return check_purification(psi, sigma), sigma


def curve_to_json(curve: LiftedCurve) -> dict:
    g = curve.grid
    return {
        "grid": {"t_start": g.t_start, "t_end": g.t_end, "n_steps": g.n_steps},
        "sigma": list(curve.sigma.values),
        "matrices": [matrix_to_json(p) for p in curve.points],
    }


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidStateError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def read_state(path) -> np.ndarray:
    return state_from_json(read_json(path))


def read_hamiltonian(path) -> np.ndarray:
    return hamiltonian_from_json(read_json(path))


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n")


UNCERTAINTY_HEADER = ("t", "uncertainty")
ENERGY_TRACE_HEADER = ("level", "sweep", "energy", "length")


def write_csv(path_or_file, header, rows) -> None:
    if hasattr(path_or_file, "write"):
        w = csv.writer(path_or_file, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(fh, header, rows)
