"""Command line front end.

Every command prints a JSON report to stdout (and to ``--out DIR/report.json``
when given).  Exit codes: 0 analysis completed, 2 invalid input, 3
numerical failure.  Verdicts are part of the report, never of the exit code.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import InvalidChannelError, choi_of_channel
from .core import DensityOperator, InvalidStateError, PureState, flip_operator, local_dim
from .jsonio import FormatError, channel_from_json, matrix_from_json
from .oracle import OptimizerConfig
from .schmidt import complementary_decompose, geometry_profile, norms, schmidt_decompose
from .witness import (
    UNITALITY_TOL,
    auto_bounds,
    bounds_flip,
    bounds_rank_one,
    flip_observable,
    ppt_min_eigenvalue,
    unitality_test,
    verdict,
    white_noise_threshold,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3

SURFACES = ("sphere", "octahedron", "cube", "separable-witness", "me-witness")

_CLASS_OF_METHOD = {
    "closed-form-product": "product",
    "closed-form-flip": "flip",
    "closed-form-rank-one": "rank-one",
    "numerical": "general",
}


class InputError(Exception):
    pass


def _floats(v) -> list[float]:
    return [float(x) for x in np.asarray(v, dtype=float).reshape(-1)]


def _digest(path: Path) -> dict:
    return {"name": path.name, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}


def _load_json(path: Path):
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path.name} is not valid JSON: {exc}") from None


def _load_state(path: Path) -> PureState | DensityOperator:
    m = matrix_from_json(_load_json(path))
    if 1 in m.shape:
        return PureState.from_vector(m.reshape(-1))
    return DensityOperator.from_matrix(m)


def _load_observable(path: Path) -> np.ndarray:
    m = matrix_from_json(_load_json(path))
    if m.shape[0] != m.shape[1]:
        raise InputError(f"observable must be square, got {m.shape}")
    local_dim(m.shape[0])
    return m


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=args.seed, restarts=args.restarts)


def _bounds_json(bounds) -> dict:
    return {
        **bounds.as_dict(),
        "method": bounds.method,
        "numerical_fields": list(bounds.numerical_fields),
        "spreads": {k: float(v) for k, v in bounds.spreads.items()},
    }


def _verdict_json(v) -> dict:
    return {
        "expectation": v.expectation,
        "flags": sorted(v.flags),
        "margins": {k: float(x) for k, x in v.margins.items()},
    }


def _geometry_json(sigma, tau) -> dict:
    prof = geometry_profile(sigma)
    return {
        "sigma": _floats(sigma),
        "tau": _floats(tau),
        "norms": {"l1": prof.norm1, "l2": prof.norm2, "linf": prof.norm_inf},
        "class": prof.classification,
    }


def _report(command: str, inputs: list, results: dict) -> dict:
    return {"command": command, "version": __version__, "inputs": inputs, "results": results}


def cmd_analyze_state(args) -> dict:
    path = Path(args.input)
    state = _load_state(path)
    inputs = [_digest(path)]
    if isinstance(state, PureState):
        sd = schmidt_decompose(state)
        cs = complementary_decompose(state)
        bounds = bounds_rank_one(state, _config(args))
        results = {
            "kind": "pure",
            "d": state.d,
            "geometry": _geometry_json(sd.sigma, cs.tau),
            "complementary": {"tau": _floats(cs.tau), "theta": _floats(cs.theta)},
            "bounds": _bounds_json(bounds),
            "white_noise_threshold": white_noise_threshold(state),
        }
        return _report("analyze-state", inputs, results)

    d = state.d
    dev_a, dev_b = unitality_test(state)
    if args.observable:
        obs_path = Path(args.observable)
        l = _load_observable(obs_path)
        inputs.append(_digest(obs_path))
        bounds = auto_bounds(l, _config(args))
        name = obs_path.name
    else:
        l = flip_operator(d)
        bounds = bounds_flip(np.eye(d), np.eye(d))
        name = "flip"
    results = {
        "kind": "mixed",
        "d": d,
        "unitality": {"devA": dev_a, "devB": dev_b, "ru_excluded": max(dev_a, dev_b) > args.tolerance},
        "ppt_min_eigenvalue": ppt_min_eigenvalue(state),
        "witness": {"observable": name, "bounds": _bounds_json(bounds), **_verdict_json(verdict(l, state, bounds))},
    }
    return _report("analyze-state", inputs, results)


def cmd_classify_channel(args) -> dict:
    path = Path(args.input)
    ch = channel_from_json(_load_json(path))
    inputs = [_digest(path)]
    choi = choi_of_channel(ch)
    dev_a, dev_b = unitality_test(choi.state)
    ppt = ppt_min_eigenvalue(choi.state)
    results = {
        "d": ch.d,
        "tag": ch.tag,
        "raw_trace": choi.raw_trace,
        "unitality": {"devA": dev_a, "devB": dev_b},
        "ppt_min_eigenvalue": ppt,
        "excluded": {"RU": max(dev_a, dev_b) > args.tolerance, "RP": ppt < -args.tolerance},
    }
    if args.observable:
        obs_path = Path(args.observable)
        l = _load_observable(obs_path)
        inputs.append(_digest(obs_path))
        bounds = auto_bounds(l, _config(args))
        v = verdict(l, choi.state, bounds)
        results["witness"] = {"observable": obs_path.name, "bounds": _bounds_json(bounds), **_verdict_json(v)}
        results["excluded"]["RU"] |= "not-ME-mixture" in v.flags
        results["excluded"]["RP"] |= "entangled" in v.flags
    return _report("classify-channel", inputs, results)


def cmd_witness(args) -> dict:
    inputs = []
    if args.flip_a or args.flip_b:
        if not (args.flip_a and args.flip_b and not args.observable):
            raise InputError("flip-type witnesses need both --flip-a and --flip-b and no --observable")
        pa, pb = Path(args.flip_a), Path(args.flip_b)
        a = matrix_from_json(_load_json(pa))
        b = matrix_from_json(_load_json(pb))
        inputs += [_digest(pa), _digest(pb)]
        l = flip_observable(a, b)
        bounds = bounds_flip(a, b)
    elif args.observable:
        path = Path(args.observable)
        l = _load_observable(path)
        inputs.append(_digest(path))
        bounds = auto_bounds(l, _config(args))
    else:
        raise InputError("give --observable or --flip-a/--flip-b")
    results = {"class": _CLASS_OF_METHOD[bounds.method], "bounds": _bounds_json(bounds)}
    if args.state:
        spath = Path(args.state)
        state = _load_state(spath)
        inputs.append(_digest(spath))
        rho = DensityOperator.from_pure(state) if isinstance(state, PureState) else state
        results["verdict"] = _verdict_json(verdict(l, rho, bounds))
    return _report("witness", inputs, results)


def geometry_directions(d: int, resolution: int) -> np.ndarray:
    """Unit directions covering the positive hyperoctant, one per row."""
    t = np.linspace(0, np.pi / 2, resolution)
    if d == 2:
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if d == 3:
        th, ph = np.meshgrid(t, t, indexing="ij")
        pts = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
        return pts.reshape(-1, 3)
    raise ValueError(f"surface export supports d = 2 or 3, got {d}")


def surface_radii(direction) -> dict:
    """Distance from the origin of each surface along a unit direction."""
    direction = np.asarray(direction, dtype=float)
    d = direction.size
    n1, _, ninf = norms(direction)
    return {
        "sphere": 1.0,
        "octahedron": 1 / n1,
        "cube": 1 / (math.sqrt(d) * ninf),
        "separable-witness": ninf**2,
        "me-witness": n1**2 / d,
    }


def cmd_geometry(args) -> dict:
    d, res = args.d, args.resolution
    if d < 2:
        raise InputError(f"geometry needs d >= 2, got {d}")
    if res < 2:
        raise InputError("resolution must be at least 2")
    rows = []
    if d in (2, 3):
        for direction in geometry_directions(d, res):
            for surface, r in surface_radii(direction).items():
                rows.append({**{f"sigma_{i}": float(r * x) for i, x in enumerate(direction)},
                             "radius": float(r), "surface_id": surface})
        kind = "surfaces"
    else:
        for k in range(1, d + 1):
            direction = np.r_[np.ones(k), np.zeros(d - k)] / math.sqrt(k)
            n1, n2, ninf = norms(direction)
            radii = surface_radii(direction)
            rows.append({"support": k, "l1": n1, "l2": n2, "linf": ninf,
                         "separable_witness_radius": radii["separable-witness"],
                         "me_witness_radius": radii["me-witness"]})
        kind = "norms-table"
    results = {"d": d, "resolution": res, "kind": kind, "count": len(rows)}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"geometry_d{d}.{args.format}"
        if args.format == "csv":
            with target.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        else:
            target.write_text(json.dumps(rows, indent=1), encoding="utf-8")
        results["files"] = [target.name]
    else:
        results["points"] = rows
    return _report("geometry", [], results)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="oracle seed (default 0)")
    common.add_argument("--restarts", type=int, default=32, help="oracle restarts (default 32)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="DIR", help="also write output files into DIR")
    common.add_argument("--tolerance", type=float, default=UNITALITY_TOL,
                        help="unitality / PPT tolerance (default %(default)g)")

    parser = argparse.ArgumentParser(prog="chanwit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-state", parents=[common], help="Schmidt analysis and bounds for a state")
    p.add_argument("--input", required=True, help="state file (vector or density matrix)")
    p.add_argument("--observable", help="witness for mixed states (default: flip operator)")
    p.set_defaults(func=cmd_analyze_state)

    p = sub.add_parser("classify-channel", parents=[common], help="exclude RU / RP descriptions of a channel")
    p.add_argument("--input", required=True, help="channel file")
    p.add_argument("--observable", help="optional witness evaluated on the Choi state")
    p.set_defaults(func=cmd_classify_channel)

    p = sub.add_parser("witness", parents=[common], help="witness bounds and optional verdict")
    p.add_argument("--observable", help="observable file")
    p.add_argument("--flip-a", help="matrix A of a flip-type observable")
    p.add_argument("--flip-b", help="matrix B of a flip-type observable")
    p.add_argument("--state", help="optional state to test")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("geometry", parents=[common], help="export norm-ball and witness surfaces")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--resolution", type=int, default=16)
    p.set_defaults(func=cmd_geometry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except InvalidStateError as exc:
        print(f"error: invalid state ({exc.invariant}): {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, FormatError, InvalidChannelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = json.dumps(report, indent=2)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
