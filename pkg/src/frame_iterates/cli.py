"""Command-line front end.

Exit codes: 0 success, 1 usage or data error, 2 a theorem check failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import serialize as ser
from .duality import (canonical_dual, dual_from_h0, dual_operator_uniqueness, intertwining_check,
                      probe_set, toeplitz_unitarity_check)
from .errors import ContractViolation, FrameIteratesError, NotApplicable
from .frames import frame_bounds, kernel_basis, kernel_cut, shift_invariance_defect
from .generators import GeneratorSpec, generate
from .iteration import boundedness_ladder, norm_bounds_check, represent_by_iteration
from .numerics import DEFAULT_TOL, Tolerances
from .perturbation import check_representability_transfer, measure_perturbation
from .reproduce import REGISTRY, reproduce

COMMANDS = ("generate", "analyze", "represent", "dual", "perturb", "ladder", "reproduce")
EXIT_OK, EXIT_USAGE, EXIT_CONTRACT = 0, 1, 2


class UsageError(Exception):
    pass


def _windows(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        ws = [int(x) for x in text]
    else:
        try:
            ws = [int(x) for x in str(text).split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"--windows expects comma-separated integers, got {text!r}") from None
    if any(b <= a for a, b in zip(ws, ws[1:])):
        raise UsageError("--windows must be strictly ascending")
    return ws


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frame-iterates",
                                description="Finite-window analysis of iterated frame families.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("name", nargs="?", help="example name for 'reproduce'")
    p.add_argument("--spec", help="generator spec: JSON file or inline JSON")
    p.add_argument("--input", help="family file (.json or .csv)")
    p.add_argument("--perturbed", help="second family file for 'perturb'")
    p.add_argument("--output", help="output path (default stdout)")
    p.add_argument("--windows", help="ladder windows, e.g. 8,16,32,64")
    p.add_argument("--eta", type=float, help="edge-mass trust threshold")
    p.add_argument("--edge-width", type=int, help="edge width w")
    p.add_argument("--tau-scale", type=float, help="multiplier of the rank tolerance")
    p.add_argument("--seed", type=int, help="seed for probes and random h0")
    p.add_argument("--format", choices=("json", "csv"), help="output format")
    p.add_argument("--config", help="JSON config file; explicit flags take precedence")
    p.add_argument("--c", type=float, help="translation for sinc-perturb")
    p.add_argument("--alpha", type=float, help="alpha for mu-independence")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
    out = dict(cfg)
    for key, val in vars(args).items():
        if val is not None:
            out[key.replace("-", "_")] = val
    out.setdefault("seed", 0)
    out.setdefault("format", "json")
    return out


def tolerances(cfg: dict) -> Tolerances:
    try:
        return DEFAULT_TOL.with_overrides(eta=cfg.get("eta"), edge_width=cfg.get("edge_width"),
                                          tau_scale=cfg.get("tau_scale"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _spec(cfg) -> GeneratorSpec:
    raw = cfg.get("spec")
    if raw is None:
        raise UsageError("this command needs --spec")
    if isinstance(raw, dict):
        return GeneratorSpec.from_dict(raw)
    text = raw.strip()
    if not text.startswith("{"):
        try:
            text = Path(raw).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read spec {raw}: {exc}") from None
    try:
        return GeneratorSpec.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec is not valid JSON: {exc}") from None


def _family(cfg, key="input"):
    path = cfg.get(key)
    if path is None:
        raise UsageError(f"this command needs --{key}")
    try:
        return ser.read_family(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_generate(cfg, tol):
    spec = _spec(cfg)
    fam = generate(spec)
    if cfg["format"] == "csv":
        return ser.family_to_csv(fam)
    d = ser.family_to_dict(fam)
    d["generator"] = spec.as_dict()
    return ser.dumps(d)


def cmd_analyze(cfg, tol):
    fam = _family(cfg)
    diag = frame_bounds(fam, tol)
    ker = kernel_basis(fam, None, tol)
    proxy = kernel_basis(fam, kernel_cut(fam, tol), tol)
    dr = shift_invariance_defect(ker, "right", tol)
    dl = shift_invariance_defect(ker, "left", tol)
    body = {"family": {"label": fam.label, "ambient_dim": fam.ambient_dim, "k_min": fam.k_min,
                       "k_max": fam.k_max, "periodic": fam.periodic},
            "diagnostics": diag.as_dict(), "kernel_dim": ker.dim,
            "kernel_proxy_dim": proxy.dim,
            "defect_right": dr.defect, "trusted_right": dr.trusted,
            "defect_left": dl.defect, "trusted_left": dl.trusted}
    return ser.dumps(ser.envelope("analyze", body, tol, cfg["seed"]))


def cmd_represent(cfg, tol):
    fam = _family(cfg)
    rep = represent_by_iteration(fam, tol, strict=False)
    body = {"representation": rep.as_dict()}
    if rep.representable:
        body["norm_bounds"] = norm_bounds_check(rep, None, False, tol)
        body["intertwining"] = intertwining_check(fam, rep, tol, bounded_stable=False)
        body["toeplitz"] = toeplitz_unitarity_check(fam, rep, tol)
    return ser.dumps(ser.envelope("represent", body, tol, cfg["seed"]))


def cmd_dual(cfg, tol):
    fam = _family(cfg)
    rep = represent_by_iteration(fam, tol, strict=False)
    body = {"representable": rep.representable}
    cd = canonical_dual(fam, rep if rep.representable else None, tol, seed=cfg["seed"])
    body["canonical"] = cd.as_dict()
    if rep.representable and rep.invertible_on_span:
        q = rep.span_basis
        rng = np.random.default_rng(cfg["seed"])
        h0 = q @ (rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1]))
        d = dual_from_h0(fam, rep, h0, tol, seed=cfg["seed"])
        try:
            dual_operator_uniqueness(fam, rep, d, tol)
        except NotApplicable as exc:
            d.notes.append(str(exc))
        body["h0_dual"] = d.as_dict()
        body["probe_count"] = int(probe_set(fam, cfg["seed"], tol).shape[1])
    return ser.dumps(ser.envelope("dual", body, tol, cfg["seed"]))


def cmd_perturb(cfg, tol):
    f = _family(cfg)
    g = _family(cfg, "perturbed")
    v = measure_perturbation(f, g, tol)
    body = {"verdict": v.as_dict()}
    if v.cond_l1l2:
        body["transfer"] = check_representability_transfer(f, g, v, tol)
    return ser.dumps(ser.envelope("perturb", body, tol, cfg["seed"]))


def cmd_ladder(cfg, tol):
    spec = _spec(cfg)
    ws = _windows(cfg.get("windows")) or [8, 16, 32, 64]
    lad = boundedness_ladder(spec, ws, tol)
    if cfg["format"] == "csv":
        return ser.ladder_csv(lad)
    return ser.dumps(ser.envelope("ladder", {"generator": spec.as_dict(), **lad.as_dict()},
                                  tol, cfg["seed"]))


def cmd_reproduce(cfg, tol):
    name = cfg.get("name")
    if name not in REGISTRY:
        raise UsageError(f"reproduce needs one of: {', '.join(sorted(REGISTRY))}")
    opts = {}
    if name == "sinc-perturb" and cfg.get("c") is not None:
        opts["c"] = cfg["c"]
    if name == "mu-independence" and cfg.get("alpha") is not None:
        opts["alphas"] = (cfg["alpha"],)
    ws = _windows(cfg.get("windows"))
    if ws and name in ("gabor-unbounded", "interleaved-unbounded", "extension-noninjective",
                       "sinc-perturb"):
        opts["windows"] = tuple(ws)
    report = reproduce(name, tol, cfg["seed"], raise_on_fail=False, **opts)
    text = ser.dumps(ser.envelope("reproduce", report, tol, cfg["seed"]))
    if not report["ok"]:
        failed = [k for k, v in report["checks"].items() if not v]
        raise ContractViolation(f"{name}: failed checks {failed}", {"text": text})
    return text


HANDLERS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "represent": cmd_represent,
    "dual": cmd_dual,
    "perturb": cmd_perturb,
    "ladder": cmd_ladder,
    "reproduce": cmd_reproduce,
}


def _emit(text: str, cfg):
    if cfg.get("output"):
        ser.atomic_write(cfg["output"], text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    tol = DEFAULT_TOL
    try:
        cfg = resolve_config(args)
        tol = tolerances(cfg)
        _emit(HANDLERS[cfg["command"]](cfg, tol), cfg)
        return EXIT_OK
    except ContractViolation as exc:
        text = exc.details.get("text") if isinstance(exc.details, dict) else None
        if text is None:
            text = ser.dumps(ser.envelope(args.command, {"ok": False, "error": str(exc),
                                                         "details": exc.details}, tol))
        _emit(text, vars(args))
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (UsageError, FrameIteratesError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
