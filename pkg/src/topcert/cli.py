"""Command-line front end: batch analyses driven by a molecule config file.

Commands
--------
spectrum         eigenvalues of every level j <= jmax (CSV + JSON)
dipole           control-operator blocks, norms, and a selection-rule audit
symmetry         dipole classification and invariance certificates
controllability  per-block Lie certificates and the overall verdict
scan             asymmetry-grid resonance report
classical        sim | rank | det subcommands for the rigid-body system
oracle           quadrature cross-check of the tabulated dipole elements

Exit codes: 0 success, 1 usage error, 2 precondition error, 3 numeric
error, 4 resonance-obstructed certificate.  Reports are deterministic for
fixed config and flags up to the timestamp field.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .basis import WignerIndex
from .classical import (
    QuaternionState,
    determinant_pair,
    rank_at,
    simulate,
)
from .dipole import DipoleMoment, build_control_blocks, wigner_element
from .galerkin import controllability_verdict, pick_convention, resonance_scan
from .rotor import RotationalConstants, SphericalTopError, asymmetry_params, diagonalize_block
from .so3 import OBLATE, oracle_element, quadrature_grid
from .symmetry import Family, classify_dipole, invariance_certificate

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_NUMERIC = 3
EXIT_RESONANT = 4

DEFAULT_TOLERANCES = {
    "tol_res": 1e-9,
    "tol_svd": 1e-8,
    "rank_tol": 1e-10,
    "degeneracy": 1e-9,
    "axis_tol": 1e-12,
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None, overrides: argparse.Namespace) -> dict:
    """Read the declarative molecule config and apply flag overrides.

    The file is JSON with keys: name, A, B, C, dipole (3 numbers), and the
    optional jmax, mu_grid, seed, units, tolerances (nested table).
    Constants are sorted to A >= B >= C if needed, relabelling the dipole
    axes alongside; the report records the applied permutation.
    """
    cfg: dict = {}
    if path is not None:
        with open(path) as fh:
            cfg = json.load(fh)
    cfg.setdefault("name", "molecule")
    cfg.setdefault("units", "energy units with hbar = 1")
    cfg.setdefault("jmax", 1)
    cfg.setdefault("mu_grid", 11)
    cfg.setdefault("seed", 0)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    cfg["tolerances"] = tol
    for key in ("jmax", "mu_grid"):
        val = getattr(overrides, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    if getattr(overrides, "tol_res", None) is not None:
        cfg["tolerances"]["tol_res"] = overrides.tol_res
    missing = [k for k in ("A", "B", "C", "dipole") if k not in cfg]
    if missing:
        raise ConfigError(f"config is missing keys: {', '.join(missing)}")
    consts = [float(cfg["A"]), float(cfg["B"]), float(cfg["C"])]
    dip = [float(x) for x in cfg["dipole"]]
    if len(dip) != 3:
        raise ConfigError("dipole must have three components")
    order = sorted(range(3), key=lambda i: -consts[i])
    cfg["axis_permutation"] = order
    cfg["A"], cfg["B"], cfg["C"] = (consts[i] for i in order)
    cfg["dipole"] = [dip[i] for i in order]
    return cfg


def molecule(cfg: dict) -> tuple[RotationalConstants, DipoleMoment]:
    rc = RotationalConstants(cfg["A"], cfg["B"], cfg["C"])
    d = cfg["dipole"]
    return rc, DipoleMoment(d[0], d[1], d[2])


def _to_plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _to_plain(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, (Family,)):
        return obj.value
    return obj


def write_report(out_dir: Path, command: str, cfg: dict, payload: dict,
                 started: float, fmt: str = "json") -> Path:
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "input": {k: cfg[k] for k in
                  ("name", "units", "A", "B", "C", "dipole", "jmax", "mu_grid",
                   "axis_permutation", "seed")},
        "tolerances": cfg["tolerances"],
        "elapsed_seconds": round(time.time() - started, 6),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "result": _to_plain(payload),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{command.replace(' ', '_')}.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, _ = molecule(cfg)
    jmax = int(cfg["jmax"])
    rows = []
    payload = {"levels": []}
    for j in range(jmax + 1):
        spec = diagonalize_block(j, rc)
        payload["levels"].append({
            "j": j,
            "energies": spec.energies,
            "labels": list(spec.labels),
            "m_degeneracy": 2 * j + 1,
        })
        for (e, (k, p)) in zip(spec.energies, spec.labels):
            rows.append([j, k, p, repr(float(e)), 2 * j + 1])
    mu = asymmetry_params(rc)
    payload["asymmetry"] = {"mu_oblate": mu.mu_oblate, "mu_prolate": mu.mu_prolate}
    if fmt in ("csv", "both"):
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "spectrum.csv", ["j", "k", "p", "energy", "m_degeneracy"], rows)
    if fmt in ("json", "both"):
        write_report(out, "spectrum", cfg, payload, started)
    return EXIT_OK


def cmd_dipole(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    jmax = int(cfg["jmax"])
    convention = pick_convention(delta, cfg["tolerances"]["axis_tol"])
    payload = {"convention": convention, "blocks": []}
    for j in range(jmax + 1):
        block = build_control_blocks(j, delta, convention, target_rep="wang")
        herm = [float(np.max(np.abs(M + M.conj().T))) for M in block.matrices]
        norms = [float(np.linalg.norm(M)) for M in block.matrices]
        payload["blocks"].append({
            "j": j,
            "dimension": block.dimension,
            "operator_norms": norms,
            "skew_hermiticity_defect": herm,
        })
    # selection-rule audit on the lowest levels
    viol = 0
    checked = 0
    for j in range(min(jmax, 2) + 1):
        for j2 in range(min(jmax, 2) + 1):
            for k in range(-j, j + 1):
                for m in range(-j, j + 1):
                    for k2 in range(-j2, j2 + 1):
                        for m2 in range(-j2, j2 + 1):
                            if abs(j - j2) <= 1 and abs(k - k2) <= 1 and abs(m - m2) <= 1:
                                continue
                            checked += 1
                            for l in (1, 2, 3):
                                v = wigner_element(l, WignerIndex(j, k, m),
                                                   WignerIndex(j2, k2, m2), delta, convention)
                                if v != 0.0:
                                    viol += 1
    payload["selection_rule_audit"] = {"pairs_checked": checked, "violations": viol}
    if fmt in ("json", "both"):
        write_report(out, "dipole", cfg, payload, started)
    return EXIT_OK if viol == 0 else EXIT_NUMERIC


def cmd_symmetry(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    jmax = max(int(cfg["jmax"]), 1)
    cls = classify_dipole(delta, cfg["tolerances"]["axis_tol"])
    payload = {
        "dipole_class": cls.kind.value,
        "obstruction_family": cls.obstruction.value if cls.obstruction else None,
        "classification_tolerance": cfg["tolerances"]["axis_tol"],
        "families": {},
    }
    for fam in Family:
        rep = invariance_certificate(delta, fam, jmax, rc)
        worst = rep.worst()
        payload["families"][fam.value] = {
            "max_cross_norm": rep.max_norm,
            "invariant_at_1e-10": rep.max_norm < 1e-10,
            "worst_entry": None if worst is None else {
                "operator": worst.operator, "levels": list(worst.levels),
                "norm": worst.norm},
        }
    if fmt in ("json", "both"):
        write_report(out, "symmetry", cfg, payload, started)
    return EXIT_OK


def cmd_controllability(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    verdict = controllability_verdict(rc, delta, int(cfg["jmax"]),
                                      tol_res=cfg["tolerances"]["tol_res"],
                                      rank_tol=cfg["tolerances"]["rank_tol"])
    payload = {
        "verdict": verdict.status,
        "dipole_class": verdict.dipole_class,
        "obstruction_family": verdict.obstruction,
        "convention": verdict.convention,
        "graph_connected": verdict.graph_connected,
        "horizon_levels": verdict.horizon,
        "blocks": verdict.blocks,
        "resonances": verdict.resonances,
        "notes": verdict.notes,
    }
    if fmt in ("json", "both"):
        write_report(out, "controllability", cfg, payload, started)
    if verdict.status in ("resonant", "inconclusive"):
        return EXIT_RESONANT
    return EXIT_OK


def cmd_scan(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    npts = int(cfg["mu_grid"])
    grid = np.linspace(-1.0, 0.0, npts)
    convention = pick_convention(delta, cfg["tolerances"]["axis_tol"])
    flags = resonance_scan(rc, convention, int(cfg["jmax"]), grid,
                           tol_res=cfg["tolerances"]["tol_res"])
    mu_self = None
    try:
        ap = asymmetry_params(rc)
        mu_self = ap.mu_oblate if convention == OBLATE else ap.mu_prolate
    except SphericalTopError:
        pass
    flagged_mu = sorted({f.mu for f in flags})
    payload = {
        "convention": convention,
        "grid": grid,
        "molecule_mu": mu_self,
        "violations": flags,
        "flagged_mu": flagged_mu,
        "clean_points": int(npts - len(flagged_mu)),
    }
    if fmt in ("csv", "both"):
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "scan.csv",
                   ["mu", "block_j", "condition", "gap", "gap_value", "other_value"],
                   [[f.mu, f.j, f.condition, f.gap, repr(f.gap_value), repr(f.other_value)]
                    for f in flags])
    if fmt in ("json", "both"):
        write_report(out, "scan", cfg, payload, started)
    molecule_flagged = mu_self is not None and any(
        abs(f.mu - mu_self) < 1e-12 for f in flags)
    return EXIT_RESONANT if molecule_flagged else EXIT_OK


def cmd_classical(cfg: dict, sub: str, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    d = delta.as_array()
    rng = np.random.default_rng(int(cfg["seed"]))
    if sub == "sim":
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        st = QuaternionState(q, rng.normal(size=3))
        traj = simulate(st, None, rc, d, T=float(cfg.get("T", 10.0)),
                        dt=float(cfg.get("dt", 1e-3)))
        p2, en = traj["momentum_norm2"], traj["energy"]
        payload = {
            "steps": int(traj["times"].size - 1),
            "momentum_norm2_drift": float(np.max(np.abs(p2 - p2[0])) / max(p2[0], 1e-300)),
            "energy_drift": float(np.max(np.abs(en - en[0])) / max(abs(en[0]), 1e-300)),
            "final_state": traj["states"][-1],
        }
        if fmt in ("csv", "both"):
            out.mkdir(parents=True, exist_ok=True)
            sel = np.linspace(0, traj["times"].size - 1, min(1001, traj["times"].size)).astype(int)
            _write_csv(out / "classical_sim.csv",
                       ["t", "q0", "qa", "qb", "qc", "Pa", "Pb", "Pc"],
                       [[traj["times"][i], *traj["states"][i]] for i in sel])
    elif sub == "rank":
        samples = int(cfg.get("samples", 50))
        ranks = []
        for _ in range(samples):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            st = QuaternionState(q, rng.normal(size=3))
            ranks.append(rank_at(st, d, rc, tol_svd=cfg["tolerances"]["tol_svd"]))
        payload = {"samples": samples,
                   "rank_histogram": {str(r): ranks.count(r) for r in sorted(set(ranks))},
                   "full_rank_fraction": float(sum(r == 6 for r in ranks)) / samples}
    elif sub == "det":
        samples = int(cfg.get("samples", 100))
        rels = []
        for _ in range(samples):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            st = QuaternionState(q, rng.normal(size=3))
            num, cf = determinant_pair(st, d, rc)
            rels.append(abs(num - cf) / max(abs(cf), 1e-300))
        payload = {"samples": samples,
                   "max_relative_mismatch": float(np.max(rels)),
                   "median_relative_mismatch": float(np.median(rels))}
    else:
        raise ConfigError(f"unknown classical subcommand {sub!r}")
    if fmt in ("json", "both"):
        write_report(out, f"classical {sub}", cfg, payload, started)
    return EXIT_OK


def cmd_oracle(cfg: dict, out: Path, fmt: str, started: float) -> int:
    rc, delta = molecule(cfg)
    jmax = min(int(cfg["jmax"]), 3)
    convention = pick_convention(delta, cfg["tolerances"]["axis_tol"])
    grid = quadrature_grid(jmax)
    rng = np.random.default_rng(int(cfg["seed"]))
    states = [WignerIndex(j, k, m) for j in range(jmax + 1)
              for k in range(-j, j + 1) for m in range(-j, j + 1)]
    worst = 0.0
    checked = 0
    for _ in range(int(cfg.get("samples", 400))):
        bra = states[rng.integers(len(states))]
        ket = states[rng.integers(len(states))]
        l = int(rng.integers(1, 4))
        table = wigner_element(l, bra, ket, delta, convention)
        quad = oracle_element(l, bra, ket, delta.as_array(), convention, grid)
        worst = max(worst, abs(table - (-1j) * quad))
        checked += 1
    payload = {"jmax": jmax, "elements_checked": checked,
               "max_abs_mismatch": worst, "tolerance": 1e-8, "pass": worst < 1e-8}
    if fmt in ("json", "both"):
        write_report(out, "oracle", cfg, payload, started)
    return EXIT_OK if worst < 1e-8 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="topcert", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="path to the molecule config (JSON)")
    ap.add_argument("--jmax", type=int, default=None)
    ap.add_argument("--mu-grid", type=int, default=None, dest="mu_grid")
    ap.add_argument("--tol-res", type=float, default=None, dest="tol_res")
    ap.add_argument("--out", default="reports", help="output directory")
    ap.add_argument("--format", choices=("json", "csv", "both"), default="json")
    sub = ap.add_subparsers(dest="command")
    for name in ("spectrum", "dipole", "symmetry", "controllability", "scan", "oracle"):
        sub.add_parser(name)
    cl = sub.add_parser("classical")
    cl.add_argument("classical_sub", choices=("sim", "rank", "det"))
    return ap


def main(argv=None) -> int:
    started = time.time()
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config, args)
        rc, delta = molecule(cfg)  # validate early
        if delta.norm == 0.0 and args.command in ("symmetry", "controllability", "oracle"):
            raise ConfigError("zero dipole: nothing to classify")
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, (ConfigError, OSError, json.JSONDecodeError)) \
            else EXIT_PRECONDITION
    out = Path(args.out)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out, args.format, started)
        if args.command == "dipole":
            return cmd_dipole(cfg, out, args.format, started)
        if args.command == "symmetry":
            return cmd_symmetry(cfg, out, args.format, started)
        if args.command == "controllability":
            return cmd_controllability(cfg, out, args.format, started)
        if args.command == "scan":
            return cmd_scan(cfg, out, args.format, started)
        if args.command == "classical":
            return cmd_classical(cfg, args.classical_sub, out, args.format, started)
        if args.command == "oracle":
            return cmd_oracle(cfg, out, args.format, started)
    except SphericalTopError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"error: unknown command {args.command!r}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
