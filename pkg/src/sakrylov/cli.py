"""Command-line front end: ``sakrylov <command> ...``.

Exit status is 0 on success, 1 when a check fails (or every sector of a solve
fails) and 2 for bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import WalkOperator, gate_count_report, pairing_family_hamiltonian, verify_block_encoding
from .fock import (
    FockState,
    SqHamiltonian,
    SymmetrySector,
    enumerate_sector,
    hamiltonian_from_json,
    hamiltonian_to_json,
    load_table_csv,
    write_table_csv,
)
from .krylov import KrylovConfig, compute_moments, hadamard_test_estimate, select_pivot, solve_sector_spectrum
from .nuclear import (
    ModelParams,
    build_valence_hamiltonian,
    default_params,
    f72_orbitals,
    orbital_2m,
    orbitals_from_json,
)


class InputError(Exception):
    """Bad user input; exit status 2."""


def fmt(x: float) -> str:
    return f"{x:.9g}"


def r9(x: float) -> float:
    return float(f"{x:.9g}")


# -- file helpers -------------------------------------------------------------------


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    return p


def _read_json(path) -> object:
    p = _existing(path)
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: invalid JSON ({exc})") from exc


def _guard_outputs(outputs, inputs):
    ins = {Path(p).resolve() for p in inputs if p is not None}
    for out in outputs:
        if Path(out).resolve() in ins:
            raise InputError(f"refusing to overwrite input file {out}")


def load_hamiltonian_doc(path) -> tuple[SqHamiltonian, list[int] | None]:
    """Hamiltonian from JSON or two-body table CSV, plus ``twice_m`` per orbital when recorded."""
    p = _existing(path)
    try:
        if p.suffix.lower() == ".csv":
            return load_table_csv(p), None
        doc = _read_json(p)
        h = hamiltonian_from_json(doc)
    except ValueError as exc:
        raise InputError(f"{p}: {exc}") from exc
    m2 = doc.get("twice_m") if isinstance(doc, dict) else None
    return h, (None if m2 is None else [int(v) for v in m2])


def _orbital_2m(h: SqHamiltonian, recorded, space_path) -> list[int] | None:
    if space_path is not None:
        try:
            m2 = orbital_2m(orbitals_from_json(_read_json(space_path)))
        except ValueError as exc:
            raise InputError(f"{space_path}: {exc}") from exc
    elif recorded is not None:
        m2 = recorded
    elif h.n_sp == 8:
        m2 = orbital_2m(f72_orbitals())
    else:
        return None
    if len(m2) != h.n_sp:
        raise InputError(f"valence space has {len(m2)} orbitals, Hamiltonian has {h.n_sp}")
    return m2


def _sector(args, m2) -> SymmetrySector:
    if args.twice_mj is not None and m2 is None:
        raise InputError("--twice-mj needs a valence space (--space)")
    return SymmetrySector(args.particles, args.twice_mj)


def _emit(args, payload: dict, text: str):
    if args.json:
        json.dump(payload, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- commands -----------------------------------------------------------------------


def cmd_gen_hamiltonian(args) -> int:
    space = f72_orbitals() if args.space is None else None
    if args.space is not None:
        try:
            space = orbitals_from_json(_read_json(args.space))
        except ValueError as exc:
            raise InputError(f"{args.space}: {exc}") from exc
    if args.params is None:
        params = default_params()
    else:
        doc = _read_json(args.params)
        try:
            params = ModelParams.from_dict(doc)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{args.params}: {exc}") from exc
    out = Path(args.out_dir)
    ham_path, csv_path = out / "hamiltonian.json", out / "two_body.csv"
    _guard_outputs([ham_path, csv_path], [args.space, args.params])
    out.mkdir(parents=True, exist_ok=True)
    h = build_valence_hamiltonian(space, params)
    doc = hamiltonian_to_json(h)
    doc["twice_m"] = orbital_2m(space)
    doc["params"] = params.to_dict()
    ham_path.write_text(json.dumps(doc, indent=1) + "\n")
    write_table_csv(h, csv_path)
    _emit(args, {"hamiltonian": str(ham_path), "table": str(csv_path), "n_terms": h.d, "n_sp": h.n_sp},
          f"wrote {ham_path} and {csv_path} ({h.d} terms over {h.n_sp} orbitals)")
    return 0


def cmd_verify_encoding(args) -> int:
    h, recorded = load_hamiltonian_doc(args.hamiltonian)
    m2 = _orbital_2m(h, recorded, args.space)
    reference = h
    if args.perturb:
        j, _, value = args.perturb.partition("=")
        try:
            h = h.with_coefficient(int(j), complex(value))
        except (ValueError, IndexError) as exc:
            raise InputError(f"--perturb {args.perturb}: {exc}") from exc
    if args.particles is None:
        basis = None
    else:
        basis = enumerate_sector(h.n_sp, _sector(args, m2), m2)
    walk = WalkOperator.compile(h)
    dev, where = verify_block_encoding(walk, basis, reference)
    ok = dev <= args.tol
    counts = walk.gate_counts()
    payload = {
        "status": "PASS" if ok else "FAIL",
        "max_deviation": dev,
        "at": None if where is None else [str(where[0]), str(where[1])],
        "D": h.d,
        "D_pad": h.d_pad,
        "lambda": r9(h.lam),
        "qubits": walk.layout.width,
        "layout": walk.layout.describe(),
        "gate_counts": counts,
    }
    lines = [
        f"{payload['status']}  max deviation {dev:.3e} MeV (tolerance {args.tol:g})",
        f"D = {h.d}  D_pad = {h.d_pad}  Lambda = {fmt(h.lam)}",
        f"qubits: {walk.layout.width}  {walk.layout.describe()}",
        "gates: " + "  ".join(f"{k}={v}" for k, v in counts.items()),
    ]
    if where is not None and not ok:
        lines.append(f"worst pair G={where[0]} F={where[1]}")
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def _manifest_path(base: Path, value) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _parse_manifest(path) -> dict:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: manifest must be a JSON object")
    base = Path(path).parent
    if "hamiltonian" not in doc:
        raise InputError(f"{path}: manifest lacks 'hamiltonian'")
    if "particle_number" not in doc:
        raise InputError(f"{path}: manifest lacks 'particle_number'")
    m = dict(doc)
    m["hamiltonian"] = _manifest_path(base, doc["hamiltonian"])
    m["space"] = _manifest_path(base, doc.get("space"))
    for key in ("hamiltonian", "space"):
        if m[key] is not None:
            _existing(m[key])
    m["output_dir"] = _manifest_path(base, doc.get("output_dir"))
    m.setdefault("twice_mj", [0, 4, 8, 12])
    return m


def cmd_solve(args) -> int:
    man = _parse_manifest(args.manifest)
    out = Path(args.out_dir) if args.out_dir else man["output_dir"]
    if out is None:
        raise InputError("no output directory (manifest 'output_dir' or --out-dir)")
    h, recorded = load_hamiltonian_doc(man["hamiltonian"])
    m2 = _orbital_2m(h, recorded, man["space"])
    mjs = man["twice_mj"]
    if any(m is not None for m in mjs) and m2 is None:
        raise InputError("M_J sectors need a valence space ('space' in the manifest)")
    try:
        cfg = KrylovConfig(n_krylov=man.get("n_krylov"), xi=float(man.get("xi", 1e-12)),
                           tol=float(man.get("tol", 1e-9)))
    except ValueError as exc:
        raise InputError(f"{args.manifest}: {exc}") from exc
    seed = args.seed if args.seed is not None else man.get("seed", 0)
    shots = man.get("shots")
    result_path, csv_path, timing_path = out / "result.json", out / "spectrum.csv", out / "timing.json"
    _guard_outputs([result_path, csv_path, timing_path], [args.manifest, man["hamiltonian"], man["space"]])

    t0 = time.perf_counter()
    sectors = [SymmetrySector(int(man["particle_number"]), None if m is None else int(m)) for m in mjs]
    walk = WalkOperator.compile(h)
    spectrum = solve_sector_spectrum(walk, sectors, m2, cfg, workers=args.workers)
    ok = [s for s in spectrum.sectors if s.error is None]
    e_min = min((s.lowest for s in ok), default=float("nan"))

    rng = np.random.default_rng(seed)
    rows = []
    for sec in spectrum.sectors:
        row = {
            "J": None if sec.twice_mj is None else sec.twice_mj / 2,
            "twice_mj": sec.twice_mj,
            "dimension": sec.dimension,
            "pivot": sec.pivot,
            "K": sec.n_krylov,
            "retained": sec.retained,
            "converged": sec.converged,
            "error": sec.error,
            "E_MeV": None if sec.error else r9(sec.lowest),
            "Eex_MeV": None if sec.error else r9(sec.lowest - e_min),
            "eigenvalues_MeV": [r9(e) for e in sec.energies],
            "trace": [{"K": t["K"], "lowest_MeV": r9(t["lowest"]), "retained": t["retained"]} for t in sec.trace],
            "moments": [[r9(m.real), r9(m.imag)] for m in sec.moments],
        }
        if shots and sec.error is None:
            pivot = FockState.from_string(sec.pivot)
            row["hadamard"] = []
            for k in man.get("hadamard_orders", [1, 2]):
                est = hadamard_test_estimate(walk, pivot, int(k), int(shots), rng=rng)
                row["hadamard"].append({"order": int(k), "re": r9(est.re), "im": r9(est.im),
                                        "re_se": r9(est.re_se), "im_se": r9(est.im_se)})
        rows.append(row)
    result = {
        "version": __version__,
        "n_sp": h.n_sp,
        "particle_number": int(man["particle_number"]),
        "D": h.d,
        "D_pad": h.d_pad,
        "lambda": r9(h.lam),
        "scale_MeV": r9(spectrum.scale),
        "xi": cfg.xi,
        "tol": cfg.tol,
        "seed": seed,
        "shots": shots,
        "sectors": rows,
    }
    out.mkdir(parents=True, exist_ok=True)
    result_path.write_text(json.dumps(result, indent=1, sort_keys=True) + "\n")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["J", "E_MeV", "Eex_MeV"])
        for r in rows:
            if r["error"] is None:
                w.writerow([_fmt_j(r["J"]), fmt(r["E_MeV"]), fmt(r["Eex_MeV"])])
    timing = {"total_s": time.perf_counter() - t0,
              "sectors_s": {str(s.twice_mj): s.seconds for s in spectrum.sectors}}
    timing_path.write_text(json.dumps(timing, indent=1) + "\n")

    text = io.StringIO()
    text.write(f"{'J':>4} {'E (MeV)':>14} {'Eex (MeV)':>14}  K  status\n")
    for r in rows:
        if r["error"]:
            text.write(f"{_fmt_j(r['J']):>4} {'-':>14} {'-':>14}  -  {r['error']}\n")
        else:
            flag = "ok" if r["converged"] else "unconverged"
            text.write(f"{_fmt_j(r['J']):>4} {fmt(r['E_MeV']):>14} {fmt(r['Eex_MeV']):>14} {r['K']:>2}  {flag}\n")
    text.write(f"wrote {result_path} and {csv_path}\n")
    _emit(args, result, text.getvalue())
    return 0 if ok else 1


def _fmt_j(j) -> str:
    if j is None:
        return "*"
    return str(int(j)) if float(j).is_integer() else f"{j:g}"


def cmd_gate_report(args) -> int:
    if args.hamiltonian:
        family = [load_hamiltonian_doc(p)[0] for p in args.hamiltonian]
    else:
        family = [pairing_family_hamiltonian(n) for n in (args.nsp or [])]
    if not family:
        raise InputError("empty Hamiltonian family")
    report = gate_count_report(family)
    buf = io.StringIO()
    fields = list(vars(report["rows"][0]))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in report["rows"]:
        w.writerow([getattr(r, f) for f in fields])
    if args.out:
        _guard_outputs([args.out], args.hamiltonian or [])
        Path(args.out).write_text(buf.getvalue())
    payload = {"rows": [vars(r) for r in report["rows"]],
               "fit": None if report["fit"] is None else {k: r9(v) for k, v in report["fit"].items()}}
    text = buf.getvalue()
    if report["fit"]:
        text += "".join(f"# {k} = {fmt(v)}\n" for k, v in report["fit"].items())
    _emit(args, payload, text)
    return 0


def cmd_moments(args) -> int:
    h, recorded = load_hamiltonian_doc(args.hamiltonian)
    m2 = _orbital_2m(h, recorded, args.space)
    walk = WalkOperator.compile(h)
    if args.pivot:
        try:
            pivot = FockState.from_string(args.pivot)
        except ValueError as exc:
            raise InputError(f"--pivot: {exc}") from exc
        if pivot.n_sp != h.n_sp:
            raise InputError(f"pivot has {pivot.n_sp} orbitals, Hamiltonian has {h.n_sp}")
    else:
        if args.particles is None:
            raise InputError("give --pivot or --particles")
        basis = enumerate_sector(h.n_sp, _sector(args, m2), m2)
        if not basis:
            raise InputError("sector is empty")
        pivot = select_pivot(h, basis)
    mu = compute_moments(walk, pivot, args.order + 1)
    payload = {"pivot": str(pivot), "scale_MeV": r9(h.scale),
               "moments": [[k, r9(m.real), r9(m.imag)] for k, m in enumerate(mu)]}
    lines = [f"# pivot {pivot}  scale {fmt(h.scale)} MeV", "k re im"]
    lines += [f"{k} {fmt(m.real)} {fmt(m.imag)}" for k, m in enumerate(mu)]
    if args.shots:
        rng = np.random.default_rng(args.seed)
        est = [hadamard_test_estimate(walk, pivot, k, args.shots, rng=rng) for k in range(args.order + 1)]
        payload["hadamard"] = [{"order": e.order, "re": r9(e.re), "im": r9(e.im),
                                "re_se": r9(e.re_se), "im_se": r9(e.im_se)} for e in est]
        lines.append(f"# Hadamard test, {args.shots} shots, seed {args.seed}")
        lines += [f"{e.order} {fmt(e.re)} {fmt(e.im)} +- {fmt(e.re_se)} {fmt(e.im_se)}" for e in est]
    _emit(args, payload, "\n".join(lines))
    return 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a machine-readable JSON report")
    common.add_argument("--seed", type=int, default=None, help="seed for shot sampling")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $SAKRYLOV_WORKERS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sakrylov", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    g = sub.add_parser("gen-hamiltonian", parents=[common],
                       help="pairing plus Q.Q Hamiltonian from a valence space and model parameters")
    g.add_argument("--space", help="valence-space JSON (default: bundled 0f7/2 neutron shell)")
    g.add_argument("--params", help="model-parameter JSON (default: bundled values)")
    g.add_argument("-o", "--out-dir", default=".", help="output directory")
    g.set_defaults(func=cmd_gen_hamiltonian)

    def sector_args(sp):
        sp.add_argument("--particles", "-A", type=int, help="particle number")
        sp.add_argument("--twice-mj", type=int, help="twice the total angular-momentum projection")
        sp.add_argument("--space", help="valence-space JSON providing orbital 2m values")

    v = sub.add_parser("verify-encoding", parents=[common],
                       help="check <G,0|U_H|F,0> against the explicit matrix")
    v.add_argument("hamiltonian", help="Hamiltonian JSON or two-body table CSV")
    sector_args(v)
    v.add_argument("--tol", type=float, default=1e-10, help="pass threshold in MeV")
    v.add_argument("--perturb", metavar="J=VALUE", help="overwrite monomial J's coefficient (fault injection)")
    v.set_defaults(func=cmd_verify_encoding)

    s = sub.add_parser("solve", parents=[common], help="lowest energy per M_J sector from a run manifest")
    s.add_argument("manifest", help="run manifest JSON")
    s.add_argument("-o", "--out-dir", help="override the manifest's output directory")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("gate-report", parents=[common], help="gate counts and fitted scaling exponents")
    r.add_argument("--nsp", type=int, nargs="*", help="pairing-family sizes")
    r.add_argument("--hamiltonian", nargs="*", help="Hamiltonian files instead of the pairing family")
    r.add_argument("-o", "--out", help="write the CSV here")
    r.set_defaults(func=cmd_gate_report)

    m = sub.add_parser("moments", parents=[common], help="dump Chebyshev moments mu_k")
    m.add_argument("hamiltonian")
    sector_args(m)
    m.add_argument("--pivot", help="pivot bitstring, character p = orbital p")
    m.add_argument("--order", type=int, default=16, help="highest moment order")
    m.add_argument("--shots", type=int, help="also run the Hadamard-test estimator")
    m.set_defaults(func=cmd_moments)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"sakrylov {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
