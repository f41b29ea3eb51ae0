"""Command line front end.

Every command reads an instance file, runs one library operation and emits a
``RunRecord``: a JSON document whose fields other than ``wall_time`` depend
only on (command, instance, seed, budgets).  Error families map onto exit
codes 2 (schema), 3 (hypothesis unmet), 4 (inconclusive) and 5 (theorem
assertion failed).

Certificates are stored under ``outputs.certificate`` of the record.  Passing
a record back with ``--certificate`` re-verifies it instead of rebuilding it.
"""

from __future__ import annotations

import argparse
import enum
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from .efficiency import (
    AugDualQuery,
    DualKind,
    PaeCertificate,
    ae,
    ae_bp,
    amin,
    certify_pae,
    check_aug_dual,
    check_pae,
    necessary_pipeline,
    shifted_sublevel_ae,
    sufficient_ae,
    synth_aug_dual,
)
from .errors import CrsError, Inconclusive, InvalidInput, SchemaError, TheoremViolation
from .instance import FAMILIES, VERSION, Instance, dumps, parse_instance, random_instance
from .separation import (
    Mode,
    SeparationCertificate,
    cone_witness,
    delta_margin,
    separate_coradiant,
    ssp_check,
    verify_certificate,
    verify_dichotomy,
    verify_dilated_pair,
)
from .sets import Cone, Verdict, cone_of, d_inf, is_norm_base, radius_inf

DEFAULT_SAMPLES = 10_000


# -----------------------------------------------------------------------------
# records
# -----------------------------------------------------------------------------


def jsonable(x):
    """Plain JSON types for numpy values, tuples, enums and dataclasses."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, enum.Enum):
        return x.value if isinstance(x.value, str) else x.name.lower()
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if is_dataclass(x) and not isinstance(x, type):
        return jsonable({k: getattr(x, k) for k in x.__dataclass_fields__})
    return x


@dataclass
class RunRecord:
    command: str
    instance_digest: str | None
    seed: int
    budgets: dict
    outputs: dict = field(default_factory=dict)
    wall_time: float = 0.0
    exit_code: int = 0
    error: dict | None = None
    summary: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {"version": VERSION, **jsonable(asdict(self))}
        d.pop("summary")
        return d

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def without_time(self) -> dict:
        d = self.to_dict()
        d.pop("wall_time")
        return d


def default_budgets(samples: int | None = None) -> dict:
    if samples is None:
        samples = int(os.environ.get("CRS_DEFAULT_SAMPLES", DEFAULT_SAMPLES))
    if samples < 16:
        raise InvalidInput("--samples must be at least 16")
    return {"samples": samples, "lam_samples": 10 * samples, "resolution": 2000}


# -----------------------------------------------------------------------------
# certificate (de)serialization
# -----------------------------------------------------------------------------


def separation_to_dict(c: SeparationCertificate) -> dict:
    d = jsonable(c)
    d["type"] = "separation"
    return d


def separation_from_dict(d: dict) -> SeparationCertificate:
    try:
        return SeparationCertificate(
            f=np.asarray(d["f"], float),
            alpha1=float(d["alpha1"]),
            alpha2=float(d["alpha2"]),
            lam=float(d["lam"]),
            eta_max=float(d["eta_max"]),
            eta=float(d["eta"]),
            mode=Mode(d["mode"]),
            n=None if d.get("n") is None else float(d["n"]),
            radius_K=None if d.get("radius_K") is None else float(d["radius_K"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError("$.outputs.certificate", f"not a separation certificate: {e}") from e


def pae_from_dict(d: dict) -> PaeCertificate:
    try:
        return PaeCertificate(np.asarray(d["f"], float), float(d["alpha"]), float(d["lam"]), float(d["eps"]), int(d["x0"]), float(d["enclosing_level"]))
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError("$.outputs.certificate", f"not a PAE certificate: {e}") from e


def _certificate(record: dict | None, kind: str) -> dict:
    if not isinstance(record, dict):
        raise SchemaError("$", "certificate file must be a JSON object")
    cert = record.get("outputs", {}).get("certificate", record)
    if not isinstance(cert, dict) or cert.get("type") != kind:
        raise SchemaError("$.outputs.certificate.type", f"expected a {kind!r} certificate")
    return cert


# -----------------------------------------------------------------------------
# commands
# -----------------------------------------------------------------------------


def _cone(inst: Instance, name: str):
    s = inst.set(name)
    return s if isinstance(s, Cone) else cone_of(s)


def _coradiant(inst: Instance, name: str):
    s = inst.set(name)
    if isinstance(s, Cone):
        raise SchemaError(f"$.sets.{name}", "expected a co-radiant set, got a cone")
    return s


def _indices(A: np.ndarray, idx) -> dict:
    idx = [int(i) for i in idx]
    return {"indices": idx, "points": A[idx].tolist() if idx else []}


def _f_alpha_lam(inst: Instance, C, eps, budgets, seed, lam_key="lambda"):
    """Functional, alpha and lambda from the instance, else synthesized."""
    if "f" in inst.functionals:
        return inst.functional("f"), inst.param("alpha"), inst.param(lam_key), None
    s = synth_aug_dual(C, eps, budgets["samples"], seed)
    return s.f, s.alpha, s.lam, s


def cmd_member(inst, seed, budgets, cert, out):
    C = inst.set(inst.options.get("set", "C"))
    X = inst.pts("X" if "X" in inst.points else "A")
    status, margins = C.verdicts(X)
    closed = getattr(C, "closed", True)
    rows = []
    for x, s, m in zip(X, status, margins):
        v = Verdict(int(s))
        rows.append({"point": x, "status": v.name, "margin": float(m), "member": None if v is Verdict.UNKNOWN else bool(v is Verdict.IN or (v is Verdict.BOUNDARY and closed))})
    out["verdicts"] = rows
    if any(r["member"] is None for r in rows):
        raise Inconclusive("some membership verdicts are Unknown")
    return [f"{r['point']}: {r['status']} (member={r['member']}, margin={r['margin']:.6g})" for r in rows]


def cmd_d_inf(inst, seed, budgets, cert, out):
    r = d_inf(_coradiant(inst, "C"), budgets["samples"], seed)
    out.update(value=r.value, point=r.point, samples=r.samples)
    return [f"d_C ≈ {r.value:.9g} at {r.point.tolist()}"]


def cmd_norm_base(inst, seed, budgets, cert, out):
    t = inst.param("t", 1.0)
    r = is_norm_base(_coradiant(inst, "C"), t, budgets["samples"], seed)
    out.update(t=t, confirmed=r.confirmed, samples=r.samples_checked, witness=r.witness)
    return [f"t = {t}: {'Confirmed' if r.confirmed else 'Refuted'}" + ("" if r.confirmed else f", witness {r.witness.tolist()}")]


def cmd_radius_inf(inst, seed, budgets, cert, out):
    r = radius_inf(_coradiant(inst, "C"), budget=budgets["samples"], seed=seed)
    out.update(finite=r.finite, estimate=r.estimate, bracket=r.bracket, t_max=r.t_max)
    if not r.finite:
        return [f"no norm base found up to t = {r.t_max}"]
    return [f"I_C ≈ {r.estimate:.6g}, bracket {r.bracket}"]


def _ssp(inst, seed, budgets):
    C, K = _cone(inst, "C"), _cone(inst, "K")
    return C, K, ssp_check(C, K, budgets["resolution"], seed, t=inst.param("t", 1.0))


def cmd_ssp(inst, seed, budgets, cert, out):
    _, _, r = _ssp(inst, seed, budgets)
    out.update(holds=r.holds, hull_distance=r.hull_distance, witness=r.witness, t=r.t, samples_C=r.samples_C, samples_K=r.samples_K)
    return [f"SSP {'holds' if r.holds else 'fails'}: hull distance {r.hull_distance:.6g}"]


def _witness(inst, seed, budgets, out):
    C, K, r = _ssp(inst, seed, budgets)
    w = cone_witness(C, K, r, budgets["samples"], seed + 1)
    out["witness"] = {"f": w.f, "alpha1": w.alpha1, "alpha2": w.alpha2, "gamma": w.gamma, "beta": w.beta, "margins": {str(a): m for a, m in w.margins.items()}}
    return C, K, w


def cmd_witness(inst, seed, budgets, cert, out):
    _, _, w = _witness(inst, seed, budgets, out)
    return [f"f = {w.f.tolist()}, alpha1 = {w.alpha1:.6g}, alpha2 = {w.alpha2:.6g}"]


def cmd_delta_margin(inst, seed, budgets, cert, out):
    C, K, w = _witness(inst, seed, budgets, out)
    d = delta_margin(w, C.space)
    res = verify_dilated_pair(C, K, w, d / 2, budgets["samples"], seed + 2)
    out.update(delta_prime=d, verified_at=d / 2, dilated_margins={str(a): m for a, m in res.items()})
    return [f"delta' = {d:.6g}; dilated pair verified at delta'/2"]


def _mode(inst) -> Mode:
    try:
        return Mode(inst.options.get("mode", "boundary-only"))
    except ValueError as e:
        raise SchemaError("$.options.mode", str(e)) from e


def cmd_separate(inst, seed, budgets, cert, out):
    C, K = _coradiant(inst, "C"), _coradiant(inst, "K")
    if cert is not None:
        c = separation_from_dict(_certificate(cert, "separation"))
        out["margins"] = verify_certificate(C, K, c, budgets["lam_samples"], seed)
        out["certificate"] = separation_to_dict(c)
        return ["certificate re-verified"]
    n = inst.params.get("n")
    c = separate_coradiant(C, K, _mode(inst), budgets["resolution"], seed, n=n, lam_samples=budgets["lam_samples"], verify_samples=budgets["lam_samples"])
    out["certificate"] = separation_to_dict(c)
    return [f"f = {c.f.tolist()}, alphas = ({c.alpha1:.6g}, {c.alpha2:.6g}), lam = {c.lam:.6g}, eta = {c.eta:.6g} ({c.mode.value})"]


def cmd_dichotomy(inst, seed, budgets, cert, out):
    lines = cmd_separate(inst, seed, budgets, cert, out)
    C, K = _coradiant(inst, "C"), _coradiant(inst, "K")
    c = separation_from_dict(out["certificate"])
    out["classification"] = verify_dichotomy(C, K, c, budgets["samples"], seed + 1)
    return lines + [f"co(C) vs K(eta): {out['classification']}"]


def cmd_ae(inst, seed, budgets, cert, out):
    A = inst.pts("A")
    eps = inst.param("eps")
    r = ae(A, _coradiant(inst, "C"), eps)
    out.update(eps=eps, **_indices(A, r.efficient_indices))
    return [f"AE(A, C, {eps}) = {out['points']}"]


def cmd_ae_bp(inst, seed, budgets, cert, out):
    A = inst.pts("A")
    idx = ae_bp(inst.space, A, inst.functional("f"), inst.param("alpha"), inst.param("lambda"))
    out.update(_indices(A, idx))
    return [f"ae_bp = {out['points']}"]


def cmd_amin(inst, seed, budgets, cert, out):
    A = inst.pts("A")
    f, a, eps = inst.functional("f"), inst.param("alpha"), inst.param("eps")
    idx = amin(inst.space, f, a, A, eps)
    bp = ae_bp(inst.space, A, f, a, eps)
    out.update(_indices(A, idx), ae_bp_indices=list(bp), strict=set(idx) < set(bp))
    return [f"AMin = {out['points']} (inside ae_bp {list(bp)}, strict = {out['strict']})"]


def cmd_augdual_check(inst, seed, budgets, cert, out):
    C = _coradiant(inst, "C")
    if cert is not None:
        d = _certificate(cert, "augdual")
        f, a, lam, eps = np.asarray(d["f"], float), float(d["alpha"]), float(d["lam"]), float(d["eps"])
        results = {
            "weak": check_aug_dual(C, AugDualQuery(f, a, lam, eps, DualKind.WEAK), budgets["samples"], seed),
            "strict": check_aug_dual(C, AugDualQuery(f, a, lam / 2, eps, DualKind.STRICT), budgets["samples"], seed + 1),
        }
    else:
        kind = DualKind(inst.options.get("kind", "weak"))
        q = AugDualQuery(inst.functional("f"), inst.param("alpha"), inst.param("lambda"), inst.param("eps"), kind)
        results = {kind.value: check_aug_dual(C, q, budgets["samples"], seed)}
    out["results"] = {k: jsonable(v) for k, v in results.items()}
    out["member"] = all(r.member for r in results.values())
    lines = [f"{k}: {'Member' if r.member else 'NotMember'} (min margin {r.min_margin:.6g})" for k, r in results.items()]
    if cert is not None and not out["member"]:
        raise TheoremViolation("certificate no longer passes the augmented dual check")
    return lines


def cmd_augdual_synth(inst, seed, budgets, cert, out):
    eps = inst.param("eps")
    s = synth_aug_dual(_coradiant(inst, "C"), eps, budgets["samples"], seed)
    out["certificate"] = {"type": "augdual", "f": s.f, "alpha": s.alpha, "lam": s.lam, "eps": eps, "gamma": s.gamma, "d_C": s.d_C}
    out["checks"] = {"weak": jsonable(s.weak), "strict": jsonable(s.strict)}
    return [f"f = {s.f.tolist()}, alpha = {s.alpha:.9g}, lam = {s.lam:.9g}"]


def cmd_sufficient(inst, seed, budgets, cert, out):
    A, C, eps = inst.pts("A"), _coradiant(inst, "C"), inst.param("eps")
    f, a, lam, synth = _f_alpha_lam(inst, C, eps, budgets, seed)
    # a synthesized pair is weak at lam and strict at lam / 2
    lam_strict = lam / 2 if synth is not None else lam
    lines = []
    out.update(f=f, alpha=a, lam=lam, synthesized=synth is not None)
    try:
        r1 = sufficient_ae(A, C, eps, f, a, lam_strict, budgets["samples"], seed)
        out["strict"] = {"lam": lam_strict, "indices": list(r1.indices), "ae_indices": list(r1.ae_indices)}
        lines.append(f"(i) ae_bp {list(r1.indices)} inside AE {list(r1.ae_indices)}")
    except CrsError as e:
        if not isinstance(e, TheoremViolation) and synth is None:
            out["strict"] = {"skipped": str(e)}
        else:
            raise
    x0s = inst.params.get("x0")
    cands = [int(x0s)] if x0s is not None else list(ae_bp(inst.space, A, f, a, lam))
    sub = {}
    for i in cands:
        r2 = shifted_sublevel_ae(A, C, eps, f, a, lam, i, budgets["samples"], seed)
        sub[str(i)] = list(r2.indices)
    out["sublevel"] = {"lam": lam, "by_x0": sub}
    lines.append(f"(ii) shifted sublevel sets inside AE for x0 in {cands}")
    return lines


def cmd_pae_certify(inst, seed, budgets, cert, out):
    A, C = inst.pts("A"), _coradiant(inst, "C")
    if cert is not None:
        c = pae_from_dict(_certificate(cert, "pae"))
        out["checks"] = check_pae(A, C, c, budgets["samples"], seed)
        out["certificate"] = {"type": "pae", **jsonable(c)}
        out["certificate"]["checks"] = {}
        return ["PAE certificate re-verified"]
    eps = inst.param("eps")
    f, a, lam, synth = _f_alpha_lam(inst, C, eps, budgets, seed)
    if synth is not None:
        lam = lam / 2
    x0 = inst.params.get("x0")
    if x0 is None:
        cands = ae_bp(inst.space, A, f, a, lam)
        if not cands:
            raise InvalidInput("ae_bp is empty; no x0 to certify")
        x0 = cands[0]
    c = certify_pae(A, C, eps, f, a, lam, int(x0), budgets["samples"], seed)
    out["certificate"] = {"type": "pae", **jsonable(c)}
    out["checks"] = out["certificate"].pop("checks")
    out["certificate"]["checks"] = {}
    return [f"x0 = {A[int(x0)].tolist()} is eps-properly efficient; enclosure level {c.enclosing_level:.6g}"]


def cmd_necessary(inst, seed, budgets, cert, out):
    A, C = inst.pts("A"), _coradiant(inst, "C")
    r = necessary_pipeline(A, C, inst.param("delta"), inst.param("n"), inst.param("eps"), seed=seed, lam_samples=2 * budgets["samples"], verify_samples=budgets["samples"] // 2)
    out.update(
        f=r.f,
        alpha1=r.alpha1,
        alpha2=r.alpha2,
        lam=r.lam,
        eta=r.eta,
        ae_dilated=list(r.ae_dilated),
        ae_C=list(r.ae_C),
        probes=list(r.probes),
        checks=r.checks,
        min_slack=r.min_slack,
        certificate=separation_to_dict(r.certificate),
    )
    return [f"{r.checks} inequality checks passed (min slack {r.min_slack:.3g}); alpha2 = {r.alpha2:.6g}"]


def cmd_suite(inst, seed, budgets, cert, out):
    from .suite import run_suite

    checks = run_suite(seed)
    out["checks"] = [{"criterion": c.criterion, "name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    out["passed"] = all(c.passed for c in checks)
    lines = [c.line() for c in checks]
    if not out["passed"]:
        raise TheoremViolation("acceptance suite has failing criteria")
    return lines


COMMANDS = {
    "member": cmd_member,
    "d-inf": cmd_d_inf,
    "norm-base": cmd_norm_base,
    "radius-inf": cmd_radius_inf,
    "ssp": cmd_ssp,
    "witness": cmd_witness,
    "delta-margin": cmd_delta_margin,
    "separate": cmd_separate,
    "dichotomy": cmd_dichotomy,
    "ae": cmd_ae,
    "ae-bp": cmd_ae_bp,
    "amin": cmd_amin,
    "augdual-check": cmd_augdual_check,
    "augdual-synth": cmd_augdual_synth,
    "sufficient": cmd_sufficient,
    "pae-certify": cmd_pae_certify,
    "necessary": cmd_necessary,
    "suite": cmd_suite,
}
NEEDS_INSTANCE = set(COMMANDS) - {"suite"}


def run(command: str, instance: Instance | None, seed: int = 0, budgets: dict | None = None, certificate: dict | None = None) -> RunRecord:
    """Execute one command; errors are captured in the record, not raised."""
    if command not in COMMANDS:
        raise InvalidInput(f"unknown command {command!r}")
    budgets = dict(budgets or default_budgets())
    rec = RunRecord(command, instance.digest if instance is not None else None, int(seed), budgets)
    t0 = time.perf_counter()
    try:
        if instance is None and command in NEEDS_INSTANCE:
            raise SchemaError("$", f"command {command!r} needs --instance")
        rec.summary = COMMANDS[command](instance, int(seed), budgets, certificate, rec.outputs) or []
    except CrsError as e:
        rec.exit_code = e.exit_code
        rec.error = {"type": type(e).__name__, "message": str(e)}
        w = getattr(e, "witness", None)
        if w is not None:
            rec.error["witness"] = jsonable(w)
        pairs = getattr(e, "pairs", None)
        if pairs is not None:
            rec.error["pairs"] = jsonable(pairs)
    rec.outputs = jsonable(rec.outputs)
    rec.wall_time = time.perf_counter() - t0
    return rec


# -----------------------------------------------------------------------------
# entry point
# -----------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crs", description="Co-radiant sets, hyperbolic separation and approximate efficiency.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--instance", help="instance JSON file")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--samples", type=int, default=None, help=f"membership sample budget (default {DEFAULT_SAMPLES} or $CRS_DEFAULT_SAMPLES)")
        s.add_argument("--out", help="write the run record here")
        s.add_argument("--certificate", help="record file whose certificate should be re-verified")
    r = sub.add_parser("random", help="write a seeded random instance")
    r.add_argument("--family", choices=FAMILIES, default="orthant-truncated")
    r.add_argument("--dim", type=int, default=2)
    r.add_argument("--size", type=int, default=20)
    r.add_argument("--norm", choices=("l1", "l2", "linf"), default="l2")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", help="write the instance here instead of stdout")
    return p


def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise SchemaError("$", f"cannot read {what} {path!r}: {e.strerror}") from e


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "random":
            text = random_instance(args.seed, args.dim, args.family, args.size, args.norm).text()
            if args.out:
                with open(args.out, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return 0
        budgets = default_budgets(args.samples)
        inst = parse_instance(_read_json(args.instance, "instance")) if args.instance else None
        cert = None
        if args.certificate:
            try:
                cert = json.loads(_read_json(args.certificate, "certificate"))
            except json.JSONDecodeError as e:
                raise SchemaError("$", f"certificate file is not JSON: {e.msg}") from e
    except CrsError as e:
        print(f"crs: error: {e}", file=sys.stderr)
        return e.exit_code
    rec = run(args.command, inst, args.seed, budgets, cert)
    for line in rec.summary:
        print(line)
    if rec.error:
        print(f"crs: {rec.error['type']}: {rec.error['message']}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rec.to_json())
    return rec.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
