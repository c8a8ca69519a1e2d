"""Command-line driver.

Every subcommand prints exact rationals as ``p/q`` strings.  Tables go to
stdout as CSV (header row first) or JSON (one object per line); ``report``
writes a whole directory instead.

Settings resolve in the order: command-line flag, ``C0DYN_OUT`` (output
directory only), ``--config`` file, built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from . import base, checks, majority, product, witness
from .base import ArcUnion, CompactWindow, CylinderUnion, MajoritySet, RotateBy, ShiftBy
from .literals import (
    LiteralError,
    format_group_element,
    format_rectangle,
    parse_base_set,
    parse_rectangle,
)
from .rigor import Exact, format_rational, parse_rational

OUT_ENV = "C0DYN_OUT"
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = base.BERNOULLI
    depth: int = 20
    radius: int = 3
    d_max: int = 6
    g_max: int = 8
    n_max: int = 8
    k_max: int = 6
    m_max: int = 3
    schedule_cap: int = majority.DEFAULT_SEARCH_CAP
    slack: Optional[Fraction] = None
    family_n: int = 8
    seed: int = 20240601
    out: str = "c0dyn-report"
    format: str = "csv"

    def __post_init__(self):
        if self.model not in (base.BERNOULLI, base.CIRCLE):
            raise ValueError(f"model must be {base.BERNOULLI} or {base.CIRCLE}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        for name in ("depth", "k_max", "m_max", "schedule_cap", "family_n", "n_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("radius", "d_max", "g_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def _coerce(name: str, text: str):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if kind == "int":
        return int(text)
    if kind == "Optional[Fraction]":
        return None if text in ("", "none") else parse_rational(text)
    return text


def read_config_file(path: str) -> Dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(ExperimentConfig)}
    values: Dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise ValueError(f"{path}:{lineno}: expected 'key = value' with key in {sorted(known)}")
        values[key] = _coerce(key, value.strip())
    return values


def resolve_config(args: argparse.Namespace, env: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    env = os.environ if env is None else env
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    if env.get(OUT_ENV):
        values["out"] = env[OUT_ENV]
    for f in fields(ExperimentConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    return ExperimentConfig(**values)


# --------------------------------------------------------------------------
# table output


def _cell(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _json_value(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if hasattr(value, "to_json"):
        return value.to_json()
    return value


def render(rows: Sequence[Dict[str, object]], fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps({k: _json_value(v) for k, v in r.items()}) + "\n" for r in rows)
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([_cell(_flatten(v)) for v in r.values()])
    return buf.getvalue()


def _flatten(v):
    if isinstance(v, Exact):
        return v.value
    return v


# --------------------------------------------------------------------------
# scans


def mixing_rows(A, B, d_max: int) -> List[Dict[str, object]]:
    r = base.mixing_threshold(A, B)
    target = base.nu(A) * base.nu(B)
    rows = []
    for d in range(-d_max, d_max + 1):
        value = base.nu_boolean("intersect", base.act(ShiftBy(d), A), B)
        rows.append({"d": d, "nu_intersection": value, "product": target,
                     "equal": value == target, "threshold": r})
    return rows


def ai_rows(n_max: int, d_max: int) -> List[Dict[str, object]]:
    return [
        {"n": n, "d": d, "overlap": majority.overlap(n, d), "symdiff": majority.symdiff_shift(n, d)}
        for n in range(1, n_max + 1) for d in range(d_max + 1)
    ]


def _scan_elements(model: str, g_max: int):
    if model == base.BERNOULLI:
        return [ShiftBy(d) for d in range(-g_max, g_max + 1)]
    q = 2 * max(g_max, 1)
    return [RotateBy(Fraction(j, q)) for j in range(q)]


def c0_rows(A, B, g_max: int, depth: int) -> List[Dict[str, object]]:
    records = []
    for g in _scan_elements(A.model, g_max):
        truncated, infinite = product.c0_eval(g, A, B, depth)
        records.append((g, truncated, infinite))
    rows = []
    for g, truncated, infinite in records:
        size = abs(g.d) if isinstance(g, ShiftBy) else None
        if size is None:
            window_max = truncated
        else:
            window_max = max(t for h, t, _ in records if abs(h.d) >= size)
        rows.append({"g": format_group_element(g), "truncated": truncated,
                     "lo": infinite.lo, "hi": infinite.hi, "window_max": window_max})
    return rows


def c0_json(A, B, g_max: int, depth: int) -> str:
    out = []
    for g in _scan_elements(A.model, g_max):
        truncated, infinite = product.c0_eval(g, A, B, depth)
        out.append(json.dumps({"g": format_group_element(g), "truncated": format_rational(truncated),
                               "infinite": infinite.to_json()}))
    return "".join(line + "\n" for line in out)


def family_rows(family: product.RingSet) -> List[Dict[str, object]]:
    return [{"index": i, "rectangle": format_rectangle(P), "measure": product.rect_measure(P)}
            for i, P in enumerate(family.pieces)]


def certificate_rows(family: product.RingSet) -> List[Dict[str, object]]:
    return [{"i": c.i, "j": c.j, "coordinate": c.index} for c in family.certificates]


def coefficient_rows(schedule: witness.WitnessSchedule, m: int) -> List[Dict[str, object]]:
    rows = []
    for d in range(-m, m + 1):
        for D in range(1, schedule.k_max + 1):
            c = witness.coefficient(ShiftBy(d), m, D, schedule)
            rows.append({"g": d, "depth": D, "lo": c.lo, "hi": c.hi})
    return rows


def cover_rows(report: witness.CoverReport) -> List[Dict[str, object]]:
    return [{"g": g, "m": m, "measure": mu, "rectangle": format_rectangle(P)}
            for (g, m), mu, P in zip(report.labels, report.measures, report.pieces)]


# --------------------------------------------------------------------------
# report


def write_report(config: ExperimentConfig) -> List[checks.CheckResult]:
    """Write every artifact under ``config.out``; returns the check results."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = config.format

    def emit(name: str, text: str):
        (out / name).write_text(text)

    x0 = CylinderUnion.from_assignments([{0: 1}])
    emit(f"mixing_cylinder.{ext}", render(mixing_rows(x0, x0, config.d_max), ext))
    emit(f"mixing_majority.{ext}", render(mixing_rows(MajoritySet(1), MajoritySet(1), config.d_max), ext))
    emit(f"ai_table.{ext}", render(ai_rows(config.n_max, config.d_max), ext))

    X = product.pure_tail(product.HalfTail(x0))
    emit(f"c0_scan.{ext}", render(c0_rows(X, X, config.g_max, config.depth), ext))

    family = product.disjoint_family(config.family_n, x0)
    emit(f"non_sigma_finite.{ext}", render(family_rows(family), ext))
    emit(f"non_sigma_finite_certificates.{ext}", render(certificate_rows(family), ext))

    half_arc = ArcUnion(((Fraction(0), Fraction(1, 2)),))
    rotation = witness.rotation_counterexample(Fraction(1, 3), half_arc, config.depth)
    emit("rotation.json", json.dumps(rotation.to_json(), indent=2) + "\n")

    try:
        schedule = witness.build_schedule(
            config.k_max, config.m_max, cap=config.schedule_cap, slack_override=config.slack
        )
    except majority.SearchCapExceeded as exc:
        results = [checks.CheckResult("schedule_build", False, str(exc))]
        results += [r for r in _schedule_free_checks(config)]
    else:
        emit("schedule.jsonl", schedule.dumps())
        for m in range(1, config.m_max + 1):
            emit(f"coefficients_m{m}.{ext}", render(coefficient_rows(schedule, m), ext))
        cover = witness.sigma_finite_cover(schedule, config.radius, config.m_max)
        emit(f"cover.{ext}", render(cover_rows(cover), ext))
        results = checks.run_all(schedule, seed=config.seed, family_n=config.family_n, depth=config.depth)

    summary = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    emit("summary.csv", render(summary, "csv"))
    emit("summary.json", json.dumps(
        {"passed": all(r.passed for r in results),
         "failures": [r.name for r in results if not r.passed],
         "checks": summary}, indent=2) + "\n")
    return results


def _schedule_free_checks(config: ExperimentConfig) -> Iterable[checks.CheckResult]:
    yield checks.check_overlap_oracle()
    yield checks.check_majority_closed_forms()
    yield checks.check_strong_mixing(config.seed)
    yield checks.check_conditional_well_defined(config.seed)
    yield checks.check_ring_suite(config.seed)
    yield checks.check_c0_decay(config.depth)
    yield checks.check_non_sigma_finite(config.family_n)
    yield checks.check_rotation()


# --------------------------------------------------------------------------
# argument parsing


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--model", choices=(base.BERNOULLI, base.CIRCLE), default=None)
    p.add_argument("--depth", type=int, default=None, help="explicit product depth D")
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--out", default=None, help=f"output directory (env {OUT_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="c0dyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mixing-scan", help="nu(dA & B) against nu(A) nu(B)")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--d-max", dest="d_max", type=int, default=None)
    _add_config_flags(p)

    p = sub.add_parser("ai-table", help="majority-set overlaps and symmetric differences")
    p.add_argument("n_max", type=int)
    p.add_argument("d_max", type=int)
    _add_config_flags(p)

    p = sub.add_parser("mu", help="measure of rectangles combined left to right")
    p.add_argument("terms", nargs="+", metavar="TERM",
                   help="RECT [{and,or,minus} RECT ...]")
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    p.add_argument("--mmax", dest="m_max", type=int, default=None)
    _add_config_flags(p)

    p = sub.add_parser("c0-scan", help="truncated and infinite mu(gA & B)")
    p.add_argument("A")
    p.add_argument("B")
    p.add_argument("--g-max", dest="g_max", type=int, default=None)
    p.add_argument("--epsilon", default=None, help="also report the c0 threshold window for this epsilon")
    _add_config_flags(p)

    p = sub.add_parser("non-sigma-finite", help="2^N pairwise disjoint rectangles of measure 1")
    p.add_argument("N", type=int)
    p.add_argument("--base", default="cyl 0:1", help="tail factor of measure 1/2")
    p.add_argument("--certificates", action="store_true", help="list disjointness certificates instead")
    _add_config_flags(p)

    p = sub.add_parser("report", help="write every table and a pass/fail summary")
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    p.add_argument("--mmax", dest="m_max", type=int, default=None)
    p.add_argument("--schedule-cap", dest="schedule_cap", type=int, default=None)
    p.add_argument("--slack", type=parse_rational, default=None, help="force this threshold in every cell")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--family-n", dest="family_n", type=int, default=None)
    _add_config_flags(p)

    w = sub.add_parser("witness", help="almost-invariant witness tools").add_subparsers(dest="action", required=True)

    p = w.add_parser("build", help="print the schedule certificate file (JSON lines)")
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    p.add_argument("--mmax", dest="m_max", type=int, default=None)
    p.add_argument("--schedule-cap", dest="schedule_cap", type=int, default=None)
    p.add_argument("--slack", type=parse_rational, default=None)
    _add_config_flags(p)

    p = w.add_parser("verify", help="re-check a schedule certificate file")
    p.add_argument("path")
    _add_config_flags(p)

    p = w.add_parser("coeff", help="enclosure of the witness coefficient at g")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--schedule", help="certificate file to use instead of building one")
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    _add_config_flags(p)

    p = w.add_parser("fc-check", help="certify or refute uniform convergence on a window")
    p.add_argument("rect")
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--schedule", help="certificate file for schedule(m) tails")
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    p.add_argument("--mmax", dest="m_max", type=int, default=None)
    _add_config_flags(p)

    p = w.add_parser("rotation", help="circle rotation coefficient")
    p.add_argument("--theta", type=parse_rational, required=True)
    p.add_argument("--arc", default="arc 0/1 1/2")
    _add_config_flags(p)

    p = w.add_parser("cover", help="translates g X_m covering the support")
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--mmax", dest="m_max", type=int, default=None)
    p.add_argument("--kmax", dest="k_max", type=int, default=None)
    _add_config_flags(p)
    return parser


# --------------------------------------------------------------------------
# handlers


def _schedule_for(args, config: ExperimentConfig, m_needed: int = 1) -> witness.WitnessSchedule:
    path = getattr(args, "schedule", None)
    if path:
        return witness.WitnessSchedule.loads(Path(path).read_text())
    return witness.build_schedule(config.k_max, max(config.m_max, m_needed),
                                  cap=config.schedule_cap, slack_override=config.slack)


def _needs_schedule(text: str) -> bool:
    return "schedule(" in text


def _parse_rect_arg(text: str, args, config) -> product.Rectangle:
    schedule = _schedule_for(args, config) if _needs_schedule(text) else None
    return parse_rectangle(text, schedule)


def _parse_set_or_rect(text: str, args, config):
    if text.strip().startswith("rect"):
        return _parse_rect_arg(text, args, config)
    return parse_base_set(text)


_COMBINE = {"and": product.intersect, "or": product.union, "minus": product.difference}


def cmd_mixing_scan(args, config) -> int:
    A, B = parse_base_set(args.A), parse_base_set(args.B)
    sys.stdout.write(render(mixing_rows(A, B, config.d_max), config.format))
    return 0


def cmd_ai_table(args, config) -> int:
    sys.stdout.write(render(ai_rows(args.n_max, args.d_max), config.format))
    return 0


def cmd_mu(args, config) -> int:
    terms = args.terms
    if len(terms) % 2 == 0:
        raise LiteralError("expected RECT followed by operator/RECT pairs", " ".join(terms))
    schedule = _schedule_for(args, config) if any(_needs_schedule(t) for t in terms) else None
    E = product.as_ringset(parse_rectangle(terms[0], schedule))
    for op, text in zip(terms[1::2], terms[2::2]):
        if op not in _COMBINE:
            raise LiteralError(f"unknown operator {op!r}; use and, or, minus", op)
        E = _COMBINE[op](E, parse_rectangle(text, schedule))
    rows = [{"piece": i, "rectangle": format_rectangle(P), "measure": product.rect_measure(P)}
            for i, P in enumerate(E.pieces)]
    rows.append({"piece": "total", "rectangle": "", "measure": product.mu(E)})
    sys.stdout.write(render(rows, config.format))
    return 0


def cmd_c0_scan(args, config) -> int:
    A = _parse_rect_arg(args.A, args, config)
    B = _parse_rect_arg(args.B, args, config)
    if config.format == "json":
        sys.stdout.write(c0_json(A, B, config.g_max, config.depth))
    else:
        sys.stdout.write(render(c0_rows(A, B, config.g_max, config.depth), "csv"))
    if args.epsilon is not None:
        rep = product.c0_threshold_report(A, B, parse_rational(args.epsilon), config.depth)
        sys.stderr.write(f"threshold radius {rep.window.radius} for epsilon {args.epsilon}\n")
    if getattr(args, "out", None) or os.environ.get(OUT_ENV):
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "c0_scan.csv").write_text(render(c0_rows(A, B, config.g_max, config.depth), "csv"))
    return 0


def cmd_non_sigma_finite(args, config) -> int:
    family = product.disjoint_family(args.N, parse_base_set(args.base))
    rows = certificate_rows(family) if args.certificates else family_rows(family)
    sys.stdout.write(render(rows, config.format))
    return 0


def cmd_report(args, config) -> int:
    results = write_report(config)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_witness(args, config) -> int:
    action = args.action
    if action == "build":
        sys.stdout.write(_schedule_for(args, config).dumps())
        return 0
    if action == "verify":
        schedule = witness.WitnessSchedule.loads(Path(args.path).read_text())
        failures = witness.verify_schedule(schedule)
        print(json.dumps({"cells": len(schedule.entries), "failures": failures}))
        return 1 if failures else 0
    if action == "coeff":
        schedule = _schedule_for(args, config, args.m)
        depth = min(config.depth, schedule.k_max)
        value = witness.coefficient(ShiftBy(args.g), args.m, depth, schedule)
        print(json.dumps({"g": args.g, "m": args.m, "depth": depth, "value": value.to_json()}))
        return 0
    if action == "fc-check":
        A = _parse_rect_arg(args.rect, args, config)
        radius = config.radius if args.radius is None else args.radius
        cert = witness.fc_check(A, CompactWindow(radius))
        print(json.dumps({
            "rectangle": format_rectangle(A),
            "radius": radius,
            "valid": cert.valid,
            "refutation_index": cert.refutation_index,
            "lower_bounds": [format_rational(v) for v in cert.lower_bounds],
            "tail_scale": None if cert.tail_scale is None else format_rational(cert.tail_scale),
            "tail_lower": format_rational(cert.tail_lower),
            "note": cert.note,
        }))
        return 0
    if action == "rotation":
        arc = parse_base_set(args.arc)
        rep = witness.rotation_counterexample(args.theta, arc, config.depth)
        print(json.dumps(rep.to_json()))
        return 0
    if action == "cover":
        schedule = _schedule_for(args, config)
        radius = config.radius if args.radius is None else args.radius
        rep = witness.sigma_finite_cover(schedule, radius, config.m_max)
        sys.stdout.write(render(cover_rows(rep), config.format))
        return 0
    raise AssertionError(action)


HANDLERS = {
    "mixing-scan": cmd_mixing_scan,
    "ai-table": cmd_ai_table,
    "mu": cmd_mu,
    "c0-scan": cmd_c0_scan,
    "non-sigma-finite": cmd_non_sigma_finite,
    "report": cmd_report,
    "witness": cmd_witness,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        # coefficient bounds have numerators with thousands of digits
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return HANDLERS[args.command](args, config)
    except LiteralError as exc:
        print(f"c0dyn: parse error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError) as exc:
        print(f"c0dyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
