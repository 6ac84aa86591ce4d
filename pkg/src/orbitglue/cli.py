"""Batch driver: ``python -m orbitglue <command> --config FILE``.

Each command writes a JSON-lines report (first line: the resolved config,
then one record per trial) and, where meaningful, a CSV plot table.
Exit status is 0 on success, 2 for a malformed config and 3 when the
experiment itself is infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import gluing, markov, measures, schottky
from .config import EXPERIMENTS, OUTPUT_ENV, ConfigError, ExperimentConfig, load
from .core import ClosingParams, DynamicsError, OrbitSegment

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _dump(record: dict) -> str:
    return json.dumps(_jsonable(record), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# building blocks from config


def build_system(cfg: ExperimentConfig):
    s = cfg.system
    if s["kind"] == "schottky":
        return schottky.SchottkySystem.symmetric(
            s["center"], s["radius"], s["scale"], basepoint=s["basepoint"],
            search_radius=s["search_radius"],
        )
    adj, size = s["adjacency"], s["size"]
    if adj.startswith("renewal"):
        k = int(adj[8:-1]) if "(" in adj else size
        return markov.MarkovSystem.renewal(k)
    if adj == "golden-mean":
        return markov.MarkovSystem.golden_mean()
    if adj == "pairs":
        return markov.MarkovSystem.from_pairs(size, s["pairs"])
    k = int(adj[5:-1]) if "(" in adj else size
    return markov.MarkovSystem.full_shift(k)


def build_family(cfg: ExperimentConfig, system):
    f = cfg.family
    if f["kind"] == "geometric":
        return schottky.default_geometric_family(system, f["radius"])
    if f["kind"] == "coordinate":
        return measures.TestFamily((measures.coordinate_value(max(system.symbols)),))
    return measures.cylinder_family(system, f["length"])


def parse_orbit_word(system, text: str) -> tuple:
    if not system.discrete:
        return schottky.parse_word(text)
    parts = text.split(".") if "." in text else list(text)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise DynamicsError(f"bad symbol word {text!r}") from None


def build_orbit(system, text: str):
    word = parse_orbit_word(system, text)
    return system.periodic_orbit(word)


def _label(system, word) -> str:
    return "".join(word) if not system.discrete else markov.word_label(word)


# ---------------------------------------------------------------------------
# experiments; each returns (records, table rows or None)


def run_glue(cfg, system, family):
    exp = cfg.experiment
    targets = [(build_orbit(system, w), p) for w, p in zip(exp["targets"], exp["weights"])]
    records, rows = [], []
    for k in range(exp["sweep"]):
        N = exp["N"] * 2 ** k
        plan = gluing.plan_itinerary(system, targets, N, eps=exp["eps"])
        orbit = gluing.execute_gluing(plan)
        cert = gluing.certify(orbit, plan, family)
        records.append({
            "trial": k, "N": N, "plan": plan.describe(),
            "word": _label(system, plan.word), "period": orbit.period,
            **cert.as_record(),
        })
        rows.append((N, cert.measured, cert.bound))
    return records, ("N", rows)


def _close_markov(cfg, system):
    exp = cfg.experiment
    m = exp["m"]
    records = []
    for i in range(exp["trials"]):
        x, t = markov.random_returning_point(system, exp["max_period"], m, seed=[exp["seed"], i])
        res = markov.close_segment(system, x, t, m)
        ok = res.word == x.window(0, t)
        for s, r in enumerate(res.radii):
            ok &= x.shift(s).window(1 - r, r) == res.orbit.base.shift(s).window(1 - r, r)
        records.append({
            "trial": i, "t": t, "m": m, "word": markov.word_label(res.word),
            "period": res.period, "min_radius": min(res.radii), "passed": bool(ok),
        })
    return records, None


def _close_schottky(cfg, system):
    exp = cfg.experiment
    params = ClosingParams(exp["eps"], exp["delta"], exp["t0"])
    eta = exp["perturbation"]
    records = []
    words = system.cyclic_words(exp["word_length"])
    for i, w in enumerate(words):
        geo = system.closed_geodesic(w)
        v = schottky.UnitTangentVector(geo.repelling + eta, geo.attracting, eta, system.basepoint)
        seg = OrbitSegment(system, v, geo.length)
        res = schottky.close_geodesic_segment(system, seg, params,
                                              max(system.search_radius, len(w)))
        same = schottky.canonical_rotation(res.geodesic.word) == schottky.canonical_rotation(w)
        records.append({
            "trial": i, "word": "".join(w), "length": geo.length,
            "recovered": "".join(res.geodesic.word), "return_distance": res.return_distance,
            "period_slack": res.period_slack, "certified": res.certified,
            "passed": bool(same and res.period_slack <= params.eps),
        })
    return records, None


def run_close(cfg, system, family):
    if system.discrete:
        return _close_markov(cfg, system)
    return _close_schottky(cfg, system)


def run_birkhoff_gap(cfg, system, family):
    exp = cfg.experiment
    probs = exp.get("probs") or [Fraction(1, len(system.symbols))] * len(system.symbols)
    if len(probs) != len(system.symbols):
        raise DynamicsError(f"need {len(system.symbols)} probabilities, got {len(probs)}")
    mu = measures.MarkovStationary(markov.bernoulli_measure(system, [float(p) for p in probs]))
    f = measures.coordinate_value(max(system.symbols))
    eps = exp["eps"]
    params = ClosingParams(eps, exp.get("delta", eps), exp["t0"])
    records, rows = [], []
    for i in range(exp["trials"]):
        rep = measures.closing_approximation_gap(mu, f, params, seed=[exp["seed"], i],
                                                 horizon=exp["horizon"])
        records.append({
            "trial": i, "return_time": rep.return_time, "window": rep.window,
            "gap": rep.gap, "bound": rep.bound, "birkhoff_error": rep.birkhoff_error,
            "shadow_error": rep.shadow_error, "period_slack": rep.period_slack,
            "hypotheses_hold": rep.hypotheses_hold, "passed": rep.passed,
        })
        rows.append((i, rep.gap, rep.bound))
    return records, ("trial", rows)


def _all_orbits(system, T):
    if system.discrete:
        return markov.enumerate_periodic(system, T)
    return [system.periodic_orbit(w) for w in _classes(system, T)]


def _classes(system, T):
    """One cyclically reduced word per conjugacy class, by length then letters."""
    return sorted({schottky.canonical_rotation(w) for w in system.cyclic_words(T)},
                  key=lambda w: (len(w), w))


def run_support_audit(cfg, system, family):
    exp = cfg.experiment
    orbits = _all_orbits(system, exp["max_period"])
    mu = measures.PeriodicCombination(tuple(orbits), tuple([Fraction(1, len(orbits))] * len(orbits)))
    if system.discrete:
        L = cfg.family["length"]
        basis = measures.cylinder_basis(system, L)
    else:
        r = cfg.family["radius"]
        basis = [schottky.HopfBox(c, r) for c in (1j, 1.5j, 0.5j)]
    value = measures.support_audit(mu, basis)
    rec = {"trial": 0, "orbits": len(orbits), "basis": len(basis), "support": value,
           "passed": value == 1}
    return [rec], None


def run_enumerate(cfg, system, family):
    T = cfg.experiment["max_period"]
    records, rows = [], []
    if system.discrete:
        words = [o.base.window(0, int(o.period)) for o in markov.enumerate_periodic(system, T)]
        for n in range(1, T + 1):
            these = [w for w in words if len(w) == n]
            records.append({"trial": n - 1, "period": n, "count": len(these),
                            "words": [markov.word_label(w) for w in these]})
            rows.append((n, len(these), ""))
    else:
        for n in range(1, T + 1):
            these = [w for w in _classes(system, T) if len(w) == n]
            lengths = [schottky.translation_length(system.element(w)) for w in these]
            records.append({"trial": n - 1, "word_length": n, "count": len(these),
                            "words": ["".join(w) for w in these], "lengths": lengths})
            rows.append((n, len(these), ""))
    return records, ("period", rows)


def run_full_support(cfg, system, family):
    exp = cfg.experiment
    nu = measures.PeriodicCombination(
        tuple(build_orbit(system, w) for w in exp["targets"]), tuple(exp["weights"])
    )
    x0 = build_orbit(system, exp["base"][0])
    base = measures.bl_distance(measures.orbit_measure(x0), nu, family)
    records, rows = [], []
    for i, n in enumerate(exp["ns"]):
        term = measures.full_support_term(nu, x0, n)
        d = measures.bl_distance(term, nu, family)
        predicted = base / n
        exact = d == predicted if system.discrete else abs(d - predicted) <= 1e-9
        records.append({"trial": i, "n": n, "distance": d, "predicted": predicted,
                        "passed": bool(exact)})
        rows.append((n, d, predicted))
    return records, ("n", rows)


RUNNERS = {
    "glue": run_glue,
    "close": run_close,
    "birkhoff-gap": run_birkhoff_gap,
    "support-audit": run_support_audit,
    "enumerate": run_enumerate,
    "full-support-sequence": run_full_support,
}


# ---------------------------------------------------------------------------
# entry point


def render(cfg: ExperimentConfig) -> tuple[str, str | None]:
    """Report text and table text for ``cfg``; pure given the config."""
    system = build_system(cfg)
    family = build_family(cfg, system)
    records, table = RUNNERS[cfg.name](cfg, system, family)
    head = {"record": "config", "experiment": cfg.name, "config": cfg.embedded}
    lines = [_dump(head)] + [_dump({"record": "trial", **r}) for r in records]
    report = "\n".join(lines) + "\n"
    if table is None:
        return report, None
    key, rows = table
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([key, "measured", "bound"])
    for a, b, c in rows:
        w.writerow([a, _cell(b), _cell(c)])
    return report, buf.getvalue()


def _cell(v):
    if isinstance(v, Fraction):
        return repr(float(v))
    if isinstance(v, float):
        return repr(v)
    return v


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="orbitglue",
        description="Periodic-orbit gluing, closing and measure audits.",
        epilog=f"The default output directory is taken from ${OUTPUT_ENV} when set.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("validate-config",):
        sp = sub.add_parser(name, help=f"run the {name} experiment" if name in EXPERIMENTS
                            else "check a config file and exit")
        sp.add_argument("--config", required=True, help="INI config, or a .jsonl report to re-run")
        sp.add_argument("--seed", type=int, help="random seed (overrides [experiment] seed)")
        sp.add_argument("--N", type=int, help="repetition scale for glue")
        sp.add_argument("--trials", type=int, help="number of trials")
        sp.add_argument("--output-dir", help="directory for report and table")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override any config scalar")
    return p


def _overrides(args) -> dict:
    out = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        section, dot, field = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError("command line", None, f"bad --set {item!r}, expected SECTION.KEY=VALUE")
        out[(section, field)] = value.strip()
    for flag, section, field in (("seed", "experiment", "seed"), ("N", "experiment", "N"),
                                 ("trials", "experiment", "trials"),
                                 ("output_dir", "output", "dir")):
        v = getattr(args, flag)
        if v is not None:
            out[(section, field)] = str(v)
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        overrides = _overrides(args)
        cfg = load(args.config, overrides)
        if args.command != "validate-config" and args.command != cfg.name:
            raise ConfigError("experiment", "name",
                              f"config describes {cfg.name!r}, not {args.command!r}", args.config)
        if args.command == "validate-config":
            build_system(cfg)
            print(f"ok: {cfg.name}")
            return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DynamicsError as exc:
        print(f"error: [system] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report, table = render(cfg)
    except DynamicsError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    path = cfg.report_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report, encoding="utf-8")
    tpath = cfg.table_path()
    if table is not None and tpath is not None:
        tpath.write_text(table, encoding="utf-8")
    trials = report.count("\n") - 1
    failed = report.count('"passed":false')
    print(f"{cfg.name}: {trials} records, {failed} failed -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
