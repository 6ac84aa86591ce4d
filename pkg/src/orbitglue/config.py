"""Experiment configuration files.

A config is an INI file with the sections ``[system]``, ``[family]``,
``[experiment]`` and ``[output]``::

    [system]
    kind = markov
    adjacency = full
    size = 2

    [family]
    kind = cylinders
    length = 2

    [experiment]
    name = glue
    targets = 0; 1
    weights = 1/2, 1/2
    N = 32

Every key is checked against a schema; unknown keys, out-of-range numbers
and malformed literals raise :class:`ConfigError` naming the line and field.
"""
from __future__ import annotations

import configparser
import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

OUTPUT_ENV = "ORBITGLUE_OUTPUT_DIR"

EXPERIMENTS = ("glue", "close", "birkhoff-gap", "support-audit", "enumerate", "full-support-sequence")
STOCHASTIC = ("close", "birkhoff-gap")


class ConfigError(ValueError):
    """Malformed configuration; ``str()`` is a single-line diagnostic."""

    def __init__(self, section: str, key: str | None, message: str, source: str = "", line: int | None = None):
        self.section, self.key, self.line = section, key, line
        where = f"{source}:{line}: " if source and line else (f"{source}: " if source else "")
        field = f"[{section}] {key}" if key else f"[{section}]"
        super().__init__(f"{where}{field}: {message}")


# ---------------------------------------------------------------------------
# value parsers; each takes the raw string and returns a value or raises ValueError


def _int(lo=None, hi=None):
    def parse(text):
        v = int(text)
        if lo is not None and v < lo or hi is not None and v > hi:
            raise ValueError(f"must lie in [{lo}, {hi if hi is not None else 'inf'}], got {v}")
        return v
    return parse


def _float(lo=None, hi=None, open_lo=False):
    def parse(text):
        v = float(text)
        if v != v:
            raise ValueError("not a number")
        if lo is not None and (v < lo or open_lo and v == lo) or hi is not None and v > hi:
            bracket = "(" if open_lo else "["
            raise ValueError(f"must lie in {bracket}{lo}, {hi if hi is not None else 'inf'}], got {v}")
        return v
    return parse


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


def _complex(text):
    return complex(text.replace(" ", ""))


def _fractions(text):
    out = [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    if not out:
        raise ValueError("empty list")
    if any(w < 0 for w in out):
        raise ValueError("negative entry")
    return out


def _intlist(text):
    out = [int(t) for t in text.split(",") if t.strip()]
    if not out or any(n < 1 for n in out):
        raise ValueError("expected a list of positive integers")
    return out


def _words(text):
    out = [w.strip() for w in text.split(";") if w.strip()]
    if not out:
        raise ValueError("expected ';'-separated words")
    return out


def _pairs(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", tok)
        if not m:
            raise ValueError(f"bad pair {tok!r}, expected i-j")
        out.append((int(m[1]), int(m[2])))
    return out


def _adjacency(text):
    m = re.fullmatch(r"(full|golden-mean|renewal|pairs)(?:\((\d+)\))?", text.strip())
    if not m:
        raise ValueError(f"expected full, golden-mean, renewal(k) or pairs, got {text!r}")
    return m[1] if m[2] is None else f"{m[1]}({m[2]})"


def _output_name(text):
    if "/" in text or "\\" in text:
        raise ValueError("file names only; set the directory with dir")
    return text


# schema: section -> key -> (parser, default); default None means optional with no value
SCHEMA = {
    "system": {
        "kind": (_choice("markov", "schottky"), "markov"),
        "adjacency": (_adjacency, "full"),
        "size": (_int(1, 4096), "2"),
        "pairs": (_pairs, None),
        "preset": (_choice("symmetric-schottky"), "symmetric-schottky"),
        "center": (_float(0.0, open_lo=True), "2"),
        "radius": (_float(0.0, open_lo=True), "1"),
        "scale": (_float(0.0, 1.0, open_lo=True), "0.25"),
        "basepoint": (_complex, "1j"),
        "search_radius": (_int(1, 6), "3"),
    },
    "family": {
        "kind": (_choice("cylinders", "coordinate", "geometric"), None),
        "length": (_int(1, 10), "2"),
        "radius": (_float(0.0, 2.0, open_lo=True), "0.35"),
    },
    "experiment": {
        "name": (_choice(*EXPERIMENTS), None),
        "seed": (_int(0), None),
        "targets": (_words, None),
        "weights": (_fractions, None),
        "N": (_int(1, 1 << 16), "32"),
        "sweep": (_int(1, 8), "2"),
        "trials": (_int(1, 100000), None),
        "m": (_int(0, 64), "8"),
        "max_period": (_int(1, 12), "3"),
        "word_length": (_int(1, 6), "4"),
        "perturbation": (_float(0.0), "0.001"),
        "eps": (_float(0.0, open_lo=True), "0.1"),
        "delta": (_float(0.0, open_lo=True), None),
        "t0": (_float(0.0, open_lo=True), None),
        "probs": (_fractions, None),
        "horizon": (_int(64, 1 << 22), "65536"),
        "base": (_words, None),
        "ns": (_intlist, "2, 4, 8, 16"),
    },
    "output": {
        "dir": (str, None),
        "report": (_output_name, None),
        "table": (_output_name, None),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration.

    ``resolved`` maps section -> key -> string with every default filled in;
    it is embedded in reports and can be fed back as a config.
    """

    system: dict
    family: dict
    experiment: dict
    output: dict
    resolved: dict

    @property
    def name(self) -> str:
        return self.experiment["name"]

    @property
    def seed(self):
        return self.experiment.get("seed")

    def report_path(self) -> Path:
        return Path(self.output["dir"]) / self.output["report"]

    def table_path(self) -> Path | None:
        t = self.output["table"]
        return None if t == "none" else Path(self.output["dir"]) / t

    @property
    def embedded(self) -> dict:
        """Resolved config without output paths, which never affect results."""
        return {s: dict(v) for s, v in self.resolved.items() if s != "output"}

    def to_ini(self) -> str:
        lines = []
        for section, items in self.embedded.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in items.items())
            lines.append("")
        return "\n".join(lines)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            current = m[1].strip()
            if key is None and current == section:
                return no
            continue
        if current == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
            return no
    return None


def _defaults(kind: str, name: str) -> dict:
    """Experiment- and system-dependent defaults."""
    d = {"trials": {"close": "1000" if kind == "markov" else "1", "birkhoff-gap": "200"}.get(name, "1")}
    if kind == "schottky":
        d["eps"] = "0.01"
        d["delta"] = "0.01"
        d["t0"] = "1"
    else:
        d["t0"] = "8"
    return d


def parse_text(text: str, source: str = "", overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate config text.

    ``overrides`` maps ``(section, key)`` to raw strings and wins over the file.
    """
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        msg = str(exc).splitlines()[0]
        raise ConfigError("config", None, msg, source, line) from None

    def fail(section, key, msg):
        raise ConfigError(section, key, msg, source, _line_of(text, section, key))

    raw: dict = {s: {} for s in SCHEMA}
    for section in cp.sections():
        if section not in SCHEMA:
            fail(section, None, "unknown section")
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                fail(section, key, "unknown key")
            raw[section][key] = value.strip()
    for (section, key), value in (overrides or {}).items():
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(section, key, "unknown key (command-line override)", source)
        raw[section][key] = str(value)

    if "name" not in raw["experiment"]:
        fail("experiment", "name", "missing; expected one of " + ", ".join(EXPERIMENTS))
    kind = raw["system"].get("kind", "markov")
    name = raw["experiment"]["name"]
    dyn = _defaults(kind, name)
    fam_default = "geometric" if kind == "schottky" else "cylinders"
    out_default = {
        "dir": os.environ.get(OUTPUT_ENV, "."),
        "report": f"{name}.jsonl",
        "table": f"{name}.csv",
    }

    values: dict = {s: {} for s in SCHEMA}
    resolved: dict = {s: {} for s in SCHEMA}
    for section, keys in SCHEMA.items():
        for key, (parser, default) in keys.items():
            text_value = raw[section].get(key)
            if text_value is None:
                text_value = dyn.get(key) if section == "experiment" else None
            if text_value is None and section == "output":
                text_value = out_default[key]
            if text_value is None and section == "family" and key == "kind":
                text_value = fam_default
            if text_value is None:
                text_value = default
            if text_value is None:
                continue
            try:
                values[section][key] = parser(text_value)
            except (ValueError, ZeroDivisionError) as exc:
                fail(section, key, str(exc))
            resolved[section][key] = text_value

    exp = values["experiment"]
    sysv = values["system"]
    if name in STOCHASTIC and "seed" not in exp:
        fail("experiment", "seed", f"required for {name}")
    if "weights" in exp:
        total = sum(exp["weights"])
        if total != 1:
            fail("experiment", "weights", f"weights sum to {total}, not 1")
        if len(exp["weights"]) != len(exp.get("targets", [])):
            fail("experiment", "weights", "need exactly one weight per target")
    if name in ("glue", "full-support-sequence") and "targets" not in exp:
        fail("experiment", "targets", f"required for {name}")
    if name in ("glue", "full-support-sequence") and "weights" not in exp:
        fail("experiment", "weights", f"required for {name}")
    if name == "full-support-sequence" and len(exp.get("base", [])) != 1:
        fail("experiment", "base", "exactly one base orbit word is required")
    if kind == "markov":
        if sysv["adjacency"] == "pairs" and not sysv.get("pairs"):
            fail("system", "pairs", "required when adjacency = pairs")
        if values["family"]["kind"] == "geometric":
            fail("family", "kind", "geometric families need a schottky system")
        if "probs" in exp:
            if sum(exp["probs"]) != 1:
                fail("experiment", "probs", f"probabilities sum to {sum(exp['probs'])}, not 1")
    else:
        if values["family"]["kind"] != "geometric":
            fail("family", "kind", "schottky systems use the geometric family")
        if name == "birkhoff-gap":
            fail("experiment", "name", "birkhoff-gap runs on markov systems only")
    if "delta" in exp and exp["delta"] > exp["eps"]:
        fail("experiment", "delta", "delta must not exceed eps")
    return ExperimentConfig(values["system"], values["family"], exp, values["output"], resolved)


def load(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a config file, or the config embedded in a ``.jsonl`` report."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError("config", None, f"cannot read: {exc}", str(path)) from None
    if path.suffix == ".jsonl":
        try:
            head = json.loads(text.splitlines()[0])
            resolved = head["config"]
        except (IndexError, KeyError, ValueError):
            raise ConfigError("config", None, "report has no embedded config", str(path), 1) from None
        text = "\n".join(f"[{s}]\n" + "\n".join(f"{k} = {v}" for k, v in items.items())
                         for s, items in resolved.items())
    return parse_text(text, str(path), overrides)
