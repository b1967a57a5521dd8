"""Command-line front end.

Exit codes: 0 when every configured assertion passes, 1 when a check fails,
2 for an invalid configuration (with ``file:line`` diagnostics) and 3 when a
hypothesis gate of an inequality is violated.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import battery
from . import functions as F
from . import harness as H
from . import kernels as K
from . import operators as ops
from . import spaces as S
from . import weights as W
from .errors import ConfigurationError, GateError, RoughMorreyError
from .grid import BallFamily, dyadic_family, dyadic_radii, make_grid

SCHEMA_VERSION = 1
OUTPUT_ENV = "ROUGHMORREY_OUTPUT_DIR"

# Allowed keys and value types per section; nested dicts describe subsections.
NUM = (int, float)
SCHEMA = {
    "seed": int,
    "output": str,
    "grid": {"n": int, "L": NUM, "h": NUM},
    "kernel": {"name": str, "N": int, "s": NUM, "csv": str, "column": int},
    "weight": {"kind": str, "alpha": NUM, "center": list, "c": NUM, "csv": str, "column": int},
    "functions": {"f": dict, "b": dict},
    "space": {"p": NUM, "s": NUM, "kappa": NUM, "lambda": NUM, "phi1": dict, "phi2": dict, "q": NUM},
    "family": {"stride": int, "radii": list, "r_min": NUM, "r_max": NUM, "center_box": NUM},
    "operator": {"kind": str, "t_grid": str},
    "norm": {"kind": str, "weak": bool},
    "cases": list,
    "count": int,
}
FUNCTION_KEYS = {"kind", "center", "width", "radius", "seed", "cutoff", "index", "slope", "offset"}
PHI_KEYS = {"form", "beta", "kappa", "exact"}
CASE_KEYS = {"id", "ceiling", "T_max", "count", "probe"}


# --- JSON with fixed float formatting --------------------------------------

def _json_value(v, indent: int) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}"{k}": {_json_value(v[k], indent + 1)}' for k in sorted(v, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        v = list(v)
        if not v:
            return "[]"
        return "[" + ", ".join(_json_value(x, indent + 1) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    return _json_value(obj, 0) + "\n"


# --- configuration --------------------------------------------------------

class ConfigError(ConfigurationError):
    def __init__(self, message, line=None, source="<config>"):
        loc = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(loc + message)
        self.line = line


def _line(node) -> int:
    return node.start_mark.line + 1


def _check_mapping(node, allowed, where, source, errors):
    if not isinstance(node, yaml.MappingNode):
        errors.append(ConfigError(f"{where} must be a mapping", _line(node), source))
        return
    for knode, vnode in node.value:
        key = knode.value
        if key not in allowed:
            errors.append(ConfigError(f"unknown key {key!r} in {where}", _line(knode), source))


def validate_nodes(root, source: str) -> list:
    """Structural check of the YAML node tree: unknown keys and wrong shapes."""
    errors = []
    if root is None:
        return [ConfigError("empty configuration", None, source)]
    _check_mapping(root, SCHEMA, "top level", source, errors)
    if errors and not isinstance(root, yaml.MappingNode):
        return errors
    for knode, vnode in root.value:
        spec = SCHEMA.get(knode.value)
        if isinstance(spec, dict):
            _check_mapping(vnode, spec, knode.value, source, errors)
            if knode.value == "functions" and isinstance(vnode, yaml.MappingNode):
                for fk, fv in vnode.value:
                    _check_mapping(fv, FUNCTION_KEYS, f"functions.{fk.value}", source, errors)
            if knode.value == "space" and isinstance(vnode, yaml.MappingNode):
                for sk, sv in vnode.value:
                    if sk.value in ("phi1", "phi2"):
                        _check_mapping(sv, PHI_KEYS, f"space.{sk.value}", source, errors)
        elif knode.value == "cases":
            if not isinstance(vnode, yaml.SequenceNode):
                errors.append(ConfigError("cases must be a list", _line(vnode), source))
            else:
                for item in vnode.value:
                    _check_mapping(item, CASE_KEYS, "case", source, errors)
    return errors


def load_config(path) -> tuple[dict, dict]:
    """Parse and validate; returns the data and a map from dotted keys to line numbers."""
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", None, source) from None
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    errors = validate_nodes(root, source)
    if errors:
        raise ConfigError("; ".join(str(e) for e in errors), errors[0].line, source) if len(errors) > 1 else errors[0]
    lines = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{prefix}.{k.value}" if prefix else k.value
                lines[key] = _line(k)
                walk(v, key)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[f"{prefix}[{i}]"] = _line(v)
                walk(v, f"{prefix}[{i}]")

    walk(root, "")
    data = yaml.safe_load(text)
    _check_types(data, lines, source)
    return data, lines


def _check_types(data, lines, source):
    for key, spec in SCHEMA.items():
        if key not in data:
            continue
        val = data[key]
        if isinstance(spec, dict):
            for sub, typ in spec.items():
                if sub in val and not _is_type(val[sub], typ):
                    raise ConfigError(f"{key}.{sub} has the wrong type", lines.get(f"{key}.{sub}"), source)
        elif not _is_type(val, spec):
            raise ConfigError(f"{key} has the wrong type", lines.get(key), source)


def _is_type(v, typ) -> bool:
    if typ is NUM:
        return isinstance(v, (int, float)) and not isinstance(v, bool)
    if typ is int:
        return isinstance(v, int) and not isinstance(v, bool)
    return isinstance(v, typ)


class Experiment:
    """Objects built from a validated configuration."""

    def __init__(self, data: dict, lines: dict | None = None, source: str = "<config>"):
        self.data = data
        self.lines = lines or {}
        self.source = source
        self.seed = int(data.get("seed", 0))
        try:
            self.grid = self._grid()
            self.space = data.get("space", {})
            self.p = float(self.space.get("p", 2.0))
            self.s = float(self.space.get("s", math.inf))
            self.kernel = self._kernel()
            self.weight = self._weight()
            self.family = self._family()
            self.f = self._function("f")
            self.b = self._function("b")
        except ConfigError:
            raise
        except ConfigurationError as exc:
            raise ConfigError(str(exc), None, source) from None

    def err(self, message, key):
        return ConfigError(message, self.lines.get(key), self.source)

    def _grid(self):
        g = self.data.get("grid")
        if g is None:
            raise self.err("missing grid block", "grid")
        try:
            return make_grid(g.get("n", 1), float(g.get("L", 1.0)), float(g.get("h", 2.0**-8)))
        except ConfigurationError as exc:
            raise self.err(str(exc), "grid") from None

    def _kernel(self):
        k = self.data.get("kernel", {"name": "sign"})
        s = float(k.get("s", self.s))
        try:
            if "csv" in k:
                return K.load_kernel_csv(k["csv"], self.grid.n, s=s, column=int(k.get("column", 0)))
            return K.make_kernel(k.get("name", "sign"), self.grid.n, int(k.get("N", 256)), s)
        except ConfigurationError as exc:
            raise self.err(str(exc), "kernel") from None
        except OSError as exc:
            raise self.err(f"cannot read kernel file: {exc.strerror}", "kernel.csv") from None

    def _weight(self):
        w = self.data.get("weight", {"kind": "constant"})
        kind = w.get("kind", "constant")
        try:
            if kind == "constant":
                return W.constant_weight(self.grid, float(w.get("c", 1.0)))
            if kind == "power":
                return W.power_weight(self.grid, float(w.get("alpha", 0.0)), w.get("center"))
            if kind == "table":
                if "csv" not in w:
                    raise self.err("table weight needs a csv path", "weight")
                values = np.loadtxt(w["csv"], delimiter=",", ndmin=2)[:, int(w.get("column", 0))]
                return W.table_weight(self.grid, values, Path(w["csv"]).stem)
        except ConfigurationError as exc:
            raise self.err(str(exc), "weight") from None
        except (OSError, ValueError, IndexError) as exc:
            raise self.err(f"cannot read weight table: {exc}", "weight.csv") from None
        raise self.err(f"unknown weight kind {kind!r}", "weight.kind")

    def _family(self):
        fam = self.data.get("family", {})
        grid = self.grid
        if "radii" in fam:
            radii = np.array(fam["radii"], dtype=float)
        else:
            radii = dyadic_radii(grid, fam.get("r_min"), fam.get("r_max", grid.L / 16))
        try:
            base = dyadic_family(grid, int(fam.get("stride", 8)), radii=radii)
            box = fam.get("center_box")
            if box is not None:
                keep = np.all(np.abs(base.centers) < float(box) - radii.max(), axis=1)
                if not np.any(keep):
                    raise ConfigurationError("family.center_box leaves no centers")
                base = BallFamily(grid, base.centers[keep], radii)
            return base
        except ConfigurationError as exc:
            raise self.err(str(exc), "family") from None

    def _function(self, name):
        spec = self.data.get("functions", {}).get(name)
        if spec is None:
            return None
        try:
            return F.make_function(self.grid, spec)
        except ConfigurationError as exc:
            raise self.err(str(exc), f"functions.{name}") from None

    def phi(self, which):
        spec = self.space.get(which, {"form": "kappa_weight", "kappa": float(self.space.get("kappa", 0.5))})
        form = spec.get("form")
        try:
            if form == "power":
                return S.phi_power(float(spec.get("beta", 0.0)))
            if form == "kappa_weight":
                return S.phi_kappa(float(spec.get("kappa", self.space.get("kappa", 0.5))), self.weight,
                                   bool(spec.get("exact", False)))
            if form == "inv_weight":
                return S.phi_inv_weight(self.weight, bool(spec.get("exact", False)))
        except ConfigurationError as exc:
            raise self.err(str(exc), f"space.{which}") from None
        raise self.err(f"unknown phi form {form!r}", f"space.{which}.form")

    def operator(self):
        spec = self.data.get("operator", {"kind": "singular"})
        kind = spec.get("kind", "singular")
        t_grid = ops.default_t_grid(self.grid, exact=spec.get("t_grid") == "exact")
        needs_b = kind in ops.COMMUTATORS
        if needs_b and self.b is None:
            raise self.err(f"operator {kind!r} needs functions.b", "operator.kind")
        return ops.OperatorSpec(kind, None if kind == "maximal" else self.kernel,
                                self.b if needs_b else None, t_grid=t_grid)

    def test_functions(self, count=None):
        count = int(count or self.data.get("count", 50))
        fam = self.data.get("family", {})
        box = fam.get("center_box")
        support = None
        if box is not None:
            support = np.all(np.abs(self.grid.centers) <= float(box), axis=1)
        return F.test_family(self.grid, self.seed, count, support=support)


# --- subcommands ----------------------------------------------------------

def _out_dir(data: dict, default="roughmorrey-out") -> Path:
    path = Path(os.environ.get(OUTPUT_ENV) or data.get("output", default))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, obj: dict):
    path.write_text(dumps({"schema": SCHEMA_VERSION, **obj}))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])


def cmd_apply(ex: Experiment, out: Path) -> int:
    if ex.f is None:
        raise ex.err("apply needs functions.f", "functions")
    spec = ex.operator()
    tf = ops.apply(spec, ex.f, ex.grid)
    n = ex.grid.n
    _write_csv(out / "apply.csv", [f"x{a}" for a in range(n)] + ["value"],
               ([*map(float, c), float(v)] for c, v in zip(ex.grid.centers, tf)))
    _write_json(out / "apply.json", {"command": "apply", "operator": spec.kind,
                                     "max_abs": float(np.max(np.abs(tf))),
                                     "l2": S.lp_w_norm(tf, None, 2.0, grid=ex.grid)})
    return 0


def cmd_norm(ex: Experiment, out: Path) -> int:
    if ex.f is None:
        raise ex.err("norm needs functions.f", "functions")
    spec = ex.data.get("norm", {"kind": "generalized_weighted_morrey"})
    kind = spec.get("kind", "generalized_weighted_morrey")
    weak = bool(spec.get("weak", False))
    if kind == "generalized_weighted_morrey":
        rep = S.generalized_weighted_morrey_norm(ex.f, ex.p, ex.phi("phi1"), ex.weight, ex.family, weak)
    elif kind == "weighted_morrey":
        rep = S.weighted_morrey_norm(ex.f, ex.p, float(ex.space.get("kappa", 0.5)), ex.weight, ex.family, weak)
    elif kind == "classical_morrey":
        rep = S.classical_morrey_norm(ex.f, ex.p, float(ex.space.get("lambda", 0.0)), ex.family, weak)
    elif kind == "weighted_lebesgue":
        val = (S.weak_lp_w_norm if weak else S.lp_w_norm)(ex.f, ex.weight, ex.p)
        _write_json(out / "norm.json", {"command": "norm", "kind": kind, "weak": weak, "value": val})
        return 0
    else:
        raise ex.err(f"unknown norm kind {kind!r}", "norm.kind")
    (out / "norm.csv").write_text(rep.to_csv())
    _write_json(out / "norm.json", {"command": "norm", "kind": kind, "weak": weak, **rep.summary()})
    return 0


def cmd_ap(ex: Experiment, out: Path) -> int:
    q = float(ex.space.get("q", ex.p))
    rep = W.class_characteristic(ex.weight, q, ex.family)
    ainf, p_inf = W.a_infinity_characteristic(ex.weight, ex.family)
    _write_json(out / "ap.json", {"command": "ap", "weight": ex.weight.name, **rep.as_dict(),
                                  "a_infinity": ainf, "a_infinity_p": p_inf})
    return 0


def cmd_bmo(ex: Experiment, out: Path) -> int:
    b = ex.b if ex.b is not None else ex.f
    if b is None:
        raise ex.err("bmo needs functions.b", "functions")
    rep = S.bmo_table(b, ex.family)
    jn = S.jn_lp_equivalence(b, ex.p, ex.family)
    (out / "bmo.csv").write_text(rep.to_csv())
    _write_json(out / "bmo.json", {
        "command": "bmo", "bmo": rep.value, "argmax_center": list(map(float, rep.argmax_center)),
        "argmax_radius": rep.argmax_radius, "bmo_w": S.bmo_w_norm(b, ex.weight, ex.family),
        "jn_p": ex.p, "jn_ratio": jn.ratio, "jn_degenerate": jn.degenerate,
    })
    return 0


def _run_case(ex: Experiment, item: dict, index: int, functions):
    cid = item.get("id")
    if cid not in H.CASE_IDS:
        raise ex.err(f"unknown case id {cid!r}", f"cases[{index}]")
    kwargs = dict(w=ex.weight, p=ex.p, s=ex.s, family=ex.family,
                  ceiling=float(item.get("ceiling", H.DEFAULT_CEILING)), T_max=item.get("T_max"))
    probe = bool(item.get("probe", True))
    if cid in ("Z316", "Z317", "Z47", "Z48"):
        case = H.InequalityCase(cid, phi1=ex.phi("phi1"), phi2=ex.phi("phi2"), **kwargs)
        rep = H.zygmund_condition(case)
        rows = [[cid, -1, *map(float, ex.family.centers[i]), float(ex.family.radii[j]), math.nan, math.nan,
                 float(rep.table[i, j])] for i, j in ex.family]
        return {**rep.summary(), "verdict": rep.verdict}, rows
    if cid in ("T9-strong", "T9-weak", "T15"):
        case = H.InequalityCase(cid, functions, operator=ex.operator(), phi1=ex.phi("phi1"), phi2=ex.phi("phi2"),
                                **kwargs)
        rep = H.boundedness_ratio(case)
        return rep.summary(), [[cid, k, *([math.nan] * ex.grid.n), math.nan, math.nan, math.nan, float(r)]
                               for k, r in enumerate(rep.ratios)]
    if cid in ("L2-strong", "L2-psmall", "L2-weak"):
        rep = H.lemma2_local(H.InequalityCase(cid, functions, operator=ex.operator(), **kwargs), probe)
        return rep.summary(), list(rep.rows())
    if cid in ("L5-strong", "L5-psmall"):
        rep = H.lemma5_local(H.InequalityCase(cid, functions, operator=ex.operator(), **kwargs), probe)
        return rep.summary(), list(rep.rows())
    if cid == "LEM10":
        worst = 0.0
        rng = F.rng_for(ex.seed, 10_000 + index)
        for i, j in ex.family:
            y = ex.grid.centers[rng.integers(0, ex.grid.size)]
            worst = max(worst, H.lemma10_check(ex.kernel, ex.weight, ex.p, ex.s, ex.family.ball(i, j), y).ratio)
        ceiling = float(item.get("ceiling", H.DEFAULT_CEILING))
        return {"case": cid, "C_emp": worst, "pass": worst <= ceiling}, []
    # STEP11 / STEP12: the proof-step suite on the first test function
    rep = H.proof_step_suite(ex.operator(), ex.weight, ex.p, ex.s, functions[0], ex.family)
    return {"case": cid, **rep.summary(), "pass": rep.consistent}, []


def cmd_verify(ex: Experiment, out: Path) -> int:
    cases = ex.data.get("cases")
    if not cases:
        raise ex.err("verify needs a nonempty cases list", "cases")
    functions = ex.test_functions()
    verdicts, rows = [], []
    for index, item in enumerate(cases):
        summary, case_rows = _run_case(ex, item, index, functions)
        verdicts.append(summary)
        rows.extend(case_rows)
    n = ex.grid.n
    _write_csv(out / "verify.csv", ["case", "function", *[f"x{a}" for a in range(n)], "radius", "lhs", "rhs", "ratio"],
               rows)
    _write_json(out / "verify.json", {"command": "verify", "seed": ex.seed, "assumption": H.ASSUMPTION,
                                      "cases": verdicts})
    return 0 if all(v.get("pass") for v in verdicts) else 1


# --- presets --------------------------------------------------------------

PRESETS = {
    "weighted-morrey": {
        "seed": 7,
        "grid": {"n": 1, "L": 4.0, "h": 2.0**-8},
        "kernel": {"name": "sign", "s": 8.0},
        "weight": {"kind": "power", "alpha": 0.3},
        "space": {"p": 2.0, "s": 8.0, "phi1": {"form": "kappa_weight", "kappa": 0.5, "exact": True},
                  "phi2": {"form": "kappa_weight", "kappa": 0.5, "exact": True}},
        "family": {"stride": 32, "r_max": 0.125, "center_box": 1.0},
        "cases": [{"id": "Z316"}, {"id": "Z47"}],
    },
    "unweighted": {
        "seed": 7,
        "grid": {"n": 1, "L": 4.0, "h": 2.0**-8},
        "kernel": {"name": "sign", "s": 8.0},
        "weight": {"kind": "constant"},
        "space": {"p": 2.0, "s": 8.0, "phi1": {"form": "power", "beta": -0.25},
                  "phi2": {"form": "power", "beta": -0.25}},
        "family": {"stride": 32, "r_max": 0.125, "center_box": 1.0},
        "count": 10,
        "cases": [{"id": "Z316"}, {"id": "T9-strong"}],
    },
    "maximal": {
        "seed": 7,
        "grid": {"n": 1, "L": 4.0, "h": 2.0**-8},
        "kernel": {"name": "one"},
        "weight": {"kind": "power", "alpha": 0.3},
        "operator": {"kind": "maximal"},
        "space": {"p": 2.0, "phi1": {"form": "kappa_weight", "kappa": 0.5},
                  "phi2": {"form": "kappa_weight", "kappa": 0.5}},
        "family": {"stride": 32, "r_max": 0.125, "center_box": 1.0},
        "count": 10,
        "cases": [{"id": "L2-strong"}, {"id": "T9-strong"}],
    },
}


def cmd_suite(name: str, seed: int, out: Path) -> int:
    if name == "paper-core":
        results = battery.run_battery(seed)
        for r in results:
            print(r.line())
        _write_json(out / "suite.json", {"command": "suite", "preset": name, "seed": seed,
                                         "criteria": [r.as_dict() for r in results]})
        return 0 if all(r.passed for r in results) else 1
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from paper-core, {', '.join(sorted(PRESETS))}")
    data = dict(PRESETS[name], seed=seed)
    return cmd_verify(Experiment(data, source=f"<preset {name}>"), out)


# --- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roughmorrey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("apply", "norm", "ap", "bmo", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML experiment configuration")
        sp.add_argument("--output", help="output directory (overridden by $%s)" % OUTPUT_ENV)
    sp = sub.add_parser("suite")
    sp.add_argument("--preset", required=True)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--output", help="output directory (overridden by $%s)" % OUTPUT_ENV)
    return parser


COMMANDS = {"apply": cmd_apply, "norm": cmd_norm, "ap": cmd_ap, "bmo": cmd_bmo, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            out = _out_dir({"output": args.output} if args.output else {})
            return cmd_suite(args.preset, args.seed, out)
        data, lines = load_config(args.config)
        if args.output:
            data["output"] = args.output
        ex = Experiment(data, lines, str(args.config))
        out = _out_dir(data)
        return COMMANDS[args.command](ex, out)
    except GateError as exc:
        print(f"gate violation ({exc.hypothesis}): {exc}", file=sys.stderr)
        return 3
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except RoughMorreyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
