"""Experiment configuration: structured text in, validated model + suite out.

Configs are JSON with potential tables keyed by admissible word strings
("01" -> value).  Numeric literals are parsed exactly as decimals before
conversion, so a config value round-trips without binary surprises in the
hash.  Validation collects every error, not just the first.
"""

import hashlib
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .errors import ParseError, ValidationError
from .shift import validate_system
from .suspension import normalize_model
from .transfer import CylinderPotential

_TOP_KEYS = {"name", "model", "experiments"}
_MODEL_KEYS = {"k", "transition", "potentials"}
_POTENTIALS = ("f", "tau", "ghat")
_EXPERIMENT_KEYS = {"name", "kind", "params", "seed"}
KNOWN_KINDS = ("pressure_table", "rate_scan", "pole_curve", "ldp_sweep",
               "zeta_band", "tauberian_check")


@dataclass
class ExperimentConfig:
    name: str
    model: dict
    experiments: list
    raw: dict
    config_hash: str
    path: str = ""
    _model_obj: object = field(default=None, repr=False)

    def build_model(self):
        """Pressure-normalized suspension model from the model section."""
        if self._model_obj is None:
            sys = validate_system(self.model["k"], self.model["transition"], 0)
            pots = {}
            for pname in _POTENTIALS:
                table = {tuple(int(c) for c in key): float(v)
                         for key, v in self.model["potentials"][pname].items()}
                m = len(next(iter(table))) - 1
                pots[pname] = CylinderPotential(sys, m, table)
            self._model_obj = normalize_model(sys, pots["f"], pots["tau"], pots["ghat"])
        return self._model_obj


def canonical_json(obj) -> str:
    def default(o):
        if isinstance(o, Decimal):
            return str(o.normalize())
        raise TypeError(f"not serializable: {o!r}")
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=default)


def config_hash(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()[:16]


def _check_potential(errors, k, transition, pname, table):
    if not isinstance(table, dict) or not table:
        errors.append(f"model.potentials.{pname}: expected a non-empty table")
        return
    lengths = {len(key) for key in table}
    if len(lengths) != 1:
        errors.append(f"model.potentials.{pname}: keys of mixed lengths {sorted(lengths)}")
        return
    width = lengths.pop()
    seen = set()
    for key, val in table.items():
        if not key.isdigit() or any(int(c) >= k for c in key):
            errors.append(f"model.potentials.{pname}[{key!r}]: not a word over 0..{k - 1}")
            continue
        word = tuple(int(c) for c in key)
        if any(not transition[a][b] for a, b in zip(word, word[1:])):
            errors.append(f"model.potentials.{pname}[{key!r}]: inadmissible word")
            continue
        if not isinstance(val, (int, Decimal)):
            errors.append(f"model.potentials.{pname}[{key!r}]: non-numeric value {val!r}")
            continue
        if pname == "tau" and Decimal(val) <= 0:
            errors.append(f"model.potentials.tau[{key!r}]: roof value {val} must be > 0")
        seen.add(word)

    def admissible(width):
        words = [(a,) for a in range(k)]
        for _ in range(width - 1):
            words = [w + (b,) for w in words for b in range(k) if transition[w[-1]][b]]
        return words

    missing = [w for w in admissible(width) if w not in seen]
    if missing:
        as_str = "".join(str(c) for c in missing[0])
        errors.append(f"model.potentials.{pname}: missing {len(missing)} admissible "
                      f"word(s), e.g. {as_str!r}")


def validate_raw(raw: dict) -> list:
    """All validation errors of a parsed config (empty list if valid)."""
    errors = []
    if not isinstance(raw, dict):
        return ["top level: expected an object"]
    for key in raw:
        if key not in _TOP_KEYS:
            errors.append(f"top level: unknown key {key!r}")
    model = raw.get("model")
    if not isinstance(model, dict):
        errors.append("model: section missing or not an object")
        model = {}
    for key in model:
        if key not in _MODEL_KEYS:
            errors.append(f"model: unknown key {key!r}")
    k = model.get("k")
    transition = model.get("transition")
    k_ok = isinstance(k, int) and k >= 2
    if not k_ok:
        errors.append(f"model.k: expected integer >= 2, got {k!r}")
    t_ok = (isinstance(transition, list) and k_ok and len(transition) == k
            and all(isinstance(row, list) and len(row) == k
                    and all(e in (0, 1) for e in row) for row in transition))
    if not t_ok:
        errors.append("model.transition: expected a k x k matrix of 0/1 rows")
    pots = model.get("potentials")
    if not isinstance(pots, dict):
        errors.append("model.potentials: section missing or not an object")
    else:
        for pname in _POTENTIALS:
            if pname not in pots:
                errors.append(f"model.potentials: missing table {pname!r}")
            elif t_ok:
                _check_potential(errors, k, transition, pname, pots[pname])
        for pname in pots:
            if pname not in _POTENTIALS:
                errors.append(f"model.potentials: unknown table {pname!r}")
    experiments = raw.get("experiments")
    if not isinstance(experiments, list) or not experiments:
        errors.append("experiments: expected a non-empty list")
        experiments = []
    names = set()
    for i, exp in enumerate(experiments):
        where = f"experiments[{i}]"
        if not isinstance(exp, dict):
            errors.append(f"{where}: expected an object")
            continue
        for key in exp:
            if key not in _EXPERIMENT_KEYS:
                errors.append(f"{where}: unknown key {key!r}")
        name = exp.get("name")
        if not isinstance(name, str) or not name:
            errors.append(f"{where}: missing name")
        elif name in names:
            errors.append(f"{where}: duplicate name {name!r}")
        else:
            names.add(name)
        kind = exp.get("kind")
        if kind not in KNOWN_KINDS:
            errors.append(f"{where}: unknown kind {kind!r} (known: {', '.join(KNOWN_KINDS)})")
        if "seed" in exp and not isinstance(exp["seed"], int):
            errors.append(f"{where}: seed must be an integer")
        if "params" in exp and not isinstance(exp["params"], dict):
            errors.append(f"{where}: params must be an object")
    return errors


def load_config(path) -> ExperimentConfig:
    """Parse and validate a config file; raises with all problems listed."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text, parse_float=Decimal)
    except (json.JSONDecodeError, InvalidOperation) as exc:
        line = getattr(exc, "lineno", "?")
        col = getattr(exc, "colno", "?")
        raise ParseError(f"{path}:{line}:{col}: {exc.msg if hasattr(exc, 'msg') else exc}") from exc
    errors = validate_raw(raw)
    if errors:
        raise ValidationError(errors)
    return ExperimentConfig(name=raw.get("name", ""), model=_plain(raw["model"]),
                            experiments=_plain(raw["experiments"]), raw=raw,
                            config_hash=config_hash(raw), path=str(path))


def _plain(obj):
    """Decimals -> floats for numeric work (the hash uses the exact form)."""
    if isinstance(obj, Decimal):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    return obj
