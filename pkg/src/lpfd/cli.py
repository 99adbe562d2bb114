"""Command-line entry point: lpfd <command> [options]."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .calculus import soundness_fuzz
from .games import analyze
from .models import (
    CPDModel, ModelError, PDModel, RPDModel, dumps_model, fixture_path, model_from_json, pd_to_rpd, rpd_to_pd,
    validate,
)
from .satisfiability import DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_CLOSURE, decide_sat
from .semantics import effectivity, evaluate, extension, valid_in_model
from .syntax import (
    ParseError, Vocabulary, VocabularyError, expand_derived, infer_vocabulary, modal_depth, parse_formula, render, size,
)

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    f = fixture_path(p.name)
    if f.exists():
        return f
    raise UsageError(f"no such model file: {path}")


def _load(path: str, repair: bool = True):
    p = _resolve(path)
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"{p}: invalid JSON ({e})") from e
    try:
        return model_from_json(data, repair=repair)
    except (ModelError, KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{p}: {e}") from e


def _load_vocab(path: str | None) -> Vocabulary | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such vocabulary file: {path}")
    d = json.loads(p.read_text())
    return Vocabulary(tuple(d["variables"]), {k: int(v) for k, v in d.get("predicates", {}).items()}, tuple(d.get("nominals", ())))


def _formula(text: str, vocab: Vocabulary | None):
    try:
        return parse_formula(text, vocab)
    except (ParseError, VocabularyError) as e:
        raise UsageError(f"bad formula {text!r}: {e}") from e


def _emit(args, payload: dict, text: str) -> None:
    if args.report == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


# ---------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    vocab = _load_vocab(args.vocab)
    phi = _formula(args.formula, vocab)
    vocab = vocab or infer_vocabulary(phi)
    core = expand_derived(phi, vocab)
    payload = {"formula": render(phi), "core": render(core), "size": size(core), "modal_depth": modal_depth(core)}
    _emit(args, payload, f"{payload['formula']}\ncore: {payload['core']}\nsize {payload['size']}, modal depth {payload['modal_depth']}")
    return OK


def cmd_validate(args) -> int:
    m = _load(args.model, repair=False)
    vs = validate(m)
    payload = {"model": args.model, "kind": _kind(m), "valid": not vs, "violations": [v.to_dict() for v in vs]}
    text = "valid" if not vs else "\n".join(f"[{v.code}] {v.message}" for v in vs)
    _emit(args, payload, text)
    return OK if not vs else NEGATIVE


def _kind(m) -> str:
    if isinstance(m, CPDModel):
        return "rcpd" if m.rcpd else "cpd"
    return "pd" if isinstance(m, PDModel) else "rpd"


def cmd_check(args) -> int:
    m = _load(args.model)
    phi = _formula(args.formula, m.vocab)
    try:
        if args.point is None:
            ext = sorted(extension(m, phi))
            _emit(args, {"formula": render(phi), "extension": ext}, ", ".join(ext) or "-")
            return OK
        v = evaluate(m, args.point, phi)
    except KeyError as e:
        raise UsageError(e.args[0] if e.args else str(e)) from e
    _emit(args, {"formula": render(phi), "point": args.point, "value": v}, "true" if v else "false")
    return OK if v else NEGATIVE


def cmd_valid(args) -> int:
    m = _load(args.model)
    phi = _formula(args.formula, m.vocab)
    ok, w = valid_in_model(m, phi)
    _emit(args, {"formula": render(phi), "valid": ok, "counterexample": w}, "valid" if ok else f"not valid: fails at {w}")
    return OK if ok else NEGATIVE


def cmd_effectivity(args) -> int:
    m = _load(args.model)
    if isinstance(m, RPDModel):
        raise UsageError("effectivity needs a PD or choice-profile model")
    xs = [x for x in args.coalition.split(",") if x]
    target = [t for t in args.target.split(",") if t]
    names = set(m.to_pd().names if isinstance(m, CPDModel) else m.names)
    unknown = [t for t in target if t not in names] + [x for x in xs if x not in m.vocab.variables]
    if unknown:
        raise UsageError(f"unknown names: {', '.join(unknown)}")
    v = effectivity(m, xs, target)
    _emit(args, {"coalition": xs, "target": sorted(target), "effective": v}, "effective" if v else "not effective")
    return OK if v else NEGATIVE


def cmd_sat(args) -> int:
    vocab = _load_vocab(args.vocab)
    phi = _formula(args.formula, vocab)
    try:
        r = decide_sat(phi, vocab, max_closure=args.max_closure, max_candidates=args.max_candidates, path_bound=args.path_bound)
    except ValueError as e:
        raise UsageError(str(e)) from e
    payload = r.to_dict()
    payload["formula"] = render(phi)
    if r.certificate is not None:
        payload["root"] = r.root
        if args.certificate:
            Path(args.certificate).write_text(dumps_model(r.certificate))
    lines = [f"{r.verdict}", f"closure {r.closure_size}, types {r.candidates}, surviving {r.survivors}"]
    if r.certificate is not None:
        lines.append(f"certificate: {len(r.certificate.points)} points, root {r.root}, path bound {r.path_bound}")
    if r.message:
        lines.append(r.message)
    _emit(args, payload, "\n".join(lines))
    if r.status == "resource":
        return USAGE
    return OK if r.sat else NEGATIVE


def cmd_convert(args) -> int:
    m = _load(args.model)
    if args.to == "rpd":
        if isinstance(m, RPDModel):
            raise UsageError("model is already relational")
        out = pd_to_rpd(m.to_pd() if isinstance(m, CPDModel) else m)
    else:
        if not isinstance(m, RPDModel):
            raise UsageError("conversion to pd expects a relational model")
        out = rpd_to_pd(m)
    text = dumps_model(out)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return OK


def cmd_game(args) -> int:
    path = args.model_opt or args.model
    if path is None:
        raise UsageError("game analyze needs a model")
    m = _load(path)
    if isinstance(m, RPDModel):
        raise UsageError("game analysis needs a PD or choice-profile model")
    rep = analyze(m, strict=False)
    _emit(args, rep.to_dict(), rep.to_text())
    return OK if not rep.mismatches else NEGATIVE


def cmd_fuzz(args) -> int:
    schemas = args.schema or None
    rep = soundness_fuzz(args.system, args.trials, args.seed, args.max_points, schemas)
    if schemas and not rep.trials:
        raise UsageError(f"no schema named {', '.join(schemas)} in {args.system}")
    _emit(args, rep.to_dict(), rep.to_text())
    return OK if rep.ok else NEGATIVE


# ---------------------------------------------------------------- parser


def _positive(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands accept the global flags too; suppressed defaults keep them from overriding earlier values
    g = argparse.ArgumentParser(add_help=False)

    def d(v):
        return argparse.SUPPRESS if suppress else v

    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--report", choices=("text", "json"), default=d("text"))
    g.add_argument("--max-closure", type=_positive, default=d(DEFAULT_MAX_CLOSURE))
    g.add_argument("--path-bound", type=_positive, default=d(None))
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(True)
    p = argparse.ArgumentParser(prog="lpfd", description="Logic of preference and functional dependence toolkit.", parents=[_global_flags(False)])
    p.add_argument("--version", action="version", version=f"lpfd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="parse and expand a formula")
    s.add_argument("formula")
    s.add_argument("--vocab")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("validate", parents=[common], help="check model well-formedness")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("check", parents=[common], help="evaluate a formula at a point")
    s.add_argument("model")
    s.add_argument("--point")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("valid", parents=[common], help="check validity in a model")
    s.add_argument("model")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_valid)

    s = sub.add_parser("effectivity", parents=[common], help="is a coalition effective for a set of outcomes")
    s.add_argument("model")
    s.add_argument("--coalition", required=True, help="comma-separated variables")
    s.add_argument("--target", required=True, help="comma-separated assignment names")
    s.set_defaults(func=cmd_effectivity)

    s = sub.add_parser("sat", parents=[common], help="decide satisfiability (nominal-free formulas)")
    s.add_argument("--formula", required=True)
    s.add_argument("--vocab")
    s.add_argument("--max-candidates", type=_positive, default=DEFAULT_MAX_CANDIDATES)
    s.add_argument("--certificate", help="write the certificate model here")
    s.set_defaults(func=cmd_sat)

    s = sub.add_parser("convert", parents=[common], help="translate between PD and relational models")
    s.add_argument("model")
    s.add_argument("--to", choices=("rpd", "pd"), required=True)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("game", parents=[common], help="game-theoretic analysis")
    gsub = s.add_subparsers(dest="game_command", required=True)
    g = gsub.add_parser("analyze", parents=[common], help="Nash, Pareto and core with formula cross-checks")
    g.add_argument("model", nargs="?")
    g.add_argument("--model", dest="model_opt")
    g.set_defaults(func=cmd_game)

    s = sub.add_parser("fuzz-axioms", parents=[common], help="soundness fuzzing of the axiom schemas")
    s.add_argument("--system", choices=("lpfd", "hlpfd"), default="lpfd")
    s.add_argument("--trials", type=_positive, default=1000)
    s.add_argument("--max-points", type=_positive, default=6)
    s.add_argument("--schema", action="append")
    s.set_defaults(func=cmd_fuzz)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"lpfd: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
