"""Command-line front end over scenario files.

    algebroids run SCENARIO           run every assertion, exit 0 iff all pass
    algebroids validate SCENARIO      axiom/flatness/morphism reports
    algebroids modular SCENARIO ALG   modular cocycle for the declared section
    algebroids relmod SCENARIO MORPH  relative modular cocycle + exactness
    algebroids pullback SCENARIO PB   build a declared pull-back frame
    algebroids char SCENARIO REP      characteristic cocycle of a line rep
    algebroids extension SCENARIO EXT extension reports
    algebroids diagram SCENARIO DIA   diagram validation and coboundary check

Scenario files bundled with the package (see the corpus directory) can be
named by bare filename; local paths take precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .cohomology import classify
from .core import check_axioms
from .morphisms import check_morphism, relative_modular
from .reps import LineSection, char_cocycle, check_flat, modular_cocycle
from .runner import run
from .scenario import Scenario, ScenarioError, parse_scenario
from .symexpr import parse_expr


def load_scenario(path: str) -> Scenario:
    p = Path(path)
    if p.exists():
        return parse_scenario(p.read_text(), p.stem)
    candidate = resources.files("algebroids").joinpath("corpus", path)
    if candidate.is_file():
        return parse_scenario(candidate.read_text(), Path(path).stem)
    raise ScenarioError(f"scenario file not found: {path}")


def corpus_scenarios() -> list[str]:
    root = resources.files("algebroids").joinpath("corpus")
    return sorted(f.name for f in root.iterdir() if f.name.endswith(".scn"))


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for key, value in payload.items():
            if isinstance(value, list):
                print(f"{key}:")
                for item in value:
                    print(f"  {item}")
            else:
                print(f"{key}: {value}")


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    report = run(sc, seed=args.seed, timings=args.timings)
    print(report.to_json() if args.format == "json" else report.to_text())
    return 0 if report.passed else 1


def _cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    ok = True
    blocks = []
    for name, alg in sc.algebroids.items():
        rep = check_axioms(alg)
        ok = ok and rep.passed
        blocks.append(rep)
    for name, d in sc.reps.items():
        rep = check_flat(d)
        ok = ok and rep.passed
        blocks.append(rep)
    for name, phi in sc.morphisms.items():
        rep = check_morphism(phi)
        ok = ok and rep.passed
        blocks.append(rep)
    if args.format == "json":
        print(json.dumps([b.to_dict() for b in blocks], sort_keys=True, indent=2))
    else:
        for b in blocks:
            print(b.pretty())
    return 0 if ok else 1


def _cmd_modular(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    a = sc.algebroid(args.name)
    tv = sc.section(args.name)
    alpha = modular_cocycle(a, tv.omega, tv.mu)
    from .runner import _Runner

    cls = classify(alpha, _Runner(sc, args.seed).ansatz(a.chart), seed=args.seed)
    _emit(
        {
            "algebroid": args.name,
            "modular_cocycle": str(alpha),
            "status": cls.status,
            "primitive": str(cls.primitive) if cls.primitive is not None else None,
        },
        args.format,
    )
    return 0


def _cmd_relmod(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    phi = sc.morphisms[args.name]
    from .runner import _Runner

    runner = _Runner(sc, args.seed)
    alpha = relative_modular(
        phi, runner._triv_of(phi.source), runner._triv_of(phi.target)
    )
    cls = classify(alpha, runner.ansatz(phi.source.chart), seed=args.seed)
    payload = {
        "morphism": args.name,
        "relative_modular_cocycle": str(alpha),
        "status": cls.status,
    }
    if cls.primitive is not None:
        payload["primitive"] = str(cls.primitive)
    if cls.certificate is not None:
        payload["certificate"] = (
            f"nonzero mean {cls.certificate.mean} along {cls.certificate.coord} "
            f"(witness value {cls.certificate.witness_value:.6g})"
        )
    _emit(payload, args.format)
    return 0


def _cmd_pullback(args) -> int:
    sc = load_scenario(args.scenario)
    from .pullback import build_pullback

    built = build_pullback(sc.pullframes[args.name], seed=args.seed)
    pres = built.presentation
    payload = {
        "pullback": args.name,
        "rank": pres.rank,
        "frame": list(pres.frame),
        "anchor": [[str(f) for f in row] for row in pres.anchor],
        "structure": {
            f"[{pres.frame[i]},{pres.frame[j]}]": {
                pres.frame[k]: str(f) for k, f in comps.items()
            }
            for (i, j), comps in pres.structure.items()
        },
        "projection_passes": check_morphism(built.projection).passed,
        "axioms_pass": check_axioms(pres).passed,
    }
    _emit(payload, args.format)
    return 0


def _cmd_char(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    d = sc.reps[args.name]
    lam = LineSection(parse_expr(args.section, d.chart))
    alpha = char_cocycle(d, lam)
    from .runner import _Runner

    cls = classify(alpha, _Runner(sc, args.seed).ansatz(d.chart), seed=args.seed)
    _emit(
        {
            "representation": args.name,
            "characteristic_cocycle": str(alpha),
            "status": cls.status,
        },
        args.format,
    )
    return 0


def _cmd_extension(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    from .extensions import check_extension, verify_extension_identity
    from .runner import _Runner

    ext = sc.extensions[args.name]
    runner = _Runner(sc, args.seed)
    blocks = [check_extension(ext, seed=args.seed)]
    try:
        blocks.append(
            verify_extension_identity(
                ext,
                mu_quotient=sc.extension_mu.get(args.name),
                ansatz=runner.ansatz(ext.chart),
                seed=args.seed,
            )
        )
    except Exception as e:
        print(f"identity verification aborted: {type(e).__name__}: {e}")
    if args.format == "json":
        print(json.dumps([b.to_dict() for b in blocks], sort_keys=True, indent=2))
    else:
        for b in blocks:
            print(b.pretty())
    return 0 if all(b.passed for b in blocks) else 1


def _cmd_diagram(args) -> int:
    sc = load_scenario(args.scenario)
    _apply_overrides(sc, args)
    from .diagrams import verify_mod_coboundary
    from .runner import _Runner

    dia = sc.diagrams[args.name]
    runner = _Runner(sc, args.seed)
    sections = {name: runner._triv_of(alg) for name, alg in dia.objects.items()}
    blocks = [dia.validate(), verify_mod_coboundary(dia, sections)]
    if args.format == "json":
        print(json.dumps([b.to_dict() for b in blocks], sort_keys=True, indent=2))
    else:
        for b in blocks:
            print(b.pretty())
    return 0 if all(b.passed for b in blocks) else 1


def _cmd_corpus(args) -> int:
    for name in corpus_scenarios():
        print(name)
    return 0


def _apply_overrides(sc: Scenario, args) -> None:
    if getattr(args, "ansatz_degree", None) is not None:
        sc.ansatz_degree = args.ansatz_degree
    if getattr(args, "fourier_modes", None) is not None:
        sc.ansatz_modes = args.fourier_modes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="algebroids",
        description="Exact verification of Lie algebroid identities from scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_name: bool = True, name_help: str = "object name"):
        p.add_argument("scenario", help="scenario file (path or corpus name)")
        if with_name:
            p.add_argument("name", help=name_help)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--ansatz-degree", type=int, default=None)
        p.add_argument("--fourier-modes", type=int, default=None)
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("run", help="run every assertion in the scenario")
    common(p, with_name=False)
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock timings (breaks byte-for-byte determinism)",
    )
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="axiom/flatness/morphism reports")
    common(p, with_name=False)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("modular", help="modular cocycle of an algebroid")
    common(p, name_help="algebroid name")
    p.set_defaults(func=_cmd_modular)

    p = sub.add_parser("relmod", help="relative modular cocycle of a morphism")
    common(p, name_help="morphism name")
    p.set_defaults(func=_cmd_relmod)

    p = sub.add_parser("pullback", help="build a declared pull-back")
    common(p, name_help="pullback name")
    p.set_defaults(func=_cmd_pullback)

    p = sub.add_parser("char", help="characteristic cocycle of a line representation")
    common(p, name_help="representation name")
    p.add_argument("--section", default="1", help="trivializing section coefficient")
    p.set_defaults(func=_cmd_char)

    p = sub.add_parser("extension", help="extension validation and identity")
    common(p, name_help="extension name")
    p.set_defaults(func=_cmd_extension)

    p = sub.add_parser("diagram", help="diagram validation and coboundary check")
    common(p, name_help="diagram name")
    p.set_defaults(func=_cmd_diagram)

    p = sub.add_parser("corpus", help="list bundled scenario files")
    p.set_defaults(func=_cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    except KeyError as e:
        print(f"unknown object: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
