"""Command line front end.

Reports are JSON with sorted keys (or an indented text rendering of the
same tree), so identical inputs and flags give byte-identical output.
Exit codes: 0 success, 1 parse or I/O error, 2 validation error, 3 internal
invariant breach.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Any, Sequence

from . import __version__
from .errors import InvariantBreach, ParseError, SkewError, ValidationError
from .intlat import IntMatrix, lattice_from_generators
from .model import BUILTINS, EXPECTED, builtin, parse_model, resolve, to_document
from .oracle import BallConfig, ball_reach, escape_check, oracle_transitive
from .polytope import frac_str
from .sft import is_irreducible, transient_states
from .skew import (
    PhasedSkew,
    TwistedSkew,
    displacement_data,
    ftp_bounded,
    h1_transitivity,
    is_totally_transitive,
    is_transitive,
)
from .skew.deciders import _map, _transitive_phased, lattice_summary, polytope_summary
from .spectral import (
    char_poly,
    fried_lattice,
    fried_stability_check,
    gtl_construct,
    is_quasi_unipotent,
    nilpotent_decomposition,
    order_N,
    shear_form,
    spectral_witness,
)

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3


# -- helpers -----------------------------------------------------------------


def _load(spec: str) -> TwistedSkew:
    if spec == "-":
        return parse_model(sys.stdin.read())
    return resolve(spec)


def _digest(tau: TwistedSkew) -> str:
    canon = json.dumps(to_document(tau), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _matrix_arg(text: str) -> IntMatrix:
    try:
        rows = json.loads(text)
        return IntMatrix.of([[int(x) for x in r] for r in rows])
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ParseError(f"cannot read matrix {text!r}: {exc}") from exc


def _mat(m: IntMatrix) -> list[list[str]]:
    return [[str(x) for x in r] for r in m.rows]


def _header(command: str, args: argparse.Namespace, tau: TwistedSkew | None) -> dict:
    head = {"tool": "skewdyn", "version": __version__, "command": command}
    if tau is not None:
        head["input_digest"] = _digest(tau)
        head["model"] = {
            "states": str(tau.base.state_count),
            "dim": str(tau.d),
            "twist": _mat(tau.twist),
            "irreducible_base": is_irreducible(tau.base),
            "transient_states": [str(s) for s in transient_states(tau.base)],
        }
    return head


def _bounds(args) -> dict:
    return {"max_power": str(args.max_power), "max_index": str(args.max_index), "assume_ftp": args.assume_ftp}


def displacement_table(tau: TwistedSkew) -> dict:
    dd = displacement_data(tau)
    rows = [
        {
            "block": str(e.cycle),
            "length": str(e.length),
            "displacement": [str(x) for x in e.displacement],
            "rotation": [frac_str(x) for x in e.rotation],
        }
        for e in dd.entries
    ]
    return {"blocks": rows, "lattice": lattice_summary(dd.lattice), "rotation_set": polytope_summary(dd.polytope)}


def _spectral_section(a: IntMatrix) -> dict:
    qu = is_quasi_unipotent(a)
    out = {"char_poly": str(char_poly(a)), "quasi_unipotent": qu}
    if qu:
        out["N"] = str(order_N(a))
    else:
        out["witness"] = spectral_witness(a).to_dict()
    return out


# -- commands ----------------------------------------------------------------


def _iterate_check(args_tuple) -> dict:
    tau, k, M, assume_ftp = args_tuple
    return {"k": str(k), **_transitive_phased(tau, k, None, M, assume_ftp).to_dict()}


def cmd_analyze(args) -> dict:
    tau = _load(args.model)
    rep = _header("analyze", args, tau)
    rep["bounds"] = _bounds(args)
    rep["spectral"] = _spectral_section(tau.twist)
    if tau.is_untwisted():
        rep["displacements"] = displacement_table(tau)
    rep["transitive"] = is_transitive(tau, args.max_index, args.assume_ftp).to_dict()
    rep["iterates"] = _map(
        _iterate_check, [(tau, k, args.max_index, args.assume_ftp) for k in range(1, args.max_power + 1)], args.jobs
    )
    rep["ftp"] = ftp_bounded(tau, args.max_index).to_dict()
    rep["totally_transitive"] = is_totally_transitive(
        tau, args.max_power, args.max_index, args.assume_ftp, args.jobs
    ).to_dict()
    if args.h1:
        verdict, _ = h1_transitivity(tau, args.max_power, args.max_index, args.assume_ftp)
        rep["h1_transitive"] = verdict.to_dict()
    if not rep["spectral"]["quasi_unipotent"]:
        esc = escape_check(tau, samples=5, seed=args.seed)
        rep["escape"] = {
            "ok": esc.ok,
            "eigenvalue_modulus_approx": f"{esc.eigenvalue_modulus:.12g}",
            "threshold_approx": f"{esc.threshold:.6g}",
            "samples": list(esc.samples),
            "seed": str(args.seed),
        }
    return rep


def cmd_rotset(args) -> dict:
    tau = _load(args.model)
    rep = _header("rotset", args, tau)
    if not args.fried:
        if not tau.is_untwisted():
            raise ParseError("rotation sets of twisted products need --fried")
        rep.update(displacement_table(tau))
        return rep
    a = tau.twist
    if not is_quasi_unipotent(a):
        rep["fried"] = {"defined": False, "spectral": spectral_witness(a).to_dict()}
        return rep
    N = order_N(a)
    f, proj, embed, g = PhasedSkew(tau, 1, N, None).fried()
    body = {"defined": True, "N": str(N), "fried_lattice": lattice_summary(f)}
    if g is None:
        body["rotation_set"] = polytope_summary(None)
    else:
        body["projection"] = _mat(proj)
        body["embed"] = _mat(embed)
        body["lattice"] = lattice_summary(g.lattice())
        body["rotation_set"] = polytope_summary(g.rotation_polytope())
    rep["fried"] = body
    return rep


def cmd_structure(args) -> dict:
    if args.matrix is not None:
        a = _matrix_arg(args.matrix)
        rep = _header("structure", args, None)
        rep["matrix"] = _mat(a)
    else:
        if args.model is None:
            raise ParseError("structure needs a model or --matrix")
        tau = _load(args.model)
        rep = _header("structure", args, tau)
        a = tau.twist
    if not a.is_square() or a.det() not in (1, -1):
        raise ValidationError("matrix must be square with determinant +-1")
    rep["spectral"] = _spectral_section(a)
    rep["fried_lattice"] = lattice_summary(fried_lattice(a))
    if rep["spectral"]["quasi_unipotent"]:
        N = order_N(a)
        s = a**N
        d = a.nrows
        dec = nilpotent_decomposition(s.T - IntMatrix.identity(d))
        form = shear_form(s)
        rep["power_N"] = {
            "matrix": _mat(s),
            "fried_lattice": lattice_summary(fried_lattice(s)),
            "fried_stable_to_5": fried_stability_check(s, 5),
            "nilpotent_decomposition": {
                "order": str(dec.order),
                "parts": [[[str(x) for x in c] for c in p.basis] for p in dec.parts],
            },
            "shear_form": {
                "E": _mat(form.E),
                "blocked": _mat(form.blocked),
                "raw_sizes": [str(x) for x in form.raw_sizes],
                "block_sizes": [str(x) for x in form.block_sizes],
            },
        }
    if args.gtl_gamma is not None:
        gens = json.loads(args.gtl_gamma)
        w = json.loads(args.gtl_w) if args.gtl_w else [0] * len(gens[0])
        gamma = lattice_from_generators([[int(x) for x in v] for v in gens], len(w))
        rep["gtl"] = gtl_construct(gamma, [int(x) for x in w]).to_dict()
    return rep


def cmd_ftp(args) -> dict:
    tau = _load(args.model)
    rep = _header("ftp", args, tau)
    rep["bounds"] = {"max_index": str(args.max_index)}
    rep["ftp"] = ftp_bounded(tau, args.max_index).to_dict()
    return rep


def cmd_oracle(args) -> dict:
    tau = _load(args.model)
    rep = _header("oracle", args, tau)
    cfg = BallConfig(args.radius, args.steps, args.box)
    rep["oracle"] = oracle_transitive(tau, cfg).to_dict()
    if args.dump:
        lines = []
        zero = (0,) * tau.d
        for a in range(tau.base.state_count):
            res = ball_reach(tau, (a, zero), cfg)
            for b, v in sorted(res.reached):
                lines.append(f"{a} {b} " + " ".join(map(str, v)))
        with open(args.dump, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return rep


def cmd_example(args) -> dict:
    names = [args.name] if args.name else list(BUILTINS)
    rep = {"tool": "skewdyn", "version": __version__, "command": "example", "examples": {}}
    for name in names:
        tau = builtin(name)
        dd = displacement_data(tau)
        got = {
            "ftp": ftp_bounded(tau, args.max_index).status.value == "PROVEN_TRANSITIVE",
            "transitive": is_transitive(tau).status.value == "PROVEN_TRANSITIVE",
            "lattice_index": lattice_summary(dd.lattice)["index"],
            "rotation_vertices": dd.polytope.vertex_strings(),
        }
        rep["examples"][name] = {
            "model": to_document(tau),
            "expected": EXPECTED[name],
            "computed": got,
            "matches": got == EXPECTED[name],
        }
    return rep


# -- rendering and entry point -----------------------------------------------


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines: list[str] = []

    def walk(node: Any, indent: int, key: str | None) -> None:
        pad = "  " * indent
        label = f"{key}:" if key is not None else "-"
        if isinstance(node, dict):
            lines.append(f"{pad}{label}")
            for k in sorted(node):
                walk(node[k], indent + 1, k)
        elif isinstance(node, list) and any(isinstance(x, (dict, list)) for x in node):
            lines.append(f"{pad}{label}")
            for x in node:
                walk(x, indent + 1, None)
        else:
            value = json.dumps(node) if not isinstance(node, str) else node
            lines.append(f"{pad}{label} {value}")

    for k in sorted(report):
        walk(report[k], 0, k)
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewdyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"skewdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True, optional_model=False):
        if model:
            if optional_model:
                p.add_argument("model", nargs="?", help="built-in name (eta1..eta4), model file, or - for stdin")
            else:
                p.add_argument("model", help="built-in name (eta1..eta4), model file, or - for stdin")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("-o", "--output", help="write the report here instead of stdout")

    def bounds(p):
        p.add_argument("--max-power", type=int, default=6, help="largest iterate checked (K)")
        p.add_argument("--max-index", type=int, default=4, help="largest modulus for finite quotients (M)")
        p.add_argument("--assume-ftp", action="store_true", help="assert the finite transitivity property")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for per-power checks")

    p = sub.add_parser("analyze", help="run all deciders")
    common(p)
    bounds(p)
    p.add_argument("--h1", action="store_true", help="also decide H1-transitivity")
    p.add_argument("--seed", type=int, default=0, help="seed for the escape diagnostic")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rotset", help="displacements, lattice and rotation set")
    common(p)
    p.add_argument("--fried", action="store_true", help="rotation set of the Fried quotient of tau^N")
    p.set_defaults(func=cmd_rotset)

    p = sub.add_parser("structure", help="spectral and normal-form data of the twist")
    common(p, optional_model=True)
    p.add_argument("--matrix", help='twist given directly, e.g. "[[0,-1],[1,0]]"')
    p.add_argument("--gtl-gamma", help="generators of a full-rank lattice, JSON list of vectors")
    p.add_argument("--gtl-w", help="shift vector for the subgroup construction, JSON list")
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("ftp", help="finite transitivity property up to an index bound")
    common(p)
    p.add_argument("--max-index", type=int, default=4)
    p.set_defaults(func=cmd_ftp)

    p = sub.add_parser("oracle", help="ball-truncated reachability")
    common(p)
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--box", type=int, default=3)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--dump", help="write reach sets as text to this file")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("example", help="built-in examples and their expected verdicts")
    p.add_argument("name", nargs="?", choices=BUILTINS)
    p.add_argument("--max-index", type=int, default=4)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; those are parse errors here
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        report = args.func(args)
    except ParseError as exc:
        print(f"skewdyn: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvariantBreach, AssertionError) as exc:
        print(f"skewdyn: INTERNAL: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except SkewError as exc:
        print(f"skewdyn: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"skewdyn: PARSE_ERROR: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = render(report, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
