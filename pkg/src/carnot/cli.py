"""``carnot`` command-line entry point.

Exit codes: 0 all checks pass, 1 at least one check failed (report still
emitted), 2 input or usage error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from . import __version__
from .errors import CarnotError, NoWitnessFound, WrongStep
from .exactcore import LAMBDA, Poly, evaluate, random_poly, substitute, to_text
from .groupcalc import (
    GroupLaw, bracket_generating_step, check_group_law, check_z_decomposition, commutator,
    derive_group_law, dilation, generator_field, horizontal_fields, invariant_fields,
    op_to_text, vector_at_identity, z_decompose,
)
from .identities import (
    bochner_right_residual, carre_du_champ, euclidean_bochner_residual, horizontal_laplacian,
    step2_difference_residual,
)
from .liecore import StratifiedLieAlgebra, builtin, load_algebra, validate_algebra
from .maxmod import (
    P3, P5, counterexample_f, h1, harmonic_basis, left_subharmonicity_failure,
    right_excess_witness, strict_max_radius, verify_counterexample,
)
from .report import CheckReport, emit_report, rational_text

VERBS = ("validate", "law", "fields", "commutators", "zfield", "harmonic", "bochner",
         "difference", "babybo", "counterexample", "radius", "witness")


@dataclass
class RunConfig:
    command: str
    group_source: str = "heisenberg:1"
    group_file: Optional[str] = None
    seed: int = 42
    trials: int = 20
    max_degree: int = 5
    output: str = "text"
    out_path: Optional[str] = None
    right: bool = False
    degree: int = 3
    r: Fraction = Fraction(1, 10)

    def __post_init__(self):
        if self.trials < 1:
            raise CarnotError("--trials must be >= 1")
        if self.max_degree < 0:
            raise CarnotError("--max-degree must be >= 0")
        if self.degree < 0:
            raise CarnotError("--degree must be >= 0")


Result = Tuple[CheckReport, List[str]]


def _algebra(cfg: RunConfig) -> StratifiedLieAlgebra:
    if cfg.group_file:
        return load_algebra(cfg.group_file)
    return builtin(cfg.group_source)


def _law(cfg: RunConfig) -> GroupLaw:
    return derive_group_law(_algebra(cfg))


def _trial_polys(cfg: RunConfig, g: GroupLaw):
    # trial i uses seed + i
    for i in range(cfg.trials):
        yield i, cfg.seed + i, random_poly(cfg.seed + i, g.algebra, cfg.max_degree)


def _residual_checks(report: CheckReport, name: str, res) -> None:
    report.add(name, res.is_zero, None if res.is_zero else to_text(res.residual))


def do_validate(cfg: RunConfig) -> Result:
    return validate_algebra(_algebra(cfg)), []


def do_law(cfg: RunConfig) -> Result:
    g = _law(cfg)
    return check_group_law(g), g.lines()


def do_fields(cfg: RunConfig) -> Result:
    g = _law(cfg)
    side = "right" if cfg.right else "left"
    tag = "Xt" if cfg.right else "X"
    report = CheckReport()
    lines = []
    for v, X in zip(g.variables, invariant_fields(g, side)):
        lines.append(f"{tag}[{v.name()}] = {op_to_text(X)}")
        vec = vector_at_identity(X, g.variables)
        ok = all(c == (1 if w == v else 0) for c, w in zip(vec, g.variables))
        report.add(f"at_identity/{v.name()}", ok, None if ok else op_to_text(X))
    return report, lines


def do_commutators(cfg: RunConfig) -> Result:
    g = _law(cfg)
    alg = g.algebra
    basis = g.variables
    left, right = horizontal_fields(g, "left"), horizontal_fields(g, "right")
    report = CheckReport()
    lines = []
    for i, X in enumerate(left, 1):
        for j, Xt in enumerate(right, 1):
            c = commutator(X, Xt)
            report.add(f"left_right/X{i}_Xt{j}", c.is_zero(), None if c.is_zero() else op_to_text(c))
    z = alg.layer(1)
    for i in range(len(left)):
        for j in range(i + 1, len(left)):
            c = commutator(left[i], left[j])
            lines.append(f"[X{i + 1}, X{j + 1}] = {op_to_text(c)}")
            got = vector_at_identity(c, basis)
            want = alg.structure(z[i], z[j])
            ok = all(got[k] == want.get(v, 0) for k, v in enumerate(basis))
            report.add(f"structure/X{i + 1}_X{j + 1}", ok, None if ok else op_to_text(c))
    step = bracket_generating_step(left, g)
    report.add("bracket_generating", step == alg.step, None if step == alg.step else f"step {step}")
    lines.append(f"bracket generating step = {step}")
    return report, lines


def do_zfield(cfg: RunConfig) -> Result:
    g = _law(cfg)
    z = z_decompose(g)
    report = CheckReport()
    for name, ok, w in check_z_decomposition(g, z):
        report.add(name, ok, w)
    lines = [f"Z = {op_to_text(generator_field(g))}"]
    lines += [f"Q[{v.name()}] = {to_text(q)}" for v, q in sorted(z.q.items())]
    return report, lines


def do_harmonic(cfg: RunConfig) -> Result:
    g = _law(cfg)
    hb = harmonic_basis(g, cfg.degree)
    report = CheckReport()
    lam = Poly.var(LAMBDA)
    dil = dilation(g.algebra)
    for i, b in enumerate(hb.basis):
        lap = horizontal_laplacian(g, b)
        report.add(f"basis_{i:02d}/harmonic", lap.is_zero(), None if lap.is_zero() else to_text(lap))
        hom = substitute(b, dil, partial=True) == lam ** cfg.degree * b
        report.add(f"basis_{i:02d}/homogeneous", hom, None if hom else to_text(b))
    if g.algebra.label == "heisenberg:1":
        for label, p, d in (("P3", P3, 3), ("P5", P5, 5)):
            if cfg.degree == d:
                ok = hb.contains(p)
                report.add(f"contains_{label}", ok, None if ok else to_text(p))
    lines = [f"dimension = {hb.dimension}"] + [to_text(b) for b in hb.basis]
    return report, lines


def do_bochner(cfg: RunConfig) -> Result:
    g = _law(cfg)
    report = CheckReport()
    for i, seed, f in _trial_polys(cfg, g):
        res = bochner_right_residual(g, f, {"seed": seed, "degree": cfg.max_degree})
        _residual_checks(report, f"bochner_right/trial_{i:03d}", res)
    if g.algebra.label == "heisenberg:1":
        _residual_checks(report, "bochner_right/counterexample_f", bochner_right_residual(g, counterexample_f()))
    return report, []


def do_difference(cfg: RunConfig) -> Result:
    g = _law(cfg)
    if g.algebra.step != 2:
        raise WrongStep(f"'difference' needs a step-2 group; {g.algebra.label} has step {g.algebra.step}")
    report = CheckReport()
    for i, seed, f in _trial_polys(cfg, g):
        _residual_checks(report, f"step2_difference/trial_{i:03d}", step2_difference_residual(g, f))
    if g.algebra.label == "heisenberg:1":
        _residual_checks(report, "step2_difference/counterexample_f",
                         step2_difference_residual(g, counterexample_f()))
    return report, []


def do_babybo(cfg: RunConfig) -> Result:
    g = _law(cfg)
    if g.algebra.step != 1:
        raise WrongStep(f"'babybo' needs an abelian group; {g.algebra.label} has step {g.algebra.step}")
    report = CheckReport()
    for i, seed, f in _trial_polys(cfg, g):
        _residual_checks(report, f"euclidean_bochner/trial_{i:03d}", euclidean_bochner_residual(g, f))
    left, right = invariant_fields(g, "left"), invariant_fields(g, "right")
    ok = left == right and all(X.terms == {((v, 1),): Poly.const(1)} for v, X in zip(g.variables, left))
    report.add("fields_are_partials", ok, None if ok else "left/right fields differ from partials")
    return report, []


def do_counterexample(cfg: RunConfig) -> Result:
    report = verify_counterexample()
    sub = left_subharmonicity_failure()
    report.extend(sub, prefix="left_subharmonicity/")
    lines = [f"f = {to_text(counterexample_f())}"]
    if sub.note:
        lines.append(f"left subharmonicity: {sub.note}")
    return report, lines


def _point_text(pt) -> str:
    return "(" + ", ".join(rational_text(pt[v]) for v in sorted(pt)) + ")"


def do_radius(cfg: RunConfig) -> Result:
    cert = strict_max_radius()
    lines = [f"radius = {rational_text(cert.radius)}",
             f"bound_constant = {rational_text(cert.bound_constant)}"]
    lines += [f"{_point_text(pt)} -> {rational_text(v)}" for pt, v in cert.grid_samples]
    return cert.check(), lines


def do_witness(cfg: RunConfig) -> Result:
    report = CheckReport()
    f = counterexample_f()
    lines = []
    try:
        pt = right_excess_witness(f, cfg.r)
        val = evaluate(carre_du_champ(h1(), f, "right"), pt)
        ok = val > 1 and sum(c * c for c in pt.values()) < cfg.r ** 2
        report.add("right_excess", ok, f"{_point_text(pt)} -> {rational_text(val)}")
        lines.append(f"witness = {_point_text(pt)}, |grad~ f|^2 = {rational_text(val)}")
    except NoWitnessFound as exc:
        report.add("right_excess", False, str(exc))
    rho = strict_max_radius(f).radius
    r_left = min(rho, cfg.r)
    try:
        pt = right_excess_witness(f, r_left, side="left")
        report.add("left_no_excess_within_rho", False, _point_text(pt))
    except NoWitnessFound:
        report.add("left_no_excess_within_rho", True)
    return report, lines


HANDLERS: Dict[str, Callable[[RunConfig], Result]] = {
    "validate": do_validate, "law": do_law, "fields": do_fields, "commutators": do_commutators,
    "zfield": do_zfield, "harmonic": do_harmonic, "bochner": do_bochner, "difference": do_difference,
    "babybo": do_babybo, "counterexample": do_counterexample, "radius": do_radius, "witness": do_witness,
}


def _group_label(cfg: RunConfig) -> str:
    if cfg.command in ("counterexample", "radius", "witness"):
        return "heisenberg:1"
    return cfg.group_file or cfg.group_source


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout.buffer
    stderr = stderr or sys.stderr
    try:
        report, lines = HANDLERS[cfg.command](cfg)
    except CarnotError as exc:
        print(f"carnot {cfg.command}: error: {exc}", file=stderr)
        return 2
    meta = {"tool_version": __version__, "group": _group_label(cfg), "command": cfg.command, "seed": cfg.seed}
    if lines:
        meta["data"] = lines
    blob = emit_report(report, cfg.output, meta)
    if cfg.out_path:
        with open(cfg.out_path, "wb") as fh:
            fh.write(blob)
    else:
        stdout.write(blob)
        stdout.flush()
    return 0 if report.passed else 1


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("group_file", nargs="?", help="group definition JSON (overrides --builtin)")
    common.add_argument("--builtin", default="heisenberg:1",
                        help="heisenberg:n, abelian:n, engel or free2:m (default heisenberg:1)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=int, default=20)
    common.add_argument("--max-degree", type=int, default=5)
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--out", dest="out_path")

    parser = argparse.ArgumentParser(prog="carnot", description="Exact calculus on Carnot groups.")
    parser.add_argument("--version", action="version", version=f"carnot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common])
        if verb == "fields":
            p.add_argument("--right", action="store_true", help="right-invariant fields")
        elif verb == "harmonic":
            p.add_argument("--degree", type=int, required=True)
        elif verb == "witness":
            p.add_argument("--r", type=_rational, default=Fraction(1, 10))
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command, group_source=args.builtin, group_file=args.group_file,
        seed=args.seed, trials=args.trials, max_degree=args.max_degree, output=args.output,
        out_path=args.out_path, right=getattr(args, "right", False),
        degree=getattr(args, "degree", 3), r=getattr(args, "r", Fraction(1, 10)),
    )


def main(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    try:
        cfg = parse_config(argv)
    except CarnotError as exc:
        print(f"carnot: error: {exc}", file=stderr or sys.stderr)
        return 2
    return run(cfg, stdout, stderr)

if __name__ == "__main__":
    sys.exit(main())
