"""Command-line front end.

Exit status: 0 on success, 2 when an input cannot be parsed, 3 when the
computation fails (degenerate polytope, no certificate, bad parameters).
"""

from __future__ import annotations

import logging
import sys
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import List, Optional

import click
from gmpy2 import mpq

from . import bounds as bnd
from .decompose import CertificateError, find_certificate, term_counts
from .gridsum import grid_lower_bound
from .integrate import BACKENDS, HANDELMAN, LINEAR_FORMS, integrate_power, volume
from .polytope import HRep, PolytopeError, parse_hrep
from .ratpoly import as_rational, format_polynomial, parse_polynomial

EXIT_PARSE = 2
EXIT_MATH = 3


class StageError(click.ClickException):
    """An error tagged with the pipeline stage that raised it."""

    def __init__(self, stage: str, message: str, code: int):
        super().__init__(f"{stage}: {message}")
        self.exit_code = code


def _read(path: str, stage: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise StageError(stage, str(exc), EXIT_PARSE) from None


def load_polynomial(path: str):
    try:
        return parse_polynomial(_read(path, "polynomial"))
    except (ValueError, TypeError) as exc:
        raise StageError("polynomial", str(exc), EXIT_PARSE) from None


def load_polytope(path: str) -> HRep:
    try:
        raw = parse_hrep(_read(path, "polytope"), validate=False)
    except (ValueError, TypeError) as exc:
        raise StageError("polytope", str(exc), EXIT_PARSE) from None
    try:
        return HRep(raw.A, raw.b)
    except PolytopeError as exc:
        raise StageError("polytope", str(exc), EXIT_MATH) from None


def parse_int_list(text: str) -> List[int]:
    """``10,20,30``, ``10..40`` or ``10..40:10``."""
    out: List[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                span, _, step = part.partition(":")
                lo, hi = (int(v) for v in span.split(".."))
                out.extend(range(lo, hi + 1, int(step) if step else 1))
            else:
                out.append(int(part))
    except ValueError:
        raise click.BadParameter(f"not an integer list: {text!r}") from None
    if not out or any(v < 1 for v in out):
        raise click.BadParameter("values must be positive integers")
    return out


def _rational(text: Optional[str], name: str):
    if text is None:
        return None
    try:
        return as_rational(text)
    except (ValueError, TypeError):
        raise click.BadParameter(f"{name}: not a rational number: {text!r}") from None


def display_decimal(q: mpq, digits: int) -> str:
    """Round-half-even rendering for values that are not bounds."""
    value = Decimal(int(q.numerator)) / Decimal(int(q.denominator))
    return str(value.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


def _math(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CertificateError as exc:
        raise StageError(stage, f"{exc} (last t = {exc.last_t})", EXIT_MATH) from None
    except (ValueError, ArithmeticError, PolytopeError) as exc:
        raise StageError(stage, str(exc), EXIT_MATH) from None


poly_opt = click.option("--poly", "poly_path", required=True, type=click.Path(dir_okay=False), help="Polynomial file.")
polytope_opt = click.option("--polytope", "polytope_path", required=True, type=click.Path(dir_okay=False), help="H-representation file.")
digits_opt = click.option("--digits", default=bnd.DEFAULT_DIGITS, show_default=True, type=click.IntRange(0, 200))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="Log progress to stderr.")
def main(verbose: int) -> None:
    """Certified bounds on the maximum of a polynomial over a polytope."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), stream=sys.stderr)


@main.command()
@poly_opt
@polytope_opt
@click.option("--k", "k", default=1, show_default=True, type=click.IntRange(0))
@click.option("--backend", type=click.Choice(BACKENDS), default=LINEAR_FORMS, show_default=True)
@click.option("--t", "t", type=click.IntRange(0), default=None, help="Handelman degree (default: deg f).")
@click.option("--objective", type=click.Choice(["sparse", "shift-only"]), default="sparse", show_default=True)
@digits_opt
def integrate(poly_path, polytope_path, k, backend, t, objective, digits):
    """Exact integral of f^k (or (f+s)^k with the Handelman backend)."""
    f = load_polynomial(poly_path)
    P = load_polytope(polytope_path)
    if f.dim != P.d:
        raise StageError("input", "polynomial and polytope dimensions differ", EXIT_PARSE)
    cert = None
    if backend == HANDELMAN:
        cert = _math("certificate", find_certificate, f, P, t, objective)
        click.echo(f"s={cert.shift}")
        click.echo(f"t={cert.t}")
    value = _math("integration", integrate_power, P, f, k, backend, cert)
    click.echo(f"integral={value}")
    click.echo(f"decimal={display_decimal(value, digits)}")


@main.command()
@poly_opt
@polytope_opt
@click.option("--k", "k_text", default=None, help="k values: 10,20 or 10..40:10.")
@click.option("--epsilon", default=None, help="Target relative accuracy; selects k.")
@click.option("--upper", default=None, help="Known upper bound on max f (for k selection and validity).")
@click.option("--delta", default="1/10", show_default=True)
@click.option("--cdelta", default="81/20", show_default=True)
@click.option("--backend", type=click.Choice(BACKENDS), default=HANDELMAN, show_default=True)
@click.option("--shift", type=click.Choice(["auto", "none"]), default="auto", show_default=True)
@click.option("--t", "t", type=click.IntRange(0), default=None)
@click.option("--lipschitz", "lipschitz_text", default=None, help="Override the Lipschitz constant.")
@click.option("--lipschitz-method", type=click.Choice([bnd.PER_MONOMIAL, bnd.WHOLE]), default=bnd.PER_MONOMIAL, show_default=True)
@click.option("--objective", type=click.Choice(["sparse", "shift-only"]), default="sparse", show_default=True)
@click.option("--choose-only", is_flag=True, help="With --epsilon: print the chosen k and stop.")
@digits_opt
def bounds(poly_path, polytope_path, k_text, epsilon, upper, delta, cdelta, backend, shift, t,
           lipschitz_text, lipschitz_method, objective, choose_only, digits):
    """Lower and upper bounds L_k <= max f <= U_k."""
    if (k_text is None) == (epsilon is None):
        raise click.UsageError("give exactly one of --k and --epsilon")
    ks = parse_int_list(k_text) if k_text is not None else None
    eps = _rational(epsilon, "--epsilon")
    f = load_polynomial(poly_path)
    P = load_polytope(polytope_path)
    if f.dim != P.d:
        raise StageError("input", "polynomial and polytope dimensions differ", EXIT_PARSE)
    pipe = _math(
        "setup",
        bnd.Pipeline,
        P, f, backend=backend, shift=shift,
        lipschitz_value=_rational(lipschitz_text, "--lipschitz"),
        lipschitz_method=lipschitz_method, t=t, objective=objective,
        upper=_rational(upper, "--upper"), digits=digits,
    )
    if eps is not None:
        k, comps = _math("choose-k", pipe.choose, eps, _rational(delta, "--delta"), _rational(cdelta, "--cdelta"))
        click.echo("k components: " + ", ".join(f"{float(c):.4f}" for c in comps))
        click.echo(f"chosen k: {k}")
        if choose_only:
            return
        ks = [k]
    reports = [_math("bounds", pipe.report, k) for k in ks]
    click.echo(bnd.format_reports(reports), nl=False)


@main.command()
@poly_opt
@polytope_opt
@click.option("--k", "k", default=1, show_default=True, type=click.IntRange(1))
@click.option("--m", "m_text", required=True, help="Grid refinements: 2..15 or 100,1000.")
@click.option("--compare/--no-compare", default=False, help="Also print L_k from the exact integral.")
@digits_opt
def gridsum(poly_path, polytope_path, k, m_text, compare, digits):
    """Grid lower bounds L_{k,m} over P ∩ (1/m)Z^d."""
    ms = parse_int_list(m_text)
    f = load_polynomial(poly_path)
    P = load_polytope(polytope_path)
    if f.dim != P.d:
        raise StageError("input", "polynomial and polytope dimensions differ", EXIT_PARSE)
    width = max(len(str(m)) for m in ms)
    click.echo(f"{'m'.rjust(width)}  {'points'.rjust(8)}  L_k,m >=")
    for m in ms:
        r = _math("gridsum", grid_lower_bound, P, f, k, m, digits)
        click.echo(f"{str(r.m).rjust(width)}  {str(r.count).rjust(8)}  {r.L_km}")
    if compare:
        low = _math("integration", bnd.lower_bound, P, f, k, LINEAR_FORMS, None, digits)
        click.echo(f"L_k >= {low.L_k}")


@main.command()
@poly_opt
@polytope_opt
@click.option("--t", "t", type=click.IntRange(0), default=None)
@click.option("--objective", type=click.Choice(["sparse", "shift-only"]), default="sparse", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Write the certificate here.")
def decompose(poly_path, polytope_path, t, objective, out_path):
    """Handelman certificate of f + s and term counts of both decompositions."""
    f = load_polynomial(poly_path)
    P = load_polytope(polytope_path)
    if f.dim != P.d:
        raise StageError("input", "polynomial and polytope dimensions differ", EXIT_PARSE)
    cert = _math("certificate", find_certificate, f, P, t, objective)
    text = cert.dumps()
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text, nl=False)
    counts = term_counts(f, cert)
    click.echo(f"terms handelman={counts['handelman']} linear_forms={counts['linear_forms']}")


@main.command()
@polytope_opt
def vertices(polytope_path):
    """Vertices with their simplicial tangent cones."""
    P = load_polytope(polytope_path)
    for v in P.vertices:
        click.echo("vertex " + " ".join(str(c) for c in v.point))
        for cone in P.cones:
            if cone.apex == v:
                rays = "; ".join(" ".join(str(c) for c in u) for u in cone.rays)
                click.echo(f"  cone vol={cone.parallelepiped_volume} rays: {rays}")


@main.command(name="volume")
@polytope_opt
@digits_opt
def volume_cmd(polytope_path, digits):
    """Exact volume."""
    P = load_polytope(polytope_path)
    v = _math("volume", volume, P)
    click.echo(f"volume={v}")
    click.echo(f"decimal={display_decimal(v, digits)}")


@main.command(name="show")
@poly_opt
def show(poly_path):
    """Print a polynomial file in readable form."""
    click.echo(format_polynomial(load_polynomial(poly_path)))


if __name__ == "__main__":  # pragma: no cover
    main()
