#!/usr/bin/env python3

import functools
import os
import sys

import click
import mpmath

import config
from cache.brandt_cache import create_brandt_cache
from cache.classes_cache import create_classes_cache
from cache.coeffs_cache import create_coeffs_cache, find_coeffs
from cache.eigenform_cache import create_eigenform_cache
from cache.report_cache import store_report
from cache.utils import format_float, format_rational, log
from errors import ConsistencyError, PreconditionError, TripleLError
from lfun.central import verify_central
from lfun.completed import fe_residual, fit_conductor
from lfun.newforms import eta_product_expansion, format_coeffs, import_coeffs
from lfun.triple import (
    completed_l,
    conductor_candidates,
    dirichlet_coeffs,
    ensure_coefficients,
    factor_table,
    make_triple,
    sign_and_conductor,
)
from quaternion.eigenforms import install_loaders, newforms

# Residual above which check-fe reports a failure
FE_TOL = 1e-4


def configure(cache_dir, threads):
    if cache_dir:
        config.CACHE_DIR = cache_dir
    if threads:
        config.THREADS = threads
    mpmath.mp.dps = config.MP_DPS
    install_loaders(
        classes=lambda order: create_classes_cache(order.M1, order.M2),
        eigenforms=lambda classes, nu: create_eigenform_cache(classes.order.M1, classes.order.M2, nu),
    )


def command(function):
    """
    Common --cache and --threads options, plus the mapping of library errors
    onto exit codes.
    """

    @click.option("--cache", "cache_dir", envvar="TRIPLEL_CACHE", default=None, help="Cache directory")
    @click.option("--threads", type=int, default=None, help="Worker threads")
    @functools.wraps(function)
    def wrapper(cache_dir, threads, **kwargs):
        configure(cache_dir, threads)
        try:
            function(**kwargs)
        except TripleLError as err:
            log(f"{type(err).__name__}:", err)
            click.echo(f"error: {err}", err=True)
            sys.exit(err.exit_code)

    return wrapper


def extend(form, n_max):
    return create_coeffs_cache(form.label, n_max, form=form)


def resolve_form(label, n_max=50):
    """level.weight.index labels are computed; other names must have been imported."""
    parts = label.split(".")
    if len(parts) == 3 and all(part.isdigit() for part in parts):
        return create_coeffs_cache(label, n_max)
    form = find_coeffs(label)
    if form is None:
        raise PreconditionError(f"unknown newform '{label}': not level.weight.index and never imported")
    return form if form.n_max >= n_max else extend(form, n_max)


def resolve_triple(text):
    labels = [label.strip() for label in text.split(",") if label.strip()]
    if len(labels) != 3:
        raise click.UsageError("--triple needs three comma separated labels")
    return make_triple(*(resolve_form(label) for label in labels))


def parse_complex(text):
    try:
        return mpmath.mpc(complex(text.replace(" ", "").replace("i", "j")))
    except ValueError:
        raise click.UsageError(f"cannot read '{text}' as a complex number")


@click.group()
def cli():
    pass


@cli.command()
@click.option("--m1", type=int, required=True, help="Ramified primes (odd count)")
@click.option("--m2", type=int, default=1, show_default=True, help="Level outside M1")
@command
def classes(m1, m2):
    """
    Right ideal classes of the Eichler order R(M1, M2)
    """
    class_set = create_classes_cache(m1, m2)
    click.echo(f"R({m1},{m2}) h = {class_set.h}")
    click.echo("e = " + " ".join(str(e) for e in class_set.unit_orders))
    click.echo(f"mass = {format_rational(class_set.mass())}")


@cli.command()
@click.option("--m1", type=int, required=True)
@click.option("--m2", type=int, default=1, show_default=True)
@click.option("--n", type=int, required=True, help="Index of the Brandt matrix")
@click.option("--nu", type=int, default=0, show_default=True, help="Harmonic weight")
@command
def brandt(m1, m2, n, nu):
    """
    Brandt matrix B(n) with harmonic weight nu, block rows stacked
    """
    matrix = create_brandt_cache(m1, m2, n, nu).to_matrix()
    for r in range(matrix.rows):
        click.echo(" ".join(format_rational(matrix[r, c]) for c in range(matrix.cols)))


def parse_eta(text):
    exponents = {}
    for part in text.split(","):
        m, _, r = part.partition(":")
        try:
            exponents[int(m)] = int(r)
        except ValueError:
            raise click.UsageError(f"bad eta exponent '{part}', expected m:r")
    return exponents


@cli.command("newforms")
@click.option("--level", type=int, required=True)
@click.option("--weight", type=int, default=2, show_default=True)
@click.option("--nmax", type=int, default=20, show_default=True)
@click.option("--oracle", default=None, help="Eta product m:r,m:r to compare against")
@command
def newforms_command(level, weight, nmax, oracle):
    """
    Newforms of squarefree level from Brandt matrices, in COEFFS v1 format
    """
    forms = [create_coeffs_cache(form.label, max(nmax, 50)) for form in newforms(level, weight)]
    for form in forms:
        click.echo(f"# {form.label}")
        text = format_coeffs(form).splitlines()
        click.echo("\n".join(line for line in text if not line[0].isdigit() or int(line.split()[0]) <= nmax))

    if oracle:
        series = eta_product_expansion(parse_eta(oracle), nmax)
        matches = [
            form.label
            for form in forms
            if all(form.a(n) == series[n] for n in range(1, nmax + 1))
        ]
        if not matches:
            raise ConsistencyError(f"no newform matches the eta product {oracle}")
        click.echo(f"oracle {oracle} matches {' '.join(matches)} up to {nmax}")


@cli.group()
def lfun():
    """
    Triple product L-function of three newforms
    """


@lfun.command()
@click.option("--triple", "triple_text", required=True, help="l.k.i,l.k.i,l.k.i")
@click.option("--nmax", type=int, default=50, show_default=True)
@click.option("--table", is_flag=True, help="Also print the local factors at the level primes")
@command
def coeffs(triple_text, nmax, table):
    """
    Dirichlet coefficients b(n) of the triple product
    """
    triple = ensure_coefficients(resolve_triple(triple_text), nmax, extend)
    w, Q, _ = sign_and_conductor(triple)
    click.echo(f"# {triple.label} N={triple.N} gcd={triple.G} Q={Q} w={w:+d}")
    if table:
        click.echo(factor_table(triple).to_string(index=False))
    values = dirichlet_coeffs(triple, nmax)
    for n in range(1, nmax + 1):
        click.echo(f"{n} {values[n]}")


@lfun.command()
@click.option("--triple", "triple_text", required=True)
@click.option("--s", "s_text", required=True, help="Point, e.g. 2.5 or 2+1j")
@click.option("--prec", type=float, default=None, help="Relative precision")
@command
def value(triple_text, s_text, prec):
    """
    Completed value Lambda(s) and L(s) by the approximate functional equation
    """
    triple = resolve_triple(triple_text)
    L = completed_l(triple, extend)
    s = parse_complex(s_text)
    completed = L.lambda_value(s, prec)
    click.echo(f"triple: {triple.label}")
    click.echo(f"s: {format_float(s)}")
    click.echo(f"Lambda: {format_float(completed)}")
    click.echo(f"L: {format_float(completed / L.gamma(s))}")


@lfun.command("check-fe")
@click.option("--triple", "triple_text", required=True)
@click.option("--offsets", default="0.5,1.5,2+1j", show_default=True, help="Offsets t from the center")
@click.option("--prec", type=float, default=None)
@click.option("--diagnose", is_flag=True, help="Fit N^e gcd^f conductors when the check fails")
@command
def check_fe(triple_text, offsets, prec, diagnose):
    """
    Compare Lambda(c + t) with w Lambda(c - t) at the center c
    """
    triple = resolve_triple(triple_text)
    L = completed_l(triple, extend)
    points = [parse_complex(part) for part in offsets.split(",") if part.strip()]
    worst, rows = fe_residual(L, points, prec)
    click.echo(f"# {triple.label} Q={L.conductor} w={L.sign:+d}")
    for t, left, right, residual in rows:
        click.echo(f"{format_float(t)} {format_float(left)} {format_float(right)} {format_float(residual, 6)}")
    click.echo(f"worst: {format_float(worst, 6)}")
    if worst <= FE_TOL:
        return
    if diagnose:
        fits = fit_conductor(
            lambda conductor, sign: completed_l(triple, extend, conductor, sign),
            conductor_candidates(triple),
            points,
            prec,
        )
        for residual, conductor, sign in fits:
            click.echo(f"candidate Q={conductor} w={sign:+d} residual {format_float(residual, 6)}")
    raise ConsistencyError(f"functional equation residual {format_float(worst, 6)} above {FE_TOL}")


@cli.command()
@click.option("--triple", "triple_text", required=True)
@click.option("--tol", type=float, default=None, help="Relative tolerance against the AFE value")
@click.option("--format", "output", type=click.Choice(["text", "kv"]), default="text", show_default=True)
@click.option("--calibration-sq", type=float, default=None, help="Calibration square for mixed weights")
@command
def central(triple_text, tol, output, calibration_sq):
    """
    Central value from the height formula, checked against the AFE
    """
    triple = resolve_triple(triple_text)
    passed, _, report = verify_central(triple, tol, extender=extend, calibration_sq=calibration_sq)
    text = report.to_text() if output == "text" else report.to_kv()
    store_report(triple.label, f"{tol} {output} {calibration_sq}", text)
    click.echo(text, nl=False)
    if not passed:
        sys.exit(ConsistencyError.exit_code)


@cli.command("import")
@click.option("--file", "path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--name", default=None, help="Name used in --triple, default the file name without extension")
@command
def import_command(path, name):
    """
    Import and validate a COEFFS v1 file
    """
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    if len(name.split(".")) == 3 and all(part.isdigit() for part in name.split(".")):
        raise click.UsageError("imported names must not look like level.weight.index")
    form = import_coeffs(path, name)
    create_coeffs_cache(name, form.n_max, form=form)
    click.echo(f"{name}: level {form.level} weight {form.weight}, coefficients up to {form.n_max}")
    for internal in newforms(form.level, form.weight, form.n_max):
        if all(internal.a(n) == form.a(n) for n in range(1, form.n_max + 1)):
            click.echo(f"{name} matches {internal.label}")
            break
    else:
        click.echo(f"{name} matches no internal newform")


if __name__ == "__main__":
    cli()
    sys.exit(0)
