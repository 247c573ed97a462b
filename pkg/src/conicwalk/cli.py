"""Batch command-line front end; every run is reproducible and scriptable.

Machine-readable CSV/JSON goes to --out (default stdout); human-readable
summaries go to stderr.  Every output embeds the validated run config.
Exit codes: 0 success, 1 config error, 2 verification failure, 3 internal
assertion.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import asdict, dataclass

import click

from . import __version__
from .conic_geometry import ClassIndex, ConicParams, ORACLE_CAP
from .errata import errata_report
from .errors import ConfigError, ConicwalkError
from .finite_field import FieldSpec, make_field
from .hypergroup import build_table, oracle_table, verify_axioms
from .walk_analysis import (
    haar,
    kernel_for_step,
    minorization_constant,
    minorization_reference,
    mixing_report,
    stationary,
)
from .coupling_sim import monte_carlo_tv, run_coupling_trials

EPS_DEFAULT = 1.0 / (2.0 * math.e)  # 0.18393972058572117


@dataclass
class RunConfig:
    """Validated flag set; echoed into every output."""

    command: str
    p: int = 0
    d: int = 1
    a: int = 1
    b: int = 1
    c: int | None = None
    s: str = "1"
    eps: float = EPS_DEFAULT
    seed: int = 42
    fmt: str = "json"
    cap: int = ORACLE_CAP
    extra: dict | None = None

    def to_json(self) -> dict:
        out = asdict(self)
        extra = out.pop("extra") or {}
        out.update(extra)
        return out


def _field(cfg: RunConfig) -> FieldSpec:
    try:
        return make_field(cfg.p, cfg.d)
    except ConicwalkError as e:
        raise ConfigError(f"q must be an odd prime power: {e}") from e
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _params(cfg: RunConfig) -> ConicParams:
    spec = _field(cfg)
    try:
        return ConicParams(spec, cfg.a, cfg.b, cfg.c)
    except (ValueError, ConicwalkError) as e:
        raise ConfigError(f"invalid conic weights: {e}") from e


def _parse_class(label: str, params: ConicParams) -> ClassIndex:
    if label == "iso":
        if not params.split:
            raise ConfigError("no isotropic class for q = 3 (mod 4)")
        return ClassIndex.isotropic(params.spec)
    try:
        return ClassIndex.finite(params.spec.element(int(label)))
    except ValueError as e:
        raise ConfigError(f"invalid class label {label!r}: {e}") from e


def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _config_comment(cfg: RunConfig) -> str:
    items = " ".join(f"{k}={v}" for k, v in sorted(cfg.to_json().items()))
    return f"# conicwalk {__version__} {items}"


def _emit_json(payload: dict, cfg: RunConfig, out: str | None) -> None:
    payload = {"config": cfg.to_json(), **payload}
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header: list[str], rows, cfg: RunConfig, out: str | None) -> None:
    lines = [_config_comment(cfg), ",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def field_options(fn):
    fn = click.option("--p", type=int, required=True, help="odd prime characteristic")(fn)
    fn = click.option("--d", type=int, default=1, show_default=True, help="extension degree")(fn)
    fn = click.option("--a", type=int, default=1, show_default=True)(fn)
    fn = click.option("--b", type=int, default=1, show_default=True)(fn)
    fn = click.option("--c", type=int, default=None, help="override the derived root of a*b")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="output path (default stdout)")(fn)
    return fn


@click.group()
def cli() -> None:
    """Weighted-circle hypergroups over GF(q) and their random walks."""


@cli.command()
@field_options
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--verify-oracle", is_flag=True,
              help="compare closed form against the enumeration oracle")
@click.option("--diagnostic-unsplit", is_flag=True,
              help="q = 1 (mod 4) only: axiom report for the unsplit null circle")
@click.option("--errata-out", type=click.Path(), default=None,
              help="errata report path (default <out>.errata.json or errata.json)")
@click.option("--cap", type=int, default=ORACLE_CAP, show_default=True,
              help="enumeration cap; raising it can be very slow")
def constants(p, d, a, b, c, out, fmt, verify_oracle, diagnostic_unsplit, errata_out, cap):
    """Dump the structure-constant table; optionally verify it by enumeration."""
    cfg = RunConfig(command="constants", p=p, d=d, a=a, b=b, c=c, fmt=fmt, cap=cap,
                    extra={"verify_oracle": verify_oracle,
                           "diagnostic_unsplit": diagnostic_unsplit})
    params = _params(cfg)
    if cap > ORACLE_CAP:
        _note(f"warning: enumeration cap raised to {cap}; O(q^4) oracle may be slow")

    if diagnostic_unsplit:
        if not params.split:
            raise ConfigError("--diagnostic-unsplit needs q = 1 (mod 4)")
        table = oracle_table(params, split=False, cap=cap)
        report = verify_axioms(table)
        _emit_json({"axioms": report.to_json()}, cfg, out)
        _note(f"unsplit diagnostic for q={params.q}: hermitian_support="
              f"{report.hermitian_support} (expected False)")
        return

    table = build_table(params, "closed-form")
    if fmt == "json":
        _emit_json({"table": table.to_json_dict()}, cfg, out)
    else:
        _emit_csv(["i", "j", "k", "num", "den", "N_i", "N_j"],
                  table.to_csv_rows(), cfg, out)

    if verify_oracle:
        oracle = oracle_table(params, cap=cap)
        fresh = table.mismatches(oracle)
        report = errata_report(fresh)
        path = errata_out or (f"{out}.errata.json" if out else "errata.json")
        with open(path, "w") as fh:
            json.dump({"config": cfg.to_json(), **report}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if fresh:
            _note(f"oracle mismatch: {len(fresh)} differing triples; see {path}")
            raise SystemExit(2)
        _note(f"oracle equivalence verified on all {table.size ** 3} triples; "
              f"errata report written to {path}")


@cli.command()
@field_options
@click.option("--source", type=click.Choice(["closed-form", "oracle"]),
              default="closed-form", show_default=True)
def axioms(p, d, a, b, c, out, source):
    """Hypergroup axiom report; exits 2 if any axiom fails."""
    cfg = RunConfig(command="axioms", p=p, d=d, a=a, b=b, c=c,
                    extra={"source": source})
    params = _params(cfg)
    table = build_table(params, source)
    report = verify_axioms(table)
    _emit_json({"axioms": report.to_json()}, cfg, out)
    _note(f"axioms on q={params.q} ({source}): all_pass={report.all_pass}")
    if not report.all_pass:
        raise SystemExit(2)


@cli.command()
@field_options
@click.option("--s", "s", default="1", show_default=True,
              help="step class (field value, or 'iso')")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json",
              show_default=True)
def kernel(p, d, a, b, c, out, s, fmt):
    """Dump the walk kernel K(i, j) = n[i, s, j]."""
    cfg = RunConfig(command="kernel", p=p, d=d, a=a, b=b, c=c, s=s, fmt=fmt)
    params = _params(cfg)
    k = kernel_for_step(params, _parse_class(cfg.s, params))
    if fmt == "json":
        _emit_json({"kernel": k.to_json_dict()}, cfg, out)
    else:
        rows = []
        for i, ci in enumerate(k.classes):
            for j, cj in enumerate(k.classes):
                v = k.rat[i][j]
                rows.append((ci.label(), cj.label(), v.numerator, v.denominator))
        _emit_csv(["i", "j", "num", "den"], rows, cfg, out)
    _note(f"kernel q={params.q} step={s}: {k.size}x{k.size} rows exact-stochastic")


@cli.command("stationary")
@field_options
@click.option("--s", "s", default="1", show_default=True)
@click.option("--method", type=click.Choice(["auto", "power", "exact"]), default="auto",
              show_default=True)
def stationary_cmd(p, d, a, b, c, out, s, method):
    """Stationary distribution versus the class-size (Haar) distribution."""
    cfg = RunConfig(command="stationary", p=p, d=d, a=a, b=b, c=c, s=s,
                    extra={"method": method})
    params = _params(cfg)
    k = kernel_for_step(params, _parse_class(cfg.s, params))
    pi = stationary(k, method=method)
    ref = haar(params)
    sup = float(abs(pi.probs - ref.probs).max())
    _emit_json({"stationary": pi.to_json(), "haar": ref.to_json(),
                "sup_diff": sup}, cfg, out)
    _note(f"stationary q={params.q} step={s}: sup|pi - haar| = {sup:.3e}")
    if sup > 1e-12:
        raise SystemExit(2)


@cli.command()
@field_options
@click.option("--s", "s", default="1", show_default=True)
@click.option("--eps", type=float, default=EPS_DEFAULT, show_default=True,
              help="TV threshold (default 1/(2e))")
def mixing(p, d, a, b, c, out, s, eps):
    """Measured mixing time, proven bound, and the worst-start TV curve."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    cfg = RunConfig(command="mixing", p=p, d=d, a=a, b=b, c=c, s=s, eps=eps)
    params = _params(cfg)
    rep = mixing_report(params, _parse_class(cfg.s, params), eps)
    _emit_json({"mixing": rep.to_json()}, cfg, out)
    _note(f"mixing q={rep.q}: tau({eps:g}) = {rep.tau} <= bound {rep.tau_bound}")
    if rep.tau > rep.tau_bound:
        raise SystemExit(2)


@cli.command()
@field_options
@click.option("--s", "s", default="1", show_default=True)
@click.option("--steps", "m", type=int, default=None,
              help="kernel power (default 4 for q=3 mod 4, 6 for q=1 mod 4)")
def minorize(p, d, a, b, c, out, s, m):
    """Minimum of K^m / pi against the proven minorization constant."""
    cfg = RunConfig(command="minorize", p=p, d=d, a=a, b=b, c=c, s=s,
                    extra={"steps": m})
    params = _params(cfg)
    k = kernel_for_step(params, _parse_class(cfg.s, params))
    ref_m, ref_c = minorization_reference(k.q, k.branch)
    if m is None:
        m = ref_m
    exact, measured = minorization_constant(k, haar(params), m)
    applicable = m == ref_m and (k.branch == 3 or k.q >= 13)
    ok = True
    if applicable:
        ok = exact >= ref_c if exact is not None else measured >= float(ref_c) - 1e-12
    _emit_json({
        "minorization": {
            "m": m,
            "measured": measured,
            "measured_exact": f"{exact.numerator}/{exact.denominator}" if exact else None,
            "reference_m": ref_m,
            "reference": f"{ref_c.numerator}/{ref_c.denominator}",
            "reference_applicable": applicable,
            "ok": ok,
        }
    }, cfg, out)
    _note(f"minorization q={k.q} m={m}: min K^m/pi = {measured:.6g} "
          f"(reference {float(ref_c):.6g} at m={ref_m})")
    if not ok:
        raise SystemExit(2)


@cli.command()
@field_options
@click.option("--s", "s", default="1", show_default=True)
@click.option("--start", default="0", show_default=True, help="start class of the fixed chain")
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--hist-out", type=click.Path(), default=None,
              help="coalescence histogram CSV path")
def couple(p, d, a, b, c, out, s, start, trials, seed, hist_out):
    """Coupled-walk simulation: coalescence times and empirical tail."""
    cfg = RunConfig(command="couple", p=p, d=d, a=a, b=b, c=c, s=s, seed=seed,
                    extra={"trials": trials, "start": start})
    params = _params(cfg)
    k = kernel_for_step(params, _parse_class(cfg.s, params))
    start_class = _parse_class(start, params)
    stats = run_coupling_trials(k, haar(params), start_class, trials, seed)
    _emit_json({"coupling": stats.to_json()}, cfg, out)
    if hist_out:
        tail = stats.tail_curve()
        hist = [0] * (max(stats.times) + 1)
        for t in stats.times:
            hist[t] += 1
        rows = [(t, hist[t], _fmt_float(tail[t])) for t in range(len(hist))]
        _emit_csv(["t", "count", "empirical_tail"], rows, cfg, hist_out)
    _note(f"coupling q={params.q}: {trials} trials, mean T = {stats.mean_time:.2f}")


@cli.command()
@field_options
@click.option("--s", "s", default="1", show_default=True)
@click.option("--start", default="0", show_default=True)
@click.option("--t", "t", type=int, default=8, show_default=True)
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
def mctv(p, d, a, b, c, out, s, start, t, trials, seed):
    """Monte Carlo TV estimate at step t with a bootstrap interval."""
    cfg = RunConfig(command="mctv", p=p, d=d, a=a, b=b, c=c, s=s, seed=seed,
                    extra={"trials": trials, "t": t, "start": start})
    params = _params(cfg)
    k = kernel_for_step(params, _parse_class(cfg.s, params))
    start_class = _parse_class(start, params)
    est = monte_carlo_tv(start_class, t, trials, seed, k, haar(params))
    _emit_json({"monte_carlo_tv": est.to_json()}, cfg, out)
    _note(f"mc tv q={params.q} t={t}: {est.estimate:.5f} "
          f"[{est.ci_low:.5f}, {est.ci_high:.5f}]")


@cli.command()
@click.option("--qmin", type=int, default=7, show_default=True)
@click.option("--qmax", type=int, default=199, show_default=True)
@click.option("--branch", type=click.Choice(["both", "1", "3"]), default="both",
              show_default=True)
@click.option("--eps", type=float, default=EPS_DEFAULT, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def scan(qmin, qmax, branch, eps, out):
    """Sweep all admissible odd prime powers: tau, bound, minorization per q."""
    cfg = RunConfig(command="scan", eps=eps,
                    extra={"qmin": qmin, "qmax": qmax, "branch": branch})
    if qmin < 3 or qmax < qmin:
        raise ConfigError("need 3 <= qmin <= qmax")
    if eps <= 0:
        raise ConfigError("eps must be positive")
    sink = open(out, "w") if out else sys.stdout
    try:
        header = ("q,branch,class_count,tau_measured,tau_bound,"
                  "minorization_measured,minorization_bound,ratio_tau_over_q")
        sink.write(_config_comment(cfg) + "\n" + header + "\n")
        sink.flush()
        max_ratio = 0.0
        for q, p, d in admissible_prime_powers(qmin, qmax):
            if branch != "both" and q % 4 != int(branch):
                continue
            params = ConicParams(make_field(p, d), 1, 1)
            rep = mixing_report(params, eps=eps)
            ratio = rep.tau / q
            max_ratio = max(max_ratio, ratio)
            ref = rep.minorization_reference
            num, den = ref.split("/")
            sink.write(",".join([
                str(q), str(rep.branch), str(rep.class_count), str(rep.tau),
                str(rep.tau_bound), _fmt_float(rep.minorization_measured),
                _fmt_float(int(num) / int(den)), _fmt_float(ratio),
            ]) + "\n")
            sink.flush()
            if rep.tau > rep.tau_bound:
                _note(f"q={q}: tau {rep.tau} exceeds bound {rep.tau_bound}")
                raise SystemExit(2)
        _note(f"scan [{qmin},{qmax}] branch={branch}: max tau/q = {max_ratio:.4f}")
    finally:
        if out:
            sink.close()


def admissible_prime_powers(qmin: int, qmax: int) -> list[tuple[int, int, int]]:
    """(q, p, d) for every odd prime power q in [qmin, qmax], ascending."""
    out = []
    for q in range(max(3, qmin), qmax + 1):
        if q % 2 == 0:
            continue
        p = next((f for f in range(3, q + 1, 2) if q % f == 0), q)
        temp, d = q, 0
        while temp % p == 0:
            temp //= p
            d += 1
        if temp == 1:
            out.append((q, p, d))
    return out


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except SystemExit as e:
        return int(e.code or 0)
    except (ConfigError, click.ClickException, click.exceptions.Abort) as e:
        msg = e.format_message() if isinstance(e, click.ClickException) else str(e)
        print(f"error: {msg}", file=sys.stderr)
        return 1
    except ConicwalkError as e:
        print(f"internal: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
