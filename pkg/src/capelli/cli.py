"""Batch driver: ``verify --suite {identities,duality,spectra,all}``.

Exit codes: 0 all checks passed, 1 some check failed, 2 bad configuration,
3 a weight space exceeded ``--max-dim``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import gaudinrep as gr
from . import idsuite as ids
from . import spectra as sp
from .exactarith import as_rat
from .ncdet import ProblemData, random_problem

log = logging.getLogger("capelli")

DEFAULT_H = (Fraction(0), Fraction(1), Fraction(7, 5))
CAPELLI_S = (Fraction(0), Fraction(2), Fraction(-1, 3))
CAPELLI_H = (Fraction(0), Fraction(1))
DUALITY_CASES = (
    (2, 2, (1, 1), (1, 1)),
    (2, 3, (2, 1), (1, 1, 1)),
    (3, 2, (1, 1, 1), (2, 1)),
)
# repeated z on purpose: the identities need no distinctness
REPEATED_Z_POINT = ProblemData(2, 3, (1, 1, Fraction(-2)), (0, Fraction(1, 2)))
# equal lambda for gl_3 on (1,1,1) x (1,1,1): two copies of the (2,1) irrep
# make every Bethe eigenvalue on this weight space doubly degenerate
DEGENERATE_WITNESS = (ProblemData(3, 3, (0, 1, 3), (0, 0, 0)), (1, 1, 1), (1, 1, 1))

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suite: str = "all"
    M: Optional[int] = None
    N: Optional[int] = None
    z: Optional[Tuple[Fraction, ...]] = None  # None means random
    lam: Optional[Tuple[Fraction, ...]] = None
    h_list: Tuple[Fraction, ...] = DEFAULT_H
    m: Optional[Tuple[int, ...]] = None  # None means auto-small
    n: Optional[Tuple[int, ...]] = None
    seed: int = 7
    max_dim: int = 60
    tol_residual: float = sp.RESIDUAL_TOL
    tol_gap: float = sp.GAP_TOL
    tol_nullity: float = sp.NULLITY_TOL
    full_h: bool = False
    draws: int = 2
    jobs: int = 1
    out: Optional[str] = None
    tsv: Optional[str] = None

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, (tuple, list)):
                v = [str(x) for x in v]
            elif isinstance(v, Fraction):
                v = str(v)
            out[k] = v
        return out


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_rationals(text: str) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part.strip()) for part in text.split(",") if part.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational list {text!r}: {exc}") from None


def parse_ints(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _maybe(parser: Callable, keyword: str):
    def parse(text: str):
        return None if text == keyword else parser(text)
    return parse


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description=__doc__.splitlines()[0])
    ap.add_argument("--suite", choices=["identities", "duality", "spectra", "all"], default="all")
    ap.add_argument("--grid", choices=["default"], default="default",
                    help="identities grid: (M,N) in {1,2,3}^2 unless --M/--N are given")
    ap.add_argument("--M", type=int)
    ap.add_argument("--N", type=int)
    ap.add_argument("--z", type=_maybe(parse_rationals, "random"), help="comma list of p/q or 'random'")
    ap.add_argument("--lambda", dest="lam", type=_maybe(parse_rationals, "random"))
    ap.add_argument("--h", type=parse_rationals, default=DEFAULT_H)
    ap.add_argument("--m", metavar="WEIGHTS", type=_maybe(parse_ints, "auto-small"))
    ap.add_argument("--n", metavar="WEIGHTS", type=_maybe(parse_ints, "auto-small"))
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--draws", type=int, default=2, help="random (z, lambda) draws per grid point")
    ap.add_argument("--max-dim", type=int, default=60)
    ap.add_argument("--tol-residual", type=float, default=sp.RESIDUAL_TOL)
    ap.add_argument("--tol-gap", type=float, default=sp.GAP_TOL)
    ap.add_argument("--tol-nullity", type=float, default=sp.NULLITY_TOL)
    ap.add_argument("--full-h", action="store_true",
                    help="sweep M+N+1 distinct h values (certifies identities polynomial in h)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="JSON report path")
    ap.add_argument("--tsv", help="optional TSV dump of Gaudin spectra")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(suite=ns.suite, M=ns.M, N=ns.N, z=ns.z, lam=ns.lam, h_list=tuple(ns.h),
                    m=ns.m, n=ns.n, seed=ns.seed, max_dim=ns.max_dim,
                    tol_residual=ns.tol_residual, tol_gap=ns.tol_gap, tol_nullity=ns.tol_nullity,
                    full_h=ns.full_h, draws=ns.draws, jobs=ns.jobs, out=ns.out, tsv=ns.tsv)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.M is None and cfg.m is not None:
        cfg.M = len(cfg.m)
    if cfg.N is None and cfg.n is not None:
        cfg.N = len(cfg.n)
    if cfg.M is None and cfg.lam is not None:
        cfg.M = len(cfg.lam)
    if cfg.N is None and cfg.z is not None:
        cfg.N = len(cfg.z)
    if cfg.M is not None and cfg.N is None and cfg.m is not None:
        cfg.N = cfg.M
    for name in ("M", "N"):
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise ConfigError(f"--{name} must be positive")
    if (cfg.M is None) != (cfg.N is None):
        raise ConfigError("give both --M and --N (or neither, for the default grid)")
    if cfg.z is not None and len(cfg.z) != cfg.N:
        raise ConfigError(f"--z needs {cfg.N} values")
    if cfg.lam is not None and len(cfg.lam) != cfg.M:
        raise ConfigError(f"--lambda needs {cfg.M} values")
    if cfg.m is not None and len(cfg.m) != cfg.M:
        raise ConfigError(f"--m needs {cfg.M} entries")
    if cfg.n is not None and len(cfg.n) != cfg.N:
        raise ConfigError(f"--n needs {cfg.N} entries")
    if cfg.m is not None and cfg.n is not None and sum(cfg.m) != sum(cfg.n):
        raise ConfigError("weights must have equal sums")
    if any(x < 0 for x in (cfg.m or ()) + (cfg.n or ())):
        raise ConfigError("weights must be nonnegative")
    if not cfg.h_list:
        raise ConfigError("--h needs at least one value")
    if cfg.max_dim < 1 or cfg.jobs < 1 or cfg.draws < 1:
        raise ConfigError("--max-dim, --jobs and --draws must be positive")


def balanced(total: int, parts: int) -> Tuple[int, ...]:
    q, r = divmod(total, parts)
    return tuple(q + (1 if i < r else 0) for i in range(parts))


def auto_small(M: int, N: int, m=None, n=None,
               max_dim: Optional[int] = None) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Fill in missing weights by spreading the total evenly.

    With both sides automatic the total starts at ``max(M, N)`` and shrinks
    until the weight space fits under ``max_dim``.
    """
    if m is not None and n is None:
        return tuple(m), balanced(sum(m), N)
    if n is not None and m is None:
        return balanced(sum(n), M), tuple(n)
    if m is not None:
        return tuple(m), tuple(n)
    total = max(M, N)
    while total > 1 and max_dim is not None:
        if gr.enumerate_basis(balanced(total, M), balanced(total, N)).dim <= max_dim:
            break
        total -= 1
    return balanced(total, M), balanced(total, N)


def h_values(cfg: RunConfig, M: int, N: int) -> Tuple[Fraction, ...]:
    hs = list(dict.fromkeys(cfg.h_list))
    if cfg.full_h:
        k = 2
        while len(hs) < M + N + 1:
            if Fraction(k) not in hs:
                hs.append(Fraction(k))
            k += 1
    return tuple(hs)


# ---------------------------------------------------------------------------
# jobs
# ---------------------------------------------------------------------------

def _job_identities_point(d: ProblemData, hs: Sequence[Fraction]) -> List[ids.CheckReport]:
    out = []
    for h in hs:
        dh = d.with_h(h)
        out.append(ids.check_theorem_main(dh))
        out.append(ids.check_cor_mn(dh))
        out.append(ids.check_duality_rel(dh))
        for sigma in permutations(range(d.M)):
            out.append(ids.check_row_sign(dh, sigma))
    if len(set(hs)) >= 2:
        out.append(ids.check_h_independence(d, hs))
    out.append(ids.check_gauss(d))
    return out


def _job_mutation(d: ProblemData, hs: Sequence[Fraction]) -> List[ids.CheckReport]:
    rep = ids.check_h_independence(d, hs, xp_sign=-1)
    # the corrupted engine must be caught
    return [ids.CheckReport("h_independence_mutant_detected", rep.params, not rep.passed,
                            rep.lhs_terms, rep.rhs_terms, None if not rep.passed else ["mutant passed", ""],
                            rep.wall_time_ms, {"mutant_report": rep.to_dict()})]


def _job_capelli(M: int, s: Fraction, h: Fraction) -> List[ids.CheckReport]:
    return [ids.check_capelli_chain(M, M, s, h)]


def _job_duality(d: ProblemData, m, n) -> List[ids.CheckReport]:
    basis = gr.enumerate_basis(m, n)
    tf = gr.transfer_family(d, basis, gr.GL_M)
    pts = gr.certifying_points(tf)
    out = [gr.check_commutativity(tf, pts)]
    # negative control: second factor built with one lambda perturbed
    lam = list(d.lam)
    lam[0] += Fraction(1, 3)
    while len(set(lam)) < len(lam):
        lam[0] += Fraction(1, 3)
    tf_bad = gr.transfer_family(ProblemData(d.M, d.N, d.z, lam, d.h), basis, gr.GL_M)
    neg = gr.check_commutativity(tf, pts, other=tf_bad)
    out.append(ids.CheckReport("commutativity_mutant_detected", neg.params, not neg.passed,
                               first_discrepancy=None if not neg.passed else ["mutant commuted", ""],
                               wall_time_ms=neg.wall_time_ms))
    tfN = gr.transfer_family(d, basis, gr.GL_N)
    out.append(gr.check_commutativity(tfN, gr.certifying_points(tfN)))
    out.append(gr.check_hamiltonian_duality(d, m, n))
    out.append(gr.check_theorem_dual(d, m, n))
    return out


def _job_spectra(d: ProblemData, m, n, seed: int, tols: Tuple[float, float, float]) -> List[ids.CheckReport]:
    tol_res, tol_gap, tol_null = tols
    out = [sp.check_simple_spectrum(d, m, n, [seed], tol_gap, tol_res)]
    basis = gr.enumerate_basis(m, n)
    tfM = gr.transfer_family(d, basis, gr.GL_M)
    tfN = gr.transfer_family(d, basis, gr.GL_N)
    js = sp.joint_eigenvectors(sp.bethe_operators(tfM), tol_res, seed, tol_gap)
    for k, w in enumerate(js.vectors):
        rep = sp.check_eigen_dual(tfM, tfN, w, 1e-8)
        rep.details["vector"] = k
        out.append(rep)
        ode = sp.build_Dw(tfM, w, tol_res)
        divides = sp.denominators_divide(ode)
        out.append(ids.CheckReport("dw_singular_points", dict(d.to_dict(), vector=k), divides,
                                   first_discrepancy=None if divides else ["denominator", "does not divide"]))
        for i in range(d.M):
            kr = sp.check_kernel_property(ode, d.lam[i], basis.m[i], tol_null)
            kr.params.update(vector=k, i=i + 1, seed=seed)
            out.append(kr)
    return out


def _job_witness(tols) -> List[ids.CheckReport]:
    d, m, n = DEGENERATE_WITNESS
    rep = sp.check_simple_spectrum(d, m, n, [0], tols[1], tols[0], require_distinct=False)
    # a non-generic witness is expected to be non-simple
    return [ids.CheckReport("degenerate_witness_detected", rep.params, not rep.passed,
                            first_discrepancy=None if not rep.passed else ["witness was simple", ""],
                            wall_time_ms=rep.wall_time_ms, details=rep.details)]


_JOBS: Dict[str, Callable[..., List[ids.CheckReport]]] = {
    "identities": _job_identities_point,
    "mutation": _job_mutation,
    "capelli": _job_capelli,
    "duality": _job_duality,
    "spectra": _job_spectra,
    "witness": _job_witness,
}


def _run_job(job):
    name, args = job
    return _JOBS[name](*args)


def _data_points(cfg: RunConfig, M: int, N: int, rng: random.Random, distinct: bool) -> List[ProblemData]:
    if cfg.z is not None and cfg.lam is not None:
        return [ProblemData(M, N, cfg.z, cfg.lam)]
    pts = []
    for _ in range(cfg.draws):
        d = random_problem(M, N, 1, rng, distinct)
        pts.append(ProblemData(M, N, cfg.z if cfg.z is not None else d.z,
                               cfg.lam if cfg.lam is not None else d.lam))
    return pts


def plan(cfg: RunConfig) -> List[Tuple[str, tuple]]:
    """Deterministic job list for a configuration."""
    rng = random.Random(cfg.seed)
    jobs: List[Tuple[str, tuple]] = []
    explicit = cfg.M is not None
    if cfg.suite in ("identities", "all"):
        shapes = [(cfg.M, cfg.N)] if explicit else [(M, N) for M in (1, 2, 3) for N in (1, 2, 3)]
        for M, N in shapes:
            hs = h_values(cfg, M, N)
            for d in _data_points(cfg, M, N, rng, distinct=True):
                jobs.append(("identities", (d, hs)))
        if not explicit:
            jobs.append(("identities", (REPEATED_Z_POINT, h_values(cfg, 2, 3))))
        mut_shape = (cfg.M, cfg.N) if explicit and cfg.M >= 2 else (2, 2)
        mut = random_problem(*mut_shape, 1, random.Random(cfg.seed + 1))
        jobs.append(("mutation", (mut, h_values(cfg, *mut_shape))))
        sizes = [cfg.M] if explicit and cfg.M == cfg.N else ([] if explicit else [1, 2, 3])
        cap_h = tuple(dict.fromkeys(CAPELLI_H + tuple(cfg.h_list))) if not explicit else tuple(cfg.h_list)
        for M in sizes:
            for s in CAPELLI_S:
                for h in cap_h:
                    jobs.append(("capelli", (M, s, h)))
    if cfg.suite in ("duality", "spectra", "all"):
        for M, N, m, n in duality_cases(cfg):
            if cfg.suite in ("duality", "all"):
                for d in _data_points(cfg, M, N, rng, distinct=True)[:1]:
                    jobs.append(("duality", (d, m, n)))
            if cfg.suite in ("spectra", "all"):
                for k in range(3):
                    seed = cfg.seed + k
                    d = _data_points(cfg, M, N, random.Random(seed), distinct=True)[0]
                    jobs.append(("spectra", (d, m, n, seed,
                                             (cfg.tol_residual, cfg.tol_gap, cfg.tol_nullity))))
        if cfg.suite in ("spectra", "all") and not explicit:
            jobs.append(("witness", ((cfg.tol_residual, cfg.tol_gap, cfg.tol_nullity),)))
    return jobs


def duality_cases(cfg: RunConfig):
    if cfg.M is None:
        return list(DUALITY_CASES)
    m, n = auto_small(cfg.M, cfg.N, cfg.m, cfg.n, cfg.max_dim)
    return [(cfg.M, cfg.N, m, n)]


def check_guard(cfg: RunConfig) -> Optional[str]:
    if cfg.suite not in ("duality", "spectra", "all"):
        return None
    for M, N, m, n in duality_cases(cfg):
        dim = gr.enumerate_basis(m, n).dim
        if dim > cfg.max_dim:
            return f"weight space m={list(m)} n={list(n)} has dimension {dim} > --max-dim {cfg.max_dim}"
    return None


def execute(cfg: RunConfig) -> List[ids.CheckReport]:
    jobs = plan(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    return [r for batch in results for r in batch]


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".capelli-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_document(cfg: RunConfig, reports: Sequence[ids.CheckReport]) -> dict:
    return {
        "schema": ids.SCHEMA,
        "config": cfg.to_dict(),
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }


def spectra_tsv(reports: Sequence[ids.CheckReport]) -> str:
    lines = ["M\tN\tm\tn\tseed\tvector\thamiltonian\teigenvalue"]
    for r in reports:
        if r.check_id != "simple_spectrum" or not r.details.get("gaudin_eigenvalues"):
            continue
        p = r.params
        for k, row in enumerate(r.details["gaudin_eigenvalues"]):
            for a, val in enumerate(row, start=1):
                lines.append("\t".join(map(str, (p["M"], p["N"], ",".join(map(str, p["m"])),
                                                 ",".join(map(str, p["n"])), p["seeds"][0], k, a,
                                                 repr(val)))))
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> int:
    guard = check_guard(cfg)
    if guard:
        log.error("guard: %s", guard)
        return EXIT_GUARD
    try:
        reports = execute(cfg)
    except (gr.RepeatedParameters, gr.WeightMismatch, ConfigError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check_id:<34} {json.dumps(r.params, sort_keys=True)}")
    doc = report_document(cfg, reports)
    if cfg.out:
        write_atomic(cfg.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if cfg.tsv:
        write_atomic(cfg.tsv, spectra_tsv(reports))
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} checks passed")
    return EXIT_OK if doc["passed"] else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        ap.print_usage(sys.stderr)
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
