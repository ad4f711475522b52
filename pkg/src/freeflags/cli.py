"""Command-line entry point: ``freeflags <command> ...``; JSON on stdout."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__

COMMANDS = ("pfr", "ball", "sphere", "cayley", "power", "walk", "sampler", "verify-all")


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, seed_required: bool = False):
    p.add_argument("--seed", type=int, required=seed_required, default=None if seed_required else 0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--budget-mb", type=int, default=4000)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freeflags")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pfr", help="free projective planes P^2_fr(O_r)")
    p.add_argument("action", choices=["spectrum", "check", "export"])
    p.add_argument("--ring", required=True, help="zmod:p^r or ff:q^r")
    p.add_argument("--numeric", action="store_true", help="also run the floating-point eigensolver")
    _common(p)

    p = sub.add_parser("ball", help="ball around the base vertex of the building")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-r", type=int, required=True, help="radius")
    p.add_argument("--kind", choices=["padic", "laurent"], default="padic")
    _common(p)

    p = sub.add_parser("sphere", help="sphere S_r: strata, degrees, cut and spectrum")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--kind", choices=["padic", "laurent"], default="padic")
    _common(p)

    p = sub.add_parser("cayley", help="Cayley complexes X^{p,q}")
    p.add_argument("action", choices=["gen", "complex", "link"])
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-q", type=int, default=None)
    _common(p)

    p = sub.add_parser("power", help="geodesic power link at the base vertex of a building ball")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--kind", choices=["padic", "laurent"], default="padic")
    p.add_argument("--iso-budget", type=float, default=600.0)
    _common(p)

    p = sub.add_parser("walk", help="geodesic operators and r-walks on a Cayley complex")
    p.add_argument("action", choices=["am-spectrum", "mix"])
    p.add_argument("--complex", type=Path, default=None, help="directory written by 'cayley complex'")
    p.add_argument("-p", type=int, default=13)
    p.add_argument("-q", type=int, default=5)
    p.add_argument("-m", type=int, default=1)
    p.add_argument("-k", type=int, default=6)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-6)
    _common(p)

    p = sub.add_parser("sampler", help="sampler experiments")
    p.add_argument("action", choices=["double"])
    p.add_argument("--complex", type=Path, default=None)
    p.add_argument("-p", type=int, default=13)
    p.add_argument("-q", type=int, default=5)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("-K", type=int, default=8)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--trials", type=int, default=10**5)
    _common(p, seed_required=True)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="desk-scale suite (default)")
    g.add_argument("--extended", action="store_true", help="also run the large Lanczos criterion")
    p.add_argument("--only", nargs="*", default=None, help="criterion ids, e.g. 1 7 11b")
    p.add_argument("--trials", type=int, default=10**5)
    _common(p, seed_required=True)
    return ap


# -- commands ------------------------------------------------------------------


def _ring(spec):
    from .ring import parse_ring_spec

    try:
        return parse_ring_spec(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_pfr(a):
    from .flags import build_pfr2, export_edge_list
    from .spectral import SparseOperator, eigensolve, expected_spectrum, spectrum_exact, verify_annihilator, verify_N_table, verify_q_delta

    ring = _ring(a.ring)
    G = build_pfr2(ring)
    out = {"meta": G.metadata()}
    if a.action == "spectrum":
        rep = spectrum_exact(G)
        out["spectrum"] = rep.to_json()
        out["expected_values"] = expected_spectrum(ring.q, ring.r)["adjacency"]
        if a.numeric:
            num = eigensolve(SparseOperator.from_adjacency(G.adjacency_lists()), mode="dense")
            w = np.array([e["value_float"] for e in num.eigenvalues])
            out["numeric_max_error"] = float(np.max(np.abs(np.sort(w) - rep.floats())))
    elif a.action == "check":
        out["annihilator"] = verify_annihilator(G)
        nt = verify_N_table(G)
        out["n_table"] = {"consistent": nt["consistent"], "mismatches": nt["mismatches"]}
        out["q_delta"] = verify_q_delta(G)
    else:
        if a.out is None:
            raise UsageError("export needs --out DIR")
        out["written"] = str(a.out)
        export_edge_list(G, a.out)
    return out


def _ball(a, R):
    from .building import build_ball

    return build_ball(a.p, R, kind=a.kind, max_vertices=max(1000, a.budget_mb * 1000))


def cmd_ball(a):
    from .building import distance_matches_strata, stratify
    from .complex import write_complex

    ball = _ball(a, a.r)
    counts = np.bincount(ball.dist, minlength=a.r + 1).tolist()
    st = stratify(ball)
    table = {}
    for s in st.values():
        table[",".join(map(str, s))] = table.get(",".join(map(str, s)), 0) + 1
    out = {"p": a.p, "radius": a.r, "kind": a.kind, "n_vertices": ball.n, "sphere_sizes": counts, "strata": dict(sorted(table.items())), "distance_stratum_mismatches": distance_matches_strata(ball)}
    if a.out is not None:
        a.out.mkdir(parents=True, exist_ok=True)
        write_complex(ball.to_colored_complex(), a.out / "ball.complex")
        out["written"] = str(a.out / "ball.complex")
    return out


def cmd_sphere(a):
    from .building import export_sphere, half_sphere_cut, lambda_r_formula, sphere_degree_check, sphere_rayleigh_witness, sphere_size, sphere_spectrum, sphere_vertices, sweep_cut

    ball = _ball(a, a.r)
    S = sphere_vertices(ball, a.r)
    out = {"p": a.p, "r": a.r, "size": len(S), "size_formula": sphere_size(a.p, a.r)}
    out["degree_mismatches"] = len(sphere_degree_check(ball, a.r)["mismatches"])
    out["spectrum"] = sphere_spectrum(ball, a.r)
    out["lambda_formula"] = lambda_r_formula(a.p, a.r)
    out["sweep_cut"] = sweep_cut(ball, a.r)
    if a.r >= 3:
        out["rayleigh_witness"] = sphere_rayleigh_witness(ball, a.r)
    if a.r >= 3 and a.r % 2:
        cut = half_sphere_cut(ball, a.r)
        out["certificate"] = {k: str(cut[k]) if k in ("ratio", "bound") else cut[k] for k in ("cut_edges", "volume", "ratio", "bound")}
    if a.out is not None:
        export_sphere(ball, a.r, a.out)
        if "certificate" in out:
            (a.out / "certificate.json").write_text(json.dumps(out["certificate"], sort_keys=True) + "\n")
        out["written"] = str(a.out)
    return out


def _cayley_dir_path(d: Path):
    bins = sorted(d.glob("*.bin"))
    if not bins:
        raise UsageError(f"no Cayley complex (*.bin) in {d}")
    return bins[0]


def cmd_cayley(a):
    from .cayley import build_cayley, enumerate_sp, identity_link, pgl3_order, write_cayley

    S = enumerate_sp(a.p)
    if a.action == "gen":
        mats = [[[[int(z.real), int(z.imag)] for z in row] for row in s] for s in S]
        return {"p": a.p, "count": len(S), "format": "3x3 matrices of [re, im] pairs", "generators": mats}
    if a.q is None:
        raise UsageError(f"cayley {a.action} needs -q")
    if a.action == "link":
        adj = identity_link(S, a.q)
        w = np.linalg.eigvalsh(_dense(adj))
        vals, counts = np.unique(np.round(w, 8), return_counts=True)
        return {"p": a.p, "q": a.q, "vertices": len(adj), "spectrum": [{"value_float": float(v), "multiplicity": int(c)} for v, c in zip(vals[::-1], counts[::-1])]}
    t = time.perf_counter()
    C = build_cayley(a.p, a.q, a.budget_mb, S)
    out = {"p": a.p, "q": a.q, "n": C.n, "degree": C.degree, "group_order_pgl3": pgl3_order(a.q), "tripartite": C.tripartite()}
    if a.out is not None:
        a.out.mkdir(parents=True, exist_ok=True)
        path = a.out / f"cayley_p{a.p}_q{a.q}.bin"
        write_cayley(C, path)
        out["written"] = str(path)
    out["_wall"] = time.perf_counter() - t
    return out


def _dense(adj):
    n = len(adj)
    M = np.zeros((n, n))
    for i, nb in enumerate(adj):
        M[i, nb] = 1
    return M


def cmd_power(a):
    from .building import power_link_witness
    from .complex import power_link
    from .flags import build_pfr2
    from .iso import adjacency_from_edges, find_isomorphism

    ball = _ball(a, 2 * a.r)
    X = ball.to_colored_complex()
    A, B, E = power_link(X, 0, a.r)
    verts = list(A) + list(B)
    idx = {v: i for i, v in enumerate(verts)}
    adj = adjacency_from_edges(len(verts), [(idx[u], idx[w]) for u, w in E])
    wit = power_link_witness(ball, a.r)
    out = {"p": a.p, "r": a.r, "link_vertices": len(verts), "link_edges": len(E), "witness_isomorphism": wit["ok"]}
    if len(verts) <= 300:
        G = build_pfr2(ball.ring.with_precision(a.r) if a.kind == "padic" else _ring(f"ff:{a.p}^{a.r}"))
        res = find_isomorphism(adj, G.adjacency_lists(), budget_s=a.iso_budget)
        out["search"] = res.status
    return out


def _setup(a):
    from .cayley import enumerate_sp, load_or_build, read_cayley, sigma_tables
    from .walks import CayleySetup

    if a.complex is not None:
        C = read_cayley(_cayley_dir_path(a.complex))
    else:
        try:
            C = load_or_build(a.p, a.q, a.budget_mb)
        except OverflowError as exc:
            raise UsageError(str(exc)) from None
    S = enumerate_sp(C.p)
    sig = sigma_tables(S)
    return CayleySetup(S, sig, C, np.array(sig.closers, dtype=np.int64))


def cmd_walk(a):
    from .walks import am_top_spectrum, rwalk_mix_estimate

    X = _setup(a)
    if a.action == "am-spectrum":
        return am_top_spectrum(X, a.m, k=a.k, tol=a.tol, seed=a.seed)
    return rwalk_mix_estimate(X, a.k, a.steps, a.trials, a.seed)


def cmd_sampler(a):
    from .walks import double_sampler_experiment

    X = _setup(a)
    try:
        return double_sampler_experiment(X, a.k, a.K, a.eps, a.alpha, a.trials, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_verify_all(a):
    from .acceptance import run_suite

    only = None if a.only is None else set(a.only)
    log = lambda s: print(s, file=sys.stderr, flush=True)
    results, timings = run_suite(seed=a.seed, extended=a.extended, only=only, budget_mb=a.budget_mb, trials=a.trials, log=log)
    return {"mode": "extended" if a.extended else "quick", "criteria": results, "all_passed": all(r["passed"] for r in results), "_timings": timings}


HANDLERS = {
    "pfr": cmd_pfr,
    "ball": cmd_ball,
    "sphere": cmd_sphere,
    "cayley": cmd_cayley,
    "power": cmd_power,
    "walk": cmd_walk,
    "sampler": cmd_sampler,
    "verify-all": cmd_verify_all,
}


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    return str(o)


def _strip(obj):
    """Drop arrays and private keys that do not belong in the payload."""
    if isinstance(obj, dict):
        return {k: _strip(v) for k, v in obj.items() if not str(k).startswith("_") and k not in ("vectors", "mapping", "per_vertex")}
    if isinstance(obj, (list, tuple)):
        return [_strip(v) for v in obj]
    return obj


def _pretty(report) -> str:
    lines = [f"freeflags {report['version']}  {' '.join(report['command'])}"]
    res = report.get("results", {})
    if "criteria" in res:
        for c in res["criteria"]:
            lines.append(f"  {'PASS' if c['passed'] else 'FAIL'}  {str(c['id']):>4}  {c['name']}")
    else:
        for k, v in res.items():
            s = json.dumps(v, default=_default)
            lines.append(f"  {k:<28} {s if len(s) < 100 else s[:97] + '...'}")
    if "error" in report:
        lines.append(f"  error: {report['error']}")
    lines.append(f"  wall clock {report['wall_clock']:.2f}s")
    return "\n".join(lines)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    if args.out is not None and args.command != "verify-all":
        args.out = Path(args.out)
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in ("pretty", "threads")}
    report = {
        "command": list(argv),
        "config_hash": hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16],
        "version": __version__,
    }
    t = time.perf_counter()
    code = 0
    try:
        raw = HANDLERS[args.command](args)
        if args.command == "verify-all":
            report["timings"] = raw.get("_timings", {})
            code = 0 if raw["all_passed"] else 1
        report["results"] = _strip(raw)
    except UsageError as exc:
        report["error"] = str(exc)
        code = 2
    except OverflowError as exc:
        report["error"] = f"budget exceeded: {exc}"
        code = 3
    report["wall_clock"] = round(time.perf_counter() - t, 3)
    if args.pretty:
        print(_pretty(report))
    else:
        print(json.dumps(report, sort_keys=True, default=_default))
    if args.out is not None and args.command == "verify-all":
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "report.json").write_text(json.dumps(report, sort_keys=True, indent=1, default=_default) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
