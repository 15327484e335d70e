"""Command-line front end.

Every command prints its report body as JSON, writes ``<name>.report.json``
and ``<name>.report.txt`` to the output directory and appends its run
manifest to ``runlog/<hash>.jsonl`` there.  Exit codes: 0 success or verdict
holds, 1 verdict violated, 2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import fcntl
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import words as W
from .electro import ElectricContext, legality
from .errors import ParseError, TtdynError, ValidationError
from .flaring import conjugacy_flaring, conjugator_growth, find_conjugator, find_lift, \
    hallway_flaring, k_stretch
from .inputs import file_hash, load_automorphism, load_json, load_system, load_toprep, \
    parse_automorphism
from .laminations import Dynamics, check_admissible, independence_test, leaf_windows, \
    sink_report, transport_windows
from .stallings import SubgroupSystem, is_malnormal, meet
from .trainmap import check_rtt, classify_strata, find_nielsen_paths, validate

EXIT_OK, EXIT_VIOLATED, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3
DEFAULT_SEED = 0


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _text(body: dict) -> str:
    if "summary" in body:
        return body["summary"]
    return _dump(body)


# -- commands ------------------------------------------------------------------
# each returns (name, body, exit_code)

def cmd_validate(a):
    f = load_toprep(a.toprep, check=False)
    rep = validate(f)
    return f"validate-{f.name}", rep, EXIT_OK if rep["valid"] else EXIT_VIOLATED


def cmd_strata(a):
    f = load_toprep(a.toprep)
    return f"strata-{f.name}", classify_strata(f).to_json(), EXIT_OK


def cmd_rtt(a):
    f = load_toprep(a.toprep)
    rep = check_rtt(f, conn_len=a.conn_len)
    return f"rtt-{f.name}", rep, EXIT_OK if rep["pass"] else EXIT_VIOLATED


def cmd_nielsen(a):
    f = load_toprep(a.toprep)
    found = find_nielsen_paths(f, a.max_len, a.period, a.height)
    body = {"max_len": a.max_len, "period": a.period, "height": a.height,
            "paths": [{"path": p, "period": k} for p, k in found]}
    return f"nielsen-{f.name}", body, EXIT_OK


def cmd_meet(a):
    S = meet(load_system(a.system1), load_system(a.system2))
    return f"meet-{Path(a.system1).stem}-{Path(a.system2).stem}", S.to_json(), EXIT_OK


def cmd_malnormal(a):
    ok, wit = is_malnormal(load_system(a.system))
    body = {"malnormal": ok, "witness": None if ok else
            {"s": wit[0], "t": wit[1], "component": wit[2].generators()}}
    return f"malnormal-{Path(a.system).stem}", body, EXIT_OK if ok else EXIT_VIOLATED


def cmd_sink(a):
    f = load_toprep(a.toprep)
    systems = [load_system(p) for p in a.system] or None
    rep = sink_report(f, systems, maxlen=a.maxlen)
    body = dict(rep["sink"])
    body["checks"] = {k: v for k, v in rep.items() if k != "sink"}
    return f"sink-{f.name}", body, EXIT_OK


def cmd_admissible(a):
    f, fi = load_toprep(a.toprep), load_toprep(a.toprep_inv)
    K = load_system(a.system)
    rep = check_admissible(Dynamics(f, fi, K), a.maxlen, a.maxiter)
    code = EXIT_OK if rep["admissible"] else EXIT_VIOLATED
    return f"admissible-{f.name}-{Path(a.system).stem}", rep, code


def cmd_electro(a):
    K = load_system(a.system)
    w = W.reduce(a.word)
    W.check_word(w)
    rank = a.rank or max([W.word_rank(w)] + [W.word_rank("".join(g)) for g in K.generator_lists()])
    ctx = ElectricContext(K, rank)
    body = {"word": w, "dp": ctx.electric_length(w), "cap": a.cap}
    body["exact"] = ctx.exact_electric_length(w, a.cap)
    return f"electro-{Path(a.system).stem}", body, EXIT_OK


def cmd_legality(a):
    f = load_toprep(a.toprep)
    fi = load_toprep(a.inv) if a.inv else None
    K = load_system(a.system)
    ctx = ElectricContext(K, f.graph.rank)
    rep = legality(ctx, Dynamics(f, fi, K), a.circuit, leaf_factor=a.leaf_factor)
    return f"legality-{f.name}", rep.to_json(), EXIT_OK


def _classes(a, rank):
    if a.classes:
        return [W.canonical(c) for c in a.classes]
    return W.conjugacy_classes(a.maxlen, rank)


def _flare_out(name, rep):
    body = rep.to_json()
    body["summary"] = rep.summary()
    return name, body, rep.exit_code


def cmd_flare(a):
    kind = a.kind
    if kind == "cone":
        data = load_json(a.inputs[0])
        aut = parse_automorphism(data["automorphism"])
        comps = data["components"]
        s = int(data.get("s", 0))
        if data.get("find_lift"):
            aut = find_lift(aut, comps[s])
        pairs = data.get("pairs")
        if pairs is None:
            pairs = [(t, find_conjugator(aut, comps[t])) for t in range(len(comps)) if t != s]
        K = SubgroupSystem.from_lists(comps)
        ctx = ElectricContext(K, aut.rank)
        rep = conjugator_growth(ctx, aut, comps, s, [tuple(p) for p in pairs],
                                a.n_max, a.factor or 2)
        return _flare_out(f"flare-cone-{Path(a.inputs[0]).stem}", rep)
    if len(a.inputs) < 2:
        raise ValidationError(f"flare {kind} needs an automorphism and a system")
    phi = load_automorphism(a.inputs[0])
    K = load_system(a.inputs[-1])
    ctx = ElectricContext(K, phi.rank)
    stem = Path(a.inputs[0]).stem
    if kind == "conj":
        rep = conjugacy_flaring(ctx, phi, _classes(a, phi.rank), a.n_max, a.factor or 3)
    elif kind == "hall":
        words = a.words or list(W.words_up_to(a.maxlen, phi.rank))
        rep = hallway_flaring(ctx, phi, words, a.n_max, a.L, a.factor or 2, a.moreover)
    else:
        thetas = [load_automorphism(p) for p in a.theta]
        auts = [phi] + [t.compose(phi).compose(W.invert(t)) for t in thetas]
        auts += [load_automorphism(p) for p in a.inputs[1:-1]]
        if kind == "3of4" and len(auts) != 2:
            raise ValidationError("3of4 needs exactly one partner (--theta or a second file)")
        indep = None
        if a.phi_inv and thetas:
            dyn = Dynamics(load_toprep(a.inputs[0]), load_toprep(a.phi_inv), K)
            wins = leaf_windows(dyn, a.depth)
            res = [independence_test(wins, transport_windows(wins, t), a.L_indep) for t in thetas]
            indep = {"independent": all(r[0] for r in res),
                     "witness": next((r[1] for r in res if not r[0]), None),
                     "L": a.L_indep, "depth": a.depth}
        rep = k_stretch(ctx, auts, _classes(a, phi.rank), a.n_max, a.factor or 3, indep)
    return _flare_out(f"flare-{kind}-{stem}", rep)


def cmd_invert(a):
    aut = load_automorphism(a.aut)
    return f"invert-{Path(a.aut).stem}", W.invert(aut).to_json(), EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ttdyn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"ttdyn {__version__}")
    p.add_argument("--out", default="ttdyn-reports", help="report directory")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--quiet", action="store_true", help="do not echo the report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a topological representative")
    s.add_argument("toprep")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("strata", help="classify strata and PF eigenvalues")
    s.add_argument("toprep")
    s.set_defaults(func=cmd_strata)

    s = sub.add_parser("rtt", help="check the relative train track conditions")
    s.add_argument("toprep")
    s.add_argument("--conn-len", type=int, default=4)
    s.set_defaults(func=cmd_rtt)

    s = sub.add_parser("nielsen", help="search for (periodic) Nielsen paths")
    s.add_argument("toprep")
    s.add_argument("--max-len", type=int, default=6)
    s.add_argument("--period", type=int, default=1)
    s.add_argument("--height", type=int)
    s.set_defaults(func=cmd_nielsen)

    s = sub.add_parser("meet", help="meet of two subgroup systems")
    s.add_argument("system1")
    s.add_argument("system2")
    s.set_defaults(func=cmd_meet)

    s = sub.add_parser("malnormal", help="malnormality test")
    s.add_argument("system")
    s.set_defaults(func=cmd_malnormal)

    s = sub.add_parser("sink", help="nonattracting sink")
    s.add_argument("toprep")
    s.add_argument("--system", action="append", default=[],
                   help="supplied nonattracting system (one per EG stratum)")
    s.add_argument("--maxlen", type=int, default=5)
    s.set_defaults(func=cmd_sink)

    s = sub.add_parser("admissible", help="check SA1-SA5")
    s.add_argument("toprep")
    s.add_argument("toprep_inv")
    s.add_argument("system")
    s.add_argument("--maxlen", type=int, default=6)
    s.add_argument("--maxiter", type=int, default=30)
    s.set_defaults(func=cmd_admissible)

    s = sub.add_parser("electro", help="electric length of a word")
    s.add_argument("system")
    s.add_argument("--word", required=True)
    s.add_argument("--cap", type=int, default=8)
    s.add_argument("--rank", type=int)
    s.set_defaults(func=cmd_electro)

    s = sub.add_parser("legality", help="legality breakdown of a circuit")
    s.add_argument("toprep")
    s.add_argument("system")
    s.add_argument("--circuit", required=True)
    s.add_argument("--inv", help="representative of the inverse")
    s.add_argument("--leaf-factor", type=float, default=1.0)
    s.set_defaults(func=cmd_legality)

    s = sub.add_parser("flare", help="flaring experiments")
    s.add_argument("kind", choices=["conj", "hall", "3of4", "kstretch", "cone"])
    s.add_argument("inputs", nargs="+")
    s.add_argument("--n-max", type=int, default=16)
    s.add_argument("--maxlen", type=int, default=4)
    s.add_argument("--factor", type=float)
    s.add_argument("--classes", nargs="*")
    s.add_argument("--words", nargs="*")
    s.add_argument("--L", type=int, default=0)
    s.add_argument("--moreover", action="store_true")
    s.add_argument("--theta", action="append", default=[])
    s.add_argument("--phi-inv")
    s.add_argument("--L-indep", type=int, default=40)
    s.add_argument("--depth", type=int, default=12)
    s.set_defaults(func=cmd_flare)

    s = sub.add_parser("invert-aut", help="invert a basis automorphism")
    s.add_argument("aut")
    s.set_defaults(func=cmd_invert)
    return p


# -- persistence ------------------------------------------------------------------

def _input_paths(a) -> list:
    out = []
    for key in ("toprep", "toprep_inv", "system", "system1", "system2", "aut", "inv",
                "phi_inv"):
        v = getattr(a, key, None)
        if isinstance(v, str):
            out.append(v)
        elif isinstance(v, list):
            out += v
    out += getattr(a, "inputs", None) or []
    out += getattr(a, "theta", None) or []
    return out


def write_report(out_dir: Path, name: str, body: dict, manifest: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    text = body.get("summary") if isinstance(body.get("summary"), str) else None
    body_json = _dump({k: v for k, v in body.items() if k != "summary"})
    digest = hashlib.sha256(body_json.encode()).hexdigest()
    manifest = dict(manifest, body_sha256=digest)
    report = {"manifest": manifest, "body": json.loads(body_json)}
    path = out_dir / f"{name}.report.json"
    path.write_text(_dump(report))
    (out_dir / f"{name}.report.txt").write_text(text if text else body_json)
    log_dir = out_dir / "runlog"
    log_dir.mkdir(exist_ok=True)
    with open(log_dir / f"{digest[:16]}.jsonl", "a") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        fh.write(json.dumps(manifest, sort_keys=True) + "\n")
        fcntl.flock(fh, fcntl.LOCK_UN)
    return path


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    started = time.time()
    try:
        name, body, code = a.func(a)
    except (ParseError, ValidationError, FileNotFoundError, KeyError) as exc:
        print(f"ttdyn: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TtdynError as exc:
        print(f"ttdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    params = {k: v for k, v in vars(a).items() if k not in ("func", "out", "quiet")}
    manifest = {
        "command": a.command,
        "params": params,
        "inputs": {p: file_hash(p) for p in _input_paths(a)},
        "seed": a.seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "elapsed_s": round(time.time() - started, 3),
    }
    try:
        write_report(Path(a.out), name, body, manifest)
    except OSError as exc:
        print(f"ttdyn: cannot write report to {a.out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not a.quiet:
        sys.stdout.write(_text(body) if "summary" in body else _dump(body))
    return code


if __name__ == "__main__":
    sys.exit(main())
