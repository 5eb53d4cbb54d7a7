"""Command-line front end: share, corrupt, reconstruct, analyze, simulate.

Exit codes: 0 success, 2 parameter error, 3 detected abort, 4 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import adversary, flowgraph, hashing, scheme
from .errors import ParameterError
from .scheme import PartyState, SchemeParams

FORMAT_VERSION = 1
EXIT_OK, EXIT_PARAM, EXIT_ABORT, EXIT_INTERNAL = 0, 2, 3, 4
HEADER_BYTES = 8
NETWORK_ALIASES = {"fig1": "two-user", "fig2": "single-user"}


# -- secret encoding -----------------------------------------------------------

def encode_secret_bytes(data: bytes, capacity: int, q: int) -> np.ndarray:
    """8-byte little-endian length, then one element per byte, zero padded."""
    if q <= 256:
        raise ParameterError(f"byte secrets need q > 256, got q={q}; use --elements")
    if capacity < HEADER_BYTES:
        raise ParameterError(f"byte secrets need capacity >= {HEADER_BYTES} elements for the "
                             f"length header, got {capacity}; use --elements")
    if len(data) > capacity - HEADER_BYTES:
        raise ParameterError(f"secret of {len(data)} bytes exceeds capacity "
                             f"{capacity - HEADER_BYTES} bytes")
    raw = len(data).to_bytes(HEADER_BYTES, "little") + data
    out = np.zeros(capacity, dtype=np.int64)
    out[:len(raw)] = np.frombuffer(raw, dtype=np.uint8)
    return out


def decode_secret_bytes(elements) -> bytes:
    el = [int(x) for x in elements]
    if len(el) < HEADER_BYTES or any(x > 255 for x in el):
        raise ParameterError("element vector is not a byte encoding")
    length = int.from_bytes(bytes(el[:HEADER_BYTES]), "little")
    if length > len(el) - HEADER_BYTES:
        raise ParameterError("length header exceeds the element count")
    return bytes(el[HEADER_BYTES:HEADER_BYTES + length])


def parse_elements(text: str) -> list[int]:
    text = text.strip()
    if text.startswith("["):
        return [int(x) for x in json.loads(text)]
    return [int(x) for x in text.replace(",", " ").split()]


# -- bundle I/O ----------------------------------------------------------------

def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def params_to_dict(p: SchemeParams) -> dict:
    return asdict(p)


def params_from_dict(d: dict) -> SchemeParams:
    names = {f.name for f in fields(SchemeParams)}
    unknown = set(d) - names
    if unknown:
        raise ParameterError(f"unknown parameter fields {sorted(unknown)}")
    return SchemeParams(**d)


def make_manifest(params: SchemeParams, encoding: str) -> dict:
    sp = params.staircase
    graph = scheme.hash_graph(params) if params.hashed else None
    return {
        "format_version": FORMAT_VERSION,
        "params": params_to_dict(params),
        "alpha": sp.alpha,
        "levels": [[D, g] for D, g in zip(sp.levels, sp.gammas)],
        "hash_edges": [list(e) for e in graph.edges] if graph else [],
        "pair_index_order": "hash share columns follow hash_edges",
        "secret_encoding": encoding,
        "capacity_elements": scheme.capacity(params),
        "corruption_log": [],
    }


def party_record(st: PartyState) -> dict:
    rec = {"party": st.party, "payload": st.payload.tolist()}
    if st.hash_shares is not None:
        rec["hash_shares_shape"] = list(st.hash_shares.shape)
        rec["hash_shares"] = st.hash_shares.ravel(order="F").tolist()
    return rec


def party_from_record(rec: dict, params: SchemeParams) -> PartyState:
    sp = params.staircase
    payload = np.asarray(rec["payload"], dtype=np.int64)
    if payload.shape != (sp.alpha, params.v):
        raise ParameterError(f"party {rec.get('party')}: payload shape {payload.shape} "
                             f"does not match ({sp.alpha}, {params.v})")
    hs = None
    if "hash_shares" in rec:
        shape = tuple(rec["hash_shares_shape"])
        hs = np.asarray(rec["hash_shares"], dtype=np.int64).reshape(shape, order="F")
    for arr in (payload, hs):
        if arr is not None and arr.size and (arr.min() < 0 or arr.max() >= params.q):
            raise ParameterError(f"party {rec.get('party')}: element outside [0, q)")
    return PartyState(int(rec["party"]), payload, hs)


def write_bundle(out: Path, manifest: dict, states) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(_dump(manifest))
    for st in states:
        (out / f"party_{st.party}.json").write_text(_dump(party_record(st)))


def read_manifest(path: Path) -> tuple[dict, SchemeParams]:
    mf = path / "manifest.json"
    if not mf.exists():
        raise ParameterError(f"no manifest.json in {path}")
    manifest = json.loads(mf.read_text())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ParameterError(f"unsupported bundle format {manifest.get('format_version')!r}")
    return manifest, params_from_dict(manifest["params"])


def read_party(path: Path, params: SchemeParams, party: int) -> PartyState:
    f = path / f"party_{party}.json"
    if not f.exists():
        raise ParameterError(f"missing record for party {party}")
    return party_from_record(json.loads(f.read_text()), params)


def read_bundle(path: Path):
    manifest, params = read_manifest(path)
    states = [read_party(path, params, i) for i in range(1, params.n + 1)]
    return manifest, params, states


def _parse_parties(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ParameterError(f"cannot parse party list {text!r}") from None
    if len(set(out)) != len(out):
        raise ParameterError(f"duplicate parties in {text!r}")
    return out


# -- commands --------------------------------------------------------------------

def _params_from_args(a) -> SchemeParams:
    return SchemeParams(n=a.n, k=a.k, z_ro=a.zro, z_wo=a.zwo, z_rw=a.zrw, q=a.q, v=a.v,
                        mode=a.mode, hash_graph=a.hash_graph, graph_seed=a.graph_seed)


def cmd_share(a) -> int:
    params = _params_from_args(a)
    params.require_feasible()
    cap = scheme.capacity(params)
    if a.secret_file == "-":
        raw = sys.stdin.buffer.read()
    else:
        raw = Path(a.secret_file).read_bytes()
    if a.elements:
        secret = parse_elements(raw.decode())
        if len(secret) > cap:
            raise ParameterError(f"secret of {len(secret)} elements exceeds capacity {cap}")
        secret = secret + [0] * (cap - len(secret))
        encoding = "elements"
    else:
        secret = encode_secret_bytes(raw, cap, params.q)
        encoding = "bytes"
    rng = np.random.default_rng(a.seed)
    states = scheme.deal(params, secret, rng)
    manifest = make_manifest(params, encoding)
    write_bundle(Path(a.out_dir), manifest, states)
    print(_dump({"out_dir": str(a.out_dir), "capacity_elements": cap, "encoding": encoding}), end="")
    return EXIT_OK


def cmd_corrupt(a) -> int:
    path = Path(a.dir)
    manifest, params, states = read_bundle(path)
    parties = _parse_parties(a.parties)
    if any(not 1 <= p <= params.n for p in parties):
        raise ParameterError(f"parties must lie in 1..{params.n}")
    if len(parties) > params.z_w:
        raise ParameterError(f"cannot corrupt {len(parties)} parties: z_w = {params.z_w}")
    strategy = a.strategy.replace("-", "_")
    rw = tuple(sorted(parties[:params.z_rw]))
    wo = tuple(sorted(parties[params.z_rw:]))
    placement = adversary.AdversaryPlacement((), wo, rw)
    rng = np.random.default_rng(a.seed)
    bad = adversary.corrupt(strategy, params, placement, states, rng, exact=False)
    for st in bad:
        if st.party in parties:
            (path / f"party_{st.party}.json").write_text(_dump(party_record(st)))
    manifest["corruption_log"].append({"parties": sorted(parties), "strategy": strategy,
                                       "seed": a.seed})
    (path / "manifest.json").write_text(_dump(manifest))
    print(_dump({"corrupted": sorted(parties), "strategy": strategy}), end="")
    return EXIT_OK


def cmd_reconstruct(a) -> int:
    path = Path(a.dir)
    manifest, params = read_manifest(path)
    parties = _parse_parties(a.parties)
    if not params.k <= len(parties) <= params.n:
        raise ParameterError(f"need between k={params.k} and n={params.n} parties, got {len(parties)}")
    states = [read_party(path, params, p) for p in parties]
    responses = scheme.collect_responses(params, states, parties)
    report = scheme.reconstruct(params, responses)
    out = Path(a.out)
    rep_path = Path(a.report) if a.report else out.with_name(out.name + ".report.json")
    rep = report.to_dict()
    rep["comm_cost"] = scheme.comm_cost(params, len(parties))
    rep_path.write_text(_dump(rep))
    print(_dump(rep), end="")
    if report.status == "success":
        if manifest["secret_encoding"] == "bytes":
            out.write_bytes(decode_secret_bytes(report.secret))
        else:
            out.write_text(_dump(report.secret.tolist()))
        return EXIT_OK
    return EXIT_ABORT if report.status == "detected-abort" else EXIT_INTERNAL


def _fraction(x) -> str:
    return str(Fraction(x))


def cmd_analyze(a) -> int:
    params = _params_from_args(a)
    ok, text = params.condition()
    if a.what == "capacity":
        out = {"capacity_elements": scheme.capacity(params), "condition": text, "holds": ok}
        if ok:
            out["alpha"] = params.staircase.alpha
    elif a.what == "cost":
        params.require_feasible()
        ds = [a.d] if a.d is not None else range(params.k, params.n + 1)
        out = {"mode": params.mode, "costs": {str(d): scheme.comm_cost(params, d) for d in ds}}
    elif a.what == "mincut":
        params.require_feasible()
        storage = params.staircase.alpha * params.v
        network = NETWORK_ALIASES.get(a.network, a.network)
        if network == "two-user":
            g = flowgraph.two_user_network(storage)
        else:
            g = flowgraph.single_user_network(params.n, a.d if a.d is not None else params.k, storage)
        z = (params.z_ro, params.z_wo, params.z_rw)
        out = {"network": network, "cut": flowgraph.min_cut(g, "D", "U1"),
               "storage_per_party": storage,
               "converse_bound": flowgraph.converse_bound(params.n, params.k, z, storage, params.mode),
               "vertices": len(g.vertices), "edges": len(g.edges)}
    else:
        params.require_feasible()
        graph = scheme.hash_graph(params) if params.hash_graph == "sparse" else hashing.complete_graph(params.n)
        ov = hashing.hash_overhead(graph, params.v, params.staircase.alpha)
        full = hashing.hash_overhead(hashing.complete_graph(params.n), params.v)
        out = {"hash_graph": params.hash_graph, "edges": len(graph.edges), "overhead": _fraction(ov),
               "overhead_float": float(ov), "complete_graph_overhead": _fraction(full)}
    print(_dump(out), end="")
    return EXIT_OK


def cmd_simulate(a) -> int:
    cfg = json.loads(Path(a.config).read_text())
    for key in ("params", "d", "strategy"):
        if key not in cfg:
            raise ParameterError(f"config is missing {key!r}")
    params = params_from_dict(cfg["params"])
    d = int(cfg["d"])
    strategy = str(cfg["strategy"]).replace("-", "_")
    contact = cfg.get("contact", "writers")
    trials = a.trials if a.trials is not None else int(cfg.get("trials", 1000))
    seed = a.seed if a.seed is not None else int(cfg.get("seed", 0))
    stats = adversary.run_trials(params, strategy, d, trials, seed, contact=contact)
    cmp = adversary.compare_to_bound(stats, params, d)
    print(_dump({"params": params_to_dict(params), "d": d, "strategy": strategy, "contact": contact,
                 "seed": seed, "stats": stats.to_dict(), "bound": cmp.to_dict()}), end="")
    return EXIT_OK


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--zro", type=int, default=0)
    p.add_argument("--zwo", type=int, default=0)
    p.add_argument("--zrw", type=int, default=0)
    p.add_argument("--q", type=int, default=257)
    p.add_argument("--v", type=int, default=1)
    p.add_argument("--mode", choices=scheme.MODES, default="lk")
    p.add_argument("--hash-graph", choices=scheme.GRAPH_MODES, default="complete")
    p.add_argument("--graph-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rcess", description="Reliable communication-efficient secret sharing")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("share", help="deal a secret into a share bundle")
    _add_param_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--secret-file", required=True, help="path, or - for stdin")
    s.add_argument("--elements", action="store_true",
                   help="secret file lists field elements instead of raw bytes")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_share)

    c = sub.add_parser("corrupt", help="tamper with parties of a bundle in place")
    c.add_argument("--dir", required=True)
    c.add_argument("--parties", required=True, help="comma separated ids")
    c.add_argument("--strategy", default="blind_additive",
                   choices=sorted(set(adversary.STRATEGIES) | {k.replace("_", "-") for k in adversary.STRATEGIES}))
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_corrupt)

    r = sub.add_parser("reconstruct", help="recover the secret from chosen parties")
    r.add_argument("--dir", required=True)
    r.add_argument("--parties", required=True, help="comma separated ids")
    r.add_argument("--out", required=True)
    r.add_argument("--report", default=None, help="report path (default: <out>.report.json)")
    r.set_defaults(func=cmd_reconstruct)

    z = sub.add_parser("analyze", help="capacity, cost, min-cut and hash overhead")
    z.add_argument("what", choices=("capacity", "cost", "mincut", "overhead"))
    _add_param_flags(z)
    z.add_argument("--d", type=int, default=None)
    z.add_argument("--network", choices=("two-user", "single-user", *NETWORK_ALIASES),
                   default="single-user", help="min-cut instance (single-user contacts k or --d parties)")
    z.set_defaults(func=cmd_analyze)

    m = sub.add_parser("simulate", help="Monte Carlo adversary trials")
    m.add_argument("--config", required=True)
    m.add_argument("--trials", type=int, default=None)
    m.add_argument("--seed", type=int, default=None)
    m.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except Exception as exc:  # pragma: no cover - reported as internal failure
        print(f"internal failure: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
