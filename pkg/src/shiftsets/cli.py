"""Command-line front end.

Exit codes: 0 computed/found, 1 a bounded search found nothing, 2 usage or
input error, 3 a produced result failed its own replay check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import __version__
from .asymptotics import GateError, corollary_f_gate, default_k0_list, liminf_gate, thm2_gate
from .deltaf import (
    ColoringError,
    find_delta_f_witness,
    is_delta_subset,
    ladder_delta_f_check,
    partition_experiment,
)
from .lemma import lemma_bound, lemma_extract
from .natset import (
    CapacityError,
    HTuple,
    IngestionError,
    NatSet,
    SequenceSpec,
    distance_set,
    realize,
    set_global_horizon,
)
from .recurrence import (
    SearchLimits,
    certificate_check,
    load_certificates,
    recurrence_count,
    rk_set,
    rkh_membership,
    rkh_search,
)
from . import suites

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_USAGE = 2
EXIT_VERIFY = 3

FORMATS = ("human", "jsonl", "csv")
MEMORY_WARN_BYTES = 64 * 2**20


class VerificationFailure(Exception):
    pass


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class RunConfig:
    """A parsed command line. ``RunConfig.parse(cfg.argv()) == cfg``."""

    command: str
    options: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, argv: Sequence[str]) -> "RunConfig":
        ns = build_parser().parse_args(list(argv))
        opts = {k: v for k, v in vars(ns).items() if k not in ("command", "handler")}
        return cls(ns.command, opts)

    def argv(self) -> list[str]:
        parser = build_parser()
        sub = _subparser(parser, self.command)
        return (
            _render(parser, self.options, skip={"help", "version", "command"})
            + [self.command]
            + _render(sub, self.options, skip={"help"})
        )


def _render(parser: argparse.ArgumentParser, options: dict, skip: set) -> list[str]:
    positional: list[str] = []
    flags: list[str] = []
    for action in parser._actions:
        if action.dest in skip or isinstance(action, argparse._SubParsersAction):
            continue
        value = options.get(action.dest)
        if value is None or value == action.default:
            continue
        if isinstance(value, list):
            value = ",".join(map(str, value))
        if not action.option_strings:
            positional.append(str(value))
        elif isinstance(action, argparse._StoreTrueAction):
            flags.append(action.option_strings[-1])
        else:
            flags += [action.option_strings[-1], str(value)]
    return positional + flags


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


# --------------------------------------------------------------------------
# output


class Emitter:
    def __init__(self, fmt: str, out=None):
        self.fmt = fmt
        self.out = out or sys.stdout

    def record(self, obj: dict, human: Optional[str] = None) -> None:
        if self.fmt == "jsonl":
            self.out.write(dumps(obj) + "\n")
        elif self.fmt == "human":
            self.out.write((human if human is not None else _human(obj)) + "\n")
        else:
            raise UsageError("csv output is only available for gate tables")

    def table(self, rows: list[dict]) -> None:
        if not rows:
            return
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        self.out.write(buf.getvalue())


class UsageError(ValueError):
    pass


def _human(obj: dict) -> str:
    kind = obj.get("type", "")
    body = " ".join(
        f"{k}={_fmt_value(v)}" for k, v in obj.items() if k != "type"
    )
    return f"{kind}: {body}" if kind else body


def _fmt_value(v) -> str:
    if isinstance(v, list):
        if len(v) > 20:
            return "{" + ",".join(map(str, v[:20])) + f",... ({len(v)} total)}}"
        return "{" + ",".join(map(str, v)) + "}"
    return str(v)


def _set_record(name: str, S: NatSet) -> dict:
    return {"type": "set", "name": name, "size": len(S), "capacity": S.capacity, "elements": list(S)}


def _spec(text: str) -> SequenceSpec:
    return SequenceSpec.parse(text)


def _realize(text: str) -> NatSet:
    return realize(_spec(text))


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _memory_note(bits: int, depth: int) -> None:
    estimate = bits // 8 * max(depth, 1)
    if estimate > MEMORY_WARN_BYTES:
        print(f"memory estimate: ~{estimate / 2**20:.0f} MiB", file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_generate(args, emit: Emitter) -> int:
    S = _realize(args.spec)
    if args.out:
        from .natset import write_set_file

        write_set_file(args.out, S, comment=str(_spec(args.spec)))
    emit.record(_set_record(str(_spec(args.spec)), S))
    return EXIT_OK


def cmd_delta(args, emit: Emitter) -> int:
    A = _realize(args.A)
    emit.record(_set_record("delta", distance_set(A)))
    return EXIT_OK


def cmd_rk(args, emit: Emitter) -> int:
    A = _realize(args.A)
    bound = args.bound or A.capacity
    R = rk_set(A, args.k, bound)
    emit.record(_set_record(f"R_{args.k}", R))
    if args.counts:
        for x in R:
            emit.record({"type": "count", "x": x, "count": recurrence_count(A, x)})
    return EXIT_OK if R else EXIT_NOT_FOUND


def cmd_member(args, emit: Emitter) -> int:
    A = _realize(args.A)
    cert = rkh_membership(A, args.k, HTuple(tuple(args.tuple)))
    if cert is None:
        emit.record({"type": "membership", "tuple": args.tuple, "k": args.k, "member": False})
        return EXIT_NOT_FOUND
    if not certificate_check(A, cert):
        raise VerificationFailure(f"certificate for {args.tuple} failed replay")
    emit.record(cert.to_dict(), cert.to_line() if emit.fmt == "human" else None)
    return EXIT_OK


def cmd_rkh_search(args, emit: Emitter) -> int:
    A = _realize(args.A)
    B = _realize(args.B)
    _memory_note(A.capacity + B.capacity, args.h)
    limits = SearchLimits(args.budget, args.cap, args.b_horizon)
    result = rkh_search(A, B, args.k, args.h, limits, workers=args.workers)
    for c in result.certificates:
        if not certificate_check(A, c):
            raise VerificationFailure(f"certificate for {list(c.tuple)} failed replay")
        emit.record(c.to_dict(), c.to_line() if emit.fmt == "human" else None)
    emit.record(
        {
            "type": "search-summary",
            "status": result.status,
            "examined": result.examined,
            "found": len(result.certificates),
        }
    )
    return EXIT_OK if result.certificates else EXIT_NOT_FOUND


def cmd_lemma(args, emit: Emitter) -> int:
    A = _realize(args.A)
    B = _realize(args.B)
    report = lemma_extract(A, B, args.k, workers=args.workers)
    members = set(A)
    if not (
        report.bound_holds()
        and len(report.intersection) >= args.k
        and all(x - z in members for z in report.Z for x in report.H0)
    ):
        raise VerificationFailure("lemma report failed its invariants")
    emit.record(report.to_dict())
    return EXIT_OK


def cmd_deltaf(args, emit: Emitter) -> int:
    S = _realize(args.S)
    label = str(_spec(args.S))
    if args.rk is not None:
        S = rk_set(S, args.rk, S.capacity)
        label = f"R_{args.rk}({label})"
    bound = args.bound or S.capacity
    _memory_note(bound * bound, 1)
    w = find_delta_f_witness(S, args.h, bound, S_id=label)
    if w is None:
        emit.record({"type": "deltaf-witness", "h": args.h, "S": label, "Z": None, "bound": bound})
        return EXIT_NOT_FOUND
    if not is_delta_subset(w.Z, S):
        raise VerificationFailure(f"witness {list(w.Z)} failed replay")
    emit.record(w.to_dict())
    return EXIT_OK


def cmd_ladder(args, emit: Emitter) -> int:
    for w in ladder_delta_f_check(args.levels, args.horizon_):
        emit.record(w.to_dict())
    return EXIT_OK


def _parse_coloring(text: str) -> dict[int, int]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        d, sep, c = item.partition(":")
        if not sep:
            raise UsageError(f"coloring entries look like distance:piece, got {item!r}")
        out[int(d)] = int(c)
    return out


def cmd_partition(args, emit: Emitter) -> int:
    X = HTuple(tuple(args.X))
    S = _realize(args.S) if args.S else distance_set(NatSet.of(X))
    exp = partition_experiment(S, X, _parse_coloring(args.coloring), args.k)
    emit.record(exp.to_dict())
    return EXIT_OK if exp.found else EXIT_NOT_FOUND


def cmd_gate(args, emit: Emitter) -> int:
    if args.kind == "liminf":
        if not args.B:
            raise UsageError("liminf gate needs --B")
        N = args.N or min(len(_realize(args.A)), len(_realize(args.B)))
        report = liminf_gate(_spec(args.A), _spec(args.B), args.k, args.h, N, args.k0 or [1], args.margin)
    elif args.kind == "corollary":
        if not args.B:
            raise UsageError("corollary gate needs --B")
        N = args.N or min(len(_realize(args.A)), len(_realize(args.B)))
        report = corollary_f_gate(
            _spec(args.A), _spec(args.B), args.f, args.k, N, args.k0 or default_k0_list(N),
            args.margin, args.epsilon,
        )
    else:
        report = thm2_gate(_spec(args.A), args.k, args.N, args.k0, args.epsilon)
    if emit.fmt == "csv":
        emit.table(report.rows())
    elif emit.fmt == "human":
        emit.record({}, f"{report.kind} gate: {report.verdict} (k={report.k}, N={report.N})")
        if report.threshold is not None:
            emit.record({}, f"  threshold {report.threshold:.6g}, argmin (n, m) = {report.argmin}")
        cols = list(report.rows()[0]) if report.rows() else []
        emit.record({}, "  " + "  ".join(f"{c:>16}" for c in cols))
        for row in report.rows():
            emit.record({}, "  " + "  ".join(f"{_num(row[c]):>16}" for c in cols))
    else:
        emit.record(report.to_dict())
    return EXIT_OK


def _num(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def cmd_suite(args, emit: Emitter) -> int:
    name = args.name
    if name == "lemma":
        stream = suites.lemma_suite(args.seed, args.count or 1000, args.workers)
        checks = ("bound_holds", "forms_agree", "intersection_ok", "replay_ok")
    elif name == "proposition":
        stream = suites.proposition_suite(args.seed, args.count or 500, args.workers)
        checks = ("certificates_ok", "delta_in_rk", "matches_oracle")
    elif name == "partition":
        stream = suites.partition_suite(args.seed, args.count or 500, workers=args.workers)
        checks = ("verified",)
    elif name == "echo":
        stream = suites.main_theorem_echo(args.seed, workers=args.workers)
        checks = ()
    else:
        stream = suites.thm2_echo()
        checks = ()
    failed = 0
    for rec in stream:
        if any(not rec.get(c, True) for c in checks) or rec.get("verified") is False:
            failed += 1
        emit.record(rec)
    if failed:
        raise VerificationFailure(f"{failed} records of suite {name!r} failed their checks")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


DATA_FILES = ("example_A.set", "example_F.set", "lemma_A.set", "lemma_B.set")


def _load_bundled(data_dir: Optional[str]) -> dict[str, NatSet]:
    from .natset import read_set_file

    out = {}
    for name in DATA_FILES:
        if data_dir:
            path = Path(data_dir) / name
            values = read_set_file(path)
        else:
            with resources.as_file(resources.files("shiftsets") / "data" / name) as path:
                values = read_set_file(path)
        out[name.split(".")[0]] = NatSet.of(values)
    return out


def worked_checks(data: dict[str, NatSet]) -> list[tuple[str, Callable[[], bool]]]:
    A, F = data["example_A"], data["example_F"]
    LA, LB = data["lemma_A"], data["lemma_B"]
    odds = realize(SequenceSpec("odds", horizon=64))

    def pairs_match() -> bool:
        R2 = rk_set(A, 2, 32)
        return all(
            (rkh_membership(A, 2, HTuple((t, u))) is not None) == ((u - t) in R2)
            for t in range(8)
            for u in range(t + 1, 12)
        )

    def odds_obstruction() -> bool:
        import itertools

        return not any(is_delta_subset(z, odds) for z in itertools.combinations(range(60), 3))

    def ladder() -> bool:
        ws = ladder_delta_f_check(6, 10**4)
        return [len(w.Z) for w in ws] == [1, 2, 3, 4, 5, 6]

    def lemma_instances() -> bool:
        for k in (1, 2, 3):
            r = lemma_extract(LA, LB, k)
            if not (r.bound_holds() and r.forms_agree() and len(r.intersection) >= k):
                return False
            members = set(LA)
            if not all(x - z in members for z in r.Z for x in r.H0):
                return False
        r = lemma_extract(A, NatSet.of([1, 2, 3, 4]), 2)
        return r.bound_holds()

    def bound_forms() -> bool:
        from fractions import Fraction

        exact, L, root = lemma_bound(5, 4, 2, 12)
        return (
            exact == Fraction(40, 66)
            and abs(L - 48 / 55) < 1e-12
            and abs(root - float(exact)) <= 1e-9 * max(1.0, float(exact))
        )

    return [
        ("recurrence counts |A&(A+x)| = 2 for x = 1,2,3", lambda: [recurrence_count(A, x) for x in (1, 2, 3)] == [2, 2, 2]),
        ("distance set of F is {1,2,3}", lambda: distance_set(F).elements == (1, 2, 3)),
        ("distances of F lie in R_2(A)", lambda: distance_set(F).issubset(rk_set(A, 2, 16))),
        ("F is not in R_2^3(A)", lambda: rkh_membership(A, 2, HTuple(F.elements)) is None),
        ("(A+1)&(A+2)&(A+4) is empty", lambda: rkh_membership(A, 1, HTuple((1, 2, 4))) is None),
        ("pairs are members iff their distance is in R_2(A)", pairs_match),
        ("no 3-subset of [0,60) has all distances odd", odds_obstruction),
        ("ladder blocks A_1..A_6 are witnesses", ladder),
        ("lemma bound holds on bundled instances", lemma_instances),
        ("rational and product forms of the bound agree", bound_forms),
    ]


def cmd_verify(args, emit: Emitter) -> int:
    if args.certificates:
        if not args.A:
            raise UsageError("replaying certificates needs --A")
        A = _realize(args.A)
        fh = sys.stdin if args.certificates == "-" else open(args.certificates, encoding="utf-8")
        with fh:
            certs = load_certificates(fh)
        bad = [c for c in certs if not certificate_check(A, c)]
        emit.record({"type": "verify", "certificates": len(certs), "failed": len(bad)})
        if bad:
            raise VerificationFailure(f"certificate for {list(bad[0].tuple)} failed replay")
        return EXIT_OK

    data = _load_bundled(args.data_dir)
    for name, check in worked_checks(data):
        ok = bool(check())
        if args.inject_fault and name == worked_checks(data)[0][0]:
            ok = False
        emit.record({"type": "check", "name": name, "ok": ok}, f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            raise VerificationFailure(name)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftsets",
        allow_abbrev=False,
        description="Distance sets, recurrence sets and certified searches over finite sets of naturals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=FORMATS, default="human")
    parser.add_argument("--horizon", type=int, default=None, help="global capacity cap (default $SHIFTSETS_HORIZON or 10^6)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, handler, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(handler=handler)
        return p

    p = add("generate", cmd_generate, "realize a sequence spec")
    p.add_argument("spec")
    p.add_argument("--out", default=None, help="also write the set file format here")

    p = add("delta", cmd_delta, "distance set")
    p.add_argument("--A", required=True)

    p = add("rk", cmd_rk, "k-recurrence set")
    p.add_argument("--A", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--counts", action="store_true")

    p = add("member", cmd_member, "certified (h,k)-recurrence membership of one tuple")
    p.add_argument("--A", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tuple", type=_int_list, required=True)

    p = add("rkh-search", cmd_rkh_search, "search [B]^h for (h,k)-recurrence tuples")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--cap", type=int, default=1000)
    p.add_argument("--b-horizon", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    p = add("lemma", cmd_lemma, "pigeonhole extraction with exact bound")
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)

    p = add("deltaf", cmd_deltaf, "find Z with |Z| = h and all distances in S")
    p.add_argument("--S", required=True)
    p.add_argument("--rk", type=int, default=None, help="search in R_k(S) instead of S")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--bound", type=int, default=None)

    p = add("ladder", cmd_ladder, "check the ladder blocks")
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--ladder-horizon", dest="horizon_", type=int, default=10**5)

    p = add("partition", cmd_partition, "monochromatic subset of X under a colouring of its distances")
    p.add_argument("--X", type=_int_list, required=True)
    p.add_argument("--coloring", required=True, help="distance:piece pairs, e.g. 1:0,2:1,3:0")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--S", default=None)

    p = add("gate", cmd_gate, "finite-window growth gates")
    p.add_argument("--kind", choices=("liminf", "corollary", "thm2"), default="liminf")
    p.add_argument("--A", required=True)
    p.add_argument("--B", default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--k0", type=_int_list, default=None)
    p.add_argument("--f", default="log2")
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.5)

    p = add("suite", cmd_suite, "seeded experiment batches")
    p.add_argument("name", choices=("lemma", "proposition", "partition", "echo", "thm2"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    p = add("verify", cmd_verify, "run the pinned example suite, or replay certificates")
    p.add_argument("--certificates", default=None, help="json-lines or text records; '-' for stdin")
    p.add_argument("--A", default=None)
    p.add_argument("--data-dir", default=None, help=argparse.SUPPRESS)
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    emit = Emitter(args.format, out)
    try:
        set_global_horizon(args.horizon)
        if args.format == "csv" and args.command != "gate":
            raise UsageError("csv output is only available for the gate command")
        return args.handler(args, emit)
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (IngestionError, CapacityError, GateError, ColoringError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    finally:
        set_global_horizon(None)


if __name__ == "__main__":
    sys.exit(main())
