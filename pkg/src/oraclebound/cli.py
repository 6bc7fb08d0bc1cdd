"""Command-line client for the analysis service.

Parses local files, sends typed requests through the service layer (in
process by default, over HTTP with ``--server``), and writes reports and
data files.  Exit status is 0 unless an error occurred; warnings never
change it.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import httpx
from pydantic import BaseModel

from . import __version__, fileio
from .errors import OracleBoundError
from .service import schemas as sc
from .service.app import HANDLERS, RESPONSE_MODELS


class CliUsageError(Exception):
    """Flag combinations argparse cannot express on its own."""


class RemoteServiceError(OracleBoundError):
    """The remote service rejected a request."""


def _make_client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=120.0)


def _dispatch(server: str | None, route: str, request: BaseModel):
    if server is None:
        return HANDLERS[route](request)
    with _make_client(server) as client:
        response = client.post(route, json=request.model_dump(mode="json"))
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RemoteServiceError(f"{route} failed ({response.status_code}): {detail}")
    return RESPONSE_MODELS[route].model_validate(response.json())


def _digests(paths: Sequence[str]) -> list[sc.FileDigest]:
    return [
        sc.FileDigest(path=str(p), sha256=fileio.sha256_file(p)) for p in paths
    ]


def _state_payload(states) -> list[sc.StateIn]:
    return [
        sc.StateIn(model_id=s.model_id, resource=s.resource, accuracy=s.accuracy)
        for s in states
    ]


def _emit_report(report: BaseModel, out: str | None, exclude: set[str] | None = None) -> None:
    text = fileio.dump_json(report.model_dump(mode="json", exclude=exclude))
    if out:
        fileio.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _cmd_bounds(args: argparse.Namespace) -> int:
    states, unit = fileio.parse_states_csv(args.states, require_accuracy=True)
    input_paths = [args.states]
    profile = None
    if args.alpha_profile:
        profile = fileio.parse_alpha_profile_csv(args.alpha_profile)
        input_paths.append(args.alpha_profile)
    request = sc.BoundsRequest(
        states=_state_payload(states),
        alpha=args.alpha,
        alpha_profile=profile,
        classes=args.classes,
        prune_dominated=args.prune_dominated,
        resource_unit=unit,
        inputs=_digests(input_paths),
    )
    report = _dispatch(args.server, "/v1/bounds", request)
    _emit_report(report, args.out)
    return 0


def _cmd_empirical(args: argparse.Namespace) -> int:
    if bool(args.correctness) == bool(args.predictions):
        raise CliUsageError(
            "provide either --correctness or --predictions with --truth"
        )
    if args.predictions and not args.truth:
        raise CliUsageError("--predictions requires --truth")
    states, unit = fileio.parse_states_csv(args.states, require_accuracy=False)
    input_paths = [args.states]
    correctness = predictions = truth = None
    if args.correctness:
        correctness = [
            sc.CorrectnessCell(instance_id=i, model_id=m, correct=c)
            for i, m, c in fileio.parse_correctness_csv(args.correctness)
        ]
        input_paths.append(args.correctness)
    else:
        predictions = [
            sc.PredictionIn(instance_id=p.instance_id, model_id=p.model_id, label=p.label)
            for p in fileio.parse_predictions_csv(args.predictions)
        ]
        truth = fileio.parse_truth_csv(args.truth)
        input_paths.extend([args.predictions, args.truth])
    request = sc.EmpiricalRequest(
        states=_state_payload(states),
        correctness=correctness,
        predictions=predictions,
        truth=truth,
        prune_dominated=args.prune_dominated,
        keep_supplied_accuracies=args.keep_supplied_accuracies,
        include_labels=bool(args.labels_out),
        resource_unit=unit,
        inputs=_digests(input_paths),
    )
    report = _dispatch(args.server, "/v1/empirical", request)
    if args.labels_out:
        fileio.atomic_write_text(
            args.labels_out, fileio.labels_csv_text(report.labels)
        )
    _emit_report(report, args.out, exclude={"labels"})
    return 0


def _cmd_design_subset(args: argparse.Namespace) -> int:
    states, unit = fileio.parse_states_csv(args.states, require_accuracy=True)
    request = sc.SubsetRequest(
        states=_state_payload(states),
        k=args.k,
        greedy=args.greedy,
        prune_dominated=args.prune_dominated,
        resource_unit=unit,
        inputs=_digests([args.states]),
    )
    report = _dispatch(args.server, "/v1/design/subset", request)
    _emit_report(report, args.out)
    return 0


def _cmd_design_r1(args: argparse.Namespace) -> int:
    states, unit = fileio.parse_states_csv(args.states, require_accuracy=True)
    request = sc.R1Request(
        states=_state_payload(states),
        classes=args.classes,
        prune_dominated=args.prune_dominated,
        resource_unit=unit,
        inputs=_digests([args.states]),
    )
    report = _dispatch(args.server, "/v1/design/r1", request)
    _emit_report(report, args.out)
    return 0


def _cmd_design_continuous(args: argparse.Namespace) -> int:
    points = fileio.parse_envelope_csv(args.envelope)
    request = sc.ContinuousRequest(
        envelope=[sc.EnvelopePointIn(resource=r, accuracy=a) for r, a in points],
        resource_unit=None,
        inputs=_digests([args.envelope]),
    )
    report = _dispatch(args.server, "/v1/design/continuous", request)
    _emit_report(report, args.out)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.mode == "alpha-target" and args.alpha_target is None:
        raise CliUsageError("--mode alpha-target requires --alpha-target")
    request = sc.SynthRequest(
        accuracies=args.accuracies,
        n_instances=args.n,
        mode=args.mode.replace("-", "_"),
        alpha_target=args.alpha_target,
        seed=args.seed,
    )
    response = _dispatch(args.server, "/v1/synth", request)
    out = Path(args.out)
    fileio.atomic_write_text(
        out,
        fileio.correctness_csv_text(
            response.instance_ids, response.model_ids, response.cells
        ),
    )
    meta_path = (
        out.with_suffix(".meta.json") if out.suffix else Path(f"{out}.meta.json")
    )
    fileio.atomic_write_text(
        meta_path, fileio.dump_json(response.metadata.model_dump(mode="json"))
    )
    for warning in response.metadata.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(
        f"wrote {len(response.instance_ids)} instances x "
        f"{len(response.model_ids)} models to {out} (metadata: {meta_path})"
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    states, unit = fileio.parse_states_csv(args.states, require_accuracy=True)
    input_paths = [args.states]
    correctness = None
    if args.correctness:
        correctness = [
            sc.CorrectnessCell(instance_id=i, model_id=m, correct=c)
            for i, m, c in fileio.parse_correctness_csv(args.correctness)
        ]
        input_paths.append(args.correctness)
    request = sc.PlotRequest(
        states=_state_payload(states),
        correctness=correctness,
        alpha=args.alpha,
        k_max=args.k,
        prune_dominated=args.prune_dominated,
        resource_unit=unit,
        inputs=_digests(input_paths),
    )
    report = _dispatch(args.server, "/v1/plot-series", request)

    plot_dir = Path(args.plot_dir)
    plot_dir.mkdir(parents=True, exist_ok=True)
    fmt = fileio.fmt12
    states_rows = [
        (s.model_id, fmt(s.resource), fmt(s.accuracy))
        for s in report.state_space.states
    ]
    fileio.atomic_write_text(
        plot_dir / "states.csv",
        "model_id,resource,accuracy\n"
        + "".join(",".join(r) + "\n" for r in states_rows),
    )
    fileio.atomic_write_text(
        plot_dir / "bound_line.csv",
        "alpha,r_oracle,a_oracle\n"
        + "".join(
            f"{fmt(p.alpha)},{fmt(p.r_oracle)},{fmt(p.a_oracle)}\n"
            for p in report.results.bound_line
        ),
    )
    if report.results.alpha_by_rank is not None:
        fileio.atomic_write_text(
            plot_dir / "alpha_profile.csv",
            "rank,alpha\n"
            + "".join(
                f"{e.rank},{'' if e.alpha is None else fmt(e.alpha)}\n"
                for e in report.results.alpha_by_rank
            ),
        )
    fileio.atomic_write_text(
        plot_dir / "subset_curve.csv",
        "k,r_oracle,r_ratio\n"
        + "".join(
            f"{p.k},{fmt(p.r_oracle)},{fmt(p.r_ratio)}\n"
            for p in report.results.subset_curve
        ),
    )
    _emit_report(report, args.out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ------------------------------------------------------------------ parser


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _accuracy_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from None
    if not values:
        raise argparse.ArgumentTypeError("expected at least one accuracy")
    return values


def _add_common(parser: argparse.ArgumentParser, *, out: bool = True) -> None:
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="base URL of a running service; by default the analysis runs in process",
    )
    if out:
        parser.add_argument(
            "--out", default=None, metavar="PATH",
            help="write the JSON report here instead of stdout",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oraclebound",
        description=(
            "Quantify the efficiency and accuracy opportunity of adaptive "
            "inference over a set of backbone classifiers."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="closed-form opportunity bounds from a states file")
    p.add_argument("--states", required=True, help="states CSV (model_id,resource,accuracy)")
    p.add_argument("--alpha", type=float, default=None,
                   help="also report the constant-alpha bound at this value")
    p.add_argument("--alpha-profile", default=None, metavar="PATH",
                   help="also report the bound for a per-rank alpha CSV (rank,alpha)")
    p.add_argument("--classes", type=_positive_int, default=None,
                   help="number of classes, echoed into the report")
    p.add_argument("--prune-dominated", action="store_true",
                   help="drop states dominated by cheaper ones instead of rejecting")
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("empirical", help="measured bounds and selection labels from correctness data")
    p.add_argument("--states", required=True)
    p.add_argument("--correctness", default=None, metavar="PATH",
                   help="correctness CSV (instance_id,model_id,correct)")
    p.add_argument("--predictions", default=None, metavar="PATH",
                   help="predictions CSV (instance_id,model_id,label)")
    p.add_argument("--truth", default=None, metavar="PATH",
                   help="ground-truth CSV (instance_id,label)")
    p.add_argument("--labels-out", default=None, metavar="PATH",
                   help="write per-instance selection labels to this CSV")
    p.add_argument("--keep-supplied-accuracies", action="store_true",
                   help="keep accuracies from the states file instead of measured ones")
    p.add_argument("--prune-dominated", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_empirical)

    p = sub.add_parser("design", help="state-space design tools")
    design_sub = p.add_subparsers(dest="design_command", required=True)

    d = design_sub.add_parser("subset", help="best sub-spaces of sizes 1..k")
    d.add_argument("--states", required=True)
    d.add_argument("--k", required=True, type=_positive_int)
    d.add_argument("--greedy", action="store_true",
                   help="greedy nested growth instead of the exact optimum")
    d.add_argument("--prune-dominated", action="store_true")
    _add_common(d)
    d.set_defaults(func=_cmd_design_subset)

    d = design_sub.add_parser("r1", help="is the cheapest state worth its cost")
    d.add_argument("--states", required=True)
    d.add_argument("--classes", required=True, type=_positive_int)
    d.add_argument("--prune-dominated", action="store_true")
    _add_common(d)
    d.set_defaults(func=_cmd_design_r1)

    d = design_sub.add_parser("continuous", help="cost limit along a frontier file")
    d.add_argument("--envelope", required=True, help="envelope CSV (resource,accuracy)")
    _add_common(d)
    d.set_defaults(func=_cmd_design_continuous)

    p = sub.add_parser("synth", help="generate a synthetic correctness matrix")
    p.add_argument("--accuracies", required=True, type=_accuracy_list,
                   help="comma-separated target accuracies, cheapest first")
    p.add_argument("--n", required=True, type=_positive_int,
                   help="number of instances")
    p.add_argument("--mode", choices=["nested", "independent", "alpha-target"],
                   default="nested")
    p.add_argument("--alpha-target", type=float, default=None,
                   help="target minimum dependency coefficient (alpha-target mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH",
                   help="correctness CSV to write; metadata goes to a .meta.json sidecar")
    p.add_argument("--server", default=None, metavar="URL")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="emit plot-ready series: bound line, dependency profile, subset curve")
    p.add_argument("--states", required=True)
    p.add_argument("--correctness", default=None, metavar="PATH",
                   help="optional correctness CSV for the dependency-coefficient series")
    p.add_argument("--alpha", type=float, default=None,
                   help="add this constant-alpha point to the bound line")
    p.add_argument("--k", type=_positive_int, default=None,
                   help="largest subset size for the efficiency curve (default: all states)")
    p.add_argument("--plot-dir", required=True, metavar="DIR")
    p.add_argument("--prune-dominated", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except OracleBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: could not reach the service: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
