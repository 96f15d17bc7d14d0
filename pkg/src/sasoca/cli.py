"""Command-line front end: ``sasoca <subcommand> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import __version__, analysis, render
from . import genome as gn
from .ca import ORDERING, TOPOLOGIES, Scheme, gen_ic, make_lattice, simulate
from .evolve import EaConfig, dominant_metadata, run_ea, test_dominant
from .fsm import StateLayout, compile_genome

log = logging.getLogger("sasoca")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_USAGE):
        super().__init__(msg)
        self.code = code


# -- config files --------------------------------------------------------

_EA_KEYS = {f.name for f in fields(EaConfig)} - {"mutation"}
_MUTATION_KEYS = {"point_rate", "indel_rate", "indel_min", "indel_max"}
_RUN_KEYS = {"replicates", "out"}


def _coerce(key: str, value: str):
    if key in ("topology", "ic_scheme", "out"):
        return value
    if key == "dims":
        return tuple(int(v) for v in value.replace("x", ",").split(",") if v.strip())
    if key in ("replacement_rate", "point_rate", "indel_rate"):
        return float(value)
    return int(value)


def parse_config(text: str, source: str = "<config>") -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _EA_KEYS | _MUTATION_KEYS | _RUN_KEYS:
            raise CliError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except ValueError:
            raise CliError(f"{source}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def build_config(settings: dict) -> EaConfig:
    s = dict(settings)
    mut = gn.MutationConfig()
    lo, hi = mut.indel_size_range
    mut = gn.MutationConfig(
        point_rate=s.pop("point_rate", mut.point_rate),
        indel_rate=s.pop("indel_rate", mut.indel_rate),
        indel_size_range=(s.pop("indel_min", lo), s.pop("indel_max", hi)),
    )
    ea = {k: v for k, v in s.items() if k in _EA_KEYS}
    try:
        return EaConfig(mutation=mut, **ea)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}") from None


# -- genome + topology resolution ---------------------------------------

_TOTAL_TO_TOPOLOGY = {
    StateLayout(make_lattice(**spec).n_neighbors).total: name for name, spec in TOPOLOGIES.items()
}


def sidecar_path(genome_path: Path) -> Path:
    return genome_path.with_suffix(".json")


def load_subject(path: str, topology: str | None):
    """Genome, lattice and metadata for an analysis command."""
    p = Path(path)
    try:
        g, total = gn.load(p)
    except OSError as exc:
        raise CliError(f"cannot read genome {p}: {exc}", EXIT_IO) from None
    except gn.GenomeError as exc:
        raise CliError(f"{p}: {exc}", EXIT_DATA) from None
    meta = {}
    side = sidecar_path(p)
    if side.exists():
        meta = json.loads(side.read_text())
    if meta.get("ordering", ORDERING) != ORDERING:
        raise CliError(f"{p}: neighbour ordering {meta['ordering']!r} is not {ORDERING!r}", EXIT_DATA)
    file_topo = meta.get("topology") or _TOTAL_TO_TOPOLOGY.get(total)
    if topology and file_topo and topology != file_topo:
        raise CliError(f"genome {p} is for topology {file_topo} but {topology} was requested", EXIT_DATA)
    topo = topology or file_topo
    if topo is None:
        raise CliError(f"{p}: cannot infer topology from total_states={total}; pass --topology", EXIT_DATA)
    spec = TOPOLOGIES[topo]
    lattice = make_lattice(tuple(meta.get("dims", spec["dims"])), meta.get("radius", spec["radius"]))
    layout = StateLayout(lattice.n_neighbors)
    if layout.total != total:
        raise CliError(
            f"genome {p} has total_states={total} but topology {topo} needs {layout.total}", EXIT_DATA
        )
    return g, compile_genome(g, layout), lattice, topo


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbelow(2**32)
        print(f"seed: {args.seed}")
    return args.seed


def _write(out_dir: Path, name: str, text: str | bytes) -> Path:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        p = out_dir / name
        (p.write_bytes if isinstance(text, bytes) else p.write_text)(text)
        return p
    except OSError as exc:
        raise CliError(f"cannot write {out_dir / name}: {exc}", EXIT_IO) from None


def _manifest(out_dir: Path, command: str, args, extra: dict | None = None) -> None:
    """Merge this command's re-run record into ``out_dir/manifest.json``."""
    path = out_dir / "manifest.json"
    data = json.loads(path.read_text()) if path.exists() else {}
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "jobs") and v is not None}
    data[command] = dict(args=echo, version=__version__, ordering=ORDERING, **(extra or {}))
    _write(out_dir, "manifest.json", json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


def _report(out_dir: Path, name: str, report, args) -> None:
    _write(out_dir, f"{name}.csv", report.to_csv())
    _write(out_dir, f"{name}.json", report.to_json())
    _manifest(out_dir, name, args)


# -- subcommands ----------------------------------------------------------

def cmd_evolve(args) -> int:
    settings = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise CliError(f"cannot read config {args.config}: {exc}", EXIT_IO) from None
        settings = parse_config(text, args.config)
    overrides = {}
    for item in args.set or []:
        overrides.update(parse_config(item, "--set"))
    for key in ("seed", "topology", "updates", "replicates", "checkpoint_every"):
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    if args.population is not None:
        overrides["population_size"] = args.population
    if args.samples is not None:
        overrides["samples_per_eval"] = args.samples
    settings.update(overrides)
    if "seed" not in settings:
        settings["seed"] = secrets.randbelow(2**32)
        print(f"seed: {settings['seed']}")
    replicates = settings.pop("replicates", 1)
    out = Path(args.out or settings.pop("out", "runs"))
    settings.pop("out", None)
    base = build_config(settings)

    manifest = dict(
        command="evolve", version=__version__, ordering=ORDERING, config=base.to_dict(),
        replicates=replicates, overrides={k: list(v) if isinstance(v, tuple) else v for k, v in overrides.items()},
        replicate_seeds=[base.seed + i for i in range(replicates)],
    )
    _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return _run_replicates(base, replicates, out, args.jobs, resume=args.resume)


def _run_replicates(base: EaConfig, replicates: int, out: Path, jobs: int, resume: bool) -> int:
    total = base.layout().total
    for i in range(replicates):
        cfg = replace(base, seed=base.seed + i)
        rep = out / f"rep_{i:03d}"
        if (rep / "dominant.genome").exists() and resume:
            print(f"replicate {i}: already complete")
            continue
        try:
            rep.mkdir(parents=True, exist_ok=True)
            runlog, dom = run_ea(
                cfg, jobs=jobs, checkpoint_dir=rep / "checkpoint" if cfg.checkpoint_every else None,
                resume=resume,
                progress=lambda r: log.info("update %d max_eff=%.3f", r.update, r.max_eff_fitness),
            )
        except OSError as exc:
            raise CliError(f"replicate {i}: I/O failure: {exc}", EXIT_IO) from None
        _write(rep, "runlog.csv", runlog.to_csv())
        _write(rep, "dominant.genome", gn.dumps(dom.genome, total))
        _write(rep, "dominant.json", json.dumps(dominant_metadata(dom, cfg), indent=2, sort_keys=True) + "\n")
        print(f"replicate {i}: seed={cfg.seed} dominant effective fitness {dom.effective_fitness:.4f}")
    return EXIT_OK


def cmd_resume(args) -> int:
    out = Path(args.run_dir)
    try:
        manifest = json.loads((out / "manifest.json").read_text())
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read {out / 'manifest.json'}: {exc}", EXIT_IO) from None
    base = EaConfig.from_dict(manifest["config"])
    if args.updates is not None:
        base = replace(base, updates=args.updates)
    return _run_replicates(base, manifest["replicates"], out, args.jobs, resume=True)


def cmd_eval(args) -> int:
    _, f, lattice, _ = load_subject(args.genome, args.topology)
    seed = _seed(args)
    acc = test_dominant(f, lattice, args.n, seed, Scheme(args.scheme), jobs=args.jobs)
    print(f"fraction correct: {acc:.4f} ({args.n} {args.scheme} ICs)")
    out = Path(args.out)
    _write(out, "eval.csv", f"n,scheme,fraction_correct\n{args.n},{args.scheme},{acc!r}\n")
    _write(out, "eval.json", json.dumps(dict(n=args.n, scheme=args.scheme, fraction_correct=acc), indent=2) + "\n")
    _manifest(out, "eval", args)
    return EXIT_OK


def cmd_density(args) -> int:
    _, f, _, _ = load_subject(args.genome, args.topology)
    exact = args.samples is None
    seed = 0 if exact else _seed(args)
    try:
        rep = analysis.rule_density(f, exact=exact, samples=args.samples or 0, seed=seed)
    except analysis.ExactTooLarge as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    print(f"rule density ({rep.mode}): {rep.density:.6f} over {rep.states_evaluated} states")
    _report(Path(args.out), "density", rep, args)
    return EXIT_OK


def cmd_knockout(args) -> int:
    _, f, lattice, _ = load_subject(args.genome, args.topology)
    rep = analysis.knockout_hidden(f, lattice, args.n, _seed(args), jobs=args.jobs, scheme=Scheme(args.scheme))
    print(f"w_normal={rep.w_normal:.4f} w_knockout={rep.w_knockout:.4f} delta_w={rep.delta_w:.4f}")
    _report(Path(args.out), "knockout", rep, args)
    return EXIT_OK


def cmd_sop(args) -> int:
    _, f, lattice, _ = load_subject(args.genome, args.topology)
    rep = analysis.s_op(f, lattice, args.n, _seed(args), jobs=args.jobs, scheme=Scheme(args.scheme))
    print(f"f={rep.f:.4f} f_nc={rep.f_nc:.4f} s_op={rep.s_op:.4f}")
    _report(Path(args.out), "sop", rep, args)
    return EXIT_OK


def parse_scales(text: str) -> list[int]:
    scales = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            scales.extend(range(int(lo), int(hi) + 1))
        else:
            scales.append(int(part))
    if not scales or min(scales) < 1:
        raise argparse.ArgumentTypeError("scales must be positive integers, e.g. 1..9 or 1,3,9")
    return scales


def cmd_scale(args) -> int:
    _, f, lattice, _ = load_subject(args.genome, args.topology)
    rep = analysis.scaling_sweep(f, lattice, args.s, args.n, _seed(args), jobs=args.jobs)
    for r in rep.rows_:
        print(f"s={r.s} cells={r.cells} fraction_correct={r.fraction_correct:.4f}")
    _report(Path(args.out), "scale", rep, args)
    return EXIT_OK


def read_ic_file(path: str, cells: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read IC file {path}: {exc}", EXIT_IO) from None
    bits = [c for c in text if c in "01.#"]
    ic = np.array([c in "1#" for c in bits], dtype=np.uint8)
    if ic.size != cells:
        raise CliError(f"IC file {path} has {ic.size} cells, lattice needs {cells}", EXIT_DATA)
    return ic


def cmd_render(args) -> int:
    _, f, lattice, _ = load_subject(args.genome, args.topology)
    if args.scale > 1:
        lattice = lattice.scaled(args.scale)
    if args.ic_file:
        ic = read_ic_file(args.ic_file, lattice.cells)
    else:
        ic = gen_ic(lattice, Scheme(args.scheme), np.random.default_rng(_seed(args)))
    steps = args.steps if args.steps is not None else lattice.steps
    _, traj = simulate(f, lattice, ic, steps=steps, record=True)
    traj = traj[0]
    out = Path(args.out)
    text = render.ascii_trajectory(traj, lattice)
    _write(out, "trajectory.txt", text)
    if args.ascii:
        sys.stdout.write(text)
    try:
        render.write_trajectory(traj, lattice, out, sheet=not args.no_sheet)
    except OSError as exc:
        raise CliError(f"cannot write images to {out}: {exc}", EXIT_IO) from None
    _manifest(out, "render", args)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------

def _analysis_parser(sub, name: str, func, help_: str, n: bool = True):
    p = sub.add_parser(name, help=help_)
    p.add_argument("genome", help="genome file (sasoca-genome v1)")
    p.add_argument("--topology", choices=sorted(TOPOLOGIES))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".", help="report directory")
    p.add_argument("--jobs", type=int, default=1)
    if n:
        p.add_argument("--n", type=int, default=1000, help="number of ICs")
    p.set_defaults(func=func)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sasoca", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"sasoca {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run evolution replicates")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--topology", choices=sorted(TOPOLOGIES))
    p.add_argument("--updates", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--samples", type=int, help="ICs per fitness evaluation")
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("resume", help="continue an interrupted evolve run")
    p.add_argument("run_dir")
    p.add_argument("--updates", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_resume)

    p = _analysis_parser(sub, "eval", cmd_eval, "accuracy on fresh ICs")
    p.add_argument("--scheme", default=Scheme.BINOMIAL.value, choices=[s.value for s in Scheme])
    p = _analysis_parser(sub, "density", cmd_density, "rule density", n=False)
    p.add_argument("--exact", action="store_true", help="enumerate all states (default)")
    p.add_argument("--samples", type=int, help="estimate from this many uniform samples")
    for name, func, help_ in (("knockout", cmd_knockout, "hidden-state knockout"),
                              ("sop", cmd_sop, "operational self-organisation")):
        p = _analysis_parser(sub, name, func, help_)
        p.add_argument("--scheme", default=Scheme.BINOMIAL.value, choices=[s.value for s in Scheme])
    p = _analysis_parser(sub, "scale", cmd_scale, "scalability sweep")
    p.add_argument("--s", type=parse_scales, default=list(range(1, 10)), help="e.g. 1..9 or 1,3,9")
    p = _analysis_parser(sub, "render", cmd_render, "render a trajectory", n=False)
    p.add_argument("--ic-file")
    p.add_argument("--scheme", default=Scheme.BINOMIAL.value, choices=[s.value for s in Scheme])
    p.add_argument("--steps", type=int)
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--ascii", action="store_true", help="also print the ASCII rendering")
    p.add_argument("--no-sheet", action="store_true")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sasoca: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
