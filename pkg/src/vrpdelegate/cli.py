"""Command-line entry point: ``vrpdelegate <command> ...``."""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys

from .core import load_instance, save_instance, save_solution, validate_solution
from .delegation import run
from .generate import DISTRIBUTIONS, GenSpec
from .harness.evaluate import evaluate, initial_solution, load_eval_config, load_traces
from .harness.report import report
from .initializer import initialize
from .learning.datagen import Dataset, generate_labels
from .learning.train import TrainConfig, train
from .selectors import make_selector
from .subsolver import SubsolverBudget, make_subsolver


def _expand(patterns) -> list[str]:
    files = []
    for p in patterns:
        hits = sorted(glob.glob(p))
        if not hits:
            raise SystemExit(f"no files match {p}")
        files += hits
    return files


def _budget(args) -> SubsolverBudget:
    return SubsolverBudget(args.budget_steps, args.budget_wall)


def cmd_gen(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    for i in range(args.count):
        inst = GenSpec(args.variant, args.n, args.dist, args.nc, args.seed + i).build()
        path = os.path.join(args.out_dir, f"{inst.name}.json")
        save_instance(inst, path)
        print(path)
    return 0


def cmd_init(args) -> int:
    inst = load_instance(args.instance)
    sol = initialize(inst, make_subsolver(args.subsolver), L=args.L, n_sectors=args.sectors, seed=args.seed)
    save_solution(sol, args.out)
    print(f"{inst.name}: {len(sol.routes)} routes, cost {sol.cost:.6f}")
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    subsolver = make_subsolver(args.subsolver)
    x0 = initial_solution(inst, args.init, subsolver, args.seed)
    selector = make_selector(args.selector, args.seed)
    sol, trace = run(inst, x0, selector, subsolver, k=args.k, max_steps=args.max_steps,
                     wall_budget=args.wall_budget, budget=_budget(args), seed=args.seed,
                     method=args.method or args.selector.split(":")[0])
    bad = validate_solution(inst, sol)
    if bad is not None:
        print(f"final solution invalid: {bad}", file=sys.stderr)
        return 1
    if args.trace_out:
        trace.save(args.trace_out)
    if args.out:
        save_solution(sol, args.out)
    print(f"{inst.name}: {trace.init_cost:.6f} -> {sol.cost:.6f} in {len(trace.events) - 1} steps, "
          f"{trace.events[-1].calls} subsolver calls")
    return 0


def cmd_datagen(args) -> int:
    subsolver = make_subsolver(args.subsolver)
    if args.instances:
        instances = [load_instance(f) for f in _expand(args.instances)]
    else:
        instances = [GenSpec(args.variant, args.n, args.dist, args.nc, args.seed + i).build()
                     for i in range(args.count)]
    items = [(inst, initial_solution(inst, args.init, subsolver, args.seed)) for inst in instances]
    ds = generate_labels(items, args.k, subsolver, _budget(args), d_train=args.d_train, seed=args.seed,
                         workers=args.workers)
    ds.save(args.out)
    print(f"{len(ds.examples)} examples from {len(ds.steps)} steps on {len(items)} instances"
          f" ({len(ds.errors)} errors) -> {args.out}")
    return 0


def cmd_train(args) -> int:
    ds = Dataset()
    for f in _expand(args.data):
        ds.extend(Dataset.load(f))
    cfg = TrainConfig(kind=args.kind, lr=args.lr, schedule=args.schedule, batch=args.batch, steps=args.steps,
                      seed=args.seed, augment=not args.no_augment, hidden=args.hidden, d_model=args.d_model,
                      n_heads=args.heads, n_layers=args.layers, d_ff=args.d_ff, log_every=args.log_every)
    res = train([e.sp for e in ds.examples], [e.target for e in ds.examples], cfg)
    res.model.save(args.out)
    print(f"{args.kind} on {len(ds.examples)} examples: loss {res.losses[0]:.5f} -> {res.losses[-1]:.5f}"
          f" -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    cfg = load_eval_config(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    traces = evaluate(cfg)
    for t in traces:
        print(json.dumps({"instance": t.instance_id, "method": t.method, "seed": t.seed,
                          "init": t.init_cost, "final": t.final_cost, "steps": len(t.events) - 1,
                          "calls": t.events[-1].calls}))
    return 0


def cmd_report(args) -> int:
    paths = report(load_traces(args.traces), args.out_dir, baseline=args.baseline, axis=args.axis,
                   points=args.points)
    for p in paths.values():
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vrpdelegate", description="Learned subproblem selection for large VRPs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def gen_args(q, required_n=True):
        q.add_argument("--variant", default="CVRP", help="CVRP, CVRPTW or VRPMPD")
        q.add_argument("--dist", default="uniform", choices=DISTRIBUTIONS)
        q.add_argument("--n", type=int, required=required_n, help="number of cities")
        q.add_argument("--nc", type=int, default=0, help="cluster count (clustered/mixed)")
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--count", type=int, default=1)

    def solver_args(q, steps=500):
        q.add_argument("--subsolver", default="builtin", help="'builtin' or 'external:<cmd with {in} {out}>'")
        q.add_argument("--budget-steps", type=int, default=steps)
        q.add_argument("--budget-wall", type=float, default=None)

    q = sub.add_parser("gen", help="generate instances")
    gen_args(q)
    q.add_argument("--out-dir", required=True)
    q.set_defaults(func=cmd_gen)

    q = sub.add_parser("init", help="sweep initialization")
    q.add_argument("--instance", required=True)
    q.add_argument("--L", type=int, default=100, help="subsolver steps per sector (0 = random chain)")
    q.add_argument("--sectors", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--subsolver", default="builtin")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_init)

    q = sub.add_parser("solve", help="run the delegation loop on one instance")
    q.add_argument("--instance", required=True)
    q.add_argument("--init", default="sweep:100", help="solution file, 'sweep:L' or 'chain'")
    q.add_argument("--selector", default="random", help="random, count, maxmin, oracle or learned:<model>")
    q.add_argument("--method", default=None, help="method id written to the trace")
    q.add_argument("--k", type=int, default=5)
    solver_args(q)
    q.add_argument("--max-steps", type=int, default=None)
    q.add_argument("--wall-budget", type=float, default=None)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--trace-out", default=None)
    q.add_argument("--out", default=None, help="write the final solution here")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("datagen", help="oracle-labeled training data")
    q.add_argument("--instances", nargs="*", default=None, help="instance files (globs); else generate")
    gen_args(q, required_n=False)
    q.add_argument("--init", default="sweep:100")
    q.add_argument("--k", type=int, default=5)
    q.add_argument("--d-train", type=int, default=30)
    solver_args(q)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_datagen)

    q = sub.add_parser("train", help="fit a subsolution-cost regressor")
    q.add_argument("--data", nargs="+", required=True)
    q.add_argument("--kind", default="mlp", choices=("linear", "mlp", "set-attention"))
    q.add_argument("--lr", type=float, default=1e-3)
    q.add_argument("--schedule", default="cosine", choices=("cosine", "constant"))
    q.add_argument("--batch", type=int, default=512)
    q.add_argument("--steps", type=int, default=2000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--no-augment", action="store_true")
    q.add_argument("--hidden", type=int, default=64)
    q.add_argument("--d-model", type=int, default=32)
    q.add_argument("--heads", type=int, default=2)
    q.add_argument("--layers", type=int, default=2)
    q.add_argument("--d-ff", type=int, default=128)
    q.add_argument("--log-every", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_train)

    q = sub.add_parser("eval", help="run a method matrix from an INI config")
    q.add_argument("--config", required=True)
    q.add_argument("--out-dir", default=None, help="override the config's out_dir")
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("report", help="CSV tables and SVG curves from traces")
    q.add_argument("traces", nargs="+", help="trace files or directories")
    q.add_argument("--out-dir", required=True)
    q.add_argument("--baseline", default=None)
    q.add_argument("--axis", default="time", choices=("time", "calls", "step"))
    q.add_argument("--points", type=int, default=51)
    q.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "datagen" and not args.instances and not args.n:
        raise SystemExit("datagen needs --instances or --n")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
