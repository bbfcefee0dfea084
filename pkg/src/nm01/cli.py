"""``nm01 svm | onebit | check``.

Exit codes: 0 success, 1 failed self-check, 2 bad flags, 3 unreadable or
malformed data, 4 solver failure.

CSV schemas
-----------
svm:    name,m,n,acc,status,iters,time
onebit: name,m,n,snr,he,hd,status,iters,time[,biht_snr,biht_he,biht_hd,biht_time]
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import checks, data_io, onebit, svm
from .solver import SolveOptions, Status

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3, 4

SVM_FIELDS = ["name", "m", "n", "acc", "status", "iters", "time"]
ONEBIT_FIELDS = ["name", "m", "n", "snr", "he", "hd", "status", "iters", "time"]
BIHT_FIELDS = ["biht_snr", "biht_he", "biht_hd", "biht_time"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        val = kind(text)
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    return conv


def build_parser():
    p = _Parser(prog="nm01", description="Newton method for 0/1-loss problems.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("svm", help="train a 0/1-loss linear SVM")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="libsvm file (labels != 1 become -1; features scaled to [-1, 1])")
    src.add_argument("--synthetic-outlier", type=float, metavar="A",
                     help="four-point set with the outlier (1, A)")
    s.add_argument("--tau", type=_positive(float), default=5.0)
    s.add_argument("--lambda", dest="lam", type=_positive(float), default=15.0)
    s.add_argument("--max-iters", type=_positive(int), default=1000)
    s.add_argument("--tol", type=_positive(float), default=1e-4)
    s.add_argument("--out", help="CSV report path")

    o = sub.add_parser("onebit", help="1-bit compressed sensing trials")
    o.add_argument("--m", type=_positive(int), default=500)
    o.add_argument("--n", type=_positive(int), default=2000)
    o.add_argument("--s", type=_positive(int), default=10)
    o.add_argument("--v", type=float, default=0.5)
    o.add_argument("--r", type=float, default=0.05)
    o.add_argument("--noise-sd", type=float, default=0.1)
    o.add_argument("--trials", type=_positive(int), default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tau", type=_positive(float), default=1.0)
    o.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    o.add_argument("--max-iters", type=_positive(int), default=None)
    o.add_argument("--tol", type=_positive(float), default=1e-4)
    o.add_argument("--baseline", choices=["biht"])
    o.add_argument("--out", help="CSV report path")

    c = sub.add_parser("check", help="run the built-in self-test suites")
    c.add_argument("--suite", action="append", choices=sorted(checks.SUITES),
                   help="restrict to one suite (repeatable)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return p


def _thread_cap():
    raw = os.environ.get("NM01_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            print(f"warning: ignoring NM01_THREADS={raw!r}", file=sys.stderr)
    return os.cpu_count() or 1


def cmd_svm(args) -> int:
    if args.data is not None:
        try:
            raw = data_io.parse_libsvm(args.data)
        except (OSError, UnicodeDecodeError, ValueError) as err:
            print(f"error: {args.data}: {err}", file=sys.stderr)
            return EXIT_DATA
        if raw.m == 0:
            print(f"error: {args.data}: no samples", file=sys.stderr)
            return EXIT_DATA
        scaled, _ = data_io.scale_features(raw)
        data = svm.SvmDataset(scaled.features, data_io.map_labels(raw))
        name = os.path.basename(args.data)
    else:
        data = svm.synthetic_outlier(args.synthetic_outlier)
        name = f"outlier_a={args.synthetic_outlier:g}"
    opts = SolveOptions(max_iters=args.max_iters, tol_F=args.tol)
    t0 = time.perf_counter()
    model = svm.train(data, opts, tau=args.tau, lam=args.lam)
    elapsed = time.perf_counter() - t0
    rep = model.report
    if rep.status is Status.LINEAR_SOLVE_FAILURE or not np.all(np.isfinite(model.x)):
        print(f"error: solver failed ({rep.status.value}) after {rep.iterations} iterations", file=sys.stderr)
        return EXIT_SOLVER
    print(f"Acc={model.train_accuracy:.3f} time={elapsed:.6f}s status={rep.status.value} iters={rep.iterations}")
    if args.out:
        row = {"name": name, "m": data.m, "n": model.x.size, "acc": model.train_accuracy,
               "status": rep.status.value, "iters": rep.iterations, "time": elapsed}
        data_io.write_csv_report([row], args.out, SVM_FIELDS)
    return EXIT_OK


def _onebit_job(job):
    cfg, seed, trial, baseline, kw = job
    rng = np.random.default_rng([seed, trial])
    return onebit.run_trial(cfg, rng, baseline=baseline, **kw)


def run_onebit_trials(cfg, trials, seed, *, baseline=False, workers=1, **recover_kw):
    """Run ``trials`` independent trials; trial ``t`` draws from ``default_rng([seed, t])``.

    Results come back in trial order whatever ``workers`` is.
    """
    jobs = [(cfg, seed, t, baseline, recover_kw) for t in range(trials)]
    workers = max(1, min(workers, trials))
    if workers == 1:
        return [_onebit_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_onebit_job, jobs))


def cmd_onebit(args) -> int:
    try:
        cfg = onebit.OneBitConfig(m=args.m, n=args.n, s=args.s, v=args.v, r=args.r,
                                  noise_sd=args.noise_sd, seed=args.seed)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    kw = {"tau": args.tau, "lam": args.lam}
    if args.max_iters is not None or args.tol != 1e-4:
        kw["opts"] = SolveOptions(max_iters=args.max_iters or 1000, tol_F=args.tol, epsilon_schedule=True)
    baseline = args.baseline == "biht"
    rows = run_onebit_trials(cfg, args.trials, args.seed, baseline=baseline,
                             workers=_thread_cap(), **kw)
    for t, row in enumerate(rows):
        row.update(name=f"trial{t}", m=cfg.m, n=cfg.n)

    def mean(key):
        return float(np.mean([r[key] for r in rows]))

    print(f"NM01 mean SNR={mean('snr'):.3f} HE={mean('he'):.4f} HD={mean('hd'):.4f} "
          f"time={mean('time'):.6f}s over {args.trials} trials")
    if baseline:
        print(f"BIHT mean SNR={mean('biht_snr'):.3f} HE={mean('biht_he'):.4f} HD={mean('biht_hd'):.4f} "
              f"time={mean('biht_time'):.6f}s")
    if args.out:
        data_io.write_csv_report(rows, args.out, ONEBIT_FIELDS + (BIHT_FIELDS if baseline else []))
    failed = [r["name"] for r in rows if r["status"] == Status.LINEAR_SOLVE_FAILURE.value]
    if failed:
        print(f"error: linear solve failed in {', '.join(failed)}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_check(args) -> int:
    results = checks.run_suites(args.suite, fault=args.inject_fault, seed=args.seed)
    print(f"{'suite':<10} {'cases':>7} {'failed':>7} {'seconds':>8}  detail")
    for r in results:
        print(f"{r.name:<10} {r.cases:>7} {r.failures:>7} {r.seconds:>8.3f}  {r.detail}")
    bad = [r.name for r in results if not r.passed]
    if bad:
        print(f"{len(bad)} of {len(results)} suites failed: {', '.join(bad)}")
        return EXIT_CHECK
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return {"svm": cmd_svm, "onebit": cmd_onebit, "check": cmd_check}[args.cmd](args)


if __name__ == "__main__":
    sys.exit(main())
