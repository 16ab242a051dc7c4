"""Command-line interface.

Exit status: 0 on success, 1 on domain errors (any ``FreqcapError``) or
unreadable inputs, 2 on usage errors.  Randomized commands require
``--seed`` and echo it in their output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import bounds, channel, entropy, experiments, infodensity, kernel
from .errors import FreqcapError


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    # JSON has no infinities; emit them as strings so output stays parseable
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit_json(payload, out) -> None:
    payload = json.loads(json.dumps(payload, default=_jsonable))
    out.write(json.dumps(_clean(payload), indent=2) + "\n")


def _emit_table(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        _emit_json(rows, out)
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    out.write(buf.getvalue())


def _noise(text: str) -> kernel.KernelFamily:
    try:
        name, value = text.split(":", 1)
        q = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected erasure:<eps> or substitution:<p>, got {text!r}") from exc
    if name == "erasure":
        return kernel.KernelFamily.dna_erasure(q)
    if name == "substitution":
        return kernel.KernelFamily.dna_substitution(q)
    raise argparse.ArgumentTypeError(f"unknown noise model {name!r}")


def _prior(args, cfg: channel.ChannelConfig) -> infodensity.InputPrior:
    if args.prior == "uniform":
        return infodensity.uniform_prior(args.s)
    if args.prior == "csv":
        if not args.prior_csv:
            raise FreqcapError("--prior csv needs --prior-csv <file>")
        return infodensity.read_prior_csv(args.prior_csv)
    return infodensity.default_prior(cfg.g, args.s)


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def _kernel_report(args, out) -> None:
    w = kernel.read_kernel_csv(args.kernel)
    rep = kernel.well_conditioned_report(w, args.tau, args.eta, args.cmax)
    _emit_json(rep.to_dict(), out)


def _kernel_family(args, out) -> None:
    spec = kernel.KernelFamily(args.family, args.size, args.param)
    w = kernel.kron_power(kernel.make_family(spec), args.L)
    np.savetxt(out, w.entries, delimiter=",", fmt="%.17g")


def _entropy_eval(args, out) -> None:
    _emit_json(entropy.poisson_entropy(args.lam).to_dict(), out)


def _channel_sample(args, out) -> None:
    w = kernel.read_kernel_csv(args.kernel)
    x = np.loadtxt(args.x, delimiter=",", ndmin=1).ravel()
    cfg = channel.ChannelConfig.for_kernel(w, args.g, args.r)
    hist = channel.sample_channel(x, w, cfg, args.seed, args.trials, args.mode)
    out.write(f"# seed={args.seed}\n")
    np.savetxt(out, hist.counts, delimiter=",", fmt="%d")


def _infodensity(args, out) -> None:
    w = kernel.read_kernel_csv(args.kernel)
    cfg = channel.ChannelConfig.for_kernel(w, args.g, args.r)
    prior = _prior(args, cfg)
    if args.action == "mi":
        est = infodensity.mc_mutual_information(prior, w, cfg, args.trials, args.seed)
        payload = est.to_dict()
    elif args.action == "lipschitz":
        marg = infodensity.enumerate_marginal(prior, w, cfg, z_cap=args.zcap)
        beta = infodensity.lipschitz_seminorm_bruteforce(None, marg, w, cfg, prior=prior)
        rep = kernel.well_conditioned_report(kernel.drop_zero_columns(w))
        payload = {
            "beta_lip": beta,
            "bound": math.log(prior.s) - math.log(rep.tau_achieved),
            "log_s": math.log(prior.s),
            "seed": args.seed,
        }
    else:
        rep = infodensity.concentration_experiment(prior, w, cfg, args.trials, seed=args.seed)
        payload = rep.to_dict()
    payload["seed"] = args.seed
    _emit_json(payload, out)


def _bounds_eval(args, out) -> None:
    w = kernel.read_kernel_csv(args.kernel)
    cfg = channel.ChannelConfig.for_kernel(w, args.g, args.r)
    _emit_json(bounds.achievability_bound(cfg, w).to_dict(), out)


def _bounds_dna(args, out) -> None:
    dna = bounds.DnaParams(args.K, args.beta, args.alphabet, args.reads)
    fam = args.noise
    if fam.size != args.alphabet:
        fam = kernel.KernelFamily(fam.family, args.alphabet, fam.param)
    w = kernel.make_family(fam)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = bounds.dna_rate_bound(dna, w, strict=args.strict)
    _emit_json(rep.to_dict(), out)


def _experiment_coding(args, out) -> None:
    w = kernel.read_kernel_csv(args.kernel)
    cfg = channel.ChannelConfig.for_kernel(w, args.g, args.r)
    codebook = None if args.codebook is None else np.loadtxt(args.codebook, delimiter=",", ndmin=2)
    prior = None if codebook is not None else _prior(args, cfg)
    M = codebook.shape[0] if codebook is not None else args.M
    spec = experiments.CodingExperimentSpec(
        M=M, cfg=cfg, kernel=w, trials=args.trials, seed=args.seed, prior=prior,
        codebook=codebook, decoder=args.decoder, log_gamma=args.log_gamma,
    )
    _emit_json(experiments.random_coding_experiment(spec).to_dict(), out)


def _experiment_constraint(args, out) -> None:
    cfg = channel.ChannelConfig(args.n, 1, args.g, 1.0 / args.n if args.r is None else args.r)
    prior = _prior(args, cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = experiments.constraint_set_probability(prior, cfg, args.trials, args.seed)
    _emit_json(rep.to_dict(), out)


def _reproduce(args, out) -> None:
    _emit_table(experiments.reproduce_examples(), args.format, out)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_prior_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--prior", choices=("gamma", "uniform", "csv"), default="gamma")
    p.add_argument("--prior-csv", help="pmf over 1..s, one value per line")
    p.add_argument("--s", type=int, default=4, help="support cap s_n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freqcap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="kernel reports and families").add_subparsers(dest="action", required=True)
    p = k.add_parser("report", help="well-conditioning report as JSON")
    p.add_argument("--kernel", required=True)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--cmax", type=float, default=1.0)
    p.set_defaults(func=_kernel_report)
    p = k.add_parser("family", help="write a family kernel as CSV")
    p.add_argument("--family", choices=kernel.FAMILIES, required=True)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--param", type=float, default=0.0)
    p.add_argument("--L", type=int, default=1)
    p.set_defaults(func=_kernel_family)

    e = sub.add_parser("entropy", help="Poisson entropy evaluation").add_subparsers(dest="action", required=True)
    p = e.add_parser("eval", help="H_Poiss(lambda) as JSON")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=_entropy_eval)

    c = sub.add_parser("channel", help="channel sampling").add_subparsers(dest="action", required=True)
    p = c.add_parser("sample", help="sample output histograms as CSV")
    p.add_argument("--kernel", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--mode", choices=("multinomial", "poisson"), default="multinomial")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_channel_sample)

    p = sub.add_parser("infodensity", help="mutual information, Lipschitz and concentration probes")
    p.add_argument("action", choices=("mi", "lipschitz", "concentration"))
    p.add_argument("--kernel", required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--zcap", type=int)
    _add_prior_flags(p)
    p.set_defaults(func=_infodensity)

    b = sub.add_parser("bounds", help="capacity bounds").add_subparsers(dest="action", required=True)
    p = b.add_parser("eval", help="achievability and converse bounds")
    p.add_argument("--kernel", required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--strict", action="store_true", help="accepted for symmetry with 'dna'")
    p.set_defaults(func=_bounds_eval)
    p = b.add_parser("dna", help="short-molecule DNA rate bound")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--alphabet", type=int, default=4)
    p.add_argument("--reads", type=float, required=True)
    p.add_argument("--noise", type=_noise, default="substitution:0")
    p.add_argument("--strict", action="store_true", help="fail outside the beta regime")
    p.set_defaults(func=_bounds_dna)

    x = sub.add_parser("experiment", help="coding and constraint-set experiments").add_subparsers(dest="action", required=True)
    p = x.add_parser("coding", help="random-coding error experiment")
    p.add_argument("--kernel", required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--codebook", help="CSV with one codeword per line")
    p.add_argument("--decoder", choices=("ml", "threshold"), default="ml")
    p.add_argument("--log-gamma", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    _add_prior_flags(p)
    p.set_defaults(func=_experiment_coding)
    p = x.add_parser("constraint", help="Monte Carlo mass of the constraint set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    _add_prior_flags(p)
    p.set_defaults(func=_experiment_constraint)

    p = sub.add_parser("reproduce", help="example table")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=_reproduce)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, out)
    except (FreqcapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
