"""Command-line front end: simulate, genie, channel-info, pairwise, validate.

Exit codes: 0 ok, 1 usage/config error, 2 completed with warnings.
Human-readable output goes to stderr when machine output (CSV/JSON) is on
stdout, so the two never interleave on one stream.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, channel, glrt, harness, modem
from .channel import ChannelModel, composite_pdf, gain_moment, scintillation_index

CONFIG_DIR_ENV = "FSO_MLSD_CONFIG_DIR"


def _resolve_config(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / path
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"config file not found: {path}")


def _load(args) -> harness.SimConfig:
    if args.config:
        cfg = harness.load_config(_resolve_config(args.config))
    elif getattr(args, "preset", None):
        cfg = harness.config_from_dict(
            {"M": 4, "channel": {"preset": args.preset}}
        )
    else:
        raise ValueError("either --config or --preset is required")
    if getattr(args, "set", None):
        cfg = harness.apply_overrides(cfg, args.set)
    return cfg


def _human(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    records = harness.run_sweep(cfg, n_workers=args.workers)
    harness.write_results(records, args.output, args.format)
    _human(f"wrote {args.output}")
    _human(f"{'snr_db':>8} {'detector':>8} {'ber':>12} {'ci95':>10} {'bits':>12}")
    warn = False
    for rec in records:
        for det, s in rec.detectors.items():
            _human(f"{rec.snr_db:8.2f} {det:>8} {s.ber:12.4e} {s.ci95:10.2e} {s.bits:12d}")
        warn = warn or rec.low_confidence
    if warn:
        _human("warning: some records are low-confidence (stop rule starved)")
        return 2
    return 0


def cmd_genie(args) -> int:
    cfg = _load(args)
    eh2 = gain_moment(cfg.channel, 2)
    stream = _open_out(args)
    try:
        writer = csv.writer(stream)
        writer.writerow(["snr_db", "sep", "bep"])
        for snr_db in cfg.snr_grid_db:
            ebn0 = 10.0 ** (snr_db / 10.0) / eh2
            sep = analysis.genie_sep(cfg.channel, ebn0, cfg.m_order, cfg.eb)
            bep = sep / math.log2(cfg.m_order)
            writer.writerow([snr_db, f"{sep:.8e}", f"{bep:.8e}"])
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


def _open_out(args):
    if getattr(args, "output", None):
        return open(args.output, "w", newline="")
    return sys.stdout


def cmd_channel_info(args) -> int:
    cfg = _load(args)
    model = cfg.channel
    print(f"scintillation_index: {scintillation_index(model):.4f}")
    print(f"E[h]:  {gain_moment(model, 1):.6g}")
    print(f"E[h2]: {gain_moment(model, 2):.6g}")
    if model.is_degenerate:
        print("pdf_normalization: 1 (degenerate h=1)")
    else:
        lo, hi = channel.gain_support(model, 1e-9)
        from scipy import integrate

        norm, _ = integrate.quad(
            lambda u: composite_pdf(math.exp(u), model) * math.exp(u),
            math.log(lo), math.log(hi), limit=200,
        )
        print(f"pdf_normalization: {norm:.6f}")
    return 0


def cmd_pairwise(args) -> int:
    n0 = args.eb / 10.0 ** (args.snr_db / 10.0)
    d = modem.min_distance(args.eb, args.m_order) / 2.0
    sc = analysis.PairwiseScenario(
        s_energy=args.s_energy, m0k=args.m0, m1k=args.m1,
        h=args.gain, d=d, n0=n0, window_len=args.window_len,
    )
    st = analysis.pairwise_stats(sc)
    exact = analysis.pairwise_error_prob(sc)
    limit = analysis.pairwise_limit(d, args.gain, n0, abs(args.m0 - args.m1))
    print(f"mu:         {st.mu:.6g}")
    print(f"E[X+]:      {st.mean_plus:.6g}")
    print(f"Var[X+]:    {st.var_plus:.6g}")
    print(f"E[X-]:      {st.mean_minus:.6g}")
    print(f"Var[X-]:    {st.var_minus:.6g}")
    print(f"exact_pairwise: {exact:.8e}")
    print(f"large_window_limit: {limit:.8e}")
    return 0


def _validate_checks():
    """Fast self-checks; yields (name, ok) pairs."""
    rng = np.random.default_rng(12345)

    yield "si_weak", abs(scintillation_index(ChannelModel.weak()) - 0.0941) < 5e-4
    yield "si_strong", abs(scintillation_index(ChannelModel.strong()) - 1.3890) < 5e-4
    yield "lognormal_pdf_norm", abs(
        analysis.expect_over_gain(
            lambda h: np.ones_like(h),
            ChannelModel(channel.TurbulenceModel.lognormal(0.15), channel.PointingModel.off()),
        ) - 1.0
    ) < 1e-4
    yield "gammagamma_pdf_norm", abs(
        analysis.expect_over_gain(
            lambda h: np.ones_like(h),
            ChannelModel(channel.TurbulenceModel.gamma_gamma(2.23, 1.54), channel.PointingModel.off()),
        ) - 1.0
    ) < 1e-4
    yield "pointing_norm", abs(
        analysis.expect_over_gain(
            lambda h: np.ones_like(h),
            ChannelModel(channel.TurbulenceModel.unity(),
                         channel.PointingModel(a0=0.0198, gamma_sq=2.8071, enabled=True)),
        ) - 1.0
    ) < 1e-4
    yield "bessel_half_order", abs(
        channel.bessel_k(0.5, 1.0) - math.sqrt(math.pi / 2.0) * math.exp(-1.0)
    ) < 1e-10

    # Gray round trip and adjacency
    ok = True
    for m_order in (2, 4, 8):
        bits = rng.integers(0, 2, 30 * int(math.log2(m_order)))
        syms = modem.gray_encode(bits, m_order)
        ok &= bool(np.array_equal(modem.gray_decode(syms, m_order), bits))
        table = modem.gray_table(m_order)
        ok &= all(bin(table[i] ^ table[i + 1]).count("1") == 1 for i in range(m_order - 1))
    yield "gray_round_trip", ok

    # metric identity ||r||^2 - lambda = min_h ||r - 2dh m||^2
    r = rng.normal(size=16)
    m = rng.integers(0, 4, 16).astype(float)
    m[0] = 1.0
    lam = glrt.glrt_metric(r, m)
    hh = glrt.estimate_gain(r, m, 0.5)
    resid = float(np.sum((r - 2 * 0.5 * hh * m) ** 2))
    yield "metric_identity", abs((float(np.dot(r, r)) - lam) - resid) < 1e-9 * max(resid, 1.0)

    yield "q_function", abs(analysis.q_function(0.0) - 0.5) < 1e-12
    yield "pairwise_orthogonality", _check_orthogonality(rng)
    yield "pairwise_limit", _check_pairwise_limit()
    yield "oracle_agreement_m2", _check_oracle(rng, m_order=2, length=6, frames=50)
    yield "pcsi_tie_rule", glrt.pcsi_detect(np.array([1.5]), 0.5, 1.0, 4)[0] == 1
    yield "moment_closed_forms", abs(
        gain_moment(ChannelModel.weak(), 1)
        - analysis.expect_over_gain(lambda h: h, ChannelModel.weak())
    ) < 1e-4


def _check_orthogonality(rng) -> bool:
    for _ in range(20):
        n = 8
        m0 = rng.integers(0, 4, n).astype(float)
        m1 = m0.copy()
        k = int(rng.integers(0, n))
        m1[k] = (m0[k] + 1) % 4
        if not (np.any(m0) and np.any(m1)):
            continue
        n0v = np.linalg.norm(m0)
        n1v = np.linalg.norm(m1)
        mp = n0v * m1 + n1v * m0
        mm = n0v * m1 - n1v * m0
        if abs(float(np.dot(mp, mm))) > 1e-9 * (n0v * n1v) ** 2:
            return False
    return True


def _check_pairwise_limit() -> bool:
    sc = analysis.PairwiseScenario(s_energy=1e6, m0k=2, m1k=1, h=0.8, d=0.4, n0=0.5)
    exact = analysis.pairwise_error_prob(sc)
    lim = analysis.pairwise_limit(0.4, 0.8, 0.5, 1)
    return abs(exact - lim) < 1e-6


def _check_oracle(rng, m_order: int, length: int, frames: int) -> bool:
    scheme = modem.PamScheme(m_order, 1.0, 1e-12)
    for _ in range(frames):
        data = rng.integers(0, m_order, length)
        h = 0.7
        pilots = np.full(2, m_order - 1)
        r_p = scheme.two_d * h * pilots.astype(float)
        r_d = scheme.two_d * h * data.astype(float)
        ref = glrt.exhaustive_glrt(r_d, m_order, pilots, r_p)
        det = glrt.TrellisDetector(scheme, window_len=50, l_max=20)
        det.load_pilots(pilots, r_p)
        decided = []
        for r_k in r_d:
            decided += det.step(float(r_k))
        decided += det.finalize()
        if not np.array_equal(decided, ref):
            return False
    return True


def cmd_validate(args) -> int:
    failures = 0
    count = 0
    for name, ok in _validate_checks():
        count += 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1
    print(f"{count - failures}/{count} checks passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fso-mlsd",
        description="GLRT-MLSD receiver simulation for M-PAM over FSO fading channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_opts(p, output=True):
        p.add_argument("-c", "--config", help="TOML config file")
        p.add_argument("--preset", choices=sorted(harness.PRESET_CHANNELS),
                       help="built-in channel preset (M=4 defaults)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        if output:
            p.add_argument("-o", "--output", help="output file")
            p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("simulate", help="run a Monte-Carlo BER sweep")
    add_config_opts(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate, require_output=True)

    p = sub.add_parser("genie", help="numerically integrated Genie Bound table")
    add_config_opts(p)
    p.set_defaults(func=cmd_genie)

    p = sub.add_parser("channel-info", help="inspect a channel model")
    add_config_opts(p, output=False)
    p.set_defaults(func=cmd_channel_info)

    p = sub.add_parser("pairwise", help="pairwise-error statistics and limits")
    p.add_argument("--s-energy", type=float, required=True, dest="s_energy")
    p.add_argument("--m0", type=int, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("-M", "--m-order", type=int, default=4)
    p.add_argument("--eb", type=float, default=1.0)
    p.add_argument("--window-len", type=int, default=None)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("validate", help="run the fast property self-checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "require_output", False) and not args.output:
        parser.error("simulate requires -o/--output")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
