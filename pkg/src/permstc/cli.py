"""Command line interface: ``permstc build | evaluate | simulate``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import codes
from .diversity import code_report, effective_snr_coherent, effective_snr_noncoherent
from .errors import PermstcError
from .sim import SimConfig, run_ber, snr_linear


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{n}: expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out


def parse_angle(text: str) -> float:
    """Radians, optionally written as a multiple of pi such as ``7pi/4``."""
    t = text.replace(" ", "").lower()
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    coef = num.replace("*", "").replace("pi", "")
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    return coef * math.pi / (float(den) if den else 1.0)


def parse_snr_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive of ``b``) or a comma separated list."""
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        if step <= 0 or b < a:
            raise ValueError(f"bad SNR range {text!r}")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 10) for i in range(n)]
    return [float(v) for v in text.split(",") if v.strip()]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def build_from_spec(spec: dict[str, str]) -> codes.SpaceTimeCode:
    alpha = parse_angle(spec["alpha"]) if "alpha" in spec else None
    scale = float(spec.get("scale", 1.0))
    if "preset" in spec:
        return codes.build_preset(spec["preset"], alpha=alpha, scale=scale)
    values = _floats(spec["values"])
    mult = tuple(int(v) for v in spec["multiplicities"].split(","))
    N, T, n_t = int(spec["N"]), int(spec["T"]), int(spec.get("nt", 2))
    mode = spec.get("mode", "noncoherent")
    inner = spec.get("inner", "none").lower()
    if mode == "coherent" and inner == "none":
        a = codes.sph.ALPHA_COHERENT if alpha is None else alpha
        return codes.build_coherent_from_sphere(values, mult, N, a, n_t, T, scale)
    a = codes.sph.ALPHA_NONCOHERENT if alpha is None else alpha
    code = codes.build_noncoherent_code(values, mult, N, a, n_t, T, scale)
    if inner != "none":
        code = codes.compose(code, codes.alamouti_code(inner))
    return code


def cmd_build(args) -> int:
    if args.preset:
        spec = {"preset": args.preset}
    else:
        spec = read_config(args.spec)
    if args.alpha is not None:
        spec["alpha"] = args.alpha
    if args.scale is not None:
        spec["scale"] = str(args.scale)
    code = build_from_spec(spec)
    codes.save_code(code, args.out)
    print(f"wrote {len(code)} codewords ({code.T}x{code.n_t}, {code.mode}, rate {code.rate:.4f}) to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    code = codes.load_code(args.code)
    rho = snr_linear(args.snr_db)
    if code.mode == "coherent":
        rho_eff = effective_snr_coherent(rho, code.T, code.n_t)
    else:
        rho_eff = effective_snr_noncoherent(effective_snr_coherent(rho, code.T, code.n_t))
    rep = code_report(code.codewords, rho_eff, code.mode)
    print(f"cardinality = {rep.cardinality}")
    print(f"rate = {code.rate:.6f}")
    print(f"mode = {code.mode}")
    print(f"min_diversity_sum = {rep.min_diversity_sum:.10g}")
    print(f"min_diversity_product = {rep.min_diversity_product:.10g}")
    print(f"min_diversity = {rep.min_diversity:.10g}")
    print(f"full_diversity = {str(rep.full_diversity).lower()}")
    return 0


_SIM_KEYS = {"code", "mode", "snr_db", "trials", "seed", "nr", "out", "workers"}


def cmd_simulate(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    unknown = set(cfg) - _SIM_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in _SIM_KEYS:
        value = getattr(args, key)
        if value is not None:
            cfg[key] = str(value)
    missing = [k for k in ("code", "snr_db", "trials", "out") if k not in cfg]
    if missing:
        raise ValueError(f"missing settings: {', '.join(missing)}")
    config = SimConfig(
        code=cfg["code"],
        snr_grid_db=parse_snr_grid(cfg["snr_db"]),
        trials_per_point=int(cfg["trials"]),
        master_seed=int(cfg.get("seed", 0)),
        n_r=int(cfg.get("nr", 1)),
        mode=cfg.get("mode"),
        workers=int(cfg.get("workers", 1)),
    )
    curve = run_ber(config)
    curve.write(cfg["out"])
    for p in curve.points:
        print(f"{p.snr_db:6.2f} dB  ser {p.ser:.3e}  ber {p.ber:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permstc", description="Space-time codes from spherical permutation codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a codebook and write it to a file")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(codes.PRESETS))
    src.add_argument("--spec", type=Path, help="key = value build description")
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--alpha", help="rotation angle in radians, e.g. 3.14 or 7pi/4")
    b.add_argument("--scale", type=float)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("evaluate", help="diversity summary of a codebook")
    e.add_argument("--code", type=Path, required=True)
    e.add_argument("--snr-db", type=float, default=10.0)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("simulate", help="Monte Carlo BER over an SNR grid")
    s.add_argument("--config", type=Path, help="key = value file; command line options override it")
    s.add_argument("--code")
    s.add_argument("--mode", choices=codes.MODES)
    s.add_argument("--snr-db", dest="snr_db")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--nr", type=int)
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PermstcError, ValueError, KeyError, OSError) as exc:
        print(f"permstc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
