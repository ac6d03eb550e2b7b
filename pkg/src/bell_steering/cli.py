from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import SteeringConfig, load_config
from .harness import (
	region_slice,
	report,
	sample_table,
	sweep_family,
	sweep_values,
	verify_inequalities,
	werner_thresholds,
)
from .linalg import weiszfeld
from .output import (
	format_ft,
	format_inequality_report,
	inequality_report_to_json,
	report_to_json,
	reports_to_frame,
	write_csv,
)
from .states import edge, from_probabilities, from_t, werner

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# CLI failures other than a failed verification
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="bell-steering", description="Steerability of Bell-diagonal two-qubit states")
	parser.add_argument("--config", type=str, help="Path to YAML/JSON config file", default=None)
	parser.add_argument("--log-level", type=str, default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
	sub = parser.add_subparsers(dest="command", required=True)

	analyze = sub.add_parser("analyze", help="All measures and the class of one state")
	state = analyze.add_mutually_exclusive_group(required=True)
	state.add_argument("--t", type=str, help="T1,T2,T3")
	state.add_argument("--probs", type=str, help="P00,P01,P10,P11")
	state.add_argument("--werner", type=float, help="Werner parameter f")
	state.add_argument("--edge", type=float, help="Edge parameter p")
	analyze.add_argument("--s3-estimate", action="store_true")
	analyze.add_argument("--seed", type=int, default=None)
	analyze.add_argument("--json", action="store_true")

	sweep = sub.add_parser("sweep", help="Reports along the Werner or edge family")
	sweep.add_argument("--family", type=str, required=True, choices=["werner", "edge"])
	sweep.add_argument("--from", dest="start", type=float, required=True)
	sweep.add_argument("--to", dest="stop", type=float, required=True)
	sweep.add_argument("--step", type=float, required=True)
	sweep.add_argument("--out", type=str, required=True)

	sample = sub.add_parser("sample", help="Uniform samples over the tetrahedron")
	sample.add_argument("--n", type=int, required=True)
	sample.add_argument("--seed", type=int, default=None)
	sample.add_argument("--out", type=str, required=True)
	sample.add_argument("--workers", type=int, default=None)

	verify = sub.add_parser("verify", help="Inequality suite on uniform samples")
	verify.add_argument("--n", type=int, required=True)
	verify.add_argument("--seed", type=int, default=None)
	verify.add_argument("--strict", action="store_true", help="Also fail on implication or saturation failures")
	verify.add_argument("--workers", type=int, default=None)
	verify.add_argument("--json", action="store_true")

	regions = sub.add_parser("regions", help="Class labels on a coordinate slice")
	regions.add_argument("--axis", type=str, required=True, choices=["t1", "t2", "t3"])
	regions.add_argument("--value", type=float, required=True)
	regions.add_argument("--res", type=int, required=True)
	regions.add_argument("--out", type=str, required=True)

	thresholds = sub.add_parser("thresholds", help="Werner class transitions by bisection")
	thresholds.add_argument("--family", type=str, required=True, choices=["werner"])

	ft = sub.add_parser("ft", help="Fermat-Toricelli point of four points")
	ft.add_argument("--points", type=str, required=True, help="Four whitespace-separated 3-vectors, one per line")
	return parser


def _parse_floats(text: str, count: int, flag: str) -> List[float]:
	parts = [p.strip() for p in text.split(",")]
	if len(parts) != count:
		raise ValueError(f"{flag} expects {count} comma-separated numbers, got '{text}'")
	return [float(p) for p in parts]


def _config_from_args(args: argparse.Namespace) -> SteeringConfig:
	if args.config:
		return load_config(Path(args.config))
	return SteeringConfig()


def _seed(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	if args.seed is not None:
		return args.seed
	return cfg.seed or 0


# ============================================================================
# Commands
# ============================================================================

def _analyze(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	if args.t is not None:
		state = from_t(*_parse_floats(args.t, 3, "--t"))
	elif args.probs is not None:
		state = from_probabilities(*_parse_floats(args.probs, 4, "--probs"))
	elif args.werner is not None:
		state = werner(args.werner)
	else:
		state = edge(args.edge)

	result = report(state, with_s3_estimate=args.s3_estimate, seed=_seed(args, cfg), config=cfg)
	if args.json:
		print(report_to_json(result))
		return 0
	for key, value in result.to_record().model_dump(by_alias=True).items():
		if key == "index":
			continue
		if isinstance(value, float):
			value = f"{value:.17g}"
		elif hasattr(value, "value"):
			value = value.value
		print(f"{key:<6} {value if value is not None else '-'}")
	return 0


def _sweep(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	reports = sweep_family(args.family, args.start, args.stop, args.step)
	params = sweep_values(args.start, args.stop, args.step)
	name = "f" if args.family == "werner" else "p"
	write_csv(reports_to_frame(reports, params=params, param_name=name), Path(args.out))
	return 0


def _sample(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	df = sample_table(args.n, _seed(args, cfg), workers=args.workers or cfg.workers)
	write_csv(df, Path(args.out))
	return 0


def _verify(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	result = verify_inequalities(args.n, _seed(args, cfg), config=cfg, workers=args.workers)
	print(inequality_report_to_json(result) if args.json else format_inequality_report(result))
	ok = result.strict_passed if args.strict else result.passed
	return 0 if ok else 1


def _regions(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	write_csv(region_slice(args.axis, args.value, args.res), Path(args.out))
	return 0


def _thresholds(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	for name, value in werner_thresholds(cfg).items():
		print(f"{name:<22} {value:.12f}")
	return 0


def _ft(args: argparse.Namespace, cfg: SteeringConfig) -> int:
	path = Path(args.points)
	if not path.exists():
		raise FileNotFoundError(f"Points file not found: {path}")
	points = np.loadtxt(path, ndmin=2)
	if points.shape != (4, 3):
		raise ValueError(f"{path} must hold four 3-vectors, one per line; got shape {points.shape}")
	solution = weiszfeld(points, tol=cfg.weiszfeld.tol, max_iter=cfg.weiszfeld.max_iter)
	print(format_ft(solution))
	return 0


COMMANDS = {
	"analyze": _analyze,
	"sweep": _sweep,
	"sample": _sample,
	"verify": _verify,
	"regions": _regions,
	"thresholds": _thresholds,
	"ft": _ft,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
	args = _build_parser().parse_args(argv)
	logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT, stream=sys.stderr)

	try:
		cfg = _config_from_args(args)
		return COMMANDS[args.command](args, cfg)
	except (ValueError, RuntimeError, OSError) as e:
		logger.error(f"{args.command} failed: {e}")
		return EXIT_ERROR


if __name__ == "__main__":
	sys.exit(main())
