"""
sweepctl - controlled sweeping processes: simulation, minimum time and Hamilton-Jacobi verification
Command-line entry point
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from sweepctl import __version__
from sweepctl.config.settings import settings
from sweepctl.models.request import (
    HJCheckParams,
    InvarianceParams,
    MintimeParams,
    MuSpec,
    OracleParams,
    PetrovParams,
    RunConfig,
    SimulateParams,
)
from sweepctl.services.run_orchestrator import RunOrchestrator
from sweepctl.utils.constants import (
    ANALYTIC_HJ_TOL,
    BALL_CONTROL_SAMPLES,
    DEFAULT_STEP,
    EXIT_CONFIG_ERROR,
    EXIT_VERIFICATION_FAILED,
    MODULUS_K_PRIME,
    ORACLE_BUDGET,
    ORACLE_MAX_SEGMENTS,
    ORACLE_STEP,
    PETROV_DELTA,
    PETROV_NEIGHBORS,
    PLAN_STEP,
    VALUE_ITERATION_MAX_SWEEPS,
    VALUE_ITERATION_TOL,
)
from sweepctl.utils.exceptions import (
    BudgetExceeded,
    ConfigError,
    DomainError,
    EmptyIntersection,
    GridTooCoarse,
    NotInSet,
    OutsideGraph,
    StepTooLarge,
    SweepctlError,
    TimeOutOfDomain,
)
from sweepctl.utils.formatters import format_table, summary_frame
from sweepctl.utils.logger import setup_logger
from sweepctl.utils.validators import parse_vector

logger = logging.getLogger("sweepctl")

# Errors caused by the requested parameters rather than by a failed check
PARAMETER_ERRORS = (
    BudgetExceeded,
    DomainError,
    EmptyIntersection,
    GridTooCoarse,
    NotInSet,
    OutsideGraph,
    StepTooLarge,
    TimeOutOfDomain,
)


def _vector(text: str) -> List[float]:
    try:
        return parse_vector(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _policy(text: str) -> str:
    text = text.strip()
    if text != "greedy":
        _vector(text[2:] if text.startswith("u=") else text)
    return text


def _mu(text: str) -> MuSpec:
    try:
        return MuSpec.parse(text)
    except (ValueError, ValidationError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _shape_json(text: str) -> Dict[str, Any]:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"--K is not valid JSON: {e.msg}")
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("--K must be a JSON object")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--scenario', type=str, required=True, help='Built-in name (example1, example2) or scenario JSON path')
    common.add_argument('--output-dir', type=str, default=None, help=f'Artifact directory (default: $SWEEPCTL_OUTPUT_DIR or {settings.OUTPUT_DIR}/<command>)')
    common.add_argument('--seed', type=int, default=0, help='Seed for every random sample')
    common.add_argument('--workers', type=int, default=1, help='Worker threads')
    common.add_argument('--log-level', type=str, default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    common.add_argument('--log-file', type=str, default=None, help='Optional rotating log file')
    common.add_argument('--timing', action='store_true', help='Record wall time in the manifest')

    parser = argparse.ArgumentParser(
        prog='sweepctl',
        description='Controlled sweeping processes: simulation, minimum time and Hamilton-Jacobi verification'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', parents=[common], help='Integrate one trajectory')
    p.add_argument('--policy', type=_policy, default=None, help="Constant control 'u=1' / 'u=1,1', or 'greedy'")
    p.add_argument('--from', dest='start', type=_vector, default=None, help="t0 then x0, e.g. '0,-1' (use --from=-1,0 for a leading minus)")
    p.add_argument('--h', type=float, default=DEFAULT_STEP, help='Step')
    p.add_argument('--horizon', type=float, default=None)
    p.add_argument('--integrator', type=str, default='catching_up', choices=['catching_up', 'subdifferential', 'projected'])
    p.add_argument('--dx', type=float, default=None, help='Grid spacing for the greedy policy')
    p.add_argument('--dt', type=float, default=None)

    p = sub.add_parser('mintime', parents=[common], help='Solve for the minimum time function on a grid')
    p.add_argument('--dx', type=float, required=True)
    p.add_argument('--dt', type=float, default=None)
    p.add_argument('--n-controls', type=int, default=BALL_CONTROL_SAMPLES)
    p.add_argument('--tol', type=float, default=VALUE_ITERATION_TOL)
    p.add_argument('--max-sweeps', type=int, default=VALUE_ITERATION_MAX_SWEEPS)
    p.add_argument('--probe', type=_vector, action='append', default=[], help="'t,x...' point to report (repeatable)")

    p = sub.add_parser('hjcheck', parents=[common], help='Verify a candidate against the Hamilton-Jacobi inequalities')
    p.add_argument('--candidate', type=str, default='exact', choices=['exact', 'grid', 'perturbed'])
    p.add_argument('--plan-dx', type=float, default=PLAN_STEP)
    p.add_argument('--plan-dt', type=float, default=PLAN_STEP)
    p.add_argument('--tol', type=float, default=None, help=f'Default {ANALYTIC_HJ_TOL:g} (closed form) or 5*max(dx, dt) (grid)')
    p.add_argument('--rho', type=float, default=None)
    p.add_argument('--dx', type=float, default=None, help='Grid spacing for --candidate grid')
    p.add_argument('--dt', type=float, default=None)

    p = sub.add_parser('petrov', parents=[common], help='Sampled Petrov decrease condition and modulus bounds')
    p.add_argument('--mu', type=_mu, default=MuSpec(kind='constant', c=0.5), help="'const:c', 'sqrt', 'power:c,alpha' or 'table:r:mu,...'")
    p.add_argument('--delta', type=float, default=PETROV_DELTA)
    p.add_argument('--L', type=float, default=None)
    p.add_argument('--points', type=int, default=50, help='Random sample points')
    p.add_argument('--neighbors', type=int, default=PETROV_NEIGHBORS)
    p.add_argument('--probe', type=_vector, action='append', default=[], help="'t,x...' point to probe (repeatable)")
    p.add_argument('--k', type=float, default=None, help='K of the continuity modulus')
    p.add_argument('--k-prime', type=float, default=MODULUS_K_PRIME)
    p.add_argument('--dx', type=float, default=0.01, help='Spatial gap of the continuity modulus')
    p.add_argument('--dt', type=float, default=0.0, help='Time gap of the continuity modulus')
    p.add_argument('--t-bound', type=float, default=1.0, help='Minimum-time bound in the modulus')

    p = sub.add_parser('invariance', parents=[common], help='Weak / strong invariance of graph(C) restricted to a set K')
    p.add_argument('--K', type=_shape_json, required=True, help='Shape descriptor JSON, e.g. \'{"kind":"halfspace","normal":[-1],"offset":-1.9}\'')
    p.add_argument('--mode', type=str, default='both', choices=['weak', 'strong', 'both'])
    p.add_argument('--plan-dx', type=float, default=PLAN_STEP)
    p.add_argument('--plan-dt', type=float, default=PLAN_STEP)
    p.add_argument('--tol', type=float, default=ANALYTIC_HJ_TOL)
    p.add_argument('--rho', type=float, default=None)

    p = sub.add_parser('oracle', parents=[common], help='Brute-force minimum time over switching controls')
    p.add_argument('--probe', type=_vector, action='append', required=True, help="'t,x...' point (repeatable)")
    p.add_argument('--segments', type=int, default=ORACLE_MAX_SEGMENTS)
    p.add_argument('--h', type=float, default=ORACLE_STEP)
    p.add_argument('--budget', type=int, default=ORACLE_BUDGET)
    p.add_argument('--horizon', type=float, default=None)

    return parser


def _params(args: argparse.Namespace):
    if args.command == 'simulate':
        greedy = args.policy == 'greedy'
        control = None
        if args.policy is not None and not greedy:
            control = parse_vector(args.policy[2:] if args.policy.startswith('u=') else args.policy)
        return SimulateParams(
            h=args.h, horizon=args.horizon, start=args.start, policy=control, greedy=greedy,
            dx=args.dx, dt=args.dt, integrator=args.integrator
        )
    if args.command == 'mintime':
        return MintimeParams(
            dx=args.dx, dt=args.dt, n_controls=args.n_controls, tol=args.tol,
            max_sweeps=args.max_sweeps, probes=args.probe
        )
    if args.command == 'hjcheck':
        return HJCheckParams(
            candidate=args.candidate, plan_dx=args.plan_dx, plan_dt=args.plan_dt,
            tol=args.tol, rho=args.rho, dx=args.dx, dt=args.dt
        )
    if args.command == 'petrov':
        return PetrovParams(
            mu=args.mu, delta=args.delta, L=args.L, n_points=args.points, n_neighbors=args.neighbors,
            points=args.probe, K=args.k, K_prime=args.k_prime, dx=args.dx, dt=args.dt, T_bound=args.t_bound
        )
    if args.command == 'invariance':
        return InvarianceParams(
            K=args.K, mode=args.mode, plan_dx=args.plan_dx, plan_dt=args.plan_dt, tol=args.tol, rho=args.rho
        )
    return OracleParams(
        probes=args.probe, n_segments=args.segments, h=args.h, budget=args.budget, horizon=args.horizon
    )


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Turn parsed arguments into a validated RunConfig

    Raises:
        ConfigError: on invalid parameters
    """
    output_dir = args.output_dir or f"{settings.OUTPUT_DIR}/{args.command}"
    try:
        return RunConfig(
            command=args.command,
            scenario=args.scenario,
            output_dir=output_dir,
            seed=args.seed,
            workers=args.workers,
            timing=args.timing,
            params=_params(args)
        )
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(k) for k in first["loc"])
        raise ConfigError(f"Invalid parameter {location}: {first['msg']}", details={"errors": len(e.errors())}) from e


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logger("sweepctl", level=args.log_level, log_file=args.log_file)

    try:
        config = build_config(args)
        manifest = RunOrchestrator(config).run()
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except PARAMETER_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e.message} {e.details or ''}")
        return EXIT_CONFIG_ERROR
    except SweepctlError as e:
        logger.error(f"{type(e).__name__}: {e.message} {e.details or ''}")
        return EXIT_VERIFICATION_FAILED
    except Exception as e:
        logger.error(f"Unexpected failure: {str(e)}", exc_info=True)
        raise

    print(format_table(summary_frame(manifest.summary)))
    print(f"status: {manifest.status}  artifacts: {config.output_dir}")
    return manifest.exit_code


if __name__ == '__main__':
    sys.exit(main())
