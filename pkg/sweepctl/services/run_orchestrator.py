"""
Run Orchestrator - Coordinates scenarios, simulation, solving and verification for one CLI command
"""
import logging
import math
import time
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from sweepctl.config.settings import settings
from sweepctl.models.report import HamiltonianReport, RunManifest
from sweepctl.models.request import RunConfig
from sweepctl.modules import b_dynamics, c_solver, d_hjcheck, e_scenarios
from sweepctl.modules.e_scenarios import ScenarioBundle
from sweepctl.services.exporter import RunExporter
from sweepctl.utils.constants import (
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    GRID_CANDIDATE_DX,
    MEMBERSHIP_TOL,
    ORACLE_HORIZON,
    TARGET_TOL,
)
from sweepctl.utils.exceptions import ConfigError, DivergentIntegral, SignConditionFailed, SweepctlError
from sweepctl.utils.formatters import format_status, records_frame

logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    """What a command handler hands back to the orchestrator"""
    exit_code: int = EXIT_OK
    summary: Dict[str, Any] = dataclass_field(default_factory=dict)
    constants: Dict[str, Optional[float]] = dataclass_field(default_factory=dict)
    tolerances: Dict[str, float] = dataclass_field(default_factory=dict)


class RunOrchestrator:
    """
    Runs one command against one scenario and writes its artifacts plus
    a manifest into the output directory
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.params
        self.exporter = RunExporter(config.output_dir)
        self.bundle: Optional[ScenarioBundle] = None

        self.commands: Dict[str, Callable[[], CommandResult]] = {
            "simulate": self._simulate,
            "mintime": self._mintime,
            "hjcheck": self._hjcheck,
            "petrov": self._petrov,
            "invariance": self._invariance,
            "oracle": self._oracle,
        }

    def run(self) -> RunManifest:
        """
        Load the scenario, run the command and write the manifest

        Raises:
            ConfigError: on invalid scenario or parameters
        """
        start_time = time.perf_counter()
        logger.info(f"Starting '{self.config.command}' on scenario '{self.config.scenario}'")
        self.bundle = e_scenarios.load_scenario(self.config.scenario)

        result = self.commands[self.config.command]()

        manifest = RunManifest(
            schema_version=settings.SCHEMA_VERSION,
            command=self.config.command,
            scenario=self.bundle.name,
            seed=self.config.seed,
            workers=self.config.workers,
            constants={**self.bundle.constants, **result.constants},
            parameters=self.params.model_dump(mode="json"),
            tolerances={"membership": MEMBERSHIP_TOL, "target": TARGET_TOL, **result.tolerances},
            artifacts=list(self.exporter.artifacts),
            status=format_status(result.exit_code),
            exit_code=result.exit_code,
            summary=result.summary,
            wall_time_seconds=round(time.perf_counter() - start_time, 3) if self.config.timing else None
        )
        self.exporter.write_manifest(manifest)
        logger.info(f"'{self.config.command}' finished with status {manifest.status}")
        return manifest

    # -- shared helpers -----------------------------------------------------

    def _start(self, start: Optional[List[float]]) -> List[float]:
        start = start if start is not None else self.bundle.start
        if start is None:
            raise ConfigError("No start point: pass --from or set 'start' in the scenario")
        if len(start) != self.bundle.moving_set.dim + 1:
            raise ConfigError(f"Start point needs t0 and {self.bundle.moving_set.dim} coordinates, got {start}")
        return list(start)

    def _horizon(self, horizon: Optional[float]) -> float:
        if horizon is not None:
            return horizon
        if self.bundle.horizon is not None:
            return self.bundle.horizon
        t0, t1 = self.bundle.moving_set.time_domain
        return t1 - t0 if math.isfinite(t1) else ORACLE_HORIZON

    def _exact(self, t: float, x: List[float]) -> Optional[float]:
        if self.bundle.exact_T is None:
            return None
        try:
            return self.bundle.exact_T(t, x)
        except SweepctlError:
            return None

    def _solve(self, dx: float, dt: Optional[float], **kwargs) -> c_solver.ValueGrid:
        return c_solver.solve_mintime(
            self.bundle.moving_set,
            self.bundle.field,
            self.bundle.target,
            dx,
            dt=dt,
            workers=self.config.workers,
            **kwargs
        )

    def _write_hamiltonian(self, stem: str, report: HamiltonianReport) -> None:
        self.exporter.write_model(f"{stem}.json", report, exclude={"records"})
        rows = [r.model_dump() for r in report.records]
        self.exporter.write_frame(f"{stem}_probes.csv", records_frame(rows, vector_columns=("x", "p")))

    # -- commands -------------------------------------------------------------

    def _simulate(self) -> CommandResult:
        params = self.params
        bundle = self.bundle
        start = self._start(params.start)
        horizon = self._horizon(params.horizon)

        if params.greedy:
            if params.dx is None:
                raise ConfigError("--policy greedy needs --dx for the value grid")
            grid = self._solve(params.dx, params.dt)
            policy = c_solver.greedy_policy(grid)
            policy_label = "greedy"
        else:
            control = params.policy if params.policy is not None else bundle.policy
            if control is None:
                raise ConfigError("No control: pass --policy or set 'policy' in the scenario")
            if len(control) != bundle.field.dim:
                raise ConfigError(f"Control needs {bundle.field.dim} components, got {control}")
            policy = b_dynamics.constant_policy(bundle.field, control)
            policy_label = f"u={','.join(f'{u:g}' for u in control)}"

        record = b_dynamics.simulate(
            bundle.moving_set,
            bundle.field,
            policy,
            start[0],
            start[1:],
            bundle.target,
            params.h,
            horizon,
            integrator=params.integrator
        )
        self.exporter.write_frame("trajectory.csv", record.to_frame())
        return CommandResult(
            summary={
                "policy": policy_label,
                "status": record.status,
                "hit_time": record.hit_time,
                "steps": int(record.times.size - 1),
                "final_state": record.states[-1].tolist(),
                "max_violation": record.max_violation,
                "max_correction": record.max_correction,
                "exact_T": self._exact(start[0], start[1:]),
            },
            constants={"h": params.h, "horizon": horizon}
        )

    def _mintime(self) -> CommandResult:
        params = self.params
        grid = self._solve(params.dx, params.dt, n_controls=params.n_controls, tol=params.tol, max_sweeps=params.max_sweeps)
        self.exporter.write_frame("grid.csv", grid.to_frame())

        probes = list(params.probes)
        if not probes and self.bundle.start is not None:
            probes = [self.bundle.start]
        probe_rows = []
        for probe in probes:
            t0, x0 = probe[0], probe[1:]
            try:
                value = c_solver.mintime_at(grid, t0, x0)
            except SweepctlError as e:
                logger.warning(f"Probe {probe} skipped: {e}")
                continue
            probe_rows.append({"t": t0, "x": list(x0), "T": value, "exact_T": self._exact(t0, x0)})
        if probe_rows:
            self.exporter.write_frame("probes.csv", records_frame(probe_rows, vector_columns=("x",)))

        summary: Dict[str, Any] = {
            "nodes": grid.counts(),
            "sweeps": grid.sweeps,
            "converged": grid.converged,
            "final_change": grid.final_change,
            "partial_stencils": grid.partial_stencils,
        }
        for row in probe_rows:
            summary[f"T{tuple([row['t']] + row['x'])}"] = row["T"]
        return CommandResult(
            summary=summary,
            constants={"dx": params.dx, "dt": grid.dt},
            tolerances={"value_iteration": params.tol}
        )

    def _candidate(self) -> d_hjcheck.CandidateValueFunction:
        params = self.params
        if params.candidate == "exact":
            if self.bundle.exact_T is None:
                raise ConfigError(f"Scenario '{self.bundle.name}' has no closed-form candidate")
            return self.bundle.exact_T
        if params.candidate == "perturbed":
            if self.bundle.config.exact_candidate != "example1":
                raise ConfigError("The perturbed candidate is defined for example1 only")
            return e_scenarios.example1_perturbed_candidate()
        grid = self._solve(params.dx or GRID_CANDIDATE_DX, params.dt)
        return d_hjcheck.grid_candidate(grid)

    def _hjcheck(self) -> CommandResult:
        params = self.params
        bundle = self.bundle
        candidate = self._candidate()
        tol = params.resolved_tol()
        rho = params.rho if params.rho is not None else bundle.rho
        plan = d_hjcheck.SamplePlan(dt=params.plan_dt, dx=params.plan_dx)
        constants = {"rho": rho}
        try:
            report = d_hjcheck.verify_candidate(
                bundle.moving_set, bundle.field, bundle.target, candidate,
                plan=plan, tol=tol, rho=rho, workers=self.config.workers
            )
        except SignConditionFailed as e:
            logger.error(f"Candidate '{candidate.name}' fails the sign condition: {e}")
            return CommandResult(
                exit_code=EXIT_VERIFICATION_FAILED,
                summary={"candidate": candidate.name, "passed": False, "sign_condition": e.to_dict()},
                constants=constants,
                tolerances={"hamiltonian": tol}
            )
        self._write_hamiltonian("hjcheck_report", report)
        worst = report.worst
        return CommandResult(
            exit_code=EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED,
            summary={
                "candidate": candidate.name,
                "passed": report.passed,
                "probes": report.n_probes,
                "evaluations": len(report.records),
                "skipped": report.skipped,
                "failures": sum(not r.passed for r in report.records),
                "max_violation": report.max_violation,
                "worst_point": None if worst is None else [worst.t] + worst.x,
                "worst_normal": None if worst is None else worst.p,
            },
            constants=constants,
            tolerances={"hamiltonian": tol}
        )

    def _petrov(self) -> CommandResult:
        params = self.params
        bundle = self.bundle
        mu = params.mu
        report = c_solver.petrov_check(
            bundle.moving_set, bundle.field, bundle.target, mu,
            delta=params.delta,
            L=params.L,
            n_points=params.n_points,
            n_neighbors=params.n_neighbors,
            points=params.points or None,
            seed=self.config.seed
        )
        self.exporter.write_model("petrov_report.json", report)

        default_K, _ = c_solver.modulus_default_constants(bundle.moving_set, bundle.field)
        K = params.K if params.K is not None else default_K
        summary: Dict[str, Any] = {
            "mu": mu.label(),
            "points": len(report.points),
            "excluded_in_target": report.excluded_in_target,
            "passed": report.passed,
            "worst_margin": report.worst_margin,
        }
        try:
            summary["modulus_bound"] = c_solver.continuity_modulus_bound(
                mu, K, params.K_prime, params.dx, params.dt, params.T_bound
            )
        except DivergentIntegral as e:
            logger.warning(f"Continuity modulus unavailable: {e}")
            summary["modulus_bound"] = None

        if bundle.start is not None:
            t0, x0 = bundle.start[0], bundle.start[1:]
            dS0 = bundle.target.distance(x0)
            try:
                summary["reach_time_bound"] = c_solver.reach_time_upper_bound(mu, dS0)
            except DivergentIntegral as e:
                logger.warning(f"Reach-time bound unavailable: {e}")
                summary["reach_time_bound"] = None
            try:
                descent = c_solver.petrov_descent(
                    bundle.moving_set, bundle.field, bundle.target, mu, t0, x0, delta=params.delta, L=params.L
                )
                self.exporter.write_model("descent.json", descent)
                summary["descent_elapsed"] = descent.elapsed
                summary["descent_reached"] = descent.reached
            except SweepctlError as e:
                logger.warning(f"Descent from {bundle.start} stopped: {e}")

        return CommandResult(
            summary=summary,
            constants={"K": K, "K_prime": params.K_prime, "delta": params.delta, "L": report.L}
        )

    def _invariance(self) -> CommandResult:
        params = self.params
        bundle = self.bundle
        K = e_scenarios.build_shape(params.K)
        if K.dim != bundle.moving_set.dim:
            raise ConfigError(f"K is {K.dim}D, the constraint is {bundle.moving_set.dim}D")
        rho = params.rho if params.rho is not None else bundle.rho
        plan = d_hjcheck.SamplePlan(dt=params.plan_dt, dx=params.plan_dx)
        modes = ("weak", "strong") if params.mode == "both" else (params.mode,)
        checks = {
            "weak": d_hjcheck.weak_invariance_check,
            "strong": d_hjcheck.strong_invariance_check,
        }

        summary: Dict[str, Any] = {"K": K.describe()}
        passed = True
        for mode in modes:
            report = checks[mode](
                bundle.moving_set, bundle.field, K, plan=plan, tol=params.tol, rho=rho, workers=self.config.workers
            )
            self._write_hamiltonian(f"{mode}_invariance", report)
            summary[f"{mode}_passed"] = report.passed
            summary[f"{mode}_max_violation"] = report.max_violation
            passed = passed and report.passed
        return CommandResult(
            exit_code=EXIT_OK if passed else EXIT_VERIFICATION_FAILED,
            summary=summary,
            constants={"rho": rho},
            tolerances={"hamiltonian": params.tol}
        )

    def _oracle(self) -> CommandResult:
        params = self.params
        bundle = self.bundle
        dim = bundle.moving_set.dim
        rows = []
        results = []
        for probe in params.probes:
            if len(probe) != dim + 1:
                raise ConfigError(f"Probe {probe} needs t0 and {dim} coordinates")
            result = c_solver.oracle_mintime(
                bundle.moving_set, bundle.field, bundle.target, probe[0], probe[1:],
                n_segments=params.n_segments,
                horizon=params.horizon,
                h=params.h,
                budget=params.budget
            )
            results.append(result)
            rows.append({
                "t": result.t0,
                "x": result.x0,
                "best_time": result.best_time,
                "exact_T": self._exact(result.t0, result.x0),
                "evaluated": result.evaluated,
                "switch_times": " ".join(f"{s:.17g}" for s in result.switch_times),
            })
        self.exporter.write_frame("oracle.csv", records_frame(rows, vector_columns=("x",)))
        summary = {f"T{tuple([r['t']] + r['x'])}": r["best_time"] for r in rows}
        summary["evaluated"] = int(np.sum([r.evaluated for r in results]))
        return CommandResult(summary=summary, constants={"h": params.h})
