import argparse
import asyncio
import itertools
import os
import sys
from abc import ABC, abstractmethod
from functools import partial
from typing import Any, Callable, ClassVar, Optional, Sequence, TypeVar

from path import Path
from pydantic import BaseModel, ValidationError

from config.config import Settings
from config.params_file import dump_params, load_params
from services import reporting
from services.angle_dynamics import (LowerEnvelope, PowerRate, UpperEnvelope, absorbed_upper_constant,
                                     blowup_time_exponential_integral, blowup_time_log_substitution,
                                     blowup_time_lower_bound, integrate_angle)
from services.bounds import (admissible_L, admissible_radius, c_beta_L, d_beta_L, lemma_report,
                             lower_envelope_constant, positivity_certificate, riesz_normalization)
from services.kernel import quad_kernel_annulus
from services.sim import DiagnosticsCollector, run as run_simulation
from services.specfun import a_beta
from services.verification import build_checks
from utils.errors import AccuracyError, ConfigError, DomainError, PreconditionError, SimulationAborted
from utils.logger.logger import LabLogger
from utils.validators import (AngleParams, BlowupTimeParams, BoundContext, BoundsParams, CommandName, CommandSpec,
                              EnvelopeKind, FieldNorms, KernelSpec, OracleParams, QuadControl, SeriesControl,
                              SimConfig, StepControl, VerifyParams)

T = TypeVar('T')

USAGE_ERRORS = (ConfigError, DomainError, PreconditionError, ValidationError)


class CommandTemplate(ABC):
    """
    Shared pipeline of every command: logger, parameters, computation, CSV
    output and the exit status (0 success, 1 failed check).
    """
    params_model: ClassVar[type[BaseModel]]
    output_name: ClassVar[str]

    def __init__(self, spec: CommandSpec, settings: Settings):
        self.spec = spec
        self.settings = settings
        self.logger: Optional[LabLogger] = None
        self.params: Any = None
        self.failures: list[str] = []

    async def run(self) -> int:
        await self.init_logger()
        await self.load_config()
        await self.logger.log_time_exec(self.compute)()
        await self.write_output()
        return await self.end_process()

    async def init_logger(self):
        self.logger = LabLogger()
        await self.logger.alog("INFO", f"Command '{self.spec.command.value}' started.")

    async def load_config(self):
        self.params = self.params_model.model_validate(self.spec.parameters)
        await self.logger.alog("INFO", f"Parameters: {self.params}")

    @abstractmethod
    async def compute(self):
        pass

    @abstractmethod
    async def write_output(self):
        pass

    async def end_process(self) -> int:
        if self.failures:
            await self.logger.alog("ERROR", f"{len(self.failures)} check(s) failed.")
            print(f"{self.spec.command.value}: {len(self.failures)} check(s) failed; first: {self.failures[0]}",
                  file=sys.stderr)
            return 1
        await self.logger.alog("INFO", f"Command '{self.spec.command.value}' finished.")
        return 0

    async def gather_jobs(self, jobs: Sequence[Callable[[], T]]) -> list[T]:
        """Run blocking jobs on worker threads, at most settings.max_workers at a time, keeping job order."""
        semaphore = asyncio.Semaphore(self.settings.max_workers)

        async def bounded(job: Callable[[], T]) -> T:
            async with semaphore:
                return await asyncio.to_thread(job)

        return await asyncio.gather(*(bounded(job) for job in jobs))

    def quad_control(self) -> QuadControl:
        """Quadrature policy from the settings, with any tolerance the command parameters set."""
        overrides = {name: getattr(self.params, name, None) for name in ('abs_tol', 'max_subdivisions')}
        return self.settings.quad_control().model_copy(
            update={name: value for name, value in overrides.items() if value is not None})

    @property
    def output_file(self) -> Path:
        out = Path(self.spec.output_path)
        return out if out.ext == '.csv' else out / self.output_name

    @property
    def output_dir(self) -> Path:
        return self.output_file.parent


class VerifyCommand(CommandTemplate):
    params_model = VerifyParams
    output_name = 'verify.csv'

    async def compute(self):
        self.rows = await self.gather_jobs(build_checks(self.params, self.spec.seed,
                                                        quad=self.quad_control()))
        self.failures = [f"{row.identity} beta={row.beta} L={row.L}" for row in self.rows if not row.passed]

    async def write_output(self):
        await reporting.write_csv(self.output_file, reporting.VERIFY_HEADER, [row.csv_row() for row in self.rows])


def bounds_row(params: BoundsParams, beta: float, sigma: float,
               ctrl: Optional[SeriesControl] = None) -> tuple[list[Any], list[str]]:
    """One row of the bounds grid and the checks it failed."""
    K = params.K if params.K is not None else beta
    threshold = admissible_L(beta, K)
    L = params.L if params.L is not None else max(2.0, 1.5 * threshold)
    if K < beta and L <= threshold:
        raise PreconditionError(f"L = {L:g} must exceed the threshold {threshold:g} for K = {K:g}")

    ctx = BoundContext(beta=beta, sigma=sigma, K_const=K, L=L, N_sigma=params.Nsigma, theta0_inf=params.theta0,
                       C_beta_norm=riesz_normalization(beta, params.normalization))
    r = admissible_radius(ctx, params.radius_rule, ctrl)
    ctx = ctx.model_copy(update={'r': r})
    tau = params.tau if params.tau is not None else min(r, 0.49)
    norms = FieldNorms(sup_norm=params.sup_norm if params.sup_norm is not None else params.theta0,
                       l2_norm=params.l2_norm)
    report = lemma_report(ctx, tau, params.p1_norm, norms, params.L_cut, ctrl=ctrl)

    label = f"beta={beta:g} sigma={sigma:g}"
    failures = []
    if report.i2_bound + report.i3_bound > 0.5 * report.i1:
        failures.append(f"{label}: I2 + I3 = {report.remainder_ratio:.3f} I1 exceeds I1/2")
    c_side, a_side = positivity_certificate(beta, K, L, ctrl)
    if not c_side > a_side > 0.0:
        failures.append(f"{label}: positivity certificate fails ({c_side:.6g}, {a_side:.6g})")
    if report.upper is not None and report.lower > report.upper:
        failures.append(f"{label}: lower bound {report.lower:.6g} above upper bound {report.upper:.6g}")

    row = [beta, sigma, K, threshold, L, a_beta(beta), c_beta_L(beta, L, ctrl), d_beta_L(beta, L, ctrl), r, tau,
           report.lower, report.upper, report.i2_bound, report.i3_bound, report.i4_bound]
    return row, failures


class BoundsCommand(CommandTemplate):
    params_model = BoundsParams
    output_name = 'bounds.csv'

    def grid(self) -> list[tuple[float, float]]:
        points = []
        for beta in self.params.beta:
            sigmas = self.params.sigma if self.params.sigma is not None else [
                fraction * (beta - 1.0) for fraction in self.params.sigma_fraction]
            points.extend((beta, sigma) for sigma in sigmas)
        return sorted(points)

    async def compute(self):
        ctrl = self.settings.series_control()
        jobs = [partial(bounds_row, self.params, beta, sigma, ctrl) for beta, sigma in self.grid()]
        results = await self.gather_jobs(jobs)
        self.rows = [row for row, _ in results]
        self.failures = [failure for _, failures in results for failure in failures]

    async def write_output(self):
        await reporting.write_csv(self.output_file, reporting.BOUNDS_HEADER, self.rows)


class AngleCommand(CommandTemplate):
    params_model = AngleParams
    output_name = 'angle.csv'

    def rate(self):
        p = self.params
        if p.envelope is EnvelopeKind.POWER:
            return PowerRate(beta=p.beta, c=p.C)
        if p.envelope is EnvelopeKind.LOWER:
            if p.beta <= 1.0:
                raise DomainError("the lower envelope needs beta in (1, 2)")
            C_tilde = p.C_tilde
            if C_tilde is None:
                ctx = BoundContext(beta=p.beta, sigma=(p.beta - 1.0) / 2, K_const=p.beta, L=2.0, N_sigma=1.0,
                                   theta0_inf=p.theta0, C_beta_norm=riesz_normalization(p.beta))
                C_tilde = lower_envelope_constant(ctx, p.m_p)
            return LowerEnvelope(beta=p.beta, C_tilde=C_tilde, C3=p.C3)
        C2_tilde = absorbed_upper_constant(p.C2, p.C3, p.beta, p.gamma0) if p.C3 > 0.0 else p.C2
        return UpperEnvelope(beta=p.beta, C2_tilde=C2_tilde)

    async def compute(self):
        p = self.params
        rate = self.rate()
        defaults = self.settings.step_control()
        step = StepControl(rtol=p.rtol or defaults.rtol, atol=p.atol or defaults.atol)
        floor = p.gamma_floor or self.settings.gamma_floor
        self.trajectory = await asyncio.to_thread(integrate_angle, rate, p.gamma0, p.t_max, step, floor)
        await self.logger.alog("INFO", f"Vanish time: {self.trajectory.vanish_time}")

    async def write_output(self):
        path = await reporting.write_csv(self.output_file, reporting.TRAJECTORY_HEADER,
                                         reporting.trajectory_rows(self.trajectory))
        if self.spec.plot:
            reporting.plot_trajectory(self.trajectory, path.parent / 'angle.png', self.settings.plot_dpi)


class BlowupTimeCommand(CommandTemplate):
    """T* lower bounds over a (beta, gamma0, C) sweep; the quadrature is cross-checked by two other routes."""
    params_model = BlowupTimeParams
    output_name = 'blowup_time.csv'
    agreement = 1e-6

    def evaluate(self, beta: float, gamma0: float, C: float) -> tuple[list[float], Optional[str]]:
        quad = self.quad_control()
        value = blowup_time_lower_bound(beta, gamma0, C, quad)
        routes = (blowup_time_exponential_integral(beta, gamma0, C),
                  blowup_time_log_substitution(beta, gamma0, C, quad))
        worst = max(abs(route - value) for route in routes)
        failure = None
        if worst > self.agreement * abs(value):
            failure = f"beta={beta:g} gamma0={gamma0:g} C={C:g}: routes disagree by {worst:.3e}"
        return [beta, gamma0, C, value], failure

    async def compute(self):
        grid = sorted(itertools.product(self.params.beta, self.params.gamma0, self.params.C))
        results = await self.gather_jobs([partial(self.evaluate, *point) for point in grid])
        self.rows = [row for row, _ in results]
        self.failures = [failure for _, failure in results if failure]

    async def write_output(self):
        path = await reporting.write_csv(self.output_file, reporting.BLOWUP_HEADER, self.rows)
        if self.spec.plot:
            reporting.plot_blowup_times(self.rows, path.parent / 'blowup_time.png', self.settings.plot_dpi)


class OracleCommand(CommandTemplate):
    params_model = OracleParams
    output_name = 'oracle.csv'

    def evaluate(self, beta: float) -> tuple[list[float], Optional[str]]:
        p = self.params
        spec = KernelSpec(beta=beta, v=(p.v1, p.v2), r_in=p.r_in, r_out=p.r_out)
        try:
            value, err = quad_kernel_annulus(spec, self.quad_control())
        except AccuracyError as exc:
            return ([beta, p.r_in, p.r_out, p.v1, p.v2, exc.best_estimate, exc.error_estimate],
                    f"beta={beta:g}: {exc}")
        return [beta, p.r_in, p.r_out, p.v1, p.v2, value, err], None

    async def compute(self):
        results = await self.gather_jobs([partial(self.evaluate, beta) for beta in sorted(self.params.beta)])
        self.rows = [row for row, _ in results]
        self.failures = [failure for _, failure in results if failure]

    async def write_output(self):
        await reporting.write_csv(self.output_file, reporting.ORACLE_HEADER, self.rows)


class SimulateCommand(CommandTemplate):
    params_model = SimConfig
    output_name = 'diagnostics.csv'

    async def compute(self):
        self.collector = DiagnosticsCollector()
        snapshot_dir = self.output_dir / 'snapshots' if self.params.snapshot_every else None
        try:
            await asyncio.to_thread(run_simulation, self.params, self.collector, snapshot_dir)
        except SimulationAborted as exc:
            self.failures.append(str(exc))

    async def write_output(self):
        await reporting.write_csv(self.output_file, reporting.DIAG_HEADER,
                                  reporting.diag_rows(self.collector.records))
        if self.spec.plot and self.collector.records:
            reporting.plot_diagnostics(self.collector.records, self.output_dir, self.settings.plot_dpi)


COMMANDS: dict[CommandName, type[CommandTemplate]] = {
    CommandName.VERIFY: VerifyCommand,
    CommandName.BOUNDS: BoundsCommand,
    CommandName.ANGLE: AngleCommand,
    CommandName.BLOWUP_TIME: BlowupTimeCommand,
    CommandName.ORACLE: OracleCommand,
    CommandName.SIMULATE: SimulateCommand,
}


def flag_for(field: str) -> str:
    return '--' + field.replace('_', '-')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='gsqg-lab', description="gSQG hyperbolic-saddle numerical lab")
    commands = parser.add_subparsers(dest='command', required=True)
    for name, command in COMMANDS.items():
        sub = commands.add_parser(name.value, help=(command.__doc__ or '').strip().split('\n')[0] or None)
        for field, info in command.params_model.model_fields.items():
            default = 'required' if info.is_required() else f"default {info.default}"
            sub.add_argument(flag_for(field), dest=field, default=None, metavar='VALUE', help=default)
        sub.add_argument('--config', type=Path, default=None, help="key = value parameter file")
        sub.add_argument('--dump-config', action='store_true', help="print the effective parameters and exit")
        sub.add_argument('--out', type=Path, default=None, help="output directory or .csv file")
        sub.add_argument('--seed', type=int, default=None, help="seed for sampled checks")
        sub.add_argument('--plot', action='store_true', help="also render plot images")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command_name = CommandName(args.command)
    command = COMMANDS[command_name]
    overrides = {field: getattr(args, field) for field in command.params_model.model_fields
                 if getattr(args, field) is not None}

    try:
        settings = Settings()
        params = load_params(command.params_model, args.config, overrides)
        if args.dump_config:
            sys.stdout.write(dump_params(params))
            return 0
        spec = CommandSpec(command=command_name, parameters=dict(params),
                           output_path=args.out or Path(settings.output_dir) / command_name.value,
                           seed=args.seed if args.seed is not None else settings.seed, plot=args.plot)
        return asyncio.run(command(spec, settings).run())
    except USAGE_ERRORS as exc:
        print(f"{command_name.value}: {exc}".splitlines()[0], file=sys.stderr)
        return 2


def run_tests():
    """Run tests using the test runner script"""
    import subprocess

    project_root = Path(__file__).parent
    test_script = project_root / 'run_tests.py'

    result = subprocess.run([sys.executable, str(test_script)], cwd=str(project_root))
    sys.exit(result.returncode)


if __name__ == "__main__":
    if os.getenv("RUN_TESTS") == "1":
        print("Running tests")
        run_tests()
    else:
        sys.exit(main())
