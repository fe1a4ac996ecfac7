"""
Command-line surface: one subcommand per experiment. Data (CSV or JSON)
goes to stdout or --out; logs and error reports go to stderr.
"""
import asyncio
import logging
import math
import os
import sys
from pathlib import Path
from typing import Callable, List, Optional

import typer

from schemas.input import AnalyticInput, CircuitCheckInput, SimulateInput, SweepInput, UnknownMInput
from schemas.output import (
    AnalyticReport,
    CircuitCheckReport,
    GroverInfo,
    RunRow,
    SimulateReport,
    TraceStepOut,
    TripleOut,
    UnknownMSummary,
)

from src.services.analytic import (
    SearchShape,
    failure_prob,
    iteration_bound,
    ratio_grid,
    required_iterations,
    success_prob,
)
from src.services.circuit import CIRCUIT_TOL, build_partial_diffusion_circuit, check_partial_diffusion
from src.services.error_handlers import handle_command_error
from src.services.errors import DomainError, InvariantError
from src.services.grover import GROVER_BOUND_COEFF, GroverShape, grover_iterations, grover_success
from src.services.statevector import extract_amplitude_triple, run_search, success_probability, trace_search
from src.services.sweeps import (
    COMPARE_HEADER,
    PROPOSED_HEADER,
    SweepMode,
    expected_cost_rows,
    sweep_rows_async,
    sweep_summary,
)
from src.services.unknown_m import (
    DEFAULT_LAMBDA,
    expected_cost_grover,
    expected_cost_proposed,
    run_unknown_m_batch_async,
    summarize_runs,
)
from utils.formatting import emit, render_json, render_models_csv

logger = logging.getLogger(__name__)

RUN_HEADER = ("run", "seed", "rounds", "total_iterations", "oracle_calls", "found")
THREADS_ENV = "PDSEARCH_THREADS"
DEFAULT_THREADS = min(8, os.cpu_count() or 1)

app = typer.Typer(
    name="pdsearch",
    help="Partial-diffusion quantum search: simulator, closed forms and experiments.",
    no_args_is_help=True,
    add_completion=False,
)

OutOption = typer.Option(None, "--out", help="Write the data here instead of stdout.")
ThreadsOption = typer.Option(
    DEFAULT_THREADS, "--threads", envvar=THREADS_ENV, min=1, help="Worker threads for grids and batches."
)


def _execute(command: str, body: Callable[[], None]) -> None:
    """Runs a command body, turning any failure into a JSON report on stderr and an exit code."""
    try:
        body()
    except Exception as e:
        code, report = handle_command_error(command, e)
        typer.echo(render_json(report), err=True, nl=False)
        raise typer.Exit(code)


@app.callback()
def configure(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level.")) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


@app.command()
def simulate(
    n: int = typer.Option(..., "--n", help="Index-register qubits; N = 2^n."),
    marked: str = typer.Option(..., "--marked", help='Item list "1,3,5-7", "random:K", "all" or "none".'),
    q: str = typer.Option("auto", "--q", help='Iterations, or "auto" for the required count.'),
    seed: int = typer.Option(0, "--seed", help="Seed for random:K placement."),
    trace: bool = typer.Option(False, "--trace", help="Include the per-step amplitude trace."),
    out: Optional[Path] = OutOption,
) -> None:
    """Run the search on the statevector simulator and compare with the closed form."""

    def body() -> None:
        inp = SimulateInput(n=n, marked=marked, q=q, seed=seed, trace=trace)
        marked_set = inp.marked_set()
        shape = SearchShape.of(marked_set.N, marked_set.M) if marked_set.M else None
        iterations = inp.q
        if iterations is None:
            if shape is None:
                raise DomainError('--q auto needs at least one marked item')
            iterations = required_iterations(shape).q

        logger.info("simulate n=%d M=%d q=%d", inp.n, marked_set.M, iterations)
        state = run_search(inp.n, marked_set, iterations)
        triple = extract_amplitude_triple(state, marked_set)
        steps = None
        if inp.trace:
            steps = [
                TraceStepOut(
                    iteration=s.iteration,
                    step=s.step,
                    a=s.triple.a,
                    b=s.triple.b,
                    c=s.triple.c,
                    p_success=s.p_success,
                )
                for s in trace_search(inp.n, marked_set, iterations)
            ]
        report = SimulateReport(
            n=inp.n,
            N=marked_set.N,
            M=marked_set.M,
            q=iterations,
            p_success_sim=success_probability(state, marked_set),
            p_success_analytic=success_prob(iterations, shape) if shape else None,
            triple=TripleOut(a=triple.a, b=triple.b, c=triple.c),
            trace=steps,
        )
        emit(render_json(report, exclude=None if inp.trace else {"trace"}), out, sys.stdout)

    _execute("simulate", body)


@app.command()
def sweep(
    step: float = typer.Option(1e-4, "--step", help="Grid step in M/N."),
    start: Optional[float] = typer.Option(None, "--start", help="First ratio (default: one step)."),
    stop: float = typer.Option(1.0, "--stop", help="Last ratio, inclusive."),
    mode: SweepMode = typer.Option(SweepMode.compare, "--mode", help="proposed, or compare with Grover."),
    out: Optional[Path] = OutOption,
    summary: Optional[Path] = typer.Option(None, "--summary", help="Write minima and argmins as JSON here."),
    threads: int = ThreadsOption,
) -> None:
    """Success probability at the required iteration count over a grid of M/N."""

    def body() -> None:
        inp = SweepInput(start=step if start is None else start, stop=stop, step=step, mode=mode)
        ratios = inp.ratios()
        logger.info("sweep %d ratios in [%r, %r], mode=%s", ratios.size, inp.start, inp.stop, inp.mode.value)
        rows = asyncio.run(sweep_rows_async(ratios, inp.mode, workers=threads))
        header = PROPOSED_HEADER if inp.mode is SweepMode.proposed else COMPARE_HEADER
        emit(render_models_csv(rows, header), out, sys.stdout)
        if summary is not None:
            emit(render_json(sweep_summary(rows)), summary, sys.stderr)

    _execute("sweep", body)


@app.command("unknown-m")
def unknown_m(
    n: int = typer.Option(..., "--n", help="Index-register qubits; N = 2^n."),
    m: int = typer.Option(..., "--m", help="Number of marked items, placed at random."),
    runs: int = typer.Option(1000, "--runs", help="Independent seeded runs."),
    seed: int = typer.Option(0, "--seed", help="Master seed; run k uses its k-th derived seed."),
    lam: float = typer.Option(DEFAULT_LAMBDA, "--lambda", help="Growth factor for m, in (1, 4/3]."),
    max_rounds: Optional[int] = typer.Option(None, "--max-rounds", help="Per-run round cap."),
    curve_step: float = typer.Option(0.01, "--curve-step", help="Ratio step of the expected-cost curves."),
    out: Optional[Path] = OutOption,
    summary: Optional[Path] = typer.Option(None, "--summary", help="Write the summary JSON here (default: stderr)."),
    threads: int = ThreadsOption,
) -> None:
    """Monte Carlo of the randomized driver for an unknown number of matches."""

    def body() -> None:
        inp = UnknownMInput(
            n=n, m=m, runs=runs, seed=seed, lam=lam, max_rounds=max_rounds, curve_step=curve_step
        )
        config = inp.driver_config()
        marked_set = inp.marked_set()
        logger.info("unknown-m n=%d M=%d runs=%d seed=%d", inp.n, inp.m, inp.runs, inp.seed)
        records = asyncio.run(run_unknown_m_batch_async(inp.n, marked_set, inp.runs, config, workers=threads))

        rows: List[RunRow] = [
            RunRow(
                run=k,
                seed=r.seed,
                rounds=r.rounds,
                total_iterations=r.total_iterations,
                oracle_calls=r.oracle_calls,
                found=r.found_index,
            )
            for k, r in enumerate(records)
        ]
        emit(render_models_csv(rows, RUN_HEADER), out, sys.stdout)

        shape = SearchShape.of(marked_set.N, marked_set.M)
        cost = expected_cost_proposed(shape, config.lam)
        grover = expected_cost_grover(shape)
        empirical = summarize_runs(records)
        report = UnknownMSummary(
            n=inp.n,
            N=marked_set.N,
            M=marked_set.M,
            seed=inp.seed,
            lam=config.lam,
            empirical=empirical,
            m_q=cost.m_q,
            proposed_coefficient=cost.total_coefficient,
            predicted_proposed=cost.total,
            empirical_to_predicted=empirical.mean_total_iterations / cost.total,
            m_g=grover.m_g,
            predicted_grover=grover.as_value(),
            curves=expected_cost_rows(ratio_grid(inp.curve_step), config.lam),
        )
        emit(render_json(report), summary, sys.stderr)

    _execute("unknown-m", body)


@app.command("circuit-check")
def circuit_check(
    n: int = typer.Option(..., "--n", help="Index-register qubits, at most 8."),
    emit_gates: Optional[Path] = typer.Option(None, "--emit-gates", help="Write the gate list JSON here."),
    out: Optional[Path] = OutOption,
) -> None:
    """Check the gate-level partial diffusion against the operator and the simulator."""

    def body() -> None:
        inp = CircuitCheckInput(n=n, emit_gates=emit_gates)
        check = check_partial_diffusion(inp.n)
        report = CircuitCheckReport(
            n=check.n,
            width=check.n + 1,
            gate_count=check.gate_count,
            deviation_operator=check.deviation_operator,
            deviation_simulator=check.deviation_simulator,
            max_deviation=check.max_deviation,
            tolerance=CIRCUIT_TOL,
            status="PASS" if check.passed else "FAIL",
        )
        if inp.emit_gates is not None:
            emit(render_json(build_partial_diffusion_circuit(inp.n)), inp.emit_gates, sys.stdout)
        emit(render_json(report), out, sys.stdout)
        if not check.passed:
            raise InvariantError(
                f"partial diffusion circuit deviates by {check.max_deviation!r} at n={check.n}"
            )

    _execute("circuit-check", body)


@app.command()
def analytic(
    n: Optional[int] = typer.Option(None, "--n", help="Index-register qubits; N = 2^n."),
    m: Optional[int] = typer.Option(None, "--m", help="Number of marked items."),
    ratio: Optional[float] = typer.Option(None, "--ratio", help="Bare M/N instead of --n/--m."),
    lam: float = typer.Option(DEFAULT_LAMBDA, "--lambda", help="Growth factor for the expected cost."),
    out: Optional[Path] = OutOption,
) -> None:
    """Closed-form quantities for one problem shape."""

    def body() -> None:
        inp = AnalyticInput(n=n, m=m, ratio=ratio, lam=lam)
        if inp.ratio is not None:
            shape = SearchShape.from_ratio(inp.ratio)
            g_shape = GroverShape.from_ratio(inp.ratio)
        else:
            shape = SearchShape.of(2**inp.n, inp.m)
            g_shape = GroverShape.of(2**inp.n, inp.m)
        plan = required_iterations(shape)
        q_g = grover_iterations(g_shape)
        report = AnalyticReport(
            N=shape.N,
            M=shape.M,
            ratio=shape.ratio,
            s=shape.s if shape.N is not None else None,
            y=shape.y,
            theta=shape.theta,
            q=plan.q,
            q_exact=plan.q_exact,
            q_bar=plan.q_bar,
            iteration_bound=iteration_bound(shape.ratio),
            p_success=plan.p_success,
            p_failure=failure_prob(plan.q, shape),
            p_lower_bound=plan.p_lower_bound,
            grover=GroverInfo(
                theta_g=g_shape.theta_g,
                q_g=q_g,
                p_success=grover_success(q_g, g_shape),
                iteration_bound=GROVER_BOUND_COEFF * math.sqrt(1.0 / shape.ratio),
            ),
            cost_proposed=expected_cost_proposed(shape, inp.lam).total,
            cost_grover=expected_cost_grover(shape).as_value(),
        )
        emit(render_json(report), out, sys.stdout)

    _execute("analytic", body)


def main() -> None:
    """
    Entry point for the pdsearch command.
    """
    app()


if __name__ == "__main__":
    main()
