"""Command-line experiment runner.

Subcommands::

    teamfp run      --game f.json | --gen SPEC  --out run.csv [dynamics flags]
    teamfp run-mg   --game mg.json | --gen SPEC --out run.csv [learner flags]
    teamfp validate GAME
    teamfp tng      GAME BELIEFS        # BELIEFS = file or "uniform"
    teamfp gen      SPEC --out game.json
    teamfp sweep    --game f.json | --gen SPEC --out DIR --tau ... --delta ...

Generator SPEC strings are ``family[:key=value[:key=value...]]``, e.g.
``random-zsptg:teams=2x2x2x2+2x2x2x2:seed=7`` (teams separated by '+', agent
action counts by 'x').  Exit codes: 0 success, 1 failed validation, 2 bad
file or configuration, 3 step-size schedule rejected (override with
--unsafe-schedule).  TEAMFP_SEED serves as the seed fallback when --seed is
absent.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .beliefs import BeliefProfile, StepSchedule, check_schedule
from .dynamics import VARIANTS, DynamicsConfig
from .experiments import (ExperimentConfig, run_mg_trials, run_trials,
                          write_experiment)
from .game import MultiTeamGame, validate_potential, validate_zero_sum
from .gamefile import (GameFileError, load_beliefs, load_document, load_game,
                       load_mg, load_stationary, save_game, save_mg)
from .gamegen import GenSpec, phi_bar
from .markov import MarkovConfig, MarkovTeamGame
from .metrics import lyapunov, tng

EXIT_INVALID = 1
EXIT_BAD_INPUT = 2
EXIT_BAD_SCHEDULE = 3


class CliError(Exception):
    def __init__(self, msg: str, code: int = EXIT_BAD_INPUT):
        super().__init__(msg)
        self.code = code


def parse_teams(text: str):
    try:
        teams = [[int(n) for n in part.split("x")] for part in text.split("+")]
    except ValueError:
        raise CliError(f"bad team structure {text!r} (want e.g. 2x2+2x2x2)") from None
    if not teams or any(not t or any(n < 1 for n in t) for t in teams):
        raise CliError(f"bad team structure {text!r}")
    return tuple(tuple(t) for t in teams)


def parse_genspec(text: str) -> GenSpec:
    parts = text.split(":")
    family = parts[0]
    if family not in GenSpec.FAMILIES:
        raise CliError(f"unknown game family {family!r} (choices: {', '.join(GenSpec.FAMILIES)})")
    kwargs = {}
    casts = {
        "seed": int, "gates": int, "intruders": int, "cost": float,
        "edges_per_pair": int, "num_states": int, "horizon": int,
        "dummy_payoffs": lambda v: v.lower() in ("1", "true", "yes"),
        "teams": parse_teams,
        "range": lambda v: tuple(float(x) for x in v.split("..")),
    }
    names = {"teams": "team_actions", "range": "entry_range"}
    for part in parts[1:]:
        if "=" not in part:
            raise CliError(f"bad generator parameter {part!r} (want key=value)")
        key, value = part.split("=", 1)
        if key not in casts:
            raise CliError(f"unknown generator parameter {key!r}")
        try:
            kwargs[names.get(key, key)] = casts[key](value)
        except (ValueError, TypeError):
            raise CliError(f"bad value for generator parameter {key!r}: {value!r}") from None
    try:
        return GenSpec(family=family, **kwargs)
    except (TypeError, ValueError) as e:
        raise CliError(f"bad generator spec: {e}") from None


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TEAMFP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"TEAMFP_SEED={env!r} is not an integer") from None
    return 0


def _load_source(args, want: str):
    """Game or MG from --game / --gen, with kind checking."""
    if (args.game is None) == (args.gen is None):
        raise CliError("exactly one of --game and --gen is required")
    if args.game is not None:
        obj = load_document(args.game)
    else:
        obj = parse_genspec(args.gen).build()
    if want == "game" and not isinstance(obj, MultiTeamGame):
        raise CliError("this subcommand needs a repeated game, got a Markov game")
    if want == "mg" and not isinstance(obj, MarkovTeamGame):
        raise CliError("this subcommand needs a Markov game, got a repeated game")
    return obj


def _schedule_from_args(args) -> StepSchedule:
    return StepSchedule.harmonic(offset=args.alpha_offset, power=args.alpha_power)


def _check_schedule_or_die(schedule: StepSchedule, unsafe: bool) -> None:
    report = check_schedule(schedule)
    if not report.ok:
        msg = "step-size schedule rejected: " + "; ".join(report.issues)
        if not unsafe:
            raise CliError(msg + " (use --unsafe-schedule to run anyway)", EXIT_BAD_SCHEDULE)
        print(f"warning: {msg}", file=sys.stderr)


def _dynamics_config(args, seed: int) -> DynamicsConfig:
    try:
        return DynamicsConfig(
            variant=args.variant, tau=args.tau, delta=args.delta, eta=args.eta,
            schedule=_schedule_from_args(args), seed=seed,
            iterations=args.iterations, stride=args.stride)
    except ValueError as e:
        raise CliError(f"invalid configuration: {e}") from None


def cmd_run(args) -> int:
    game = _load_source(args, "game")
    seed = _resolve_seed(args)
    config = _dynamics_config(args, seed)
    _check_schedule_or_die(config.schedule, args.unsafe_schedule)
    mode, stationary = "self-play", None
    if args.opponent_stationary:
        mode = "vs-stationary"
        stationary = load_stationary(args.opponent_stationary, game.structure)
    try:
        exp = ExperimentConfig(dynamics=config, trials=args.trials, mode=mode,
                               stationary=stationary, jobs=args.jobs)
    except ValueError as e:
        raise CliError(f"invalid configuration: {e}") from None
    records = run_trials(game, exp)
    agg = write_experiment(records, args.out, game.num_teams)
    print(f"wrote {args.out} and {agg} ({args.trials} trials, {args.iterations} iterations)")
    return 0


def cmd_run_mg(args) -> int:
    mg = _load_source(args, "mg")
    seed = _resolve_seed(args)
    try:
        config = MarkovConfig(
            variant=args.variant, algorithm=args.algorithm, tau=args.tau,
            delta=args.delta, schedule=_schedule_from_args(args), seed=seed,
            episodes=args.iterations, stride=args.stride, q_init=args.q_init)
    except ValueError as e:
        raise CliError(f"invalid configuration: {e}") from None
    if config.variant not in ("team-fp", "independent-team-fp"):
        raise CliError(f"variant {config.variant!r} has no Markov-game form")
    _check_schedule_or_die(config.schedule, args.unsafe_schedule)
    records = run_mg_trials(mg, config, trials=args.trials, jobs=args.jobs)
    agg = write_experiment(records, args.out, mg.num_teams, markov=True)
    print(f"wrote {args.out} and {agg} ({args.trials} trials, {args.iterations} episodes)")
    return 0


def cmd_validate(args) -> int:
    obj = load_document(args.input)
    games = obj.stage_games if isinstance(obj, MarkovTeamGame) else [obj]
    ok = True
    for idx, game in enumerate(games):
        label = f"state {idx}: " if len(games) > 1 else ""
        pot = validate_potential(game)
        print(f"{label}potential property: {'ok' if pot.ok else 'FAILED'}")
        for v in pot.violations[:5]:
            print(f"  violation: {v}")
        ok &= pot.ok
        if game.zero_sum:
            zs = validate_zero_sum(game)
            print(f"{label}zero-sum property: {'ok' if zs.ok else 'FAILED'}")
            for v in zs.violations[:5]:
                print(f"  violation: {v}")
            ok &= zs.ok
        else:
            print(f"{label}zero-sum property: skipped (game not flagged zero-sum)")
    return 0 if ok else EXIT_INVALID


def cmd_tng(args) -> int:
    game = load_document(args.game)
    if not isinstance(game, MultiTeamGame):
        raise CliError("tng works on repeated games; use run-mg metrics for Markov games")
    if args.beliefs == "uniform":
        profile = BeliefProfile.uniform(game.structure)
    else:
        profile = load_beliefs(args.beliefs, game.structure)
    per_team, total = tng(game, profile.vectors)
    for m, g in enumerate(per_team):
        print(f"tng_team_{m} = {float(g)!r}")
    print(f"tng_total = {total!r}")
    print(f"lyapunov(tau={args.tau}) = {lyapunov(game, profile.vectors, args.tau)!r}")
    return 0


def cmd_gen(args) -> int:
    spec = parse_genspec(args.spec)
    obj = spec.build()
    if isinstance(obj, MarkovTeamGame):
        save_mg(obj, args.out)
        bar = max(phi_bar(g) for g in obj.stage_games)
    else:
        save_game(obj, args.out)
        bar = phi_bar(obj)
    print(f"wrote {args.out} (family={spec.family}, seed={spec.seed}, phi_bar={bar!r})")
    return 0


def _parse_floats(text: str, what: str):
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise CliError(f"bad {what} list {text!r}") from None


def cmd_sweep(args) -> int:
    game = _load_source(args, "game")
    seed = _resolve_seed(args)
    taus = _parse_floats(args.tau, "tau") if args.tau else [0.1]
    deltas = _parse_floats(args.delta, "delta") if args.delta else [0.5]
    variants = [v for v in args.variant.split(",") if v] if args.variant else ["team-fp"]
    for v in variants:
        if v not in VARIANTS:
            raise CliError(f"unknown variant {v!r}")
    schedule = _schedule_from_args(args)
    _check_schedule_or_die(schedule, args.unsafe_schedule)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for variant in variants:
        for tau in taus:
            for delta in (deltas if variant == "independent-team-fp" else [deltas[0]]):
                try:
                    config = DynamicsConfig(
                        variant=variant, tau=tau, delta=delta, eta=args.eta,
                        schedule=schedule, seed=seed,
                        iterations=args.iterations, stride=args.stride)
                    exp = ExperimentConfig(dynamics=config, trials=args.trials, jobs=args.jobs)
                except ValueError as e:
                    raise CliError(f"invalid configuration: {e}") from None
                name = f"{variant}_tau{tau:g}"
                if variant == "independent-team-fp":
                    name += f"_delta{delta:g}"
                out = outdir / f"{name}.csv"
                records = run_trials(game, exp)
                write_experiment(records, out, game.num_teams)
                print(f"wrote {out}")
    return 0


def _add_source_flags(p):
    p.add_argument("--game", help="game document to load")
    p.add_argument("--gen", help="generator spec (family[:key=value...])")


def _add_dynamics_flags(p, iterations_default):
    p.add_argument("--tau", type=float, default=0.1, help="smoothing temperature")
    p.add_argument("--delta", type=float, default=0.5,
                   help="per-agent update probability (independent variant)")
    p.add_argument("--eta", type=float, default=0.05, help="mwu learning rate")
    p.add_argument("--iterations", type=int, default=iterations_default)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--stride", type=int, default=100, help="metric sampling stride")
    p.add_argument("--seed", type=int, default=None,
                   help="base seed (default: TEAMFP_SEED env var, else 0)")
    p.add_argument("--jobs", type=int, default=1, help="concurrent trial workers")
    p.add_argument("--alpha-power", type=float, default=1.0,
                   help="step size 1/(k+1+offset)^power")
    p.add_argument("--alpha-offset", type=int, default=0)
    p.add_argument("--unsafe-schedule", action="store_true",
                   help="run even if the schedule fails its checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teamfp", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run repeated-game learning dynamics")
    _add_source_flags(p)
    _add_dynamics_flags(p, 100_000)
    p.add_argument("--variant", default="team-fp", choices=VARIANTS)
    p.add_argument("--opponent-stationary", metavar="FILE",
                   help="hold listed teams to fixed strategies from FILE")
    p.add_argument("--out", required=True, help="long-format CSV output path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("run-mg", help="run Markov-game learners")
    _add_source_flags(p)
    _add_dynamics_flags(p, 10_000)
    p.add_argument("--variant", default="team-fp",
                   choices=("team-fp", "independent-team-fp"))
    p.add_argument("--algorithm", default="model-based",
                   choices=("model-based", "model-free"))
    p.add_argument("--q-init", default="zeros", choices=("zeros", "rewards"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run_mg)

    p = sub.add_parser("validate", help="check the potential and zero-sum properties")
    p.add_argument("input", help="game or Markov-game document")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tng", help="evaluate the team-Nash gap at a belief profile")
    p.add_argument("game")
    p.add_argument("beliefs", help="belief document, or 'uniform'")
    p.add_argument("--tau", type=float, default=0.1)
    p.set_defaults(func=cmd_tng)

    p = sub.add_parser("gen", help="generate a game and write it to disk")
    p.add_argument("spec", help="family[:key=value...]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="cartesian sweep over tau/delta/variant")
    _add_source_flags(p)
    _add_dynamics_flags(p, 100_000)
    p.add_argument("--variant", default="team-fp",
                   help="comma-separated variant list")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    # sweep reuses --tau/--delta as comma-separated lists
    for action in p._actions:
        if action.dest == "tau":
            action.type = str
            action.default = "0.1"
            action.help = "comma-separated temperature list"
        if action.dest == "delta":
            action.type = str
            action.default = "0.5"
            action.help = "comma-separated update-probability list"
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except GameFileError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
