import argparse
import logging
import math
import os
import sys
import typing as tp
from dataclasses import dataclass, field

import pandas as pd

from backends import get_experiment_backend
from backends.experiments.joint_backend import JointStrategy
from core.errors import ProtocolError
from core.harness import compare_branches, resource_summary, run_experiment
from protocols.rsm import trine_povm
from protocols.rsp import EnsembleKind, validate_ensemble
from protocols.singlet import run_identity_checks
from utils.dataclasses import DEFAULT_SHOTS, DEFAULT_SIGMA, ExperimentSpec, ProtocolName
from utils.parsing import (
    equatorial_state, joint_operator_from_flags, parse_complex, parse_direction, parse_povm,
    state_from_amplitudes, state_from_angles,
)
from utils.report_writer import (
    FORMATS, format_comparison, render_report, render_table, save_report,
)

logger = logging.getLogger(__name__)

SEED_ENV = "RSP_TOOLKIT_SEED"
STATE_SUBCOMMANDS = ("rsp", "rsm", "joint", "teleport", "nogo")


class ConfigError(ValueError):
    """Inconsistent or out-of-range flags; `flag` names the offending one."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class CliConfig:
    subcommand: str
    kind: str = EnsembleKind.ARBITRARY.value
    alpha: tp.Optional[float] = None
    beta: tp.Optional[str] = None
    theta: tp.Optional[float] = None
    phi: tp.Optional[float] = None
    mode: str = "projective"
    b: tp.Optional[str] = None
    povm: tp.Optional[str] = None
    compare: bool = False
    m: tp.Optional[str] = None
    pi: tp.Optional[tp.List[float]] = None
    r: tp.Optional[str] = None
    s: tp.Optional[str] = None
    t: tp.Optional[tp.List[float]] = None
    preset: tp.Optional[str] = None
    strategy: str = JointStrategy.NONE.value
    trials: int = 100
    shots: int = DEFAULT_SHOTS
    seed: tp.Optional[int] = None
    sigma: float = DEFAULT_SIGMA
    format: str = "text"
    output: tp.Optional[str] = None
    transcript: bool = False
    jobs: int = 0
    verbose: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        known = set(cls.__dataclass_fields__)
        return cls(**{key: value for key, value in vars(args).items() if key in known})


@dataclass
class ResolvedConfig:
    config: CliConfig
    seed: int
    specs: tp.List[ExperimentSpec] = field(default_factory=list)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--shots", type=int, default=DEFAULT_SHOTS, help=f"實驗次數，預設 {DEFAULT_SHOTS}")
    parser.add_argument("--seed", type=int, default=None,
                        help=f"亂數種子；未指定時讀取環境變數 {SEED_ENV}，再預設為 0")
    parser.add_argument("--sigma", type=float, default=DEFAULT_SIGMA,
                        help="統計檢定容許的標準差倍數，預設 4")
    parser.add_argument("--format", choices=FORMATS, default="text", help="輸出格式")
    parser.add_argument("--output", default=None, help="輸出檔案路徑，預設寫到 stdout")
    parser.add_argument("--transcript", action="store_true", help="輸出第一次實驗的協定紀錄")
    parser.add_argument("--jobs", type=int, default=0, help="平行處理的 process 數量，0 表示不平行")
    parser.add_argument("-v", "--verbose", action="store_true", help="在 stderr 顯示 log 與進度條")


def _add_state(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("目標狀態（角度單位為弧度）")
    group.add_argument("--alpha", type=float, default=None, help="|H> 的振幅（實數）")
    group.add_argument("--beta", default=None, help="|V> 的振幅，Python complex 語法，例如 0.6+0.8j")
    group.add_argument("--theta", type=float, default=None, help="Poincare 球面上的極角 theta")
    group.add_argument("--phi", type=float, default=None,
                       help="方位角 phi；單獨使用時代表赤道上的狀態 (|H> + e^{i phi}|V>)/sqrt(2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="app.py", description="Remote state preparation / measurement toolkit",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    rsp = subparsers.add_parser("rsp", help="一個 ebit 加一個 cbit 的遠端狀態製備")
    rsp.add_argument("--kind", choices=[kind.value for kind in EnsembleKind],
                     default=EnsembleKind.ARBITRARY.value, help="目標狀態所屬的集合")
    _add_state(rsp)

    rsm = subparsers.add_parser("rsm", help="遠端狀態量測（翻轉量測裝置）")
    rsm.add_argument("--mode", choices=["projective", "povm"], default="projective", help="量測種類")
    rsm.add_argument("--b", default=None, help="投影量測方向 x,y,z（單位向量）")
    rsm.add_argument("--povm", default=None, help="trine，或以分號分隔的 f_mu 向量 x,y,z;x,y,z;...")
    rsm.add_argument("--compare", action="store_true", help="分別執行 Alice 的兩個結果並比較分佈")
    _add_state(rsm)

    joint = subparsers.add_parser("joint", help="對 (製備的光子, Bob 自己的光子) 的聯合量測")
    joint.add_argument("--m", default=None, help="Bob 自己光子的 Bloch 向量 x,y,z")
    joint.add_argument("--pi", type=float, nargs=15, default=None, help="Pi 的 15 個係數：r (3), s (3), t (9)")
    joint.add_argument("--r", default=None, help="Pi 的 r 向量 x,y,z")
    joint.add_argument("--s", default=None, help="Pi 的 s 向量 x,y,z")
    joint.add_argument("--t", type=float, nargs=9, default=None, help="Pi 的 t 矩陣（row-major 9 個數）")
    joint.add_argument("--preset", choices=["singlet"], default=None, help="預設的 Pi")
    joint.add_argument("--strategy", choices=[item.value for item in JointStrategy],
                       default=JointStrategy.NONE.value, help="Bob 持有互補狀態時的做法")
    _add_state(joint)

    teleport = subparsers.add_parser("teleport", help="量子隱形傳態（比較基準）")
    _add_state(teleport)

    nogo = subparsers.add_parser("nogo", help="一般狀態無法以一個 cbit 精確製備")
    _add_state(nogo)

    identities = subparsers.add_parser("identities", help="檢查 singlet 恆等式與 Choi 矩陣")
    identities.add_argument("--trials", type=int, default=100, help="隨機 SU(2) 的數量")

    subparsers.add_parser("report", help="各協定的資源比較表")

    for subparser in subparsers.choices.values():
        _add_common(subparser)
    return parser


def _resolve_seed(seed: tp.Optional[int]) -> int:
    if seed is not None:
        if seed < 0:
            raise ConfigError("--seed", f"must be non-negative, got {seed}")
        return seed
    env_value = os.environ.get(SEED_ENV)
    if env_value is None:
        return 0
    try:
        value = int(env_value)
    except ValueError:
        raise ConfigError(SEED_ENV, f"must be an integer, got {env_value!r}") from None
    if value < 0:
        raise ConfigError(SEED_ENV, f"must be non-negative, got {value}")
    return value


def _check_finite(flag: str, values):
    if values is None:
        return
    values = values if isinstance(values, (list, tuple)) else [values]
    for value in values:
        if not math.isfinite(value):
            raise ConfigError(flag, f"must be finite, got {value}")


def _guard(flag: str, func, *args, **kwargs):
    """Run a parsing step, turning domain errors into a ConfigError for `flag`."""
    try:
        return func(*args, **kwargs)
    except (ProtocolError, ValueError) as err:
        raise ConfigError(flag, str(err)) from err


def _resolve_state(config: CliConfig):
    has_amplitudes = config.alpha is not None or config.beta is not None
    has_theta = config.theta is not None
    has_phi = config.phi is not None
    is_rsp = config.subcommand == "rsp"
    kind = EnsembleKind(config.kind)

    if has_amplitudes and (has_theta or has_phi):
        flag = "--theta" if has_theta else "--phi"
        raise ConfigError(flag, "cannot be combined with --alpha/--beta")
    if is_rsp and kind is EnsembleKind.EQUATORIAL:
        for flag, given in (("--alpha", config.alpha), ("--beta", config.beta), ("--theta", config.theta)):
            if given is not None:
                raise ConfigError(flag, "--kind equatorial takes the state as --phi only")
        if not has_phi:
            raise ConfigError("--phi", "--kind equatorial requires --phi")
    if is_rsp and kind is not EnsembleKind.EQUATORIAL and has_phi and not has_theta:
        raise ConfigError("--phi", "--phi alone describes an equatorial state; use --kind equatorial")
    if is_rsp and kind is EnsembleKind.POLAR and has_phi:
        raise ConfigError("--phi", "--kind polar states have phi = 0; give --theta or --alpha/--beta")

    if has_amplitudes:
        beta = _guard("--beta", parse_complex, config.beta) if config.beta is not None else None
        flag = "--alpha" if config.alpha is not None else "--beta"
        target = _guard(flag, state_from_amplitudes, config.alpha, beta)
    elif has_theta:
        target = _guard("--theta", state_from_angles, config.theta, config.phi or 0.0)
    elif has_phi:
        target = _guard("--phi", equatorial_state, config.phi)
    else:
        raise ConfigError("--theta", "a target state is required (--alpha/--beta, --theta/--phi or --phi)")

    if is_rsp:
        flag = {EnsembleKind.POLAR: "--beta" if has_amplitudes else "--theta",
                EnsembleKind.EQUATORIAL: "--phi"}.get(kind, "--kind")
        target = _guard(flag, validate_ensemble, target, kind)
    return target


def _experiment_parameters(config: CliConfig, target) -> tp.Tuple[ProtocolName, tp.Dict[str, tp.Any]]:
    command = config.subcommand
    if command == "rsp":
        return ProtocolName.RSP, {"target": target, "kind": EnsembleKind(config.kind)}
    if command == "teleport":
        return ProtocolName.TELEPORT, {"target": target}
    if command == "nogo":
        return ProtocolName.NOGO, {"target": target}
    if command == "rsm":
        if config.mode == "projective":
            if config.povm is not None:
                raise ConfigError("--povm", "only valid with --mode povm")
            if config.b is None:
                raise ConfigError("--b", "--mode projective requires --b")
            return ProtocolName.RSM_PROJECTIVE, {"target": target, "b": _guard("--b", parse_direction, config.b)}
        if config.b is not None:
            raise ConfigError("--b", "only valid with --mode projective")
        if config.povm is None:
            raise ConfigError("--povm", "--mode povm requires --povm")
        return ProtocolName.RSM_POVM, {"target": target, "povm": _guard("--povm", parse_povm, config.povm)}
    # joint
    if config.m is None:
        raise ConfigError("--m", "joint requires Bob's photon direction --m")
    pi = _guard("--pi", joint_operator_from_flags, pi=config.pi, r=config.r, s=config.s,
                t=config.t, preset=config.preset)
    return ProtocolName.JOINT, {
        "target": target,
        "pi": pi,
        "m": _guard("--m", parse_direction, config.m),
        "strategy": JointStrategy(config.strategy),
    }


def _report_specs(config: CliConfig, seed: int) -> tp.List[ExperimentSpec]:
    """Fixed experiments behind the `report` subcommand."""
    target = equatorial_state(math.pi / 2)
    common = dict(shots=config.shots, seed=seed, tolerance_sigma=config.sigma, jobs=config.jobs)
    return [
        ExperimentSpec(ProtocolName.RSP, {"target": target, "kind": EnsembleKind.EQUATORIAL}, **common),
        ExperimentSpec(ProtocolName.TELEPORT, {"target": target}, **common),
        ExperimentSpec(ProtocolName.RSM_PROJECTIVE,
                       {"target": target, "b": parse_direction("0,0,1")}, **common),
        ExperimentSpec(ProtocolName.RSM_POVM, {"target": target, "povm": trine_povm()}, **common),
    ]


def validate_config(config: CliConfig) -> ResolvedConfig:
    """Check the flags for consistency and build the experiments they describe."""
    if config.shots < 1:
        raise ConfigError("--shots", f"must be >= 1, got {config.shots}")
    _check_finite("--sigma", config.sigma)
    if not config.sigma > 0:
        raise ConfigError("--sigma", f"must be > 0, got {config.sigma}")
    if config.jobs < 0:
        raise ConfigError("--jobs", f"must be >= 0, got {config.jobs}")
    if config.trials < 1:
        raise ConfigError("--trials", f"must be >= 1, got {config.trials}")
    for flag, values in (("--alpha", config.alpha), ("--theta", config.theta), ("--phi", config.phi),
                         ("--pi", config.pi), ("--t", config.t)):
        _check_finite(flag, values)
    if config.compare and config.subcommand != "rsm":
        raise ConfigError("--compare", "only valid with rsm")
    seed = _resolve_seed(config.seed)
    resolved = ResolvedConfig(config, seed)

    if config.subcommand == "report":
        resolved.specs = _report_specs(config, seed)
    elif config.subcommand in STATE_SUBCOMMANDS:
        target = _resolve_state(config)
        protocol, parameters = _experiment_parameters(config, target)
        flag = {
            "joint": "--strategy",
            "rsp": "--kind",
            "rsm": "--b" if config.mode == "projective" else "--povm",
        }.get(config.subcommand, "--theta")
        # build once so backend-level errors surface as usage errors
        _guard(flag, get_experiment_backend, protocol.value, **parameters)
        resolved.specs = [ExperimentSpec(protocol, parameters, shots=config.shots, seed=seed,
                                         tolerance_sigma=config.sigma, jobs=config.jobs)]
    return resolved


def setup_logging(verbose: bool):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="[%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _emit_transcript(config: CliConfig, transcript: tp.Optional[str], text: str) -> str:
    """Text reports carry the transcript inline; other formats write it beside the report."""
    if not config.transcript or transcript is None:
        return text
    if config.format == "text":
        return text + "\n" + transcript
    if config.output is not None:
        save_report(transcript, f"{config.output}.transcript.txt")
    else:
        sys.stderr.write(transcript)
    return text


def _identities_frame(trials: int, seed: int) -> tp.Tuple[pd.DataFrame, bool]:
    checks = run_identity_checks(trials, seed)
    frame = pd.DataFrame([{
        "check": check.name,
        "trials": check.trials,
        "max_deviation": check.max_deviation,
        "threshold": check.threshold,
        "details": ", ".join(f"{key}={value:.12g}" for key, value in sorted(check.details.items())),
        "passed": check.passed,
    } for check in checks])
    return frame, all(check.passed for check in checks)


def dispatch(resolved: ResolvedConfig) -> int:
    config = resolved.config
    if config.subcommand == "identities":
        frame, passed = _identities_frame(config.trials, resolved.seed)
        save_report(render_table(frame, config.format), config.output)
        return 0 if passed else 1

    if config.subcommand == "report":
        reports = [run_experiment(spec, verbose=config.verbose) for spec in resolved.specs]
        save_report(render_table(resource_summary(reports), config.format), config.output)
        return 0 if all(report.passed for report in reports) else 1

    (spec,) = resolved.specs
    if config.compare:
        comparison = compare_branches(spec, verbose=config.verbose)
        save_report(format_comparison(comparison, config.format), config.output)
        return 0 if comparison.passed else 1

    report = run_experiment(spec, verbose=config.verbose)
    text = _emit_transcript(config, report.transcript, render_report(report, config.format))
    save_report(text, config.output)
    return 0 if report.passed else 1


def run_cli(args: tp.Optional[tp.Sequence[str]] = None) -> int:
    parser = build_parser()
    namespace = parser.parse_args(args)
    config = CliConfig.from_args(namespace)
    setup_logging(config.verbose)
    try:
        resolved = validate_config(config)
    except ConfigError as err:
        parser.error(str(err))

    try:
        return dispatch(resolved)
    except ProtocolError as err:
        logger.error("%s failed: %s", config.subcommand, err)
        print(f"error: {err}", file=sys.stderr)
        return 1


def main(argv: tp.Optional[tp.Sequence[str]] = None) -> int:
    """Exit code: 0 success, 1 failed check, 2 usage error."""
    try:
        return run_cli(argv)
    except SystemExit as exit_:
        if exit_.code is None:
            return 0
        return exit_.code if isinstance(exit_.code, int) else 1
