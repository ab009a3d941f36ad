"""
Command registration: each command module exposes a `router`, and `build_parser` includes them all
"""
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from slickqsvm.core.config import settings
from slickqsvm.services.registry import Registry

Handler = Callable[[Namespace, Registry], Optional[dict]]
Configure = Callable[[ArgumentParser], None]


@dataclass
class Command:
    name: str
    help: str
    handler: Handler
    configure: Optional[Configure] = None


class CommandRouter:
    """Collects subcommands declared with the `command` decorator"""

    def __init__(self):
        self.commands: List[Command] = []

    def command(self, name: str, help: str, arguments: Optional[Configure] = None):
        def register(handler: Handler) -> Handler:
            self.commands.append(Command(name=name, help=help, handler=handler, configure=arguments))
            return handler
        return register


def include_command(subparsers, router: CommandRouter, parsers: Dict[str, ArgumentParser]) -> None:
    for command in router.commands:
        parser = subparsers.add_parser(command.name, help=command.help, description=command.help)
        if command.configure is not None:
            command.configure(parser)
        parser.set_defaults(handler=command.handler)
        parsers[command.name] = parser


def add_global_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=settings.SEED,
                        help="master seed for sampling, partitioning, annealing and synthesis (env SLICKQSVM_SEED)")
    parser.add_argument("--threads", type=int, default=settings.THREADS,
                        help="worker threads; results do not depend on it (env SLICKQSVM_THREADS)")
    parser.add_argument("--config", default=None,
                        help="JSON object of flag values (keys are flag names); explicit flags win")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")
    parser.add_argument("--working-size", type=int, nargs=2, metavar=("HEIGHT", "WIDTH"),
                        default=list(settings.WORKING_SIZE), help="resampled scene size")
    parser.add_argument("--registry-url", default=settings.REGISTRY_URL, help="run registry database URL")
    parser.add_argument("--no-registry", dest="registry", action="store_const", const=False,
                        default=settings.REGISTRY_ENABLED, help="do not record runs or models")


def build_parser() -> Tuple[ArgumentParser, Dict[str, ArgumentParser]]:
    """The top-level parser and the subparser of every command, by name"""
    from slickqsvm.cli.commands import bench, evaluate, predict, preprocess, runs, synth, train

    parser = ArgumentParser(
        prog="slickqsvm",
        description="Oil-spill segmentation of dual-polarisation SAR scenes with bagged SVM ensembles",
    )
    add_global_arguments(parser)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    parsers: Dict[str, ArgumentParser] = {}
    for module in (synth, preprocess, train, predict, evaluate, bench, runs):
        include_command(subparsers, module.router, parsers)
    return parser, parsers
