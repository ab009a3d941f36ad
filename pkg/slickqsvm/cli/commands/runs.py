from argparse import ArgumentParser, Namespace

from slickqsvm.cli.api import CommandRouter
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--limit", type=int, default=20, help="runs to list")
    parser.add_argument("--command", dest="run_command", default=None, help="only runs of this command")


@router.command("runs", help="List recent runs from the registry", arguments=add_arguments)
def runs(args: Namespace, registry: Registry) -> dict:
    for run in registry.recent_runs(limit=args.limit, command=args.run_command):
        duration = "-" if run["duration_seconds"] is None else f"{run['duration_seconds']:.2f}s"
        print(f"{run['id']}\t{run['recorded_at']}\t{run['command']}\t{run['status']}"
              f"\t{run['backend'] or '-'}\t{run['model_id'] or '-'}\t{duration}")
    return {}
