import argparse
import logging
import warnings
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Set, TextIO

from pantograph.config import OutputFormat, RunConfig, build_config
from pantograph.errors import UsageError
from pantograph.exception_handler import pantograph_exception_handler

logger = logging.getLogger(__name__)

Handler = Callable[[RunConfig, TextIO], int]


class Option(NamedTuple):
    flags: Sequence[str]
    kwargs: Dict[str, Any]


def option(*flags: str, **kwargs) -> Option:
    """argparse.add_argument() arguments, kept until the parser is built"""
    return Option(flags, kwargs)


class Command(NamedTuple):
    name: str
    handler: Handler
    help: str
    options: Sequence[Option]


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


COMMON_OPTIONS = (
    option("--format", choices=[f.value for f in OutputFormat], help="output format (default csv)"),
    option("--config", help="flat key=value file; flags win on conflict"),
    option("--verbose", action="store_true", help="debug logging on stderr"),
)


class CommandRouter:
    """
    Registry of subcommands. Handlers receive a validated RunConfig and the
    output stream and return the process exit code; domain errors they raise
    are turned into error reports with the matching exit code.
    """

    def __init__(self, prog: str = "pantograph", description: Optional[str] = None):
        self.prog = prog
        self.description = description
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, *options: Option, help: str = ""):
        """
        Decorator registering ``handler`` as the subcommand ``name`` with its
        own options; the common --format, --config and --verbose are added to
        every command.

        :return: the handler, unchanged
        """

        def register(handler: Handler) -> Handler:
            if name in self.commands:
                warnings.warn(f"command {name} already registered -- overwriting")
            self.commands[name] = Command(name, handler, help, options)
            return handler

        return register

    @property
    def names(self) -> List[str]:
        return list(self.commands)

    def build_parser(self) -> argparse.ArgumentParser:
        # unset flags stay absent so that config file values show through
        parser = _ArgumentParser(
            prog=self.prog, description=self.description, argument_default=argparse.SUPPRESS
        )
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        for command in self.commands.values():
            sub = subparsers.add_parser(
                command.name, help=command.help, argument_default=argparse.SUPPRESS
            )
            for opt in (*command.options, *COMMON_OPTIONS):
                sub.add_argument(*opt.flags, **opt.kwargs)
        return parser

    def value_flags(self) -> Set[str]:
        """every option string that takes a value"""
        flags = set()
        for command in self.commands.values():
            for opt in (*command.options, *COMMON_OPTIONS):
                if "action" not in opt.kwargs:
                    flags.update(opt.flags)
        return flags

    def attach_values(self, argv: Sequence[str]) -> List[str]:
        """
        ["--a", "-0.5,0.5"] -> ["--a=-0.5,0.5"]. argparse takes any token that
        starts with "-" and is not a plain number for the next flag, which would
        reject negative lists and expressions such as "-y1^2".
        """
        value_flags = self.value_flags()
        attached: List[str] = []
        args = iter(argv)
        for arg in args:
            if arg in value_flags:
                value = next(args, None)
                if value is not None:
                    arg = f"{arg}={value}"
            attached.append(arg)
        return attached

    def parse(self, argv: Sequence[str]) -> RunConfig:
        flags = vars(self.build_parser().parse_args(self.attach_values(argv)))
        name = flags.pop("command", None)
        if name is None:
            raise UsageError(f"a command is required: {', '.join(self.names)}")
        config_path = flags.pop("config", None)
        return build_config(name, flags, config_path)

    def dispatch(self, argv: Sequence[str], stdout: TextIO, stderr: TextIO) -> int:
        as_json = _wants_json(argv)
        try:
            config = self.parse(argv)
            _configure_logging(config.verbose, stderr)
            logger.debug("running %s with %r", config.command, config)
            return self.commands[config.command].handler(config, stdout)
        except SystemExit as exc:
            # --help
            return exc.code or 0
        except Exception as exc:
            return pantograph_exception_handler(exc, stdout if as_json else stderr, as_json)


def _wants_json(argv: Sequence[str]) -> bool:
    """--format json is honoured for error reports even when parsing fails later"""
    argv = list(argv)
    for i, arg in enumerate(argv):
        if arg == "--format=json" or (arg == "--format" and argv[i + 1 : i + 2] == ["json"]):
            return True
    return False


def _configure_logging(verbose: bool, stream: TextIO):
    logging.basicConfig(
        stream=stream,
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
