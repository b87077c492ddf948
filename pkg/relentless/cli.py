"""
cli: command line entry points for relentless experiments
Corey Rayburn Yung <coreyrayburnyung@gmail.com>
Copyright 2020-2023, Corey Rayburn Yung
License: Apache-2.0

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        http://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.

Contents:
    cmd_run: runs one simulation and checks its invariant gates.
    cmd_convergence: runs a convergence study of a manufactured solution.
    cmd_verify_inequalities: runs every inequality probe.
    build_parser: returns the argument parser.
    main: parses arguments and dispatches to a command.

Exit codes: 0 on success, 2 for invalid settings, 3 when the solver fails
after every backoff and 4 when an invariant gate fails.

To Do:


"""
from __future__ import annotations
import argparse
from collections.abc import Hashable, Mapping, Sequence
import logging
import pathlib
from typing import Any, Optional

from .core import errors
from .core import framework


_LOGGER = logging.getLogger(__name__)
CONFIGURATION_ERRORS = (
    errors.ConfigurationError,
    errors.MeshQualityError,
    errors.NonPositiveInitialDensity,
    errors.NonConforming,
    errors.DegenerateCell,
    errors.DuplicateCell,
    FileNotFoundError)

Idea = Optional[framework.Idea | Mapping[Hashable, Any] | pathlib.Path | str]

def cmd_run(idea: Idea = None, **overrides: Any) -> int:
    """Runs one simulation and returns the exit code."""
    return _execute('run', idea, overrides)

def cmd_convergence(idea: Idea = None, **overrides: Any) -> int:
    """Runs a convergence study and returns the exit code."""
    return _execute('convergence', idea, overrides)

def cmd_verify_inequalities(idea: Idea = None, **overrides: Any) -> int:
    """Runs every inequality probe and returns the exit code."""
    return _execute('verify_inequalities', idea, overrides)

def build_parser() -> argparse.ArgumentParser:
    """Returns the parser with one subcommand per experiment mode."""
    common = argparse.ArgumentParser(add_help = False)
    common.add_argument(
        '--config', type = pathlib.Path, default = None,
        help = 'settings file (ini, toml, json, yaml or py)')
    common.add_argument(
        '--output', type = str, default = None,
        help = 'output folder (default: output/<identification>)')
    common.add_argument(
        '--levels', type = int, default = None,
        help = 'refinement levels of convergence studies and probes')
    common.add_argument(
        '--seed', type = int, default = None,
        help = 'seed of every random generator')
    parser = argparse.ArgumentParser(
        prog = 'relentless',
        description = (
            'Implicit upwind scheme for the barotropic Navier-Stokes '
            'equations with relative energy diagnostics'))
    commands = parser.add_subparsers(dest = 'mode', required = True)
    commands.add_parser(
        'run', parents = [common], help = 'march one configured run')
    commands.add_parser(
        'convergence', parents = [common],
        help = 'fit convergence orders against a manufactured solution')
    commands.add_parser(
        'verify-inequalities', parents = [common],
        help = 'probe the discrete functional inequalities')
    return parser

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parses 'argv', runs the selected command and returns its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level = logging.INFO,
        format = '%(asctime)s %(levelname)s %(name)s: %(message)s')
    commands = {
        'run': cmd_run,
        'convergence': cmd_convergence,
        'verify-inequalities': cmd_verify_inequalities}
    return commands[args.mode](
        args.config,
        output = args.output,
        levels = args.levels,
        seed = args.seed)

def _execute(mode: str, idea: Idea, overrides: dict[str, Any]) -> int:
    """Builds a Project for 'mode', runs it and maps failures to exit codes."""
    if isinstance(idea, (str, pathlib.Path)) and not pathlib.Path(idea).exists():
        _LOGGER.error('settings file %s does not exist', idea)
        return 2
    overrides = {k: v for k, v in overrides.items() if v is not None}
    overrides['mode'] = mode
    try:
        project = framework.Project(
            idea = idea,
            overrides = overrides,
            automatic = False)
        if project.config.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        project.manager.complete()
    except CONFIGURATION_ERRORS as error:
        _LOGGER.error('invalid settings: %s', error)
        return 2
    except errors.InvariantGateFailure as error:
        _LOGGER.error('%s', error)
        return 4
    code = project.manager.exit_code
    _LOGGER.info(
        '%s finished with exit code %d; %d files in %s',
        mode,
        code,
        len(project.manager.artifacts),
        project.manager.folder)
    return code
