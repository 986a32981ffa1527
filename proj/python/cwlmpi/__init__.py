# SPDX-FileCopyrightText: Copyright (c) 2026, cwlmpi contributors.
# SPDX-License-Identifier: Apache-2.0
"""Run CWL tools and workflows with MPI-parallel steps."""

from ._core import (
    AggregateStats,
    Error,
    ExecutionError,
    MpiPlatformConfig,
    PerfError,
    RankPerfRecord,
    Tool,
    ValidationError,
    Workflow,
    WorkflowFailed,
    __version__,
    aggregate,
    env_name_matches,
    expand_glob,
    load_config,
    load_document,
    parse_config,
    parse_document,
    parse_rank_file,
    rank_from_filename,
    render_report,
    run,
    serialize_config,
    validate_config,
)


def perfstats(pattern):
    """Aggregate every rank file matching `pattern`."""
    files = expand_glob(pattern)
    if not files:
        raise PerfError(f"no files match '{pattern}'")
    return aggregate([parse_rank_file(f) for f in files])


__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
