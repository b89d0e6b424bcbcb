# Copyright 2026 The H2OT Engine Authors
# SPDX-License-Identifier: Apache-2.0

"""Token pruning and recovery for video pose transformers."""

from ._h2ot import (
    ConfigError,
    Error,
    NumericError,
    ParameterError,
    ParseError,
    Pipeline,
    RecoveryError,
    ScheduleError,
    ShapeError,
    dpc_knn_scores,
    flops,
    motion_scores,
    mpjpe,
    preset_names,
    tpa_select,
    tpc_select,
    tpmo_select,
    tps_select,
    tri_recover,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Error",
    "NumericError",
    "ParameterError",
    "ParseError",
    "Pipeline",
    "RecoveryError",
    "ScheduleError",
    "ShapeError",
    "dpc_knn_scores",
    "flops",
    "motion_scores",
    "mpjpe",
    "preset_names",
    "tpa_select",
    "tpc_select",
    "tpmo_select",
    "tps_select",
    "tri_recover",
]
