# Copyright 2026 The Viewspan Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Multi-view consistency analysis and temporal forgery detection."""

from ._core import (
    CameraIntrinsics,
    DataError,
    Detector,
    DetectorConfig,
    Error,
    FormatError,
    InvalidArgument,
    PairRecord,
    analyze_pair,
    average_precision,
    backproject,
    decode_pointmap,
    encode_pointmap,
    estimate_focal,
    f1_score,
    load_video,
    main,
    project_points,
    read_frame,
    read_pointmap,
    synthesize_sequence,
    train_detector,
    write_frame,
    write_pointmap,
    write_video,
)

__all__ = [
    "CameraIntrinsics",
    "DataError",
    "Detector",
    "DetectorConfig",
    "Error",
    "FormatError",
    "InvalidArgument",
    "PairRecord",
    "analyze_pair",
    "average_precision",
    "backproject",
    "decode_pointmap",
    "encode_pointmap",
    "estimate_focal",
    "f1_score",
    "load_video",
    "main",
    "project_points",
    "read_frame",
    "read_pointmap",
    "synthesize_sequence",
    "train_detector",
    "write_frame",
    "write_pointmap",
    "write_video",
]
