# Copyright 2020-     Robot Framework Foundation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
from enum import Enum, auto
from typing import Dict, List, Union

from typing_extensions import TypedDict


class TypedDictDummy(TypedDict):
    pass


def convert_typed_dict(function_annotations: Dict, params: Dict) -> Dict:
    for arg_name, arg_type in function_annotations.items():
        if arg_name not in params or params[arg_name] is None:
            continue
        arg_value = params[arg_name]
        if getattr(arg_type, "__origin__", None) is Union:
            for union_type in arg_type.__args__:
                if arg_value is None or not isinstance(
                    union_type, type(TypedDictDummy)
                ):
                    continue
                arg_type = union_type
                break
        if isinstance(arg_type, type(TypedDictDummy)):
            if not isinstance(arg_value, dict):
                raise TypeError(
                    f"Argument '{arg_name}' expects a dictionary like object but did get '{type(arg_value)} instead.'"
                )
            params[arg_name] = convert_to_typed_dict(arg_type, arg_value)
    return params


def convert_to_typed_dict(arg_type, arg_value: Dict) -> Dict:
    lower_case_dict = {k.lower(): v for k, v in arg_value.items()}
    struct = arg_type.__annotations__
    typed_dict = arg_type()
    for req_key in arg_type.__required_keys__:  # type: ignore
        if req_key.lower() not in lower_case_dict:
            raise RuntimeError(
                f"`{lower_case_dict}` cannot be converted to {arg_type.__name__}."
                f"\nThe required key '{req_key}' in not set in given value."
                f"\nExpected types: {arg_type.__annotations__}"
            )
        typed_dict[req_key] = _convert(struct[req_key], lower_case_dict[req_key.lower()])  # type: ignore
    for opt_key in arg_type.__optional_keys__:  # type: ignore
        if opt_key.lower() not in lower_case_dict:
            continue
        typed_dict[opt_key] = _convert(struct[opt_key], lower_case_dict[opt_key.lower()])  # type: ignore
    return typed_dict


def _convert(annotation, value):
    origin = getattr(annotation, "__origin__", None)
    if origin in (list, List):
        item_type = annotation.__args__[0]
        return [item_type(item) for item in value]
    if isinstance(annotation, type) and issubclass(annotation, Enum):
        if isinstance(value, annotation):
            return value
        return annotation[str(value)]
    return annotation(value)


class ObservableKind(Enum):
    cos = auto()
    sin = auto()


class ObservableSpec(TypedDict, total=False):
    """Gaussian-windowed Fourier observable.

    - ``mode`` Spatial mode ``l`` as a list of three integers. Defaults to ``[0, 0, 0]``.
    - ``center`` Velocity window center ``v0`` as a list of three floats. Defaults to ``[0, 0, 0]``.
    - ``width`` Velocity window width ``s``. ``inf`` turns the window into the constant 1.
    - ``kind`` ``cos`` or ``sin``, see `ObservableKind`.
    """

    mode: List[int]
    center: List[float]
    width: float
    kind: ObservableKind


class VelocityBox(TypedDict):
    """Axis aligned velocity box ``[lower, upper]`` used by `Check Compact Velocity Marginal`."""

    lower: List[float]
    upper: List[float]


class NoiseVariant(Enum):
    """Structured noise families.

    | =Variant=   | =Description= |
    | Canonical   | Flat Fourier coefficients over ``0 < |k|∞ <= N``, renormalized to unit ℓ² norm. |
    | Blob        | Gaussian field with the covariance of randomly placed radial blobs. |
    | Renewal     | Piecewise-constant field of i.i.d. blobs renewed every ``τ``. |
    """

    Canonical = auto()
    Blob = auto()
    Renewal = auto()


class SteppingMode(Enum):
    """Noise regime of a trajectory.

    ``common`` every particle sees the same field realization.
    ``independent`` every particle carries its own Brownian motion with variance ``2κt`` per axis.
    """

    common = auto()
    independent = auto()


class AmplitudeLaw(Enum):
    """Law of the blob amplitude ``R_n``; both have second moment ``σ_N²``; the configured mean shifts the center."""

    two_point = auto()
    gaussian = auto()


class BlobShape(Enum):
    """Radial blob profile.

    ``bump`` is ``exp(-1/(1-(r/ℓ0)²))`` inside ``r < ℓ0`` and zero outside.
    ``gaussian`` is a normalized Gaussian of standard deviation ``ℓ0`` with closed form Fourier transform.
    """

    bump = auto()
    gaussian = auto()


class NoiseEvaluation(Enum):
    """Where the noise kick is evaluated inside a step: after the first half drift or at the start."""

    midpoint = auto()
    start = auto()


class CheckStatus(Enum):
    PASS = auto()
    FAIL = auto()
    ERROR = auto()
