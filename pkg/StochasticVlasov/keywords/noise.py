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
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
from assertionengine import AssertionOperator, float_str_verify_assertion

from ..assertion_engine import with_check_recording
from ..base import LibraryComponent
from ..simulation.blob_profile import BlobProfile, blob_chi
from ..simulation.noise_model import (
    NoiseSpec,
    blob_noise,
    canonical_noise,
    covariance_at,
    covariance_lr_norm,
    covariance_pairing,
    covariance_table,
    sample_field_increments,
)
from ..simulation.renewal import RenewalProcess, blob_pairing, sample_renewal_field
from ..simulation.streams import StreamPurpose, stream
from ..simulation.verification import EXACT_TOLERANCE, verdict
from ..utils import AmplitudeLaw, BlobShape, as_mode, as_points, keyword, logger


class NoiseModel(LibraryComponent):
    @keyword(tags=("Setter", "Noise"))
    def canonical_noise(
        self, kappa: float, family_index: int, mode_cutoff: Optional[int] = None
    ) -> NoiseSpec:
        """Builds member ``N`` of the canonical family.

        Flat coefficients over ``0 < |k|∞ <= N`` renormalized so that
        ``Q_N(0) = 2κ I``; larger ``N`` spreads the same single-point variance
        over more modes and shrinks the spatial correlation.

        ``mode_cutoff`` Cube ``|k|∞ <= M`` holding the coefficients. Defaults to ``N``.

        Example:
        | ${spec} =    `Canonical Noise`    0.5    3
        | `Get Covariance Norm`    ${spec}    1.75    <    1.0
        """
        key = ("canonical", float(kappa), int(family_index), mode_cutoff)
        return self.spec_cache.get_or_create(key, lambda: canonical_noise(float(kappa), int(family_index), mode_cutoff))

    @keyword(tags=("Setter", "Noise"))
    def blob_noise(
        self,
        tau: float,
        kT2: float,
        ell: float,
        mode_cutoff: int = 4,
        shape: BlobShape = BlobShape.bump,
        radius: float = 0.25,
        mass: float = 1.0,
        renewal: bool = False,
        amplitude_law: AmplitudeLaw = AmplitudeLaw.two_point,
        amplitude_mean: float = 0.0,
    ) -> NoiseSpec:
        """Builds the Gaussian field with the covariance of randomly placed blobs.

        ``tau`` Renewal time and ``kT2`` squared thermal wave number; ``κ = τ k_T² / 6``.

        ``ell`` Blob scale ``ℓ_N``; blob sizes are uniform in ``[ℓ_N, 2ℓ_N]``.

        ``mode_cutoff`` Modes with Euclidean ``|k| <= M`` are kept.

        ``shape``, ``radius`` and ``mass`` define the radial profile, see `BlobShape`.

        ``renewal`` Marks the spec for the piecewise-constant renewal process
        instead of white-in-time increments.

        ``amplitude_law`` and ``amplitude_mean`` select the law of the blob amplitude.
        """
        profile = BlobProfile(shape, float(radius), float(mass))
        key = (
            "blob",
            float(tau),
            float(kT2),
            float(ell),
            int(mode_cutoff),
            profile,
            bool(renewal),
            amplitude_law,
            float(amplitude_mean),
        )
        return self.spec_cache.get_or_create(
            key,
            lambda: blob_noise(
                float(tau),
                float(kT2),
                float(ell),
                profile,
                int(mode_cutoff),
                bool(renewal),
                amplitude_law,
                float(amplitude_mean),
            ),
        )

    @keyword(tags=("Setter", "Noise"))
    def noise_from_config(self, family_index: Optional[int] = None) -> Optional[NoiseSpec]:
        """Builds the noise spec of the active experiment config.

        ``family_index`` Family member ``N``; defaults to ``noise.family_index``
        or the last of ``noise.family_indices``. Returns ``None`` when ``κ = 0``.
        """
        config = self.config
        key = ("config", config.physical, config.noise, family_index)
        return self.spec_cache.get_or_create(key, lambda: config.noise_spec(family_index))

    @keyword(tags=("Getter", "Noise"))
    def get_covariance_at(self, spec: NoiseSpec, lag: List[float]) -> List[List[float]]:
        """Returns the 3x3 covariance ``Q(lag)``.

        Example:
        | ${q0} =    `Get Covariance At`    ${spec}    [0, 0, 0]
        """
        return covariance_at(spec, np.asarray(lag, dtype=float)).tolist()

    @keyword(tags=("Getter", "Assertion", "Noise"))
    def get_covariance_norm(
        self,
        spec: NoiseSpec,
        r: float = 2.0,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
        resolution: Optional[int] = None,
    ) -> float:
        """Returns ``||Q||_{L^r}`` of the covariance matrix field.

        ``r = 2`` is evaluated by Parseval, other exponents by grid quadrature
        with ``resolution`` points per axis.

        Optionally asserts the value, see `Assertions`.
        """
        value = covariance_lr_norm(spec, float(r), resolution)
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, f"L^{r} norm of the covariance is", message
        )

    @keyword(tags=("Getter", "Assertion", "Noise"))
    def get_blob_chi(
        self,
        mode: List[int],
        ell: float,
        shape: BlobShape = BlobShape.bump,
        radius: float = 0.25,
        mass: float = 1.0,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``χ_N(k)``, the blob profile transform averaged over blob sizes in ``[ℓ, 2ℓ]``.

        ``χ_N(k)`` tends to the profile mass as ``ℓ`` shrinks.
        """
        value = blob_chi(as_mode(mode), float(ell), BlobProfile(shape, float(radius), float(mass)))
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, f"chi of {list(mode)} is", message
        )

    @keyword(tags=("Getter", "Assertion", "Noise"))
    def get_covariance_pairing(
        self,
        spec: NoiseSpec,
        mode: List[int],
        amplitude: List[float],
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``<Qφ, φ>`` for ``φ(x) = a cos(2π k·x)``."""
        value = covariance_pairing(spec, as_mode(mode), np.asarray(amplitude, dtype=float))
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Covariance pairing is", message
        )

    @keyword(tags=("Getter", "Noise"))
    def sample_field_increments(
        self,
        spec: NoiseSpec,
        points: Any,
        dt: float,
        seed: Optional[int] = None,
        replica: int = 0,
        step: int = 0,
    ) -> List[List[float]]:
        """Samples one common-noise increment ``ΔW(x)`` at ``points``.

        The draw is keyed by ``(seed, replica, step)``, ``seed`` defaulting to
        ``seeds.master``, so repeating the keyword repeats the field.
        """
        rng = stream(self.config.seed if seed is None else int(seed), int(replica), int(step), StreamPurpose.noise)
        return sample_field_increments(spec, as_points(points), float(dt), rng).tolist()

    @keyword(tags=("Getter", "Noise"))
    def sample_renewal_field(
        self, spec: NoiseSpec, times: List[float], points: Any, seed: Optional[int] = None, replica: int = 0
    ) -> List[List[List[float]]]:
        """Samples the piecewise-constant renewal field at ``times`` (multiples of ``τ``) and ``points``."""
        rng = stream(self.config.seed if seed is None else int(seed), int(replica), 0, StreamPurpose.renewal)
        return sample_renewal_field(spec, times, as_points(points), rng).tolist()

    @keyword(tags=("Getter", "Assertion", "Noise"))
    def get_renewal_pairing(
        self,
        spec: NoiseSpec,
        mode: List[int],
        amplitude: List[float],
        index: int = 0,
        seed: Optional[int] = None,
        replica: int = 0,
        assertion_operator: Optional[AssertionOperator] = None,
        assertion_expected: Any = None,
        message: Optional[str] = None,
    ) -> float:
        """Returns ``<E'_n, a cos(2π k·x)>`` of renewal blob ``index`` in closed form."""
        process = RenewalProcess(spec, self.config.seed if seed is None else int(seed), int(replica))
        value = blob_pairing(spec, process.blob(int(index)), as_mode(mode), np.asarray(amplitude, dtype=float))
        return float_str_verify_assertion(
            value, assertion_operator, assertion_expected, "Renewal pairing is", message
        )

    @keyword(tags=("Assertion", "Noise"))
    @with_check_recording
    def check_covariance_exactness(self, spec: NoiseSpec, tolerance: float = EXACT_TOLERANCE):
        """Fails unless ``Q(0) = 2κ I`` and ``tr Q(0) = 6κ`` within ``tolerance``."""
        q0 = covariance_at(spec, np.zeros(3))
        deviation = float(np.max(np.abs(q0 - 2.0 * spec.kappa * np.eye(3))))
        trace = abs(float(np.trace(q0)) - 6.0 * spec.kappa)
        return verdict(
            "covariance_exactness",
            deviation <= tolerance and trace <= tolerance,
            spec.label,
            deviation=deviation,
            trace_deviation=trace,
        )

    @keyword(tags=("Noise",))
    def write_covariance_table(self, spec: NoiseSpec, name: str = "covariance_table.csv") -> Path:
        """Writes one CSV row per retained mode: ``k``, ``|k|``, ``χ_N(k)``, ``Γ_k``, ``λ_k`` and ``Q`` entries."""
        rows = covariance_table(spec)
        header = list(rows[0]) if rows else ["k1", "k2", "k3"]
        path = self.writer.write_csv(name, header, [list(row.values()) for row in rows])
        logger.info(f"Covariance table of {spec.label} written to {path}")
        return path
