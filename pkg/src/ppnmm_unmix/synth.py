"""Synthetic libraries and labelled scenes with known ground truth."""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import HyperCube, SpectralLibrary, add_noise, check_simplex, gbm_forward, linear_mix, ppnm_forward
from .mrf import PottsParams, sample_potts_field

MODELS = ("lmm", "gbm", "ppnmm")

# Per-class abundances of the three reference synthetic scenes; only the
# first three library members contribute.
SCENE_ABUNDANCES = np.array(
    [
        [0.6, 0.1, 0.3, 0, 0, 0, 0, 0],
        [0.1, 0.3, 0.6, 0, 0, 0, 0, 0],
        [0.3, 0.4, 0.3, 0, 0, 0, 0, 0],
    ],
    dtype=np.float64,
)


def spectral_angle(u, v):
    """Angle between two spectra, in degrees."""
    c = u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def _smooth_spectrum(L, rng):
    x = np.linspace(0.0, 1.0, L)
    raw = 0.2 * rng.random() + np.zeros(L)
    for _ in range(rng.integers(2, 7)):
        center = rng.uniform(-0.1, 1.1)
        width = rng.uniform(0.03, 0.3)
        amp = rng.uniform(-0.6, 1.0)
        raw += amp * np.exp(-0.5 * ((x - center) / width) ** 2)
    raw -= raw.min()
    peak = raw.max()
    raw = raw / peak if peak > 0 else raw
    lo = rng.uniform(0.05, 0.35)
    hi = rng.uniform(lo + 0.3, 1.0)
    return lo + (hi - lo) * raw


def make_synthetic_library(L, R, seed, min_angle=5.0, max_retries=1000):
    """Random smooth spectra standing in for a field-measured library.

    Each spectrum is a sum of Gaussian bumps rescaled into [0.05, 1.0].
    Candidates within ``min_angle`` degrees of an accepted spectrum are
    redrawn.
    """
    if L < 8 or R < 2:
        raise ValueError(f"need at least 8 bands and 2 endmembers, got L={L}, R={R}")
    rng = np.random.default_rng(seed)
    cols = []
    retries = 0
    while len(cols) < R:
        s = _smooth_spectrum(L, rng)
        if all(spectral_angle(s, c) >= min_angle for c in cols):
            cols.append(s)
        else:
            retries += 1
            if retries > max_retries:
                raise RuntimeError(f"could not draw {R} spectra {min_angle} degrees apart")
    return SpectralLibrary(np.column_stack(cols), [f"synth{r + 1}" for r in range(R)])


@dataclass
class SceneSpec:
    """Everything needed to regenerate a synthetic scene."""

    width: int = 25
    height: int = 25
    n_classes: int = 3
    model: str = "lmm"
    class_abundances: list = field(default_factory=lambda: SCENE_ABUNDANCES.tolist())
    n_active: int = 3
    b: float = 0.0
    gamma: list = field(default_factory=list)
    sigma2: float = 0.001
    beta: float = 1.1
    n_sweeps: int = 200
    bands: int = 189
    seed: int = 0

    def __post_init__(self):
        self.model = self.model.lower()
        if self.model not in MODELS:
            raise ValueError(f"unknown mixing model {self.model!r}; expected one of {MODELS}")
        A = np.asarray(self.class_abundances, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != self.n_classes:
            raise ValueError(f"need {self.n_classes} abundance rows, got shape {A.shape}")
        for row in A:
            check_simplex(row)
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.model == "gbm":
            n_pairs = self.n_active * (self.n_active - 1) // 2
            if len(self.gamma) != n_pairs:
                raise ValueError(f"gbm needs {n_pairs} gamma values for {self.n_active} active endmembers, got {len(self.gamma)}")
        self.class_abundances = A.tolist()
        self.gamma = [float(g) for g in self.gamma]

    @property
    def abundance_matrix(self):
        return np.asarray(self.class_abundances, dtype=np.float64)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def preset(name, seed=0):
    """The three reference 25x25, 3-class scenes: ``paper-i1`` (LMM),
    ``paper-i2`` (GBM) and ``paper-i3`` (PPNMM)."""
    base = dict(seed=seed)
    if name == "paper-i1":
        return SceneSpec(model="lmm", **base)
    if name == "paper-i2":
        return SceneSpec(model="gbm", gamma=[0.5, 0.1, 0.3], **base)
    if name == "paper-i3":
        return SceneSpec(model="ppnmm", b=0.1, **base)
    raise ValueError(f"unknown preset {name!r}")


PRESETS = ("paper-i1", "paper-i2", "paper-i3")


@dataclass
class GroundTruth:
    labels: np.ndarray  # (height, width), 0-based
    abundances: np.ndarray  # (K, R)
    clean_cube: HyperCube
    noisy_cube: HyperCube

    def pixel_abundances(self):
        return self.abundances[self.labels.ravel()]

    def snr_db(self):
        """Realized signal-to-noise ratio of the noisy cube."""
        signal = np.mean(self.clean_cube.data**2)
        noise = np.mean((self.noisy_cube.data - self.clean_cube.data) ** 2)
        return float(10.0 * np.log10(signal / noise))


def forward(spec, lib, a):
    if spec.model == "lmm":
        return linear_mix(lib, a)
    if spec.model == "ppnmm":
        return ppnm_forward(lib, a, spec.b)
    return gbm_forward(lib, a, spec.gamma, active=range(spec.n_active))


def generate_scene(spec, lib, rng):
    """Draw a Potts label map, mix each class's abundances and add noise."""
    A = spec.abundance_matrix
    if A.shape[1] != lib.n_endmembers:
        raise ValueError(f"abundance rows have {A.shape[1]} entries, library has {lib.n_endmembers} endmembers")
    if spec.n_active > lib.n_endmembers:
        raise ValueError("more active endmembers than library members")
    labels = sample_potts_field(spec.width, spec.height, PottsParams(spec.beta, spec.n_classes), spec.n_sweeps, rng)
    class_spectra = np.array([forward(spec, lib, a) for a in A])
    clean = class_spectra[labels.ravel()]
    noisy = add_noise(clean, spec.sigma2, rng)
    return GroundTruth(
        labels,
        A,
        HyperCube(spec.width, spec.height, clean),
        HyperCube(spec.width, spec.height, noisy),
    )
