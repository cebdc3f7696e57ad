"""Certified exponential sums and equidistribution experiments for
intermediate-growth phase sequences, plus the model dynamical systems
their averages feed."""

from .certificates import (
    BoundCertificate,
    KaracubaParams,
    SInterval,
    admissible_s_set,
    certify_combination,
    certify_combined,
    certify_sandwich,
    certify_single,
    karacuba_params,
)
from .cli import DecayFit, fit_decay
from .diffcalc import (
    DiffPoly,
    apply_delta,
    change_of_basis,
    roundtrip_combination,
    verify_identity,
)
from .dynamics import (
    ModelSystem,
    ObservableSpec,
    SkewDemoResult,
    VnResult,
    ZeroEntropyResult,
    box_average,
    invariant_projection,
    skew_demo,
    spectral_mass,
    vn_average,
    zero_entropy_correlation,
)
from .equidist import (
    EquiConfig,
    EquiReport,
    ResidueHistogram,
    equi_report,
    residue_frequencies,
    residue_histogram_of,
    star_discrepancy_1d,
)
from .expsums import (
    DyadicSeries,
    ExpSumResult,
    GoodnessScan,
    SequenceSpec,
    dyadic_series,
    goodness_scan,
    partial_sum,
    resolve_precision,
    weyl_vector_test,
)
from .furstenberg import (
    BudgetError,
    CorrelationQuery,
    CorrelationTensor,
    SequenceId,
    bernoulli_fingerprint,
    correlation,
)
from .growth import GrowthParams, ShiftedCombination, TaylorJet, eval_G, jet_F, jet_G
from .phasetable import (
    PhaseModel,
    PhaseTable,
    ResidueTable,
    floor_phase_table,
    phase_table,
    residue_table,
)
from .precision import ExtReal, PrecisionError, required_bits, supported_width
from .reals import AlgebraicReal, LazyReal, coerce_real, parse_real

__version__ = "0.1.0"

__all__ = [
    "AlgebraicReal",
    "BoundCertificate",
    "BudgetError",
    "CorrelationQuery",
    "CorrelationTensor",
    "DecayFit",
    "DiffPoly",
    "DyadicSeries",
    "EquiConfig",
    "EquiReport",
    "ExpSumResult",
    "ExtReal",
    "GoodnessScan",
    "GrowthParams",
    "KaracubaParams",
    "LazyReal",
    "ModelSystem",
    "ObservableSpec",
    "PhaseModel",
    "PhaseTable",
    "PrecisionError",
    "ResidueHistogram",
    "ResidueTable",
    "SInterval",
    "SequenceId",
    "SequenceSpec",
    "ShiftedCombination",
    "SkewDemoResult",
    "TaylorJet",
    "VnResult",
    "ZeroEntropyResult",
    "admissible_s_set",
    "apply_delta",
    "bernoulli_fingerprint",
    "box_average",
    "certify_combination",
    "certify_combined",
    "certify_sandwich",
    "certify_single",
    "change_of_basis",
    "coerce_real",
    "correlation",
    "dyadic_series",
    "equi_report",
    "eval_G",
    "fit_decay",
    "floor_phase_table",
    "goodness_scan",
    "invariant_projection",
    "jet_F",
    "jet_G",
    "karacuba_params",
    "parse_real",
    "partial_sum",
    "phase_table",
    "required_bits",
    "residue_frequencies",
    "residue_histogram_of",
    "residue_table",
    "resolve_precision",
    "roundtrip_combination",
    "skew_demo",
    "spectral_mass",
    "star_discrepancy_1d",
    "supported_width",
    "verify_identity",
    "vn_average",
    "weyl_vector_test",
    "zero_entropy_correlation",
]
