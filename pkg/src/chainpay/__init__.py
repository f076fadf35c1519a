"""Reward mechanisms for crowdsourced recruitment chains, with incentive audits.

Quick tour::

    from chainpay import make_mechanism, check_property, PropertySpec, CheckBounds
    mech = make_mechanism("gdgeom:1/2,1/2")
    check_property(mech, PropertySpec.parse("EpsDSP", epsilon=1), CheckBounds())
"""

from .attacks import (
    AttackResult,
    CollapseMove,
    SybilMove,
    best_attack,
    collapse_gain,
    sybil_gain,
)
from .errors import (
    ChainPayError,
    DomainTooSmall,
    DuplicateEntry,
    IncompleteChain,
    InfeasibleClass,
    MalformedRow,
    NegativeReward,
    NotApplicable,
    ParameterOutOfRange,
    PositionOutOfDomain,
)
from .mechanisms import (
    WTA,
    DeltaGeom,
    GammaDeltaGeom,
    Mechanism,
    Tabular,
    TopDownGeom,
    chain_payments,
    chain_total,
    make_mechanism,
    parse_tabular,
    reward,
)
from .properties import (
    CheckBounds,
    CheckReport,
    Kind,
    PropertySpec,
    SampleClass,
    Verdict,
    Witness,
    certify_geometric,
    check_property,
    sample_mechanism,
)

__version__ = "0.1.0"
