"""Exact, enumeration-based checks of OOD learnability on finite domains."""

from .auc import (
    RankingFunction,
    RankingSpace,
    auc,
    bayes_ranker,
    bayes_sup_auc,
    order_type_space,
    sup_auc,
    weak_orderings,
)
from .conditions import (
    ConditionReport,
    Verdict,
    check_auc_realizability,
    check_compatibility,
    check_linear_auc,
    check_linear_risk,
    check_multilinear,
    check_risk_realizability,
    learnability_verdict,
)
from .counterexamples import (
    Certificate,
    alpha_risk_gap,
    auc_unrealizable_split,
    dirac_auc_overlap_pair,
    overlap_domain,
    sauer_pattern_domain,
)
from .domain import DomainSpaceSpec, FeatureSpace, FiniteDomain, IdJoint, OodMarginal, mix_alpha
from .errors import *  # noqa: F401,F403
from .fcnn import ReluNetwork, ScoreFunction, embed_network, forward, interpolating_network, point_isolating_ranker
from .learners import (
    LearnerOutput,
    TrainingSet,
    composite_learner,
    constrained_auc_learner,
    constrained_reject_learner,
    mmd,
    mmd_dispatch_learner,
    nn_threshold_learner,
)
from .loss import LossTable, alpha_risk, risk_in, risk_out
from .spaces import Hypothesis, HypothesisSpace, exhaustive_space, natarajan_dimension, phi_project, vc_dimension

__version__ = "0.1.0"
