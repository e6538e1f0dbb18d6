"""famvar: variant models, decision tables, and product derivation."""

from .configure import (
    Configuration,
    Consequence,
    ConsequenceKind,
    Decision,
    Requirements,
    Session,
    StateKind,
    VariantState,
    apply_requirements,
    count_products,
    dependency_closure,
    enumerate_products,
    new_session,
    prune_by_area,
    total_configuration,
    validate_configuration,
)
from .derive import (
    DecisionEntry,
    DecisionTable,
    FeatureKind,
    FeatureNode,
    derive_decision_table,
    export_feature_tree,
    reduce_decision_table,
)
from .errors import FamvarError
from .model import (
    ALL_AREAS,
    Diagnostic,
    FamilyModel,
    Relation,
    Variant,
    VariantValue,
    validate_model,
)
from .trace import (
    Element,
    ModelDocument,
    check_traces,
    customize_document,
    trace_backward,
    trace_forward,
)
from .xmlio import (
    parse_configuration,
    parse_family_model,
    parse_model_document,
    parse_requirements,
    render_table,
    serialize_configuration,
    serialize_family_model,
    serialize_model_document,
    serialize_requirements,
)

__version__ = "0.1.0"
