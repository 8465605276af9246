from equistream.core.message.factorized import (
    attention_message,
    edge_centric_message,
    factorized_message,
    source_term,
    target_couple,
    translation_stress,
)
from equistream.core.message.problem import MessageProblem, random_problem
from equistream.core.message.translation import (
    RecouplingCoefficients,
    TranslationCoefficients,
    binomial_weight,
    dump_translation_tables,
    recoupling_coefficients,
    recoupling_terms,
    translation_coefficients,
)
