#pragma once

#include "grouptrack/screk/ast.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grouptrack::screk {

class OptimizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// At most two components and at most one temporal constraint.
bool is_optimal(const ScenarioModel& model);

/// Generated intermediate models are named `<name>__<k>`.
bool is_internal_model(std::string_view name);

/// Rewrites a model into optimal models. Optimal models come back unchanged.
/// A model whose temporal constraints form a chain c1 R1 c2 R2 ... cn becomes
/// n-1 nested models: `<name>__1` = (c1 R1 c2), `<name>__k` = (`<name>__k-1`
/// Rk ck+1), and the last one keeps the original name, alarm and symbolic
/// constraints. Intermediate models span the hull of their components; the
/// engine evaluates the next relation of the chain against their last
/// component, so the nest recognizes exactly what the original model does.
///
/// Throws OptimizeError "cannot optimize: non-chain temporal constraints" when
/// the constraints do not form such a chain.
std::vector<ScenarioModel> optimize(const ScenarioModel& model);

/// Every model replaced by its optimized form, intermediates inserted before
/// the model they serve.
Ontology optimize_ontology(const Ontology& ontology);

/// Component variable(s) whose recognition triggers the evaluation of each
/// composite model: the one that ends last under the model's temporal
/// relation, or both components when there is no temporal constraint.
struct TriggerTree {
  std::map<std::string, std::vector<std::string>> triggers;

  const std::vector<std::string>& of(const std::string& model) const;
};

/// Throws OptimizeError when a composite model is not optimal.
TriggerTree build_trigger_tree(std::span<const ScenarioModel> models);

/// The component of `a R b` guaranteed to end last: b, except `finishes`
/// where both end together and a is used.
enum class TriggerSide { First, Second };
TriggerSide trigger_side(AllenRelation r);

}  // namespace grouptrack::screk
