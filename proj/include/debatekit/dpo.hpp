#pragma once

#include <vector>

namespace debatekit {

/// Log-probabilities of one preference pair under the policy and the frozen
/// reference model. All four values are totals over the response tokens and
/// must be finite and non-positive.
struct ScoredPair {
  double logp_policy_chosen = 0.0;
  double logp_policy_rejected = 0.0;
  double logp_ref_chosen = 0.0;
  double logp_ref_rejected = 0.0;
  int chosen_token_count = 1;

  void validate() const;
};

struct DpoParams {
  double beta = 0.1;
  double nll_weight = 1.0;

  void validate() const;
};

/// Implicit-reward margin: (policy - reference) log-ratio of chosen minus
/// that of rejected. Invariant under any constant shift applied to one
/// model's two scores.
double dpo_margin(const ScoredPair& pair);

/// -log sigmoid(beta * margin), computed via softplus/log1p so values stay
/// finite and accurate for large |margin|.
double dpo_loss(const ScoredPair& pair, const DpoParams& params);

/// Per-token negative log-likelihood of the chosen response under the policy.
double nll_term(const ScoredPair& pair);

double total_loss(const ScoredPair& pair, const DpoParams& params);

struct BatchSummary {
  int count = 0;
  double mean_dpo_loss = 0.0;
  double mean_total_loss = 0.0;
  double mean_margin = 0.0;
  double fraction_margin_positive = 0.0;
};

BatchSummary batch_report(const std::vector<ScoredPair>& pairs, const DpoParams& params);

/// Analytic d(dpo_loss)/d(margin) at the given margin.
double dpo_loss_gradient(double margin, double beta);

/// Maximum absolute deviation between the analytic gradient and a central
/// finite difference over an inclusive margin grid.
double gradient_check(const DpoParams& params, double lo = -10.0, double hi = 10.0,
                      double step = 0.25);

}  // namespace debatekit
