#include "debatekit/dpo.hpp"

#include <cmath>

#include "debatekit/errors.hpp"

namespace debatekit {

namespace {

/// log(1 + exp(x)) without overflow for large positive x.
double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Logistic function, evaluated on the side that avoids overflow.
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void ScoredPair::validate() const {
  for (double v : {logp_policy_chosen, logp_policy_rejected, logp_ref_chosen,
                   logp_ref_rejected}) {
    if (!std::isfinite(v)) throw LossError("scored pair has a non-finite log-probability");
    if (v > 0.0) throw LossError("log-probabilities must be <= 0");
  }
  if (chosen_token_count < 1) throw LossError("chosen_token_count must be >= 1");
}

void DpoParams::validate() const {
  if (!(beta > 0.0)) throw LossError("beta must be positive");
  if (nll_weight < 0.0) throw LossError("nll_weight must be >= 0");
  if (!std::isfinite(beta) || !std::isfinite(nll_weight))
    throw LossError("loss parameters must be finite");
}

double dpo_margin(const ScoredPair& pair) {
  pair.validate();
  return (pair.logp_policy_chosen - pair.logp_ref_chosen) -
         (pair.logp_policy_rejected - pair.logp_ref_rejected);
}

double dpo_loss(const ScoredPair& pair, const DpoParams& params) {
  params.validate();
  return softplus(-params.beta * dpo_margin(pair));
}

double nll_term(const ScoredPair& pair) {
  pair.validate();
  return -pair.logp_policy_chosen / pair.chosen_token_count;
}

double total_loss(const ScoredPair& pair, const DpoParams& params) {
  return dpo_loss(pair, params) + params.nll_weight * nll_term(pair);
}

BatchSummary batch_report(const std::vector<ScoredPair>& pairs, const DpoParams& params) {
  params.validate();
  if (pairs.empty()) throw LossError("batch_report: empty batch");
  BatchSummary summary;
  summary.count = static_cast<int>(pairs.size());
  int positive = 0;
  for (const auto& pair : pairs) {
    double margin = dpo_margin(pair);
    summary.mean_margin += margin;
    summary.mean_dpo_loss += dpo_loss(pair, params);
    summary.mean_total_loss += total_loss(pair, params);
    if (margin > 0) ++positive;
  }
  summary.mean_margin /= summary.count;
  summary.mean_dpo_loss /= summary.count;
  summary.mean_total_loss /= summary.count;
  summary.fraction_margin_positive = static_cast<double>(positive) / summary.count;
  return summary;
}

double dpo_loss_gradient(double margin, double beta) {
  return -beta * sigmoid(-beta * margin);
}

double gradient_check(const DpoParams& params, double lo, double hi, double step) {
  params.validate();
  if (!(step > 0.0) || !(hi >= lo)) throw LossError("gradient_check: bad grid");
  const double h = 1e-5;
  auto loss_at = [&](double margin) { return softplus(-params.beta * margin); };
  double worst = 0.0;
  for (double m = lo; m <= hi + step / 2; m += step) {
    double numeric = (loss_at(m + h) - loss_at(m - h)) / (2 * h);
    double analytic = dpo_loss_gradient(m, params.beta);
    worst = std::max(worst, std::abs(numeric - analytic));
  }
  return worst;
}

}  // namespace debatekit
