#include "lada/sampler.hpp"

#include <algorithm>

namespace lada {

std::string to_string(MixStrategy s) {
  switch (s) {
    case MixStrategy::Random: return "random";
    case MixStrategy::Intra: return "intra";
    case MixStrategy::Inter: return "inter";
  }
  return "?";
}

MixPolicy::Mode mix_mode_from_string(const std::string& s) {
  if (s == "random") return MixPolicy::Mode::Random;
  if (s == "intra") return MixPolicy::Mode::Intra;
  if (s == "inter") return MixPolicy::Mode::Inter;
  if (s == "combined") return MixPolicy::Mode::Combined;
  throw ConfigError("unknown mix mode '" + s + "' (random|intra|inter|combined)");
}

std::string to_string(MixPolicy::Mode m) {
  switch (m) {
    case MixPolicy::Mode::Random: return "random";
    case MixPolicy::Mode::Intra: return "intra";
    case MixPolicy::Mode::Inter: return "inter";
    case MixPolicy::Mode::Combined: return "combined";
  }
  return "?";
}

void MixPolicy::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("mix policy: alpha must be positive");
  if (mu < 0.0 || mu > 1.0) throw ConfigError("mix policy: mu must be in [0, 1]");
  if (pi < 0.0 || pi > 1.0) throw ConfigError("mix policy: pi must be in [0, 1]");
  if (k < 1) throw ConfigError("mix policy: k must be >= 1");
  if (mix_layers.empty()) throw ConfigError("mix policy: mix_layers must not be empty");
}

double sample_lambda(double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw DomainError("sample_lambda: alpha must be positive");
  return rng.beta(alpha, alpha);
}

Sentence apply_permutation(const Sentence& s, const std::vector<std::size_t>& perm) {
  if (perm.size() != s.tokens.size())
    throw DataError("apply_permutation: permutation length mismatch");
  Sentence out;
  out.origin_id = s.origin_id;
  out.tokens.reserve(s.tokens.size());
  out.labels.reserve(s.labels.size());
  for (std::size_t i : perm) {
    out.tokens.push_back(s.tokens.at(i));
    out.labels.push_back(s.labels.at(i));
  }
  return out;
}

Sentence sample_intra(const Sentence& s, Rng& rng) {
  return apply_permutation(s, rng.permutation(s.tokens.size()));
}

int sample_inter(int anchor_id, const KnnIndex& index, double mu, int corpus_size,
                 Rng& rng) {
  if (!index.contains(anchor_id))
    throw DataError("sample_inter: anchor " + std::to_string(anchor_id) + " not indexed");
  if (mu < 0.0 || mu > 1.0) throw DomainError("sample_inter: mu must be in [0, 1]");
  if (corpus_size < 1) throw DataError("sample_inter: empty corpus");
  if (rng.uniform() < mu) {
    const std::vector<int>& nb = index.query(anchor_id);
    return nb[rng.index(nb.size())];
  }
  return static_cast<int>(rng.index(static_cast<std::size_t>(corpus_size)));
}

MixPlan make_mix_plan(int anchor_id, int corpus_size, const MixPolicy& policy,
                      const KnnIndex* index, Rng& rng,
                      std::optional<int> forced_layer) {
  policy.validate();
  MixPlan plan;
  plan.anchor_id = anchor_id;

  switch (policy.mode) {
    case MixPolicy::Mode::Random: plan.strategy = MixStrategy::Random; break;
    case MixPolicy::Mode::Intra: plan.strategy = MixStrategy::Intra; break;
    case MixPolicy::Mode::Inter: plan.strategy = MixStrategy::Inter; break;
    case MixPolicy::Mode::Combined:
      plan.strategy = rng.uniform() < policy.pi ? MixStrategy::Intra : MixStrategy::Inter;
      break;
  }
  if (plan.strategy == MixStrategy::Inter && index == nullptr)
    throw ConfigError("make_mix_plan: Inter strategy requires a kNN index");

  plan.lambda = sample_lambda(policy.alpha, rng);
  if (policy.fold_lambda) plan.lambda = std::max(plan.lambda, 1.0 - plan.lambda);
  plan.mix_layer = forced_layer
                       ? *forced_layer
                       : policy.mix_layers[rng.index(policy.mix_layers.size())];
  if (std::find(policy.mix_layers.begin(), policy.mix_layers.end(), plan.mix_layer) ==
      policy.mix_layers.end())
    throw ConfigError("make_mix_plan: layer " + std::to_string(plan.mix_layer) +
                      " not in the policy's mix-layer set");

  switch (plan.strategy) {
    case MixStrategy::Intra:
      // The permutation is resolved against the anchor's raw token count by
      // the caller; recorded here as indices once the length is known.
      break;
    case MixStrategy::Inter:
      plan.partner_id = sample_inter(anchor_id, *index, policy.mu, corpus_size, rng);
      break;
    case MixStrategy::Random:
      plan.partner_id = static_cast<int>(rng.index(static_cast<std::size_t>(corpus_size)));
      break;
  }
  return plan;
}

}  // namespace lada
