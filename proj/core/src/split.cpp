#include "kgeeg/split.hpp"

#include <set>

namespace kgeeg {

std::vector<std::string> SplitPlan::eval_subjects(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [subject, f] : assignments) {
    if (f == fold) out.push_back(subject);
  }
  return out;
}

std::vector<std::string> SplitPlan::train_subjects(std::size_t fold) const {
  std::vector<std::string> out;
  for (const auto& [subject, f] : assignments) {
    if (f != fold) out.push_back(subject);
  }
  return out;
}

SplitPlan make_split(std::vector<std::string> subjects, SplitScheme scheme, std::size_t k,
                     std::uint64_t seed) {
  std::set<std::string> unique(subjects.begin(), subjects.end());
  subjects.assign(unique.begin(), unique.end());
  if (subjects.empty()) throw ParameterError("cannot split an empty subject list");

  SplitPlan plan;
  plan.scheme = scheme;
  if (scheme == SplitScheme::loso) {
    if (subjects.size() < 2) throw ParameterError("loso needs at least two subjects");
    plan.n_folds = subjects.size();
    for (std::size_t i = 0; i < subjects.size(); ++i) plan.assignments[subjects[i]] = i;
    return plan;
  }
  if (k < 2) throw ParameterError("k-fold needs k >= 2");
  if (k > subjects.size()) {
    throw ParameterError("k = " + std::to_string(k) + " exceeds the " +
                         std::to_string(subjects.size()) + " available subjects");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = subjects.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(subjects[i - 1], subjects[pick(rng)]);
  }
  plan.n_folds = k;
  for (std::size_t i = 0; i < subjects.size(); ++i) plan.assignments[subjects[i]] = i % k;
  return plan;
}

std::size_t fraction_count(std::size_t n, double fraction) {
  if (n == 0) return 0;
  // 1e-9 absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
  auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(keep, 1, n);
}

std::string to_string(SplitScheme scheme) {
  return scheme == SplitScheme::loso ? "loso" : "kfold";
}

SplitScheme parse_split_scheme(const std::string& text) {
  if (text == "loso") return SplitScheme::loso;
  if (text == "kfold") return SplitScheme::kfold;
  throw ParameterError("unknown split scheme '" + text + "'");
}

}  // namespace kgeeg
