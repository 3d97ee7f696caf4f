#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgeeg/error.hpp"

namespace kgeeg {

enum class SplitScheme { kfold, loso };

// Subject-wise cross-validation plan. Every subject is evaluated in exactly
// one fold and trained on in all the others.
struct SplitPlan {
  SplitScheme scheme = SplitScheme::kfold;
  std::size_t n_folds = 0;
  std::map<std::string, std::size_t> assignments;  // subject -> eval fold
  double fraction = 1.0;

  std::vector<std::string> eval_subjects(std::size_t fold) const;
  std::vector<std::string> train_subjects(std::size_t fold) const;
};

// kfold: subjects shuffled by `seed`, then dealt round-robin into k folds.
// loso: one fold per subject in sorted order (k is ignored).
SplitPlan make_split(std::vector<std::string> subjects, SplitScheme scheme,
                     std::size_t k, std::uint64_t seed);

// Number of items kept for `fraction` of n: ceil(fraction * n), at least 1
// when n > 0.
std::size_t fraction_count(std::size_t n, double fraction);

// Keeps fraction_count(n) items sampled uniformly without replacement,
// preserving their original order.
template <typename T>
std::vector<T> subset_fraction(std::span<const T> items, double fraction,
                               std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ParameterError("fraction must lie in (0, 1]");
  }
  const std::size_t keep = fraction_count(items.size(), fraction);
  if (keep == items.size()) return {items.begin(), items.end()};
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates, then restore input order.
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  std::vector<T> out;
  out.reserve(keep);
  for (std::size_t i : idx) out.push_back(items[i]);
  return out;
}

template <typename T>
std::vector<T> subset_fraction(const std::vector<T>& items, double fraction,
                               std::uint64_t seed) {
  return subset_fraction(std::span<const T>(items), fraction, seed);
}

std::string to_string(SplitScheme scheme);
SplitScheme parse_split_scheme(const std::string& text);

}  // namespace kgeeg
